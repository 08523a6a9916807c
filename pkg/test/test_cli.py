# Copyright (C) 2026 sorpy developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

''' pytest tests '''

import hashlib
import json
import os
import sys
import tempfile

import numpy as np
import pandas as pd
from scipy.special import expit

from sorpy.cli import *
from sorpy.results import recomputeci

FLAGS = ['--family', 'poisson', '--response', 'y', '--id', 'id', '--time', 't', '--z', 'z',
         '--covariates', 'x', '--w1', 'x', '--level', 'observation']


def setup_module(m):
    m.testfiles = []
    rng = np.random.default_rng(17)
    n = 1500 * 4
    x = np.repeat((rng.random(1500) < 0.5).astype(float), 4)
    y = rng.poisson(np.exp(0.3 + 0.5 * x))
    z = (rng.random(n) < expit(-2 + 0.8 * y)).astype(int)
    frame = pd.DataFrame({'id': np.repeat(np.arange(1500), 4), 't': np.tile(np.arange(4), 1500), 'x': x, 'y': y, 'z': z})
    frame = frame[rng.random(n) < np.where(z == 1, 0.9, 0.15)]
    m.datafile = tempname(".csv")
    frame.to_csv(m.datafile, index=False)


def teardown_module(module):
    for filename in module.testfiles:
        if os.path.exists(filename):
            os.remove(filename)


def tempname(suffix):
    handle, filename = tempfile.mkstemp(suffix)
    os.close(handle)
    sys.modules[__name__].testfiles.append(filename)
    return filename


def fit(*extra):
    ''' runs sorpy fit on the test data, returns the exit code and the result document '''
    output = tempname(".json")
    code = main(['fit', '--data', datafile] + FLAGS + ['--output', output] + list(extra))
    document = None
    if code == OK and os.path.getsize(output):
        with open(output, encoding='utf-8') as f:
            document = json.load(f)
    return code, document


def test_version(capsys):
    assert main(['version']) == OK
    assert capsys.readouterr().out.strip() == "sorpy 0.1.0"


def test_usage_errors(capsys):
    assert main([]) == USAGE
    assert main(['fit']) == USAGE
    assert main(['transmogrify']) == USAGE
    assert 'sorpy' in capsys.readouterr().err


def test_fit_document():
    csv = tempname(".csv")
    code, document = fit('--ratio', 'all=6', '--exp', '--csv', csv)
    assert code == OK
    assert document['version'] == "0.1.0"
    with open(datafile, 'rb') as f:
        assert document['input_sha256'] == hashlib.sha256(f.read()).hexdigest()
    assert document['config']['design']['ratio'] == {'all': 6.0}
    assert document['estimator'] == 'sor'
    assert document['exponentiated'] is True
    assert [g['name'] for g in document['gamma']] == ['(Intercept)', 'x', 'y:(Intercept)']
    assert document['convergence']['converged']
    assert document['y0_used'] == 0.0
    for entry in document['estimates']:
        lower, upper = recomputeci(entry)
        assert abs(lower - entry['lower']) < 1e-12 and abs(upper - entry['upper']) < 1e-12
        assert abs(np.exp(entry['estimate']) - entry['exp_estimate']) < 1e-12 * entry['exp_estimate']
    np.testing.assert_allclose([e['estimate'] for e in document['estimates']], [0.3, 0.5], atol=0.15)
    table = pd.read_csv(csv)
    assert list(table.name) == ['(Intercept)', 'x']
    assert 'exp_lower' in table.columns


def test_unit_ratio_matches_naive():
    code, sor = fit('--ratio', 'all=1')
    assert code == OK
    code, naive = fit('--estimator', 'naive')
    assert code == OK
    assert naive['estimator'] == 'naive'
    for a, b in zip(sor['estimates'], naive['estimates']):
        assert abs(a['estimate'] - b['estimate']) < 1e-8
        assert abs(a['se'] - b['se']) < 1e-6 * b['se']


def test_ratio_sweep():
    code, document = fit('--ratio', 'all=6', '--ratio-scale', '0.667,1,1.5')
    assert code == OK
    assert [f['ratio_scale'] for f in document['fits']] == [0.667, 1.0, 1.5]
    intercepts = [f['estimates'][0]['estimate'] for f in document['fits']]
    # believing in a stronger bias moves the intercept further down
    assert intercepts[0] > intercepts[1] > intercepts[2]


def test_ipw_from_probabilities():
    code, document = fit('--estimator', 'ipw', '--probs', 'all=0.9,0.15')
    assert code == OK
    assert document['estimator'] == 'ipw'
    assert 'gamma' not in document


def test_bad_input_exits_with_one(capsys):
    assert fit('--ratio', 'all=abc')[0] == USAGE
    assert fit('--estimator', 'ipw', '--ratio', 'all=6')[0] == USAGE
    assert fit('--ratio', 'all=6', '--ratio-stratum', 'all')[0] == USAGE
    assert fit('--ratio', 'all=6', '--response', 'nope')[0] == USAGE
    assert fit('--ratio', '1=6')[0] == USAGE
    assert "nope" in capsys.readouterr().err


def test_solver_failure_exits_with_two(capsys):
    config = tempname(".json")
    with open(config, 'w', encoding='utf-8') as f:
        json.dump({'family': 'poisson', 'response': 'y', 'id': 'id', 'time': 't', 'design': {'ratio': {'all': 6.0}},
                   'tolerances': {'maxiter': 1}}, f)
    code, _ = fit('--config', config)
    assert code == FAILURE
    assert "beta" in capsys.readouterr().err


def test_simulate_is_deterministic(monkeypatch):
    monkeypatch.setenv('SORPY_THREADS', '1')
    scenario = tempname(".json")
    with open(scenario, 'w', encoding='utf-8') as f:
        json.dump({'name': 'cli', 'generator': 'observation_gaussian', 'params': {'nsubjects': 200},
                   'designs': [{'design': 'random', 'estimators': ['naive'], 'correlation': 'exchangeable'},
                               {'design': 'ODS', 'estimators': ['naive', 'sor']}],
                   'baseline': 'random', 'replicates': 3, 'seed': 5}, f)
    first, second = tempname(".csv"), tempname(".csv")
    assert main(['simulate', '--scenario', scenario, '--replicates', '2', '--output', first]) == OK
    assert main(['simulate', '--scenario', scenario, '--replicates', '2', '--output', second]) == OK
    with open(first, encoding='utf-8') as a, open(second, encoding='utf-8') as b:
        text = a.read()
        assert text == b.read()
    table = pd.read_csv(first)
    assert list(table.columns)[:4] == ['scenario', 'design', 'estimator', 'parameter']
    assert len(table) == 12
    assert set(table.scenario) == {'cli'}


def test_simulate_errors():
    assert main(['simulate']) == USAGE
    assert main(['simulate', '--preset', 'table9']) == USAGE
    assert main(['simulate', '--preset', 'table1_p15', '--scenario', 'x.json']) == USAGE
