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

import os
import tempfile

import numpy as np
import pandas as pd
import pytest

import examples
from sorpy.auxiliary import auxmatrix, fit_aux
from sorpy.config import FitConfig
from sorpy.dataset import read_long_csv


def setup_module(m):
    m.adhdfile = tempfile.mktemp(".csv")
    m.biocyclefile = tempfile.mktemp(".csv")
    m.ratios = examples.createadhd(m.adhdfile)
    examples.createbiocycle(m.biocyclefile)


def teardown_module(module):
    for filename in (module.adhdfile, module.biocyclefile):
        if os.path.exists(filename):
            os.remove(filename)


def test_createadhd():
    assert ratios['1'] == pytest.approx(22.619, abs=5e-4)
    assert ratios['0'] == pytest.approx(6.6701, abs=5e-5)
    frame = pd.read_csv(adhdfile)
    children = frame.groupby('child').first()
    assert len(children) == 25 + 21 + 113 + 96
    assert children.referred.sum() == 25 + 113
    assert (children[children.female == 1].referred == 1).sum() == 25
    assert frame.groupby('child').referred.nunique().max() == 1


def test_createbiocycle():
    frame = pd.read_csv(biocyclefile)
    assert set(frame.peak) == {0.0, 1.0}
    assert frame.groupby('woman').bmi.nunique().max() == 1
    # peak days are a tenth of all days but a third of them are kept
    assert 0.15 < frame.peak.mean() < 0.35


def test_describe(capsys):
    examples.describe(adhdfile)
    out = capsys.readouterr().out
    assert 'subjects' in out and '255' in out


def test_fitdemo_adhd():
    sor, naive = examples.fitdemo(adhdfile)
    assert sor.method == 'sor' and naive.method == 'naive'
    assert sor.converged
    assert sor.correlation == 'exchangeable'
    assert len(sor.beta) == 9
    assert sor.names[0] == '(Intercept)'
    # referred children with high counts are oversampled
    assert sor.beta[0] < naive.beta[0]


def test_fitdemo_biocycle():
    sor, naive = examples.fitdemo(biocyclefile, examples.BIOCYCLECONFIG, exponentiate=False)
    assert sor.correlation == 'independence'
    assert sor.phi > 0
    assert sor.y0_used is not None
    assert len(sor.gamma) == 16


def test_sensitivity():
    table = examples.sensitivity(adhdfile, scales=(2 / 3, 1, 1.5), stratum='1')
    assert list(table.columns) == ['x0.667', 'x1', 'x1.5']
    assert list(table.index)[0] == '(Intercept)'
    assert table.shape == (9, 3)


def test_adhd_auxiliary_fit_against_statsmodels():
    sm = pytest.importorskip('statsmodels.api')
    config = FitConfig.load(examples.ADHDCONFIG)
    data = read_long_csv(adhdfile, config)
    design = config.samplingdesign()
    spec = config.auxspec()
    model = fit_aux(data, spec, design)
    assert model.converged
    assert np.all(np.isfinite(model.gamma))
    offset = np.log(design.rowratios(data.strata))
    reference = sm.GLM(data.z, auxmatrix(data, spec.h), family=sm.families.Binomial(), offset=offset).fit(tol=1e-12)
    np.testing.assert_allclose(model.gamma, reference.params, atol=1e-6)
    assert model.gamma[0] == pytest.approx(-2.57, abs=0.5)
