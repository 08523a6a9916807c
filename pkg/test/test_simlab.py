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

import math
import os
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
from scipy.stats import poisson

from sorpy.comparators import IPW, NAIVE
from sorpy.errors import CalibrationError, ConfigError
from sorpy.simlab import *

slow = pytest.mark.skipif(not os.environ.get('SORPY_SLOW'), reason="set SORPY_SLOW=1 to run the Monte Carlo checks")

INDEPENDENT = SubjectPoissonParams(nsubjects=20000, alpha=0.0)


def subjectstarts(frame):
    ids = frame.id.to_numpy()
    return np.flatnonzero(np.r_[True, ids[1:] != ids[:-1]])


def test_poissonquantile():
    rng = np.random.default_rng(1)
    u = rng.random(3000)
    mu = rng.choice([0.3, 2.0, 7.5], size=3000)
    np.testing.assert_array_equal(poissonquantile(u, mu), poisson.ppf(u, mu))


def test_subject_population():
    population = gen_subject_population(INDEPENDENT, 1)
    frame = population.frame
    assert population.level == SUBJECT
    assert list(frame.columns) == ['id', 't', 'y', 'x1', 't:x1', '(t-2)+', 'z']
    sizes = frame.groupby('id').size()
    assert sizes.min() >= 3 and sizes.max() <= 8
    assert frame.groupby('id').z.nunique().max() == 1
    assert frame.groupby('id').x1.nunique().max() == 1
    np.testing.assert_array_equal(frame['(t-2)+'], np.maximum(frame.t - 2, 0))
    first = frame.groupby('id').first()
    assert abs(first.x1.mean() - 0.15) < 0.02
    baseline = first[first.x1 == 0].y
    assert abs(baseline.mean() - math.exp(-1.4)) < 0.03
    # Z follows the first count: 0.0411 without, 0.9589 with a positive first count
    assert abs(first[first.y == 0].z.mean() - 0.0411) < 0.01
    assert abs(first[first.y >= 1].z.mean() - 0.9589) < 0.015


def test_copula_gives_the_pair_correlation():
    params = SubjectPoissonParams(nsubjects=20000)
    frame = gen_subject_population(params, 2).frame
    mu = np.exp(-1.4 + 0.4 * frame.x1 - 0.1 * frame.t + 0.1 * frame['t:x1']).to_numpy()
    e = (frame.y.to_numpy() - mu) / np.sqrt(mu)
    assert abs(pairedcorrelation(e, subjectstarts(frame)) - 0.5) < 0.03


def test_calibration_rejects_impossible_correlations():
    with pytest.raises(CalibrationError):
        latentcorrelation((-1.4, 0.4, -0.1, 0.1), 0.15, 1.5, 3, 8)
    assert latentcorrelation((-1.4, 0.4, -0.1, 0.1), 0.15, 0.0, 3, 8) == 0.0


def test_observation_population():
    params = ObservationGaussianParams(nsubjects=500)
    population = gen_observation_population(params, 3)
    frame = population.frame
    assert population.level == OBSERVATION
    assert len(frame) == 5000
    assert abs(frame.z.mean() - 0.10) < 0.002
    assert frame.groupby('id').x1.nunique().max() == 1
    assert abs(frame.y.var() - 1.0) < 0.1


def test_avs_samples_each_z_cell_equally():
    population = gen_subject_population(INDEPENDENT, 4)
    sample = apply_design(population, AVS, 250, 5)
    table = sample.table.set_index('cell')
    assert list(table.index) == ['1', '0']
    np.testing.assert_allclose(table.pi * table.population, 125.0)
    assert abs(table.sampled.sum() - 250) < 60
    assert sample.data.nsubjects == table.sampled.sum()
    pi1, pi0 = table.pi['1'], table.pi['0']
    assert sample.design.probs('0') == pytest.approx((pi1, pi0))
    assert sample.design.probs('1') == pytest.approx((pi1, pi0))
    assert sample.design.ratio('1') == pytest.approx(pi1 / pi0)
    assert sample.design.nointerference
    assert set(sample.data.strata) <= {'0', '1'}
    assert sample.selected.sum() == sample.data.nobs


def test_eavs_and_es_designs():
    population = gen_subject_population(INDEPENDENT, 6)
    eavs = apply_design(population, EAVS, 250, 7)
    table = eavs.table.set_index('cell')
    assert list(table.index) == ['1,1', '1,0', '0,1', '0,0']
    assert eavs.design.probs('1') == pytest.approx((table.pi['1,1'], table.pi['0,1']))
    assert eavs.design.probs('0') == pytest.approx((table.pi['1,0'], table.pi['0,0']))
    es = apply_design(population, ES, 250, 8)
    assert es.design.ratio('0') == pytest.approx(1.0)
    assert es.design.ratio('1') == pytest.approx(1.0)
    srs = apply_design(population, SRS, 250, 9)
    assert list(srs.table.cell) == ['all']


def test_design_errors():
    population = gen_subject_population(replace(INDEPENDENT, nsubjects=500, prevalence=0.0), 10)
    with pytest.raises(ConfigError):
        apply_design(population, ODS, 250, 1)
    with pytest.raises(ConfigError):
        apply_design(population, ES, 250, 1)


def test_ods_and_random_designs():
    population = gen_observation_population(ObservationGaussianParams(nsubjects=500), 11)
    ods = apply_design(population, ODS, 0, 12)
    assert ods.design.probs('all') == (1.0, 0.11)
    table = ods.table.set_index('cell')
    assert table.sampled['1'] == table.population['1']
    random = apply_design(population, RANDOM, 0, 12)
    assert random.design.unbiased
    pi = random.design.probs('all')[0]
    assert pi == pytest.approx(0.1 * 1.0 + 0.9 * 0.11, abs=0.002)


def test_misspecify():
    design = apply_design(gen_subject_population(INDEPENDENT, 13), AVS, 250, 14).design
    assert misspecify(design, 1.0) is design
    wrong = misspecify(design, 1.5, '1')
    assert wrong.ratio('1') == pytest.approx(1.5 * design.ratio('1'))
    assert wrong.ratio('0') == pytest.approx(design.ratio('0'))


def test_auxspec():
    subject = auxspec(SUBJECT)
    assert subject.w1 == ('x1', 't', '(t-2)+') and subject.w2 == subject.w1
    assert str(subject.h) == "I(y>=1)"
    assert auxspec(OBSERVATION).w1 == ('x1', 't')


def test_percentbias():
    assert percentbias(-1.372, -1.4) == pytest.approx(-2.0)
    assert percentbias(0.013, 0.0) == pytest.approx(1.3)


def test_summarize():
    scenario = SimScenario('toy', SUBJECT_POISSON, SubjectPoissonParams(), (DesignRun(SRS, (NAIVE,)), DesignRun(AVS, (NAIVE, SOR))),
                           baseline=SRS, replicates=3)
    truth = scenario.truth
    ones = np.ones(4)
    records = [[(SRS, NAIVE, truth + 0.1, ones), (AVS, NAIVE, truth + 0.2, 0.05 * ones), (AVS, SOR, None, None)],
               [(SRS, NAIVE, truth - 0.1, ones), (AVS, NAIVE, truth, 0.05 * ones), (AVS, SOR, truth + 0.05, 0.1 * ones)],
               [(SRS, NAIVE, truth, ones), (AVS, NAIVE, truth + 0.1, 0.05 * ones), (AVS, SOR, truth - 0.05, 0.1 * ones)]]
    table = summarize(scenario, records)
    assert len(table) == 12
    assert list(table.frame.columns) == list(METRICS)
    srs = table.row(SRS, NAIVE, '(Intercept)')
    assert srs.mean_est == pytest.approx(-1.4)
    assert srs.emp_var == pytest.approx(0.01)
    assert srs.coverage == 100
    assert srs.rel_eff == pytest.approx(1.0)
    avs = table.row(AVS, NAIVE, '(Intercept)')
    assert avs.pct_bias == pytest.approx(100 * 0.1 / -1.4)
    assert avs.coverage == pytest.approx(100 / 3)
    sor = table.row(AVS, SOR, 'x1')
    assert sor.n_failed == 1
    assert sor.emp_var == pytest.approx(0.005)
    assert sor.rel_eff == pytest.approx(2.0)
    assert table.tocsv().splitlines()[0] == ",".join(METRICS)


def test_scenario_validation():
    with pytest.raises(ConfigError):
        SimScenario('x', 'cluster_binary', SubjectPoissonParams(), ())
    with pytest.raises(ConfigError):
        SimScenario('x', SUBJECT_POISSON, SubjectPoissonParams(), (DesignRun(ODS, (NAIVE,)),))
    with pytest.raises(ConfigError):
        SimScenario('x', SUBJECT_POISSON, SubjectPoissonParams(), (DesignRun(AVS, ('mle',)),))
    with pytest.raises(ConfigError):
        SimScenario('x', SUBJECT_POISSON, SubjectPoissonParams(), (), replicates=0)


def test_presets():
    with pytest.raises(ConfigError):
        preset('table9')
    with pytest.raises(ConfigError):
        preset('table1_p15', scale='huge')
    assert preset('table1_p50')[0].params.prevalence == 0.5
    table2 = preset('table2')
    assert [s.name for s in table2] == ['table2_p15_f0.667', 'table2_p15_f1.5', 'table2_p50_f0.667', 'table2_p50_f1.5']
    assert all(s.stratum is None and s.baseline is None for s in table2)
    assert all(s.stratum == '1' for s in preset('table3'))
    full = preset('table1_p15', scale='full', replicates=7, seed=99)[0]
    assert full.params.nsubjects == 100000 and full.target == 500
    assert full.replicates == 7 and full.seed == 99
    r40 = preset('table4_r40')[0]
    assert r40.params.prevalence == 0.1 and r40.params.beta[1] == 0.68
    assert r40.baseline == RANDOM


def test_threads(monkeypatch):
    monkeypatch.setenv('SORPY_THREADS', '3')
    assert threads() == 3
    monkeypatch.setenv('SORPY_THREADS', 'many')
    with pytest.raises(ConfigError):
        threads()


def smallscenario():
    params = ObservationGaussianParams(nsubjects=200)
    designs = (DesignRun(RANDOM, (NAIVE,), EXCHANGEABLE), DesignRun(ODS, (NAIVE, SOR, IPW)))
    return SimScenario('small', OBSERVATION_GAUSSIAN, params, designs, baseline=RANDOM, replicates=2, seed=3)


def test_replicate_records():
    records = run_replicate(smallscenario(), 0)
    assert [(d, e) for d, e, _, _ in records] == [(RANDOM, NAIVE), (ODS, NAIVE), (ODS, SOR), (ODS, IPW)]
    for _, _, beta, se in records:
        assert beta is not None and se is not None
        assert len(beta) == 4 and len(se) == 4
        assert np.all(np.isfinite(beta))
        assert np.all(np.isfinite(se)) and np.all(np.asarray(se) > 0)


def test_scenarios_are_deterministic(monkeypatch):
    monkeypatch.setenv('SORPY_THREADS', '1')
    first = run_scenario(smallscenario())
    again = run_scenario(smallscenario())
    assert first.tocsv() == again.tocsv()
    assert len(first) == 16
    coverage = first.frame.coverage.dropna()
    assert ((coverage >= 0) & (coverage <= 100)).all()
    monkeypatch.setenv('SORPY_THREADS', '2')
    parallel = run_scenario(smallscenario())
    pd.testing.assert_frame_equal(parallel.frame, first.frame, rtol=1e-10)


@slow
def test_avs_operating_characteristics():
    scenario = preset('table1_p15', replicates=200)[0]
    table = run_scenario(scenario)
    naive = table.row(AVS, NAIVE, '(Intercept)')
    assert naive.pct_bias < -25
    assert naive.coverage < 20
    for estimator in (IPW, SOR):
        row = table.row(AVS, estimator, '(Intercept)')
        assert abs(row.pct_bias) <= 5
        assert 88 <= row.coverage <= 99
        assert row.rel_eff > 0


def presetscenario(presetname, name, replicates=None):
    return next(s for s in preset(presetname, replicates=replicates) if s.name == name)


@slow
def test_misspecified_ratio_overall():
    table = run_scenario(presetscenario('table2', 'table2_p15_f1.5', replicates=100))
    assert 10 <= table.row(AVS, SOR, '(Intercept)').pct_bias <= 24
    assert -26 <= table.row(AVS, SOR, 't').pct_bias <= -12


@slow
def test_misspecified_ratio_in_one_stratum():
    table = run_scenario(presetscenario('table3', 'table3_p15_f1.5', replicates=100))
    assert -56 <= table.row(AVS, SOR, 'x1').pct_bias <= -36
    assert -4 <= table.row(AVS, SOR, '(Intercept)').pct_bias <= 6


@slow
def test_gaussian_outcome_dependent_sampling():
    table = run_scenario(presetscenario('table4_r12', 'table4_r12'))
    assert 90 <= table.row(ODS, NAIVE, 'x1').pct_bias <= 120
    sor = table.row(ODS, SOR, 'x1')
    assert abs(sor.pct_bias) <= 3
    assert 92 <= sor.coverage <= 97
    for parameter in PARAMETERS:
        assert table.row(ODS, SOR, parameter).rel_eff > 1.4
        assert table.row(ODS, IPW, parameter).rel_eff < 1.0
