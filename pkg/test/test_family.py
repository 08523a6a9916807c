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

import doctest
import math

import numpy as np
import pytest
from scipy.integrate import quad

from sorpy.auxiliary import AuxiliarySpec, HSpec
from sorpy.design import OBSERVATION, SamplingDesign, tilt_for_observation
from sorpy.errors import ConfigError, DomainError, NumericError
import sorpy.family
from sorpy.family import *


def randominstance(rng):
    ''' a random family, theta, phi and design tilt '''
    kind = rng.choice(KINDS)
    if kind == GAUSSIAN:
        fam = FamilySpec.gaussian(rng.normal())
        theta, phi = rng.normal(), rng.uniform(0.3, 3.0)
        h = [HSpec(), HSpec.fromconfig('abs'), HSpec.fromconfig({'indicator': rng.normal()})][rng.integers(3)]
    elif kind == POISSON:
        fam = FamilySpec.poisson()
        theta, phi = rng.normal(0.5, 0.7), 1.0
        h = [HSpec(), HSpec.fromconfig({'indicator': 1})][rng.integers(2)]
    else:
        fam = FamilySpec.bernoulli()
        theta, phi = rng.normal(0, 1.5), 1.0
        h = HSpec()
    r = math.exp(rng.uniform(-3, 3))
    design = SamplingDesign(OBSERVATION, (), {'all': r})
    gamma = [rng.normal(), rng.normal()]
    obs = type('Obs', (), {'w1': [1.0], 'w2': [1.0], 'stratum': 'all'})
    tilt = tilt_for_observation(obs, gamma, AuxiliarySpec((), (), h), design, fam.y0)
    return fam, theta, phi, tilt, h


def sampledensity(y, theta, phi, fam, tilt, b):
    y = np.asarray(y, dtype=float)
    return np.exp((theta * y - b) / phi + fam.c(y, phi) - fam.c(fam.y0, phi) + tilt(y))


def totalmass(fam, theta, phi, tilt, h):
    b = bstar(theta, phi, fam, tilt)
    if fam.kind == BERNOULLI:
        return float(np.sum(sampledensity(np.array([0.0, 1.0]), theta, phi, fam, tilt, b)))
    if fam.kind == POISSON:
        return float(np.sum(sampledensity(np.arange(300.0), theta, phi, fam, tilt, b)))
    lo, hi = theta - 20 * math.sqrt(phi), theta + 20 * math.sqrt(phi)
    points = [p for p in h.breakpoints if lo < p < hi] or None
    value, _ = quad(lambda v: float(sampledensity(v, theta, phi, fam, tilt, b)), lo, hi,
                    points=points, epsabs=1e-13, epsrel=1e-12, limit=500)
    return value


def test_sample_density_integrates_to_one():
    rng = np.random.default_rng(2014)
    for _ in range(200):
        fam, theta, phi, tilt, h = randominstance(rng)
        assert totalmass(fam, theta, phi, tilt, h) == pytest.approx(1.0, abs=1e-7)


def test_gaussian_exponential_tilt():
    fam = FamilySpec.gaussian(0.3)
    for theta, phi, a in [(0.0, 1.0, 0.5), (1.5, 2.0, -0.7), (-2.0, 0.5, 1.2)]:
        tilt = TiltFunction(lambda y, a=a: a * (np.asarray(y) - fam.y0))
        m = sample_moments(theta, phi, fam, tilt)
        assert m.mu_S == pytest.approx(theta + a * phi, rel=1e-7, abs=1e-9)
        assert m.var_S == pytest.approx(phi, rel=1e-7)


def test_poisson_exponential_tilt():
    fam = FamilySpec.poisson()
    for lam, a in [(2.0, 0.5), (0.3, 1.0), (8.0, -0.4)]:
        tilt = TiltFunction(lambda y, a=a: a * np.asarray(y))
        m = sample_moments(math.log(lam), 1.0, fam, tilt)
        assert m.mu_S == pytest.approx(lam * math.exp(a), rel=1e-7)
        assert m.var_S == pytest.approx(lam * math.exp(a), rel=1e-7)


def test_zero_tilt_gives_population_moments():
    fam = FamilySpec.gaussian(0.0)
    m = sample_moments(1.3, 2.0, fam, TiltFunction.zero())
    assert m.mu_S == pytest.approx(1.3, abs=1e-9)
    assert m.var_S == pytest.approx(2.0, rel=1e-8)
    m = sample_moments(math.log(4.0), 1.0, FamilySpec.poisson(), TiltFunction.zero())
    assert m.mu_S == pytest.approx(4.0, rel=1e-10)


def test_bernoulli_moments_in_closed_form():
    fam = FamilySpec.bernoulli()
    theta = canonical_theta(0.25, fam)
    tilt = TiltFunction.fromratio(lambda y: np.where(y == 1, 4.0, 1.0), bound=4.0)
    m = sample_moments(theta, 1.0, fam, tilt)
    assert m.mu_S == pytest.approx(4 / 7, abs=1e-12)
    assert m.var_S == pytest.approx(4 / 7 * 3 / 7, abs=1e-12)


def test_population_odds_of_y0_is_one():
    for fam in (FamilySpec.gaussian(0.7), FamilySpec.poisson(2.0), FamilySpec.bernoulli()):
        assert population_odds(fam.y0, 0.4, 1.0, fam) == pytest.approx(1.0)


def test_canonical_theta_round_trip():
    for fam, mu in [(FamilySpec.gaussian(0.0), -3.2), (FamilySpec.poisson(), 7.5), (FamilySpec.bernoulli(), 0.9)]:
        assert float(fam.bprime(canonical_theta(mu, fam))) == pytest.approx(mu, rel=1e-12)


def test_canonical_theta_outside_mean_space():
    with pytest.raises(DomainError):
        canonical_theta(-1.0, FamilySpec.poisson())
    with pytest.raises(DomainError):
        canonical_theta(1.0, FamilySpec.bernoulli())


def test_response_outside_support():
    with pytest.raises(DomainError):
        population_odds(2.5, 0.0, 1.0, FamilySpec.poisson())
    with pytest.raises(DomainError):
        population_odds(2.0, 0.0, 1.0, FamilySpec.bernoulli())


def test_unknown_family():
    with pytest.raises(ConfigError):
        FamilySpec.fromname('gamma')
    assert FamilySpec.fromname('Normal', 1.0) == FamilySpec.gaussian(1.0)


def test_gaussian_needs_y0():
    with pytest.raises(ConfigError):
        population_odds(0.0, 0.0, 1.0, FamilySpec.gaussian())


def test_tilt_function_broadcasts():
    tilt = TiltFunction.zero()
    assert tilt.iszero
    assert tilt(np.ones((3, 4))).shape == (3, 4)
    assert not TiltFunction.fromratio(lambda y: 2.0 + 0 * y).iszero


def test_tilted_law_level_is_reused():
    fam = FamilySpec.gaussian(0.0)
    tilt = TiltFunction.fromratio(lambda y: np.where(y >= 0, 3.0, 1.0), bound=3.0, breakpoints=(0.0,))
    law = tilted_law(fam, [0.0, 1.0], 1.0, tilt)
    again = tilted_law(fam, [0.0, 1.0], 1.0, tilt, level=law.level)
    np.testing.assert_allclose(again.mean, law.mean, rtol=0, atol=0)
    assert len(law) == 2


def test_gaussian_step_tilt_accuracy():
    # ratio 2 on y >= 0 of N(0, phi): mean sqrt(phi) * pdf(0) / 1.5, second moment phi
    tilt = TiltFunction.fromratio(lambda y: np.where(y >= 0, 2.0, 1.0), bound=2.0, breakpoints=(0.0,))
    for phi in (1.0, 0.01):
        m = sample_moments(0.0, phi, FamilySpec.gaussian(0.0), tilt)
        mean = math.sqrt(phi) / math.sqrt(2 * math.pi) / 1.5
        assert m.mu_S == pytest.approx(mean, rel=1e-8)
        assert m.var_S == pytest.approx(phi - mean ** 2, rel=1e-8)
        assert m.log_normalizer == pytest.approx(math.log(1.5) + 0.5 * math.log(2 * math.pi * phi), abs=1e-9)

    # y0 where the log normalizer vanishes, the stopping rule is then absolute in the log
    phi = 0.01
    y0 = math.sqrt(-2 * phi * math.log(1.5 * math.sqrt(2 * math.pi * phi)))
    m = sample_moments(0.0, phi, FamilySpec.gaussian(y0), tilt)
    assert abs(m.log_normalizer) < 1e-8
    assert m.mu_S == pytest.approx(0.1 / math.sqrt(2 * math.pi) / 1.5, rel=1e-8)


def test_unbounded_tilt_fails_to_converge():
    fam = FamilySpec.poisson()
    tilt = TiltFunction(lambda y: np.asarray(y) * np.log1p(y))
    with pytest.raises(NumericError) as info:
        tilted_law(fam, [0.0], 1.0, tilt, QuadratureConfig(maxlevel=2))
    assert 'tailweight' in info.value.diagnostics


def test_log_sample_density_of_a_discrete_law():
    fam = FamilySpec.poisson()
    tilt = TiltFunction.fromratio(lambda y: np.where(y >= 1, 2.0, 1.0), bound=2.0)
    probs = np.exp(log_sample_density(np.arange(60.0), 0.0, 1.0, fam, tilt))
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert probs[0] == pytest.approx(math.exp(-1) / (math.exp(-1) + 2 * (1 - math.exp(-1))), rel=1e-12)


def test_step_tilted_poisson_mean():
    tilt = TiltFunction.fromratio(lambda y: np.where(y >= 1, 2.0, 1.0), bound=2.0)
    m = sample_moments(0.0, 1.0, FamilySpec.poisson(), tilt)
    assert m.mu_S == pytest.approx(2 / (2 - math.exp(-1)), rel=1e-12)


def test_docstring_examples():
    result = doctest.testmod(sorpy.family)
    assert result.attempted > 0
    assert result.failed == 0
