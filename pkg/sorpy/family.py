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

'''
Exponential families in odds-model representation.

A density of the family is written relative to a reference value y0,

    odds_P(y) = dF_P(y) / dF_P(y0) = exp{theta (y - y0) / phi + c(y; phi) - c(y0; phi)}

which makes it easy to tilt by a sampling ratio: multiplying the odds by
rho(y)/rho(y0) gives the odds of the response in a biased sample. This module
computes such tilted laws and their moments by quadrature (Gaussian) or by
truncated summation over the support (Poisson, Bernoulli).

>>> fam = FamilySpec.poisson()
>>> round(population_odds(1, math.log(2), 1.0, fam), 12)
2.0
>>> m = sample_moments(0.0, 1.0, fam, TiltFunction.zero())
>>> round(m.mu_S, 9), round(m.var_S, 9)
(1.0, 1.0)
'''

# pylint: disable-msg=C0103
# C0103: names like mu_S, var_S and infoTT follow the notation of the estimating equations

import math
import logging
from collections import namedtuple
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import expit, gammaln, logit, logsumexp

from sorpy.errors import ConfigError, DomainError, NumericError

log = logging.getLogger(__name__)

GAUSSIAN, POISSON, BERNOULLI = 'gaussian', 'poisson', 'bernoulli'
KINDS = (GAUSSIAN, POISSON, BERNOULLI)

_SUPPORTS = {GAUSSIAN: 'real line', POISSON: 'nonneg-integers', BERNOULLI: '{0,1}'}


@dataclass(frozen=True)
class FamilySpec:
    '''
    An exponential family with canonical link, together with the reference value y0.

    * **kind**: one of 'gaussian', 'poisson', 'bernoulli'
    * **y0**: the reference response. Defaults to 0 for Poisson and Bernoulli. Gaussian
      families get their y0 at fit time (the sample median), see `withy0`.

    >>> FamilySpec.bernoulli()
    FamilySpec(kind='bernoulli', y0=0.0)
    >>> FamilySpec.gaussian(0.5).support
    'real line'
    '''
    kind: str
    y0: float = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError("unknown family '{}', expected one of {}".format(self.kind, ", ".join(KINDS)))
        if self.y0 is None:
            if self.kind != GAUSSIAN:
                object.__setattr__(self, 'y0', 0.0)
        else:
            object.__setattr__(self, 'y0', float(self.y0))
            if not self.insupport(self.y0):
                raise DomainError("reference value y0={} is not in the support of the {} family".format(self.y0, self.kind))

    @staticmethod
    def gaussian(y0=None):
        ''' Gaussian family, identity link '''
        return FamilySpec(GAUSSIAN, y0)

    @staticmethod
    def poisson(y0=0.0):
        ''' Poisson family, log link '''
        return FamilySpec(POISSON, y0)

    @staticmethod
    def bernoulli(y0=0.0):
        ''' Bernoulli family, logit link '''
        return FamilySpec(BERNOULLI, y0)

    @staticmethod
    def fromname(name, y0=None):
        ''' creates a family from its configuration name '''
        name = str(name).lower()
        aliases = {'normal': GAUSSIAN, 'binomial': BERNOULLI, 'binary': BERNOULLI}
        return FamilySpec(aliases.get(name, name), y0)

    def withy0(self, y0):
        ''' returns a copy with reference value `y0` '''
        return replace(self, y0=float(y0))

    @property
    def support(self):
        ''' a description of the support of y '''
        return _SUPPORTS[self.kind]

    @property
    def discrete(self):
        ''' True for Poisson and Bernoulli '''
        return self.kind != GAUSSIAN

    @property
    def fixedphi(self):
        ''' Poisson and Bernoulli fix the dispersion at 1 '''
        return self.kind != GAUSSIAN

    def insupport(self, y):
        ''' elementwise test whether `y` lies in the support '''
        y = np.asarray(y, dtype=float)
        if self.kind == GAUSSIAN:
            return np.isfinite(y)
        if self.kind == POISSON:
            return np.isfinite(y) & (y >= 0) & (y == np.floor(y))
        return (y == 0) | (y == 1)

    def inmeanspace(self, mu):
        ''' elementwise test whether `mu` lies in the interior of the mean space '''
        mu = np.asarray(mu, dtype=float)
        if self.kind == GAUSSIAN:
            return np.isfinite(mu)
        if self.kind == POISSON:
            return np.isfinite(mu) & (mu > 0)
        return (mu > 0) & (mu < 1)

    # cumulant function and its derivatives
    def b(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == GAUSSIAN:
            return theta * theta / 2
        if self.kind == POISSON:
            return np.exp(theta)
        return np.logaddexp(0.0, theta)

    def bprime(self, theta):
        ''' the mean as a function of theta, which for canonical links is also the inverse link '''
        theta = np.asarray(theta, dtype=float)
        if self.kind == GAUSSIAN:
            return theta
        if self.kind == POISSON:
            return np.exp(theta)
        return expit(theta)

    linkinv = bprime

    def bsecond(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == GAUSSIAN:
            return np.ones_like(theta)
        if self.kind == POISSON:
            return np.exp(theta)
        p = expit(theta)
        return p * (1 - p)

    def c(self, y, phi):
        ''' the base measure term c(y; phi) '''
        y = np.asarray(y, dtype=float)
        if self.kind == GAUSSIAN:
            return -y * y / (2 * phi) - 0.5 * np.log(2 * math.pi * phi)
        if self.kind == POISSON:
            return -gammaln(y + 1)
        return np.zeros_like(y)

    def dcdphi(self, y, phi):
        ''' derivative of c(y; phi) in phi. zero for the fixed-dispersion families '''
        y = np.asarray(y, dtype=float)
        if self.kind == GAUSSIAN:
            return y * y / (2 * phi * phi) - 1 / (2 * phi)
        return np.zeros_like(y)

    def logdensity(self, y, theta, phi):
        ''' log dF_P(y) in the population '''
        return (theta * np.asarray(y, dtype=float) - self.b(theta)) / phi + self.c(y, phi)

    def variance(self, theta, phi):
        ''' population variance phi * b''(theta) '''
        return phi * self.bsecond(theta)


def _firstbad(ok):
    return int(np.flatnonzero(~np.atleast_1d(ok))[0])


def canonical_theta(mu_P, family):
    '''
    Returns theta with b'(theta) = mu_P. Only canonical links are supported, so this is
    the identity, log or logit of the mean.

    >>> canonical_theta(2.5, FamilySpec.gaussian(0.0))
    2.5
    >>> round(canonical_theta(0.25, FamilySpec.bernoulli()), 4)
    -1.0986
    '''
    mu = np.asarray(mu_P, dtype=float)
    ok = family.inmeanspace(mu)
    if not np.all(ok):
        i = _firstbad(ok)
        raise DomainError("mean {} outside the mean space of the {} family at observation {}"
                          .format(np.atleast_1d(mu)[i], family.kind, i))
    if family.kind == GAUSSIAN:
        theta = mu
    elif family.kind == POISSON:
        theta = np.log(mu)
    else:
        theta = logit(mu)
    return float(theta) if theta.ndim == 0 else theta


def _checksupport(y, family):
    ok = family.insupport(y)
    if not np.all(ok):
        i = _firstbad(ok)
        raise DomainError("response {} outside the support ({}) of the {} family"
                          .format(np.atleast_1d(y)[i], family.support, family.kind))


def _requirey0(family):
    if family.y0 is None:
        raise ConfigError("the {} family needs a reference value y0".format(family.kind))


def population_odds(y, theta, phi, family):
    '''
    The population odds dF_P(y)/dF_P(y0).

    >>> round(population_odds(1.0, 0.0, 1.0, FamilySpec.gaussian(0.0)), 5)
    0.60653
    '''
    _requirey0(family)
    _checksupport(y, family)
    y = np.asarray(y, dtype=float)
    value = np.exp(theta * (y - family.y0) / phi + family.c(y, phi) - family.c(family.y0, phi))
    return float(value) if value.ndim == 0 else value


def _zerotilt(y):
    return np.zeros(np.shape(y))


@dataclass(frozen=True)
class TiltFunction:
    '''
    The log sampling ratio log{rho(y)/rho(y0)} for one observation, or for many
    observations at once when `log_ratio` accepts an (n, K) array of support points.

    * **log_ratio**: callable, vectorized in y, equal to 0 at y0
    * **bound**: an upper bound of the ratio and its inverse over the support, used to
      size the Poisson truncation. inf if unknown.
    * **breakpoints**: points where the tilt has a kink or a step, used as panel edges
      by the Gaussian quadrature.
    '''
    log_ratio: object
    bound: float = math.inf
    breakpoints: tuple = ()

    @staticmethod
    def zero():
        ''' the tilt of an unbiased design '''
        return TiltFunction(_zerotilt, 1.0)

    @staticmethod
    def fromratio(ratio, bound=math.inf, breakpoints=()):
        ''' creates a tilt from a function returning rho(y)/rho(y0) '''
        return TiltFunction(lambda y: np.log(ratio(y)), bound, tuple(breakpoints))

    @property
    def iszero(self):
        return self.log_ratio is _zerotilt

    def __call__(self, y):
        return np.broadcast_to(np.asarray(self.log_ratio(y), dtype=float), np.shape(y))


def sample_odds(y, theta, phi, family, tilt):
    '''
    The odds of y in the sample, population odds times the sampling ratio.

    >>> fam = FamilySpec.poisson()
    >>> round(sample_odds(1, math.log(2), 1.0, fam, TiltFunction.fromratio(lambda y: np.where(y >= 1, 3.0, 1.0))), 12)
    6.0
    '''
    value = population_odds(y, theta, phi, family) * np.exp(tilt(np.asarray(y, dtype=float)))
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class QuadratureConfig:
    '''
    Settings of the numerical integration over the response.

    Gaussian: composite Gauss-Legendre over theta +- halfwidth * sqrt(phi) with
    `panels` panels of `order` nodes each; range and panel count double per level
    until |change of the log normalizer| / max(1, |log normalizer|) drops below `rtol`.
    While the log normalizer is below one in magnitude this is an absolute test on
    the log, that is a relative test on the normalizer itself.

    Poisson: summation over 0 .. K-1 with K >= max(minterms, m + tailsd * sqrt(m)), m the
    largest mean times the tilt bound; K doubles per level until the last term is below
    `termtol` of the total.
    '''
    halfwidth: float = 9.0
    panels: int = 11
    order: int = 11
    rtol: float = 1e-8
    maxlevel: int = 6
    termtol: float = 1e-12
    minterms: int = 50
    tailsd: float = 12.0


SampleMoments = namedtuple('SampleMoments', 'mu_S var_S log_normalizer')


@lru_cache(maxsize=16)
def _legendre(order):
    return leggauss(order)


def _gaussiangrid(theta, phi, quad, level, breakpoints):
    ''' quadrature points and weights, one row per observation '''
    n = theta.shape[0]
    half = quad.halfwidth * math.sqrt(phi) * 2 ** level
    npanels = quad.panels * 2 ** level
    lo = theta - half
    edges = lo[:, None] + 2 * half * np.linspace(0.0, 1.0, npanels + 1)[None, :]
    if breakpoints:
        extra = np.clip(np.asarray(breakpoints, dtype=float)[None, :], lo[:, None], (theta + half)[:, None])
        edges = np.sort(np.concatenate([edges, extra], axis=1), axis=1)
    x, w = _legendre(quad.order)
    left = edges[:, :-1]
    width = np.diff(edges, axis=1)
    points = (left[:, :, None] + width[:, :, None] * (x[None, None, :] + 1) / 2).reshape(n, -1)
    weights = (width[:, :, None] * w[None, None, :] / 2).reshape(n, -1)
    return points, weights


def _supportsize(family, theta, quad, level, bound):
    if family.kind == BERNOULLI:
        return 2
    m = float(np.max(np.exp(theta))) * max(1.0, bound if np.isfinite(bound) else 1.0)
    k = max(quad.minterms, int(math.ceil(m + quad.tailsd * math.sqrt(m))) + 1)
    return k * 2 ** level


class TiltedLaw:
    '''
    The tilted (sample) law of one or many observations, held as normalized log
    weights on a grid of support points, one row per observation.

    `lognormalizer` is log of the integral (or sum) of the sample odds, `level` the
    quadrature level it was computed at.
    '''

    def __init__(self, points, logw, lognormalizer, level):
        self.points = points
        self.logw = logw
        self.lognormalizer = lognormalizer
        self.level = level
        self.weights = np.exp(logw)
        self.mean = np.sum(self.weights * points, axis=1)
        self.var = np.sum(self.weights * (points - self.mean[:, None]) ** 2, axis=1)

    def __len__(self):
        return self.points.shape[0]

    def expect(self, values):
        ''' row-wise expectation of `values`, an array shaped like the grid '''
        return np.sum(self.weights * values, axis=1)

    def covy(self, values):
        ''' row-wise E[y * values] - mu_S * E[values] '''
        return self.expect(self.points * values) - self.mean * self.expect(values)

    def tailweight(self):
        ''' the largest normalized weight of the last support point over all rows '''
        return float(np.max(self.weights[:, -1]))

    def __repr__(self):
        return "TiltedLaw({} observations, {} points, level {})".format(len(self), self.points.shape[1], self.level)


def _law(family, theta, phi, tilt, quad, level):
    if family.kind == GAUSSIAN:
        points, qweights = _gaussiangrid(theta, phi, quad, level, tuple(tilt.breakpoints))
        with np.errstate(divide='ignore'):
            logbase = family.logdensity(points, theta[:, None], phi) + np.log(qweights)
    else:
        k = _supportsize(family, theta, quad, level, tilt.bound)
        points = np.broadcast_to(np.arange(k, dtype=float), (theta.shape[0], k))
        logbase = family.logdensity(points, theta[:, None], phi)
    logjoint = logbase + tilt(points)
    total = logsumexp(logjoint, axis=1)
    if not np.all(np.isfinite(total)):
        i = _firstbad(np.isfinite(total))
        raise NumericError("tilted law of observation {} is not normalizable".format(i),
                           {'observation': i, 'theta': float(theta[i]), 'phi': phi, 'level': level})
    logw = logjoint - total[:, None]
    lognormalizer = total - family.logdensity(family.y0, theta, phi)
    return TiltedLaw(points, logw, lognormalizer, level)


def tilted_law(family, theta, phi, tilt, quad=None, level=None):
    '''
    Computes the tilted law for each element of `theta`.

    If `level` is given the grid of that level is used as is, otherwise the level is
    found adaptively and can be read from the result, such that later evaluations
    on the same problem can be made on the same grid.
    '''
    _requirey0(family)
    quad = quad or QuadratureConfig()
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if level is not None or family.kind == BERNOULLI:
        return _law(family, theta, phi, tilt, quad, level or 0)

    law = _law(family, theta, phi, tilt, quad, 0)
    change = None
    for lev in range(1, quad.maxlevel + 1):
        if family.kind == POISSON:
            if law.tailweight() < quad.termtol:
                return law
            law = _law(family, theta, phi, tilt, quad, lev)
        else:
            finer = _law(family, theta, phi, tilt, quad, lev)
            delta = np.abs(finer.lognormalizer - law.lognormalizer) / np.maximum(1.0, np.abs(finer.lognormalizer))
            change = float(np.max(delta))
            law = finer
            if change < quad.rtol:
                log.debug("gaussian quadrature converged at level %d (change %.3g)", lev, change)
                return law
    if family.kind == POISSON and law.tailweight() < quad.termtol:
        return law
    raise NumericError("quadrature did not converge after {} doublings".format(quad.maxlevel),
                       {'family': family.kind, 'phi': phi, 'lastchange': change,
                        'tailweight': law.tailweight(), 'points': law.points.shape[1]})


def sample_moments(theta, phi, family, tilt, quad=None):
    '''
    Mean, variance and log normalizer of the tilted law of a single observation.

    >>> fam = FamilySpec.poisson()
    >>> m = sample_moments(0.0, 1.0, fam, TiltFunction.fromratio(lambda y: np.where(y >= 1, 2.0, 1.0), bound=2.0))
    >>> round(m.mu_S, 5)
    1.2254
    '''
    law = tilted_law(family, theta, phi, tilt, quad)
    return SampleMoments(float(law.mean[0]), float(law.var[0]), float(law.lognormalizer[0]))


def bstar(theta, phi, family, tilt, quad=None):
    '''
    The cumulant function of the sample law, theta * y0 + phi * log_normalizer, such that
    exp{[theta y - b*(theta)] / phi + c*(y; phi)} integrates to one.
    '''
    law = tilted_law(family, theta, phi, tilt, quad)
    return float(theta * family.y0 + phi * law.lognormalizer[0])


def log_sample_density(y, theta, phi, family, tilt, quad=None):
    '''
    log dF_S(y) = [theta y - b*(theta)] / phi + c*(y; phi), where
    c*(y; phi) = c(y; phi) - c(y0; phi) + log{rho(y)/rho(y0)}.

    >>> fam = FamilySpec.bernoulli()
    >>> tilt = TiltFunction.fromratio(lambda y: np.where(y == 1, 4.0, 1.0), bound=4.0)
    >>> round(math.exp(log_sample_density(1, canonical_theta(0.25, fam), 1.0, fam, tilt)), 4)
    0.5714
    '''
    _checksupport(y, family)
    y = np.asarray(y, dtype=float)
    cstar = family.c(y, phi) - family.c(family.y0, phi) + tilt(y)
    value = (theta * y - bstar(theta, phi, family, tilt, quad)) / phi + cstar
    return float(value) if value.ndim == 0 else value
