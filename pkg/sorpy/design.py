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
Sampling designs: which stratum an observation belongs to, the design ratio
r = pi(1, X1) / pi(0, X1) of that stratum and, if known, the absolute sampling
probabilities. From the design ratio and the population auxiliary model
lambda_P(y) = Pr(Z = 1 | y, X) follows the response dependent sampling ratio

    rho(y) / rho(y0) = (1 - lambda_P(y) + r lambda_P(y)) / (1 - lambda_P(y0) + r lambda_P(y0))

which tilts the population law of y into its law in the sample.

>>> d = SamplingDesign(SUBJECT, ('gender',), {'0': 22.6, '1': 6.7})
>>> d.ratio('1')
6.7
>>> round(ratio_from_counts(25, 21, 0.05), 3)
22.619
'''

import math
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit, logit

from sorpy.errors import ConfigError, DomainError
from sorpy.family import TiltFunction

log = logging.getLogger(__name__)

SUBJECT, OBSERVATION = 'subject', 'observation'
LEVELS = (SUBJECT, OBSERVATION)

# the key of the single stratum of an unstratified design
ALL = 'all'


def stratumkey(values):
    '''
    Formats the values of the stratum columns of one row as a stratum key.

    >>> stratumkey([1.0, 0.0])
    '1,0'
    >>> stratumkey([])
    'all'
    '''
    if len(values) == 0:
        return ALL
    return ",".join("{:g}".format(float(v)) for v in values)


def ratio_from_counts(n1, n0, prevalence):
    '''
    Recovers the design ratio from the composition of a sample, n1 sampled with
    Z = 1 and n0 with Z = 0, and the prevalence of Z = 1 in the population.

    >>> ratio_from_counts(30, 30, 0.5)
    1.0
    '''
    if n1 <= 0 or n0 <= 0:
        raise DomainError("sample counts must be positive, got n1={} and n0={}".format(n1, n0))
    if not 0 < prevalence < 1:
        raise DomainError("prevalence must lie in (0,1), got {}".format(prevalence))
    return n1 * (1 - prevalence) / (n0 * prevalence)


@dataclass(frozen=True)
class RhoRatio:
    ''' rho(y, X) / rho(y0, X) at one response value of one observation '''
    value: float

    def __float__(self):
        return float(self.value)


def _checkprob(lam, what):
    lam = np.asarray(lam, dtype=float)
    if not np.all((lam > 0) & (lam < 1)):
        raise DomainError("{} must lie in (0,1), got {}".format(what, lam))
    return lam


def rho_ratio(y, y0, lambdaP_at, r):
    '''
    The sampling ratio rho(y)/rho(y0) for the population auxiliary model `lambdaP_at`,
    a function returning Pr(Z = 1 | y).

    >>> round(rho_ratio(1.0, 0.0, lambda y: 0.5 if y else 0.2, 10.0).value, 5)
    1.96429
    '''
    if r <= 0:
        raise DomainError("design ratio must be positive, got {}".format(r))
    lamy = _checkprob(lambdaP_at(y), "lambda(y)")
    lam0 = _checkprob(lambdaP_at(y0), "lambda(y0)")
    value = (1 - lamy + r * lamy) / (1 - lam0 + r * lam0)
    return RhoRatio(float(value) if np.ndim(value) == 0 else value)


def sampleodds(lambdaP, r):
    ''' lambda_S from lambda_P: the odds of Z = 1 are multiplied by r '''
    return expit(logit(lambdaP) + np.log(r))


def populationodds(lambdaS, r):
    ''' lambda_P from lambda_S, the inverse of `sampleodds` '''
    return expit(logit(lambdaS) - np.log(r))


@dataclass(frozen=True)
class SamplingDesign:
    '''
    Sampling design of a study.

    * **level**: 'subject' if whole subjects are sampled on Z_i, 'observation' if single
      observations are sampled on Z_ij
    * **strata**: names of the columns X1 the sampling probabilities depend on, empty if none
    * **ratio_by_stratum**: stratum key -> r. Filled from `probs_by_stratum` where missing.
    * **probs_by_stratum**: optional stratum key -> (pi1, pi0), needed for IPW only
    * **nointerference**: declares that E(Y_ij | X_i) = E(Y_ij | X_ij), which licenses an
      exchangeable working correlation for subject level designs
    * **factor**: the factor the ratios were multiplied by after the design was declared,
      1 for the design as run. Probabilities of a rescaled design are not bounded by 1.
    '''
    level: str = SUBJECT
    strata: tuple = ()
    ratio_by_stratum: dict = field(default_factory=dict)
    probs_by_stratum: dict = None
    nointerference: bool = False
    factor: float = 1.0

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ConfigError("unknown sampling level '{}', expected subject or observation".format(self.level))
        object.__setattr__(self, 'strata', tuple(self.strata))
        ratios = {str(k): float(v) for k, v in (self.ratio_by_stratum or {}).items()}
        probs = None
        if self.probs_by_stratum:
            probs = {}
            for key, pair in self.probs_by_stratum.items():
                pi1, pi0 = (float(p) for p in pair)
                upper = 1.0 if self.factor == 1.0 else math.inf
                if not (0 < pi1 <= upper and 0 < pi0 <= upper):
                    raise ConfigError("sampling probabilities of stratum '{}' must lie in (0,1], got ({}, {})".format(key, pi1, pi0))
                probs[str(key)] = (pi1, pi0)
                r = pi1 / pi0
                if str(key) in ratios and abs(ratios[str(key)] - r) > 1e-12 * r:
                    raise ConfigError("ratio {} of stratum '{}' disagrees with its probabilities ({}, {})".format(ratios[str(key)], key, pi1, pi0))
                ratios[str(key)] = r
        for key, r in ratios.items():
            if not (r > 0 and math.isfinite(r)):
                raise ConfigError("design ratio of stratum '{}' must be positive, got {}".format(key, r))
        if not ratios:
            raise ConfigError("the design declares neither ratios nor probabilities")
        object.__setattr__(self, 'ratio_by_stratum', ratios)
        object.__setattr__(self, 'probs_by_stratum', probs)

    @staticmethod
    def fromconfig(block):
        '''
        Creates a design from its configuration block, a dict with keys
        level, strata, ratio or probs, and nointerference.
        '''
        return SamplingDesign(level=block.get('level', SUBJECT),
                              strata=tuple(block.get('strata') or ()),
                              ratio_by_stratum=block.get('ratio') or {},
                              probs_by_stratum=block.get('probs'),
                              nointerference=bool(block.get('nointerference', False)))

    def toconfig(self):
        block = {'level': self.level, 'strata': list(self.strata), 'nointerference': self.nointerference}
        if self.probs_by_stratum:
            block['probs'] = {k: list(v) for k, v in self.probs_by_stratum.items()}
        else:
            block['ratio'] = dict(self.ratio_by_stratum)
        return block

    @property
    def keys(self):
        return sorted(self.ratio_by_stratum)

    @property
    def hasprobs(self):
        return self.probs_by_stratum is not None

    @property
    def unbiased(self):
        ''' True if every ratio is 1 '''
        return all(r == 1.0 for r in self.ratio_by_stratum.values())

    def ratio(self, key):
        try:
            return self.ratio_by_stratum[key]
        except KeyError:
            raise ConfigError("stratum '{}' has no sampling ratio, the design knows {}".format(key, ", ".join(self.keys)))

    def probs(self, key):
        if not self.hasprobs:
            raise ConfigError("the design carries only sampling ratios, IPW needs absolute probabilities")
        try:
            return self.probs_by_stratum[key]
        except KeyError:
            raise ConfigError("stratum '{}' has no sampling probabilities".format(key))

    def rowratios(self, keys):
        ''' the design ratio of each row, given the stratum key of each row '''
        lookup = {k: self.ratio(k) for k in set(keys)}
        return np.array([lookup[k] for k in keys], dtype=float)

    def rowprobs(self, keys, z):
        ''' the probability pi(Z, X1) each row was sampled with '''
        lookup = {k: self.probs(k) for k in set(keys)}
        return np.array([lookup[k][0] if zi == 1 else lookup[k][1] for k, zi in zip(keys, z)], dtype=float)

    def rescaled(self, factor, stratum=None):
        '''
        Returns the design with its ratios multiplied by `factor`, either in every stratum
        or only in `stratum`. Where probabilities are known pi1 is multiplied instead, which
        keeps probabilities and ratios consistent.
        '''
        if not factor > 0:
            raise DomainError("misspecification factor must be positive, got {}".format(factor))
        if stratum is not None and stratum not in self.ratio_by_stratum:
            raise ConfigError("cannot rescale unknown stratum '{}'".format(stratum))
        touched = [k for k in self.ratio_by_stratum if stratum is None or k == stratum]
        ratios = {k: r * factor if k in touched else r for k, r in self.ratio_by_stratum.items()}
        probs = None
        if self.hasprobs:
            probs = {k: (p[0] * factor, p[1]) if k in touched else p for k, p in self.probs_by_stratum.items()}
            ratios = {}
        return replace(self, ratio_by_stratum=ratios, probs_by_stratum=probs, factor=self.factor * factor)

    def __repr__(self):
        ratios = ", ".join("{}: {:.6g}".format(k, self.ratio_by_stratum[k]) for k in self.keys)
        return "SamplingDesign({}, strata={}, ratios={{{}}})".format(self.level, list(self.strata), ratios)


def rowtilt(a, b, logr, h, y0):
    '''
    The tilt of many observations at once, for evaluation on an (n, K) grid of support points.
    a = W1'gamma1 and b = W2'gamma2 per row, logr the log design ratio per row.

    lambda_P(y) = expit(a + h(y) b) is the population auxiliary model, so the row tilt is
    log(1 + (r - 1) lambda_P(y)) - log(1 + (r - 1) lambda_P(y0)).
    '''
    a, b, logr = (np.asarray(v, dtype=float) for v in (a, b, logr))
    if not np.any(b) or not np.any(logr):
        return TiltFunction.zero()
    rm1 = np.expm1(logr)[:, None]
    lam0 = expit(a + h(y0) * b)[:, None]
    base = np.log1p(rm1 * lam0)

    def logratio(points):
        lam = expit(a[:, None] + h(points) * b[:, None])
        return np.log1p(rm1 * lam) - base

    bound = float(np.exp(np.max(np.abs(logr))))
    return TiltFunction(logratio, bound, tuple(h.breakpoints))


def tilt_for_observation(obs, gamma, aux, design, y0):
    '''
    The tilt of a single observation. `obs` carries the auxiliary covariate rows `w1`, `w2`
    and the `stratum` key, `gamma` is (gamma1, gamma2) stacked, `aux` provides h.

    >>> from collections import namedtuple
    >>> from sorpy.auxiliary import AuxiliarySpec
    >>> Obs = namedtuple('Obs', 'w1 w2 stratum')
    >>> d = SamplingDesign(OBSERVATION, (), {'all': 10.0})
    >>> g = [float(logit(0.2)), float(logit(0.5) - logit(0.2))]
    >>> tilt = tilt_for_observation(Obs([1.0], [1.0], 'all'), g, AuxiliarySpec((), ()), d, 0.0)
    >>> round(float(np.exp(tilt(1.0))), 5)
    1.96429
    '''
    w1 = np.asarray(obs.w1, dtype=float)
    w2 = np.asarray(obs.w2, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if len(gamma) != len(w1) + len(w2):
        raise ConfigError("gamma has {} entries, the auxiliary model {}".format(len(gamma), len(w1) + len(w2)))
    a = np.array([w1 @ gamma[:len(w1)]])
    b = np.array([w2 @ gamma[len(w1):]])
    logr = np.array([math.log(design.ratio(obs.stratum))])
    rows = rowtilt(a, b, logr, aux.h, y0)

    def logratio(y):
        y = np.asarray(y, dtype=float)
        return rows.log_ratio(y.reshape(1, -1)).reshape(y.shape)

    if rows.iszero:
        return rows
    return TiltFunction(logratio, rows.bound, rows.breakpoints)
