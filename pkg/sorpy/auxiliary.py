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
The auxiliary model and its fit, the first of the two offsetted regressions.

In the population, Pr(Z = 1 | y, X) = lambda_P = expit(W1'gamma1 + h(y) W2'gamma2).
Sampling on Z multiplies the odds of Z = 1 by the design ratio r, so in the sample

    lambda_S = expit(W1'gamma1 + h(y) W2'gamma2 + log r)

and gamma is estimated by a logistic regression of the sampled Z on W1 and h(Y) W2
with offset log r.

>>> h = HSpec.fromconfig({'indicator': 1})
>>> h_eval(h, 0.0), h_eval(h, 2.0)
(0.0, 1.0)
'''

# pylint: disable-msg=C0103

import math
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import expit, logit

from sorpy.dataset import INTERCEPT
from sorpy.design import SUBJECT
from sorpy.errors import ConfigError, EstimationError

log = logging.getLogger(__name__)

IDENTITY, ABSOLUTE, INDICATOR, TABLE = 'identity', 'abs', 'indicator', 'table'


@dataclass(frozen=True)
class HSpec:
    '''
    The function h(y) through which the response enters the auxiliary model.

    * identity: h(y) = y
    * abs: h(y) = |y|
    * indicator: h(y) = 1 if y >= threshold else 0
    * table: piecewise linear through `knots` ((y, value), ...), constant beyond the ends

    >>> HSpec.fromconfig({'table': [[0, 0], [1, 2]]})(0.25)
    0.5
    '''
    kind: str = IDENTITY
    threshold: float = None
    knots: tuple = ()

    def __post_init__(self):
        if self.kind not in (IDENTITY, ABSOLUTE, INDICATOR, TABLE):
            raise ConfigError("unknown h '{}'".format(self.kind))
        if self.kind == INDICATOR:
            if self.threshold is None:
                raise ConfigError("h indicator needs a threshold")
            object.__setattr__(self, 'threshold', float(self.threshold))
        if self.kind == TABLE:
            knots = tuple((float(y), float(v)) for y, v in self.knots)
            if len(knots) < 2:
                raise ConfigError("h table needs at least two knots")
            ys = [y for y, _ in knots]
            if any(b <= a for a, b in zip(ys, ys[1:])):
                raise ConfigError("knots of the h table must be strictly increasing, got {}".format(ys))
            object.__setattr__(self, 'knots', knots)

    @staticmethod
    def fromconfig(value):
        ''' "identity", "abs", {"indicator": c} or {"table": [[y, v], ...]} '''
        if value is None:
            return HSpec()
        if isinstance(value, HSpec):
            return value
        if isinstance(value, str):
            name = value.lower()
            if name in ('abs', 'absolute'):
                return HSpec(ABSOLUTE)
            if name == IDENTITY:
                return HSpec()
            raise ConfigError("unknown h '{}'".format(value))
        if isinstance(value, dict) and len(value) == 1:
            (key, arg), = value.items()
            if key == INDICATOR:
                return HSpec(INDICATOR, threshold=arg)
            if key == TABLE:
                return HSpec(TABLE, knots=tuple(arg))
        raise ConfigError("cannot read h from {!r}".format(value))

    def toconfig(self):
        if self.kind == INDICATOR:
            return {INDICATOR: self.threshold}
        if self.kind == TABLE:
            return {TABLE: [list(k) for k in self.knots]}
        return self.kind

    @property
    def breakpoints(self):
        ''' the points where h has a kink or a step '''
        if self.kind == ABSOLUTE:
            return (0.0,)
        if self.kind == INDICATOR:
            return (self.threshold,)
        if self.kind == TABLE:
            return tuple(y for y, _ in self.knots)
        return ()

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == IDENTITY:
            value = y
        elif self.kind == ABSOLUTE:
            value = np.abs(y)
        elif self.kind == INDICATOR:
            value = (y >= self.threshold).astype(float)
        else:
            ys, vs = zip(*self.knots)
            value = np.interp(y, ys, vs)
        return float(value) if np.ndim(value) == 0 else value

    def __str__(self):
        if self.kind == INDICATOR:
            return "I(y>={:g})".format(self.threshold)
        return {IDENTITY: "y", ABSOLUTE: "|y|", TABLE: "table(y)"}[self.kind]


def h_eval(h, y):
    ''' evaluates h at y '''
    return h(y)


@dataclass(frozen=True)
class AuxiliarySpec:
    ''' the columns W1 and W2 (intercepts implicit) and h of an auxiliary model '''
    w1: tuple = ()
    w2: tuple = ()
    h: HSpec = field(default_factory=HSpec)

    def __post_init__(self):
        object.__setattr__(self, 'w1', tuple(self.w1))
        object.__setattr__(self, 'w2', tuple(self.w2))
        object.__setattr__(self, 'h', HSpec.fromconfig(self.h))


def lambda_S(y, obs, gamma, h, design):
    '''
    Pr(Z = 1 | y, X, sampled) for observation `obs` (carrying `w1`, `w2` and `stratum`).

    >>> from sorpy.dataset import Observation
    >>> from sorpy.design import SamplingDesign
    >>> obs = Observation(1, 0.0, 0.0, 1, [1.0], [1.0], [1.0], 'all')
    >>> round(lambda_S(0.0, obs, [0.0, 0.0], HSpec(), SamplingDesign(ratio_by_stratum={'all': math.e})), 5)
    0.73106
    '''
    w1 = np.asarray(obs.w1, dtype=float)
    w2 = np.asarray(obs.w2, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    eta = w1 @ gamma[:len(w1)] + h(y) * (w2 @ gamma[len(w1):]) + math.log(design.ratio(obs.stratum))
    value = expit(eta)
    return float(value) if np.ndim(value) == 0 else value


class AuxiliaryModel:
    '''
    A fitted auxiliary model. `infoTT` is the information of the auxiliary score,
    sum over observations of lambda_S (1 - lambda_S) M M' with M = (W1, h(Y) W2).
    '''

    def __init__(self, spec, w1names, w2names, gamma1, gamma2, infoTT, converged, iterations, scorenorm):
        self.spec = spec
        self.w1names = list(w1names)
        self.w2names = list(w2names)
        self.gamma1 = np.asarray(gamma1, dtype=float)
        self.gamma2 = np.asarray(gamma2, dtype=float)
        self.infoTT = infoTT
        self.converged = converged
        self.iterations = iterations
        self.scorenorm = scorenorm

    @property
    def h(self):
        return self.spec.h

    @property
    def gamma(self):
        return np.concatenate([self.gamma1, self.gamma2])

    @property
    def names(self):
        return auxnames(self.w1names, self.w2names, self.spec.h)

    def linear(self, data):
        ''' W1'gamma1 and W2'gamma2 per row '''
        return data.W1 @ self.gamma1, data.W2 @ self.gamma2

    def lambdaP(self, data, y=None):
        ''' population Pr(Z = 1) of each row at response y, by default the observed one '''
        a, b = self.linear(data)
        return expit(a + self.h(data.y if y is None else y) * b)

    def lambdaS(self, data, design, y=None):
        a, b = self.linear(data)
        return expit(a + self.h(data.y if y is None else y) * b + np.log(design.rowratios(data.strata)))

    def scores(self, data, design):
        ''' the auxiliary score contribution of each row, M (Z - lambda_S) '''
        return auxmatrix(data, self.h) * (data.z - self.lambdaS(data, design))[:, None]

    def __repr__(self):
        coef = ", ".join("{}={:.4g}".format(n, g) for n, g in zip(self.names, self.gamma))
        return "AuxiliaryModel(h={}, {}, converged={})".format(self.h, coef, self.converged)


def auxnames(w1names, w2names, h):
    return list(w1names) + ["{}:{}".format(h, n) for n in w2names]


def auxmatrix(data, h):
    ''' the auxiliary regressors M = (W1, h(Y) W2) of each row '''
    return np.column_stack([data.W1, h(data.y)[:, None] * data.W2])


def checkrank(matrix, names, what):
    ''' raises EstimationError naming the columns of `matrix` that are linear combinations of others '''
    _, r, pivots = scipy.linalg.qr(matrix, mode='economic', pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag[0] * max(matrix.shape) * np.finfo(float).eps if len(diag) else 0.0
    rank = int(np.sum(diag > tol))
    if rank < matrix.shape[1]:
        collinear = [names[j] for j in pivots[rank:]]
        raise EstimationError("design of the {} is rank deficient, collinear columns: {}".format(what, ", ".join(collinear)),
                              {'rank': rank, 'collinear': collinear})


def checksubjectconstant(data, values, what):
    ''' raises ConfigError if `values` vary within a subject '''
    first = np.repeat(np.asarray(values)[data.starts], data.sizes)
    varies = np.flatnonzero(first != np.asarray(values))
    if len(varies):
        raise ConfigError("{} varies within subject {}, but the design samples whole subjects".format(what, data.ids[varies[0]]))


def _startgamma(data, z, offset, ncolumns):
    ''' zero, except the W1 intercept at the logit of the mean of Z less the mean offset '''
    gamma = np.zeros(ncolumns)
    if data.w1names and data.w1names[0] == INTERCEPT:
        p = min(max(float(np.mean(z)), 1e-6), 1 - 1e-6)
        gamma[0] = logit(p) - float(np.mean(offset))
    return gamma


def fit_aux(data, spec, design, tol=1e-10, maxiter=100):
    '''
    Fits the auxiliary model to the sampled data by Newton-Raphson. A step is halved until
    the Bernoulli log likelihood of Z increases. A fit that can no longer increase it while
    its score is within 100 tol of zero is returned with converged False and a warning.
    '''
    if data.z is None:
        raise ConfigError("the auxiliary model needs the sampling variable Z")
    if design.level == SUBJECT:
        checksubjectconstant(data, data.z, "Z")
    m = auxmatrix(data, spec.h)
    names = auxnames(data.w1names, data.w2names, spec.h)
    checkrank(m, names, "auxiliary model")
    offset = np.log(design.rowratios(data.strata))
    z = data.z.astype(float)

    def evaluate(gamma):
        eta = m @ gamma + offset
        lam = expit(eta)
        ll = float(np.sum(z * eta - np.logaddexp(0.0, eta)))
        return ll, m.T @ (z - lam), (m * (lam * (1 - lam))[:, None]).T @ m

    gamma = _startgamma(data, z, offset, m.shape[1])
    ll, score, info = evaluate(gamma)
    norm = float(np.max(np.abs(score)))
    converged = norm < tol
    stalled = False
    iterations = 0
    while not converged and iterations < maxiter:
        iterations += 1
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            raise EstimationError("auxiliary information is singular, the fit separates",
                                  {'gamma': gamma, 'scorenorm': norm, 'iterations': iterations})
        # ties within rounding of the log likelihood are broken by the score
        slack = 1e-10 * (1 + abs(ll))
        t = 1.0
        for _ in range(31):
            candidate = gamma + t * step
            cll, cscore, cinfo = evaluate(candidate)
            if np.isfinite(cll) and np.all(np.isfinite(cscore)) and np.all(np.isfinite(cinfo)) and \
                    (cll > ll or (cll >= ll - slack and float(np.max(np.abs(cscore))) < norm)):
                break
            t /= 2
        else:
            if norm < tol * 100:
                stalled = True
                break
            raise EstimationError("auxiliary fit stalled at score norm {:.3g}".format(norm),
                                  {'gamma': gamma, 'scorenorm': norm, 'iterations': iterations})
        gamma, ll, score, info = candidate, cll, cscore, cinfo
        norm = float(np.max(np.abs(score)))
        log.debug("auxiliary newton step %d (t=%g): loglik %.10g, score norm %.3g", iterations, t, ll, norm)
        converged = norm < tol
    if not converged and not stalled:
        raise EstimationError("auxiliary fit did not converge in {} Newton steps (score norm {:.3g}), the data may separate"
                              .format(maxiter, norm), {'gamma': gamma, 'scorenorm': norm, 'iterations': iterations})
    q1 = data.W1.shape[1]
    model = AuxiliaryModel(spec, data.w1names, data.w2names, gamma[:q1], gamma[q1:], info, converged, iterations, norm)
    if stalled:
        log.warning("auxiliary fit stalled after %d steps at score norm %.3g, above the tolerance %.3g", iterations, norm, tol)
    else:
        log.info("auxiliary model fitted in %d steps: %r", iterations, model)
    return model
