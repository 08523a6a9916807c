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
Sequential offsetted regressions: the second regression, a GEE for the marginal
mean model in which every observation contributes its mean and variance under
the tilted law of the sample, and the stacked sandwich covariance of both
regressions.

The estimating function of beta is

    U = sum_i D_i' V_i^-1 (Y_i - mu_S_i),   D_i = X_i A_i / phi,   V_i = A_i^1/2 C_i(alpha) A_i^1/2

with mu_S and A the mean and the variance of Y under the tilted law. For an
unbiased design the tilt vanishes and U is the usual GEE of a canonical GLM.

Usage:

>>> # fit = fit_sor(data, FamilySpec.poisson(), MeanModel(), AuxiliarySpec(), design)
>>> # print(fit.summary())
'''

# pylint: disable-msg=C0103,R0913,R0914
# C0103: A, D, V, J, Q, infoUU follow the notation of the estimating equations

import logging
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import expit

from sorpy.auxiliary import HSpec, fit_aux
from sorpy.design import SUBJECT, rowtilt
from sorpy.errors import ConfigError, DomainError, EstimationError, NumericError
from sorpy.family import BERNOULLI, GAUSSIAN, QuadratureConfig, canonical_theta, tilted_law
from sorpy.stopwatch import Stopwatch

log = logging.getLogger(__name__)

INDEPENDENCE, EXCHANGEABLE = 'independence', 'exchangeable'
CORRELATIONS = (INDEPENDENCE, EXCHANGEABLE)

# quantile of the standard normal for 95% Wald intervals
WALD = 1.96


@dataclass(frozen=True)
class MeanModel:
    '''
    The marginal mean model: covariate columns (the intercept is implicit) and the
    working correlation of the GEE. Without a correlation every estimator uses its default,
    independence for SOR and naive fits.
    '''
    covariates: tuple = ()
    correlation: str = None

    def __post_init__(self):
        object.__setattr__(self, 'covariates', tuple(self.covariates))
        if self.correlation is not None and self.correlation not in CORRELATIONS:
            raise ConfigError("unknown working correlation '{}'".format(self.correlation))

    def check(self, design):
        ''' exchangeable weighting needs a subject level design without interference '''
        if self.correlation != EXCHANGEABLE or design is None:
            return
        if design.level != SUBJECT:
            raise ConfigError("observation level designs are fitted with independence working correlation")
        if not design.nointerference:
            raise ConfigError("exchangeable working correlation needs the no-interference assumption, declare nointerference")


@dataclass(frozen=True)
class FitOptions:
    ''' tolerances and iteration limits of the solvers '''
    betatol: float = 1e-8
    phitol: float = 1e-8
    auxtol: float = 1e-10
    maxiter: int = 50
    maxouter: int = 100
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)


GeeTerms = namedtuple('GeeTerms', 'score info rows mu A')


def resolvey0(family, data):
    ''' the family with its reference value set, the sample median for Gaussian responses '''
    if family.y0 is None:
        return family.withy0(float(np.median(data.y)))
    return family


class SorProblem:
    '''
    Everything that stays fixed while one dataset is fitted: the data, the family with its y0,
    h, the log design ratio of every row and the quadrature level. The level is found at the
    first evaluation of a tilted law and used for all later ones.

    A problem with `design` None is an unbiased design, the setting of the naive and IPW fits.
    '''

    def __init__(self, data, family, h=None, design=None, quad=None):
        self.data = data
        self.family = resolvey0(family, data)
        self.h = h or HSpec()
        self.design = design
        self.quad = quad or QuadratureConfig()
        self.level = None
        if design is None:
            self.logr = np.zeros(data.nobs)
        else:
            self.logr = np.log(design.rowratios(data.strata))

    def __repr__(self):
        return "SorProblem({!r}, {}, y0={:g})".format(self.data, self.family.kind, self.family.y0)

    def theta(self, beta):
        ''' the canonical parameter of each row, checked against the mean space '''
        eta = self.data.X @ np.asarray(beta, dtype=float)
        ok = self.family.inmeanspace(self.family.linkinv(eta))
        if not np.all(ok):
            i = int(np.flatnonzero(~ok)[0])
            raise DomainError("mean of row {} (subject {}) is outside the mean space of the {} family"
                              .format(self.data.rownumbers[i], self.data.ids[i], self.family.kind))
        return eta

    def tilt(self, gamma):
        gamma = np.asarray(gamma, dtype=float)
        q1 = self.data.W1.shape[1]
        return rowtilt(self.data.W1 @ gamma[:q1], self.data.W2 @ gamma[q1:], self.logr, self.h, self.family.y0)

    def law(self, theta, phi, tilt):
        if self.level is None:
            law = tilted_law(self.family, theta, phi, tilt, self.quad)
            self.level = law.level
            log.debug("quadrature level %d, %d points per observation", law.level, law.points.shape[1])
            return law
        return tilted_law(self.family, theta, phi, tilt, self.quad, self.level)

    def moments(self, beta, gamma, phi):
        ''' mu_S and A per row '''
        theta = self.theta(beta)
        tilt = self.tilt(gamma)
        if tilt.iszero:
            return self.family.bprime(theta), self.family.variance(theta, phi)
        law = self.law(theta, phi, tilt)
        return law.mean, law.var

    def cinv(self, alpha, correlation):
        ''' returns a function applying the inverse working correlation to row blocks '''
        if correlation == INDEPENDENCE or alpha == 0:
            return lambda v: v
        data = self.data
        coef = alpha / (1 + (data.sizes - 1) * alpha)

        def apply(v):
            sums = data.subjectsum(v)
            shift = coef[:, None] * sums if sums.ndim == 2 else coef * sums
            return (v - np.repeat(shift, data.sizes, axis=0)) / (1 - alpha)
        return apply

    def gee(self, beta, gamma, phi, alpha=0.0, correlation=INDEPENDENCE, weights=None):
        ''' the estimating function of beta, its information and the contribution of every row '''
        mu, A = self.moments(beta, gamma, phi)
        if not np.all(A > 0):
            i = int(np.flatnonzero(~(A > 0))[0])
            raise NumericError("working covariance of subject {} is singular".format(self.data.ids[i]),
                               {'subject': self.data.ids[i], 'row': int(self.data.rownumbers[i])})
        X = self.data.X
        s = np.sqrt(A)
        w = np.ones(len(mu)) if weights is None else weights
        cinv = self.cinv(alpha, correlation)
        rows = X * (s * cinv(w * (self.data.y - mu) / s))[:, None] / phi
        info = X.T @ (s[:, None] * cinv((w * s)[:, None] * X)) / phi ** 2
        return GeeTerms(rows.sum(axis=0), info, rows, mu, A)

    def jacobian(self, beta, gamma, phi):
        ''' d mu_S / d gamma per row, evaluated on the grid of the tilted law '''
        data = self.data
        gamma = np.asarray(gamma, dtype=float)
        q1 = data.W1.shape[1]
        if not np.any(self.logr):
            return np.zeros((data.nobs, len(gamma)))
        theta = self.theta(beta)
        law = self.law(theta, phi, self.tilt(gamma))
        a = data.W1 @ gamma[:q1]
        b = data.W2 @ gamma[q1:]
        hp = self.h(law.points)
        lam = expit(a[:, None] + hp * b[:, None])
        rm1 = np.expm1(self.logr)[:, None]
        F = -rm1 * lam * (1 - lam) / (1 + rm1 * lam)
        return np.column_stack([data.W1 * (-law.covy(F))[:, None], data.W2 * (-law.covy(hp * F))[:, None]])

    def dispersionscore(self, phi, beta, gamma):
        ''' d loglik / d phi '''
        theta = self.theta(beta)
        fam = self.family
        y = self.data.y

        def g(v, th):
            return -(th * v - fam.b(th)) / phi ** 2 + fam.dcdphi(v, phi)

        observed = np.sum(g(y, theta))
        tilt = self.tilt(gamma)
        if tilt.iszero:
            # the expected score of an untilted family vanishes
            return float(observed)
        law = self.law(theta, phi, tilt)
        return float(observed - np.sum(law.expect(g(law.points, theta[:, None]))))

    def loglik(self, beta, gamma, phi):
        ''' the log likelihood of the sample, observations taken as independent '''
        theta = self.theta(beta)
        fam = self.family
        tilt = self.tilt(gamma)
        total = np.sum(fam.logdensity(self.data.y, theta, phi))
        if tilt.iszero:
            return float(total)
        yy = self.data.y[:, None]
        law = self.law(theta, phi, tilt)
        total += np.sum(tilt(yy)) - np.sum(law.lognormalizer + fam.logdensity(fam.y0, theta, phi))
        return float(total)

    def solvebeta(self, beta, gamma, phi, alpha=0.0, correlation=INDEPENDENCE, weights=None, tol=1e-8, maxiter=50):
        ''' Fisher scoring from `beta` '''
        beta = np.asarray(beta, dtype=float).copy()
        trajectory = [beta.copy()]
        for iteration in range(1, maxiter + 1):
            terms = self.gee(beta, gamma, phi, alpha, correlation, weights)
            try:
                step = np.linalg.solve(terms.info, terms.score)
            except np.linalg.LinAlgError:
                raise NumericError("information of the mean model is singular", {'beta': beta, 'iteration': iteration})
            beta = beta + step
            trajectory.append(beta.copy())
            delta = float(np.max(np.abs(step)))
            log.debug("fisher scoring step %d: max |step| %.3g", iteration, delta)
            if delta < tol:
                return beta
        raise EstimationError("beta did not converge in {} Fisher scoring steps".format(maxiter),
                              {'beta': beta, 'trajectory': trajectory})

    def solvephi(self, beta, gamma, phi0, weights=None, tol=1e-8):
        ''' the root of the dispersion score. closed form when the tilt vanishes. '''
        if self.family.fixedphi:
            return 1.0
        if self.tilt(gamma).iszero:
            r2 = (self.data.y - self.theta(beta)) ** 2
            w = np.ones_like(r2) if weights is None else weights
            return float(np.sum(w * r2) / np.sum(w))
        if weights is not None:
            raise ConfigError("weighted dispersion needs an unbiased design")

        def f(phi):
            return self.dispersionscore(phi, beta, gamma)

        lo = hi = phi0
        flo = fhi = f(phi0)
        while flo < 0 and lo > phi0 * 1e-6:
            hi, fhi = lo, flo
            lo = max(lo / 2, phi0 * 1e-6)
            flo = f(lo)
        while fhi > 0 and hi < phi0 * 1e6:
            lo, flo = hi, fhi
            hi = min(hi * 2, phi0 * 1e6)
            fhi = f(hi)
        if flo < 0 or fhi > 0:
            raise EstimationError("dispersion score has no sign change on [{:.3g}, {:.3g}]".format(phi0 * 1e-6, phi0 * 1e6),
                                  {'beta': beta, 'phi0': phi0})
        if flo == 0:
            return float(lo)
        if fhi == 0:
            return float(hi)
        return float(brentq(f, lo, hi, xtol=phi0 * 1e-14, rtol=tol * 1e-2))

    def alpha(self, beta, gamma, phi, weights=None):
        ''' moment estimator of the exchangeable correlation of the standardized residuals '''
        data = self.data
        pairs = data.sizes * (data.sizes - 1) / 2
        if not np.any(pairs):
            raise EstimationError("no pairs: every subject has a single observation, alpha is not estimable")
        mu, A = self.moments(beta, gamma, phi)
        e = (data.y - mu) / np.sqrt(A)
        cross = (data.subjectsum(e) ** 2 - data.subjectsum(e * e)) / 2
        sw = np.ones(data.nsubjects) if weights is None else np.asarray(weights)[data.starts]
        alpha = float(np.sum(sw * cross) / np.sum(sw * pairs))
        upper = 1 - 1e-3
        lower = -1 / (data.sizes.max() - 1) + 1e-3
        return min(max(alpha, lower), upper)

    def sandwich(self, beta, phi, alpha=0.0, correlation=INDEPENDENCE, auxmodel=None, weights=None):
        '''
        I^-1 Q I^-T of the stacked estimating functions (T, U), clustered by subject. Without
        `auxmodel` the result is the robust covariance of beta alone.
        '''
        data = self.data
        gamma = auxmodel.gamma if auxmodel is not None else np.zeros(data.W1.shape[1] + data.W2.shape[1])
        terms = self.gee(beta, gamma, phi, alpha, correlation, weights)
        if auxmodel is None:
            bread = terms.info
            psi = data.subjectsum(terms.rows)
        else:
            s = np.sqrt(terms.A)
            cinv = self.cinv(alpha, correlation)
            J = self.jacobian(beta, gamma, phi)
            infoUT = data.X.T @ (s[:, None] * cinv(J / s[:, None])) / phi
            q, p = len(gamma), data.X.shape[1]
            bread = np.zeros((q + p, q + p))
            bread[:q, :q] = auxmodel.infoTT
            bread[q:, :q] = infoUT
            bread[q:, q:] = terms.info
            psi = data.subjectsum(np.hstack([auxmodel.scores(data, self.design), terms.rows]))
        meat = psi.T @ psi
        try:
            binv = np.linalg.inv(bread)
        except np.linalg.LinAlgError:
            raise NumericError("the information matrix of the stacked estimating equations is singular")
        cov = binv @ meat @ binv.T
        return (cov + cov.T) / 2


def startbeta(family, data):
    ''' intercept at the canonical parameter of the mean response, other coefficients 0 '''
    beta = np.zeros(data.X.shape[1])
    mean = float(np.mean(data.y))
    if family.kind != GAUSSIAN:
        upper = 1 - 1e-3 if family.kind == BERNOULLI else np.inf
        mean = min(max(mean, 1e-3), upper)
    beta[0] = canonical_theta(mean, family)
    return beta


def _problem(data, family, aux, design, quad):
    return SorProblem(data, family, aux.h if aux is not None else None, design, quad)


def predict_sample_mean(beta, gamma, data, family, aux, design, phi=1.0, quad=None):
    '''
    mu_S and the variance A of every row under the tilted law given (beta, gamma).
    `aux` is an AuxiliarySpec or a fitted AuxiliaryModel, either provides h.
    '''
    return _problem(data, family, aux, design, quad).moments(beta, gamma, phi)


def beta_estimating_function(beta, gamma, phi, alpha, data, family, aux, design, correlation=INDEPENDENCE, quad=None):
    ''' returns (sum of U_i, sum of D_i' V_i^-1 D_i) '''
    terms = _problem(data, family, aux, design, quad).gee(beta, gamma, phi, alpha, correlation)
    return terms.score, terms.info


def solve_beta(gamma, phi, alpha, data, family, aux, design, correlation=INDEPENDENCE, beta0=None, options=None):
    ''' solves U(beta, gamma) = 0 by Fisher scoring '''
    options = options or FitOptions()
    problem = _problem(data, family, aux, design, options.quad)
    start = startbeta(problem.family, data) if beta0 is None else beta0
    return problem.solvebeta(start, gamma, phi, alpha, correlation, tol=options.betatol, maxiter=options.maxiter)


def dispersion_score(phi, beta, gamma, data, family, aux, design, quad=None):
    ''' the derivative of the sample log likelihood in phi '''
    return _problem(data, family, aux, design, quad).dispersionscore(phi, beta, gamma)


def loglik(beta, gamma, phi, data, family, aux, design, quad=None):
    ''' the log likelihood of the sample under working independence '''
    return _problem(data, family, aux, design, quad).loglik(beta, gamma, phi)


def solve_phi(beta, gamma, data, family, aux, design, phi0=None, options=None):
    ''' the root of the dispersion score, 1 for families with fixed dispersion '''
    options = options or FitOptions()
    problem = _problem(data, family, aux, design, options.quad)
    if phi0 is None:
        phi0 = max(float(np.var(data.y)), 1e-8)
    return problem.solvephi(beta, gamma, phi0, tol=options.phitol)


def estimate_alpha(beta, gamma, phi, data, family, aux, design, quad=None):
    ''' the exchangeable correlation of the residuals in the sample '''
    if design is not None and design.level != SUBJECT:
        raise ConfigError("alpha is estimated for subject level designs only")
    return _problem(data, family, aux, design, quad).alpha(beta, gamma, phi)


def dmuS_dgamma(beta, gamma, data, family, aux, design, phi=1.0, quad=None):
    ''' the Jacobian of mu_S in (gamma1, gamma2), one row per observation '''
    return _problem(data, family, aux, design, quad).jacobian(beta, gamma, phi)


def sandwich_covariance(data, family, auxmodel, design, beta, phi, alpha=0.0, correlation=INDEPENDENCE, quad=None):
    ''' the joint covariance of (gamma, beta) '''
    problem = _problem(data, family, auxmodel, design, quad)
    return problem.sandwich(beta, phi, alpha, correlation, auxmodel)


class MeanFit:
    '''
    A fit of the marginal mean model with its robust covariance. Subclasses tag the method.

    >>> # fit.table(exponentiate=True) gives rate ratios with 95% intervals
    '''
    method = None

    def __init__(self, family, names, beta, betacov, phi, alpha, correlation, iterations, converged):
        self.family = family
        self.names = list(names)
        self.beta = np.asarray(beta, dtype=float)
        self.betacov = betacov
        self.phi = phi
        self.alpha = alpha
        self.correlation = correlation
        self.iterations = iterations
        self.converged = converged
        self.elapsed = None

    @property
    def se(self):
        return np.sqrt(np.clip(np.diag(self.betacov), 0, None))

    @property
    def zvalues(self):
        return self.beta / self.se

    def ci(self):
        ''' 95% Wald intervals, one (lower, upper) row per coefficient '''
        return np.column_stack([self.beta - WALD * self.se, self.beta + WALD * self.se])

    def table(self, exponentiate=False):
        ''' the estimates as a DataFrame '''
        ci = self.ci()
        frame = pd.DataFrame({'name': self.names, 'estimate': self.beta, 'se': self.se,
                              'lower': ci[:, 0], 'upper': ci[:, 1]})
        if exponentiate:
            frame['exp_estimate'] = np.exp(self.beta)
            frame['exp_lower'] = np.exp(ci[:, 0])
            frame['exp_upper'] = np.exp(ci[:, 1])
        return frame

    def summary(self, exponentiate=False):
        lines = ["{} fit of a {} mean model, {} working correlation".format(self.method, self.family.kind, self.correlation)]
        lines.append(self.table(exponentiate).to_string(index=False, float_format=lambda v: "{:.5g}".format(v)))
        lines.append("phi = {:.6g}".format(self.phi))
        if self.alpha is not None:
            lines.append("alpha = {:.6g}".format(self.alpha))
        return "\n".join(lines)

    def __repr__(self):
        coef = ", ".join("{}={:.4g}".format(n, b) for n, b in zip(self.names, self.beta))
        return "{}({}, {})".format(type(self).__name__, self.method, coef)


class SorFit(MeanFit):
    '''
    A sequential offsetted regressions fit. `covariance` is the joint covariance of
    (gamma, beta), gamma first, `betacov` its beta block.
    '''
    method = 'sor'

    def __init__(self, family, names, beta, phi, alpha, correlation, iterations, converged,
                 auxmodel, covariance, loglik, certificates):
        q = len(auxmodel.gamma)
        MeanFit.__init__(self, family, names, beta, covariance[q:, q:], phi, alpha, correlation, iterations, converged)
        self.auxmodel = auxmodel
        self.gamma = auxmodel.gamma
        self.gammanames = auxmodel.names
        self.covariance = covariance
        self.loglik = loglik
        self.certificates = certificates

    @property
    def y0_used(self):
        return self.family.y0

    @property
    def gammase(self):
        q = len(self.gamma)
        return np.sqrt(np.clip(np.diag(self.covariance[:q, :q]), 0, None))


def iterate(problem, beta, gamma, correlation, options, weights=None):
    '''
    Alternates solving for beta, phi and, with exchangeable working correlation, alpha until
    beta and phi are stable. Returns (beta, phi, alpha, outer iterations).
    '''
    family = problem.family
    phi = 1.0 if family.fixedphi else problem.solvephi(beta, np.zeros_like(gamma), max(float(np.var(problem.data.y)), 1e-8), weights)
    alpha = 0.0 if correlation == EXCHANGEABLE else None
    for outer in range(1, options.maxouter + 1):
        try:
            newbeta = problem.solvebeta(beta, gamma, phi, alpha or 0.0, correlation, weights, options.betatol, options.maxiter)
            newphi = phi if family.fixedphi else problem.solvephi(newbeta, gamma, phi, weights, options.phitol)
            if correlation == EXCHANGEABLE:
                alpha = problem.alpha(newbeta, gamma, newphi, weights)
        except EstimationError as ex:
            ex.state.update({'outer': outer, 'beta': beta, 'phi': phi, 'alpha': alpha})
            raise
        dbeta = float(np.max(np.abs(newbeta - beta)))
        dphi = abs(newphi - phi) / phi
        beta, phi = newbeta, newphi
        log.debug("outer iteration %d: max |dbeta| %.3g, |dphi|/phi %.3g, alpha %s", outer, dbeta, dphi, alpha)
        if dbeta < options.betatol and dphi < options.phitol:
            return beta, phi, alpha, outer
    raise EstimationError("beta and phi did not converge in {} outer iterations".format(options.maxouter),
                          {'beta': beta, 'phi': phi, 'alpha': alpha, 'gamma': gamma})


def fit_sor(data, family, mean, aux, design, options=None):
    '''
    Fits the auxiliary model, then the mean model under the tilted law, and computes the joint
    sandwich covariance.
    '''
    options = options or FitOptions()
    mean.check(design)
    correlation = mean.correlation or INDEPENDENCE
    with Stopwatch("sor fit") as watch:
        auxmodel = fit_aux(data, aux, design, options.auxtol)
        problem = SorProblem(data, family, auxmodel.h, design, options.quad)
        gamma = auxmodel.gamma
        zero = np.zeros_like(gamma)
        start = startbeta(problem.family, data)
        phi0 = 1.0 if problem.family.fixedphi else max(float(np.var(data.y)), 1e-8)
        start = problem.solvebeta(start, zero, phi0, tol=options.betatol, maxiter=options.maxiter)
        try:
            beta, phi, alpha, outer = iterate(problem, start, gamma, correlation, options)
        except EstimationError as ex:
            ex.state.setdefault('gamma', gamma)
            raise
        covariance = problem.sandwich(beta, phi, alpha or 0.0, correlation, auxmodel)
        terms = problem.gee(beta, gamma, phi, alpha or 0.0, correlation)
        certificates = {'beta': float(np.max(np.abs(terms.score))), 'gamma': auxmodel.scorenorm}
        ll = problem.loglik(beta, gamma, phi)
    fit = SorFit(problem.family, data.xnames, beta, phi, alpha, correlation, outer, auxmodel.converged,
                 auxmodel, covariance, ll, certificates)
    fit.elapsed = watch.total_run_time
    log.info("sor fit converged in %d outer iterations (%.2fs): %r", outer, fit.elapsed, fit)
    return fit
