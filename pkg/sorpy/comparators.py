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
Estimators SOR is compared with: the naive GEE, which ignores the design, and
the inverse probability weighted GEE, which weights every observation by
1 / pi(Z, X1). Both run on the GEE engine of `sorpy.sorfit` with the tilt
switched off.
'''

import logging

import numpy as np

from sorpy.design import SUBJECT
from sorpy.errors import ConfigError
from sorpy.sorfit import EXCHANGEABLE, INDEPENDENCE, FitOptions, MeanFit, SorProblem, iterate, startbeta
from sorpy.stopwatch import Stopwatch

log = logging.getLogger(__name__)

NAIVE, IPW = 'naive', 'ipw'


class ComparatorFit(MeanFit):
    ''' a naive or IPW fit, `method` tells which '''

    def __init__(self, method, family, names, beta, betacov, phi, alpha, correlation, iterations, converged, weights=None):
        MeanFit.__init__(self, family, names, beta, betacov, phi, alpha, correlation, iterations, converged)
        self.method = method
        self.weights = weights


def _fitgee(method, data, family, correlation, options, weights=None):
    options = options or FitOptions()
    with Stopwatch("{} fit".format(method)) as watch:
        problem = SorProblem(data, family, quad=options.quad)
        gamma = np.zeros(data.W1.shape[1] + data.W2.shape[1])
        beta, phi, alpha, outer = iterate(problem, startbeta(problem.family, data), gamma, correlation, options, weights)
        cov = problem.sandwich(beta, phi, alpha or 0.0, correlation, None, weights)
    fit = ComparatorFit(method, problem.family, data.xnames, beta, cov, phi, alpha, correlation, outer, True, weights)
    fit.elapsed = watch.total_run_time
    log.info("%s fit converged in %d outer iterations (%.2fs): %r", method, outer, fit.elapsed, fit)
    return fit


def fit_naive(data, family, mean, options=None):
    ''' standard GEE with robust covariance, the design ignored '''
    return _fitgee(NAIVE, data, family, mean.correlation or INDEPENDENCE, options)


def ipwweights(data, design):
    ''' 1 / pi(Z, X1) per row '''
    if data.z is None:
        raise ConfigError("IPW needs the sampling variable Z")
    probs = design.rowprobs(data.strata, data.z)
    if not np.all(probs > 0):
        raise ConfigError("sampling probabilities must be positive for IPW")
    return 1 / probs


def fit_ipw(data, family, mean, design, options=None):
    '''
    GEE weighted by the inverse sampling probabilities, with the weighted robust covariance
    clustered by subject. The working correlation defaults to exchangeable for subject level
    designs and to independence for observation level designs.
    '''
    correlation = mean.correlation or (EXCHANGEABLE if design.level == SUBJECT else INDEPENDENCE)
    return _fitgee(IPW, data, family, correlation, options, ipwweights(data, design))
