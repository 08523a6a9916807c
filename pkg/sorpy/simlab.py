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
Monte Carlo laboratory: populations, biased sampling designs, replicated fits and
the summary of their operating characteristics.

Two population generators are provided:

* **subject_poisson**: subjects with 3 to 8 yearly counts, marginally Poisson with
  log mean linear in x1, time and their interaction, exchangeably correlated
  through a Gaussian copula, and a subject level sampling variable Z_i that
  depends on whether the first count is positive.
* **observation_gaussian**: 10 Gaussian responses per subject with exchangeable
  errors and an observation level sampling variable Z_ij that flags responses
  far from the mean, measured with error.

A scenario names a generator, the designs to sample with and the estimators to fit
on each sample. Replicate r draws from its own random stream, derived from the
master seed and r, so replicates can run in any order and in parallel.

>>> scenario = preset('table1_p15')[0]
>>> scenario.generator, [d.design for d in scenario.designs]
('subject_poisson', ['SRS', 'ES', 'AVS', 'EAVS'])
'''

# pylint: disable-msg=C0103,R0913,R0914

import itertools
import math
import os
import logging
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import expit
from scipy.stats import norm, poisson

from sorpy.auxiliary import AuxiliarySpec, HSpec
from sorpy.comparators import IPW, NAIVE, fit_ipw, fit_naive
from sorpy.dataset import LongitudinalDataset
from sorpy.design import ALL, OBSERVATION, SUBJECT, SamplingDesign, stratumkey
from sorpy.errors import CalibrationError, ConfigError, SorError
from sorpy.family import FamilySpec
from sorpy.sorfit import EXCHANGEABLE, INDEPENDENCE, MeanModel, fit_sor
from sorpy.stopwatch import Stopwatch

log = logging.getLogger(__name__)

SUBJECT_POISSON, OBSERVATION_GAUSSIAN = 'subject_poisson', 'observation_gaussian'
SOR = 'sor'
SRS, ES, AVS, EAVS = 'SRS', 'ES', 'AVS', 'EAVS'
RANDOM, ODS = 'random', 'ODS'
SUBJECTDESIGNS = (SRS, ES, AVS, EAVS)
OBSERVATIONDESIGNS = (RANDOM, ODS)

PARAMETERS = ('(Intercept)', 'x1', 't', 't:x1')
COVARIATES = ('x1', 't', 't:x1')

METRICS = ('scenario', 'design', 'estimator', 'parameter', 'truth', 'mean_est', 'pct_bias',
           'coverage', 'emp_var', 'rel_eff', 'n_failed')


@dataclass(frozen=True)
class SubjectPoissonParams:
    ''' the subject level Poisson population '''
    nsubjects: int = 20000
    beta: tuple = (-1.4, 0.4, -0.1, 0.1)
    prevalence: float = 0.15
    alpha: float = 0.5
    gamma: tuple = (-3.15, 6.3)
    minsize: int = 3
    maxsize: int = 8


@dataclass(frozen=True)
class ObservationGaussianParams:
    ''' the observation level Gaussian population '''
    nsubjects: int = 2000
    nobs: int = 10
    beta: tuple = (0.0, 0.5, 0.0, 0.0)
    prevalence: float = 0.05
    alpha: float = 0.3
    sigma2: float = 1.0
    explained: float = 0.8
    zfraction: float = 0.10
    odsprobs: tuple = (1.0, 0.11)


@dataclass(frozen=True)
class DesignRun:
    ''' a design and the estimators fitted to its samples. `correlation` overrides the naive working correlation. '''
    design: str
    estimators: tuple
    correlation: str = None


@dataclass(frozen=True)
class SimScenario:
    '''
    A simulation scenario.

    * **generator**, **params**: the population
    * **designs**: `DesignRun` entries, in output order
    * **target**: expected sample size of the subject level designs
    * **baseline**: the design whose naive fit is the efficiency reference
    * **factor**, **stratum**: ratio misspecification applied to the analysis of SOR and IPW
    '''
    name: str
    generator: str
    params: object
    designs: tuple
    target: int = 250
    baseline: str = None
    factor: float = 1.0
    stratum: str = None
    replicates: int = 500
    seed: int = 1

    def __post_init__(self):
        if self.generator not in (SUBJECT_POISSON, OBSERVATION_GAUSSIAN):
            raise ConfigError("unknown generator '{}'".format(self.generator))
        if self.replicates < 1:
            raise ConfigError("a scenario needs at least one replicate")
        known = SUBJECTDESIGNS if self.generator == SUBJECT_POISSON else OBSERVATIONDESIGNS
        for run in self.designs:
            if run.design not in known:
                raise ConfigError("design '{}' does not fit generator {}".format(run.design, self.generator))
            for estimator in run.estimators:
                if estimator not in (NAIVE, IPW, SOR):
                    raise ConfigError("unknown estimator '{}'".format(estimator))

    @property
    def truth(self):
        return np.asarray(self.params.beta, dtype=float)


Population = namedtuple('Population', 'frame level params')
Sample = namedtuple('Sample', 'data design table selected')


def poissonquantile(u, mu):
    ''' the Poisson quantile function, vectorized over rows sharing few distinct means '''
    values, inverse = np.unique(mu, return_inverse=True)
    y = np.empty(len(u))
    for k, m in enumerate(values):
        rows = inverse == k
        support = np.arange(int(m + 12 * math.sqrt(m)) + 25)
        cdf = poisson.cdf(support, m)
        y[rows] = np.minimum(np.searchsorted(cdf, u[rows], side='left'), len(support) - 1)
    return y


def pairedcorrelation(e, starts):
    ''' the pooled correlation of all within subject pairs of standardized residuals `e` '''
    sizes = np.diff(np.r_[starts, len(e)])
    sums = np.add.reduceat(e, starts)
    squares = np.add.reduceat(e * e, starts)
    return float(np.sum((sums ** 2 - squares) / 2) / np.sum(sizes * (sizes - 1) / 2))


def _subjectstructure(rng, params, nsubjects):
    sizes = rng.integers(params.minsize, params.maxsize + 1, size=nsubjects)
    x1 = (rng.random(nsubjects) < params.prevalence).astype(float)
    starts = np.r_[0, np.cumsum(sizes)[:-1]]
    t = np.arange(sizes.sum()) - np.repeat(starts, sizes)
    return sizes, starts, x1, t.astype(float)


def _poissonmean(beta, x1, t):
    b0, bx, bt, btx = beta
    return np.exp(b0 + bx * x1 + bt * t + btx * t * x1)


@lru_cache(maxsize=32)
def latentcorrelation(beta, prevalence, alpha, minsize, maxsize, nsubjects=75000, seed=20140501):
    '''
    The correlation of the exchangeable latent normals of the copula such that the Poisson
    counts have pooled pair correlation `alpha`. Found by root finding on a Monte Carlo
    population drawn once with fixed random numbers.
    '''
    if alpha == 0:
        return 0.0
    if not 0 < alpha < 1:
        raise CalibrationError("cannot calibrate the copula to correlation {}".format(alpha))
    rng = np.random.default_rng(seed)
    params = SubjectPoissonParams(beta=beta, prevalence=prevalence, minsize=minsize, maxsize=maxsize)
    sizes, starts, x1, t = _subjectstructure(rng, params, nsubjects)
    mu = _poissonmean(beta, np.repeat(x1, sizes), t)
    common = np.repeat(rng.standard_normal(nsubjects), sizes)
    own = rng.standard_normal(len(t))

    def gap(rho):
        y = poissonquantile(norm.cdf(math.sqrt(rho) * common + math.sqrt(1 - rho) * own), mu)
        return pairedcorrelation((y - mu) / np.sqrt(mu), starts) - alpha

    upper = 0.999
    if gap(upper) < 0:
        raise CalibrationError("latent correlation {} gives count correlation below {}".format(upper, alpha))
    rho = brentq(gap, 0.0, upper, xtol=1e-4)
    log.info("copula calibrated: latent correlation %.4f gives count correlation %.3f", rho, alpha)
    return rho


def gen_subject_population(params, seed):
    '''
    The subject level population: counts with marginal mean exp(b0 + bx x1 + bt t + btx t x1),
    exchangeably correlated through a Gaussian copula, and Z_i ~ Bernoulli(expit(g0 + g1 I(Y_i1 >= 1))).
    '''
    rho = latentcorrelation(tuple(params.beta), params.prevalence, params.alpha, params.minsize, params.maxsize)
    rng = np.random.default_rng(seed)
    sizes, starts, x1, t = _subjectstructure(rng, params, params.nsubjects)
    x1rows = np.repeat(x1, sizes)
    mu = _poissonmean(params.beta, x1rows, t)
    latent = math.sqrt(rho) * np.repeat(rng.standard_normal(params.nsubjects), sizes) + \
        math.sqrt(1 - rho) * rng.standard_normal(len(t))
    y = poissonquantile(norm.cdf(latent), mu)
    g0, g1 = params.gamma
    z = (rng.random(params.nsubjects) < expit(g0 + g1 * (y[starts] >= 1))).astype(float)
    frame = pd.DataFrame({'id': np.repeat(np.arange(params.nsubjects), sizes), 't': t, 'y': y, 'x1': x1rows,
                          't:x1': t * x1rows, '(t-2)+': np.maximum(t - 2, 0.0), 'z': np.repeat(z, sizes)})
    return Population(frame, SUBJECT, params)


def gen_observation_population(params, seed):
    '''
    The observation level population: Y = b0 + bx x1 + bt t + btx t x1 + e with exchangeable
    Gaussian errors, and Z = 1 if |Y - mean + xi| exceeds its upper `zfraction` quantile, where
    the error xi carries (1 - explained) / explained of the variance of Y.
    '''
    rng = np.random.default_rng(seed)
    n, m = params.nsubjects, params.nobs
    x1 = np.repeat((rng.random(n) < params.prevalence).astype(float), m)
    t = np.tile(np.arange(m, dtype=float), n)
    b0, bx, bt, btx = params.beta
    eta = b0 + bx * x1 + bt * t + btx * t * x1
    sd = math.sqrt(params.sigma2)
    errors = sd * (math.sqrt(params.alpha) * np.repeat(rng.standard_normal(n), m) +
                   math.sqrt(1 - params.alpha) * rng.standard_normal(n * m))
    y = eta + errors
    xi = rng.standard_normal(n * m) * math.sqrt(np.var(y) * (1 - params.explained) / params.explained)
    w = np.abs(y - np.mean(eta) + xi)
    delta = np.quantile(w, 1 - params.zfraction)
    z = (w > delta).astype(float)
    frame = pd.DataFrame({'id': np.repeat(np.arange(n), m), 't': t, 'y': y, 'x1': x1, 't:x1': t * x1, 'z': z})
    return Population(frame, OBSERVATION, params)


def generate(scenario, seed):
    if scenario.generator == SUBJECT_POISSON:
        return gen_subject_population(scenario.params, seed)
    return gen_observation_population(scenario.params, seed)


def _subjectcells(design):
    ''' the columns whose cells are sampled in equal expected numbers '''
    return {SRS: [], ES: ['x1'], AVS: ['z'], EAVS: ['z', 'x1']}[design]


def _allcells(ncolumns):
    return [list(cell) for cell in itertools.product((1.0, 0.0), repeat=ncolumns)]


def _subjectsample(population, design, target, rng):
    frame = population.frame
    subjects = frame.groupby('id', sort=True)[['z', 'x1']].first()
    cells = _subjectcells(design)
    keys = np.array([stratumkey(row) for row in subjects[cells].to_numpy(dtype=float)])
    expected = [stratumkey(cell) for cell in _allcells(len(cells))]
    counts = {key: int(np.sum(keys == key)) for key in expected}
    for key, count in counts.items():
        if count == 0:
            raise ConfigError("stratum {}={} of design {} is empty".format(",".join(cells), key, design))
    probs = {key: min(1.0, target / len(expected) / counts[key]) for key in expected}
    chosen = rng.random(len(subjects)) < np.array([probs[k] for k in keys])
    selected = np.repeat(chosen, frame.groupby('id', sort=True).size().to_numpy())

    def cellprob(z, x1):
        return probs[stratumkey([{'z': z, 'x1': x1}[c] for c in cells])]

    analysis = SamplingDesign(SUBJECT, ('x1',), nointerference=True,
                              probs_by_stratum={stratumkey([x1]): (cellprob(1.0, x1), cellprob(0.0, x1)) for x1 in (0.0, 1.0)})
    table = pd.DataFrame({'cell': expected, 'pi': [probs[k] for k in expected],
                          'population': [counts[k] for k in expected],
                          'sampled': [int(np.sum(chosen & (keys == k))) for k in expected]})
    return selected, analysis, table


def _observationsample(population, design, rng):
    pi1, pi0 = population.params.odsprobs
    z = population.frame['z'].to_numpy()
    if design == RANDOM:
        pi1 = pi0 = float(np.mean(np.where(z == 1, pi1, pi0)))
    selected = rng.random(len(z)) < np.where(z == 1, pi1, pi0)
    analysis = SamplingDesign(OBSERVATION, (), probs_by_stratum={ALL: (pi1, pi0)})
    table = pd.DataFrame({'cell': ['1', '0'], 'pi': [pi1, pi0],
                          'population': [int(np.sum(z == 1)), int(np.sum(z == 0))],
                          'sampled': [int(np.sum(selected & (z == 1))), int(np.sum(selected & (z == 0)))]})
    return selected, analysis, table


def apply_design(population, design, target, seed):
    '''
    Draws a sample from `population` with independent Bernoulli selection, of subjects for the
    subject level designs SRS, ES, AVS and EAVS and of observations for the designs random and
    ODS. Subject level designs give every cell of their sampling columns `target` / (number of
    cells) subjects in expectation, probabilities capped at 1.

    Returns the sampled dataset, the design for its analysis (stratified by x1 for subject
    level designs), the table of realized probabilities and the selection mask over the
    population rows.
    '''
    rng = np.random.default_rng(seed)
    known = SUBJECTDESIGNS if population.level == SUBJECT else OBSERVATIONDESIGNS
    if design not in known:
        raise ConfigError("design '{}' is not a {} level design".format(design, population.level))
    if population.level == SUBJECT:
        selected, analysis, table = _subjectsample(population, design, target, rng)
    else:
        selected, analysis, table = _observationsample(population, design, rng)
    if not selected.any():
        raise ConfigError("design {} sampled nothing".format(design))
    w = auxspec(population.level)
    data = LongitudinalDataset.fromframe(population.frame[selected], 'y', 'id', 't', 'z', COVARIATES,
                                         w.w1, w.w2, analysis.strata)
    return Sample(data, analysis, table, selected)


def auxspec(level):
    '''
    The auxiliary model fitted in simulations: Z on x1, time and (t-2)+ with h = I(y >= 1) for
    subject level designs, Z on x1 and time with h = |y| for observation level designs.
    '''
    if level == SUBJECT:
        w = ('x1', 't', '(t-2)+')
        return AuxiliarySpec(w, w, HSpec.fromconfig({'indicator': 1}))
    return AuxiliarySpec(('x1', 't'), ('x1', 't'), HSpec.fromconfig('abs'))


def misspecify(design, factor, stratum=None):
    '''
    The design as the analyst believes it: ratios multiplied by `factor`, in every stratum or
    only in `stratum`. The design the sample was drawn with is unchanged.
    '''
    if factor == 1:
        return design
    return design.rescaled(factor, stratum)


def _family(scenario):
    return FamilySpec.poisson() if scenario.generator == SUBJECT_POISSON else FamilySpec.gaussian()


def fitsample(scenario, run, sample, estimator):
    ''' fits one estimator to one sample, returns (beta, se) '''
    family = _family(scenario)
    subject = scenario.generator == SUBJECT_POISSON
    analysis = sample.design
    if estimator != NAIVE:
        analysis = misspecify(analysis, scenario.factor, scenario.stratum)
    if estimator == NAIVE:
        correlation = run.correlation or (EXCHANGEABLE if subject else INDEPENDENCE)
        fit = fit_naive(sample.data, family, MeanModel(COVARIATES, correlation))
    elif estimator == IPW:
        fit = fit_ipw(sample.data, family, MeanModel(COVARIATES, EXCHANGEABLE if subject else INDEPENDENCE), analysis)
    else:
        correlation = EXCHANGEABLE if subject else INDEPENDENCE
        fit = fit_sor(sample.data, family, MeanModel(COVARIATES, correlation), auxspec(analysis.level), analysis)
    return fit.beta, fit.se


def run_replicate(scenario, r):
    '''
    Generates a population, samples it with every design and fits every estimator.
    Returns one record per (design, estimator), failed fits with estimates None.
    '''
    streams = np.random.SeedSequence([scenario.seed, r]).spawn(1 + len(scenario.designs))
    population = generate(scenario, streams[0])
    records = []
    for run, stream in zip(scenario.designs, streams[1:]):
        try:
            sample = apply_design(population, run.design, scenario.target, stream)
        except SorError as ex:
            log.warning("replicate %d: design %s failed: %s", r, run.design, ex)
            records.extend((run.design, e, None, None) for e in run.estimators)
            continue
        for estimator in run.estimators:
            try:
                beta, se = fitsample(scenario, run, sample, estimator)
                records.append((run.design, estimator, beta, se))
            except (SorError, np.linalg.LinAlgError) as ex:
                log.warning("replicate %d: %s fit on %s failed: %s", r, estimator, run.design, ex)
                records.append((run.design, estimator, None, None))
    return records


def _replicatejob(args):
    return run_replicate(*args)


def threads():
    ''' the number of worker processes, from SORPY_THREADS '''
    try:
        return max(1, int(os.environ.get('SORPY_THREADS', '1')))
    except ValueError:
        raise ConfigError("SORPY_THREADS must be an integer, got '{}'".format(os.environ['SORPY_THREADS']))


class MetricsTable:
    ''' the operating characteristics of a scenario, one row per (design, estimator, parameter) '''

    def __init__(self, frame):
        self.frame = frame

    @staticmethod
    def concat(tables):
        return MetricsTable(pd.concat([t.frame for t in tables], ignore_index=True))

    def row(self, design, estimator, parameter):
        f = self.frame
        match = f[(f.design == design) & (f.estimator == estimator) & (f.parameter == parameter)]
        return match.iloc[0]

    def tocsv(self, path=None):
        ''' writes the table, or returns the text if `path` is None '''
        return self.frame.to_csv(path, index=False, float_format='%.15g', lineterminator='\n')

    def __len__(self):
        return len(self.frame)

    def __repr__(self):
        return "MetricsTable({} rows)".format(len(self.frame))


def percentbias(mean, truth):
    '''
    100 (mean - truth) / truth, or 100 (mean - truth) when the truth is 0.

    >>> round(percentbias(-1.372, -1.4), 6)
    -2.0
    '''
    if truth == 0:
        return 100 * mean
    return 100 * (mean - truth) / truth


def summarize(scenario, records):
    ''' aggregates per replicate records into a MetricsTable '''
    truth = scenario.truth
    stats = {}
    for replicate in records:
        for design, estimator, beta, se in replicate:
            entry = stats.setdefault((design, estimator), {'beta': [], 'se': [], 'failed': 0})
            if beta is None:
                entry['failed'] += 1
            else:
                entry['beta'].append(beta)
                entry['se'].append(se)
    variances = {}
    rows = []
    for run in scenario.designs:
        for estimator in run.estimators:
            entry = stats.get((run.design, estimator), {'beta': [], 'se': [], 'failed': 0})
            beta = np.array(entry['beta']).reshape(-1, len(truth))
            se = np.array(entry['se']).reshape(-1, len(truth))
            n = len(beta)
            mean = beta.mean(axis=0) if n else np.full(len(truth), np.nan)
            var = beta.var(axis=0, ddof=1) if n > 1 else np.full(len(truth), np.nan)
            cover = 100 * np.mean(np.abs(beta - truth) <= 1.96 * se, axis=0) if n else np.full(len(truth), np.nan)
            variances[(run.design, estimator)] = var
            for k, name in enumerate(PARAMETERS):
                rows.append({'scenario': scenario.name, 'design': run.design, 'estimator': estimator, 'parameter': name,
                             'truth': truth[k], 'mean_est': mean[k], 'pct_bias': percentbias(mean[k], truth[k]),
                             'coverage': cover[k], 'emp_var': var[k], 'rel_eff': np.nan, 'n_failed': entry['failed']})
    frame = pd.DataFrame(rows, columns=list(METRICS))
    if scenario.baseline is not None and (scenario.baseline, NAIVE) in variances:
        reference = variances[(scenario.baseline, NAIVE)]
        for i, row in frame.iterrows():
            k = PARAMETERS.index(row['parameter'])
            frame.at[i, 'rel_eff'] = reference[k] / variances[(row['design'], row['estimator'])][k]
    return MetricsTable(frame)


def run_scenario(scenario):
    '''
    Runs all replicates of `scenario`, in SORPY_THREADS worker processes, and summarizes them.
    The result depends on the master seed only.
    '''
    workers = threads()
    jobs = [(scenario, r) for r in range(scenario.replicates)]
    with Stopwatch("scenario {}".format(scenario.name)) as watch:
        if workers == 1:
            records = []
            for job in jobs:
                records.append(_replicatejob(job))
                if (job[1] + 1) % 50 == 0:
                    log.info("%s: %d of %d replicates done (%.0fs)", scenario.name, job[1] + 1, scenario.replicates, watch.time_elapsed)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(_replicatejob, jobs))
    log.info("%s: %d replicates in %.1fs", scenario.name, scenario.replicates, watch.total_run_time)
    return summarize(scenario, records)


def _subjectscenarios(prefix, prevalence, designs, full, factor=1.0, stratum=None, baseline=SRS):
    params = SubjectPoissonParams(nsubjects=100000 if full else 20000, prevalence=prevalence)
    return SimScenario(prefix, SUBJECT_POISSON, params, tuple(designs), target=500 if full else 250,
                       baseline=baseline, factor=factor, stratum=stratum, replicates=2000 if full else 500)


def _table1(p, full):
    designs = [DesignRun(SRS, (NAIVE,)), DesignRun(ES, (NAIVE,)),
               DesignRun(AVS, (NAIVE, IPW, SOR)), DesignRun(EAVS, (NAIVE, IPW, SOR))]
    return [_subjectscenarios("table1_p{:g}".format(100 * p), p, designs, full)]


def _misspecified(name, stratum, full):
    designs = [DesignRun(AVS, (IPW, SOR)), DesignRun(EAVS, (IPW, SOR))]
    scenarios = []
    for p in (0.15, 0.5):
        for factor, label in ((2 / 3, '0.667'), (1.5, '1.5')):
            scenarios.append(_subjectscenarios("{}_p{:g}_f{}".format(name, 100 * p, label), p, designs, full,
                                               factor, stratum, baseline=None))
    return scenarios


def _table4(prevalence, beta, full, name):
    params = ObservationGaussianParams(nsubjects=5000 if full else 2000, prevalence=prevalence, beta=(0.0, beta, 0.0, 0.0))
    designs = (DesignRun(RANDOM, (NAIVE,), EXCHANGEABLE), DesignRun(ODS, (NAIVE, SOR, IPW)))
    return [SimScenario(name, OBSERVATION_GAUSSIAN, params, designs, baseline=RANDOM,
                        replicates=2000 if full else 500)]


PRESETS = {
    'table1_p15': lambda full: _table1(0.15, full),
    'table1_p50': lambda full: _table1(0.5, full),
    'table2': lambda full: _misspecified('table2', None, full),
    'table3': lambda full: _misspecified('table3', '1', full),
    'table4_r12': lambda full: _table4(0.05, 0.5, full, 'table4_r12'),
    'table4_r40': lambda full: _table4(0.1, 0.68, full, 'table4_r40'),
}


def preset(name, scale='default', replicates=None, seed=None):
    ''' the scenarios of a named preset, at default or full scale '''
    if name not in PRESETS:
        raise ConfigError("unknown preset '{}', known presets: {}".format(name, ", ".join(sorted(PRESETS))))
    if scale not in ('default', 'full'):
        raise ConfigError("scale must be default or full, got '{}'".format(scale))
    scenarios = PRESETS[name](scale == 'full')
    changes = {}
    if replicates is not None:
        changes['replicates'] = replicates
    if seed is not None:
        changes['seed'] = seed
    return [replace(s, **changes) for s in scenarios]
