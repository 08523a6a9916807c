#  Copyright (C) 2026 sorpy developers
#
#  license: GNU GPL
#
#  This program is free software: you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation, either version 3 of the License, or
#  (at your option) any later version.
#
# pylint: disable-msg=C0301,C0103
# C0301: Line too long - the coefficient tables read better on one line

'''
The examples below are commented in the package documentation. Here is the focus on the code only,
so docstrings are omitted or kept essential below.

Two synthetic studies mimic the designs sorpy was built for:

* an ADHD-like study, children sampled on referral at baseline, stratified by gender
* a BioCycle-like study, days sampled on a fertility monitor peak
'''

import os

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import expit

from sorpy import *

DEMO = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'demo')
ADHDCONFIG = os.path.join(DEMO, 'adhd_config.json')
BIOCYCLECONFIG = os.path.join(DEMO, 'biocycle_config.json')

# log rate ratios of the synthetic symptom counts
ADHDBETA = {'(Intercept)': np.log(2.89), 'wave': np.log(1.06), 'wave_after2': np.log(0.89), 'age': np.log(0.89),
            'female': np.log(0.62), 'aa': np.log(1.49), 'other': np.log(0.87),
            'female_wave': np.log(1.07), 'female_wave_after2': np.log(0.90)}

# referred and non referred children sampled per gender, and the population prevalence of referral
ADHDCOUNTS = {1.0: (25, 21, 0.05), 0.0: (113, 96, 0.15)}

BIOCYCLEBETA = {'(Intercept)': 1.425, 'fiber': -0.026, 'calories': -0.038, 'bmi': -0.075, 'age': -0.080,
                'aa': -0.176, 'other': -0.109, 'cycle2': 0.048}

BIOCYCLEPROBS = (1 / 3, 3 / 25)


def createadhd(filename, nchildren=20000, seed=20):
    '''
    Writes a synthetic ADHD-like sample: yearly symptom counts of children, referred (Z=1) with
    a probability that rises with their baseline count, sampled with fixed numbers per gender and
    referral status. Returns the design ratios per gender.
    '''
    rng = np.random.default_rng(seed)
    waves = rng.integers(4, 9, size=nchildren)
    rows = np.repeat(np.arange(nchildren), waves)
    wave = (np.arange(waves.sum()) - np.repeat(np.r_[0, np.cumsum(waves)[:-1]], waves)).astype(float)
    female = (rng.random(nchildren) < 0.2).astype(float)
    age = rng.integers(3, 8, size=nchildren).astype(float) - 5
    race = rng.choice(3, size=nchildren, p=[0.6, 0.3, 0.1])
    frame = pd.DataFrame({'child': rows, 'wave': wave, 'wave_after2': np.maximum(wave - 2, 0), 'age': age[rows],
                          'female': female[rows], 'aa': (race == 1)[rows].astype(float), 'other': (race == 2)[rows].astype(float)})
    frame['female_wave'] = frame.female * frame.wave
    frame['female_wave_after2'] = frame.female * frame.wave_after2
    eta = ADHDBETA['(Intercept)'] + sum(b * frame[c].to_numpy() for c, b in ADHDBETA.items() if c != '(Intercept)')
    frailty = np.exp(rng.normal(-0.125, 0.5, size=nchildren))
    frame['symptoms'] = rng.poisson(np.exp(eta) * frailty[rows]).astype(float)

    baseline = frame.groupby('child').symptoms.first().to_numpy()
    referred = np.zeros(nchildren)
    ratios = {}
    for g, (n1, n0, prevalence) in ADHDCOUNTS.items():
        cell = female == g
        high = baseline[cell] >= 3
        g0 = brentq(lambda a: np.mean(expit(a + 2.0 * high)) - prevalence, -20, 20)
        referred[cell] = rng.random(cell.sum()) < expit(g0 + 2.0 * high)
        ratios[stratumkey([g])] = ratio_from_counts(n1, n0, prevalence)
    frame['referred'] = referred[rows]

    chosen = []
    for g, (n1, n0, _) in ADHDCOUNTS.items():
        for z, n in ((1.0, n1), (0.0, n0)):
            pool = np.flatnonzero((female == g) & (referred == z))
            chosen.extend(rng.choice(pool, size=n, replace=False))
    sample = frame[frame.child.isin(chosen)]
    sample.to_csv(filename, index=False, float_format='%.10g')
    print("{} children with {} observations written to {}".format(len(chosen), len(sample), filename))
    return ratios


def createbiocycle(filename, nwomen=250, seed=21):
    '''
    Writes a synthetic BioCycle-like sample: log hormone levels on the days of two cycles per woman,
    days of a monitor peak (Z=1, three per cycle) sampled with probability 1/3, other days with 3/25.
    '''
    rng = np.random.default_rng(seed)
    days = 28
    n = nwomen * 2 * days
    woman = np.repeat(np.arange(nwomen), 2 * days)
    cycle2 = np.tile(np.repeat([0.0, 1.0], days), nwomen)
    day = np.tile(np.arange(days), 2 * nwomen)
    peak = np.repeat(rng.integers(11, 17, size=2 * nwomen), days)
    z = ((day >= peak) & (day < peak + 3)).astype(float)
    race = rng.choice(3, size=nwomen, p=[0.6, 0.2, 0.2])
    frame = pd.DataFrame({'woman': woman, 'day': day + days * cycle2, 'peak': z, 'cycle2': cycle2,
                          'fiber': np.clip(rng.normal(12, 5, size=n), 1, None) / 5 - 2.4,
                          'calories': rng.normal(0, 0.4, size=n),
                          'bmi': (rng.normal(24, 4, size=nwomen)[woman] - 23) / 5,
                          'age': (rng.uniform(18, 44, size=nwomen)[woman] - 25) / 10,
                          'aa': (race == 1)[woman].astype(float), 'other': (race == 2)[woman].astype(float)})
    mean = BIOCYCLEBETA['(Intercept)'] + sum(b * frame[c].to_numpy() for c, b in BIOCYCLEBETA.items() if c != '(Intercept)')
    surge = 1.2 * (z - 3 / days)
    frame['loglh'] = mean + surge + rng.normal(0, 0.3, size=nwomen)[woman] + rng.normal(0, 0.6, size=n)
    pi1, pi0 = BIOCYCLEPROBS
    sample = frame[rng.random(n) < np.where(z == 1, pi1, pi0)]
    sample.to_csv(filename, index=False, float_format='%.10g')
    print("{} days of {} women written to {}".format(len(sample), sample.woman.nunique(), filename))


def describe(filename, configpath=ADHDCONFIG):
    ''' prints a snapshot of a demo sample '''
    config = FitConfig.load(configpath)
    read_long_csv(filename, config).printsnapshot()


def fitdemo(filename, configpath=ADHDCONFIG, exponentiate=True):
    '''
    Fits SOR and the naive GEE to a demo sample and prints both tables, on the exponentiated scale
    by default. Returns both fits.
    '''
    config = FitConfig.load(configpath)
    data = read_long_csv(filename, config)
    design = config.samplingdesign()
    family = config.familyspec()
    sor = fit_sor(data, family, config.meanmodel(), config.auxspec(), design, config.fitoptions())
    naive = fit_naive(data, family, config.meanmodel(), config.fitoptions())
    print(sor.summary(exponentiate))
    print(naive.summary(exponentiate))
    return sor, naive


def sensitivity(filename, configpath=ADHDCONFIG, scales=(2 / 3, 1, 1.5), stratum=None):
    '''
    Refits SOR with the design ratios multiplied by each of `scales`, in every stratum or only in
    `stratum`, and prints the estimates side by side.
    '''
    config = FitConfig.load(configpath)
    data = read_long_csv(filename, config)
    design = config.samplingdesign()
    columns = {}
    for scale in scales:
        fit = fit_sor(data, config.familyspec(), config.meanmodel(), config.auxspec(), design.rescaled(scale, stratum))
        columns["x{:.3g}".format(scale)] = fit.beta
    table = pd.DataFrame(columns, index=data.xnames)
    print(table.to_string(float_format=lambda v: "{:.4f}".format(v)))
    return table
