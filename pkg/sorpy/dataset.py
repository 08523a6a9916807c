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
Longitudinal data in long format: one row per sampled observation, rows of a
subject contiguous and ordered by time.

>>> frame = pd.DataFrame({'id': [7, 7, 7], 'time': [2, 0, 1], 'y': [1.0, 0.5, 2.0], 'z': [1, 1, 1], 'x': [0, 0, 0]})
>>> data = LongitudinalDataset.fromframe(frame, 'y', 'id', 'time', 'z', ['x'])
>>> data.nsubjects, data.nobs, data.y.tolist()
(1, 3, [0.5, 2.0, 1.0])
'''

# pylint: disable-msg=R0902,R0913

import logging
from collections import namedtuple

import numpy as np
import pandas as pd

from sorpy.design import stratumkey
from sorpy.errors import ParseError

log = logging.getLogger(__name__)

INTERCEPT = "(Intercept)"

Observation = namedtuple('Observation', 'subject time y z x w1 w2 stratum')


def _designmatrix(frame, columns):
    names = [INTERCEPT] + list(columns)
    matrix = np.column_stack([np.ones(len(frame))] + [frame[c].to_numpy(dtype=float) for c in columns])
    return matrix, names


class LongitudinalDataset:
    '''
    Sampled longitudinal data, ready for fitting.

    Do not call the constructor, use `fromframe` or `read_long_csv`. Attributes:

    * **ids**, **time**, **y**, **z**: per row, rows grouped by subject and ordered by time
    * **X**, **xnames**: design matrix of the mean model, intercept first
    * **W1**, **W2** and their names: design matrices of the auxiliary model, intercept first
    * **strata**: the stratum key of each row, see `sorpy.design.stratumkey`
    * **rownumbers**: the line of each row in the source file (header = line 1), if read from file
    '''

    def __init__(self):
        self.frame = None
        self.columns = None
        self.ids = None
        self.time = None
        self.y = None
        self.z = None
        self.X = None
        self.xnames = None
        self.W1 = None
        self.w1names = None
        self.W2 = None
        self.w2names = None
        self.strata = None
        self.rownumbers = None
        self.subject = None
        self.starts = None
        self.sizes = None

    @staticmethod
    def fromframe(frame, response, id, time, z=None, covariates=(), w1=(), w2=(), strata=(), rownumbers=None):
        '''
        Creates a dataset from a pandas DataFrame. Columns named by the arguments must exist and be
        numeric (the id column may hold any values), missing cells are errors. `rownumbers` gives
        the line each frame row was read from, for error messages.
        '''
        # pylint: disable-msg=W0622
        columns = {'response': response, 'id': id, 'time': time, 'z': z, 'covariates': list(covariates),
                   'w1': list(w1), 'w2': list(w2), 'strata': list(strata)}
        if rownumbers is None:
            rownumbers = np.arange(len(frame)) + 2
        rownumbers = np.asarray(rownumbers)
        numeric = [c for c in dict.fromkeys([response, time, z] + columns['covariates'] + columns['w1'] +
                                            columns['w2'] + columns['strata']) if c is not None]
        for c in numeric + [id]:
            if c not in frame.columns:
                raise ParseError("column '{}' is missing".format(c), column=c)
        frame = frame[[id] + [c for c in numeric if c != id]].copy()

        for c in frame.columns:
            missing = frame[c].isna().to_numpy()
            if missing.any():
                i = int(np.flatnonzero(missing)[0])
                raise ParseError("missing value in column '{}' at row {}".format(c, rownumbers[i]), rownumbers[i], c)
            if c == id:
                continue
            converted = pd.to_numeric(frame[c], errors='coerce')
            bad = converted.isna().to_numpy()
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise ParseError("non-numeric value '{}' in column '{}' at row {}".format(frame[c].iloc[i], c, rownumbers[i]), rownumbers[i], c)
            frame[c] = converted.astype(float)

        if z is not None:
            badz = ~frame[z].isin([0.0, 1.0]).to_numpy()
            if badz.any():
                i = int(np.flatnonzero(badz)[0])
                raise ParseError("auxiliary variable '{}' must be 0 or 1, got {} at row {}".format(z, frame[z].iloc[i], rownumbers[i]), rownumbers[i], z)

        dup = frame.duplicated([id, time]).to_numpy()
        if dup.any():
            i = int(np.flatnonzero(dup)[0])
            raise ParseError("duplicate observation of subject {} at time {:g} in row {}".format(frame[id].iloc[i], frame[time].iloc[i], rownumbers[i]), rownumbers[i], time)

        order = np.lexsort((frame[time].to_numpy(), pd.factorize(frame[id], sort=True)[0]))
        frame = frame.iloc[order].reset_index(drop=True)

        data = LongitudinalDataset()
        data.frame = frame
        data.columns = columns
        data.rownumbers = rownumbers[order]
        data.ids = frame[id].to_numpy()
        data.time = frame[time].to_numpy(dtype=float)
        data.y = frame[response].to_numpy(dtype=float)
        data.z = frame[z].to_numpy(dtype=int) if z is not None else None
        data.X, data.xnames = _designmatrix(frame, columns['covariates'])
        data.W1, data.w1names = _designmatrix(frame, columns['w1'])
        data.W2, data.w2names = _designmatrix(frame, columns['w2'])
        values = frame[columns['strata']].to_numpy(dtype=float)
        data.strata = [stratumkey(row) for row in values]
        codes = pd.factorize(frame[id], sort=True)[0]
        data.subject = codes
        data.starts = np.flatnonzero(np.r_[True, codes[1:] != codes[:-1]])
        data.sizes = np.diff(np.r_[data.starts, len(codes)])
        log.debug("dataset with %d observations of %d subjects", data.nobs, data.nsubjects)
        return data

    @property
    def nobs(self):
        return len(self.y)

    @property
    def nsubjects(self):
        return len(self.starts)

    def observation(self, i):
        ''' the record of row `i` '''
        return Observation(self.ids[i], self.time[i], self.y[i], None if self.z is None else self.z[i],
                           self.X[i], self.W1[i], self.W2[i], self.strata[i])

    def subjectsum(self, values):
        ''' sums rows of `values` within subjects, giving one row per subject '''
        return np.add.reduceat(np.asarray(values, dtype=float), self.starts, axis=0)

    def withresponse(self, y):
        ''' a shallow copy with response `y`, used to rescale responses '''
        copy = LongitudinalDataset()
        copy.__dict__.update(self.__dict__)
        copy.y = np.asarray(y, dtype=float)
        return copy

    def describe(self):
        ''' a summary dict of the dataset '''
        summary = {'observations': self.nobs, 'subjects': self.nsubjects,
                   'min size': int(self.sizes.min()), 'max size': int(self.sizes.max()),
                   'mean response': float(self.y.mean())}
        if self.z is not None:
            summary['fraction z=1'] = float(self.z.mean())
        keys, counts = np.unique(self.strata, return_counts=True)
        summary['strata'] = dict(zip((str(k) for k in keys), (int(c) for c in counts)))
        return summary

    def printsnapshot(self, rows=5):
        ''' prints the summary and the first rows '''
        for key, value in self.describe().items():
            print("{:<16}{}".format(key, value))
        print(self.frame.head(rows).to_string(index=False))

    def __repr__(self):
        return "LongitudinalDataset({} observations, {} subjects)".format(self.nobs, self.nsubjects)


def read_long_csv(path, config):
    '''
    Reads a UTF-8 long format CSV file. `config` names the columns: response, id, time, z,
    covariates, w1, w2 and design.strata, either as attributes or as dict keys.
    '''
    def get(name, default=None):
        if isinstance(config, dict):
            return config.get(name, default)
        return getattr(config, name, default)

    design = get('design') or {}
    strata = design.get('strata', ()) if isinstance(design, dict) else getattr(design, 'strata', ())
    try:
        frame = pd.read_csv(path, encoding='utf-8', skipinitialspace=True)
    except (UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as ex:
        raise ParseError("cannot read '{}': {}".format(path, ex))
    log.info("read %d rows from %s", len(frame), path)
    return LongitudinalDataset.fromframe(frame, get('response'), get('id'), get('time'), get('z'),
                                         get('covariates') or (), get('w1') or (), get('w2') or (), strata or ())
