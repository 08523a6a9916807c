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
The result document of a fit, a JSON object assembled section by section. Its schema
is doc/result_schema.json. Floats are written with full precision, so intervals can be
recomputed from estimate and standard error.

>>> checksum(b"")[:12]
'e3b0c44298fc'
'''

import hashlib
import json
import math
import logging

log = logging.getLogger(__name__)


def _number(value):
    ''' a JSON number, None for nan and infinities '''
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def checksum(content):
    ''' the sha256 hex digest of bytes '''
    return hashlib.sha256(content).hexdigest()


def filechecksum(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


def estimatessection(fit, exponentiate=False):
    ''' one entry per mean coefficient, with 95% Wald interval and optionally on the exponentiated scale '''
    rows = []
    for _, row in fit.table(exponentiate).iterrows():
        entry = {'name': row['name']}
        entry.update({k: _number(v) for k, v in row.items() if k != 'name'})
        rows.append(entry)
    return rows


def gammasection(fit):
    if getattr(fit, 'auxmodel', None) is None:
        return None
    return [{'name': n, 'estimate': _number(g), 'se': _number(s)} for n, g, s in zip(fit.gammanames, fit.gamma, fit.gammase)]


def convergencesection(fit):
    section = {'converged': bool(fit.converged), 'iterations': int(fit.iterations), 'elapsed': _number(fit.elapsed)}
    certificates = getattr(fit, 'certificates', None)
    if certificates:
        section['certificates'] = {k: _number(v) for k, v in certificates.items()}
    auxmodel = getattr(fit, 'auxmodel', None)
    if auxmodel is not None:
        section['aux_iterations'] = int(auxmodel.iterations)
        section['aux_converged'] = bool(auxmodel.converged)
    return section


def fitsection(fit, exponentiate=False, ratio_scale=None):
    ''' everything about one fit '''
    section = {'estimator': fit.method, 'correlation': fit.correlation,
               'estimates': estimatessection(fit, exponentiate),
               'phi': _number(fit.phi), 'alpha': _number(fit.alpha),
               'convergence': convergencesection(fit),
               'y0_used': _number(fit.family.y0)}
    gamma = gammasection(fit)
    if gamma is not None:
        section['gamma'] = gamma
        section['loglik'] = _number(fit.loglik)
    if ratio_scale is not None:
        section['ratio_scale'] = _number(ratio_scale)
    return section


def resultdocument(fits, config, version, inputsha256, exponentiate=False, scales=None):
    '''
    The result document: the configuration echo, the version and input checksum and, for
    a single fit, its sections at the top level. A sensitivity sweep puts one fit section
    per ratio scale into `fits`.
    '''
    document = {'config': config, 'version': version, 'input_sha256': inputsha256, 'exponentiated': bool(exponentiate)}
    if scales is None:
        (fit,) = fits
        document.update(fitsection(fit, exponentiate))
    else:
        document['fits'] = [fitsection(f, exponentiate, s) for f, s in zip(fits, scales)]
    return document


def dumps(document):
    return json.dumps(document, indent=2, allow_nan=False)


def estimatescsv(fit, path, exponentiate=False):
    ''' writes the estimates table as CSV '''
    fit.table(exponentiate).to_csv(path, index=False, float_format='%.15g', lineterminator='\n')
    log.info("estimates written to %s", path)


def recomputeci(entry):
    '''
    The 95% interval of an estimates entry recomputed from estimate and se.

    >>> [round(v, 6) for v in recomputeci({'estimate': 1.0, 'se': 0.5})]
    [0.02, 1.98]
    '''
    return (entry['estimate'] - 1.96 * entry['se'], entry['estimate'] + 1.96 * entry['se'])
