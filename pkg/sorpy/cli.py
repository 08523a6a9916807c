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
The sorpy command line.

    sorpy fit --data counts.csv --config demo/adhd_config.json --exp
    sorpy fit --data counts.csv --config demo/adhd_config.json --ratio-scale 0.667,1,1.5
    sorpy simulate --preset table1_p15 --replicates 2 --seed 1
    sorpy version

Exit codes are 0 on success, 1 for bad usage, configuration or data, and 2 when a fit
or a simulation fails numerically. Messages go to standard error.
'''

# pylint: disable-msg=W0622

import argparse
import json
import logging
import sys

import numpy as np

from sorpy.comparators import IPW, NAIVE, fit_ipw, fit_naive
from sorpy.config import FitConfig, ScenarioConfig
from sorpy.dataset import read_long_csv
from sorpy.errors import ConfigError, EstimationError, ParseError, SorError
from sorpy.results import dumps, estimatescsv, filechecksum, resultdocument
from sorpy.simlab import MetricsTable, preset, run_scenario
from sorpy.sorfit import fit_sor

log = logging.getLogger(__name__)

OK, USAGE, FAILURE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    ''' reports usage errors as ConfigError, so they map to exit code 1 '''

    def error(self, message):
        raise ConfigError("{}: {}".format(self.prog, message))


def _list(text):
    return [item.strip() for item in text.split(',') if item.strip()]


def _floats(text):
    try:
        return [float(v) for v in _list(text)]
    except ValueError:
        raise ConfigError("expected comma separated numbers, got '{}'".format(text))


def _keyvalues(text, pairs=False):
    ''' "0=22.6;1=6.7" -> {'0': 22.6, '1': 6.7}, with pairs "0=0.33,0.1;1=..." -> {'0': [0.33, 0.1], ...} '''
    result = {}
    for item in text.split(';'):
        if not item.strip():
            continue
        key, sep, value = item.partition('=')
        if not sep:
            raise ConfigError("expected key=value, got '{}'".format(item))
        numbers = _floats(value)
        if len(numbers) != (2 if pairs else 1):
            raise ConfigError("bad value '{}' for stratum '{}'".format(value, key.strip()))
        result[key.strip()] = numbers if pairs else numbers[0]
    return result


def _version():
    from sorpy import version
    return version


def _readconfig(path):
    try:
        with open(path, encoding='utf-8') as f:
            return json.load(f)
    except (OSError, ValueError) as ex:
        raise ConfigError("cannot read configuration '{}': {}".format(path, ex))


def fitconfig(args):
    ''' the configuration file, if any, with the inline flags applied on top '''
    values = _readconfig(args.config) if args.config else {}
    for key in ('family', 'response', 'id', 'time', 'z', 'y0', 'correlation', 'estimator'):
        value = getattr(args, key)
        if value is not None:
            values[key] = value
    for key in ('covariates', 'w1', 'w2'):
        value = getattr(args, key)
        if value is not None:
            values[key] = _list(value)
    if args.h is not None:
        values['h'] = _hflag(args.h)
    design = dict(values.get('design') or {})
    if args.level is not None:
        design['level'] = args.level
    if args.strata is not None:
        design['strata'] = _list(args.strata)
    if args.ratio is not None:
        design['ratio'] = _keyvalues(args.ratio)
        design.pop('probs', None)
    if args.probs is not None:
        design['probs'] = _keyvalues(args.probs, pairs=True)
        design.pop('ratio', None)
    if args.nointerference:
        design['nointerference'] = True
    if design:
        values['design'] = design
    return FitConfig.fromdict(values)


def _hflag(text):
    ''' "identity", "abs" or "indicator:c" '''
    kind, _, arg = text.partition(':')
    if kind == 'indicator':
        return {'indicator': _floats(arg)[0]}
    return text


def runfit(config, data, design):
    ''' runs the estimator the configuration selects '''
    family, mean, options = config.familyspec(), config.meanmodel(), config.fitoptions()
    if config.estimator == NAIVE:
        return fit_naive(data, family, mean, options)
    if config.estimator == IPW:
        return fit_ipw(data, family, mean, design, options)
    return fit_sor(data, family, mean, config.auxspec(), design, options)


def cmd_fit(args):
    ''' fits the model, writes the result document. Returns the exit code. '''
    config = fitconfig(args)
    data = read_long_csv(args.data, config)
    design = None if config.estimator == NAIVE else config.samplingdesign()
    scales = _floats(args.ratio_scale) if args.ratio_scale else None
    if scales is None and args.ratio_stratum is not None:
        raise ConfigError("--ratio-stratum needs --ratio-scale")
    if scales is not None and design is None:
        raise ConfigError("--ratio-scale needs a design")
    if scales is None:
        fits = [runfit(config, data, design)]
    else:
        fits = []
        for scale in scales:
            log.info("fitting with design ratios scaled by %g", scale)
            fits.append(runfit(config, data, design.rescaled(scale, args.ratio_stratum)))
    document = resultdocument(fits, config.echo(), _version(), filechecksum(args.data), args.exp, scales)
    text = dumps(document)
    if args.output:
        with open(args.output, 'w', encoding='utf-8') as f:
            f.write(text + "\n")
    else:
        print(text)
    if args.csv:
        estimatescsv(fits[0], args.csv, args.exp)
    return OK


def cmd_simulate(args):
    ''' runs a preset or a scenario file, writes the metrics CSV. Returns the exit code. '''
    if bool(args.preset) == bool(args.scenario):
        raise ConfigError("give either --preset or --scenario")
    if args.preset:
        scenarios = preset(args.preset, args.scale, args.replicates, args.seed)
    else:
        scenario = ScenarioConfig.load(args.scenario)
        if args.replicates is not None:
            scenario.replicates = args.replicates
        if args.seed is not None:
            scenario.seed = args.seed
        scenarios = [scenario.toscenario()]
    table = MetricsTable.concat([run_scenario(s) for s in scenarios])
    if args.output:
        table.tocsv(args.output)
        log.info("metrics written to %s", args.output)
    else:
        sys.stdout.write(table.tocsv())
    return OK


def cmd_version(args):
    # pylint: disable-msg=W0613
    print("sorpy {}".format(_version()))
    return OK


def parser():
    p = _Parser(prog='sorpy', description="Sequential offsetted regressions for longitudinal data from biased sampling designs.")
    p.add_argument('-v', '--verbose', action='count', default=0, help="-v for progress, -vv for solver iterations")
    commands = p.add_subparsers(dest='command', parser_class=_Parser)

    fit = commands.add_parser('fit', help="fit a marginal mean model")
    fit.add_argument('--data', required=True, help="long format CSV file, one row per sampled observation")
    fit.add_argument('--config', help="JSON fit configuration, inline flags override it")
    fit.add_argument('--family', help="gaussian, poisson or bernoulli")
    fit.add_argument('--response')
    fit.add_argument('--id')
    fit.add_argument('--time')
    fit.add_argument('--z', help="the binary sampling variable")
    fit.add_argument('--covariates', help="comma separated mean model columns")
    fit.add_argument('--w1', help="comma separated auxiliary main effect columns")
    fit.add_argument('--w2', help="comma separated columns interacting with h(y)")
    fit.add_argument('--h', help="identity, abs or indicator:c")
    fit.add_argument('--level', help="subject or observation")
    fit.add_argument('--strata', help="comma separated stratum columns")
    fit.add_argument('--ratio', help="design ratios, eg. '0=22.6;1=6.7'")
    fit.add_argument('--probs', help="sampling probabilities, eg. 'all=0.333,0.12'")
    fit.add_argument('--nointerference', action='store_true')
    fit.add_argument('--y0', type=float)
    fit.add_argument('--correlation', help="independence or exchangeable")
    fit.add_argument('--estimator', help="sor, naive or ipw")
    fit.add_argument('--exp', action='store_true', help="also report exponentiated estimates and intervals")
    fit.add_argument('--ratio-scale', help="sensitivity sweep, comma separated factors for the design ratios")
    fit.add_argument('--ratio-stratum', help="restrict the sweep to one stratum key")
    fit.add_argument('--output', help="result document path, standard output if omitted")
    fit.add_argument('--csv', help="also write the estimates table to this CSV file")
    fit.set_defaults(func=cmd_fit)

    simulate = commands.add_parser('simulate', help="run a simulation preset or scenario")
    simulate.add_argument('--preset')
    simulate.add_argument('--scenario', help="JSON scenario file")
    simulate.add_argument('--replicates', type=int)
    simulate.add_argument('--seed', type=int)
    simulate.add_argument('--scale', default='default', choices=['default', 'full'])
    simulate.add_argument('--output', help="metrics CSV path, standard output if omitted")
    simulate.set_defaults(func=cmd_simulate)

    version = commands.add_parser('version', help="print the version")
    version.set_defaults(func=cmd_version)
    return p


def main(argv=None):
    ''' entry point of the sorpy script, returns the exit code '''
    try:
        args = parser().parse_args(argv)
    except ConfigError as ex:
        print(ex, file=sys.stderr)
        return USAGE
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    if args.command is None:
        print("sorpy: give a command, one of fit, simulate, version", file=sys.stderr)
        return USAGE
    try:
        return args.func(args)
    except (ConfigError, ParseError) as ex:
        print("sorpy: {}".format(ex), file=sys.stderr)
        return USAGE
    except EstimationError as ex:
        print("sorpy: {}".format(ex), file=sys.stderr)
        for key, value in ex.state.items():
            print("  {}: {}".format(key, value), file=sys.stderr)
        return FAILURE
    except (SorError, np.linalg.LinAlgError) as ex:
        print("sorpy: {}".format(ex), file=sys.stderr)
        return FAILURE


if __name__ == '__main__':
    sys.exit(main())
