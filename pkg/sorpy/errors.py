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
Exceptions raised by sorpy.

Every error derives from `SorError`. Errors about bad input also derive from
ValueError, solver failures from RuntimeError, so callers not aware of sorpy
still catch them the usual way.
'''


class SorError(Exception):
    ''' base class of all sorpy errors '''


class DomainError(SorError, ValueError):
    ''' a value lies outside the mean space, the support or an admissible range '''


class ConfigError(SorError, ValueError):
    ''' the configuration is incoherent, eg. IPW requested for a design without probabilities '''


class ParseError(SorError, ValueError):
    '''
    Input data could not be read. `row` is the 1-based line number in the file
    (the header is line 1), `column` the offending column if known.
    '''

    def __init__(self, message, row=None, column=None):
        SorError.__init__(self, message)
        self.row = row
        self.column = column


class NumericError(SorError, ArithmeticError):
    ''' quadrature did not converge or a matrix is singular. `diagnostics` holds details. '''

    def __init__(self, message, diagnostics=None):
        SorError.__init__(self, message)
        self.diagnostics = diagnostics or {}


class EstimationError(SorError, RuntimeError):
    ''' a solver failed. `state` holds the last iterate and whatever else is known. '''

    def __init__(self, message, state=None):
        SorError.__init__(self, message)
        self.state = state or {}


class CalibrationError(EstimationError):
    ''' the latent correlation of the copula generator could not be calibrated '''
