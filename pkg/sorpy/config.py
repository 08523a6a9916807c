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
Fit configurations and simulation scenario files, JSON documents validated by pydantic.

A fit configuration names the columns of the data and declares the model and the design:

>>> config = FitConfig.fromdict({'family': 'poisson', 'response': 'count', 'id': 'child', 'time': 'year',
...                              'z': 'referred', 'covariates': ['gender'], 'w1': ['gender'],
...                              'h': {'indicator': 1}, 'design': {'strata': ['gender'], 'ratio': {'0': 22.6, '1': 6.7}}})
>>> config.samplingdesign().ratio('0')
22.6

Validation problems surface as `sorpy.errors.ConfigError`.
'''

import json
import logging
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from sorpy.auxiliary import AuxiliarySpec, HSpec
from sorpy.comparators import IPW, NAIVE
from sorpy.design import SUBJECT, SamplingDesign
from sorpy.errors import ConfigError, DomainError
from sorpy.family import FamilySpec
from sorpy.simlab import DesignRun, ObservationGaussianParams, SimScenario, SubjectPoissonParams, SUBJECT_POISSON
from sorpy.sorfit import FitOptions, MeanModel

log = logging.getLogger(__name__)

SOR = 'sor'


class DesignConfig(BaseModel):
    ''' the design block: level, stratum columns and either ratios or probabilities per stratum key '''
    model_config = ConfigDict(extra='forbid')

    level: str = SUBJECT
    strata: List[str] = Field(default_factory=list)
    ratio: Optional[Dict[str, float]] = None
    probs: Optional[Dict[str, Tuple[float, float]]] = None
    nointerference: bool = False


class Tolerances(BaseModel):
    model_config = ConfigDict(extra='forbid')

    beta: float = 1e-8
    phi: float = 1e-8
    aux: float = 1e-10
    maxiter: int = 50
    maxouter: int = 100


class FitConfig(BaseModel):
    '''
    A fit configuration. `nointerference` at the top level is a shorthand for the key of
    the design block. Intercepts are implicit in the mean model and in W1 and W2.
    '''
    model_config = ConfigDict(extra='forbid')

    family: str
    response: str
    id: str
    time: str
    z: Optional[str] = None
    covariates: List[str] = Field(default_factory=list)
    w1: List[str] = Field(default_factory=list)
    w2: List[str] = Field(default_factory=list)
    h: Union[str, Dict[str, Union[float, List[List[float]]]]] = 'identity'
    design: Optional[DesignConfig] = None
    y0: Optional[float] = None
    correlation: Optional[str] = None
    nointerference: Optional[bool] = None
    estimator: str = SOR
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @model_validator(mode='after')
    def _coherent(self):
        if self.estimator not in (SOR, NAIVE, IPW):
            raise ValueError("unknown estimator '{}', expected sor, naive or ipw".format(self.estimator))
        if self.estimator != NAIVE and self.design is None:
            raise ValueError("estimator {} needs a design block".format(self.estimator))
        if self.estimator != NAIVE and self.z is None:
            raise ValueError("estimator {} needs the sampling variable z".format(self.estimator))
        if self.estimator == IPW and not self.design.probs:
            raise ValueError("estimator ipw needs absolute sampling probabilities (design.probs)")
        if self.nointerference is not None and self.design is not None:
            self.design.nointerference = self.design.nointerference or self.nointerference
        return self

    @staticmethod
    def fromdict(values):
        try:
            return FitConfig.model_validate(values)
        except ValidationError as ex:
            raise ConfigError("invalid fit configuration: {}".format(ex))

    @staticmethod
    def load(path):
        ''' reads a JSON configuration file '''
        try:
            with open(path, encoding='utf-8') as f:
                values = json.load(f)
        except (OSError, json.JSONDecodeError) as ex:
            raise ConfigError("cannot read configuration '{}': {}".format(path, ex))
        return FitConfig.fromdict(values)

    def familyspec(self):
        try:
            return FamilySpec.fromname(self.family, self.y0)
        except DomainError as ex:
            raise ConfigError(str(ex))

    def meanmodel(self):
        return MeanModel(tuple(self.covariates), self.correlation)

    def auxspec(self):
        return AuxiliarySpec(tuple(self.w1), tuple(self.w2), HSpec.fromconfig(self.h))

    def samplingdesign(self):
        if self.design is None:
            return None
        return SamplingDesign.fromconfig(self.design.model_dump())

    def fitoptions(self):
        t = self.tolerances
        return FitOptions(betatol=t.beta, phitol=t.phi, auxtol=t.aux, maxiter=t.maxiter, maxouter=t.maxouter)

    def echo(self):
        ''' the configuration as a JSON compatible dict, None values dropped '''
        return self.model_dump(mode='json', exclude_none=True)


class DesignRunConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    design: str
    estimators: List[str]
    correlation: Optional[str] = None


class ScenarioConfig(BaseModel):
    ''' a simulation scenario file, see `sorpy.simlab.SimScenario` for the meaning of the keys '''
    model_config = ConfigDict(extra='forbid')

    name: str
    generator: str = SUBJECT_POISSON
    params: Dict[str, Union[int, float, List[float]]] = Field(default_factory=dict)
    designs: List[DesignRunConfig]
    target: int = 250
    baseline: Optional[str] = None
    factor: float = 1.0
    stratum: Optional[str] = None
    replicates: int = 500
    seed: int = 1

    @staticmethod
    def load(path):
        try:
            with open(path, encoding='utf-8') as f:
                return ScenarioConfig.model_validate(json.load(f))
        except (OSError, json.JSONDecodeError, ValidationError) as ex:
            raise ConfigError("cannot read scenario '{}': {}".format(path, ex))

    def toscenario(self):
        paramtype = SubjectPoissonParams if self.generator == SUBJECT_POISSON else ObservationGaussianParams
        values = {k: tuple(v) if isinstance(v, list) else v for k, v in self.params.items()}
        try:
            params = paramtype(**values)
        except TypeError as ex:
            raise ConfigError("bad parameters for generator {}: {}".format(self.generator, ex))
        runs = tuple(DesignRun(r.design, tuple(r.estimators), r.correlation) for r in self.designs)
        return SimScenario(self.name, self.generator, params, runs, self.target, self.baseline,
                           self.factor, self.stratum, self.replicates, self.seed)
