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
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

from sorpy.errors import *
__all__ = ["SorError", "DomainError", "ConfigError", "ParseError", "NumericError", "EstimationError", "CalibrationError"]

from sorpy.family import *
__all__.extend(["FamilySpec", "TiltFunction", "QuadratureConfig", "canonical_theta", "population_odds",
                "sample_odds", "tilted_law", "sample_moments", "bstar", "log_sample_density"])

from sorpy.design import *
__all__.extend(["SamplingDesign", "RhoRatio", "ratio_from_counts", "rho_ratio", "tilt_for_observation", "stratumkey"])

from sorpy.auxiliary import *
__all__.extend(["HSpec", "AuxiliarySpec", "AuxiliaryModel", "h_eval", "lambda_S", "fit_aux"])

from sorpy.dataset import *
__all__.extend(["LongitudinalDataset", "read_long_csv"])

from sorpy.sorfit import *
__all__.extend(["MeanModel", "FitOptions", "SorFit", "SorProblem", "fit_sor", "predict_sample_mean",
                "beta_estimating_function", "solve_beta", "dispersion_score", "loglik", "solve_phi",
                "estimate_alpha", "dmuS_dgamma", "sandwich_covariance"])

from sorpy.comparators import *
__all__.extend(["ComparatorFit", "fit_naive", "fit_ipw"])

from sorpy.simlab import *
__all__.extend(["SimScenario", "DesignRun", "SubjectPoissonParams", "ObservationGaussianParams", "MetricsTable",
                "gen_subject_population", "gen_observation_population", "apply_design", "misspecify",
                "run_replicate", "run_scenario", "preset", "PRESETS"])

from sorpy.config import *
__all__.extend(["FitConfig", "ScenarioConfig"])

version = "0.1.0"
