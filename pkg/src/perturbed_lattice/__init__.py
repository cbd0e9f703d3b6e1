"""Linear statistics of Gaussian-perturbed lattices: exact formulas, oracles and sampling."""

from .errors import (NotSamplableError, QuadratureError, ToleranceUnreachableError,
                     UnsupportedDimensionError)
from .experiments import ExperimentConfig, ResultRow, list_experiments, run_experiment
from .montecarlo import Accumulator, McEstimate, run_mc, zscore
from .point_process import (LatticeWindow, ProcessConfig, Realization, enumerate_window,
                            sample_statistic, sample_statistics)
from .realspace import (averaged_variance, inclusion_probability, mean_realspace,
                        theta_periodization, variance_realspace, variance_stationary_realspace)
from .spectral import (QuadratureSpec, SpectralResult, a0_term, am_envelope_check,
                       asymptotic_target, mean_exact, mean_stationary, upper_bound_functional,
                       variance_exact, variance_stationary)
from .test_functions import (ConvexBody, TestFunction, ball, cube, fourier_transform, gauss_pi,
                             get_test_function, gradient_energy, numeric_fourier, sobolev_g,
                             zero_function)

__version__ = "0.1.0"
