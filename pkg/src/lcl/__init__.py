"""lcl: desk-scale laboratory for Landau-level eigenvalue clusters.

Computes spectra of truncated level compressions P_q V P_q of long-range
potentials in the angular-momentum basis, and compares the scaled cluster
eigenvalue distribution against the limiting density expressed through the
circle-average transform of the potential's homogeneous tail.
"""

__version__ = "0.1.0"

from .errors import (AccuracyError, CapacityError, ConfigurationError,
                     ContractError, LclError, MethodError, NumericalError,
                     QuadratureError)
from .specfun import (QuadratureRule, assoc_laguerre, bessel_j0, gauss_nodes,
                      laguerre, laguerre_bessel_gap, laguerre_function,
                      laguerre_weighted)
from .potentials import (AngularModeProfile, PotentialModel, TailField,
                         circle_average, evaluate, evaluate_tail,
                         mean_value_radial_profile, mean_value_transform,
                         orbit_average)
from .landau import (BasisIndex, LandauConfig, ToeplitzBlock,
                     eigen_residual_check, indicator_basis_mass, landau_level,
                     radial_basis, radial_diagonal, toeplitz_entry,
                     toeplitz_matrix, truncation_bound)
from .eigen import EigenSpectrum, sym_eig
from .symbols import (RadialSymbolProfile, circle_convolution,
                      circle_symbol_profile, hs_distance, hs_distance_fourier,
                      i_rho, laguerre_smoothing, psi_q, scaled_symbol_identity,
                      smoothed_symbol_profile, v_B)
from .measures import (ConvergenceRow, EmpiricalClusterMeasure, LimitingMeasure,
                       TestFunction, convergence_study, eigenvalue_counting,
                       limiting_density_integral, mu_interval, rows_to_csv,
                       schatten_norm, trace_functional)

__all__ = [name for name in dir() if not name.startswith("_")]
