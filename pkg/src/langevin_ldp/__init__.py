"""Large deviations of invariant measures for damped Langevin dynamics.

Exact Gibbs measures and their Laplace limits, stationary covariances of
linear one-step schemes, rate functions in the small-noise and
strong-dissipation regimes, and a Monte Carlo harness to check them.
"""

__version__ = "0.1.0"

from .errors import (ConfigurationError, ConvergenceError, DegenerateRateError,
                     DegenerateSpectrumError, DivergenceError, DomainError, EvaluationError,
                     InsufficientResolutionError, LangevinLDPError, NumericalError,
                     QuadratureError, StabilityError)
from .potentials import (GrowthCertificate, Potential, builtin_potential, check_gradient,
                         check_growth, locate_infimum)
from .gibbs import (GibbsMeasure, continuous_rate, density, laplace_limit_curve,
                    log_partition_function, partition_function, scaling_identity_check,
                    tail_bound_check)
from .schemes import (LinearScheme, assumption2_orders, build_scheme,
                      discriminant_expansion_check, euler_maruyama, find_instability_witness,
                      stability, tabulated_scheme, theta_method)
from .stationary import (StationaryCovariance, closed_form_sigma, lyapunov_sigma,
                         sigma_asymptotics)
from .sets import Annulus, BallComplement, Box, parse_set
from .ldp import (ExtendedRate, PreservationReport, QuadraticRate, dissipation_limit_curve,
                  legendre_quadratic, lmgf_small_noise, preservation_small_noise,
                  preservation_strong_dissipation, rate_infimum_over_set, rate_small_noise,
                  rate_strong_dissipation)
from .montecarlo import (ContinuousGaussian, EmpiricalSummary, SimulationConfig,
                         decay_rate_estimate, exact_stationary_sample, run_chains,
                         simulate_chain)
from .config import ExperimentConfig
