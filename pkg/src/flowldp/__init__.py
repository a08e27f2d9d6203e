"""Numerical thermodynamic formalism for suspension flows over subshifts.

Pressure, Gibbs measures, rate functions, Laplace-transform pole data and
sharp large-deviation constants, verified against exact enumeration and
Monte Carlo.
"""

from .shift import SymbolicSystem, validate_system, enumerate_words, periodic_orbits, birkhoff_sum
from .transfer import CylinderPotential, RpfData, build_matrix, rpf, gibbs_cylinder, complex_spectrum
from .suspension import SuspensionModel, flow_pressure, normalize_model, flow_mean
from .rate import beta, beta_prime, beta_second, xi_of_a, gamma_of_a, rate_profile
from .laplace import eval_Z_series, eval_Z_resolvent, pole_curve, residue_C, level_data
from .ldp import predicted_density, exact_estimate, mc_estimate, zeta_experiment
from .tauberian import LaplaceFamily, kernel_integral, fejer_smoothed_average, verify_tauberian
from .config import ExperimentConfig, load_config

__version__ = "0.1.0"
