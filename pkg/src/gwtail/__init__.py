"""Left-tail density of the martingale limit of Galton-Watson processes in finite random environments."""
__version__ = "0.1.0"

from .model import OffspringPgf, Environment, pgf_eval, environment_validate, build_two_poly_family
from .qmatrix import QMatrix, power_coeffs, q_matrix, q_subdiag_check
from .phi import PhiTable, phi_table, phi_table_two_poly, phi_gf_eval
from .pseudo_inverse import BVector, b_recurrence, b_determinant
from .asymptotics import (
    AmplitudeSet, DensityCurve, amplitude, amplitude_richardson, amplitude_set,
    oscillation_scan, density_series,
)
from .reference import ReferenceConfig, pi_t, reference_density, reference_moments
from .montecarlo import SimConfig, simulate_step, estimate_ratio, martingale_histogram
