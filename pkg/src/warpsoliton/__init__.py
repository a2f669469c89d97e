"""Solitary waves of the focusing NLS on rotationally symmetric manifolds."""
from .cheb_basis import SpectralFunction, build_basis
from .config import DEFAULT_CONFIG, SolverConfig
from .geometry import WarpingFunction, estimate_V0d, potential_V, weight_phi
from .ground_state import ConvergenceError, GroundState, shoot_ground_state, solve_ground_state
from .linearized import RadialGrid, RadialOperator, build_L, fundamental_system, low_spectrum
from .manifold_soliton import CurvedSoliton, fixed_point_rho, manifold_mass, strauss_check, vk_sign
from .quadrature import QuadratureRule, inner_product
from .stability import compute_b1, compute_b2, compute_Qhat1, expansion_constants, kappa, scan

__all__ = [
    "ConvergenceError", "CurvedSoliton", "DEFAULT_CONFIG", "GroundState", "QuadratureRule", "RadialGrid",
    "RadialOperator", "SolverConfig", "SpectralFunction", "WarpingFunction", "build_L", "build_basis",
    "compute_Qhat1", "compute_b1", "compute_b2", "estimate_V0d", "expansion_constants", "fixed_point_rho",
    "fundamental_system", "inner_product", "kappa", "low_spectrum", "manifold_mass", "potential_V", "scan",
    "shoot_ground_state", "solve_ground_state", "strauss_check", "vk_sign", "weight_phi",
]
