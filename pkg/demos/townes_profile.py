"""Townes profile two ways: spectral Newton collocation and shooting.

Run with ``python3 demos/townes_profile.py``.
"""
import numpy as np

from warpsoliton import shoot_ground_state, solve_ground_state
from warpsoliton.ground_state import mass
from warpsoliton.tables import GROUND_STATE_COEFFS

# Spectral solve at the reference basis size and at a refined one.
coarse = solve_ground_state(n_max=25)
fine = solve_ground_state(n_max=60)
print(f"n_max=25: {coarse.newton_iters} Newton steps, residual {coarse.residual_norm:.1e}")
print(f"n_max=60: {fine.newton_iters} Newton steps, residual {fine.residual_norm:.1e}")

# The reference coefficients are rational truncations, so agreement is ~1e-6.
dev = np.max(np.abs(coarse.profile.coeffs - GROUND_STATE_COEFFS))
print(f"max deviation from tabulated coefficients: {dev:.2e}")

# An ODE integrator with bisection on Q(0) gives an independent answer.
shot = shoot_ground_state(2, 3.0)
r = np.linspace(0, 10, 1001)
print(f"Q(0): spectral {fine.amplitude:.10f}, shooting {shot.amplitude:.10f}")
print(f"sup |spectral - shooting| on [0, 10]: {np.max(np.abs(fine(r) - shot(r))):.2e}")
print(f"mass ||Q||^2 = {mass(fine):.9f}  (shooting {mass(shot):.9f})")

print("\n   r      Q(r)")
for x in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
    print(f"{x:5.1f}  {float(fine(x)):.8f}")
