"""Reference coefficients for the constrained Chebyshev expansions.

``GROUND_STATE_COEFFS`` are the coefficients of phi_3..phi_25 for the Townes
profile in the ``ground_state_form`` ansatz; ``S1_COEFFS`` are phi_3..phi_40
for the solution of ``L+ S1 = -r^2 Q^3``.  Both are rational truncations of
floating point results and serve as decimal targets.
"""
from fractions import Fraction as F

import numpy as np

GROUND_STATE_FRACTIONS = (
    F(-2542, 141001), F(8061, 72860), F(23, 25643), F(-17127, 731900),
    F(-113, 61446), F(407, 88530), F(80, 79969), F(-195, 296276),
    F(-167, 607101), F(3, 91531), F(3, 109289), F(1, 42237921),
    F(1, 163112), F(1, 171418), F(1, 1839428), F(-1, 412985),
    F(-1, 693490), F(-1, 3459389), F(1, 5641102), F(1, 2626342),
    F(1, 45286837), F(1, 10226264), F(-1, 9836273),
)

S1_FRACTIONS = (
    F(54973, 96387), F(-3088, 102021), F(-11563, 65730), F(-622, 123831),
    F(935, 19694), F(715, 80273), F(-972, 107461), F(-245, 66869),
    F(43, 75440), F(6, 13097), F(7, 79466), F(23, 138473),
    F(10, 87071), F(-1, 41044), F(-7, 100544), F(-3, 79736),
    F(-1, 247350), F(1, 98688), F(1, 104302), F(1, 181864),
    F(1, 1748151), F(-1, 795239), F(-1, 519650), F(-1, 1141942),
    F(-1, 2632970), F(1, 3481458), F(1, 4334802), F(1, 3856839),
    F(1, 14342913), F(-1, 142634956), F(-1, 42463795), F(-1, 12658667),
    F(1, 45132528), F(-1, 14926347), F(1, 15529718), F(-1, 15419336),
    F(1, 13135736), F(-1, 36714512),
)

GROUND_STATE_COEFFS = np.array([float(c) for c in GROUND_STATE_FRACTIONS])
S1_COEFFS = np.array([float(c) for c in S1_FRACTIONS])

assert GROUND_STATE_COEFFS.size == 25 - 2
assert S1_COEFFS.size == 40 - 2
