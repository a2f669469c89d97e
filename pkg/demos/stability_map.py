"""Expansion constants b1, b2 and the sign of kappa over (c1, c2).

For A(r) = r + c1 r^3 + c2 r^5 the mass of the curved soliton is
||Q||^2 + kappa alpha^-4 + ..., with kappa = c1^2 b1 + c2 b2.  Positive
kappa means the mass decreases in alpha, which gives a growing mode.
"""
import numpy as np

from warpsoliton import expansion_constants, kappa, scan
from warpsoliton.stability import stability_boundary

k = expansion_constants()
print(f"b1 = {k.b1:.6f}   b1/2pi = {k.b1 / (2 * np.pi):.5f}   (b1 >= 14 pi: {k.b1 >= 14 * np.pi})")
print(f"b2 = {k.b2_ibp:.6f}  (direct form {k.b2_direct:.6f})")

for c1, c2, label in [(1, 0, "cubic warp"), (0, 1, "quintic warp"), (1 / 6, 1 / 120, "sinh Taylor")]:
    rep = kappa(c1, c2)
    print(f"{label:13s} c1={c1:.4f} c2={c2:.5f}  kappa={rep.kappa:+.5f}  {rep.classification}")

# Coarse map: '+' unstable, '.' stable candidate, '0' degenerate.
c1s = np.linspace(0, 1, 11)
c2s = np.linspace(-0.5, 0.5, 11)
rows = scan((0, 1), (-0.5, 0.5), 11)
sym = {"unstable": "+", "stable_candidate": ".", "degenerate": "0"}
grid = np.array([sym[r.classification] for r in rows]).reshape(11, 11)
print("\n  c2 \\ c1 " + "".join(f"{c:4.1f}" for c in c1s))
for j in range(10, -1, -1):
    print(f"  {c2s[j]:+5.2f}    " + "".join(f"{grid[i, j]:>4s}" for i in range(11)))

print("\nboundary kappa = 0:")
for c1, c2 in zip(c1s[1::2], stability_boundary(c1s[1::2], k)):
    print(f"  c1 = {c1:.1f}  ->  c2 = {c2:.5f}")
