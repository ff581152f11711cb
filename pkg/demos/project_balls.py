"""Euclidean projection of a few points onto L1, L2 and L-infinity balls.

Run: python3 demos/project_balls.py
"""
import numpy as np

from sparsesec.projection import lp_norm, project

points = [np.array([0.7, 0.2, -0.4]), np.array([3.0, 4.0, 0.0]), np.array([0.1, -0.1, 0.05])]

for v in points:
    print(f"v = {v}")
    for norm in ("l1", "l2", "linf"):
        w = project(v, 1.0, norm)
        print(f"  {norm:4s} -> {np.round(w, 4)}  |w| = {lp_norm(w, norm):.4f}  moved {np.linalg.norm(w - v):.4f}")

# the L1 projection zeroes small coordinates, which is why it yields sparse perturbations
v = np.random.default_rng(0).normal(size=12)
w = project(v, 1.0, "l1")
print(f"\n12-d gaussian: {np.count_nonzero(w)} nonzero coordinates after L1 projection")
