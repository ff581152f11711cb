"""Minimal evasion attack against a fixed 2-d linear classifier.

For a linear model the smallest Lp perturbation that crosses the boundary is
|w.x + b| / ||w||_q with q the dual exponent, so the iterative attack can be
checked by hand.

Run: python3 demos/minimal_attack_hyperplane.py
"""
import numpy as np

from sparsesec.attack import AttackConfig, analytic_min_distance, minimal_attack
from sparsesec.model import LinearModel

model = LinearModel([3.0, 4.0], -5.0)
x = np.zeros(2)
print(f"class of origin: {model.predict(x)}, decision value {model.decision_value(x)}")

for clamp in (False, True):
    print(f"\nbox clamp {'on' if clamp else 'off'}")
    for norm in ("l1", "l2", "linf"):
        r = minimal_attack(model, x, 0, AttackConfig(norm=norm, box_clamp=clamp))
        print(f"  {norm:4s} gamma_min {r.gamma_min:.4f}  exact {analytic_min_distance(model, x, norm):.4f}"
              f"  adversarial {np.round(r.adversarial, 4)}  budgets tried {len(r.search_trace)}")

# with the clamp on, L1 cannot push the second coordinate past 1 and pays 4/3 instead of 5/4
