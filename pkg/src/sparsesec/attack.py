"""Minimal-perturbation evasion attacks on linear classifiers.

A fixed-budget attack runs projected gradient ascent on the cross-entropy of the
original class, keeping the perturbation inside an Lp ball of radius ``gamma``.
The minimal attack wraps it in a doubling-then-bisection search over ``gamma``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .metrics import normalized_distance
from .model import LinearModel, input_gradient
from .projection import NORMS, dual_norm_name, lp_norm, norm_order, project

log = logging.getLogger(__name__)


class AttackError(RuntimeError):
    pass


@dataclass
class AttackConfig:
    norm: str = "l2"
    # alpha = step_size * gamma when relative_step, else alpha = step_size
    step_size: float = 0.05
    relative_step: bool = True
    max_iterations: int = 1000
    # None means 1e-3 * f**(1/p), f the model's active feature count
    binary_search_tolerance: float | None = None
    # None means 0.1 * f**(1/p)
    gamma_upper_init: float | None = None
    box_clamp: bool = True

    def __post_init__(self):
        if self.norm not in NORMS:
            raise ValueError(f"unknown norm {self.norm!r}")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.binary_search_tolerance is not None and not self.binary_search_tolerance > 0:
            raise ValueError("binary_search_tolerance must be positive")
        if self.gamma_upper_init is not None and not self.gamma_upper_init > 0:
            raise ValueError("gamma_upper_init must be positive")


@dataclass
class AttackResult:
    source: np.ndarray
    adversarial: np.ndarray | None
    gamma_min: float
    norm: str
    succeeded: bool
    iterations_used: int = 0
    search_trace: list = field(default_factory=list)  # (gamma, success)
    source_label: int | None = None
    index: int | None = None

    @property
    def distance(self) -> float:
        """Realised Lp size of the perturbation (nan when the attack failed)."""
        if self.adversarial is None:
            return float("nan")
        return lp_norm(self.adversarial - self.source, self.norm)

    def trace_violations(self, tol: float = 0.0) -> list:
        """Pairs (failing gamma, succeeding gamma) where the failure sits above the success."""
        fails = [g for g, ok in self.search_trace if not ok]
        wins = [g for g, ok in self.search_trace if ok]
        return [(a, b) for a in fails for b in wins if a > b + tol]


def _box_scale(feature_count: int, norm: str) -> float:
    """Largest Lp distance inside [0, 1]^f, i.e. f**(1/p)."""
    p = norm_order(norm)
    return 1.0 if np.isinf(p) else float(feature_count) ** (1.0 / p)


def _ascent_direction(g, norm):
    """Gradient rescaled so the step length does not shrink as the sigmoid saturates."""
    if norm == "linf":
        return np.sign(g)
    scale = np.abs(g).max() if norm == "l1" else np.linalg.norm(g)
    return g / scale if scale > 0 else np.zeros_like(g)


def _fixed_budget(model, x, y, cfg, gamma):
    target = 1 - y
    x_adv = x.copy()
    frozen = ~model.active_mask
    alpha = cfg.step_size * gamma if cfg.relative_step else cfg.step_size
    for it in range(cfg.max_iterations):
        if model.predict(x_adv) == target:
            return x_adv, it
        g = input_gradient(model, x_adv, y)
        if not np.all(np.isfinite(g)):
            raise AttackError(f"non-finite gradient at iteration {it}")
        step = alpha * _ascent_direction(g, cfg.norm)
        if not step.any():
            return None, it
        x_new = x + project(x_adv - x + step, gamma, cfg.norm)
        if cfg.box_clamp:
            np.clip(x_new, 0.0, 1.0, out=x_new)
        # the clamp could otherwise move an inactive coordinate that starts outside the box
        x_new[frozen] = x[frozen]
        if np.max(np.abs(x_new - x_adv)) <= 1e-12 * max(1.0, gamma):
            # stationary point of a deterministic map: later iterates are identical
            return (x_new, it + 1) if model.predict(x_new) == target else (None, it + 1)
        x_adv = x_new
    if model.predict(x_adv) == target:
        return x_adv, cfg.max_iterations
    return None, cfg.max_iterations


def fixed_budget_attack(model: LinearModel, x, y: int, y_target: int | None = None,
                        cfg: AttackConfig | None = None, gamma: float = 1.0):
    """Adversarial sample within Lp distance ``gamma`` of ``x``, or None."""
    cfg = cfg or AttackConfig()
    x = np.asarray(x, dtype=np.float64)
    y = int(y)
    if y_target is not None and y_target != 1 - y:
        raise ValueError("binary setting: the target must be the opposite class")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    adv, _ = _fixed_budget(model, x, y, cfg, gamma)
    return adv


def minimal_attack(model: LinearModel, x, y: int, cfg: AttackConfig | None = None,
                   index: int | None = None) -> AttackResult:
    cfg = cfg or AttackConfig()
    x = np.asarray(x, dtype=np.float64)
    y = int(y)
    target = 1 - y
    if model.predict(x) == target:
        return AttackResult(x, x.copy(), 0.0, cfg.norm, True, 0, [], y, index)

    f = model.feature_count()
    if f == 0:
        # constant predictor: nothing the attacker can move
        return AttackResult(x, None, _box_scale(max(f, 1), cfg.norm), cfg.norm, False,
                            0, [], y, index)
    scale = _box_scale(f, cfg.norm)
    tol = cfg.binary_search_tolerance or 1e-3 * scale
    cap = scale
    hi = min(cfg.gamma_upper_init or 0.1 * scale, cap)
    lo = 0.0
    trace, used = [], 0

    while True:
        adv, it = _fixed_budget(model, x, y, cfg, hi)
        used += it
        trace.append((hi, adv is not None))
        if adv is not None:
            best = adv
            break
        lo = hi
        if hi >= cap:
            log.debug("attack failed at the box diameter %.4g", cap)
            return AttackResult(x, None, cap, cfg.norm, False, used, trace, y, index)
        hi = min(2.0 * hi, cap)

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        adv, it = _fixed_budget(model, x, y, cfg, mid)
        used += it
        trace.append((mid, adv is not None))
        if adv is not None:
            hi, best = mid, adv
        else:
            lo = mid

    result = AttackResult(x, best, hi, cfg.norm, True, used, trace, y, index)
    if result.trace_violations(tol):
        log.warning("non-monotonic search trace for sample %s", index)
    return result


def attack_many(model: LinearModel, features, labels, cfg: AttackConfig,
                indices=None) -> list[AttackResult]:
    features = np.asarray(features, dtype=np.float64)
    if indices is None:
        indices = range(len(features))
    return [minimal_attack(model, xi, int(yi), cfg, int(i))
            for xi, yi, i in zip(features, labels, indices)]


def analytic_min_distance(model: LinearModel, x, norm: str) -> float:
    """Lp distance from ``x`` to the hyperplane w.x + b = 0, i.e. |w.x + b| / ||w||_q."""
    q = lp_norm(model.weights, dual_norm_name(norm))
    if q == 0:
        raise ValueError("zero weight vector: the decision boundary is undefined")
    return abs(float(model.decision_value(x))) / q


def write_jsonl(results, path, feature_count: int) -> None:

    with Path(path).open("w", encoding="utf-8") as fh:
        for r in results:
            fh.write(json.dumps({
                "index": r.index,
                "source_label": r.source_label,
                "norm": r.norm,
                "gamma_min": r.gamma_min,
                "normalized": normalized_distance(r.gamma_min, feature_count, r.norm),
                "succeeded": r.succeeded,
                "iterations": r.iterations_used,
            }) + "\n")


def read_jsonl(path) -> list[dict]:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
