"""Normalised attack distance, aggregated security score and linear-kernel MMD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .projection import norm_order


def normalized_distance(raw: float, f: int, norm: str) -> float:
    """Scale an Lp distance by the largest Lp distance in [0, 1]^f, which is f**(1/p)."""
    if raw < 0:
        raise ValueError("distance must be nonnegative")
    if f < 1:
        raise ValueError("feature count must be >= 1")
    p = norm_order(norm)
    return float(raw) if np.isinf(p) else float(raw) / f ** (1.0 / p)


@dataclass
class SecurityScore:
    per_norm: dict
    value: float


def security_score(per_norm_means: dict) -> SecurityScore:
    """Mean of already-normalised per-norm distances (each divided by f**(1/p) once)."""
    if not per_norm_means:
        raise ValueError("no norms to aggregate")
    vals = [float(v) for v in per_norm_means.values()]
    return SecurityScore(dict(per_norm_means), float(sum(vals) / len(vals)))


def _l1_rows(a) -> np.ndarray:
    # divide rather than multiply by 1/||x||_1, which overflows for subnormal rows
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    s = np.abs(a).sum(axis=1, keepdims=True)
    return np.divide(a, s, out=np.zeros_like(a), where=s > 0)


def kernel_matrix(a, b) -> np.ndarray:
    """Normalised linear kernel x.z / (||x||_1 ||z||_1); rows with zero L1 norm give 0."""
    return _l1_rows(a) @ _l1_rows(b).T


def mmd_kernel(x, z) -> float:
    return float(kernel_matrix(x, z)[0, 0])


@dataclass
class MMDEstimate:
    value: float
    n: int
    m: int


def mmd_estimate(X, Z) -> MMDEstimate:
    """Kernel MMD estimate with the diagonal terms kept in both within-set sums."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    n, m = len(X), len(Z)
    if n == 0 or m == 0:
        raise ValueError("MMD needs two nonempty sample sets")
    # the normalised kernel is an inner product of L1-scaled rows, so the three
    # double sums collapse to ||mean_x - mean_z||^2 over the scaled rows
    diff = _l1_rows(X).mean(axis=0) - _l1_rows(Z).mean(axis=0)
    return MMDEstimate(float(diff @ diff), n, m)


def mmd_estimate_pairwise(X, Z) -> float:
    """The same estimate summed term by term over full Gram matrices (slow reference)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    n, m = len(X), len(Z)
    return float(kernel_matrix(X, X).sum() / n ** 2
                 - 2.0 * kernel_matrix(X, Z).sum() / (n * m)
                 + kernel_matrix(Z, Z).sum() / m ** 2)


@dataclass
class MMDRow:
    label: int
    baseline: float
    adversarial: float
    n_train: int
    n_test: int
    n_adversarial: int

    @property
    def ratio(self) -> float:
        return self.adversarial / self.baseline if self.baseline > 0 else float("nan")


def mmd_analysis(train_by_class: dict, test_by_class: dict,
                 adversarial_by_source_class: dict) -> list[MMDRow]:
    """Per class a: MMD(train_a, test_a) as baseline and MMD(train_a, adv_a).

    ``adv_a`` holds adversarial samples crafted from sources of class a.
    """
    rows = []
    for label in sorted(train_by_class):
        tr = np.asarray(train_by_class[label])
        te = np.asarray(test_by_class.get(label, []))
        adv = np.asarray(adversarial_by_source_class.get(label, []))
        if len(tr) == 0 or len(te) == 0:
            raise ValueError(f"class {label} has no clean samples")
        if len(adv) == 0:
            raise ValueError(f"class {label} has no adversarial samples")
        rows.append(MMDRow(int(label), mmd_estimate(tr, te).value,
                           mmd_estimate(tr, adv).value, len(tr), len(te), len(adv)))
    return rows
