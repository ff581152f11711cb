"""Euclidean projections onto L1, L2 and L-infinity balls centred at the origin."""

import numpy as np

NORMS = ("l1", "l2", "linf")


def _checked(v, d):
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("projection input contains non-finite values")
    if not d > 0:
        raise ValueError(f"radius must be positive, got {d}")
    return v


def project_l1(v, d):
    """Duchi et al. sort-based projection onto {w : ||w||_1 <= d}."""
    v = _checked(v, d)
    u = np.abs(v)
    if u.sum() <= d:
        return v.copy()
    mu = -np.sort(-u, kind="stable")
    cumsum = np.cumsum(mu)
    j = np.arange(1, mu.size + 1)
    rho = np.flatnonzero(mu - (cumsum - d) / j > 0)[-1] + 1
    theta = (cumsum[rho - 1] - d) / rho
    return np.sign(v) * np.maximum(u - theta, 0.0)


def project_l2(v, d):
    v = _checked(v, d)
    n = np.linalg.norm(v)
    if n <= d:
        return v.copy()
    return v * (d / n)


def project_linf(v, d):
    v = _checked(v, d)
    return np.clip(v, -d, d)


_PROJECTIONS = {"l1": project_l1, "l2": project_l2, "linf": project_linf}


def project(v, d, norm):
    try:
        return _PROJECTIONS[norm](v, d)
    except KeyError:
        raise ValueError(f"unsupported norm {norm!r}; expected one of {NORMS}") from None


def lp_norm(v, norm):
    v = np.asarray(v, dtype=np.float64)
    if norm == "l1":
        return float(np.abs(v).sum())
    if norm == "l2":
        return float(np.linalg.norm(v))
    if norm == "linf":
        return float(np.abs(v).max()) if v.size else 0.0
    raise ValueError(f"unsupported norm {norm!r}")


def norm_order(norm) -> float:
    """Numeric p for a norm name (inf for linf)."""
    return {"l1": 1.0, "l2": 2.0, "linf": np.inf}[norm]


def dual_norm_name(norm) -> str:
    return {"l1": "linf", "l2": "l2", "linf": "l1"}[norm]
