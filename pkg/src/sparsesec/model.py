"""Logistic regression with optional L1/L2 penalty, trained by full-batch gradient descent."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .dataset import Dataset

log = logging.getLogger(__name__)

REG_KINDS = ("none", "l1", "l2")


class TrainingError(RuntimeError):
    pass


class DimensionError(ValueError):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 2000
    seed: int = 0
    init_scale: float = 0.0
    # "proximal" soft-thresholds after each step, "subgradient" uses sign(w) with sign(0) = 0
    l1_step: str = "proximal"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.init_scale < 0:
            raise ValueError("init_scale must be nonnegative")
        if self.l1_step not in ("proximal", "subgradient"):
            raise ValueError(f"unknown l1_step {self.l1_step!r}")


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float = 0.0
    lam: float = 0.0
    reg_kind: str = "none"
    active_mask: np.ndarray | None = None
    sparsify_threshold: float = 0.0

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=np.float64).ravel()
        self.bias = float(self.bias)
        if self.reg_kind not in REG_KINDS:
            raise ValueError(f"unknown reg_kind {self.reg_kind!r}")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.active_mask is None:
            self.active_mask = np.ones(self.weights.shape, dtype=bool)
        else:
            self.active_mask = np.array(self.active_mask, dtype=bool).ravel()
            if self.active_mask.shape != self.weights.shape:
                raise DimensionError("active_mask and weights differ in length")
            self.weights[~self.active_mask] = 0.0

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def feature_count(self) -> int:
        return int(self.active_mask.sum())

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.n_features:
            raise DimensionError(
                f"input has {x.shape[-1]} features, model expects {self.n_features}")
        return x

    def decision_value(self, x):
        """w.x + b for one sample (scalar) or a batch of rows (vector)."""
        return self._check(x) @ self.weights + self.bias

    def predict_proba(self, x):
        return expit(self.decision_value(x))

    def predict(self, x):
        z = self.decision_value(x)
        # sigmoid(z) >= 0.5 exactly when z >= 0
        return (np.asarray(z) >= 0).astype(np.int64) if np.ndim(z) else int(z >= 0)

    def to_dict(self) -> dict:
        return {
            "weights": [float(v) for v in self.weights],
            "bias": self.bias,
            "lambda": float(self.lam),
            "reg_kind": self.reg_kind,
            "threshold": float(self.sparsify_threshold),
            "active_mask": [bool(v) for v in self.active_mask],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LinearModel":
        return cls(weights=doc["weights"], bias=doc["bias"], lam=doc["lambda"],
                   reg_kind=doc["reg_kind"], active_mask=doc["active_mask"],
                   sparsify_threshold=doc.get("threshold", 0.0))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "LinearModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _residual(z, y):
    # sigmoid(z) - y, written so the y = 1 branch does not round to exactly 0
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y)
    return np.where(y == 1, -expit(-z), expit(z) - y)


def cross_entropy(z, y) -> float:
    z = np.asarray(z, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def penalty(weights, reg_kind: str, lam: float) -> float:
    if reg_kind == "l1":
        return lam * float(np.abs(weights).sum())
    if reg_kind == "l2":
        return lam * float(weights @ weights)
    return 0.0


def objective(model: LinearModel, dataset: Dataset) -> float:
    z = model.decision_value(dataset.features)
    return cross_entropy(z, dataset.labels) + penalty(model.weights, model.reg_kind, model.lam)


def train(dataset: Dataset, reg_kind: str = "none", lam: float = 0.0,
          cfg: TrainConfig | None = None, history: list | None = None) -> LinearModel:
    """Minimise mean sigmoid cross-entropy plus the chosen weight penalty.

    The bias is never penalised. If ``history`` is a list, the objective before
    each epoch and after the last one is appended to it.
    """
    cfg = cfg or TrainConfig()
    if reg_kind not in REG_KINDS:
        raise ValueError(f"unknown reg_kind {reg_kind!r}")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if dataset.n_samples == 0:
        raise ValueError("cannot train on an empty dataset")

    x, y = dataset.features, dataset.labels
    n, f = x.shape
    rng = np.random.default_rng(cfg.seed)
    w = rng.normal(0.0, cfg.init_scale, f) if cfg.init_scale > 0 else np.zeros(f)
    b = 0.0
    lr = cfg.learning_rate
    proximal = reg_kind == "l1" and cfg.l1_step == "proximal"

    for epoch in range(cfg.epochs):
        z = x @ w + b
        if history is not None:
            loss = cross_entropy(z, y) + penalty(w, reg_kind, lam)
            if not math.isfinite(loss):
                raise TrainingError(f"non-finite objective at epoch {epoch}")
            history.append(loss)
        r = _residual(z, y)
        grad_w = x.T @ r / n
        grad_b = float(r.mean())
        if reg_kind == "l2":
            grad_w = grad_w + 2.0 * lam * w
        elif reg_kind == "l1" and not proximal:
            grad_w = grad_w + lam * np.sign(w)
        w = w - lr * grad_w
        if proximal and lam > 0:
            w = np.sign(w) * np.maximum(np.abs(w) - lr * lam, 0.0)
        b -= lr * grad_b
        if not (np.isfinite(b) and np.all(np.isfinite(w))):
            raise TrainingError(f"parameters diverged at epoch {epoch}")

    if history is not None:
        history.append(cross_entropy(x @ w + b, y) + penalty(w, reg_kind, lam))
    return LinearModel(w, b, lam=lam, reg_kind=reg_kind)


def sparsify(model: LinearModel, threshold: float) -> LinearModel:
    """Zero every weight with magnitude below ``threshold`` and update the mask."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    keep = model.active_mask & (np.abs(model.weights) >= threshold)
    return LinearModel(np.where(keep, model.weights, 0.0), model.bias, lam=model.lam,
                       reg_kind=model.reg_kind, active_mask=keep,
                       sparsify_threshold=max(threshold, model.sparsify_threshold))


def input_gradient(model: LinearModel, x, y):
    """Gradient of the cross-entropy loss with respect to the input sample(s)."""
    z = model.decision_value(x)
    r = _residual(z, y)
    return np.multiply.outer(r, model.weights) if np.ndim(r) else r * model.weights


def evaluate_accuracy(model: LinearModel, dataset: Dataset) -> float:
    if dataset.n_samples == 0:
        raise ValueError("empty dataset")
    return float(np.mean(model.predict(dataset.features) == dataset.labels))


@dataclass
class LambdaChoice:
    """Outcome of the search for one target feature count."""
    target: int
    lam: float
    model: LinearModel
    achieved: int
    found: bool
    trace: list = field(default_factory=list)  # (lambda, feature_count) in visit order
    non_monotonic: list = field(default_factory=list)

    def __iter__(self):
        yield self.lam
        yield self.model


def count_tolerance(target: int, rel: float = 0.1) -> float:
    return max(1.0, rel * target)


def lambda_search(dataset: Dataset, target_counts, cfg: TrainConfig | None = None,
                  threshold: float = 0.01, reg_kind: str = "l1",
                  log_bounds=(-6.0, 3.0), max_iter: int = 40,
                  rel_tol: float = 0.1) -> dict[int, LambdaChoice]:
    """Find, per target, a penalty whose trained-then-sparsified model keeps ~target features.

    Bisects on log10(lambda), treating the kept-feature count as nonincreasing in
    lambda. Every fit is cached and shared between targets. Unreachable targets
    come back with ``found=False`` and the closest model seen.
    """
    cfg = cfg or TrainConfig()
    f = dataset.n_features
    targets = [int(t) for t in target_counts]
    if not targets:
        raise ValueError("target_counts is empty")
    for t in targets:
        if not 1 <= t <= f:
            raise ValueError(f"target {t} outside [1, {f}]")

    fits: dict[float, LinearModel] = {}
    visits: list[tuple[float, int]] = []

    def fit(lam):
        if lam not in fits:
            fits[lam] = sparsify(train(dataset, reg_kind, lam, cfg), threshold)
            visits.append((lam, fits[lam].feature_count()))
            log.debug("lambda=%.3g -> %d features", lam, fits[lam].feature_count())
        return fits[lam]

    lo_log, hi_log = log_bounds
    out = {}
    for target in sorted(set(targets), reverse=True):
        tol = count_tolerance(target, rel_tol)
        start = len(visits)
        candidates = [0.0] if target == f else []
        found = None
        for lam in candidates:
            if abs(fit(lam).feature_count() - target) <= tol:
                found = lam
        lo, hi = lo_log, hi_log
        # narrow the bracket with fits made for earlier targets
        for lam, count in visits:
            if lam <= 0:
                continue
            if count > target + tol:
                lo = max(lo, math.log10(lam))
            elif count < target - tol:
                hi = min(hi, math.log10(lam))
            elif found is None:
                found = lam
        it = 0
        while found is None and it < max_iter and hi >= lo:
            mid = 0.5 * (lo + hi)
            count = fit(10.0 ** mid).feature_count()
            it += 1
            if count > target + tol:
                lo = mid
            elif count < target - tol:
                hi = mid
            else:
                found = 10.0 ** mid
        trace = visits[start:] if len(visits) > start else []
        if found is not None:
            model = fits[found]
            out[target] = LambdaChoice(target, found, model, model.feature_count(), True,
                                       trace, _monotonicity_violations(visits))
        else:
            lam = min(fits, key=lambda k: (abs(fits[k].feature_count() - target), k))
            model = fits[lam]
            log.warning("target %d unreachable; nearest count %d at lambda=%.3g",
                        target, model.feature_count(), lam)
            out[target] = LambdaChoice(target, lam, model, model.feature_count(), False,
                                       trace, _monotonicity_violations(visits))
    return {t: out[t] for t in targets}


def _monotonicity_violations(visits):
    """Pairs (lam_a, lam_b) with lam_a < lam_b but count_a < count_b."""
    ordered = sorted(visits)
    bad = []
    for i, (la, ca) in enumerate(ordered):
        for lb, cb in ordered[i + 1:]:
            if lb > la and cb > ca:
                bad.append((la, lb))
    return bad
