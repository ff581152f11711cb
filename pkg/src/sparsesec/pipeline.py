"""Cross-validated security evaluation: train per feature count, attack, aggregate, report."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attack import AttackConfig, AttackResult, attack_many
from .dataset import Dataset, kfold_split, load_csv, normalize_minmax
from .metrics import mmd_analysis, normalized_distance, security_score
from .model import LinearModel, TrainConfig, evaluate_accuracy, lambda_search, train
from .projection import NORMS

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PER_NORM_FIELDS = ("raw_mean", "normalized_mean", "success_rate", "n_attacked",
                   "n_class0", "n_class1")


class ExperimentError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    dataset_path: str | None = None
    target_feature_counts: list = field(default_factory=lambda: [10, 25, 50, 100])
    norms: list = field(default_factory=lambda: list(NORMS))
    k_folds: int = 10
    # evaluate only the first max_folds folds (None = all)
    max_folds: int | None = None
    sparsify_threshold: float = 0.01
    attack: AttackConfig = field(default_factory=AttackConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0
    sample_cap: int | None = 100
    normalize: bool = False
    include_full: bool = True

    def __post_init__(self):
        if isinstance(self.attack, dict):
            self.attack = AttackConfig(**self.attack)
        if isinstance(self.train, dict):
            self.train = TrainConfig(**self.train)
        if self.k_folds < 2:
            raise ValueError("k_folds must be >= 2")
        bad = [n for n in self.norms if n not in NORMS]
        if bad or not self.norms:
            raise ValueError(f"norms must be a nonempty subset of {NORMS}, got {self.norms}")
        if self.sparsify_threshold < 0:
            raise ValueError("sparsify_threshold must be nonnegative")
        if self.sample_cap is not None and self.sample_cap < 1:
            raise ValueError("sample_cap must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class FoldModel:
    fold: int
    target: int
    model: LinearModel
    accuracy: float
    found: bool
    diagnostic: str = ""


@dataclass
class Campaign:
    """Everything produced by the attack runs; the security and MMD reports are views of it."""
    config: ExperimentConfig
    dataset: Dataset
    folds: object
    targets: list
    models: dict = field(default_factory=dict)    # (fold, target) -> FoldModel
    attacks: dict = field(default_factory=dict)   # (fold, target, norm) -> [AttackResult]


def _dataset_for(config: ExperimentConfig, dataset: Dataset | None) -> Dataset:
    if dataset is None:
        if not config.dataset_path:
            raise ValueError("config has no dataset_path and no dataset was given")
        dataset = load_csv(config.dataset_path)
    return normalize_minmax(dataset) if config.normalize else dataset


def _targets(config, f):
    targets = sorted({int(t) for t in config.target_feature_counts}, reverse=True)
    for t in targets:
        if not 1 <= t <= f:
            raise ValueError(f"target feature count {t} outside [1, {f}]")
    if config.include_full and f not in targets:
        targets.insert(0, f)
    return targets


def _attacked_indices(test_idx, cap, seed, fold):
    if cap is None or cap >= len(test_idx):
        return test_idx
    rng = np.random.default_rng([seed, fold])
    return np.sort(rng.choice(test_idx, size=cap, replace=False))


def run_campaign(config: ExperimentConfig, dataset: Dataset | None = None) -> Campaign:
    """Train and attack every (fold, feature count, norm) cell, in that order.

    The target equal to the input dimension is the unregularised model with no
    sparsification; other targets come from the L1 path search on the fold's
    training part.
    """
    dataset = _dataset_for(config, dataset)
    f = dataset.n_features
    targets = _targets(config, f)
    folds = kfold_split(dataset.n_samples, config.k_folds, config.seed)
    n_folds = config.k_folds if config.max_folds is None else min(config.max_folds, config.k_folds)
    camp = Campaign(config, dataset, folds, targets)

    for fold in range(n_folds):
        train_idx, test_idx = folds.train_indices(fold), folds.test_indices(fold)
        train_set, test_set = dataset.subset(train_idx), dataset.subset(test_idx)
        attacked = _attacked_indices(test_idx, config.sample_cap, config.seed, fold)
        if np.intersect1d(attacked, train_idx).size:
            raise ExperimentError(f"fold {fold}: attacked samples overlap training data")

        sparse_targets = [t for t in targets if t != f]
        choices = (lambda_search(train_set, sparse_targets, config.train,
                                 config.sparsify_threshold)
                   if sparse_targets else {})
        for target in targets:
            if target == f:
                model, found, diag = train(train_set, "none", 0.0, config.train), True, ""
            else:
                choice = choices[target]
                model, found = choice.model, choice.found
                diag = "" if found else (
                    f"target unreachable; nearest count {choice.achieved} "
                    f"at lambda={choice.lam:.6g}")
                if choice.non_monotonic:
                    diag = (diag + "; " if diag else "") + (
                        f"{len(choice.non_monotonic)} non-monotonic lambda pairs")
            acc = evaluate_accuracy(model, test_set)
            camp.models[fold, target] = FoldModel(fold, target, model, acc, found, diag)
            log.info("fold %d target %d: %d features, accuracy %.4f",
                     fold, target, model.feature_count(), acc)
            if model.feature_count() == 0:
                continue
            for norm in config.norms:
                cfg = dataclasses.replace(config.attack, norm=norm)
                camp.attacks[fold, target, norm] = attack_many(
                    model, dataset.features[attacked], dataset.labels[attacked], cfg, attacked)
    return camp


def _per_norm_stats(results: list[AttackResult], f: int, norm: str) -> dict:
    crafted = [r for r in results if r.gamma_min > 0]
    ok = [r for r in crafted if r.succeeded]
    raw = [r.gamma_min for r in ok]
    return {
        "raw_mean": float(np.mean(raw)) if raw else math.nan,
        "normalized_mean": (float(np.mean([normalized_distance(g, f, norm) for g in raw]))
                            if raw else math.nan),
        "success_rate": len(ok) / len(crafted) if crafted else math.nan,
        "n_attacked": len(crafted),
        "n_class0": sum(r.source_label == 0 for r in crafted),
        "n_class1": sum(r.source_label == 1 for r in crafted),
    }


@dataclass
class SecurityReport:
    rows: list
    norms: list
    kind: str = "security"

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "kind": self.kind,
                "norms": list(self.norms), "rows": self.rows}


@dataclass
class MMDReport:
    rows: list
    kind: str = "mmd"

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "kind": self.kind, "rows": self.rows}


def _nanmean(values):
    vals = [v for v in values if not (isinstance(v, float) and math.isnan(v))]
    return float(np.mean(vals)) if vals else math.nan


def security_report(camp: Campaign) -> SecurityReport:
    """One row per target count; fold results combined as unweighted means of fold means."""
    norms = list(camp.config.norms)
    rows = []
    n_folds = len({fold for fold, _ in camp.models})
    for target in camp.targets:
        fms = [camp.models[fold, target] for fold in range(n_folds)]
        per_norm = {}
        for norm in norms:
            stats = [_per_norm_stats(camp.attacks[fm.fold, target, norm],
                                     fm.model.feature_count(), norm)
                     for fm in fms if (fm.fold, target, norm) in camp.attacks]
            if not stats:
                per_norm[norm] = {k: math.nan for k in PER_NORM_FIELDS}
                continue
            per_norm[norm] = {
                "raw_mean": _nanmean([s["raw_mean"] for s in stats]),
                "normalized_mean": _nanmean([s["normalized_mean"] for s in stats]),
                "success_rate": _nanmean([s["success_rate"] for s in stats]),
                "n_attacked": sum(s["n_attacked"] for s in stats),
                "n_class0": sum(s["n_class0"] for s in stats),
                "n_class1": sum(s["n_class1"] for s in stats),
            }
        means = {n: v["normalized_mean"] for n, v in per_norm.items()
                 if not math.isnan(v["normalized_mean"])}
        score = security_score(means).value if len(means) == len(norms) else math.nan
        rows.append({
            "target": target,
            "feature_count": float(np.mean([fm.model.feature_count() for fm in fms])),
            "lambda": float(np.mean([fm.model.lam for fm in fms])),
            "accuracy": float(np.mean([fm.accuracy for fm in fms])),
            "per_norm": per_norm,
            "security_score": score,
            "diagnostic": "; ".join(f"fold {fm.fold}: {fm.diagnostic}"
                                    for fm in fms if fm.diagnostic),
        })
    return SecurityReport(rows, norms)


def run_security_evaluation(config: ExperimentConfig,
                            dataset: Dataset | None = None) -> SecurityReport:
    return security_report(run_campaign(config, dataset))


def run_mmd_analysis(config: ExperimentConfig, campaign: Campaign | None = None,
                     dataset: Dataset | None = None) -> MMDReport:
    """Baseline MMD(train_a, test_a) against MMD(train_a, adversarial_a) per cell.

    Samples are restricted to the model's active features. Values are averaged
    over folds. Cells without adversarial samples are skipped with a warning.
    """
    camp = campaign or run_campaign(config, dataset)
    ds = camp.dataset
    n_folds = len({fold for fold, _ in camp.models})
    rows = []
    for target in camp.targets:
        for norm in camp.config.norms:
            per_class = {0: [], 1: []}
            counts = {0: [], 1: []}
            for fold in range(n_folds):
                key = (fold, target, norm)
                if key not in camp.attacks:
                    continue
                mask = camp.models[fold, target].model.active_mask
                tr, te = camp.folds.train_indices(fold), camp.folds.test_indices(fold)
                adv = {0: [], 1: []}
                for r in camp.attacks[key]:
                    if r.succeeded and r.gamma_min > 0:
                        adv[r.source_label].append(r.adversarial[mask])
                for label in (0, 1):
                    if not adv[label]:
                        log.warning("no adversarial samples for target %d, %s, class %d, fold %d",
                                    target, norm, label, fold)
                        continue
                    tr_a = ds.features[tr][ds.labels[tr] == label][:, mask]
                    te_a = ds.features[te][ds.labels[te] == label][:, mask]
                    (row,) = mmd_analysis({label: tr_a}, {label: te_a},
                                          {label: np.array(adv[label])})
                    per_class[label].append((row.baseline, row.adversarial))
                    counts[label].append(row.n_adversarial)
            for label in (0, 1):
                if not per_class[label]:
                    continue
                base = float(np.mean([b for b, _ in per_class[label]]))
                attack = float(np.mean([a for _, a in per_class[label]]))
                rows.append({
                    "target": target,
                    "feature_count": float(np.mean(
                        [camp.models[fold, target].model.feature_count()
                         for fold in range(n_folds)])),
                    "norm": norm,
                    "class": label,
                    "baseline_mmd": base,
                    "adversarial_mmd": attack,
                    "ratio": attack / base if base > 0 else math.nan,
                    "n_adversarial": int(sum(counts[label])),
                })
    return MMDReport(rows)


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_clean(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return _clean(value.item())
    return value


def _flat_rows(report) -> tuple[list[str], list[list]]:
    if isinstance(report, SecurityReport):
        header = ["target", "feature_count", "lambda", "accuracy"]
        for norm in NORMS:
            header += [f"{norm}_{k}" for k in PER_NORM_FIELDS]
        header += ["security_score", "diagnostic"]
        out = []
        for row in report.rows:
            line = [row["target"], row["feature_count"], row["lambda"], row["accuracy"]]
            for norm in NORMS:
                stats = row["per_norm"].get(norm, {})
                line += [stats.get(k) for k in PER_NORM_FIELDS]
            line += [row["security_score"], row["diagnostic"]]
            out.append(line)
        return header, out
    header = ["target", "feature_count", "norm", "class", "baseline_mmd",
              "adversarial_mmd", "ratio", "n_adversarial"]
    return header, [[row[h] for h in header] for row in report.rows]


def check_security_rows(report: SecurityReport, tol: float = 1e-12) -> None:
    for row in report.rows:
        vals = [row["per_norm"][n]["normalized_mean"] for n in report.norms]
        if any(math.isnan(v) for v in vals):
            continue
        if abs(float(np.mean(vals)) - row["security_score"]) > tol:
            raise ExperimentError(
                f"security score mismatch for target {row['target']}")


def render_report(report, fmt: str = "json") -> str:
    if not report.rows:
        raise ValueError("refusing to emit an empty report")
    if isinstance(report, SecurityReport):
        check_security_rows(report)
    if fmt == "json":
        return json.dumps(_clean(report.to_dict()), indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        header, rows = _flat_rows(report)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for line in rows:
            writer.writerow(["" if v is None or (isinstance(v, float) and math.isnan(v))
                             else (repr(v) if isinstance(v, float) else v) for v in line])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(report, fmt: str, path) -> Path:
    path = Path(path)
    text = render_report(report, fmt)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ExperimentError(f"cannot write report to {path}: {exc}") from exc
    return path


def load_report(path):
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")

    def restore(v):
        if v is None:
            return math.nan
        if isinstance(v, dict):
            return {k: restore(x) for k, x in v.items()}
        return v

    if doc["kind"] == "security":
        rows = [restore(r) for r in doc["rows"]]
        for r in rows:
            r["diagnostic"] = r["diagnostic"] if isinstance(r["diagnostic"], str) else ""
        return SecurityReport(rows, doc["norms"])
    if doc["kind"] == "mmd":
        return MMDReport([restore(r) for r in doc["rows"]])
    raise ValueError(f"unknown report kind {doc['kind']!r}")
