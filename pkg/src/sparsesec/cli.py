"""Command-line entry point: ``sparsesec <subcommand> ...``.

Exit codes: 0 success, 1 configuration or data error, 2 experiment failure.
Log verbosity comes from the SPARSESEC_LOG_LEVEL environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .attack import AttackConfig, AttackError, attack_many, write_jsonl
from .dataset import (DataError, gen_sparse_synthetic, gen_synthetic, load_csv,
                      mnist_binary, normalize_minmax, save_csv)
from .model import LinearModel, TrainConfig, TrainingError, lambda_search, sparsify, train
from .pipeline import (ExperimentConfig, ExperimentError, emit_report, load_report,
                       render_report, run_campaign, run_mmd_analysis, security_report)

log = logging.getLogger("sparsesec")


def _csv_list(text, cast=str):
    return [cast(t.strip()) for t in text.split(",") if t.strip()]


def _train_args(p):
    p.add_argument("--lr", type=float, dest="learning_rate")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)


def _train_config(args, base: TrainConfig | None = None) -> TrainConfig:
    doc = vars(base) if base else {}
    doc = dict(doc)
    for key in ("learning_rate", "epochs", "seed"):
        if getattr(args, key, None) is not None:
            doc[key] = getattr(args, key)
    return TrainConfig(**doc)


def _experiment_args(p):
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--data", dest="dataset_path")
    p.add_argument("--targets", type=lambda s: _csv_list(s, int),
                   dest="target_feature_counts")
    p.add_argument("--norms", type=_csv_list)
    p.add_argument("--k-folds", type=int, dest="k_folds")
    p.add_argument("--max-folds", type=int, dest="max_folds")
    p.add_argument("--threshold", type=float, dest="sparsify_threshold")
    p.add_argument("--sample-cap", type=int, dest="sample_cap")
    p.add_argument("--seed", type=int)
    p.add_argument("--normalize", action="store_true", default=None)
    p.add_argument("--no-box-clamp", action="store_true")
    p.add_argument("--lr", type=float, dest="learning_rate")
    p.add_argument("--epochs", type=int)


def build_config(args) -> ExperimentConfig:
    doc = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    for key in ("dataset_path", "target_feature_counts", "norms", "k_folds", "max_folds",
                "sparsify_threshold", "sample_cap", "seed", "normalize"):
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    train_doc = dict(doc.get("train", {}))
    for key in ("learning_rate", "epochs"):
        if getattr(args, key, None) is not None:
            train_doc[key] = getattr(args, key)
    doc["train"] = train_doc
    if args.no_box_clamp:
        doc["attack"] = {**doc.get("attack", {}), "box_clamp": False}
    return ExperimentConfig.from_dict(doc)


def cmd_synth(args):
    if args.kind == "gauss2d":
        ds = gen_synthetic(args.n_per_class or 10, args.seed)
    else:
        ds = gen_sparse_synthetic(args.n_per_class or 500, args.n_features,
                                  args.n_informative, args.seed)
    save_csv(ds, args.out)
    log.info("wrote %d samples x %d features to %s", ds.n_samples, ds.n_features, args.out)


def cmd_convert_mnist(args):
    ds = mnist_binary(args.images, args.labels, args.positive, args.negative)
    save_csv(ds, args.out)
    log.info("wrote %d samples (%d class 1) to %s", ds.n_samples, int(ds.labels.sum()), args.out)


def cmd_train(args):
    ds = load_csv(args.data)
    if args.normalize:
        ds = normalize_minmax(ds)
    cfg = _train_config(args)
    if args.target_features is not None:
        choice = lambda_search(ds, [args.target_features], cfg, args.threshold)[args.target_features]
        if not choice.found:
            raise ExperimentError(
                f"no lambda reaches {args.target_features} features "
                f"(nearest {choice.achieved} at lambda={choice.lam:.6g})")
        model = choice.model
    else:
        model = train(ds, args.reg, args.lam, cfg)
        if args.threshold > 0:
            model = sparsify(model, args.threshold)
    model.save(args.out)
    log.info("model with %d active features written to %s", model.feature_count(), args.out)


def cmd_attack(args):
    ds = load_csv(args.data)
    if args.normalize:
        ds = normalize_minmax(ds)
    model = LinearModel.load(args.model)
    idx = np.arange(ds.n_samples)
    if args.cap is not None and args.cap < ds.n_samples:
        idx = np.sort(np.random.default_rng(args.seed).choice(idx, args.cap, replace=False))
    cfg = AttackConfig(norm=args.norm, box_clamp=not args.no_box_clamp,
                       max_iterations=args.max_iterations)
    results = attack_many(model, ds.features[idx], ds.labels[idx], cfg, idx)
    write_jsonl(results, args.out, model.feature_count())
    ok = sum(r.succeeded for r in results)
    log.info("%d/%d attacks succeeded; results in %s", ok, len(results), args.out)


def cmd_evaluate(args):
    config = build_config(args)
    camp = run_campaign(config)
    emit_report(security_report(camp), args.format, args.out)
    if args.mmd_out:
        emit_report(run_mmd_analysis(config, camp), args.format, args.mmd_out)


def cmd_mmd(args):
    config = build_config(args)
    emit_report(run_mmd_analysis(config), args.format, args.out)


def cmd_report(args):
    report = load_report(args.input)
    if args.out:
        emit_report(report, args.format, args.out)
    else:
        sys.stdout.write(render_report(report, args.format))


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsesec",
        description="Security evaluation of sparse linear classifiers against minimal evasion attacks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    p.add_argument("--kind", choices=["gauss2d", "sparse"], default="sparse")
    p.add_argument("--n-per-class", type=int)
    p.add_argument("--n-features", type=int, default=200)
    p.add_argument("--n-informative", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("convert-mnist", help="extract a two-digit MNIST subset from IDX files")
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--positive", type=int, default=7)
    p.add_argument("--negative", type=int, default=9)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert_mnist)

    p = sub.add_parser("train", help="train (and sparsify) one logistic-regression model")
    p.add_argument("--data", required=True)
    p.add_argument("--reg", choices=["none", "l1", "l2"], default="l1")
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--target-features", type=int)
    p.add_argument("--threshold", type=float, default=0.01)
    p.add_argument("--normalize", action="store_true")
    _train_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("attack", help="minimal attacks on a saved model, written as JSON lines")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--norm", choices=["l1", "l2", "linf"], default="l2")
    p.add_argument("--cap", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iterations", type=int, default=1000)
    p.add_argument("--no-box-clamp", action="store_true")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attack)

    for name, func, helptext in [
            ("evaluate", cmd_evaluate, "cross-validated accuracy/security report"),
            ("mmd", cmd_mmd, "MMD detectability report")]:
        p = sub.add_parser(name, help=helptext)
        _experiment_args(p)
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--out", required=True)
        if name == "evaluate":
            p.add_argument("--mmd-out", help="also write the MMD report here")
        p.set_defaults(func=func)

    p = sub.add_parser("report", help="re-render a JSON report as JSON or CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SPARSESEC_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = make_parser().parse_args(argv)
    try:
        args.func(args)
    except (TrainingError, AttackError, ExperimentError) as exc:
        log.error("%s", exc)
        return 2
    except (DataError, ValueError, TypeError, KeyError, OSError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
