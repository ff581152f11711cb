import json
import math

import numpy as np
import pytest

from sparsesec.attack import AttackConfig
from sparsesec.dataset import gen_sparse_synthetic, save_csv
from sparsesec.metrics import mmd_analysis
from sparsesec.model import TrainConfig
from sparsesec.pipeline import (ExperimentConfig, ExperimentError, SecurityReport, emit_report,
                                load_report, render_report, run_campaign, run_mmd_analysis,
                                security_report)


@pytest.fixture(scope="module")
def data():
    return gen_sparse_synthetic(60, n_features=20, n_informative=4, seed=5)


def small_config(**kw):
    base = dict(target_feature_counts=[8, 3], k_folds=4, max_folds=2, sample_cap=12,
                train=TrainConfig(epochs=300), seed=1)
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def campaign(data):
    return run_campaign(small_config(), data)


def test_campaign_shape(campaign):
    assert campaign.targets == [20, 8, 3]
    assert len(campaign.models) == 2 * 3
    assert campaign.models[0, 20].model.reg_kind == "none"
    assert campaign.models[0, 20].model.feature_count() == 20
    for norm in ("l1", "l2", "linf"):
        assert len(campaign.attacks[1, 3, norm]) == 12


def test_attacked_samples_come_from_test_fold(campaign):
    for (fold, _, _), results in campaign.attacks.items():
        test = set(campaign.folds.test_indices(fold).tolist())
        train = set(campaign.folds.train_indices(fold).tolist())
        idx = {r.index for r in results}
        assert idx <= test and not idx & train


def test_security_report_rows(campaign):
    rep = security_report(campaign)
    assert [r["target"] for r in rep.rows] == [20, 8, 3]
    for row in rep.rows:
        means = [row["per_norm"][n]["normalized_mean"] for n in rep.norms]
        assert row["security_score"] == pytest.approx(np.mean(means), abs=1e-12)
        assert 0 <= row["accuracy"] <= 1
        assert row["per_norm"]["l2"]["n_class0"] + row["per_norm"]["l2"]["n_class1"] \
            == row["per_norm"]["l2"]["n_attacked"]
    full = rep.rows[0]
    assert full["lambda"] == 0.0 and full["feature_count"] == 20


def test_single_norm_score_is_that_norm(data):
    rep = security_report(run_campaign(small_config(norms=["l2"], max_folds=1), data))
    for row in rep.rows:
        assert row["security_score"] == row["per_norm"]["l2"]["normalized_mean"]


def test_deterministic_json(data, tmp_path):
    cfg = small_config(max_folds=1, sample_cap=6)
    a = render_report(security_report(run_campaign(cfg, data)), "json")
    b = render_report(security_report(run_campaign(cfg, data)), "json")
    assert a == b


def test_json_round_trip(campaign, tmp_path):
    rep = security_report(campaign)
    p = emit_report(rep, "json", tmp_path / "sec.json")
    doc = json.loads(p.read_text())
    assert doc["schema_version"] == 1 and doc["kind"] == "security"
    back = load_report(p)
    assert isinstance(back, SecurityReport)
    assert render_report(back, "json") == p.read_text()


def test_csv_fixed_columns(campaign, data):
    rep = security_report(campaign)
    lines = render_report(rep, "csv").splitlines()
    widths = {len(line.split(",")) for line in lines}
    assert len(widths) == 1 and len(lines) == 1 + len(rep.rows)
    only_l2 = security_report(run_campaign(small_config(norms=["l2"], max_folds=1), data))
    assert render_report(only_l2, "csv").splitlines()[0] == lines[0]


def test_empty_and_unwritable(campaign, tmp_path):
    with pytest.raises(ValueError):
        render_report(SecurityReport([], ["l2"]), "json")
    with pytest.raises(ValueError):
        render_report(security_report(campaign), "xml")
    with pytest.raises(ExperimentError):
        emit_report(security_report(campaign), "json", tmp_path / "missing" / "x.json")


def test_mmd_report(campaign, tmp_path):
    rep = run_mmd_analysis(campaign.config, campaign)
    assert rep.rows
    for row in rep.rows:
        assert row["baseline_mmd"] >= 0 and row["adversarial_mmd"] >= 0
        assert row["class"] in (0, 1) and row["n_adversarial"] > 0
        if row["baseline_mmd"] > 0:
            assert row["ratio"] == pytest.approx(row["adversarial_mmd"] / row["baseline_mmd"])
    back = load_report(emit_report(rep, "json", tmp_path / "mmd.json"))
    assert back.rows[0].keys() == rep.rows[0].keys()


def test_mmd_degenerate_attack_ratio_one(data):
    # "adversarial" samples identical to the clean test samples
    te = {0: data.by_class(0)[:30], 1: data.by_class(1)[:30]}
    tr = {0: data.by_class(0)[30:], 1: data.by_class(1)[30:]}
    for row in mmd_analysis(tr, te, te):
        assert row.ratio == pytest.approx(1.0)


def test_config_from_dict_and_unknown_keys(tmp_path, data):
    p = tmp_path / "d.csv"
    save_csv(data, p)
    doc = {"dataset_path": str(p), "target_feature_counts": [5], "k_folds": 3,
           "max_folds": 1, "sample_cap": 4, "attack": {"max_iterations": 200},
           "train": {"epochs": 100}}
    cfg = ExperimentConfig.from_dict(doc)
    assert isinstance(cfg.attack, AttackConfig) and cfg.attack.max_iterations == 200
    assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    rep = security_report(run_campaign(cfg))
    assert [r["target"] for r in rep.rows] == [20, 5]
    with pytest.raises(ValueError, match="unknown"):
        ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        ExperimentConfig(norms=["l7"])
    with pytest.raises(ValueError):
        ExperimentConfig(k_folds=1)


def test_bad_target_rejected(data):
    with pytest.raises(ValueError):
        run_campaign(small_config(target_feature_counts=[50]), data)


def test_nan_cells_serialize_as_null(campaign):
    rep = security_report(campaign)
    rep.rows[0]["per_norm"]["l1"]["raw_mean"] = math.nan
    doc = json.loads(render_report(rep, "json"))
    assert doc["rows"][0]["per_norm"]["l1"]["raw_mean"] is None
