"""Accuracy against security as the model keeps fewer features.

Trains on one fold of a synthetic set, runs minimal L1/L2/Linf attacks on
held-out samples and prints the normalised distances and security score.
Takes about 15 seconds.

Run: python3 demos/security_tradeoff.py
"""
from sparsesec.dataset import gen_sparse_synthetic
from sparsesec.pipeline import ExperimentConfig, render_report, run_campaign, security_report

ds = gen_sparse_synthetic(300, n_features=200, n_informative=20, seed=0)
cfg = ExperimentConfig(target_feature_counts=[50, 20, 10], k_folds=5, max_folds=1, sample_cap=40)
rep = security_report(run_campaign(cfg, ds))

print(f"{'features':>8} {'acc':>6} {'l1':>8} {'l2':>8} {'linf':>8} {'score':>8}")
for row in rep.rows:
    d = {n: row["per_norm"][n]["normalized_mean"] for n in rep.norms}
    print(f"{row['feature_count']:8.0f} {row['accuracy']:6.3f} {d['l1']:8.4f} {d['l2']:8.4f} "
          f"{d['linf']:8.4f} {row['security_score']:8.4f}")

print("\nCSV form:\n" + render_report(rep, "csv"))
