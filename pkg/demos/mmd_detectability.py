"""How far adversarial samples drift from the training distribution.

Compares MMD(train, test) with MMD(train, adversarial) per class under the
normalised linear kernel.

Run: python3 demos/mmd_detectability.py
"""
from sparsesec.dataset import gen_sparse_synthetic
from sparsesec.pipeline import ExperimentConfig, run_mmd_analysis

ds = gen_sparse_synthetic(300, n_features=100, n_informative=10, seed=2)
cfg = ExperimentConfig(target_feature_counts=[10], norms=["l2", "linf"], k_folds=5,
                       max_folds=1, sample_cap=60)
for row in run_mmd_analysis(cfg, dataset=ds).rows:
    print(f"{row['feature_count']:5.0f} features {row['norm']:4s} class {row['class']}: "
          f"baseline {row['baseline_mmd']:.2e}  adversarial {row['adversarial_mmd']:.2e}  "
          f"ratio {row['ratio']:.1f}")
