"""Sevens against nines on the small MNIST sample that ships with mlxtend.

The images go through IDX files and the same loader used for the full
dataset. Needs ``pip install mlxtend``; takes under a minute.

Run: python3 demos/mnist_sevens_nines.py [workdir]
"""
import sys
import tempfile
from pathlib import Path

import numpy as np
from mlxtend.data import mnist_data

from sparsesec.dataset import mnist_binary, write_idx
from sparsesec.pipeline import ExperimentConfig, run_campaign, security_report

work = Path(sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp())
X, y = mnist_data()
write_idx(X.reshape(-1, 28, 28).astype(np.uint8), work / "images.idx")
write_idx(y.astype(np.uint8), work / "labels.idx")
ds = mnist_binary(work / "images.idx", work / "labels.idx")
print(f"{ds.n_samples} images, {int(ds.labels.sum())} sevens")

cfg = ExperimentConfig(target_feature_counts=[50, 10], k_folds=10, max_folds=1, sample_cap=50)
for row in security_report(run_campaign(cfg, ds)).rows:
    print(f"{row['feature_count']:4.0f} features: accuracy {row['accuracy']:.3f}, "
          f"security score {row['security_score']:.4f}")
