"""Walk the L1 regularisation path to hit chosen feature counts.

Run: python3 demos/lasso_path.py
"""
from sparsesec.dataset import gen_sparse_synthetic, kfold_split
from sparsesec.model import TrainConfig, evaluate_accuracy, lambda_search, train

ds = gen_sparse_synthetic(300, n_features=100, n_informative=10, seed=1)
folds = kfold_split(ds.n_samples, 5, seed=0)
tr, te = ds.subset(folds.train_indices(0)), ds.subset(folds.test_indices(0))
cfg = TrainConfig(epochs=1000)

full = train(tr, "none", 0.0, cfg)
print(f"unregularised: {full.feature_count()} features, test accuracy {evaluate_accuracy(full, te):.3f}")

for target, choice in lambda_search(tr, [50, 20, 10, 5], cfg, threshold=0.01).items():
    informative = int(choice.model.active_mask[:10].sum())
    print(f"target {target:3d}: lambda {choice.lam:.2e}, kept {choice.achieved:3d} "
          f"({informative} of 10 informative), accuracy {evaluate_accuracy(choice.model, te):.3f}, "
          f"new fits {len(choice.trace)}")
