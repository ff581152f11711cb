"""Robustness of L1-sparse logistic regression against minimal Lp evasion attacks."""

from .attack import (AttackConfig, AttackResult, analytic_min_distance, attack_many,
                     fixed_budget_attack, minimal_attack)
from .dataset import (Dataset, FoldAssignment, gen_sparse_synthetic, gen_synthetic,
                      kfold_split, load_csv, mnist_binary, normalize_minmax, save_csv)
from .metrics import (mmd_analysis, mmd_estimate, mmd_kernel, normalized_distance,
                      security_score)
from .model import (LinearModel, TrainConfig, evaluate_accuracy, input_gradient,
                    lambda_search, sparsify, train)
from .pipeline import (ExperimentConfig, emit_report, run_campaign, run_mmd_analysis,
                       run_security_evaluation, security_report)
from .projection import project, project_l1, project_l2, project_linf

__version__ = "0.1.0"
