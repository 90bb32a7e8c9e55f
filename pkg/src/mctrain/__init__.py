"""Multi-criteria training toolkit.

Treats the training objective as a vector of per-sample losses, trains
dense networks on several datasets at once through weighted-sum
scalarization with perturbed weights, and verifies the efficiency and
stability claims behind that setup with brute-force numerical checks.
"""

from .bounds import (
    BoundReport,
    ConvergenceReport,
    SyntheticProblem,
    holder_constant,
    isolated_minimizer_constant,
    make_grid,
    quadratic_problem,
    verify_convergence,
    verify_estimation_bound,
)
from .datasets import (
    LabeledDataset,
    RawDataset,
    SplitSpec,
    add_gaussian_noise,
    center_crop,
    load_idx,
    normalize,
    split,
    write_idx,
)
from .estimator import GaussianNoise, ScalarizedNetClassifier
from .losses import (
    BINARY_CROSS_ENTROPY,
    LOGISTIC,
    SQUARED_ERROR,
    DfeVector,
    Metric,
    ScalarizationWeights,
    dfe_vector,
    epsilon_weights,
    per_sample_loss,
    scalarize,
)
from .network import (
    DenseLayer,
    Network,
    TrainConfig,
    TrainHistory,
    TrainingError,
    accuracy,
    forward,
    init_network,
    load_network,
    loss_and_grad,
    save_network,
    sgd_train,
)
from .pareto import (
    DilatedCone,
    ObjectivePointSet,
    dominates,
    efficient_set,
    excess,
    properly_efficient_set,
    scalarization_argmin,
    weakly_efficient_set,
)
from .stability import (
    StabilityReport,
    estimate_lipschitz,
    label_stability_bound,
    verify_input_stability,
    verify_label_stability,
)

__version__ = "0.1.0"

__all__ = [
    "BINARY_CROSS_ENTROPY",
    "BoundReport",
    "ConvergenceReport",
    "DenseLayer",
    "DfeVector",
    "DilatedCone",
    "GaussianNoise",
    "LOGISTIC",
    "LabeledDataset",
    "Metric",
    "Network",
    "ObjectivePointSet",
    "RawDataset",
    "SQUARED_ERROR",
    "ScalarizationWeights",
    "ScalarizedNetClassifier",
    "SplitSpec",
    "StabilityReport",
    "SyntheticProblem",
    "TrainConfig",
    "TrainHistory",
    "TrainingError",
    "accuracy",
    "add_gaussian_noise",
    "center_crop",
    "dfe_vector",
    "dominates",
    "efficient_set",
    "epsilon_weights",
    "estimate_lipschitz",
    "excess",
    "forward",
    "holder_constant",
    "init_network",
    "isolated_minimizer_constant",
    "label_stability_bound",
    "load_idx",
    "load_network",
    "loss_and_grad",
    "make_grid",
    "normalize",
    "per_sample_loss",
    "properly_efficient_set",
    "quadratic_problem",
    "save_network",
    "scalarization_argmin",
    "scalarize",
    "sgd_train",
    "split",
    "verify_convergence",
    "verify_estimation_bound",
    "verify_input_stability",
    "verify_label_stability",
    "weakly_efficient_set",
    "write_idx",
]
