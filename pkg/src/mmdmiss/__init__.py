"""Robust kernel-distance estimation of parametric models from data with
missing values, plus the simulation harness around it."""

from ._backend import BACKEND
from .baselines import (
    average_of_extremes,
    coordinate_median,
    ignoring_mle_gaussian,
    truncated_mle_limit,
)
from .data import (
    Dataset,
    Observation,
    Pattern,
    group_by_pattern,
    load_csv,
    project,
    project_to_pattern,
    save_csv,
)
from .estimator import FitResult, SgdConfig, fit, mc_criterion, mc_gradient
from .kernels import (
    KernelSpec,
    eval_kernel,
    gaussian_criterion_oracle,
    gaussian_mmd2_closed_form,
    median_heuristic_bandwidth,
    mmd2_empirical,
    mmd2_point_criterion,
)
from .mechanisms import (
    AdversarialMechanism,
    DataContamination,
    HuberMixtureMechanism,
    McarMechanism,
    SelfCensoringMechanism,
    TruncationMechanism,
    apply_mechanism,
    blockwise_mcar,
    deviation_to_mcar,
    draw_complete,
    mixture_cdf,
    self_censoring_blockwise,
)
from .models import (
    GaussianMeanModel,
    ModelInterface,
    gaussian_grad_log_density,
    gaussian_sample,
    project_box,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AdversarialMechanism",
    "DataContamination",
    "Dataset",
    "FitResult",
    "GaussianMeanModel",
    "HuberMixtureMechanism",
    "KernelSpec",
    "McarMechanism",
    "ModelInterface",
    "Observation",
    "Pattern",
    "SelfCensoringMechanism",
    "SgdConfig",
    "TruncationMechanism",
    "apply_mechanism",
    "average_of_extremes",
    "blockwise_mcar",
    "coordinate_median",
    "deviation_to_mcar",
    "draw_complete",
    "eval_kernel",
    "fit",
    "gaussian_criterion_oracle",
    "gaussian_grad_log_density",
    "gaussian_mmd2_closed_form",
    "gaussian_sample",
    "group_by_pattern",
    "ignoring_mle_gaussian",
    "load_csv",
    "mc_criterion",
    "mc_gradient",
    "median_heuristic_bandwidth",
    "mixture_cdf",
    "mmd2_empirical",
    "mmd2_point_criterion",
    "project",
    "project_box",
    "project_to_pattern",
    "save_csv",
    "self_censoring_blockwise",
    "truncated_mle_limit",
]
