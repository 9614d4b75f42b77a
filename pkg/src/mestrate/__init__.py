"""mestrate: Monte Carlo rate studies and Wasserstein bounds for M-estimators.

Implements box-constrained M-estimation (logistic maximum likelihood and
Gaussian-process leave-one-out cross validation), the standardized
statistic C^{-1/2} H sqrt(n) (theta_hat - theta0), empirical L1
Wasserstein distance estimators against the standard Gaussian, explicit
quadratic-form and fourth-moment bounds, and an experiment harness that
verifies the ~ 1/sqrt(n) decay of the distance to normality.
"""

__version__ = "0.1.0"

from . import errors
from .gpcv import (
    CorrMatrices,
    GradMatrices,
    KernelFamily,
    PointSet,
    build_corr,
    build_points,
    cv_gradient,
    cv_hessian,
    cv_objective,
    cv_objective_direct,
    cv_sandwich_at_truth,
    cv_value_and_grad,
    grad_matrices,
    kernel_eval,
    quadform_w1_bound,
    sample_field,
)
from .harness import (
    ExperimentConfig,
    RateReport,
    fit_loglog_slope,
    run_bound_eval,
    run_rate_study,
    verify_conditions,
)
from .linalg import Spectrum, diag_part, sym_eig, sym_inv_sqrt, sym_sqrt
from .logistic import (
    LogisticData,
    LogisticDesign,
    make_uniform_design,
    sample_outcomes,
    success_prob,
    sandwich_at_truth,
)
from .logistic import objective as logistic_objective
from .mestim import (
    EstimRun,
    MinimizeConfig,
    ObjectiveEval,
    ParamBox,
    SandwichPair,
    bonis_bound,
    minimize,
    normalize_statistic,
    sandwich_covariance,
)
from .wasserstein import (
    EmpiricalSample,
    W1Estimate,
    debias,
    w1_1d_vs_gaussian,
    w1_exact_pair,
    w1_sliced_vs_gaussian,
)

__all__ = [
    "__version__",
    "errors",
    # linalg
    "Spectrum", "sym_eig", "sym_sqrt", "sym_inv_sqrt", "diag_part",
    # mestim
    "ParamBox", "ObjectiveEval", "SandwichPair", "EstimRun", "MinimizeConfig",
    "minimize", "normalize_statistic", "sandwich_covariance", "bonis_bound",
    # logistic
    "LogisticDesign", "LogisticData", "make_uniform_design", "success_prob",
    "sample_outcomes", "logistic_objective", "sandwich_at_truth",
    # gp-cv
    "PointSet", "KernelFamily", "CorrMatrices", "GradMatrices",
    "build_points", "kernel_eval", "build_corr", "sample_field",
    "cv_objective", "cv_objective_direct", "cv_gradient", "cv_value_and_grad",
    "cv_hessian", "cv_sandwich_at_truth", "grad_matrices", "quadform_w1_bound",
    # wasserstein
    "EmpiricalSample", "W1Estimate", "w1_1d_vs_gaussian", "w1_exact_pair",
    "w1_sliced_vs_gaussian", "debias",
    # harness
    "ExperimentConfig", "RateReport", "run_rate_study", "run_bound_eval",
    "verify_conditions", "fit_loglog_slope",
]
