"""Closed-form entropic optimal transport between Gaussian and q-normal laws."""
from ._kernels import BACKEND
from .barycenter import BarycenterProblem, BarycenterResult, barycenter, euclidean_grad_cost, retract, riemannian_grad
from .errors import (
    AmbiguityError,
    ConfigError,
    ConvergenceError,
    CouplingError,
    CoverageError,
    DimensionError,
    EmbeddingError,
    EntropicOTError,
    NotSPDError,
    ParameterError,
    StepSizeError,
)
from .gaussian import (
    CostBreakdown,
    Gaussian,
    GaussianCoupling,
    coupling_eigenvalues,
    entropic_cost,
    extremal_alignment,
    optimal_coupling,
    sigma_lambda,
    transport_term,
    wasserstein2_sq,
)
from .kantorovich import DensityFn, kantorovich_estimator_density, kantorovich_estimator_gaussian
from .qnormal import QNormal, QNormalCoupling, q_exp, q_log, qnormal_coupling, qnormal_density, solve_lambda_tilde
from .spd import SpdMatrix, SymMatrix, matrix_exp, sqrt_eigen, sqrt_newton_schulz

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError",
    "BACKEND",
    "BarycenterProblem",
    "BarycenterResult",
    "ConfigError",
    "ConvergenceError",
    "CostBreakdown",
    "CouplingError",
    "CoverageError",
    "DensityFn",
    "DimensionError",
    "EmbeddingError",
    "EntropicOTError",
    "Gaussian",
    "GaussianCoupling",
    "NotSPDError",
    "ParameterError",
    "QNormal",
    "QNormalCoupling",
    "SpdMatrix",
    "StepSizeError",
    "SymMatrix",
    "barycenter",
    "coupling_eigenvalues",
    "entropic_cost",
    "euclidean_grad_cost",
    "extremal_alignment",
    "kantorovich_estimator_density",
    "kantorovich_estimator_gaussian",
    "matrix_exp",
    "optimal_coupling",
    "q_exp",
    "q_log",
    "qnormal_coupling",
    "qnormal_density",
    "retract",
    "riemannian_grad",
    "sigma_lambda",
    "solve_lambda_tilde",
    "sqrt_eigen",
    "sqrt_newton_schulz",
    "transport_term",
    "wasserstein2_sq",
]
