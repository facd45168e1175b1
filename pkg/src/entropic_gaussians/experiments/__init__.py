"""Figure and table reproduction harness."""
from .config import (
    BenchmarkRow,
    ContourRow,
    CostCurveRow,
    ExperimentConfig,
    MdsRow,
    format_rows,
    write_rows,
)
from .metrics import ci_halfwidth, classical_mds, kl_gaussian, sigma_grid
from .runners import (
    run,
    run_barycenter_benchmark,
    run_cost_curve,
    run_coupling_contour,
    run_cov_benchmark,
    run_mds_embed,
)

__all__ = [
    "BenchmarkRow",
    "ContourRow",
    "CostCurveRow",
    "ExperimentConfig",
    "MdsRow",
    "ci_halfwidth",
    "classical_mds",
    "format_rows",
    "kl_gaussian",
    "run",
    "run_barycenter_benchmark",
    "run_cost_curve",
    "run_coupling_contour",
    "run_cov_benchmark",
    "run_mds_embed",
    "sigma_grid",
    "write_rows",
]
