"""Figure and table runners.

Every runner takes an :class:`ExperimentConfig` and returns a list of rows;
serialization lives in :mod:`.config`. Monte Carlo runners draw replication
``r`` from ``Philox(key=seed ^ r)``, with the counter's upper words set to
``(r, dim, sample_size)`` so that each cell owns a disjoint stream. The
``r`` word matters: the keys alone repeat across seeds (``11 ^ 1 == 10 ^ 0``). The
estimator and barycenter benchmarks therefore see identical first draws,
which is what makes their ``m = 1`` rows agree.
"""
import numpy as np

from ..barycenter import BarycenterProblem, barycenter
from ..errors import ConfigError
from ..gaussian import Gaussian, entropic_cost, optimal_coupling, wasserstein2_sq
from ..kantorovich import kantorovich_estimator_gaussian
from ..oracle import gaussian_1d, verify_pair
from .config import BenchmarkRow, ContourRow, CostCurveRow, MdsRow, OracleRow
from .metrics import ci_halfwidth, classical_mds, kl_gaussian, sigma_grid

COST_CURVE_PAIR = (np.eye(2), np.array([[2.0, -1.0], [-1.0, 2.0]]))
CONTOUR_PAIR = ((0.0, 1.0), (5.0, 2.0))
CONTOUR_HALF_WIDTH = 6.0
ORACLE_PAIRS = ((1.0, 1.0), (1.0, 2.0), (1.0, 4.0))
ORACLE_LAMBDAS = (0.25, 0.5, 1.0)
ORACLE_RTOL = 0.05


def replication_rng(seed, rep, dim=0, sample_size=0):
    """Generator for replication ``rep`` of cell ``(dim, sample_size)``."""
    key = (int(seed) ^ int(rep)) & (2**64 - 1)
    bitgen = np.random.Philox(key=key, counter=[0, int(rep), int(dim), int(sample_size)])
    return np.random.Generator(bitgen)


def sigma_true(config, dim):
    if config.sigma_true == "identity":
        return np.eye(dim)
    rng = np.random.default_rng([config.seed, dim])
    a = rng.standard_normal((dim, 2 * dim))
    return a @ a.T / (2 * dim)


def sample_mle(rng, chol, n):
    """Sample mean and MLE covariance (divisor ``n``) of ``n`` draws."""
    x = rng.standard_normal((n, chol.shape[0])) @ chol.T
    mu = x.mean(axis=0)
    xc = x - mu
    return mu, xc.T @ xc / n


def _check_cells(config):
    for dim in config.dims:
        for n in config.sample_sizes:
            if n <= dim:
                raise ConfigError(f"sample size {n} <= dim {dim}: sample covariance is singular")


def run_cost_curve(config):
    s1, s2 = COST_CURVE_PAIR
    p, q = Gaussian(np.zeros(2), s1), Gaussian(np.zeros(2), s2)
    rows = []
    for lam in config.lambdas:
        if lam == 0:
            w2 = wasserstein2_sq(p, q)
            rows.append(CostCurveRow(lam=float(lam), total=w2, transport_term=w2, relative_total=w2))
        else:
            c = entropic_cost(p, q, lam)
            rows.append(CostCurveRow(float(lam), c.total, c.transport_term, c.entropy_term, c.relative_total))
    return rows


def contour_axes(points):
    (m1, v1), (m2, v2) = CONTOUR_PAIR
    hx, hy = CONTOUR_HALF_WIDTH * np.sqrt(v1), CONTOUR_HALF_WIDTH * np.sqrt(v2)
    return np.linspace(m1 - hx, m1 + hx, points), np.linspace(m2 - hy, m2 + hy, points)


def run_coupling_contour(config):
    (m1, v1), (m2, v2) = CONTOUR_PAIR
    p, q = Gaussian([m1], [[v1]]), Gaussian([m2], [[v2]])
    xs, ys = contour_axes(config.grid_points)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    rows = []
    for lam in config.lambdas:
        coupling = optimal_coupling(p, q, lam)
        cross = float(coupling.block_12[0, 0])
        dens = coupling.pdf(pts)
        for (x, y), d in zip(pts, dens):
            rows.append(ContourRow(float(lam), m1, m2, v1, v2, cross, float(x), float(y), float(d)))
    return rows


def mds_dissimilarities(lam):
    """``sqrt(C~_lam)`` between the 100 grid normals (``W_2`` at ``lam = 0``), zero diagonal."""
    labels = [(r, k) for r in range(1, 11) for k in range(1, 11)]
    dists = [Gaussian(np.zeros(2), sigma_grid(r, k)) for r, k in labels]
    n = len(dists)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if lam == 0:
                val = wasserstein2_sq(dists[i], dists[j])
            else:
                val = entropic_cost(dists[i], dists[j], lam).relative_total
            d[i, j] = d[j, i] = np.sqrt(max(val, 0.0))
    return labels, d


def run_mds_embed(config):
    rows = []
    for lam in config.lambdas:
        labels, d = mds_dissimilarities(lam)
        coords = classical_mds(d, 2)
        for (r, k), (x, y) in zip(labels, coords):
            rows.append(MdsRow(float(lam), r, k, float(x), float(y)))
    return rows


def _summarize(dim, n, lam, errors):
    errs = np.asarray(errors)
    return BenchmarkRow(dim, n, float(lam), float(errs.mean()), ci_halfwidth(errs), int(errs.size))


def run_cov_benchmark(config):
    """KL error of the MLE (``lam = 0``) and of the regularized estimator."""
    _check_cells(config)
    rows = []
    for dim in config.dims:
        cov = sigma_true(config, dim)
        chol = np.linalg.cholesky(cov)
        truth = Gaussian(np.zeros(dim), cov)
        for n in config.sample_sizes:
            errs = np.empty((config.replications, len(config.lambdas)))
            for rep in range(config.replications):
                mu, s = sample_mle(replication_rng(config.seed, rep, dim, n), chol, n)
                mle = Gaussian(mu, s)
                for j, lam in enumerate(config.lambdas):
                    est = mle if lam == 0 else kantorovich_estimator_gaussian(mle, lam)
                    errs[rep, j] = kl_gaussian(truth, est)
            rows.extend(_summarize(dim, n, lam, errs[:, j]) for j, lam in enumerate(config.lambdas))
    return rows


def run_barycenter_benchmark(config):
    """KL error of the barycenter of ``m`` independent sample fits."""
    _check_cells(config)
    rows = []
    for dim in config.dims:
        cov = sigma_true(config, dim)
        chol = np.linalg.cholesky(cov)
        truth = Gaussian(np.zeros(dim), cov)
        for n in config.sample_sizes:
            errs = np.empty((config.replications, len(config.lambdas)))
            for rep in range(config.replications):
                rng = replication_rng(config.seed, rep, dim, n)
                fits = [Gaussian(*sample_mle(rng, chol, n)) for _ in range(config.m)]
                for j, lam in enumerate(config.lambdas):
                    res = barycenter(BarycenterProblem(fits, lam=lam))
                    errs[rep, j] = kl_gaussian(truth, res.barycenter)
            rows.extend(_summarize(dim, n, lam, errs[:, j]) for j, lam in enumerate(config.lambdas))
    return rows


def run_verify_oracle(lambdas=ORACLE_LAMBDAS, pairs=ORACLE_PAIRS, points=256, rtol=ORACLE_RTOL):
    """Grid-Sinkhorn check of the 1D closed forms; ``passed`` means both errors are within ``rtol``."""
    rows = []
    for v1, v2 in pairs:
        for lam in lambdas:
            rep = verify_pair(gaussian_1d(0.0, v1), gaussian_1d(0.0, v2), lam, points=points)
            ok = rep.cross_rel_error <= rtol and rep.objective_rel_error <= rtol
            rows.append(
                OracleRow(
                    float(v1),
                    float(v2),
                    float(lam),
                    float(rep.cross_closed[0, 0]),
                    float(rep.cross_oracle[0, 0]),
                    rep.cross_rel_error,
                    rep.objective_closed,
                    rep.objective_oracle,
                    rep.objective_rel_error,
                    rep.logdet_coefficient,
                    int(rep.iterations),
                    bool(ok),
                )
            )
    return rows


RUNNERS = {
    "cost_curve": run_cost_curve,
    "coupling_contour": run_coupling_contour,
    "mds_embed": run_mds_embed,
    "cov_benchmark": run_cov_benchmark,
    "barycenter_benchmark": run_barycenter_benchmark,
}

ROW_TYPES = {
    "cost_curve": CostCurveRow,
    "coupling_contour": ContourRow,
    "mds_embed": MdsRow,
    "cov_benchmark": BenchmarkRow,
    "barycenter_benchmark": BenchmarkRow,
}


def run(config):
    return RUNNERS[config.experiment](config)
