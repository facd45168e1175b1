"""Closed-form entropic optimal transport between multivariate normals.

Regularization convention: for ``lam > 0`` the objective is

    E_pi ||X - Y||^2 - 4 * lam * Ent(pi)

so the usual Sinkhorn temperature is ``epsilon = 4 * lam``. Everything in
this module uses that convention; :mod:`.kantorovich` and
:mod:`.barycenter` use the plain ``epsilon = lam`` weighting instead.

All matrix functions of ``M = S1^{1/2} S2 S1^{1/2}`` go through its
eigenvalues ``nu``. The quantity ``sqrt(nu + lam^2) - lam`` is evaluated as
``nu / (sqrt(nu + lam^2) + lam)`` so large ``lam`` does not cancel.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguityError, CouplingError, DimensionError, ParameterError
from .spd import SpdMatrix, as_spd, inv_sqrt_eigen, sqrt_eigen, sqrt_newton_schulz

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class Gaussian:
    """Multivariate normal ``N(mean, cov)``."""

    mean: np.ndarray
    cov: SpdMatrix

    def __post_init__(self):
        cov = as_spd(self.cov)
        mean = np.atleast_1d(np.array(self.mean, dtype=float))
        if mean.ndim != 1 or mean.shape[0] != cov.dim:
            raise DimensionError(f"mean of shape {mean.shape} does not match covariance dim {cov.dim}")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.cov.dim

    def pdf(self, x):
        """Density at points ``x`` of shape ``(..., dim)``."""
        x = np.asarray(x, dtype=float)
        w, v = self.cov.eigh()
        d = (x - self.mean) @ v
        quad = np.sum(d * d / w, axis=-1)
        lognorm = 0.5 * (self.dim * LOG_2PI + np.sum(np.log(w)))
        return np.exp(-0.5 * quad - lognorm)


@dataclass(frozen=True)
class GaussianCoupling:
    """Joint normal on ``R^{2n}`` with marginals ``N(mu1, S1)`` and ``N(mu2, S2)``."""

    mean: np.ndarray
    block_11: SpdMatrix
    block_22: SpdMatrix
    block_12: np.ndarray
    lam: float

    @property
    def dim(self):
        return self.block_11.dim

    @property
    def matrix(self):
        """Assembled ``2n x 2n`` covariance."""
        c = self.block_12
        return np.block([[self.block_11.array, c], [c.T, self.block_22.array]])

    def pdf(self, z):
        """Joint density at points ``z`` of shape ``(..., 2n)``."""
        return Gaussian(self.mean, self.matrix).pdf(z)


@dataclass(frozen=True)
class CostBreakdown:
    """Entropic cost split into transport and entropy parts.

    ``entropy_term`` is ``-4 * lam * Ent(pi)`` and ``relative_total`` is the
    relative-entropy variant (transport plus ``4 * lam * KL(pi | P x Q)``).
    """

    total: float
    transport_term: float
    entropy_term: float
    relative_total: float
    lam: float = field(default=0.0)


def _pair_spectrum(s1, s2):
    # Eigenvalues of S1^{1/2} S2 S1^{1/2}; the same as those of S2^{1/2} S1 S2^{1/2}.
    r1 = sqrt_eigen(s1).array
    m = r1 @ s2.array @ r1
    nu = np.linalg.eigvalsh(0.5 * (m + m.T))
    return np.clip(nu, 0.0, None)


def _shifted_root(nu, lam):
    """``sqrt(nu + lam^2) - lam`` without cancellation."""
    return nu / (np.sqrt(nu + lam * lam) + lam)


def _check_pair(s1, s2):
    if s1.dim != s2.dim:
        raise DimensionError(f"dimension mismatch: {s1.dim} vs {s2.dim}")


def _check_gaussians(p, q):
    if p.dim != q.dim:
        raise DimensionError(f"dimension mismatch: {p.dim} vs {q.dim}")


def sigma_lambda(s1, s2, lam, sqrt="eigen"):
    """Cross-covariance block of the optimal entropic coupling.

    ``S1^{1/2} (S1^{1/2} S2 S1^{1/2} + lam^2 I)^{1/2} S1^{-1/2} - lam I``.

    Parameters
    ----------
    s1, s2 : SpdMatrix or array-like
        Marginal covariances.
    lam : float
        Regularization, ``lam >= 0``; ``lam = 0`` is the unregularized map.
    sqrt : {"eigen", "newton_schulz"}
        Square-root backend. The eigen route is cancellation-free; the
        Newton-Schulz route evaluates the formula literally.

    Returns
    -------
    ndarray, shape (n, n)
        Generally non-symmetric.
    """
    s1, s2 = as_spd(s1), as_spd(s2)
    _check_pair(s1, s2)
    if lam < 0:
        raise ParameterError("lam must be nonnegative")
    n = s1.dim
    r1 = sqrt_eigen(s1).array
    r1_inv = inv_sqrt_eigen(s1).array
    m = r1 @ s2.array @ r1
    m = 0.5 * (m + m.T)
    if sqrt == "eigen":
        nu, u = np.linalg.eigh(m)
        nu = np.clip(nu, 0.0, None)
        inner = (u * _shifted_root(nu, lam)) @ u.T
        return r1 @ inner @ r1_inv
    if sqrt == "newton_schulz":
        root = sqrt_newton_schulz(m + lam * lam * np.eye(n)).array
        return r1 @ root @ r1_inv - lam * np.eye(n)
    raise ValueError(f"unknown sqrt backend {sqrt!r}")


def coupling_eigenvalues(s1, s2, lam):
    """Eigenvalues of ``sigma_lambda(s1, s2, lam)`` in ascending order.

    They are ``sqrt(nu_i + lam^2) - lam`` for the eigenvalues ``nu_i`` of
    ``S1^{1/2} S2 S1^{1/2}``.
    """
    s1, s2 = as_spd(s1), as_spd(s2)
    _check_pair(s1, s2)
    if lam < 0:
        raise ParameterError("lam must be nonnegative")
    return np.sort(_shifted_root(_pair_spectrum(s1, s2), lam))


def wasserstein2_sq(p, q):
    """Squared 2-Wasserstein distance between two normals."""
    _check_gaussians(p, q)
    nu = _pair_spectrum(p.cov, q.cov)
    dm = p.mean - q.mean
    val = float(dm @ dm + np.trace(p.cov.array) + np.trace(q.cov.array) - 2.0 * np.sum(np.sqrt(nu)))
    return max(val, 0.0)


def entropy_constant(n, lam):
    """Terms of the entropic cost that depend on ``n`` and ``lam`` only.

    These come from ``-4 lam Ent(pi)`` for a ``2n``-dimensional normal:
    ``-2 lam n log(2 lam) - 4 lam n log(2 pi) - 2 lam n``.
    """
    return -2.0 * lam * n * np.log(2.0 * lam) - 4.0 * lam * n * LOG_2PI - 2.0 * lam * n


def covariance_cost(s1, s2, lam, nu=None):
    """Covariance-dependent part of the entropic cost.

    ``tr(S1 + S2) - 2 sum sqrt(nu + lam^2) - 2 lam sum log(sqrt(nu + lam^2) - lam)``.
    Valid at ``lam = 0`` where it reduces to the Bures term.
    """
    if nu is None:
        nu = _pair_spectrum(s1, s2)
    val = np.trace(s1.array) + np.trace(s2.array) - 2.0 * np.sum(np.sqrt(nu + lam * lam))
    if lam > 0:
        val -= 2.0 * lam * np.sum(np.log(_shifted_root(nu, lam)))
    return float(val)


def entropic_cost(p, q, lam):
    """Entropic OT cost between two normals with its decomposition.

    Parameters
    ----------
    p, q : Gaussian
    lam : float
        Strictly positive; use :func:`wasserstein2_sq` at ``lam = 0``.

    Returns
    -------
    CostBreakdown
    """
    _check_gaussians(p, q)
    if not lam > 0:
        raise ParameterError("entropic_cost requires lam > 0; use wasserstein2_sq for lam = 0")
    n = p.dim
    nu = _pair_spectrum(p.cov, q.cov)
    dm = p.mean - q.mean
    mean_term = float(dm @ dm)
    root_sum = float(np.sum(np.sqrt(nu + lam * lam)))
    trace_sum = float(np.trace(p.cov.array) + np.trace(q.cov.array))
    transport = mean_term + trace_sum - 2.0 * root_sum + 2.0 * n * lam
    total = mean_term + covariance_cost(p.cov, q.cov, lam, nu) + entropy_constant(n, lam)
    logdets = float(np.sum(np.log(p.cov.eigh()[0])) + np.sum(np.log(q.cov.eigh()[0])))
    relative = total + 2.0 * lam * logdets + 4.0 * lam * n * (LOG_2PI + 1.0)
    return CostBreakdown(
        total=total,
        transport_term=transport,
        entropy_term=total - transport,
        relative_total=relative,
        lam=float(lam),
    )


def optimal_coupling(p, q, lam, sqrt="eigen"):
    """Optimal entropic coupling of two normals as a ``2n``-variate normal."""
    _check_gaussians(p, q)
    cross = sigma_lambda(p.cov, q.cov, lam, sqrt=sqrt)
    coupling = GaussianCoupling(
        mean=np.concatenate([p.mean, q.mean]),
        block_11=p.cov,
        block_22=q.cov,
        block_12=cross,
        lam=float(lam),
    )
    full = coupling.matrix
    w = np.linalg.eigvalsh(0.5 * (full + full.T))
    if w[0] < -1e-10 * max(1.0, float(np.max(np.abs(w)))):
        raise CouplingError(f"assembled coupling is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    return coupling


def transport_term(coupling):
    """Expected squared distance ``E||X - Y||^2`` under a Gaussian coupling."""
    n = coupling.dim
    dm = coupling.mean[:n] - coupling.mean[n:]
    return float(
        dm @ dm
        + np.trace(coupling.block_11.array)
        + np.trace(coupling.block_22.array)
        - 2.0 * np.trace(coupling.block_12)
    )


def extremal_alignment(s1, eig2, gap_rtol=1e-8):
    """Covariances with spectrum ``eig2`` that minimize and maximize the cost.

    With ``S1 = G^T diag(l1 desc) G``, the minimizer is ``G^T diag(eig2 desc) G``
    and the maximizer ``G^T diag(eig2 asc) G``, for every ``lam``.

    Raises
    ------
    AmbiguityError
        If ``s1`` has two eigenvalues within a relative gap of ``gap_rtol``.
    """
    s1 = as_spd(s1)
    eig2 = np.asarray(eig2, dtype=float).ravel()
    if eig2.shape[0] != s1.dim:
        raise DimensionError(f"expected {s1.dim} eigenvalues, got {eig2.shape[0]}")
    if not np.all(eig2 > 0):
        raise ParameterError("eig2 must be strictly positive")
    w, v = s1.eigh()
    if s1.dim > 1:
        gaps = np.diff(w) / w[1:]
        if np.min(gaps) < gap_rtol:
            raise AmbiguityError("S1 has repeated eigenvalues; its eigenbasis is not unique")
    v_desc = v[:, ::-1]
    desc = np.sort(eig2)[::-1]
    lo = SpdMatrix((v_desc * desc) @ v_desc.T)
    hi = SpdMatrix((v_desc * desc[::-1]) @ v_desc.T)
    return lo, hi
