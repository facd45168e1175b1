"""Entropic Wasserstein barycenter of Gaussians by Riemannian gradient descent.

The barycenter minimizes ``sum_i C(P, Q_i)`` over normals ``P``. Its ``lam``
follows the estimator weighting of :mod:`.kantorovich` (Sinkhorn
temperature ``epsilon = lam``), so a single input ``Q`` yields exactly the
Kantorovich estimator ``N(mu, Sigma + lam/2 I)``. Internally the cost is the
closed form of :mod:`.gaussian` evaluated at ``lam / 4``.

The mean separates and is the arithmetic mean of the input means. The
covariance is optimized on the SPD cone with the affine-invariant metric
``g_X(Y, Z) = tr(Y X^{-1} Z X^{-1})`` and the retraction
``X -> X Exp(X^{-1} V)``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError, StepSizeError
from .gaussian import Gaussian, _shifted_root, entropy_constant
from .spd import SpdMatrix, SymMatrix, as_spd, as_sym, sqrt_eigen

ARMIJO = 0.3


@dataclass(frozen=True)
class BarycenterProblem:
    """Inputs and solver settings for :func:`barycenter`."""

    inputs: tuple
    lam: float = 0.0
    step_size: float = 0.1
    max_iter: int = 500
    grad_tol: float = 1e-7

    def __post_init__(self):
        inputs = tuple(self.inputs)
        if not inputs:
            raise ParameterError("barycenter needs at least one input")
        dims = {g.dim for g in inputs}
        if len(dims) != 1:
            raise DimensionError(f"inputs have mixed dimensions {sorted(dims)}")
        if self.lam < 0:
            raise ParameterError("lam must be nonnegative")
        if not self.step_size > 0:
            raise ParameterError("step_size must be positive")
        object.__setattr__(self, "inputs", inputs)

    @property
    def dim(self):
        return self.inputs[0].dim


@dataclass(frozen=True)
class BarycenterResult:
    barycenter: Gaussian
    iterations: int
    final_grad_norm: float
    objective_trace: list = field(default_factory=list)
    converged: bool = False
    status: str = "converged"


def riemannian_grad(egrad, x):
    """``X egrad X``, the gradient under the affine-invariant metric."""
    egrad, x = as_sym(egrad), as_spd(x)
    if egrad.dim != x.dim:
        raise DimensionError("dimension mismatch")
    g = x.array @ egrad.array @ x.array
    return SymMatrix._trusted(g)


def retract(x, v):
    """``X Exp(X^{-1} V)``, computed as ``X^{1/2} Exp(X^{-1/2} V X^{-1/2}) X^{1/2}``."""
    x, v = as_spd(x), as_sym(v)
    if x.dim != v.dim:
        raise DimensionError("dimension mismatch")
    w, u = x.eigh()
    r = (u * np.sqrt(w)) @ u.T
    r_inv = (u / np.sqrt(w)) @ u.T
    inner = r_inv @ v.array @ r_inv
    ew, eu = np.linalg.eigh(0.5 * (inner + inner.T))
    core = (eu * np.exp(ew)) @ eu.T
    return SpdMatrix(r @ core @ r)


def _grad_from_root(s, b_root, lam):
    n_mat = b_root @ s @ b_root
    nu, u = np.linalg.eigh(0.5 * (n_mat + n_mat.T))
    nu = np.clip(nu, np.finfo(float).tiny, None)
    gfun = (np.sqrt(nu + lam * lam) + lam) / nu
    inner = (u * gfun) @ u.T
    g = np.eye(s.shape[0]) - b_root @ inner @ b_root
    return 0.5 * (g + g.T)


def euclidean_grad_cost(s_p, q, lam):
    """Gradient of ``C_lam(N(., s_p), q)`` in ``s_p`` (``4 lam`` convention).

    Equals ``I - B^{1/2} g(N) B^{1/2}`` with ``B = cov(q)``,
    ``N = B^{1/2} s_p B^{1/2}`` and ``g(nu) = 1/(sqrt(nu + lam^2) - lam)``.
    ``lam = 0`` gives the Bures-Wasserstein gradient.
    """
    s_p = as_spd(s_p)
    if s_p.dim != q.dim:
        raise DimensionError("dimension mismatch")
    if lam < 0:
        raise ParameterError("lam must be nonnegative")
    b_root = sqrt_eigen(q.cov).array
    return SymMatrix._trusted(_grad_from_root(s_p.array, b_root, lam))


class _Objective:
    """Sum of entropic costs to fixed inputs, as a function of the covariance."""

    def __init__(self, inputs, lam_closed):
        self.lam = lam_closed
        self.covs = [g.cov for g in inputs]
        self.roots = [sqrt_eigen(c).array for c in self.covs]
        means = np.array([g.mean for g in inputs])
        self.mean = means.mean(axis=0)
        n = inputs[0].dim
        const = float(np.sum((means - self.mean) ** 2))
        if lam_closed > 0:
            const += len(inputs) * entropy_constant(n, lam_closed)
        self.const = const

    def value(self, x):
        total = self.const
        for cov, root in zip(self.covs, self.roots):
            m = root @ x @ root
            nu = np.clip(np.linalg.eigvalsh(0.5 * (m + m.T)), 0.0, None)
            total += float(np.trace(x)) + float(np.trace(cov.array)) - 2.0 * float(np.sum(np.sqrt(nu + self.lam**2)))
            if self.lam > 0:
                with np.errstate(divide="ignore"):
                    total -= 2.0 * self.lam * float(np.sum(np.log(_shifted_root(nu, self.lam))))
        return total

    def egrad(self, x):
        g = np.zeros_like(x)
        for root in self.roots:
            g += _grad_from_root(x, root, self.lam)
        return g


def _scaled_grad(obj, x):
    """``X^{1/2}``, the whitened gradient ``X^{1/2} G X^{1/2}`` and its Frobenius norm.

    The norm equals the Riemannian norm of ``X G X`` under the affine-invariant metric.
    """
    w, u = np.linalg.eigh(x)
    xr = (u * np.sqrt(w)) @ u.T
    g = xr @ obj.egrad(x) @ xr
    g = 0.5 * (g + g.T)
    return xr, g, float(np.linalg.norm(g))


def _is_spd(x):
    if not np.all(np.isfinite(x)):
        return False
    return np.linalg.eigvalsh(x)[0] > 0


def _canonical_order(inputs):
    keys = [tuple(g.mean.tolist()) + tuple(g.cov.array.ravel().tolist()) for g in inputs]
    return [inputs[i] for i in sorted(range(len(inputs)), key=lambda i: keys[i])]


def barycenter(problem, backtracking=True):
    """Entropic barycenter of the Gaussians in ``problem``.

    Each iteration steps ``X <- retract(X, -eta * grad)``. With
    ``backtracking`` the trial ``eta`` starts at ``problem.step_size``, is
    halved until the Armijo condition ``F_new <= F - c eta |grad|^2`` holds,
    and doubles after a step accepted at the first trial. Without it ``eta``
    stays at ``problem.step_size``.

    The run stops with ``status`` "converged" once the Riemannian gradient
    norm is at most ``grad_tol``, "max_iter" after ``max_iter`` steps, or
    "stalled" when no step of size above ``2^-40 step_size`` lowers the
    objective (the decrease is below rounding).

    Raises
    ------
    StepSizeError
        If the objective is non-finite at the start, or becomes non-finite
        with backtracking disabled.
    """
    inputs = _canonical_order(problem.inputs)
    obj = _Objective(inputs, problem.lam / 4.0)
    x = np.mean([g.cov.array for g in inputs], axis=0)
    x = 0.5 * (x + x.T)
    trace = []
    fx = obj.value(x)
    if not np.isfinite(fx):
        raise StepSizeError("objective is not finite at the initial point", trace=[fx])
    eta0 = problem.step_size
    eta = eta0
    status = "max_iter"
    it = 0
    while True:
        trace.append(fx)
        xr, rgrad, gnorm = _scaled_grad(obj, x)
        if gnorm <= problem.grad_tol:
            status = "converged"
            break
        if it == problem.max_iter:
            break
        ew, eu = np.linalg.eigh(rgrad)
        first_try = True
        while True:
            step = (eu * np.exp(-eta * ew)) @ eu.T
            x_new = xr @ step @ xr
            x_new = 0.5 * (x_new + x_new.T)
            f_new = obj.value(x_new)
            if not backtracking:
                if not np.isfinite(f_new) or not _is_spd(x_new):
                    raise StepSizeError(f"step left the SPD cone or the objective diverged at iteration {it}", trace=trace + [f_new])
                break
            if np.isfinite(f_new) and f_new <= fx - ARMIJO * eta * gnorm * gnorm:
                break
            eta *= 0.5
            first_try = False
            if eta < eta0 * 2.0**-40:
                f_new = None
                break
        if f_new is None:
            status = "stalled"
            break
        if backtracking and first_try:
            eta *= 2.0
        x, fx = x_new, f_new
        it += 1
    return BarycenterResult(
        barycenter=Gaussian(obj.mean, SpdMatrix(x)),
        iterations=it,
        final_grad_norm=gnorm,
        objective_trace=trace,
        converged=status == "converged",
        status=status,
    )
