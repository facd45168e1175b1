"""q-exponential calculus, multivariate q-normal laws and their Tsallis-entropic coupling.

A q-normal with location ``mu`` and scale ``S`` has density proportional to
``exp_q(-(x - mu)^T S^{-1} (x - mu))``. For ``1 < q < 1 + 2/n`` it is a
multivariate t law with ``nu = 2/(q - 1) - n`` degrees of freedom and t-scale
``S / (nu (q - 1))``; at ``q = 1`` it is ``N(mu, S / 2)``.

Coupling parametrization
------------------------
For marginals ``N_q(mu1, S1)``, ``N_q(mu2, S2)`` in dimension ``n`` with
``b = q - 1``, the optimal coupling is the ``2n``-variate q'-normal with

* ``q' - 1 = 2b / (2 + n b)`` (the degrees of freedom are shared with the
  marginals, so its n-dimensional margins are again q-normal with parameter q),
* q-normal scale ``(q' - 1)/(q - 1) * [[S1, X], [X^T, S2]]``; the factor
  undoes the dimension dependence of the q-normal scale so that the margins
  have scales exactly ``S1`` and ``S2``,
* ``X = sigma_lambda(S1, S2, lam_tilde)``.

The regularizer is ``-2 lam S_{1 + r}`` with ``r = 1 - q' < 0``. Writing the
normalizer of the coupling as ``C`` and ``c = C^{|r|}``, stationarity gives
``lam_tilde = c * lam * (1 + r) * (q - 1) / (q' - 1)`` and the consistency
equation ``f(c) = (1/r) log c + log C(lam_tilde(c)) = 0``; ``f`` is strictly
decreasing with limits ``+inf`` and ``-inf``.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import betaln, gammaln

from .errors import ConvergenceError, DimensionError, ParameterError
from .gaussian import _check_pair, _pair_spectrum, _shifted_root, sigma_lambda
from .spd import SpdMatrix, as_spd


def q_exp(u, q):
    """``[1 + (1 - q) u]_+^{1/(1 - q)}``, or ``exp(u)`` at ``q = 1``.

    For ``q > 1`` the bracket vanishing sends the value to ``+inf``.
    """
    u = np.asarray(u, dtype=float)
    if q == 1:
        return np.exp(u)
    base = 1.0 + (1.0 - q) * u
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(base > 0, np.abs(base) ** (1.0 / (1.0 - q)), 0.0 if q < 1 else np.inf)
    return out[()] if out.ndim == 0 else out


def q_log(u, q):
    """``(u^{1 - q} - 1)/(1 - q)``, or ``log(u)`` at ``q = 1``; requires ``u > 0``."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ParameterError("q_log is defined for u > 0 only")
    out = np.log(u) if q == 1 else np.expm1((1.0 - q) * np.log(u)) / (1.0 - q)
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class QNormal:
    """Multivariate q-normal ``N_q(loc, scale)``."""

    loc: np.ndarray
    scale: SpdMatrix
    q: float

    def __post_init__(self):
        scale = as_spd(self.scale)
        loc = np.atleast_1d(np.array(self.loc, dtype=float))
        if loc.ndim != 1 or loc.shape[0] != scale.dim:
            raise DimensionError(f"loc of shape {loc.shape} does not match scale dim {scale.dim}")
        n = scale.dim
        if self.q > 1 and not self.q < 1 + 2.0 / n:
            raise ParameterError(f"q-normal needs q < 1 + 2/n = {1 + 2.0 / n:g} (got {self.q})")
        loc.setflags(write=False)
        object.__setattr__(self, "loc", loc)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "q", float(self.q))

    @property
    def dim(self):
        return self.scale.dim

    @property
    def dof(self):
        """Degrees of freedom of the equivalent t law (``q > 1`` only)."""
        if not self.q > 1:
            raise ParameterError("t correspondence needs q > 1")
        return 2.0 / (self.q - 1.0) - self.dim

    @property
    def has_second_moment(self):
        return self.q < 1 + 2.0 / (self.dim + 2)


@lru_cache(maxsize=256)
def _radial_log_mass(n, q):
    # log of int_{R^n} exp_q(-|w|^2) dw, evaluated by radial quadrature.
    log_sphere = np.log(2.0) + 0.5 * n * np.log(np.pi) - gammaln(0.5 * n)
    if q < 1:
        r_max = 1.0 / np.sqrt(1.0 - q)
        val, _ = integrate.quad(lambda r: r ** (n - 1) * q_exp(-r * r, q), 0.0, r_max, epsabs=0, epsrel=1e-13, limit=200)
    else:
        val, _ = integrate.quad(lambda r: r ** (n - 1) * q_exp(-r * r, q), 0.0, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    return log_sphere + np.log(val)


def log_normalizer(n, q, logdet_scale):
    """``log C_q(S)`` for an n-variate q-normal whose scale has log-det ``logdet_scale``."""
    if q > 1:
        if not q < 1 + 2.0 / n:
            raise ParameterError("q-normal is not normalizable for q >= 1 + 2/n")
        nu = 2.0 / (q - 1.0) - n
        # t density normalizer with t-scale S / (nu (q - 1)).
        log_t_scale_det = logdet_scale - n * np.log(nu * (q - 1.0))
        return float(gammaln(0.5 * nu) + 0.5 * n * np.log(nu * np.pi) + 0.5 * log_t_scale_det - gammaln(0.5 * (nu + n)))
    if q == 1:
        return float(0.5 * n * np.log(np.pi) + 0.5 * logdet_scale)
    return float(_radial_log_mass(n, q) + 0.5 * logdet_scale)


def qnormal_density(x, dist):
    """Density of ``dist`` at points ``x`` of shape ``(..., n)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dist.dim:
        raise DimensionError(f"points have trailing dimension {x.shape[-1]}, expected {dist.dim}")
    w, v = dist.scale.eigh()
    d = (x - dist.loc) @ v
    u = np.sum(d * d / w, axis=-1)
    logc = log_normalizer(dist.dim, dist.q, float(np.sum(np.log(w))))
    return q_exp(-u, dist.q) * np.exp(-logc)


def _check_coupling_range(n, q):
    if not 1 < q < 1 + 2.0 / (n + 2):
        raise ParameterError(f"need 1 < q < 1 + 2/(n+2) = {1 + 2.0 / (n + 2):g} for n = {n} (got {q})")


def marginal_q_parameter(n, p, q):
    """q-parameter of a p-dimensional margin of an n-variate q-normal."""
    _check_coupling_range(n, q)
    if not 1 <= p <= n:
        raise ParameterError("need 1 <= p <= n")
    return 1.0 + 2.0 * (q - 1.0) / (2.0 - (n - p) * (q - 1.0))


def q_tilde(n, q):
    """``-2(q - 1)/(2 - n(q - 1))``, always negative on ``1 < q < 1 + 2/(n+2)``."""
    _check_coupling_range(n, q)
    return -2.0 * (q - 1.0) / (2.0 - n * (q - 1.0))


def coupling_q_parameter(n, q, rule="marginal"):
    """q-parameter of the ``2n``-variate coupling of two n-variate q-normals.

    ``rule="marginal"`` gives ``1 + 2(q-1)/(2 + n(q-1))``, the value whose
    n-dimensional margins are q-normal with parameter ``q``.
    ``rule="verbatim"`` gives ``1 - q_tilde(n, q)``.
    """
    _check_coupling_range(n, q)
    if rule == "marginal":
        return 1.0 + 2.0 * (q - 1.0) / (2.0 + n * (q - 1.0))
    if rule == "verbatim":
        return 1.0 - q_tilde(n, q)
    raise ValueError(f"unknown rule {rule!r}")


class LambdaTildeEquation:
    """The scalar consistency equation ``f(c) = 0`` that fixes ``lam_tilde``.

    ``f`` is strictly decreasing in ``c > 0``; :meth:`lambda_tilde` maps a
    root ``c`` to the effective regularization.
    """

    def __init__(self, s1, s2, q, lam):
        s1, s2 = as_spd(s1), as_spd(s2)
        _check_pair(s1, s2)
        n = s1.dim
        _check_coupling_range(n, q)
        if not lam > 0:
            raise ParameterError("lam must be positive")
        self.n = n
        self.q = float(q)
        self.lam = float(lam)
        self.nu = _pair_spectrum(s1, s2)
        b = q - 1.0
        self.a = 2.0 * b / (2.0 + n * b)  # |r|, r the Tsallis exponent shift
        self.scale_factor = self.a / b
        self.slope = self.lam * (1.0 - self.a) / self.scale_factor
        inv_a = 1.0 / self.a
        self._log_const = (
            n * np.log(self.scale_factor)
            - n * np.log(self.a)
            + n * np.log(np.pi)
            + gammaln(inv_a - n)
            - gammaln(inv_a)
        )

    def lambda_tilde(self, c):
        return self.slope * c

    @property
    def c_neutral(self):
        """The ``c`` at which ``lam_tilde == lam``."""
        return self.lam / self.slope

    def log_normalizer(self, lam_t):
        """Log normalizer of the coupling at effective regularization ``lam_t``."""
        half_logdet = 0.5 * (self.n * np.log(2.0 * lam_t) + np.sum(np.log(_shifted_root(self.nu, lam_t))))
        return self._log_const + half_logdet

    def __call__(self, c):
        return -np.log(c) / self.a + self.log_normalizer(self.lambda_tilde(c))

    def dlog(self, c):
        """``df / d log c``; always below ``-1/a + n/2 < 0``."""
        lt = self.lambda_tilde(c)
        return -1.0 / self.a + 0.5 * (self.n - np.sum(lt / np.sqrt(self.nu + lt * lt)))


def solve_lambda_tilde(s1, s2, q, lam, c0=None, tol=1e-13, max_doublings=200, return_c=False):
    """Unique ``lam_tilde > 0`` of the Tsallis-entropic q-normal coupling.

    Brackets the root of the decreasing consistency equation by doubling
    (or halving) ``c``, bisects in ``log c``, then polishes with Newton steps
    kept inside the bracket.

    Parameters
    ----------
    s1, s2 : SpdMatrix or array-like
        Scale matrices of the two q-normals.
    q : float
        Shared q-parameter, ``1 < q < 1 + 2/(n+2)``.
    lam : float
        Regularization weight, ``lam > 0``.
    c0 : float, optional
        Starting point for bracketing; defaults to the ``c`` with
        ``lam_tilde == lam``.
    return_c : bool
        Also return the root ``c``.

    Raises
    ------
    ConvergenceError
        If no sign change is found within ``max_doublings`` doublings.
    """
    eq = LambdaTildeEquation(s1, s2, q, lam)
    s = np.log(eq.c_neutral if c0 is None else c0)
    f0 = eq(np.exp(s))
    if f0 == 0:
        lo = hi = s
    else:
        direction = 1.0 if f0 > 0 else -1.0
        lo = hi = s
        step = np.log(2.0)
        for _ in range(max_doublings):
            nxt = hi + direction * step if direction > 0 else lo + direction * step
            fn = eq(np.exp(nxt))
            if direction > 0:
                lo, hi = hi, nxt
            else:
                lo, hi = nxt, lo
            if np.sign(fn) != np.sign(f0) or fn == 0:
                break
        else:
            raise ConvergenceError("could not bracket the lam_tilde equation", iterations=max_doublings)
    # lo has f >= 0, hi has f <= 0.
    x = 0.5 * (lo + hi)
    for _ in range(60):
        if hi - lo < 1e-6:
            break
        x = 0.5 * (lo + hi)
        if eq(np.exp(x)) > 0:
            lo = x
        else:
            hi = x
    x = 0.5 * (lo + hi)
    fx = eq(np.exp(x))
    for _ in range(100):
        if abs(fx) <= tol:
            break
        x_new = x - fx / eq.dlog(np.exp(x))
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        f_new = eq(np.exp(x_new))
        if f_new > 0:
            lo = x_new
        else:
            hi = x_new
        if x_new == x:
            break
        x, fx = x_new, f_new
    c = float(np.exp(x))
    lam_t = float(eq.lambda_tilde(c))
    return (lam_t, c) if return_c else lam_t


@dataclass(frozen=True)
class QNormalCoupling:
    """Optimal Tsallis-entropic coupling of two q-normals.

    ``block_11``, ``block_22`` and ``block_12`` are the blocks of the
    marginal-consistent scale; :meth:`as_qnormal` gives the ``2n``-variate
    q-normal whose margins are exactly the inputs.
    """

    loc: np.ndarray
    block_11: SpdMatrix
    block_22: SpdMatrix
    block_12: np.ndarray
    q_marginal: float
    q_coupling: float
    lambda_tilde: float

    @property
    def dim(self):
        return self.block_11.dim

    @property
    def matrix(self):
        c = self.block_12
        return np.block([[self.block_11.array, c], [c.T, self.block_22.array]])

    @property
    def scale_factor(self):
        return (self.q_coupling - 1.0) / (self.q_marginal - 1.0)

    def as_qnormal(self, literal_scale=False):
        """The coupling as a ``2n``-variate :class:`QNormal`.

        ``literal_scale=True`` uses the block matrix itself as the q-normal
        scale, without the dimension correction.
        """
        k = 1.0 if literal_scale else self.scale_factor
        return QNormal(self.loc, k * self.matrix, self.q_coupling)

    def pdf(self, z, literal_scale=False):
        return qnormal_density(z, self.as_qnormal(literal_scale))


def qnormal_coupling(p, q_dist, lam, rule="marginal"):
    """Optimal coupling of ``p`` and ``q_dist`` under Tsallis regularization.

    ``rule`` selects the coupling q-parameter (see :func:`coupling_q_parameter`).
    """
    if p.dim != q_dist.dim:
        raise DimensionError("dimension mismatch")
    if p.q != q_dist.q:
        raise ParameterError("both q-normals must share q")
    lam_t = solve_lambda_tilde(p.scale, q_dist.scale, p.q, lam)
    cross = sigma_lambda(p.scale, q_dist.scale, lam_t)
    return QNormalCoupling(
        loc=np.concatenate([p.loc, q_dist.loc]),
        block_11=p.scale,
        block_22=q_dist.scale,
        block_12=cross,
        q_marginal=p.q,
        q_coupling=coupling_q_parameter(p.dim, p.q, rule),
        lambda_tilde=lam_t,
    )


def radial_mass_beta(n, q):
    """Closed form of the q < 1 radial integral, for cross-checking quadrature."""
    log_sphere = np.log(2.0) + 0.5 * n * np.log(np.pi) - gammaln(0.5 * n)
    return float(log_sphere + np.log(0.5) - 0.5 * n * np.log(1.0 - q) + betaln(0.5 * n, 1.0 / (1.0 - q) + 1.0))
