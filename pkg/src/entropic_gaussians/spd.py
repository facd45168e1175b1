"""Symmetric and SPD matrix types plus the spectral kernel built on them.

Every SPD matrix carries its eigendecomposition, computed once at
construction (validation needs it anyway) and reused by the square root,
inverse, log-determinant and friends.
"""
import numpy as np

from .errors import ConvergenceError, DimensionError, NotSPDError

SYMMETRY_RTOL = 1e-12


def _check_square(a):
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")


def _symmetrized(entries):
    a = np.array(entries, dtype=float, copy=True)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    _check_square(a)
    if not np.all(np.isfinite(a)):
        raise NotSPDError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > SYMMETRY_RTOL * scale:
        raise NotSPDError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    a = 0.5 * (a + a.T)
    a.setflags(write=False)
    return a


class SymMatrix:
    """Immutable real symmetric matrix.

    Inputs whose asymmetry is within ``1e-12 * max(1, max|A_ij|)`` are
    symmetrized; larger violations raise :class:`NotSPDError`.
    """

    __slots__ = ("_a", "_eig")

    def __init__(self, entries):
        if isinstance(entries, SymMatrix):
            self._a = entries._a
            self._eig = entries._eig
            return
        self._a = _symmetrized(entries)
        self._eig = None

    @classmethod
    def _trusted(cls, a, eig=None):
        # Skips validation: callers guarantee exact symmetry (and positivity for SPD).
        obj = cls.__new__(cls)
        a = np.array(a, dtype=float)
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        obj._a = a
        obj._eig = eig
        return obj

    @property
    def array(self):
        return self._a

    @property
    def dim(self):
        return self._a.shape[0]

    @property
    def shape(self):
        return self._a.shape

    def eigh(self):
        """Return ``(w, V)`` with ascending eigenvalues ``w``."""
        if self._eig is None:
            w, v = np.linalg.eigh(self._a)
            w.setflags(write=False)
            v.setflags(write=False)
            self._eig = (w, v)
        return self._eig

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._a.copy() if copy else self._a
        return self._a.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}({self._a.tolist()!r})"

    def __eq__(self, other):
        if isinstance(other, SymMatrix):
            return self._a.shape == other._a.shape and bool(np.array_equal(self._a, other._a))
        return NotImplemented

    __hash__ = None


class SpdMatrix(SymMatrix):
    """Immutable symmetric positive-definite matrix.

    Construction checks symmetry (see :class:`SymMatrix`) and that the
    smallest eigenvalue is strictly positive.
    """

    __slots__ = ()

    def __init__(self, entries):
        if isinstance(entries, SpdMatrix):
            self._a = entries._a
            self._eig = entries._eig
            return
        super().__init__(entries)
        w, _ = self.eigh()
        if not w[0] > 0.0:
            raise NotSPDError(f"matrix is not positive definite (smallest eigenvalue {w[0]:.3e})")


def as_spd(a):
    return a if isinstance(a, SpdMatrix) else SpdMatrix(a)


def as_sym(a):
    return a if isinstance(a, SymMatrix) else SymMatrix(a)


def spectral_apply(a, fn):
    """Apply a scalar function to the spectrum of a symmetric matrix.

    Returns the raw array ``V diag(fn(w)) V^T``.
    """
    w, v = as_sym(a).eigh()
    return (v * fn(w)) @ v.T


def sqrt_eigen(a):
    """Principal square root of an SPD matrix via its eigendecomposition."""
    a = as_spd(a)
    w, v = a.eigh()
    r = np.sqrt(w)
    return SpdMatrix._trusted((v * r) @ v.T, eig=(r, v))


def inv_sqrt_eigen(a):
    """Inverse principal square root ``A^{-1/2}``."""
    a = as_spd(a)
    w, v = a.eigh()
    r = 1.0 / np.sqrt(w)
    return SpdMatrix._trusted((v * r) @ v.T, eig=(r[::-1], v[:, ::-1]))


def sqrt_newton_schulz(a, eps=1e-2, max_iter=100, tol=1e-12):
    """Matrix square root by the coupled Newton-Schulz iteration.

    Parameters
    ----------
    a : SpdMatrix or array-like
        SPD input.
    eps : float
        Safety margin in the initial scaling ``Y0 = A / ((1 + eps) ||A||_F)``;
        keeps the spectrum of ``Y0`` strictly inside ``(0, 1)``.
    max_iter : int
        Iteration cap.
    tol : float
        Stop once ``||Y_{k+1} - Y_k||_F <= tol * ||Y_k||_F``.

    Returns
    -------
    SpdMatrix
        ``sqrt((1 + eps) ||A||_F) * Y`` at convergence.

    Raises
    ------
    ConvergenceError
        If the iteration has not converged after ``max_iter`` steps.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    a = as_spd(a)
    arr = a.array
    n = a.dim
    scale = (1.0 + eps) * np.linalg.norm(arr, "fro")
    eye = np.eye(n)
    y = arr / scale
    z = eye.copy()
    prev_step = np.inf
    step = np.inf
    for it in range(1, max_iter + 1):
        t = 0.5 * (3.0 * eye - z @ y)
        y_next = y @ t
        z = t @ z
        step = np.linalg.norm(y_next - y, "fro")
        size = np.linalg.norm(y, "fro")
        y = y_next
        if step <= tol * size:
            break
        # Rounding floor: the step stopped shrinking while already tiny.
        if step >= prev_step and step <= np.sqrt(tol) * size:
            break
        prev_step = step
    else:
        raise ConvergenceError(
            f"Newton-Schulz did not converge in {max_iter} iterations "
            f"(last step {step:.3e}); input may be ill-conditioned",
            iterations=max_iter,
            residual=step,
        )
    root = np.sqrt(scale) * y
    root = 0.5 * (root + root.T)
    return SpdMatrix(root)


def matrix_exp(v):
    """Exponential of a symmetric matrix (always SPD)."""
    v = as_sym(v)
    w, vec = v.eigh()
    e = np.exp(w)
    return SpdMatrix._trusted((vec * e) @ vec.T, eig=(e, vec))


def logdet(a):
    """Log-determinant of an SPD matrix."""
    w, _ = as_spd(a).eigh()
    return float(np.sum(np.log(w)))


def inverse(a):
    """Inverse of an SPD matrix."""
    a = as_spd(a)
    w, v = a.eigh()
    r = 1.0 / w
    return SpdMatrix._trusted((v * r) @ v.T, eig=(r[::-1], v[:, ::-1]))


def eigenvalues(a):
    """Eigenvalues of an SPD matrix in ascending order."""
    w, _ = as_spd(a).eigh()
    return w.copy()
