"""Small numerical utilities used by the experiment runners."""
import numpy as np

from ..errors import DimensionError, EmbeddingError, ParameterError
from ..spd import SpdMatrix


def kl_gaussian(p, q):
    """``KL(p || q)`` between two normals, clipped at zero against rounding."""
    if p.dim != q.dim:
        raise DimensionError(f"dimension mismatch: {p.dim} vs {q.dim}")
    wq, vq = q.cov.eigh()
    wp, _ = p.cov.eigh()
    # Q^{-1/2} in the eigenbasis of Q keeps everything symmetric.
    a = vq.T @ p.cov.array @ vq
    trace_term = float(np.sum(np.diag(a) / wq))
    d = vq.T @ (q.mean - p.mean)
    maha = float(np.sum(d * d / wq))
    logdet = float(np.sum(np.log(wq)) - np.sum(np.log(wp)))
    return max(0.5 * (trace_term + maha - p.dim + logdet), 0.0)


def classical_mds(d, out_dim=2, rtol=1e-12):
    """Torgerson embedding of a dissimilarity matrix.

    Coordinates are the top ``out_dim`` eigenvectors of ``-J D^2 J / 2``
    scaled by the square roots of their eigenvalues. Axes with nonpositive
    eigenvalues are filled with zeros. Each axis is flipped so that its
    largest-magnitude entry is positive.

    Raises
    ------
    EmbeddingError
        If ``d`` is nonzero but no eigenvalue is positive.
    """
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DimensionError("dissimilarity matrix must be square")
    if out_dim < 1:
        raise ParameterError("out_dim must be at least 1")
    if np.any(d < 0) or not np.allclose(d, d.T, rtol=0, atol=1e-12 * max(1.0, float(np.max(d, initial=0.0)))):
        raise ParameterError("dissimilarities must be symmetric and nonnegative")
    if np.any(np.diag(d) != 0):
        raise ParameterError("dissimilarity matrix must have a zero diagonal")
    n = d.shape[0]
    coords = np.zeros((n, out_dim))
    if not np.any(d):
        return coords
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (d * d) @ j
    w, v = np.linalg.eigh(0.5 * (b + b.T))
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    keep = w > rtol * max(abs(w[0]), abs(w[-1]))
    if not keep[0]:
        raise EmbeddingError("no positive eigenvalue: dissimilarities are not embeddable")
    k = min(out_dim, int(np.sum(keep)))
    coords[:, :k] = v[:, :k] * np.sqrt(w[:k])
    for c in range(k):
        col = coords[:, c]
        if col[np.argmax(np.abs(col))] < 0:
            coords[:, c] = -col
    return coords


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def sigma_grid(r, k):
    """``R(2 pi k/10)^T diag(1, sqrt(r/10)) R(2 pi k/10)`` for ``r, k`` in ``1..10``."""
    for name, val in (("r", r), ("k", k)):
        if int(val) != val or not 1 <= val <= 10:
            raise ParameterError(f"{name} must be an integer in 1..10, got {val!r}")
    rot = rotation(2.0 * np.pi * k / 10.0)
    return SpdMatrix(rot.T @ np.diag([1.0, np.sqrt(r / 10.0)]) @ rot)


def ci_halfwidth(values):
    """95% normal-approximation halfwidth ``1.96 s / sqrt(R)``; zero for one value."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(1.96 * np.std(values, ddof=1) / np.sqrt(values.size))
