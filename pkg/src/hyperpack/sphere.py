"""Unit-sphere primitives: normalization, cosine distance, closest pair, sampling.

Embeddings are plain numpy arrays. A single point is a 1-D float64 array of
unit norm; a set of points is a 2-D ``(count, dim)`` float64 array whose rows
are unit vectors and whose row index is the point's identifier.
"""

import numpy as np

from . import _kernels
from .errors import DegenerateVector, DimensionMismatch, TooFewPoints

EPS_NORM = 1e-12
UNIT_TOL = 1e-6


def normalize(v, eps=EPS_NORM):
    """Return ``v / ||v||``.

    Raises DegenerateVector when ``||v|| <= eps``; a zero-length point has no
    direction and must never be silently replaced.
    """
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v)
    if not norm > eps:
        raise DegenerateVector(f"cannot normalize vector with norm {norm:.3g}")
    return v / norm


def normalize_rows(X, eps=EPS_NORM):
    """Row-wise :func:`normalize`; raises on the first degenerate row."""
    X = np.asarray(X, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(~(norms > eps))
    if bad.size:
        raise DegenerateVector(
            f"row {int(bad[0])} has norm {norms[bad[0]]:.3g} (<= {eps:g})"
        )
    return X / norms[:, None]


def cosine_distance(a, b):
    """``1 - a.b`` for unit vectors, clamped to ``[0, 2]``.

    Near-coincident points switch to ``0.5 * |a - b|^2`` (equal for unit
    vectors), so identical inputs give exactly 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dims differ: {a.shape} vs {b.shape}")
    # elementwise products commute, so a.b and b.a sum identical terms
    d = 1.0 - float(np.sum(a * b))
    if d < _kernels.CLOSE_DIST:
        d = _kernels.half_sq(a, b)
    return min(max(d, 0.0), 2.0)


def as_embedding_set(X, tol=UNIT_TOL):
    """Validate ``X`` as an embedding set and return it as contiguous float64.

    Checks shape ``(count >= 1, dim >= 2)``, finiteness and unit norms within
    ``tol``. The input is not modified.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise TooFewPoints(f"expected a non-empty (count, dim) array, got shape {X.shape}")
    if X.shape[1] < 2:
        raise DimensionMismatch(f"embedding dim must be >= 2, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise DegenerateVector("embedding set contains non-finite values")
    dev = np.abs(np.linalg.norm(X, axis=1) - 1.0)
    if dev.max() > tol:
        k = int(np.argmax(dev))
        raise DegenerateVector(f"row {k} is off the unit sphere by {dev[k]:.3g}")
    return X


def pairwise_min(X):
    """Closest pair of rows as ``(i, j, d)`` with ``i < j``.

    Ties go to the lexicographically smallest ``(i, j)``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TooFewPoints("pairwise_min needs at least two points")
    return _kernels.min_pair(X)


def random_unit(dim, rng):
    """Uniform direction on the sphere: standard normal draw, then normalize."""
    if dim < 2:
        raise DimensionMismatch(f"dim must be >= 2, got {dim}")
    return normalize(rng.standard_normal(dim))


def random_units(count, dim, rng):
    """``count`` independent :func:`random_unit` draws stacked row-wise.

    Consumes the generator exactly as ``count`` sequential calls would.
    """
    if dim < 2:
        raise DimensionMismatch(f"dim must be >= 2, got {dim}")
    return normalize_rows(rng.standard_normal((count, dim)))
