"""Hot scan kernels: closest pair and nearest-gallery search.

Two interchangeable backends live here. Both take dot products from blocked
matrix products; the numba backend scans each block in a compiled loop while
the numpy backend uses array operations (clip, mask, argmin). The backend is
chosen once at import time:

* ``HYPERPACK_NUMBA=0`` forces the numpy path,
* otherwise numba is used when importable.

``HYPERPACK_THREADS`` caps numba worker threads (0 or unset means auto).

Distances are ``1 - a.b`` clamped to ``[0, 2]``. Below ``CLOSE_DIST`` the
equivalent ``0.5 * |a - b|^2`` is used, which is exact for duplicated points.

Both backends return the lexicographically smallest ``(i, j)`` among tied
minima and are deterministic run to run.
"""

import os

import numpy as np

_BLOCK_ROWS = 256
# below this, 1 - a.b is dominated by rounding; use 0.5 * |a - b|^2 instead.
# The margin also covers rows read back from float32 storage, whose norms are
# off by up to ~1e-7, so a duplicated stored row still measures exactly 0.
CLOSE_DIST = 1e-6
# below this many rows the prange launch costs more than it saves
PARALLEL_MIN_ROWS = 512


def _env_flag(name, default):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    return raw.strip().lower() not in ("0", "false", "no", "off")


try:
    import numba
    from numba import njit, prange
except ImportError:
    numba = None

HAS_NUMBA = numba is not None
if HAS_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is too old for numba and warns on every parallel launch
    numba.config.THREADING_LAYER = "workqueue"
BACKEND = "numba" if HAS_NUMBA and _env_flag("HYPERPACK_NUMBA", True) else "numpy"


def _configure_threads():
    raw = os.environ.get("HYPERPACK_THREADS", "0").strip() or "0"
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if numba is not None and cap > 0:
        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------- numpy path


def half_sq(a, b):
    """``0.5 * |a - b|^2`` summed left to right, matching the compiled scan."""
    q = 0.0
    for t in (a - b).tolist():
        q += t * t
    return 0.5 * q


def _refine_close(dist, A, B, row0=0, col0=0):
    rr, cc = np.nonzero(dist < CLOSE_DIST)
    for r, c in zip(rr, cc):
        dist[r, c] = half_sq(A[row0 + r], B[col0 + c])


def _min_pair_numpy(X):
    n = X.shape[0]
    best = np.inf
    bi, bj = 0, 1
    for r0 in range(0, n - 1, _BLOCK_ROWS):
        r1 = min(r0 + _BLOCK_ROWS, n - 1)
        dots = X[r0:r1] @ X[r0:].T
        dist = np.clip(1.0 - dots, 0.0, 2.0)
        _refine_close(dist, X, X, r0, r0)
        # keep only columns strictly right of the diagonal
        rows = np.arange(r1 - r0)[:, None]
        cols = np.arange(n - r0)[None, :]
        dist[cols <= rows] = np.inf
        flat = int(np.argmin(dist))
        li, lj = divmod(flat, dist.shape[1])
        d = dist[li, lj]
        if d < best:
            best = float(d)
            bi, bj = r0 + li, r0 + lj
    return bi, bj, best


def _nearest_numpy(X, G):
    m = X.shape[0]
    idx = np.empty(m, dtype=np.int64)
    dist = np.empty(m, dtype=np.float64)
    for r0 in range(0, m, _BLOCK_ROWS):
        r1 = min(r0 + _BLOCK_ROWS, m)
        d = np.clip(1.0 - X[r0:r1] @ G.T, 0.0, 2.0)
        _refine_close(d, X, G, r0, 0)
        k = np.argmin(d, axis=1)
        idx[r0:r1] = k
        dist[r0:r1] = d[np.arange(r1 - r0), k]
    return idx, dist


# ---------------------------------------------------------------- numba path
#
# Dot products always come from BLAS in row blocks; the compiled part is the
# scan over each block (clamp, close-pair refinement, running argmin). A
# scalar dot loop in numba cannot be vectorized without reassociating the sum,
# and BLAS wins by a wide margin at every size we care about.

if numba is not None:

    # The common path stays inline in each scan: calling a helper with array
    # arguments per element costs a reference-count round trip every time.

    @njit(cache=True)
    def _half_sq(A, i, B, j):
        q = 0.0
        for k in range(A.shape[1]):
            t = A[i, k] - B[j, k]
            q += t * t
        return 0.5 * q

    @njit(cache=True)
    def _scan_pairs_seq(dots, X, r0, out_best, out_arg):
        for li in range(dots.shape[0]):
            i = r0 + li
            b = np.inf
            a = i + 1
            for j in range(i + 1, X.shape[0]):
                d = 1.0 - dots[li, j - r0]
                if d < CLOSE_DIST:
                    d = _half_sq(X, i, X, j)
                d = min(max(d, 0.0), 2.0)
                if d < b:
                    b = d
                    a = j
            out_best[i] = b
            out_arg[i] = a

    @njit(cache=True, parallel=True)
    def _scan_pairs_par(dots, X, r0, out_best, out_arg):
        for li in prange(dots.shape[0]):
            i = r0 + li
            b = np.inf
            a = i + 1
            for j in range(i + 1, X.shape[0]):
                d = 1.0 - dots[li, j - r0]
                if d < CLOSE_DIST:
                    d = _half_sq(X, i, X, j)
                d = min(max(d, 0.0), 2.0)
                if d < b:
                    b = d
                    a = j
            out_best[i] = b
            out_arg[i] = a

    @njit(cache=True)
    def _scan_nearest_seq(dots, X, r0, G, idx, dist):
        for li in range(dots.shape[0]):
            b = np.inf
            a = 0
            for g in range(G.shape[0]):
                d = 1.0 - dots[li, g]
                if d < CLOSE_DIST:
                    d = _half_sq(X, r0 + li, G, g)
                d = min(max(d, 0.0), 2.0)
                if d < b:
                    b = d
                    a = g
            idx[r0 + li] = a
            dist[r0 + li] = b

    @njit(cache=True, parallel=True)
    def _scan_nearest_par(dots, X, r0, G, idx, dist):
        for li in prange(dots.shape[0]):
            b = np.inf
            a = 0
            for g in range(G.shape[0]):
                d = 1.0 - dots[li, g]
                if d < CLOSE_DIST:
                    d = _half_sq(X, r0 + li, G, g)
                d = min(max(d, 0.0), 2.0)
                if d < b:
                    b = d
                    a = g
            idx[r0 + li] = a
            dist[r0 + li] = b

    _configure_threads()


def _min_pair_numba(X, parallel):
    n = X.shape[0]
    row_best = np.empty(n - 1)
    row_arg = np.empty(n - 1, dtype=np.int64)
    scan = _scan_pairs_par if parallel else _scan_pairs_seq
    for r0 in range(0, n - 1, _BLOCK_ROWS):
        r1 = min(r0 + _BLOCK_ROWS, n - 1)
        scan(X[r0:r1] @ X[r0:].T, X, r0, row_best, row_arg)
    # fixed-order reduction: first row wins ties, as in a plain double loop
    i = int(np.argmin(row_best))
    return i, int(row_arg[i]), float(row_best[i])


def _nearest_numba(X, G, parallel):
    m = X.shape[0]
    idx = np.empty(m, dtype=np.int64)
    dist = np.empty(m)
    scan = _scan_nearest_par if parallel else _scan_nearest_seq
    for r0 in range(0, m, _BLOCK_ROWS):
        r1 = min(r0 + _BLOCK_ROWS, m)
        scan(X[r0:r1] @ G.T, X, r0, G, idx, dist)
    return idx, dist


def min_pair(X, backend=None):
    """Closest pair ``(i, j, d)`` with ``i < j`` over the rows of ``X``.

    ``X`` must be a C-contiguous float64 array with at least two rows.
    ``backend`` overrides the import-time choice (used by tests and benchmarks).
    """
    if (backend or BACKEND) == "numba":
        return _min_pair_numba(X, X.shape[0] >= PARALLEL_MIN_ROWS)
    return _min_pair_numpy(X)


def nearest(X, G, backend=None):
    """Index and distance of the nearest row of ``G`` for every row of ``X``."""
    if (backend or BACKEND) == "numba":
        return _nearest_numba(X, G, X.shape[0] * G.shape[0] >= PARALLEL_MIN_ROWS * PARALLEL_MIN_ROWS)
    return _nearest_numpy(X, G)
