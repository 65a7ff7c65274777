"""Max-min packing of reference embeddings on the unit sphere.

Each iteration finds the closest pair of references, descends the cost

    cost = -d(x_i, x_j) + alpha * mean_k min_g d(x_k, x_g)

with Adam, and projects the moved points back onto the sphere. The full-batch
variant scans all points; the stochastic variant draws a mini-batch, finds the
closest pair inside it and only moves batch members.

Gradients are Euclidean: with ``d(a, b) = 1 - a.b`` the pair term contributes
``x_j`` to row ``i`` (and ``x_i`` to row ``j``), and each regularized row ``k``
receives ``-x_g*/|active|`` where ``x_g*`` is its nearest gallery point.
"""

import math
import time
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import _kernels
from .errors import (
    BatchTooSmall,
    DegenerateVector,
    DimensionMismatch,
    EmptyGallery,
    GalleryTooSmall,
    HyperpackError,
    NonFiniteGradient,
    TooFewPoints,
    TooManyBatches,
    UnstableSelection,
)
from .gallery import Gallery
from .optim import Adam, LrSchedule, lr_at
from .sphere import as_embedding_set, normalize_rows, random_units

MAX_ENUMERATED_BATCHES = 10**6


@dataclass(frozen=True)
class PackingConfig:
    n_id: int
    dim: int
    n_itr: int = 100_000
    alpha: float = 0.5
    schedule: LrSchedule = field(default_factory=LrSchedule)
    batch_size: int = 0  # 0 = full batch
    seed: int = 0
    reg_refresh_interval: int = 1
    reg_in_cost: bool = True

    def __post_init__(self):
        if self.n_id < 1:
            raise ValueError("n_id must be positive")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.n_itr < 0:
            raise ValueError("n_itr must be non-negative")
        if not self.alpha >= 0:
            raise ValueError("alpha must be >= 0")
        if self.batch_size < 0 or self.batch_size > self.n_id:
            raise ValueError(f"batch_size must be 0 or in [2, n_id={self.n_id}]")
        if self.batch_size == 1:
            raise BatchTooSmall("batch_size 1 has no pairs; use >= 2 or 0 for full batch")
        if self.reg_refresh_interval < 1:
            raise ValueError("reg_refresh_interval must be positive")


@dataclass
class TraceRecord:
    iteration: int
    min_i: int
    min_j: int
    min_distance: float
    reg_value: float
    lr: float
    wall_time_ms: float

    @property
    def min_pair(self):
        return (self.min_i, self.min_j)

    def to_json(self):
        return {
            "iter": self.iteration,
            "min_i": self.min_i,
            "min_j": self.min_j,
            "min_dist": self.min_distance,
            "reg": self.reg_value,
            "lr": self.lr,
            "ms": self.wall_time_ms,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            int(obj["iter"]),
            int(obj["min_i"]),
            int(obj["min_j"]),
            float(obj["min_dist"]),
            float(obj["reg"]),
            float(obj["lr"]),
            float(obj["ms"]),
        )


@dataclass(frozen=True)
class UniformRandom:
    pass


@dataclass(frozen=True)
class GallerySubset:
    gallery: Gallery


def _stream(seed, k):
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, k])


def init_references(config, source=None):
    """Initial references: uniform draws, or the first ``n_id`` gallery rows."""
    if source is None or isinstance(source, UniformRandom):
        return random_units(config.n_id, config.dim, _stream(config.seed, 0))
    if isinstance(source, GallerySubset):
        g = source.gallery
        if g.count < config.n_id:
            raise GalleryTooSmall(f"gallery has {g.count} points, need n_id={config.n_id}")
        if g.dim != config.dim:
            raise DimensionMismatch(f"gallery dim {g.dim} != config dim {config.dim}")
        return np.array(g.points[: config.n_id], dtype=np.float64)
    raise TypeError(f"unknown init source {source!r}")


def regularization_term(refs, gallery, active=None):
    """Mean nearest-gallery distance over ``active`` rows and its gradient.

    Returns ``(value, grads, nearest_idx)`` where ``grads`` has one row per
    active point. The gallery is treated as constant.
    """
    if gallery is None:
        raise EmptyGallery("regularization needs a non-empty gallery")
    X = refs if active is None else refs[np.asarray(active)]
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.shape[1] != gallery.dim:
        raise DimensionMismatch(f"refs dim {X.shape[1]} != gallery dim {gallery.dim}")
    idx, dist = _kernels.nearest(X, gallery.points)
    m = X.shape[0]
    return float(np.sum(dist)) / m, -gallery.points[idx] / m, idx


class _RegCache:
    """Nearest-gallery assignments, refreshed every ``interval`` iterations."""

    def __init__(self, gallery, n, interval):
        self.gallery = gallery
        self.interval = interval
        self.assign = np.full(n, -1, dtype=np.int64)

    def evaluate(self, X, rows, t):
        """Reg value and per-row gradients for ``X`` (the rows ``rows`` of refs)."""
        G = self.gallery.points
        m = X.shape[0]
        if self.interval == 1:
            idx, dist = _kernels.nearest(X, G)
            self.assign[rows] = idx
        else:
            idx = self.assign[rows]
            stale = idx < 0 if t % self.interval else np.ones(m, dtype=bool)
            if stale.any():
                fresh, _ = _kernels.nearest(np.ascontiguousarray(X[stale]), G)
                idx[stale] = fresh
                self.assign[rows] = idx
            dist = np.clip(1.0 - np.einsum("ij,ij->i", X, G[idx]), 0.0, 2.0)
        return float(np.sum(dist)) / m, -G[idx] / m


def _pair_gradient(X, i, j):
    grads = np.zeros_like(X)
    grads[i] = X[j]
    grads[j] = X[i]
    return grads


class PackingRun:
    """Mutable optimization state: references, Adam moments and RNG streams."""

    def __init__(self, config, gallery=None, refs=None, init=None):
        self.config = config
        if config.alpha > 0 and gallery is None:
            raise EmptyGallery("alpha > 0 needs a gallery")
        if gallery is not None and gallery.dim != config.dim:
            raise DimensionMismatch(f"gallery dim {gallery.dim} != config dim {config.dim}")
        if config.n_id < 2:
            raise TooFewPoints("packing needs at least two references")
        if refs is None:
            refs = init_references(config, init)
        refs = np.array(as_embedding_set(refs), dtype=np.float64)
        if refs.shape != (config.n_id, config.dim):
            raise DimensionMismatch(
                f"references have shape {refs.shape}, config wants ({config.n_id}, {config.dim})"
            )
        self.refs = refs
        self.gallery = gallery
        self.opt = Adam(refs.shape)
        self.rng = _stream(config.seed, 1)
        self.reg = None if gallery is None else _RegCache(gallery, config.n_id, config.reg_refresh_interval)
        self._all_rows = np.arange(config.n_id)
        self.t = 0

    def _descend(self, X, li, lj, batch, t):
        """Gradient, Adam step and re-projection; ``batch=None`` means every row."""
        cfg = self.config
        grads = _pair_gradient(X, li, lj)
        reg_value = 0.0
        if self.reg is not None:
            rows = self._all_rows if batch is None else batch
            reg_value, reg_grads = self.reg.evaluate(X, rows, t)
            if cfg.alpha > 0 and cfg.reg_in_cost:
                grads += cfg.alpha * reg_grads
        lr = lr_at(cfg.schedule, t)
        try:
            if batch is None:
                self.opt.step(self.refs, grads, lr)
                self.refs = normalize_rows(self.refs)
            else:
                self.opt.step(self.refs, grads, lr, rows=batch)
                self.refs[batch] = normalize_rows(self.refs[batch])
        except (NonFiniteGradient, DegenerateVector) as exc:
            raise type(exc)(f"iteration {t}: {exc}") from exc
        return reg_value, lr

    def full_batch_step(self):
        t = self.t
        start = time.perf_counter()
        i, j, d = _kernels.min_pair(self.refs)
        reg_value, lr = self._descend(self.refs, i, j, None, t)
        self.t += 1
        return TraceRecord(t, i, j, d, reg_value, lr, (time.perf_counter() - start) * 1e3)

    def stochastic_step(self):
        b = self.config.batch_size
        if b < 2:
            raise BatchTooSmall(f"batch size {b} < 2")
        t = self.t
        start = time.perf_counter()
        # uniform without replacement; sorted so ties resolve on global indices
        batch = np.sort(self.rng.permutation(self.config.n_id)[:b])
        Xb = self.refs[batch]
        li, lj, d = _kernels.min_pair(Xb)
        reg_value, lr = self._descend(Xb, li, lj, batch, t)
        self.t += 1
        ms = (time.perf_counter() - start) * 1e3
        return TraceRecord(t, int(batch[li]), int(batch[lj]), d, reg_value, lr, ms)

    def step(self):
        if self.config.batch_size == 0:
            return self.full_batch_step()
        return self.stochastic_step()

    def run(self, n_itr=None, callback=None):
        n_itr = self.config.n_itr if n_itr is None else n_itr
        trace = []
        for _ in range(n_itr):
            rec = self.step()
            trace.append(rec)
            if callback is not None:
                callback(rec)
        return trace


def optimize(config, gallery=None, init=None, refs=None, callback=None):
    """Run ``config.n_itr`` packing iterations; returns ``(refs, trace)``.

    ``init`` is :class:`UniformRandom` (default) or :class:`GallerySubset`;
    ``refs`` supplies explicit starting points instead.
    """
    run = PackingRun(config, gallery, refs=refs, init=init)
    trace = run.run(callback=callback)
    return run.refs, trace


# ------------------------------------------------------------ verification


def neg_cosine_pair_grad(xi, xj):
    """Gradient of ``l(xi, xj) = -(1 - xi.xj)`` with respect to both arguments."""
    return xj, xi


def _mean_pair_gradient(X, members, pair_grad):
    grads = np.zeros_like(X)
    members = list(members)
    for a, b in combinations(members, 2):
        gi, gj = pair_grad(X[a], X[b])
        grads[a] += gi
        grads[b] += gj
    k = len(members)
    return grads / (k * (k - 1) / 2)


def verify_unbiasedness(refs, b, pair_grad=neg_cosine_pair_grad):
    """Compare the full mean-pairwise gradient with the average over every batch.

    The objective is ``L(X) = mean over pairs i<j of l(x_i, x_j)``; a batch
    gradient uses the same form restricted to the batch. All ``C(n, b)``
    batches are enumerated. Returns ``(full_grad, mean_batch_grad, max_abs_diff)``.
    """
    X = np.asarray(refs, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise TooFewPoints("need at least two points")
    if not 2 <= b <= n:
        raise BatchTooSmall(f"batch size must be in [2, {n}], got {b}")
    n_batches = math.comb(n, b)
    if n_batches > MAX_ENUMERATED_BATCHES:
        raise TooManyBatches(f"C({n}, {b}) = {n_batches} batches exceeds {MAX_ENUMERATED_BATCHES}")
    full = _mean_pair_gradient(X, range(n), pair_grad)
    total = np.zeros_like(X)
    for batch in combinations(range(n), b):
        total += _mean_pair_gradient(X, batch, pair_grad)
    mean = total / n_batches
    return full, mean, float(np.max(np.abs(full - mean)))


def cost_gradient(refs, gallery=None, alpha=0.0):
    """Analytic gradient of ``-d(min pair) + alpha * Reg`` over all rows.

    Returns ``(grads, (i, j), nearest_idx)``; this is the gradient the
    full-batch step feeds to Adam.
    """
    X = np.ascontiguousarray(refs, dtype=np.float64)
    i, j, _ = _kernels.min_pair(X)
    grads = _pair_gradient(X, i, j)
    idx = None
    if gallery is not None and alpha > 0:
        _, reg_grads, idx = regularization_term(X, gallery)
        grads += alpha * reg_grads
    return grads, (i, j), idx


def _cost_and_selection(X, gallery, alpha):
    i, j, _ = _kernels.min_pair(X)
    cost = float(X[i] @ X[j]) - 1.0
    idx = None
    if gallery is not None and alpha > 0:
        idx, _ = _kernels.nearest(X, gallery.points)
        # unclamped distances keep the cost smooth under the probe
        cost += alpha * float(np.mean(1.0 - np.einsum("ij,ij->i", X, gallery.points[idx])))
    return cost, (i, j), idx


def check_gradient(refs, gallery=None, alpha=0.0, h=1e-6, floor=1e-3):
    """Max relative error between analytic and central-difference gradients.

    The relative error of a component is ``|a - f| / max(|a|, |f|, floor)``;
    ``floor`` keeps near-zero components from dividing by rounding noise.
    Raises UnstableSelection if any probe changes the min pair or a
    nearest-gallery assignment.
    """
    X = np.array(refs, dtype=np.float64)
    if X.shape[0] < 2:
        raise TooFewPoints("need at least two points")
    analytic, pair, idx = cost_gradient(X, gallery, alpha)
    numeric = np.zeros_like(X)
    for r in range(X.shape[0]):
        for c in range(X.shape[1]):
            orig = X[r, c]
            values = []
            for delta in (h, -h):
                X[r, c] = orig + delta
                cost, p, nidx = _cost_and_selection(X, gallery, alpha)
                if p != pair or (idx is not None and not np.array_equal(nidx, idx)):
                    X[r, c] = orig
                    raise UnstableSelection(f"selection changed when probing ({r}, {c})")
                values.append(cost)
            X[r, c] = orig
            numeric[r, c] = (values[0] - values[1]) / (2 * h)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))


__all__ = [
    "GallerySubset",
    "HyperpackError",
    "PackingConfig",
    "PackingRun",
    "TraceRecord",
    "UniformRandom",
    "check_gradient",
    "cost_gradient",
    "init_references",
    "optimize",
    "regularization_term",
    "verify_unbiasedness",
]
