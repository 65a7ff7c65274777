"""Gallery embeddings that stand in for the face-embedding manifold."""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, EmptyGallery
from .sphere import UNIT_TOL, as_embedding_set, normalize_rows, random_units


@dataclass(frozen=True)
class Gallery:
    """Immutable set of unit embeddings plus a provenance label."""

    points: np.ndarray
    source_label: str = ""

    def __post_init__(self):
        pts = as_embedding_set(self.points)
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def count(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class ManifoldSpec:
    """Clustered stand-in manifold: Gaussian blobs around uniform centers.

    ``concentration`` is the standard deviation of the isotropic noise added
    to each cluster center before re-projection, so smaller means tighter caps.
    """

    dim: int
    n_points: int
    n_clusters: int = 1
    concentration: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if not 1 <= self.n_clusters <= self.n_points:
            raise ValueError("need 1 <= n_clusters <= n_points")
        if self.concentration < 0:
            raise ValueError("concentration must be non-negative")

    def label(self):
        return (
            f"synth:dim={self.dim},points={self.n_points},clusters={self.n_clusters},"
            f"concentration={self.concentration!r},seed={self.seed}"
        )


def synthesize_gallery(spec):
    rng = np.random.default_rng(spec.seed)
    centers = random_units(spec.n_clusters, spec.dim, rng)
    owner = np.arange(spec.n_points) % spec.n_clusters
    noise = rng.standard_normal((spec.n_points, spec.dim))
    if spec.concentration == 0:
        points = centers[owner]
    else:
        points = normalize_rows(centers[owner] + spec.concentration * noise)
    return Gallery(points, spec.label())


def nearest_gallery(x, gallery):
    """Nearest gallery entry to ``x`` as ``(index, distance)``; ties -> smallest index."""
    if gallery is None or gallery.count == 0:
        raise EmptyGallery("gallery is empty")
    x = np.ascontiguousarray(x, dtype=np.float64).reshape(1, -1)
    if x.shape[1] != gallery.dim:
        raise DimensionMismatch(f"query dim {x.shape[1]} != gallery dim {gallery.dim}")
    idx, dist = _kernels.nearest(x, gallery.points)
    return int(idx[0]), float(dist[0])


def nearest_gallery_rows(X, gallery):
    """Vectorized :func:`nearest_gallery` over the rows of ``X``."""
    if gallery is None or gallery.count == 0:
        raise EmptyGallery("gallery is empty")
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.shape[1] != gallery.dim:
        raise DimensionMismatch(f"query dim {X.shape[1]} != gallery dim {gallery.dim}")
    return _kernels.nearest(X, gallery.points)


@dataclass
class GalleryReport:
    ok: bool
    count: int
    dim: int
    non_finite: list = field(default_factory=list)
    off_sphere: list = field(default_factory=list)
    max_norm_deviation: float = 0.0


def validate_gallery(points, tol=UNIT_TOL):
    """Check raw gallery rows without raising.

    Accepts a :class:`Gallery` or any 2-D array, so files can be vetted before
    a :class:`Gallery` is built from them.
    """
    if isinstance(points, Gallery):
        points = points.points
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        return GalleryReport(False, 0 if X.ndim != 2 else X.shape[0], X.shape[-1] if X.ndim else 0)
    finite = np.all(np.isfinite(X), axis=1)
    norms = np.linalg.norm(np.where(np.isfinite(X), X, 0.0), axis=1)
    dev = np.abs(norms - 1.0)
    off = np.flatnonzero(finite & (dev > tol))
    non_finite = np.flatnonzero(~finite)
    max_dev = float(dev[finite].max()) if finite.any() else float("nan")
    ok = X.shape[1] >= 2 and not off.size and not non_finite.size
    return GalleryReport(
        ok=bool(ok),
        count=X.shape[0],
        dim=X.shape[1],
        non_finite=non_finite.tolist(),
        off_sphere=off.tolist(),
        max_norm_deviation=max_dev,
    )
