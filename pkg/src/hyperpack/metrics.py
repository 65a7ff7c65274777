"""Packing-quality statistics and reference optima."""

import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import TooFewPoints
from .gallery import nearest_gallery_rows
from .sphere import pairwise_min

# max-min cosine distance for (dim, n) pairs that are not regular simplices
_TAMMES_S2 = {
    6: 1.0,  # octahedron, neighbours orthogonal
    12: 1.0 - 1.0 / math.sqrt(5.0),  # icosahedron, neighbour dot 1/sqrt(5)
}


@dataclass
class PackingReport:
    n: int
    dim: int
    min_dist: float
    mean_dist: float
    p5_dist: float
    mean_nearest_gallery: float | None = None
    simplex_bound: float | None = None
    known_optimum: float | None = None
    relative_gap: float | None = None

    def to_json(self):
        return asdict(self)


def simplex_optimum(n, dim):
    """Regular-simplex max-min distance ``n / (n - 1)`` when ``n <= dim + 1``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if n <= dim + 1:
        return n / (n - 1)
    return None


def known_optima_lookup(n, dim):
    """Tabulated max-min cosine distance for ``n`` points in ``dim`` dims, or None.

    Covers every simplex case plus the octahedron and icosahedron on S^2.
    Nothing is interpolated.
    """
    if n < 2 or dim < 2:
        return None
    s = simplex_optimum(n, dim)
    if s is not None:
        return s
    if dim == 3:
        return _TAMMES_S2.get(n)
    return None


def _pair_distances(X):
    n = X.shape[0]
    out = np.empty(n * (n - 1) // 2)
    pos = 0
    for i in range(n - 1):
        row = np.clip(1.0 - X[i + 1 :] @ X[i], 0.0, 2.0)
        for c in np.flatnonzero(row < _kernels.CLOSE_DIST):
            row[c] = _kernels.half_sq(X[i], X[i + 1 + c])
        out[pos : pos + row.size] = row
        pos += row.size
    return out


def packing_report(refs, gallery=None):
    X = np.ascontiguousarray(refs, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TooFewPoints("packing_report needs at least two points")
    n, dim = X.shape
    _, _, min_dist = pairwise_min(X)
    d = _pair_distances(X)
    rank = math.ceil(0.05 * d.size)
    p5 = float(np.partition(d, rank - 1)[rank - 1])
    report = PackingReport(n, dim, min_dist, float(np.mean(d)), p5)
    if gallery is not None:
        _, gd = nearest_gallery_rows(X, gallery)
        report.mean_nearest_gallery = float(np.mean(gd))
    report.simplex_bound = simplex_optimum(n, dim)
    report.known_optimum = known_optima_lookup(n, dim)
    if report.known_optimum is not None:
        report.relative_gap = (report.known_optimum - min_dist) / report.known_optimum
    return report


@dataclass
class RunSummary:
    label: str
    iterations: int
    final_min_dist: float
    final_reg: float
    wall_ms: float


def compare_runs(paths, labels=None):
    """One summary row per trace file, sorted by label (file stem by default)."""
    from .io import read_trace

    rows = []
    for k, p in enumerate(paths):
        trace = read_trace(p)
        label = labels[k] if labels else Path(p).stem
        last = trace[-1]
        rows.append(
            RunSummary(
                label,
                len(trace),
                last.min_distance,
                last.reg_value,
                float(sum(r.wall_time_ms for r in trace)),
            )
        )
    rows.sort(key=lambda r: r.label)
    return rows


def format_table(rows):
    header = ("label", "iters", "min_dist", "reg", "wall_ms")
    body = [
        (r.label, str(r.iterations), f"{r.final_min_dist:.6f}", f"{r.final_reg:.6f}", f"{r.wall_ms:.1f}")
        for r in rows
    ]
    widths = [max(len(c) for c in col) for col in zip(header, *body)]
    lines = []
    for cells in [header, *body]:
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        lines.append("  ".join([first, *rest]))
    return "\n".join(lines)
