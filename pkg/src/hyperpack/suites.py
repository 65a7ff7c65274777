"""Batch verification runs used by the CLI and the acceptance tests."""

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import UnstableSelection
from .gallery import Gallery
from .metrics import known_optima_lookup
from .packing import PackingConfig, check_gradient, optimize, verify_unbiasedness
from .sphere import pairwise_min, random_units

TAMMES_S2_CASES = ((6, 3), (12, 3))


def simplex_cases(max_dim=9):
    return [(n, dim) for dim in range(2, max_dim + 1) for n in range(2, dim + 2)]


@dataclass
class TammesRow:
    n: int
    dim: int
    iters: int
    target: float
    achieved: float
    seconds: float

    @property
    def ratio(self):
        return self.achieved / self.target


def run_tammes_case(n, dim, iters, seed=0):
    target = known_optima_lookup(n, dim)
    if target is None:
        raise ValueError(f"no tabulated optimum for n={n}, dim={dim}")
    start = time.perf_counter()
    refs, _ = optimize(PackingConfig(n_id=n, dim=dim, n_itr=iters, alpha=0.0, seed=seed))
    return TammesRow(n, dim, iters, target, pairwise_min(refs)[2], time.perf_counter() - start)


def tammes_suite(max_dim=9, simplex_iters=20_000, s2_iters=50_000, seed=0):
    rows = [run_tammes_case(n, d, simplex_iters, seed) for n, d in simplex_cases(max_dim)]
    rows += [run_tammes_case(n, d, s2_iters, seed) for n, d in TAMMES_S2_CASES]
    return rows


def unbiasedness_sweep(max_n=8, dim=5, seed=0):
    """``(n, b, n_batches, max_abs_diff)`` for every ``2 <= b <= n <= max_n``."""
    rng = np.random.default_rng(seed)
    rows = []
    for n in range(2, max_n + 1):
        X = random_units(n, dim, rng)
        for b in range(2, n + 1):
            _, _, diff = verify_unbiasedness(X, b)
            rows.append((n, b, math.comb(n, b), diff))
    return rows


def gradient_suite(trials=50, seed=0, max_attempts=20):
    """Max relative gradient error for ``trials`` random stable configurations.

    Alternates ``alpha = 0`` and ``alpha = 0.5`` (with an 8-point gallery).
    A configuration whose selection flips under the probe is redrawn, at most
    ``max_attempts`` times per trial.
    """
    rng = np.random.default_rng(seed)
    errors = []
    for k in range(trials):
        alpha = 0.0 if k % 2 == 0 else 0.5
        for _ in range(max_attempts):
            n = int(rng.integers(2, 9))
            dim = int(rng.integers(3, 9))
            X = random_units(n, dim, rng)
            gallery = Gallery(random_units(8, dim, rng), "random") if alpha > 0 else None
            try:
                errors.append(check_gradient(X, gallery, alpha))
                break
            except UnstableSelection:
                continue
        else:
            raise UnstableSelection(f"trial {k}: no stable configuration in {max_attempts} draws")
    return errors
