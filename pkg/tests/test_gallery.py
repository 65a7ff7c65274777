import math

import numpy as np
import pytest

from hyperpack.errors import DimensionMismatch, EmptyGallery
from hyperpack.gallery import (
    Gallery,
    ManifoldSpec,
    nearest_gallery,
    synthesize_gallery,
    validate_gallery,
)
from hyperpack.sphere import random_units

from conftest import brute_nearest, unit


def basis(dim, k):
    v = np.zeros(dim)
    v[k] = 1
    return v


def test_nearest_gallery_examples():
    G = random_units(6, 5, np.random.default_rng(1))
    g = Gallery(G, "test")
    assert nearest_gallery(G[3], g) == (3, 0.0)
    g2 = Gallery(np.stack([basis(4, 0), basis(4, 1)]))
    idx, d = nearest_gallery(unit([0.9, 0.1, 0, 0]), g2)
    assert idx == 0
    assert d == pytest.approx(1 - 0.9 / math.sqrt(0.82), abs=1e-15)


def test_nearest_gallery_errors():
    with pytest.raises(EmptyGallery):
        nearest_gallery(basis(3, 0), None)
    with pytest.raises(DimensionMismatch):
        nearest_gallery(basis(4, 0), Gallery(np.eye(3)))


def test_nearest_gallery_matches_naive_scan():
    rng = np.random.default_rng(3)
    g = Gallery(random_units(40, 7, rng))
    for x in random_units(25, 7, rng):
        idx, d = nearest_gallery(x, g)
        bi, bd = brute_nearest(x, g.points)
        assert idx == bi
        assert d == pytest.approx(bd, abs=1e-12)


def test_gallery_is_immutable():
    g = Gallery(np.eye(3))
    with pytest.raises(ValueError):
        g.points[0, 0] = 5.0


def test_synthesize_zero_concentration_returns_centers():
    g = synthesize_gallery(ManifoldSpec(dim=6, n_points=9, n_clusters=3, concentration=0.0, seed=2))
    for p in range(9):
        np.testing.assert_array_equal(g.points[p], g.points[p % 3])


def test_synthesize_tiny_concentration_is_near_centers():
    g = synthesize_gallery(ManifoldSpec(dim=6, n_points=9, n_clusters=3, concentration=1e-9, seed=2))
    for p in range(9):
        np.testing.assert_allclose(g.points[p], g.points[p % 3], atol=1e-7)


def test_synthesize_deterministic():
    spec = ManifoldSpec(dim=16, n_points=50, n_clusters=4, concentration=0.1, seed=9)
    a, b = synthesize_gallery(spec), synthesize_gallery(spec)
    np.testing.assert_array_equal(a.points, b.points)
    assert a.source_label == b.source_label


@pytest.mark.parametrize("seed", range(5))
def test_single_cap_is_a_proper_subset(seed):
    g = synthesize_gallery(ManifoldSpec(dim=16, n_points=200, n_clusters=1, concentration=0.05, seed=seed))
    D = np.clip(1 - g.points @ g.points.T, 0, 2)
    # two uniform points sit at cosine distance 1 on average
    assert D.max() < 0.5


@pytest.mark.parametrize(
    "spec",
    [
        ManifoldSpec(dim=2, n_points=1),
        ManifoldSpec(dim=8, n_points=30, n_clusters=30, concentration=2.0, seed=1),
        ManifoldSpec(dim=64, n_points=100, n_clusters=5, concentration=0.01, seed=4),
    ],
)
def test_synthesized_galleries_validate(spec):
    assert validate_gallery(synthesize_gallery(spec)).ok


def test_validate_gallery_reports_bad_rows():
    X = random_units(5, 4, np.random.default_rng(0))
    assert validate_gallery(X).ok
    X[2] = 0.0
    rep = validate_gallery(X)
    assert not rep.ok and rep.off_sphere == [2]
    X = random_units(5, 4, np.random.default_rng(0))
    X[4, 1] = np.nan
    rep = validate_gallery(X)
    assert not rep.ok and rep.non_finite == [4]


def test_manifold_spec_validation():
    with pytest.raises(ValueError):
        ManifoldSpec(dim=4, n_points=3, n_clusters=4)
