import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hyperpack.errors import DegenerateVector, DimensionMismatch, TooFewPoints
from hyperpack.sphere import (
    as_embedding_set,
    cosine_distance,
    normalize,
    pairwise_min,
    random_unit,
    random_units,
)

from conftest import brute_min_pair, unit

# tiny components are flushed to zero: scaling a subnormal by 2**k drops bits
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False).map(
    lambda x: 0.0 if abs(x) < 1e-200 else x
)
vectors = arrays(np.float64, st.integers(2, 16), elements=finite).filter(
    lambda v: np.linalg.norm(v) > 1e-6
)


def e(k, dim=3):
    v = np.zeros(dim)
    v[k] = 1.0
    return v


def test_normalize_examples():
    np.testing.assert_allclose(normalize([3, 4]), [0.6, 0.8], atol=1e-15)
    np.testing.assert_array_equal(normalize([1, 0, 0]), [1, 0, 0])
    with pytest.raises(DegenerateVector):
        normalize([0, 0])


def test_normalize_threshold_is_configurable():
    with pytest.raises(DegenerateVector):
        normalize([1e-9, 0], eps=1e-6)
    np.testing.assert_array_equal(normalize([1e-9, 0], eps=1e-12), [1.0, 0.0])


@given(vectors)
def test_normalize_gives_unit_norm(v):
    assert abs(np.linalg.norm(normalize(v)) - 1.0) <= 1e-6


@given(vectors, st.integers(-20, 20))
def test_normalize_power_of_two_scaling_is_bitwise(v, k):
    np.testing.assert_array_equal(normalize(v * 2.0**k), normalize(v))


@given(vectors, st.floats(1e-3, 1e3))
def test_normalize_general_scaling_within_rounding(v, s):
    # s * v rounds, so only a few ulps of agreement are possible for arbitrary s
    np.testing.assert_allclose(normalize(s * v), normalize(v), rtol=0, atol=4 * np.finfo(float).eps)


def test_cosine_distance_examples():
    assert cosine_distance(e(0), e(0)) == 0.0
    assert cosine_distance(e(0), -e(0)) == 2.0
    assert cosine_distance(e(0), e(1)) == 1.0


def test_cosine_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        cosine_distance(e(0, 3), e(0, 4))


@given(vectors, vectors)
def test_cosine_distance_symmetric_and_bounded(a, b):
    if a.shape != b.shape:
        return
    a, b = normalize(a), normalize(b)
    d = cosine_distance(a, b)
    assert d == cosine_distance(b, a)
    assert 0.0 <= d <= 2.0


@given(vectors)
def test_cosine_distance_to_self_is_zero(v):
    a = normalize(v)
    assert cosine_distance(a, a) == 0.0


def test_cosine_distance_clamps_drift():
    a = np.array([1.0 + 1e-15, 0.0])
    assert cosine_distance(a, -a) == 2.0


def test_pairwise_min_examples():
    assert pairwise_min(np.stack([e(0), e(1)])) == (0, 1, 1.0)
    i, j, d = pairwise_min(np.stack([e(0), e(1), unit([1, 1, 0])]))
    assert (i, j) == (0, 2)
    assert d == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-15)
    x = unit([0.3, -0.2, 0.9])
    assert pairwise_min(np.stack([x, x])) == (0, 1, 0.0)


def test_pairwise_min_needs_two_points():
    with pytest.raises(TooFewPoints):
        pairwise_min(np.stack([e(0)]))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 25), st.integers(2, 9), st.integers(0, 2**32 - 1))
def test_pairwise_min_matches_brute_force(n, dim, seed):
    X = random_units(n, dim, np.random.default_rng(seed))
    i, j, d = pairwise_min(X)
    bi, bj, bd = brute_min_pair(X)
    assert (i, j) == (bi, bj)
    assert d == pytest.approx(bd, abs=1e-12)


def test_pairwise_min_ties_resolve_lexicographically():
    # square in the plane: four tied neighbour pairs at distance 1
    X = np.stack([e(0), e(1), -e(0), -e(1)])
    assert pairwise_min(X)[:2] == (0, 1)
    X = np.stack([e(2), e(0), e(1), -e(0)])
    assert pairwise_min(X)[:2] == (0, 1)


def test_random_unit_deterministic_and_unit():
    a = random_unit(5, np.random.default_rng(7))
    b = random_unit(5, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)
    assert abs(np.linalg.norm(a) - 1) <= 1e-6
    with pytest.raises(DimensionMismatch):
        random_unit(1, np.random.default_rng(0))


def test_random_unit_is_centred():
    rng = np.random.default_rng(2024)
    draws = np.stack([random_unit(8, rng) for _ in range(10_000)])
    assert np.all(np.abs(draws.mean(axis=0)) < 0.05)


def test_random_units_consumes_like_sequential_calls():
    a = random_units(4, 6, np.random.default_rng(3))
    rng = np.random.default_rng(3)
    b = np.stack([random_unit(6, rng) for _ in range(4)])
    np.testing.assert_allclose(a, b, atol=1e-15)


def test_as_embedding_set_validation():
    with pytest.raises(DegenerateVector):
        as_embedding_set([[1.0, 0.1]])
    with pytest.raises(DegenerateVector):
        as_embedding_set([[np.nan, 1.0]])
    with pytest.raises(DimensionMismatch):
        as_embedding_set([[1.0]])
    with pytest.raises(TooFewPoints):
        as_embedding_set(np.zeros((0, 3)))
