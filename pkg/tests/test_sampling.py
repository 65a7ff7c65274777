import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperpack.errors import IdentityMismatch
from hyperpack.packing import PackingConfig, optimize
from hyperpack.sampling import (
    ManifestEntry,
    SampleManifest,
    SampleSpec,
    derive_seed,
    generate_manifest,
    intra_class_stats,
    perturb_reference,
)
from hyperpack.sphere import cosine_distance, pairwise_min, random_units


def test_zero_beta_returns_reference_exactly():
    x = random_units(1, 16, np.random.default_rng(0))[0]
    y = perturb_reference(x, 0.0, np.random.default_rng(1))
    np.testing.assert_array_equal(x, y)
    assert y is not x


def test_small_beta_stays_close_in_512_dims():
    rng = np.random.default_rng(3)
    x = random_units(1, 512, rng)[0]
    worst = max(cosine_distance(x, perturb_reference(x, 0.01, rng)) for _ in range(10_000))
    assert worst < 0.05


def test_perturbation_is_deterministic():
    x = random_units(1, 32, np.random.default_rng(0))[0]
    a = perturb_reference(x, 0.02, np.random.default_rng(99))
    b = perturb_reference(x, 0.02, np.random.default_rng(99))
    np.testing.assert_array_equal(a, b)


def test_negative_beta_rejected():
    with pytest.raises(ValueError):
        perturb_reference(np.array([1.0, 0.0]), -0.1, np.random.default_rng(0))


def test_manifest_keys_and_count():
    refs = random_units(2, 8, np.random.default_rng(0))
    m = generate_manifest(refs, SampleSpec(per_id=3))
    assert len(m) == 6
    assert [(e.identity, e.sample) for e in m.entries] == [(i, n) for i in range(2) for n in range(3)]
    assert m.embeddings().shape == (6, 8)


def test_default_samples_per_identity():
    assert SampleSpec().per_id == 64


def test_zero_beta_manifest_copies_references():
    refs = random_units(3, 8, np.random.default_rng(1))
    m = generate_manifest(refs, SampleSpec(beta=0.0, per_id=4))
    for e in m.entries:
        np.testing.assert_array_equal(e.embedding, refs[e.identity])
    for s in intra_class_stats(m, refs):
        assert s.mean == 0.0 and s.max == 0.0


def test_manifest_regeneration_is_bitwise():
    refs = random_units(4, 16, np.random.default_rng(2))
    spec = SampleSpec(beta=0.01, per_id=5, master_seed=77)
    a, b = generate_manifest(refs, spec), generate_manifest(refs, spec)
    for ea, eb in zip(a.entries, b.entries):
        assert (ea.v_seed, ea.z_seed) == (eb.v_seed, eb.z_seed)
        np.testing.assert_array_equal(ea.embedding, eb.embedding)


def test_entries_do_not_depend_on_other_identities():
    refs = random_units(5, 16, np.random.default_rng(2))
    full = generate_manifest(refs, SampleSpec(per_id=3, master_seed=5))
    sub = generate_manifest(refs[:2], SampleSpec(per_id=3, master_seed=5))
    for ea, eb in zip(full.entries[:6], sub.entries):
        np.testing.assert_array_equal(ea.embedding, eb.embedding)


def test_seeds_distinct_across_streams_and_entries():
    seeds = {derive_seed(0, i, n, s) for i in range(20) for n in range(20) for s in (0, 1)}
    assert len(seeds) == 800


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**63), st.floats(0, 0.05), st.integers(2, 64))
def test_manifest_embeddings_are_unit(seed, beta, dim):
    refs = random_units(2, dim, np.random.default_rng(seed % 1000))
    m = generate_manifest(refs, SampleSpec(beta=beta, per_id=3, master_seed=seed))
    norms = np.linalg.norm(m.embeddings(), axis=1)
    assert np.max(np.abs(norms - 1)) <= 1e-6


def test_single_identity_single_sample():
    refs = random_units(1, 8, np.random.default_rng(0))
    m = generate_manifest(refs, SampleSpec(beta=0.02, per_id=1))
    (s,) = intra_class_stats(m, refs)
    assert s.count == 1
    assert s.mean == s.max == cosine_distance(m.entries[0].embedding, refs[0])


def test_mean_displacement_grows_with_beta():
    means = {}
    for beta in (0.0, 0.005, 0.01, 0.02):
        vals = []
        for seed in range(10):
            refs = random_units(4, 512, np.random.default_rng(seed))
            m = generate_manifest(refs, SampleSpec(beta=beta, per_id=8, master_seed=seed))
            vals += [s.mean for s in intra_class_stats(m, refs)]
        means[beta] = np.mean(vals)
    assert means[0.0] <= means[0.005] <= means[0.01] <= means[0.02]
    assert means[0.02] > means[0.005]


def test_identity_mismatch():
    refs = random_units(2, 4, np.random.default_rng(0))
    stray = SampleManifest((ManifestEntry(5, 0, 1, 2, refs[0]),))
    with pytest.raises(IdentityMismatch):
        intra_class_stats(stray, refs)
    partial = generate_manifest(refs[:1], SampleSpec(per_id=2))
    with pytest.raises(IdentityMismatch):
        intra_class_stats(partial, refs)


def test_identities_stay_separable():
    for seed in range(10):
        refs, _ = optimize(PackingConfig(n_id=100, dim=64, n_itr=300, alpha=0.0, seed=seed))
        m = generate_manifest(refs, SampleSpec(beta=0.01, per_id=8, master_seed=seed))
        spread = max(s.max for s in intra_class_stats(m, refs))
        assert pairwise_min(refs)[2] > spread
