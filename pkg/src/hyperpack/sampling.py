"""Per-identity sample embeddings and the dataset-generation manifest.

Every sample of identity ``i`` is ``normalize(x_ref_i + beta * v)`` with
``v ~ N(0, I)``. Instead of sampling the image generator's latent, a manifest
entry records ``z_seed`` so a downstream generator can reproduce it.

Seed derivation: each entry gets two 64-bit seeds from
``numpy.random.SeedSequence(master_seed, spawn_key=(identity, sample, stream))``
with ``stream=0`` for ``v`` and ``stream=1`` for ``z``. SeedSequence hashes its
inputs, so seeds are reproducible and entries are independent of each other
and of generation order.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IdentityMismatch, TooFewPoints
from .sphere import cosine_distance, normalize

_U64 = 0xFFFFFFFFFFFFFFFF
V_STREAM = 0
Z_STREAM = 1


@dataclass(frozen=True)
class SampleSpec:
    beta: float = 0.01
    per_id: int = 64
    master_seed: int = 0

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError("beta must be >= 0")
        if self.per_id < 1:
            raise ValueError("per_id must be >= 1")


@dataclass(frozen=True)
class ManifestEntry:
    identity: int
    sample: int
    v_seed: int
    z_seed: int
    embedding: np.ndarray

    def to_json(self):
        return {
            "id": self.identity,
            "sample": self.sample,
            "v_seed": self.v_seed,
            "z_seed": self.z_seed,
            "emb": self.embedding.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            int(obj["id"]),
            int(obj["sample"]),
            int(obj["v_seed"]),
            int(obj["z_seed"]),
            np.asarray(obj["emb"], dtype=np.float64),
        )


@dataclass(frozen=True)
class SampleManifest:
    entries: tuple

    def __len__(self):
        return len(self.entries)

    def embeddings(self):
        """All sample embeddings, identity-major, as a ``(count, dim)`` array."""
        return np.stack([e.embedding for e in self.entries])


def derive_seed(master_seed, identity, sample, stream):
    ss = np.random.SeedSequence(int(master_seed) & _U64, spawn_key=(identity, sample, stream))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def perturb_reference(x_ref, beta, rng):
    """``normalize(x_ref + beta * v)`` with a fresh standard-normal ``v``.

    ``v`` is always drawn so the generator advances identically for every beta;
    with ``beta == 0`` the reference itself is returned unchanged.
    """
    if not beta >= 0:
        raise ValueError("beta must be >= 0")
    x_ref = np.asarray(x_ref, dtype=np.float64)
    v = rng.standard_normal(x_ref.shape[0])
    if beta == 0:
        return x_ref.copy()
    return normalize(x_ref + beta * v)


def generate_manifest(refs, spec):
    refs = np.asarray(refs, dtype=np.float64)
    if refs.ndim != 2 or refs.shape[0] < 1:
        raise TooFewPoints("need at least one reference embedding")
    entries = []
    for i in range(refs.shape[0]):
        for n in range(spec.per_id):
            v_seed = derive_seed(spec.master_seed, i, n, V_STREAM)
            z_seed = derive_seed(spec.master_seed, i, n, Z_STREAM)
            emb = perturb_reference(refs[i], spec.beta, np.random.default_rng(v_seed))
            entries.append(ManifestEntry(i, n, v_seed, z_seed, emb))
    return SampleManifest(tuple(entries))


@dataclass(frozen=True)
class IntraClassStats:
    identity: int
    count: int
    mean: float
    max: float


def intra_class_stats(manifest, refs):
    """Mean and max cosine distance of each identity's samples to its reference."""
    refs = np.asarray(refs, dtype=np.float64)
    per_id = {}
    for e in manifest.entries:
        if not 0 <= e.identity < refs.shape[0]:
            raise IdentityMismatch(f"manifest identity {e.identity} has no reference")
        if e.embedding.shape[0] != refs.shape[1]:
            raise DimensionMismatch(
                f"entry ({e.identity}, {e.sample}) has dim {e.embedding.shape[0]}, refs have {refs.shape[1]}"
            )
        per_id.setdefault(e.identity, []).append(cosine_distance(e.embedding, refs[e.identity]))
    missing = sorted(set(range(refs.shape[0])) - set(per_id))
    if missing:
        raise IdentityMismatch(f"identities without samples: {missing[:5]}")
    return [
        IntraClassStats(i, len(d), float(np.mean(d)), float(np.max(d)))
        for i, d in sorted(per_id.items())
    ]
