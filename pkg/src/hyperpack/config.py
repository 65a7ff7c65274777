"""Flat run configuration shared by the CLI subcommands.

A config file is a list of ``key = value`` lines. Unknown keys are rejected so
typos fail loudly. Every run writes the fully resolved config next to its
output; feeding that file back through ``--config`` reproduces the run.
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError
from .gallery import Gallery, ManifoldSpec, synthesize_gallery
from .optim import LrSchedule
from .packing import PackingConfig
from .sampling import SampleSpec

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class RunConfig:
    # packing
    n_id: int = 1000
    dim: int = 512
    iters: int = 100_000
    alpha: float = 0.5
    lr: float = 0.01
    lr_decay: float = 0.75
    lr_interval: int = 5000
    batch_size: int = 0
    seed: int = 0
    reg_refresh: int = 1
    reg_in_cost: bool = True
    # initialization: uniform | gallery | file
    init: str = "uniform"
    refs: str = ""
    # gallery: synth | none | path to a HYPF file
    gallery: str = "synth"
    n_gallery: int = 0  # 0 = same as n_id
    gallery_clusters: int = 1
    gallery_concentration: float = 0.05
    gallery_seed: int = 1
    # sampling
    beta: float = 0.01
    per_id: int = 64
    sample_seed: int = 0
    # outputs
    out: str = "refs.hypf"
    trace: str = ""
    manifest: str = "manifest.jsonl"
    emb_out: str = ""

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, mapping, base=None):
        """Build from string (or typed) values; unknown keys raise ConfigError."""
        base = base or cls()
        types = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(mapping) - set(types))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        values = {k: _coerce(k, v, types[k]) for k, v in mapping.items()}
        return replace(base, **values)

    @classmethod
    def load(cls, path, overrides=None):
        from .io import parse_flat_config

        cfg = cls.from_mapping(parse_flat_config(Path(path).read_text()))
        return cls.from_mapping(overrides or {}, base=cfg)

    def items(self):
        return [(k, getattr(self, k)) for k in self.keys()]

    def packing_config(self):
        return PackingConfig(
            n_id=self.n_id,
            dim=self.dim,
            n_itr=self.iters,
            alpha=self.alpha,
            schedule=LrSchedule(self.lr, self.lr_decay, self.lr_interval),
            batch_size=self.batch_size,
            seed=self.seed,
            reg_refresh_interval=self.reg_refresh,
            reg_in_cost=self.reg_in_cost,
        )

    def sample_spec(self):
        return SampleSpec(beta=self.beta, per_id=self.per_id, master_seed=self.sample_seed)

    def manifold_spec(self):
        return ManifoldSpec(
            dim=self.dim,
            n_points=self.n_gallery or self.n_id,
            n_clusters=self.gallery_clusters,
            concentration=self.gallery_concentration,
            seed=self.gallery_seed,
        )

    def resolve_gallery(self):
        """The configured gallery, or None for ``gallery = none``."""
        src = self.gallery.strip()
        if src.lower() in ("", "none"):
            return None
        if src.lower() == "synth":
            return synthesize_gallery(self.manifold_spec())
        from .io import load_embeddings

        return Gallery(load_embeddings(src), src)


def _coerce(key, value, typ):
    if typ in (bool, "bool"):
        if isinstance(value, bool):
            return value
        s = str(value).strip().lower()
        if s in _TRUE:
            return True
        if s in _FALSE:
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    if typ in (int, "int"):
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected an integer, got {value!r}") from None
    if typ in (float, "float"):
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    return str(value)
