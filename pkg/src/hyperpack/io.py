"""On-disk formats: HYPF embeddings, JSONL traces and manifests, flat configs.

HYPF layout (all little-endian)::

    offset  size  field
    0       4     magic b"HYPF"
    4       2     version (uint16) = 1
    6       4     count (uint32)
    10      4     dim (uint32)
    14      4*count*dim  float32 payload, row-major

Every writer goes through :func:`atomic_write`: the data lands in a temporary
file in the target directory which is then renamed over the destination.
"""

import json
import logging
import math
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    FormatError,
    MalformedTrace,
    NormViolation,
    TruncatedPayload,
    UnsupportedVersion,
)
from .packing import TraceRecord
from .sampling import ManifestEntry, SampleManifest

log = logging.getLogger(__name__)

MAGIC = b"HYPF"
VERSION = 1
_HEADER = struct.Struct("<4sHII")
HEADER_SIZE = _HEADER.size  # 14

NORM_FAIL = 1e-3
NORM_WARN = 1e-5
# a unit vector rounded to float32 has a norm error below 2**-24; rows inside
# twice that are already as unit as the storage allows and are kept verbatim
F32_UNIT = 2.0**-23


def atomic_write(path, data):
    """Write ``bytes`` or ``str`` to ``path`` via temp file + rename."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------------ HYPF


def encode_hypf(X):
    X = np.asarray(X)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {X.shape}")
    count, dim = X.shape
    header = _HEADER.pack(MAGIC, VERSION, count, dim)
    return header + np.ascontiguousarray(X, dtype="<f4").tobytes()


def decode_hypf(buf):
    """Raw float32 rows from HYPF bytes, without norm checks."""
    if len(buf) >= 4 and buf[:4] != MAGIC:
        raise BadMagic(f"bad magic {bytes(buf[:4])!r}, expected {MAGIC!r}")
    if len(buf) < HEADER_SIZE:
        raise TruncatedPayload(f"file is {len(buf)} bytes, header needs {HEADER_SIZE}")
    _, version, count, dim = _HEADER.unpack_from(buf)
    if version != VERSION:
        raise UnsupportedVersion(f"HYPF version {version} (only {VERSION} is supported)")
    need = 4 * count * dim
    have = len(buf) - HEADER_SIZE
    if have < need:
        raise TruncatedPayload(f"payload has {have} bytes, header promises {need}")
    if have > need:
        raise FormatError(f"{have - need} trailing bytes after payload")
    return np.frombuffer(buf, dtype="<f4", count=count * dim, offset=HEADER_SIZE).reshape(count, dim)


def save_embeddings(X, path):
    atomic_write(path, encode_hypf(X))


def load_embeddings(path, return_deviation=False):
    """Load a HYPF file as float64 unit rows.

    Rows whose norm drifted beyond float32 rounding are re-normalized in
    float64; the rest are returned exactly as stored, which keeps a
    load/save cycle byte-identical. A row whose norm is off by more than 1e-3
    (or is non-finite) raises NormViolation, and deviations above the 32-bit
    storage tolerance 1e-5 are logged as warnings. With ``return_deviation``
    the maximum norm deviation seen is returned alongside the array.
    """
    raw = decode_hypf(Path(path).read_bytes()).astype(np.float64)
    if raw.shape[0] == 0:
        return (raw, 0.0) if return_deviation else raw
    norms = np.linalg.norm(raw, axis=1)
    dev = np.abs(norms - 1.0)
    bad = np.flatnonzero(~(dev <= NORM_FAIL))
    if bad.size:
        raise NormViolation(
            f"{path}: row {int(bad[0])} norm deviates by {dev[bad[0]]:.3g} (> {NORM_FAIL:g})"
        )
    max_dev = float(dev.max())
    if max_dev > NORM_WARN:
        log.warning("%s: max row norm deviation %.3g, re-normalizing", path, max_dev)
    X = raw
    drift = dev > F32_UNIT
    if drift.any():
        X[drift] /= norms[drift, None]
    return (X, max_dev) if return_deviation else X


# ------------------------------------------------------------------ JSONL


def _jsonl(objs):
    return "".join(json.dumps(o, separators=(",", ":")) + "\n" for o in objs)


def write_trace(trace, path):
    atomic_write(path, _jsonl(r.to_json() for r in trace))


def read_trace(path):
    text = Path(path).read_text()
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(TraceRecord.from_json(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedTrace(f"{path}:{lineno}: {exc}") from exc
    if not records:
        raise MalformedTrace(f"{path}: no trace records")
    return records


def write_manifest(manifest, path):
    atomic_write(path, _jsonl(e.to_json() for e in manifest.entries))


def read_manifest(path):
    entries = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            entries.append(ManifestEntry.from_json(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return SampleManifest(tuple(entries))


def write_json(obj, path):
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- config


def parse_flat_config(text):
    """Parse ``key = value`` lines; ``#`` starts a comment. Values stay strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise FormatError(f"config line {lineno}: empty key")
        out[key] = value
    return out


def format_flat_config(items):
    lines = []
    for key, value in items:
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value) if math.isfinite(value) else str(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
