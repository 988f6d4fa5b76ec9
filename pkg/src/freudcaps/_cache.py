"""Disk cache for expensive certified objects (exact binary MPFR payloads)."""

from __future__ import annotations

import hashlib
import os
import pickle
from pathlib import Path

import gmpy2

_VERSION = "1"


def cache_dir() -> Path:
    d = os.environ.get("FREUDCAPS_CACHE_DIR")
    if d:
        p = Path(d)
    else:
        p = Path.home() / ".cache" / "freudcaps"
    p.mkdir(parents=True, exist_ok=True)
    return p


def _path(kind: str, key_parts) -> Path:
    h = hashlib.sha256(repr((_VERSION, kind, tuple(key_parts))).encode()).hexdigest()[:24]
    return cache_dir() / f"{kind}-{h}.pkl"


def _pack(obj):
    """Recursively replace mpfr leaves by exact binary blobs."""
    if isinstance(obj, gmpy2.mpfr):
        return ("mpfr", gmpy2.to_binary(obj))
    if isinstance(obj, (list, tuple)):
        return type(obj)(_pack(x) for x in obj)
    if isinstance(obj, dict):
        return {k: _pack(v) for k, v in obj.items()}
    return obj


def _unpack(obj):
    if isinstance(obj, tuple) and len(obj) == 2 and obj[0] == "mpfr":
        return gmpy2.from_binary(obj[1])
    if isinstance(obj, (list, tuple)):
        return type(obj)(_unpack(x) for x in obj)
    if isinstance(obj, dict):
        return {k: _unpack(v) for k, v in obj.items()}
    return obj


def load(kind: str, key_parts):
    p = _path(kind, key_parts)
    if not p.exists():
        return None
    try:
        with open(p, "rb") as f:
            return _unpack(pickle.load(f))
    except Exception:
        return None


def store(kind: str, key_parts, obj):
    p = _path(kind, key_parts)
    tmp = p.with_suffix(".tmp")
    with open(tmp, "wb") as f:
        pickle.dump(_pack(obj), f, protocol=4)
    tmp.replace(p)
