"""Signal dumps: raw little-endian float64 I/Q pairs plus a JSON sidecar."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

_DTYPE = np.dtype("<f8")


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def write_signal(path, signal, meta: dict | None = None) -> Path:
    """Write ``signal`` to ``path`` and its metadata to ``path + '.json'``."""
    path = Path(path)
    x = np.asarray(signal, dtype=complex).ravel()
    iq = np.empty(2 * x.size, dtype=_DTYPE)
    iq[0::2] = x.real
    iq[1::2] = x.imag
    path.write_bytes(iq.tobytes())
    side = {"format": "iq-f64le", "n_samples": int(x.size), "meta": meta or {}}
    _sidecar(path).write_text(json.dumps(side, sort_keys=True, indent=2) + "\n")
    return path


def read_signal(path):
    """Returns ``(signal, meta)``."""
    path = Path(path)
    raw = np.frombuffer(path.read_bytes(), dtype=_DTYPE)
    if raw.size % 2:
        raise ValueError("I/Q dump has an odd number of floats")
    x = raw[0::2] + 1j * raw[1::2]
    meta = {}
    side = _sidecar(path)
    if side.exists():
        doc = json.loads(side.read_text())
        if doc.get("n_samples", x.size) != x.size:
            raise ValueError("sidecar sample count does not match the dump")
        meta = doc.get("meta", {})
    return x, meta
