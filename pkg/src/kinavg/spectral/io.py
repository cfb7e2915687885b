"""Flat binary snapshots of :class:`SpectralField` plus a JSON text manifest.

Layout (little endian)::

    magic   b"KAVF"          4 bytes
    version uint32
    n_x, n_v, N_x, N_v, rep  int64 x 5
    L_x, L_v, t              float64 x 3
    data                     complex128 pairs, row-major over grid.shape
"""

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from .field import REPRESENTATIONS, SpectralField
from .grid import GridSpec

MAGIC = b"KAVF"
VERSION = 1
_HEADER = struct.Struct("<4sI5q3d")


def save_field(path, field, manifest=True):
    path = Path(path)
    g = field.grid
    header = _HEADER.pack(MAGIC, VERSION, g.n_x, g.n_v, g.N_x, g.N_v,
                          REPRESENTATIONS.index(field.rep), float(g.L_x), float(g.L_v), float(field.t))
    with path.open("wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.data, dtype="<c16").tobytes())
    if manifest:
        meta = {"format": "kinavg-field", "version": VERSION, "grid": g.to_dict(),
                "representation": field.rep, "t": float(field.t), "shape": list(g.shape),
                "dtype": "complex128", "header_bytes": _HEADER.size}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2))
    return path


def load_field(path, dt=None, T=None):
    """Read a snapshot; ``dt``/``T`` are not stored in the binary header and default to GridSpec's."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ConfigurationError(f"{path}: truncated header")
    magic, version, n_x, n_v, N_x, N_v, rep, L_x, L_v, t = _HEADER.unpack_from(raw)
    if magic != MAGIC or version != VERSION:
        raise ConfigurationError(f"{path}: not a kinavg field snapshot (v{VERSION})")
    extra = {}
    if dt is not None:
        extra["dt"] = dt
    if T is not None:
        extra["T"] = T
    grid = GridSpec(n_x=n_x, n_v=n_v, N_x=N_x, N_v=N_v, L_x=L_x, L_v=L_v, **extra)
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    if data.size != np.prod(grid.shape):
        raise ConfigurationError(f"{path}: payload has {data.size} values, expected {np.prod(grid.shape)}")
    return SpectralField(grid, data.reshape(grid.shape), REPRESENTATIONS[rep], t)
