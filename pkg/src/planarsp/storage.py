"""File output: atomic writes, JSON/CSV helpers and field dumps.

Field dumps come in two formats.  Text dumps start with a header line
``# L=<half width> n=<points>`` followed by ``n`` rows of ``n`` values in
row-major order (first index = row), written with 17 significant digits so
they reload bit-for-bit.  Binary dumps are raw little-endian 64-bit floats in
the same order, with no header; the grid must be supplied on reload.
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .grid import Field2D, make_grid

__all__ = ["atomic_write", "write_json", "write_csv", "dump_field", "load_field"]


def atomic_write(path, data) -> Path:
    """Write ``data`` (str or bytes) to ``path`` through a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_json(path, obj) -> Path:
    return atomic_write(path, json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path, rows: list[dict]) -> Path:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return atomic_write(path, buf.getvalue())


def dump_field(path, u: Field2D, fmt: str = "text") -> Path:
    g = u.grid
    if fmt == "binary":
        return atomic_write(path, np.ascontiguousarray(u.values, dtype="<f8").tobytes())
    if fmt != "text":
        raise ValueError(f"unknown field format {fmt!r}")
    buf = io.StringIO()
    buf.write(f"# L={g.half_width!r} n={g.n}\n")
    np.savetxt(buf, u.values, fmt="%.17g")
    return atomic_write(path, buf.getvalue())


_HEADER = re.compile(r"#\s*L=(\S+)\s+n=(\d+)")


def load_field(path, L: float | None = None, n: int | None = None) -> Field2D:
    """Read a dump written by :func:`dump_field`; binary dumps need ``L`` and ``n``."""
    path = Path(path)
    raw = path.read_bytes()
    if raw.startswith(b"#"):
        first, _, rest = raw.partition(b"\n")
        m = _HEADER.match(first.decode())
        if not m:
            raise ValueError(f"{path}: malformed header {first!r}")
        g = make_grid(float(m.group(1)), int(m.group(2)))
        vals = np.loadtxt(io.StringIO(rest.decode()), ndmin=2)
    else:
        if L is None or n is None:
            raise ValueError("binary field dumps need L and n")
        g = make_grid(L, n)
        vals = np.frombuffer(raw, dtype="<f8")
        if vals.size != n * n:
            raise ValueError(f"{path}: expected {n * n} values, found {vals.size}")
        vals = vals.reshape(n, n)
    if vals.shape != (g.n, g.n):
        raise ValueError(f"{path}: shape {vals.shape} does not match n={g.n}")
    return Field2D(g, vals)
