"""Binary snapshot files, one per cycle.

Layout (all integers little-endian)::

    offset  size  field
    0       4     magic b"SRCK"
    4       4     endianness tag, uint32 0x01020304 as written by the producer
    8       2     format version (1)
    10      2     spatial dimension d
    12      4     grid points per axis N
    16      4     velocity components
    20      4     number of coefficient arrays A (1 or 2)
    24      8     metadata length L in bytes
    32      L     UTF-8 JSON metadata (cycle, ledger entry, grid, layout)
    ...           A arrays of float64 pairs (re, im), little-endian, in the
                  solver mode layout: shape (components, N+1, ..., N+1, N/2+1)
    ...     8     sample count S (uint64)
    ...           S sample records, packed little-endian ``SAMPLE_DTYPE``

The arrays are, in order, the state before the restart and (if present) the
respawned state.  Floats in the JSON block are written with ``repr``
precision, so loading reproduces every value bit for bit.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointFormatError, MissingCheckpoint
from .rescale import SAMPLE_DTYPE, CycleEntry, CycleSnapshot
from .spectral import Grid, mode_set

__all__ = ["save_snapshot", "load_snapshot", "MAGIC", "FORMAT_VERSION"]

MAGIC = b"SRCK"
FORMAT_VERSION = 1
ENDIAN_TAG = 0x01020304
_HEADER = struct.Struct("<4sIHHIIIQ")
_COUNT = struct.Struct("<Q")
_COMPLEX = np.dtype("<c16")
_SAMPLES = SAMPLE_DTYPE.newbyteorder("<")


def _entry_json(e: CycleEntry) -> dict:
    d = dataclasses.asdict(e)
    for k in ("center", "origin", "center_original"):
        if d[k] is not None:
            d[k] = list(d[k])
    return d


def _entry_from_json(d: dict) -> CycleEntry:
    for k in ("center", "origin", "center_original"):
        if d.get(k) is not None:
            d[k] = tuple(d[k])
    return CycleEntry(**d)


def save_snapshot(path, snap: CycleSnapshot, grid: Grid, model: str = "", extra: dict | None = None) -> Path:
    path = Path(path)
    ncomp = snap.before.shape[0]
    arrays = [snap.before] if snap.after is None else [snap.before, snap.after]
    expected = (ncomp, *mode_set(grid).shape)
    for a in arrays:
        if a.shape != expected:
            raise CheckpointFormatError(f"array shape {a.shape} does not match layout {expected}")
    meta = {
        "cycle": snap.cycle_index,
        "model": model,
        "box_length": grid.box_length,
        "layout": "modeset",
        "arrays": ["before", "after"][: len(arrays)],
        "center": None if snap.center is None else list(snap.center),
        "entry": _entry_json(snap.entry),
        "extra": extra or {},
    }
    blob = json.dumps(meta, sort_keys=True, allow_nan=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, ENDIAN_TAG, FORMAT_VERSION, grid.dim, grid.n, ncomp, len(arrays), len(blob)))
        fh.write(blob)
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype=_COMPLEX).tobytes())
        fh.write(_COUNT.pack(len(snap.samples)))
        fh.write(np.ascontiguousarray(snap.samples, dtype=_SAMPLES).tobytes())
    return path


def load_snapshot(path) -> tuple[CycleSnapshot, Grid, dict]:
    """Return ``(snapshot, grid, metadata)`` from a file written by :func:`save_snapshot`."""
    path = Path(path)
    if not path.is_file():
        raise MissingCheckpoint(str(path))
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise CheckpointFormatError(f"{path}: truncated header")
    magic, tag, version, dim, n, ncomp, narr, mlen = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic {magic!r}")
    if tag != ENDIAN_TAG:
        raise CheckpointFormatError(f"{path}: endianness tag {tag:#x} not recognised")
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(f"{path}: unsupported format version {version}")
    pos = _HEADER.size
    meta = json.loads(raw[pos : pos + mlen].decode("utf-8"))
    pos += mlen
    grid = Grid(dim, n, meta["box_length"])
    shape = (ncomp, *mode_set(grid).shape)
    count = int(np.prod(shape))
    arrays = []
    for _ in range(narr):
        arrays.append(np.frombuffer(raw, dtype=_COMPLEX, count=count, offset=pos).reshape(shape).astype(complex))
        pos += count * _COMPLEX.itemsize
    (nsamp,) = _COUNT.unpack_from(raw, pos)
    pos += _COUNT.size
    samples = np.frombuffer(raw, dtype=_SAMPLES, count=nsamp, offset=pos).astype(SAMPLE_DTYPE)
    pos += nsamp * _SAMPLES.itemsize
    if pos != len(raw):
        raise CheckpointFormatError(f"{path}: {len(raw) - pos} trailing bytes")
    center = None if meta["center"] is None else tuple(meta["center"])
    snap = CycleSnapshot(
        meta["cycle"],
        arrays[0],
        _entry_from_json(meta["entry"]),
        samples,
        center,
        arrays[1] if narr > 1 else None,
    )
    return snap, grid, meta
