"""Binary container and CSV export for signals, fields, and masks.

Layout (all little-endian):

    magic  b"STFL1"
    kind   u64      1 = 1D signal, 2 = TF field, 3 = boolean mask
    dims   u64...   signal: N        field/mask: Nx, Nw
    meta   f64...   signal: L        field/mask: Lx, Lw
    data            signal/field: interleaved re/im f64 (row-major for fields)
                    mask: u64 first_value (0/1), u64 n_runs, then n_runs u64
                    run lengths of alternating values over the flattened array

CSV signal export has columns x, re, im.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grids import Grid1D, Signal, TFField, TFGrid, make_grid

MAGIC = b"STFL1"

_KIND_SIGNAL = 1
_KIND_FIELD = 2
_KIND_MASK = 3


def _interleave(values: np.ndarray) -> bytes:
    flat = np.ascontiguousarray(values, dtype=np.complex128).ravel()
    out = np.empty(2 * flat.size, dtype="<f8")
    out[0::2] = flat.real
    out[1::2] = flat.imag
    return out.tobytes()


def _deinterleave(buf: bytes, n: int) -> np.ndarray:
    raw = np.frombuffer(buf, dtype="<f8", count=2 * n)
    return raw[0::2] + 1j * raw[1::2]


def dump_signal(sig: Signal, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", _KIND_SIGNAL, sig.grid.count))
        fh.write(struct.pack("<d", sig.grid.length))
        fh.write(_interleave(sig.values))


def dump_field(field: TFField, path: str | Path) -> None:
    tg = field.tfgrid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQQ", _KIND_FIELD, tg.xgrid.count, tg.wgrid.count))
        fh.write(struct.pack("<dd", tg.xgrid.length, tg.wgrid.length))
        fh.write(_interleave(field.values))


def dump_mask(mask_values: np.ndarray, tfgrid: TFGrid, path: str | Path) -> None:
    flat = np.asarray(mask_values, dtype=bool).ravel()
    if flat.size != tfgrid.shape[0] * tfgrid.shape[1]:
        raise ValueError("mask shape does not match tf grid")
    # run-length encode
    if flat.size == 0:
        runs: list[int] = []
        first = 0
    else:
        change = np.flatnonzero(flat[1:] != flat[:-1])
        edges = np.concatenate(([0], change + 1, [flat.size]))
        runs = list(np.diff(edges).astype(int))
        first = int(flat[0])
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQQ", _KIND_MASK, tfgrid.xgrid.count, tfgrid.wgrid.count))
        fh.write(struct.pack("<dd", tfgrid.xgrid.length, tfgrid.wgrid.length))
        fh.write(struct.pack("<QQ", first, len(runs)))
        fh.write(np.asarray(runs, dtype="<u8").tobytes())


def _read_exact(fh, n: int) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise ValueError("truncated container")
    return buf


def load(path: str | Path):
    """Load any container; returns Signal, TFField, or (bool array, TFGrid)."""
    with open(path, "rb") as fh:
        magic = _read_exact(fh, len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}; expected {MAGIC!r}")
        (kind,) = struct.unpack("<Q", _read_exact(fh, 8))
        if kind == _KIND_SIGNAL:
            (count,) = struct.unpack("<Q", _read_exact(fh, 8))
            (length,) = struct.unpack("<d", _read_exact(fh, 8))
            vals = _deinterleave(_read_exact(fh, 16 * count), count)
            return Signal(make_grid(length, count), vals)
        if kind in (_KIND_FIELD, _KIND_MASK):
            nx, nw = struct.unpack("<QQ", _read_exact(fh, 16))
            lx, lw = struct.unpack("<dd", _read_exact(fh, 16))
            tg = TFGrid(make_grid(lx, nx), make_grid(lw, nw))
            if kind == _KIND_FIELD:
                vals = _deinterleave(_read_exact(fh, 16 * nx * nw), nx * nw)
                return TFField(tg, vals.reshape(nx, nw))
            first, n_runs = struct.unpack("<QQ", _read_exact(fh, 16))
            runs = np.frombuffer(_read_exact(fh, 8 * n_runs), dtype="<u8")
            flat = np.zeros(nx * nw, dtype=bool)
            pos = 0
            val = bool(first)
            for r in runs:
                flat[pos : pos + int(r)] = val
                pos += int(r)
                val = not val
            if pos != nx * nw:
                raise ValueError("mask run lengths do not cover the grid")
            return flat.reshape(nx, nw), tg
        raise ValueError(f"unknown container kind {kind}")


def load_signal(path: str | Path) -> Signal:
    obj = load(path)
    if not isinstance(obj, Signal):
        raise ValueError(f"{path} does not hold a 1D signal")
    return obj


def load_field(path: str | Path) -> TFField:
    obj = load(path)
    if not isinstance(obj, TFField):
        raise ValueError(f"{path} does not hold a TF field")
    return obj


def signal_to_csv(sig: Signal, path: str | Path) -> None:
    xs = sig.grid.points()
    with open(path, "w", newline="") as fh:
        fh.write("x,re,im\n")
        for x, v in zip(xs, sig.values):
            fh.write(f"{float(x)!r},{float(v.real)!r},{float(v.imag)!r}\n")


def signal_from_csv(path: str | Path, grid: Grid1D | None = None) -> Signal:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    xs, re, im = rows[:, 0], rows[:, 1], rows[:, 2]
    if grid is None:
        n = len(xs)
        dx = xs[1] - xs[0]
        grid = make_grid(dx * n, n)
    return Signal(grid, re + 1j * im)
