import numpy as np
import pytest

from stftlab.grids import Signal, TFField, make_grid, tf_grid_of
from stftlab.io import (
    dump_field,
    dump_mask,
    dump_signal,
    load,
    load_field,
    load_signal,
    signal_from_csv,
    signal_to_csv,
)

from conftest import random_signal


def test_signal_roundtrip(tmp_path, grid8):
    f = random_signal(grid8, seed=1)
    p = tmp_path / "sig.stfl"
    dump_signal(f, p)
    g = load_signal(p)
    assert g.grid == f.grid
    assert np.array_equal(g.values, f.values)


def test_field_roundtrip(tmp_path):
    tg = tf_grid_of(make_grid(8.0, 64))
    rng = np.random.default_rng(0)
    w = rng.normal(size=tg.shape) + 1j * rng.normal(size=tg.shape)
    field = TFField(tg, w)
    p = tmp_path / "field.stfl"
    dump_field(field, p)
    back = load_field(p)
    assert back.tfgrid == tg
    assert np.array_equal(back.values, field.values)


@pytest.mark.parametrize("fill", ["random", "zeros", "ones"])
def test_mask_roundtrip(tmp_path, fill):
    tg = tf_grid_of(make_grid(8.0, 64))
    if fill == "random":
        mask = np.random.default_rng(4).random(tg.shape) > 0.6
    elif fill == "zeros":
        mask = np.zeros(tg.shape, dtype=bool)
    else:
        mask = np.ones(tg.shape, dtype=bool)
    p = tmp_path / "mask.stfl"
    dump_mask(mask, tg, p)
    back, tg2 = load(p)
    assert tg2 == tg
    assert np.array_equal(back, mask)


def test_kind_mismatch_raises(tmp_path, grid8):
    p = tmp_path / "sig.stfl"
    dump_signal(random_signal(grid8), p)
    with pytest.raises(ValueError):
        load_field(p)


def test_bad_magic_raises(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"NOPE!" + b"\x00" * 64)
    with pytest.raises(ValueError, match="magic"):
        load(p)


def test_truncated_raises(tmp_path, grid8):
    p = tmp_path / "sig.stfl"
    dump_signal(random_signal(grid8), p)
    data = p.read_bytes()
    p.write_bytes(data[: len(data) // 2])
    with pytest.raises(ValueError, match="truncated"):
        load(p)


def test_csv_roundtrip(tmp_path, grid8):
    f = random_signal(grid8, seed=9)
    p = tmp_path / "sig.csv"
    signal_to_csv(f, p)
    header = p.read_text().splitlines()[0]
    assert header == "x,re,im"
    back = signal_from_csv(p, grid=grid8)
    # repr round-trips doubles exactly
    assert np.array_equal(back.values, f.values)


def test_csv_infers_grid(tmp_path, grid8):
    f = Signal(grid8, np.exp(-grid8.points() ** 2))
    p = tmp_path / "sig.csv"
    signal_to_csv(f, p)
    back = signal_from_csv(p)
    assert back.grid.count == grid8.count
    assert abs(back.grid.length - grid8.length) < 1e-9
    assert np.max(np.abs(back.values - f.values)) == 0.0
