import struct

import numpy as np
import pytest

from dimscan import (FormatError, VectorCollection, compute_means, read_fvecs,
                     read_ivecs, read_pdx, to_blocks, write_fvecs, write_ivecs,
                     write_pdx)
from dimscan.storage import MAGIC, BlockStore


def test_read_fvecs_handcrafted_bytes(tmp_path):
    path = tmp_path / "one.fvecs"
    path.write_bytes(struct.pack("<I", 2) + struct.pack("<ff", 1.0, 2.0))
    c = read_fvecs(path)
    assert c.n == 1 and c.d == 2
    np.testing.assert_array_equal(c.data, [[1.0, 2.0]])


def test_read_fvecs_empty_file(tmp_path):
    path = tmp_path / "empty.fvecs"
    path.write_bytes(b"")
    with pytest.raises(FormatError, match="no records"):
        read_fvecs(path)


def test_read_fvecs_inconsistent_d(tmp_path):
    path = tmp_path / "bad.fvecs"
    rec4 = struct.pack("<I", 4) + struct.pack("<4f", *range(4))
    rec3 = struct.pack("<I", 3) + struct.pack("<3f", *range(3))
    path.write_bytes(rec4 + rec3)
    with pytest.raises(FormatError):
        read_fvecs(path)


def test_read_fvecs_truncated(tmp_path):
    path = tmp_path / "cut.fvecs"
    path.write_bytes(struct.pack("<I", 4) + struct.pack("<2f", 0.0, 1.0))
    with pytest.raises(FormatError, match="byte offset"):
        read_fvecs(path)


def test_fvecs_round_trip_bit_exact(tmp_path):
    data = np.random.default_rng(0).standard_normal((37, 12)).astype(np.float32)
    c = VectorCollection.from_array(data)
    path = tmp_path / "rt.fvecs"
    write_fvecs(c, path)
    np.testing.assert_array_equal(read_fvecs(path).data, data)


def test_ivecs_round_trip(tmp_path):
    ids = np.random.default_rng(1).integers(0, 1000, size=(9, 10)).astype(np.int32)
    path = tmp_path / "gt.ivecs"
    write_ivecs(ids, path)
    np.testing.assert_array_equal(read_ivecs(path), ids)


def _make_store(n=130, d=8, block_size=64, seed=2):
    data = np.random.default_rng(seed).standard_normal((n, d)).astype(np.float32)
    c = VectorCollection.from_array(data)
    return BlockStore(blocks=to_blocks(c, block_size),
                      global_means=compute_means(c).means, block_size=block_size)


def test_pdx_round_trip_including_means(tmp_path):
    store = _make_store()
    path = tmp_path / "store.pdx"
    write_pdx(store, path)
    back = read_pdx(path)
    assert back.n == store.n and back.block_size == store.block_size
    np.testing.assert_array_equal(back.global_means, store.global_means)
    for a, b in zip(back.blocks, store.blocks):
        assert a.m == b.m
        np.testing.assert_array_equal(a.data, b.data)
        np.testing.assert_array_equal(a.ids, b.ids)


def test_pdx_transform_section_round_trip(tmp_path):
    store = _make_store(d=6)
    store.transform_seed = 7
    store.transform_matrix = np.random.default_rng(7).standard_normal((6, 6)).astype(np.float32)
    path = tmp_path / "t.pdx"
    write_pdx(store, path)
    back = read_pdx(path)
    assert back.transform_seed == 7
    np.testing.assert_array_equal(back.transform_matrix, store.transform_matrix)


def test_pdx_bad_magic(tmp_path):
    path = tmp_path / "bad.pdx"
    path.write_bytes(b"NOTPDX00" + b"\x00" * 64)
    with pytest.raises(FormatError, match="magic"):
        read_pdx(path)


def test_pdx_bad_version(tmp_path):
    store = _make_store()
    path = tmp_path / "v.pdx"
    write_pdx(store, path)
    raw = bytearray(path.read_bytes())
    raw[8:12] = struct.pack("<I", 99)
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="version"):
        read_pdx(path)


def test_pdx_truncated(tmp_path):
    store = _make_store()
    path = tmp_path / "cut.pdx"
    write_pdx(store, path)
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(FormatError, match="truncated"):
        read_pdx(path)


def test_magic_is_stable():
    assert MAGIC.startswith(b"PDXv1")
