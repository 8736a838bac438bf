from __future__ import annotations

import struct
import zlib

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wcsd.graph import from_edges
from wcsd.io import (MAGIC, ContainerError, FingerprintMismatch, UnsupportedVersion,
                     decode_varints, dumps_index, encode_varints, load_index, loads_index,
                     save_index, section_of)
from wcsd.naive import build_naive, query_naive_many
from wcsd.ordering import identity_order
from wcsd.wcindex import StaleIndexError, build, build_directed, query_many

from conftest import GSTAR_EDGES, GSTAR_TABLE, small_graphs


def _answers(idx, g):
    S, T, W = np.meshgrid(np.arange(g.n), np.arange(g.n), np.arange(g.top), indexing="ij")
    return query_many(idx, S.ravel(), T.ravel(), W.ravel())[0]


def test_varints():
    vals = [0, 1, 127, 128, 300, 2**40]
    buf = encode_varints(vals)
    assert buf[:4] == bytes([0, 1, 127, 0x80])
    got, pos = decode_varints(np.frombuffer(buf, np.uint8), 0, len(vals))
    assert got.tolist() == vals and pos == len(buf)
    with pytest.raises(ValueError):
        encode_varints([-1])


def test_round_trip_gstar(tmp_path, gstar):
    idx = build(gstar, identity_order(gstar))
    p = tmp_path / "g.wcx"
    save_index(idx, p)
    back = load_index(p, gstar)
    assert back.label_table() == GSTAR_TABLE
    assert dumps_index(back) == p.read_bytes()
    assert p.read_bytes()[:5] == MAGIC


@pytest.mark.parametrize("kind", ["wc", "wc-path", "naive", "wc-directed"])
def test_sections_round_trip_byte_identical(gstar, kind):
    if kind == "wc":
        idx, g = build(gstar), gstar
    elif kind == "wc-path":
        idx, g = build(gstar, path_mode=True), gstar
    elif kind == "naive":
        idx, g = build_naive(gstar), gstar
    else:
        g = from_edges(GSTAR_EDGES[:5], directed=True)
        idx = build_directed(g)
    data = dumps_index(idx)
    back = loads_index(data, g)
    assert section_of(back) == kind
    assert dumps_index(back) == data
    if kind == "naive":
        S = np.repeat(np.arange(6), 6)
        T = np.tile(np.arange(6), 6)
        W = np.zeros(36, np.int64)
        assert np.array_equal(query_naive_many(back, S, T, W), query_naive_many(idx, S, T, W))
    else:
        assert np.array_equal(_answers(back, g), _answers(idx, g))


def test_fingerprint_mismatch_is_hard_error(gstar):
    data = dumps_index(build(gstar))
    other = from_edges([(0, 1, 1)], n=6)
    with pytest.raises(FingerprintMismatch):
        loads_index(data, other)
    assert issubclass(FingerprintMismatch, StaleIndexError)


def test_truncated_and_corrupt(gstar):
    data = dumps_index(build(gstar))
    for cut in (3, 20, len(data) - 1):
        with pytest.raises(ContainerError):
            loads_index(data[:cut])
    flipped = bytearray(data)
    flipped[30] ^= 0xFF
    with pytest.raises(ContainerError, match="checksum"):
        loads_index(bytes(flipped))
    with pytest.raises(ContainerError, match="magic"):
        loads_index(b"XXXXX" + data[5:])


def _reseal(body: bytes) -> bytes:
    return body + struct.pack("<I", zlib.crc32(body))


def test_version_and_trailing_bytes(gstar):
    data = dumps_index(build(gstar))
    body = bytearray(data[:-4])
    body[5] = 9
    with pytest.raises(UnsupportedVersion):
        loads_index(_reseal(bytes(body)))
    with pytest.raises(ContainerError, match="trailing"):
        loads_index(_reseal(data[:-4] + b"\x00"))


def test_weighted_flag_survives(gstar):
    g = from_edges([(0, 1, 1, 4), (1, 2, 2, 3)])
    back = loads_index(dumps_index(build(g, path_mode=True)), g)
    assert back.weighted and back.path_mode


@given(small_graphs(), st.booleans())
def test_round_trip_property(g, path_mode):
    idx = build(g, path_mode=path_mode)
    data = dumps_index(idx)
    back = loads_index(data, g)
    assert dumps_index(back) == data
    assert np.array_equal(_answers(back, g), _answers(idx, g))
