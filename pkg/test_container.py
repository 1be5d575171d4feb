#!/usr/bin/env python3
"""
Container store/load round trips, framing accounting and malformed input
"""

import struct

import numpy as np
import pytest

from src import container
from src.bt2d import BuildParams, build_bt2d
from src.errors import ContainerFormatError
from src.generators import random_matrix, shifted_copy_matrix, tiled_matrix
from src.k2tree import build_k2
from src.matrix_io import Region

FIXTURES = [
    ("random-k2", lambda: random_matrix(40, 0.1, seed=1)),
    ("random-k4", lambda: random_matrix(40, 0.05, seed=2, k=4)),
    ("tiled", lambda: tiled_matrix(64, 16, 0.2, seed=3)),
    ("shifted", lambda: shifted_copy_matrix(64, 12, 0.4, seed=4)),
]


def builders():
    return [build_k2, build_bt2d, lambda m: build_bt2d(m, params=BuildParams(cost_filter=False))]


def same_answers(a, b, m):
    full = Region(0, 0, m.side - 1, m.side - 1)
    assert np.array_equal(a.access(full), b.access(full))
    for node in range(m.rows):
        assert a.direct_neighbors(node) == b.direct_neighbors(node)
        assert a.reverse_neighbors(node) == b.reverse_neighbors(node)


@pytest.mark.parametrize("name, make", FIXTURES, ids=[f[0] for f in FIXTURES])
def test_round_trip_preserves_queries(name, make, tmp_path):
    m = make()
    for build in builders():
        tree = build(m)
        path = tmp_path / f"{name}.{tree.name}"
        size = container.store(tree, path)
        loaded = container.load(path)

        assert type(loaded) is type(tree)
        assert loaded.T == tree.T and loaded.L == tree.L
        assert size * 8 == tree.total_bits() + container.framing_bits(tree)
        assert container.file_bits(path) >= tree.total_bits()
        assert np.array_equal(loaded.access(Region(0, 0, m.side - 1, m.side - 1)), m.cells)
        same_answers(tree, loaded, m)


def test_bt2d_fields_survive(tmp_path):
    m = shifted_copy_matrix(64, 12, 0.4, seed=4)
    tree = build_bt2d(m, params=BuildParams(cost_filter=False, seed=7))
    loaded = container.loads(container.dumps(tree))
    assert loaded.N == tree.N
    assert loaded.D == tree.D
    assert loaded.P == tree.P and loaded.O == tree.O
    assert (loaded.kr_modulus, loaded.kr_base) == (tree.kr_modulus, tree.kr_base)
    assert loaded.links() == tree.build_links
    assert loaded.build_links is None


def test_header_layout():
    m = random_matrix(5, 0.5, seed=0)
    data = container.dumps(build_k2(m))
    magic, version, kind, k, rows, cols, side, modulus, base = struct.unpack_from("<4sBBBQQQQQ", data)
    assert (magic, version, kind, k, rows, cols, side, modulus, base) == (b"B2DT", 1, 0, 2, 5, 5, 8, 0, 0)
    assert container.HEADER.size == 47


def test_builds_are_deterministic():
    m = tiled_matrix(32, 8, 0.3, seed=9)
    assert container.dumps(build_bt2d(m)) == container.dumps(build_bt2d(m))


def test_all_zero_size_accounting(zero_matrix):
    tree = build_bt2d(zero_matrix)
    data = container.dumps(tree)
    # header, T/L/N prefixes and one word each for T and N, D count and 4 entries, 2 empty levels
    assert len(data) == 47 + 8 * 3 + 8 * 2 + 8 + 8 * 4 + 2 * (8 + 1 + 1)
    assert len(data) * 8 == tree.total_bits() + container.framing_bits(tree)


@pytest.mark.parametrize("mutate, message", [
    (lambda d: b"XXXX" + d[4:], "magic"),
    (lambda d: d[:4] + b"\x02" + d[5:], "version"),
    (lambda d: d[:5] + b"\x07" + d[6:], "kind"),
    (lambda d: d[:6] + b"\x01" + d[7:], "geometry"),
    (lambda d: d[:-3], "truncated"),
    (lambda d: d[:30], "truncated"),
    (lambda d: d + b"\x00" * 8, "trailing"),
])
def test_malformed_containers(mutate, message):
    tree = build_bt2d(tiled_matrix(16, 4, 0.5, seed=1))
    with pytest.raises(ContainerFormatError, match=message):
        container.loads(mutate(container.dumps(tree)))


def test_inconsistent_sections_rejected():
    tree = build_bt2d(tiled_matrix(16, 4, 0.5, seed=1))
    data = bytearray(container.dumps(tree))
    # Flip the first bit of T: the level sizes no longer add up
    offset = container.HEADER.size + 8
    data[offset] ^= 1
    with pytest.raises(ContainerFormatError):
        container.loads(bytes(data))


def test_rejects_non_default_leaf_side():
    m = tiled_matrix(32, 8, 0.3, seed=1)
    tree = build_bt2d(m, params=BuildParams(leaf_side=4))
    with pytest.raises(ContainerFormatError, match="leaf side"):
        container.dumps(tree)
