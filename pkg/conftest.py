"""
Shared pytest fixtures: hand-checked matrices and seeded generators
"""

import numpy as np
import pytest

from src.matrix_io import BitMatrix
from src.succinct import BitVector, PackedIntArray


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long oracle and size runs (deselect with -m 'not slow')")


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch):
    for name in ("B2DT_K", "B2DT_SEED", "B2DT_KR_MODULUS", "B2DT_QUERY_COUNT", "B2DT_HOP_CHECK", "B2DT_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def copy_example_cells():
    """8x8 matrix whose block at (2,6) of side 2 is first seen at (1,4)"""
    cells = np.zeros((8, 8), dtype=np.uint8)
    cells[4:8, 0:4] = [
        [1, 1, 0, 0],
        [0, 1, 1, 0],
        [0, 1, 1, 0],
        [0, 0, 1, 1],
    ]
    return cells


def halves_cells():
    """8x8 matrix whose right half repeats its left half"""
    left = np.array([
        [1, 0, 0, 0],
        [1, 1, 0, 1],
        [0, 0, 1, 0],
        [1, 0, 1, 1],
        [1, 1, 1, 0],
        [0, 0, 0, 1],
        [0, 1, 0, 0],
        [1, 0, 0, 1],
    ], dtype=np.uint8)
    return np.hstack([left, left])


@pytest.fixture
def copy_example():
    return BitMatrix.from_dense(copy_example_cells())


@pytest.fixture
def halves():
    return BitMatrix.from_dense(halves_cells())


@pytest.fixture
def zero_matrix():
    return BitMatrix.from_dense(np.zeros((8, 8), dtype=np.uint8))


@pytest.fixture
def decode_layout():
    """Hand-laid 8x8 bt2d layout with a depth-2 link at position 11"""
    from src.bt2d import TwoDBlockTree

    T = BitVector("1101 1000 1010 0000")
    L = BitVector("1001 0110 1111")
    N = BitVector([1, 0, 1, 0, 0, 1, 0, 0, 0, 0])
    P = [PackedIntArray(1, 0), PackedIntArray.from_values([2]), PackedIntArray.from_values([2, 3])]
    O = [PackedIntArray(1, 0), PackedIntArray.from_values([0, 0], width=2),
         PackedIntArray.from_values([0, 0, 1, 0], width=1)]
    D = [0, 0, 1, 3]
    return TwoDBlockTree(2, 8, T, L, N, P, O, D)
