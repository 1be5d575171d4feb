"""
Seeded fixture matrices: uniform random, tiled and shifted-copy
"""

import numpy as np

from src.matrix_io import BitMatrix


def random_matrix(size, density, seed=0, k=2):
    """Uniform random size x size matrix with independent cells"""
    rng = np.random.default_rng(seed)
    return BitMatrix.from_dense(rng.random((size, size)) < density, k=k)


def tiled_matrix(size, tile, density, seed=0, k=2):
    """One random tile x tile block repeated over a size x size grid"""
    if size % tile:
        raise ValueError(f"tile {tile} does not divide size {size}")
    rng = np.random.default_rng(seed)
    block = rng.random((tile, tile)) < density
    reps = size // tile
    return BitMatrix.from_dense(np.tile(block, (reps, reps)), k=k)


def shifted_copy_matrix(size, block, density, seed=0, copies=3, background=0.01, k=2):
    """Sparse background with one random pattern planted at unaligned offsets.

    The first plant sits in the top band so every later copy starts after it
    in row-major order; copies land at arbitrary (mostly non-aligned)
    positions, which forces the query up-walk to climb above the copy level.
    """
    if block >= size:
        raise ValueError(f"pattern side {block} must be smaller than size {size}")
    rng = np.random.default_rng(seed)
    cells = rng.random((size, size)) < background
    pattern = rng.random((block, block)) < density

    limit = size - block
    oy = int(rng.integers(0, max(1, limit // 4) + 1))
    ox = int(rng.integers(0, limit + 1))
    cells[oy:oy + block, ox:ox + block] = pattern

    for _ in range(copies):
        y = int(rng.integers(min(oy + 1, limit), limit + 1))
        x = int(rng.integers(0, limit + 1))
        cells[y:y + block, x:x + block] = pattern

    return BitMatrix.from_dense(cells, k=k)
