#!/usr/bin/env python3
"""
Whole-suite checks: every structure answers like the dense matrix, survives a
container round trip, passes the audit, and compresses where it should
"""

import numpy as np
import pytest

from src import container
from src.bench import run_bench
from src.errors import B2DTError
from src.bt2d import BuildParams, audit, build_bt2d
from src.generators import random_matrix, shifted_copy_matrix, tiled_matrix
from src.k2tree import build_k2
from src.matrix_io import BitMatrix, Region, extract_region_oracle

REGIONS_PER_MATRIX = 1000
DENSITIES = (0.001, 0.01, 0.1, 0.5)
SEEDS = range(4)


def suite():
    cases = []
    for k in (2, 4):
        for size in (8, 16, 40, 64):
            for density in DENSITIES:
                for seed in SEEDS:
                    cases.append((f"random-k{k}-{size}-{density}-{seed}",
                                  lambda k=k, size=size, density=density, seed=seed: random_matrix(size, density, seed, k),
                                  BuildParams(seed=seed)))
        for size, tile in ((32, 8), (64, 16), (64, 8)):
            for density in (0.1, 0.5):
                for seed in SEEDS:
                    cases.append((f"tiled-k{k}-{size}-{tile}-{density}-{seed}",
                                  lambda k=k, size=size, tile=tile, density=density, seed=seed: tiled_matrix(size, tile, density, seed, k),
                                  BuildParams(seed=seed)))
        for size, block in ((64, 8), (100, 12)):
            for seed in SEEDS:
                cases.append((f"shifted-k{k}-{size}-{block}-{seed}",
                              lambda k=k, size=size, block=block, seed=seed: shifted_copy_matrix(size, block, 0.4, seed, k=k),
                              BuildParams(seed=seed, cost_filter=False)))
        # Collision-rich modulus: fingerprints nominate, cell comparison decides
        for seed in SEEDS:
            cases.append((f"mod251-tiled-k{k}-{seed}",
                          lambda k=k, seed=seed: tiled_matrix(64, 16, 0.3, seed, k),
                          BuildParams(seed=seed, modulus=251)))
            cases.append((f"mod251-shifted-k{k}-{seed}",
                          lambda k=k, seed=seed: shifted_copy_matrix(64, 8, 0.5, seed, k=k),
                          BuildParams(seed=seed, modulus=251, cost_filter=False)))
    return cases


SUITE = suite()


def test_suite_is_large_enough():
    assert len(SUITE) >= 200


def check_against_oracle(tree, m, rng):
    full = Region(0, 0, m.side - 1, m.side - 1)
    assert np.array_equal(tree.access(full), m.cells)
    for node in range(m.rows):
        assert tree.direct_neighbors(node) == np.flatnonzero(m.cells[node]).tolist()
    for node in range(m.cols):
        assert tree.reverse_neighbors(node) == np.flatnonzero(m.cells[:, node]).tolist()
    for _ in range(REGIONS_PER_MATRIX):
        x0, x1 = sorted(rng.integers(0, m.side, size=2).tolist())
        y0, y1 = sorted(rng.integers(0, m.side, size=2).tolist())
        r = Region(x0, y0, x1, y1)
        assert np.array_equal(tree.access(r), extract_region_oracle(m, r)), r


@pytest.mark.slow
@pytest.mark.parametrize("label, make, params", SUITE, ids=[c[0] for c in SUITE])
def test_structures_match_oracle(label, make, params):
    m = make()
    rng = np.random.default_rng(len(label))
    for tree in (build_k2(m), build_bt2d(m, params=params)):
        check_against_oracle(tree, m, rng)

        data = container.dumps(tree)
        assert len(data) * 8 == tree.total_bits() + container.framing_bits(tree)
        loaded = container.loads(data)
        assert np.array_equal(loaded.access(Region(0, 0, m.side - 1, m.side - 1)), m.cells)
        assert loaded.direct_neighbors(0) == tree.direct_neighbors(0)

        if tree.kind == 1:
            assert audit(tree, m) == []
            assert loaded.links() == tree.build_links


@pytest.mark.slow
@pytest.mark.parametrize("k", [2, 4])
def test_larger_random_matrices(k):
    m = random_matrix(200, 0.01, seed=k, k=k)
    tree = build_bt2d(m)
    check_against_oracle(tree, m, np.random.default_rng(0))
    assert audit(tree, m) == []


@pytest.mark.slow
def test_tiled_block_compresses_to_under_65_percent():
    m = tiled_matrix(1024, 128, 0.1, seed=0)
    bt = build_bt2d(m)
    k2 = build_k2(m)
    assert bt.total_bits() <= 0.65 * k2.total_bits()
    rng = np.random.default_rng(3)
    for _ in range(50):
        x0, x1 = sorted(rng.integers(0, 1024, size=2).tolist())
        y0, y1 = sorted(rng.integers(0, 1024, size=2).tolist())
        r = Region(x0, y0, x1, y1)
        assert np.array_equal(bt.access(r), extract_region_oracle(m, r))


@pytest.mark.parametrize("k, size", [(2, 256), (4, 256)])
def test_incompressible_overhead_is_small(k, size):
    m = random_matrix(size, 0.5, seed=1, k=k)
    assert build_bt2d(m).total_bits() <= 1.05 * build_k2(m).total_bits()


@pytest.mark.slow
def test_mean_upwalk_on_shifted_copies():
    climbs = []
    for seed in range(5):
        m = shifted_copy_matrix(128, 16, 0.5, seed=seed)
        report = run_bench([build_k2(m), build_bt2d(m, params=BuildParams(seed=seed))], queries=100, seed=seed)
        bt = report.structures[1]
        assert bt.name == "bt2d"
        climbs.append(bt.mean_upwalk)
        assert report.latency_ratio["direct"] > 0
    assert sum(climbs) / len(climbs) <= 3.0


def test_bench_sampling_is_deterministic():
    m = shifted_copy_matrix(64, 8, 0.5, seed=1)
    trees = [build_k2(m), build_bt2d(m)]
    a = run_bench(trees, queries=30, seed=4)
    b = run_bench(trees, queries=30, seed=4)
    assert a.structures[1].hops == b.structures[1].hops
    assert a.structures[1].mean_upwalk == b.structures[1].mean_upwalk
    assert [line for line in a.lines() if "_bits" in line] == [line for line in b.lines() if "_bits" in line]


def test_bench_ratios_read_bt2d_over_k2tree_in_any_order():
    m = shifted_copy_matrix(64, 8, 0.5, seed=1)
    k2, bt = build_k2(m), build_bt2d(m)
    forward = run_bench([k2, bt], queries=20, seed=2)
    backward = run_bench([bt, k2], queries=20, seed=2)
    assert [s.name for s in backward.structures] == ["k2tree", "bt2d"]

    def bits_ratio(report):
        return next(line for line in report.lines() if line.startswith("bits_ratio="))

    assert bits_ratio(forward) == bits_ratio(backward) == f"bits_ratio={bt.total_bits() / k2.total_bits():.4f}"
    assert set(backward.latency_ratio) == {"direct", "reverse"}


def test_bench_rejects_same_shape_different_matrices():
    a = np.zeros((8, 8), dtype=np.uint8)
    a[0, 0] = 1
    b = a.copy()
    b[5, 6] = 1
    with pytest.raises(B2DTError, match="different matrices"):
        run_bench([build_k2(BitMatrix.from_dense(a)), build_bt2d(BitMatrix.from_dense(b))], queries=1)
