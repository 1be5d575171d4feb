#!/usr/bin/env python3
"""
Compare 2D Block Tree and k2-tree sizes on tiled and uniform random matrices
"""

import argparse
import sys

from src.bt2d import BuildParams, build_bt2d
from src.generators import random_matrix, shifted_copy_matrix, tiled_matrix
from src.k2tree import build_k2
from src.settings import Settings


def report(label, m, params):
    k2 = build_k2(m)
    bt = build_bt2d(m, params=params)
    ratio = bt.total_bits() / k2.total_bits()
    print(f"   {label:<28} k2tree {k2.total_bits():>10} bits ({k2.bits_per_edge():6.2f} bpe)"
          f"   bt2d {bt.total_bits():>10} bits ({bt.bits_per_edge():6.2f} bpe)"
          f"   ratio {ratio:.3f}   links {bt.D[-1]}")
    return ratio


def main():
    parser = argparse.ArgumentParser(description="2D Block Tree vs k2-tree size report")
    parser.add_argument("--size", type=int, default=512, help="Matrix side")
    parser.add_argument("--tile", type=int, default=64, help="Tile side for the tiled matrices")
    parser.add_argument("--leaf-side", type=int, help="Side of the verbatim leaf blocks (default k)")
    args = parser.parse_args()

    settings = Settings.from_env()
    params = BuildParams(seed=settings.seed, modulus=settings.kr_modulus, leaf_side=args.leaf_side)
    k = settings.k

    print("📦 Compression check\n")
    print("=" * 40, "\n")

    print("🔁 Tiled (repetitive):")
    for density in (0.01, 0.1, 0.5):
        report(f"tile {args.tile} density {density}", tiled_matrix(args.size, args.tile, density, settings.seed, k), params)

    print("\n↔️  Shifted copies:")
    report("block 32 density 0.3", shifted_copy_matrix(args.size, 32, 0.3, settings.seed, k=k), params)

    print("\n🎲 Uniform random (incompressible):")
    worst = 0.0
    for density in (0.001, 0.01, 0.1, 0.5):
        worst = max(worst, report(f"density {density}", random_matrix(args.size, density, settings.seed, k), params))

    if worst > 1.05:
        print(f"\n⚠️  Worst uniform ratio {worst:.3f}: the N bitvector dominates on sparse inputs")
    else:
        print(f"\n✅ Worst uniform ratio {worst:.3f}")


if __name__ == "__main__":
    try:
        main()
    except Exception as e:
        print(f"❌ Error: {e}")
        sys.exit(1)
