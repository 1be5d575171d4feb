#!/usr/bin/env python3
"""
Human-readable breakdown of a b2dt container
"""

import sys

from src import container
from src.bt2d import NodeClass


def main():
    if len(sys.argv) != 2:
        print("Usage: inspect-container.py <container>")
        sys.exit(1)

    path = sys.argv[1]
    tree = container.load(path)
    print(f"🗂️  {path}: {tree.name}\n")
    print("=" * 40, "\n")
    print(f"📐 Matrix: {tree.rows}x{tree.cols} padded to {tree.side} (k={tree.k}, height {tree.height})")
    print(f"   Ones: {tree.ones}")

    print("\n📊 Size breakdown:")
    for part, bits in tree.size_breakdown().items():
        print(f"   {part:<6} {bits:>12} bits")
    print(f"   framing {container.framing_bits(tree):>11} bits")
    print(f"   file   {container.file_bits(path):>12} bits")
    print(f"   bpe    {tree.bits_per_edge():>12.3f}")

    if tree.kind != 1:
        return

    print("\n🔗 Links per depth:")
    for d in range(1, tree.height):
        start, end = tree.level_start[d], tree.level_start[d + 1]
        classes = [tree.node_class(p) for p in range(start, end)]
        print(f"   depth {d} side {tree.side // tree.k ** d:>6}: {end - start:>8} nodes"
              f"  {classes.count(NodeClass.INTERNAL):>8} internal"
              f"  {classes.count(NodeClass.EMPTY_LEAF):>8} empty"
              f"  {classes.count(NodeClass.BACKREF_LEAF):>6} links"
              f"  P width {tree.P[d].width}  O width {tree.O[d].width}")
    print(f"\n🔑 Karp-Rabin modulus {tree.kr_modulus}, base {tree.kr_base}")


if __name__ == "__main__":
    try:
        main()
    except Exception as e:
        print(f"❌ Error: {e}")
        sys.exit(1)
