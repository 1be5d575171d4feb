"""
Binary container for both structures.

All integers are little endian:

  header   magic "B2DT" | version u8 | kind u8 (0 k2tree, 1 bt2d) | k u8
           | rows u64 | cols u64 | side u64 | kr_modulus u64 | kr_base u64
  T, L, N  bit count u64, then ceil(bits/64) u64 words, LSB first
  D        entry count u64, then u64 entries
  levels   for d = 1..height-1: link count u64 | P width u8 | P words
           | O width u8 | O words (2 * link count entries)

A k2tree writes an empty N, a D count of 0 and no levels.
"""

import logging
import os
import struct

import numpy as np

from src.bt2d import TwoDBlockTree
from src.errors import ContainerFormatError
from src.k2tree import K2Tree
from src.succinct import WORD_BITS, BitVector, PackedIntArray, words_for

logger = logging.getLogger(__name__)

MAGIC = b"B2DT"
VERSION = 1
HEADER = struct.Struct("<4sBBBQQQQQ")
U64 = struct.Struct("<Q")
U8 = struct.Struct("<B")


def _padding(payload_bits):
    return words_for(payload_bits) * WORD_BITS - payload_bits


def framing_bits(tree):
    """Container bits that are not structure payload: header, prefixes, widths, word padding"""
    bits = HEADER.size * 8
    for bv in (tree.T, tree.L, getattr(tree, "N", BitVector())):
        bits += 64 + _padding(len(bv))
    bits += 64
    if isinstance(tree, TwoDBlockTree):
        for d in range(1, tree.height):
            bits += 64 + 8 + _padding(tree.P[d].payload_bits) + 8 + _padding(tree.O[d].payload_bits)
    return bits


def _put_bits(out, bv):
    out.append(U64.pack(len(bv)))
    out.append(bv.words.astype("<u8").tobytes())


def _put_packed(out, arr):
    out.append(U8.pack(arr.width))
    out.append(arr.words.astype("<u8").tobytes())


def dumps(tree):
    """Serialize a K2Tree or TwoDBlockTree to bytes"""
    if tree.leaf_side != tree.k:
        raise ContainerFormatError(f"containers store k-sided leaf blocks, this tree has leaf side {tree.leaf_side}")
    is_bt = isinstance(tree, TwoDBlockTree)
    out = [HEADER.pack(MAGIC, VERSION, tree.kind, tree.k, tree.rows, tree.cols, tree.side,
                       tree.kr_modulus if is_bt else 0, tree.kr_base if is_bt else 0)]
    _put_bits(out, tree.T)
    _put_bits(out, tree.L)
    _put_bits(out, tree.N if is_bt else BitVector())

    if not is_bt:
        out.append(U64.pack(0))
        return b"".join(out)

    out.append(U64.pack(len(tree.D)))
    out.append(np.asarray(tree.D, dtype="<u8").tobytes())
    for d in range(1, tree.height):
        out.append(U64.pack(len(tree.P[d])))
        _put_packed(out, tree.P[d])
        _put_packed(out, tree.O[d])
    return b"".join(out)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def unpack(self, fmt):
        try:
            values = fmt.unpack_from(self.data, self.pos)
        except struct.error:
            raise ContainerFormatError(f"truncated container at byte {self.pos}")
        self.pos += fmt.size
        return values

    def u64(self):
        return self.unpack(U64)[0]

    def u8(self):
        return self.unpack(U8)[0]

    def words(self, count):
        end = self.pos + 8 * count
        if end > len(self.data):
            raise ContainerFormatError(f"truncated container: need {8 * count} payload bytes at byte {self.pos}")
        words = np.frombuffer(self.data, dtype="<u8", count=count, offset=self.pos)
        self.pos = end
        return words

    def bits(self):
        length = self.u64()
        return BitVector.from_words(self.words(words_for(length)), length)

    def packed(self, entries):
        width = self.u8()
        if not 1 <= width <= WORD_BITS:
            raise ContainerFormatError(f"bad packed width {width} at byte {self.pos - 1}")
        return PackedIntArray.from_words(width, entries, self.words(words_for(entries * width)))


def loads(data, hop_check=True):
    """Rebuild a structure from container bytes"""
    reader = _Reader(data)
    magic, version, kind, k, rows, cols, side, modulus, base = reader.unpack(HEADER)
    if magic != MAGIC:
        raise ContainerFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ContainerFormatError(f"unsupported container version {version}")
    if kind not in (K2Tree.kind, TwoDBlockTree.kind):
        raise ContainerFormatError(f"unknown structure kind {kind}")
    if k < 2 or side < k:
        raise ContainerFormatError(f"bad geometry k={k} side={side}")

    T, L, N = reader.bits(), reader.bits(), reader.bits()
    d_count = reader.u64()
    D = reader.words(d_count).tolist()

    try:
        if kind == K2Tree.kind:
            if len(N) or d_count:
                raise ContainerFormatError("k2tree container carries bt2d sections")
            tree = K2Tree(k, side, T, L, rows, cols)
        else:
            height = d_count - 1
            P, O = [PackedIntArray(1, 0)], [PackedIntArray(1, 0)]
            for _ in range(1, height):
                count = reader.u64()
                P.append(reader.packed(count))
                O.append(reader.packed(2 * count))
            tree = TwoDBlockTree(k, side, T, L, N, P, O, D, rows, cols,
                                 kr_modulus=modulus, kr_base=base, hop_check=hop_check)
    except ValueError as e:
        if isinstance(e, ContainerFormatError):
            raise
        raise ContainerFormatError(f"inconsistent container: {e}")

    if reader.pos != len(data):
        raise ContainerFormatError(f"{len(data) - reader.pos} trailing bytes after the last section")
    return tree


def store(tree, path):
    """Write the container; returns the file size in bytes"""
    data = dumps(tree)
    with open(path, "wb") as f:
        f.write(data)
    logger.info("stored %s container %s (%d bytes)", tree.name, path, len(data))
    return len(data)


def load(path, hop_check=True):
    with open(path, "rb") as f:
        data = f.read()
    tree = loads(data, hop_check=hop_check)
    logger.info("loaded %s container %s (%d bytes)", tree.name, path, len(data))
    return tree


def file_bits(path):
    return os.path.getsize(path) * 8
