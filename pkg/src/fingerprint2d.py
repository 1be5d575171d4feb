"""
Two-dimensional Karp-Rabin fingerprints of every side x side submatrix.

Phase 1 rolls a fingerprint of each vertical strip M[row..row+side-1][col]
downwards with radix base^side; phase 2 rolls the strip fingerprints
rightwards with radix base. The result equals the row-major polynomial
hash of the block, which is what fingerprint_direct computes.

Fingerprints only nominate candidates: every match is confirmed cell by
cell before it is used.
"""

import random
from dataclasses import dataclass, field

import numpy as np

from src.errors import ConfigError, OutOfBoundsError
from src.settings import MERSENNE_61

_U61 = np.uint64(MERSENNE_61)
_LO31 = np.uint64((1 << 31) - 1)
_LO30 = np.uint64((1 << 30) - 1)
_S1 = np.uint64(1)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S61 = np.uint64(61)


def _mulmod61(a, b):
    """a * b mod 2^61-1 on uint64 values below the modulus"""
    a_hi, a_lo = a >> _S31, a & _LO31
    b_hi, b_lo = b >> _S31, b & _LO31
    mid = a_hi * b_lo + a_lo * b_hi
    x = ((a_hi * b_hi) << _S1) + (mid >> _S30) + ((mid & _LO30) << _S31) + a_lo * b_lo
    x = (x & _U61) + (x >> _S61)
    return np.where(x >= _U61, x - _U61, x)


def check_modulus(modulus):
    if modulus != MERSENNE_61 and not 2 < modulus < (1 << 32):
        raise ConfigError(f"modulus must be 2^61-1 or below 2^32, got {modulus}")
    return modulus


def mulmod(a, b, modulus):
    """Vectorised (a * b) mod modulus for uint64 arrays of residues"""
    b = np.uint64(b)
    if modulus == MERSENNE_61:
        return _mulmod61(a, b)
    return (a * b) % np.uint64(modulus)


@dataclass(frozen=True)
class KarpRabin:
    modulus: int = MERSENNE_61
    base: int = 2

    def __post_init__(self):
        check_modulus(self.modulus)
        if not 2 <= self.base <= self.modulus - 2:
            raise ConfigError(f"base must lie in [2, {self.modulus - 2}], got {self.base}")

    @classmethod
    def from_seed(cls, seed, modulus=MERSENNE_61):
        """Base drawn uniformly from [2, modulus-2], reproducible from the seed"""
        check_modulus(modulus)
        return cls(modulus, random.Random(seed).randint(2, modulus - 2))


@dataclass
class FingerprintGrid:
    side: int
    modulus: int
    base: int
    col_fp: np.ndarray
    block_fp: np.ndarray

    def at(self, x, y):
        """Fingerprint of the block whose top-left corner is (x, y)"""
        return int(self.block_fp[y, x])


def build_grid(m, side, kr):
    """Fingerprint every side x side window of m in time linear in n^2"""
    cells = m.cells
    n = cells.shape[0]
    if not 1 <= side <= n:
        raise OutOfBoundsError(f"block side {side} outside [1, {n}]")

    modulus, base = kr.modulus, kr.base
    mod = np.uint64(modulus)
    bits = cells.astype(np.uint64)
    span = n - side + 1

    # Phase 1: vertical strips, radix base^side
    strip_radix = pow(base, side, modulus)
    strip_top = np.uint64(pow(strip_radix, side - 1, modulus))
    col_fp = np.empty((span, n), dtype=np.uint64)
    acc = np.zeros(n, dtype=np.uint64)
    for t in range(side):
        acc = (mulmod(acc, strip_radix, modulus) + bits[t]) % mod
    col_fp[0] = acc
    for row in range(1, span):
        acc = (acc + mod - bits[row - 1] * strip_top) % mod
        acc = (mulmod(acc, strip_radix, modulus) + bits[row + side - 1]) % mod
        col_fp[row] = acc

    # Phase 2: roll the strip fingerprints rightwards, radix base
    top = pow(base, side - 1, modulus)
    strips = np.ascontiguousarray(col_fp.T)
    block_t = np.empty((span, span), dtype=np.uint64)
    acc = np.zeros(span, dtype=np.uint64)
    for u in range(side):
        acc = (mulmod(acc, base, modulus) + strips[u]) % mod
    block_t[0] = acc
    for col in range(1, span):
        acc = (acc + mod - mulmod(strips[col - 1], top, modulus)) % mod
        acc = (mulmod(acc, base, modulus) + strips[col + side - 1]) % mod
        block_t[col] = acc

    return FingerprintGrid(side, modulus, base, col_fp, np.ascontiguousarray(block_t.T))


def fingerprint_direct(m, r, kr):
    """Row-major polynomial hash of a square region, computed from scratch"""
    if r.width != r.height:
        raise ValueError(f"region {r} is not square")
    if not r.within(m.side):
        raise OutOfBoundsError(f"region {r} outside side {m.side}")
    h = 0
    for bit in m.cells[r.y_min:r.y_max + 1, r.x_min:r.x_max + 1].ravel().tolist():
        h = (h * kr.base + bit) % kr.modulus
    return h


def _same_block(cells, ax, ay, bx, by, side):
    return np.array_equal(cells[ay:ay + side, ax:ax + side], cells[by:by + side, bx:bx + side])


def verify_equal(m, a, b):
    """Cell-by-cell equality of two same-sized regions"""
    if a.shape != b.shape:
        raise ValueError(f"regions {a} and {b} differ in size")
    if not (a.within(m.side) and b.within(m.side)):
        raise OutOfBoundsError(f"region outside side {m.side}")
    return np.array_equal(m.cells[a.y_min:a.y_max + 1, a.x_min:a.x_max + 1],
                          m.cells[b.y_min:b.y_max + 1, b.x_min:b.x_max + 1])


@dataclass
class Content:
    """One distinct block content: a witness corner in M and its unresolved targets"""
    witness: tuple
    targets: list = field(default_factory=list)


class CandidateTable:
    """Fingerprint -> distinct contents -> unresolved target block ids"""

    def __init__(self, m, side):
        self._cells = m.cells
        self.side = side
        self._entries = {}

    def __len__(self):
        return len(self._entries)

    def __bool__(self):
        return bool(self._entries)

    def keys(self):
        return np.fromiter(self._entries.keys(), dtype=np.uint64, count=len(self._entries))

    def contents(self, fp):
        return list(self._entries.get(fp, ()))

    def insert(self, fp, origin, target):
        contents = self._entries.setdefault(fp, [])
        for content in contents:
            if _same_block(self._cells, *content.witness, *origin, self.side):
                content.targets.append(target)
                return content
        content = Content(origin, [target])
        contents.append(content)
        return content

    def match(self, fp, x, y):
        """Content stored under fp that equals the block at (x, y), if any"""
        for content in self._entries.get(fp, ()):
            if content.targets and _same_block(self._cells, *content.witness, x, y, self.side):
                return content
        return None

    def prune(self, fp):
        """Drop contents whose targets are all resolved"""
        contents = [c for c in self._entries.get(fp, ()) if c.targets]
        if contents:
            self._entries[fp] = contents
        else:
            self._entries.pop(fp, None)
