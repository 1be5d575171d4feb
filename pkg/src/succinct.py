"""
Bit-level primitives: rank/select bitvectors and fixed-width packed integer arrays
"""

from bisect import bisect_left

import numpy as np

from src.errors import NotFoundError, OutOfBoundsError

WORD_BITS = 64
SUPERBLOCK_WORDS = 8  # 512 bits per superblock
SUPERBLOCK_BITS = WORD_BITS * SUPERBLOCK_WORDS
WORD_MASK = (1 << WORD_BITS) - 1


def words_for(nbits):
    """Number of 64-bit words needed for nbits"""
    return (nbits + WORD_BITS - 1) // WORD_BITS


def pack_bits(bits):
    """Pack a 0/1 uint8 array into little-endian 64-bit words, LSB first"""
    nwords = words_for(len(bits))
    padded = np.zeros(nwords * WORD_BITS, dtype=np.uint8)
    padded[: len(bits)] = bits
    return np.packbits(padded, bitorder="little").view("<u8")


def unpack_bits(words, length):
    """Inverse of pack_bits"""
    raw = np.asarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length].copy()


def _nth_set_bit(word, n):
    """Position of the n-th (1-based) set bit of a word"""
    for _ in range(n - 1):
        word &= word - 1
    return (word & -word).bit_length() - 1


class BitVector:
    """Plain bitvector with a two-level rank directory.

    rank(b, p) counts occurrences of b in [0, p); select(b, j) returns the
    position of the j-th b (1-based). Immutable after construction.
    """

    def __init__(self, bits=()):
        if isinstance(bits, str):
            arr = np.frombuffer(bits.replace(" ", "").encode(), dtype=np.uint8) - ord("0")
        else:
            arr = np.asarray(bits, dtype=np.uint8).ravel()
        if arr.size and arr.max() > 1:
            raise ValueError("bitvector entries must be 0 or 1")

        self._bits = arr.copy()
        self._bits.flags.writeable = False
        self.length = int(arr.size)
        self._words = pack_bits(self._bits)
        self._build_directory()

    @classmethod
    def from_words(cls, words, length):
        if len(words) != words_for(length):
            raise ValueError(f"{len(words)} words cannot hold exactly {length} bits")
        return cls(unpack_bits(words, length))

    def _build_directory(self):
        words = self._words
        if len(words):
            per_word = np.unpackbits(words.view(np.uint8)).reshape(-1, WORD_BITS).sum(axis=1)
        else:
            per_word = np.zeros(0, dtype=np.int64)
        cumulative = np.concatenate(([0], np.cumsum(per_word, dtype=np.int64)))

        # Superblock counts are absolute, block counts relative to their superblock
        super_counts = cumulative[::SUPERBLOCK_WORDS]
        block_counts = cumulative - np.repeat(super_counts, SUPERBLOCK_WORDS)[: len(cumulative)]

        self._word_list = [int(w) for w in words]
        self._super = super_counts.tolist()
        self._block = block_counts.astype(np.uint16).tolist()
        self.ones = int(cumulative[-1])

    def __len__(self):
        return self.length

    def __getitem__(self, i):
        if not 0 <= i < self.length:
            raise OutOfBoundsError(f"bit index {i} outside [0, {self.length})")
        return int(self._bits[i])

    def __eq__(self, other):
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.length == other.length and np.array_equal(self._bits, other._bits)

    def __repr__(self):
        preview = "".join(map(str, self._bits[:64].tolist()))
        suffix = "..." if self.length > 64 else ""
        return f"BitVector({preview}{suffix}, length={self.length})"

    @property
    def bits(self):
        """Read-only uint8 view of the bits"""
        return self._bits

    @property
    def words(self):
        return self._words

    @property
    def zeros(self):
        return self.length - self.ones

    def _rank1_at(self, w):
        return self._super[w // SUPERBLOCK_WORDS] + self._block[w]

    def rank1(self, p):
        if not 0 <= p <= self.length:
            raise OutOfBoundsError(f"rank position {p} outside [0, {self.length}]")
        w, off = divmod(p, WORD_BITS)
        r = self._rank1_at(w)
        if off:
            r += (self._word_list[w] & ((1 << off) - 1)).bit_count()
        return r

    def rank0(self, p):
        return p - self.rank1(p)

    def rank(self, b, p):
        return self.rank1(p) if b else self.rank0(p)

    def select1(self, j):
        return self._select(1, j)

    def select0(self, j):
        return self._select(0, j)

    def select(self, b, j):
        return self._select(1 if b else 0, j)

    def _select(self, b, j):
        total = self.ones if b else self.zeros
        if not 1 <= j <= total:
            raise NotFoundError(f"select{b}({j}) with only {total} occurrences")

        if b:
            count_at_super = lambda sb: self._super[sb]
            count_at_word = self._rank1_at
        else:
            count_at_super = lambda sb: sb * SUPERBLOCK_BITS - self._super[sb]
            count_at_word = lambda w: w * WORD_BITS - self._rank1_at(w)

        # Last superblock whose prefix count is still below j
        sb = bisect_left(range(len(self._super)), j, key=count_at_super) - 1
        w = sb * SUPERBLOCK_WORDS
        while count_at_word(w + 1) < j:
            w += 1

        word = self._word_list[w] if b else ~self._word_list[w] & WORD_MASK
        return w * WORD_BITS + _nth_set_bit(word, j - count_at_word(w))


class PackedIntArray:
    """Fixed-width unsigned integers packed into 64-bit words, LSB first"""

    def __init__(self, width, entries):
        if not 1 <= width <= WORD_BITS:
            raise ValueError(f"width must be in [1, {WORD_BITS}], got {width}")
        if entries < 0:
            raise ValueError("entries must be non-negative")
        self.width = width
        self.entries = entries
        self._mask = (1 << width) - 1
        self._words = [0] * words_for(entries * width)

    @classmethod
    def from_values(cls, values, width=None):
        values = [int(v) for v in values]
        if width is None:
            width = max([1] + [v.bit_length() for v in values])
        arr = cls(width, len(values))
        for i, v in enumerate(values):
            arr.set(i, v)
        return arr

    @classmethod
    def from_words(cls, width, entries, words):
        arr = cls(width, entries)
        if len(words) != len(arr._words):
            raise ValueError(f"expected {len(arr._words)} payload words, got {len(words)}")
        arr._words = [int(w) for w in words]
        return arr

    def __len__(self):
        return self.entries

    def __getitem__(self, i):
        return self.get(i)

    def __iter__(self):
        return (self.get(i) for i in range(self.entries))

    def __eq__(self, other):
        if not isinstance(other, PackedIntArray):
            return NotImplemented
        return self.width == other.width and list(self) == list(other)

    def __repr__(self):
        return f"PackedIntArray(width={self.width}, values={list(self)[:16]})"

    def _check_index(self, i):
        if not 0 <= i < self.entries:
            raise OutOfBoundsError(f"index {i} outside [0, {self.entries})")

    def get(self, i):
        self._check_index(i)
        bit = i * self.width
        w, off = divmod(bit, WORD_BITS)
        value = self._words[w] >> off
        if off + self.width > WORD_BITS:
            value |= self._words[w + 1] << (WORD_BITS - off)
        return value & self._mask

    def set(self, i, value):
        self._check_index(i)
        if not 0 <= value <= self._mask:
            raise ValueError(f"value {value} does not fit in {self.width} bits")
        bit = i * self.width
        w, off = divmod(bit, WORD_BITS)
        self._words[w] = (self._words[w] & ~(self._mask << off) | (value << off)) & WORD_MASK
        spill = off + self.width - WORD_BITS
        if spill > 0:
            high_mask = (1 << spill) - 1
            self._words[w + 1] = (self._words[w + 1] & ~high_mask) | (value >> (self.width - spill))

    @property
    def payload_bits(self):
        return self.entries * self.width

    @property
    def words(self):
        return np.array(self._words, dtype="<u8")

    def to_list(self):
        return list(self)
