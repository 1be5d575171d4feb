"""
Uncompressed matrix model, coordinate conventions, input parsing and padding.
The dense BitMatrix is the ground truth every compressed query is checked against.
"""

import re
from dataclasses import dataclass

import numpy as np

from src.errors import OutOfBoundsError, ParseError


def padded_side(n, k):
    """Smallest power of k that is >= n, and never below k"""
    if k < 2:
        raise ValueError(f"arity k must be at least 2, got {k}")
    side = k
    while side < n:
        side *= k
    return side


def log_k(side, k):
    """Exact base-k logarithm of a power of k"""
    height, s = 0, 1
    while s < side:
        s *= k
        height += 1
    if s != side:
        raise ValueError(f"side {side} is not a power of {k}")
    return height


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle [(x_min, y_min), (x_max, y_max)], inclusive.

    x is the column index and y the row index.
    """
    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise OutOfBoundsError(f"empty region {self}")

    @classmethod
    def parse(cls, text):
        """Parse "x1,y1,x2,y2" as used by the extract subcommand"""
        parts = text.split(",")
        if len(parts) != 4:
            raise ParseError(f"region must be x1,y1,x2,y2, got {text!r}")
        try:
            x1, y1, x2, y2 = (int(p) for p in parts)
        except ValueError:
            raise ParseError(f"region coordinates must be integers, got {text!r}")
        if min(x1, y1, x2, y2) < 0:
            raise OutOfBoundsError(f"negative coordinate in region {text!r}")
        return cls(x1, y1, x2, y2)

    @classmethod
    def square(cls, x, y, side):
        return cls(x, y, x + side - 1, y + side - 1)

    @property
    def width(self):
        return self.x_max - self.x_min + 1

    @property
    def height(self):
        return self.y_max - self.y_min + 1

    @property
    def shape(self):
        """(rows, cols) of the dense grid this region extracts to"""
        return (self.height, self.width)

    def shifted(self, dx, dy):
        return Region(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)

    def contains(self, other):
        return (self.x_min <= other.x_min and other.x_max <= self.x_max
                and self.y_min <= other.y_min and other.y_max <= self.y_max)

    def within(self, side):
        return 0 <= self.x_min and 0 <= self.y_min and self.x_max < side and self.y_max < side


class BitMatrix:
    """Dense binary matrix padded with zeros to a power-of-k side"""

    def __init__(self, cells, rows, cols, k=2):
        cells = np.array(cells, dtype=np.uint8)
        if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
            raise ValueError("cells must be a square 2-D array")
        side = cells.shape[0]
        if side != padded_side(max(rows, cols, 1), k):
            raise ValueError(f"side {side} is not the padded side for {rows}x{cols} with k={k}")
        if cells[rows:, :].any() or cells[:, cols:].any():
            raise ValueError("padding cells must be zero")

        self.rows = rows
        self.cols = cols
        self.k = k
        self.side = side
        self.cells = cells
        self.cells.flags.writeable = False

    @classmethod
    def from_dense(cls, array, k=2):
        """Pad a logical rows x cols 0/1 array up to the power-of-k side"""
        array = np.asarray(array, dtype=np.uint8)
        if array.ndim != 2:
            raise ValueError("expected a 2-D array")
        rows, cols = array.shape
        side = padded_side(max(rows, cols, 1), k)
        cells = np.zeros((side, side), dtype=np.uint8)
        cells[:rows, :cols] = array != 0
        return cls(cells, rows, cols, k)

    @classmethod
    def from_edges(cls, edges, nodes=None, k=2):
        """Adjacency matrix: edge (u, v) sets cell (x=v, y=u)"""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if nodes is None:
            nodes = int(edges.max()) + 1 if len(edges) else 1
        side = padded_side(nodes, k)
        cells = np.zeros((side, side), dtype=np.uint8)
        cells[edges[:, 0], edges[:, 1]] = 1
        return cls(cells, nodes, nodes, k)

    def __eq__(self, other):
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and np.array_equal(self.logical, other.logical)

    def __repr__(self):
        return f"BitMatrix({self.rows}x{self.cols}, side={self.side}, k={self.k}, ones={self.ones})"

    @property
    def logical(self):
        return self.cells[: self.rows, : self.cols]

    @property
    def ones(self):
        return int(self.cells.sum(dtype=np.int64))

    @property
    def height(self):
        return log_k(self.side, self.k)

    def cell(self, x, y):
        if not (0 <= x < self.side and 0 <= y < self.side):
            raise OutOfBoundsError(f"cell ({x}, {y}) outside side {self.side}")
        return int(self.cells[y, x])

    def block(self, x, y, side):
        return self.cells[y:y + side, x:x + side]

    def edges(self):
        """(u, v) pairs in row-major order"""
        ys, xs = np.nonzero(self.cells)
        return list(zip(ys.tolist(), xs.tolist()))


def extract_region_oracle(m, r):
    """Verbatim copy of the cells in r, row-major"""
    if not r.within(m.side):
        raise OutOfBoundsError(f"region {r} outside side {m.side}")
    return m.cells[r.y_min:r.y_max + 1, r.x_min:r.x_max + 1].copy()


def parse_edgelist(stream, k=2):
    """Parse "u v" lines; '#' and '%' start comment lines"""
    edges = []
    for lineno, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8", errors="replace")
        text = line.strip()
        if not text or text[0] in "#%":
            continue
        parts = text.split()
        if len(parts) != 2:
            raise ParseError(f"expected two node ids, got {text!r}", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"node ids must be integers, got {text!r}", line=lineno)
        if u < 0 or v < 0:
            raise ParseError(f"node ids must be non-negative, got {text!r}", line=lineno)
        edges.append((u, v))

    if not edges:
        raise ParseError("edge list is empty")
    return BitMatrix.from_edges(edges, k=k)


_PBM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _pbm_header(data):
    """Return (magic, width, height, offset of the payload)"""
    pos = 0
    tokens = []
    for _ in range(3):
        match = _PBM_TOKEN.match(data, pos)
        if not match:
            raise ParseError("truncated PBM header")
        tokens.append(match.group(1))
        pos = match.end()

    magic = tokens[0]
    if magic not in (b"P1", b"P4"):
        raise ParseError(f"bad PBM magic {magic!r}")
    try:
        width, height = int(tokens[1]), int(tokens[2])
    except ValueError:
        raise ParseError("PBM dimensions must be integers")
    if width < 1 or height < 1:
        raise ParseError(f"PBM dimensions must be positive, got {width}x{height}")
    return magic, width, height, pos


def parse_pbm(stream, k=2):
    """Parse a P1 (ASCII) or P4 (binary) bitmap; black pixels become 1s"""
    data = stream.read() if hasattr(stream, "read") else bytes(stream)
    magic, width, height, pos = _pbm_header(data)

    if magic == b"P4":
        # Exactly one whitespace byte separates the header from the raster
        pos += 1
        row_bytes = (width + 7) // 8
        raster = np.frombuffer(data[pos:], dtype=np.uint8)
        if raster.size < row_bytes * height:
            raise ParseError(f"truncated P4 payload: need {row_bytes * height} bytes, got {raster.size}")
        rows = raster[: row_bytes * height].reshape(height, row_bytes)
        pixels = np.unpackbits(rows, axis=1)[:, :width]
    else:
        body = re.sub(rb"#[^\n]*", b"", data[pos:])
        digits = [c - ord("0") for c in body if chr(c) in "01"]
        if len(digits) < width * height:
            raise ParseError(f"truncated P1 payload: need {width * height} pixels, got {len(digits)}")
        pixels = np.array(digits[: width * height], dtype=np.uint8).reshape(height, width)

    return BitMatrix.from_dense(pixels, k=k)


def write_pbm(grid, stream, fmt="P4"):
    """Write a 0/1 grid (BitMatrix or 2-D array) as a P1 or P4 bitmap"""
    if isinstance(grid, BitMatrix):
        grid = grid.logical
    grid = np.asarray(grid, dtype=np.uint8)
    height, width = grid.shape
    if fmt == "P4":
        stream.write(f"P4\n{width} {height}\n".encode())
        stream.write(np.packbits(grid, axis=1).tobytes())
    elif fmt == "P1":
        lines = [f"P1\n{width} {height}"]
        lines.extend(" ".join(map(str, row)) for row in grid.tolist())
        stream.write(("\n".join(lines) + "\n").encode())
    else:
        raise ValueError(f"unknown PBM format {fmt!r}")


def write_edgelist(m, stream):
    stream.write(f"# {m.rows} nodes, {m.ones} edges\n")
    for u, v in m.edges():
        stream.write(f"{u} {v}\n")
