"""
Baseline k^2-tree: levelwise T/L bitvectors navigated with rank/select.

Conventions shared with the 2D Block Tree (src/bt2d.py):
  - the root is implicit (depth 0, the whole padded matrix); T starts with
    the root's k^2 children and holds depths 1..height-1, L holds the cells;
  - rank is exclusive, rank(p) counts [0, p). The inclusive-rank formulas of
    the k^2-tree literature become
        children(p) = [rank1(T, p+1) * k^2, rank1(T, p+1) * k^2 + k^2 - 1]
        parent(p)   = select1(T, p // k^2)      (p // k^2 == 0 means the root)
    and a node's child index inside its parent is p % k^2;
  - L stores, for every internal node of the deepest T level, its
    leaf_side x leaf_side block row-major. leaf_side defaults to k, which
    makes the formulas above hold for L positions too.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.errors import NotFoundError, OutOfBoundsError
from src.matrix_io import Region, log_k
from src.succinct import BitVector

logger = logging.getLogger(__name__)

ROOT = -1


def child_origins(xs, ys, parent_side, k):
    """Top-left corners of the k^2 children of each parent, row-major child order"""
    cs = parent_side // k
    idx = np.arange(k * k)
    dx = (idx % k) * cs
    dy = (idx // k) * cs
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    return (xs[:, None] + dx[None, :]).ravel(), (ys[:, None] + dy[None, :]).ravel()


def leaf_cells(cells, xs, ys, leaf_side):
    """Cells of the leaf_side blocks at (xs, ys), block after block, row-major inside"""
    dy, dx = np.divmod(np.arange(leaf_side * leaf_side), leaf_side)
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    return cells[ys[:, None] + dy[None, :], xs[:, None] + dx[None, :]].ravel()


def _block_sum(grid, k):
    n = grid.shape[0] // k
    return grid.reshape(n, k, n, k).sum(axis=(1, 3))


class CostPyramid:
    """Per-level non-empty indicators and pure k^2-tree subtree costs.

    A block of side s >= leaf_side costs 1 bit when it is all zero. Otherwise
    a side-leaf_side block costs 1 + leaf_side^2 and a larger one costs
    1 plus the costs of its k^2 children.
    """

    def __init__(self, cells, k, leaf_side=None):
        side = cells.shape[0]
        log_k(side, k)
        if side < k:
            raise ValueError(f"matrix side {side} is smaller than k={k}")
        self.k = k
        self.side = side
        self.leaf_side = k if leaf_side is None else leaf_side
        if not k <= self.leaf_side <= side:
            raise ValueError(f"leaf side {self.leaf_side} outside [{k}, {side}]")
        log_k(self.leaf_side, k)
        self.nonzero = {}

        counts = _block_sum(cells.astype(np.int64), k)
        s = k
        while True:
            self.nonzero[s] = counts > 0
            if s == side:
                break
            counts = _block_sum(counts, k)
            s *= k

    def cost(self, s):
        """Subtree bit cost of every aligned side-s block, as a grid"""
        if s < self.leaf_side or s not in self.nonzero:
            raise ValueError(f"no side-{s} level above leaf side {self.leaf_side}")
        t = self.leaf_side
        costs = np.where(self.nonzero[t], 1 + t * t, 1)
        while t < s:
            t *= self.k
            costs = np.where(self.nonzero[t], 1 + _block_sum(costs, self.k), 1)
        return costs


def subtree_bit_cost(m, r, k):
    """T+L bits the aligned square block r would take as a pure k^2-tree subtree"""
    side = r.width
    if r.height != side:
        raise ValueError(f"region {r} is not square")
    if side < k:
        raise ValueError(f"block side {side} is below the cell level for k={k}")
    log_k(side, k)
    if r.x_min % side or r.y_min % side:
        raise ValueError(f"region {r} is not aligned to the side-{side} grid")
    if not r.within(m.side):
        raise OutOfBoundsError(f"region {r} outside side {m.side}")
    pyramid = CostPyramid(m.block(r.x_min, r.y_min, side), k)
    return int(pyramid.cost(side)[0, 0])


@dataclass
class QueryStats:
    """Counters accumulated over one or more queries"""
    nodes: int = 0
    hops: int = 0
    climbs: list = field(default_factory=list)

    @property
    def mean_upwalk(self):
        return sum(self.climbs) / len(self.climbs) if self.climbs else 0.0


class _Walk:
    __slots__ = ("out", "stats")

    def __init__(self, out, stats):
        self.out = out
        self.stats = stats


class K2Tree:
    kind = 0
    name = "k2tree"

    def __init__(self, k, side, T, L, rows=None, cols=None, leaf_side=None):
        self.k = k
        self.kk = k * k
        self.side = side
        self.leaf_side = k if leaf_side is None else leaf_side
        if side < k:
            raise ValueError(f"side {side} must be at least k={k}")
        if not k <= self.leaf_side <= side:
            raise ValueError(f"leaf side {self.leaf_side} outside [{k}, {side}]")
        self.leaf_cells = self.leaf_side * self.leaf_side
        # Depths 1..height-1 live in T; depth height is the cell level
        self.height = log_k(side, k) - log_k(self.leaf_side, k) + 1
        self.rows = side if rows is None else rows
        self.cols = side if cols is None else cols
        self.T = T
        self.L = L
        self._tbits = T.bits
        self._lbits = L.bits
        # Block side at every depth, root included
        self._sides = [side // k ** d for d in range(self.height)] + [1]
        self.level_start = self._level_starts()
        # 1s of T above the deepest T level
        self._ones_above = self.T.rank1(self.level_start[self.height - 1]) if self.height > 1 else 0

    def _level_starts(self):
        """First T:L position of every depth; level_start[height] == |T|"""
        starts = [None]
        start, size = 0, self.kk
        for _ in range(1, self.height):
            starts.append(start)
            ones = self.T.rank1(min(start + size, len(self.T))) - self.T.rank1(min(start, len(self.T)))
            start += size
            size = ones * self.kk
        starts.append(start)
        cells = size // self.kk * self.leaf_cells
        if start != len(self.T) or cells != len(self.L):
            raise ValueError(f"inconsistent layout: |T|={len(self.T)}, |L|={len(self.L)}, expected {start} and {cells}")
        return starts

    def __repr__(self):
        return f"{type(self).__name__}(k={self.k}, side={self.side}, |T|={len(self.T)}, |L|={len(self.L)})"

    # Navigation

    def depth_of(self, p):
        if not 0 <= p < len(self.T) + len(self.L):
            raise OutOfBoundsError(f"position {p} outside T:L")
        d = self.height
        while self.level_start[d] > p:
            d -= 1
        return d

    def is_internal(self, p):
        return p == ROOT or (p < len(self.T) and bool(self._tbits[p]))

    def _first_child(self, p):
        return 0 if p == ROOT else self.T.rank1(p + 1) * self.kk

    def _cell_offset(self, p):
        """Start in L of the cells of internal node p of the deepest T level"""
        return 0 if p == ROOT else (self.T.rank1(p + 1) - self._ones_above - 1) * self.leaf_cells

    def _cell_parent(self, p):
        if self.height == 1:
            return ROOT
        return self.T.select1(self._ones_above + (p - len(self.T)) // self.leaf_cells + 1)

    def _above_cells(self, p):
        if p == ROOT:
            return self.height == 1
        return p >= self.level_start[self.height - 1]

    def children(self, p):
        if not self.is_internal(p):
            raise NotFoundError(f"position {p} is not an internal node")
        if self._above_cells(p):
            start = len(self.T) + self._cell_offset(p)
            return range(start, start + self.leaf_cells)
        start = self._first_child(p)
        return range(start, start + self.kk)

    def parent(self, p):
        if p >= len(self.T) + len(self.L):
            raise OutOfBoundsError(f"position {p} outside T:L")
        q = self._cell_parent(p) if p >= len(self.T) else None
        if q == ROOT or (q is None and p < self.kk):
            raise NotFoundError(f"position {p} is a child of the root and has no parent in T")
        return self.T.select1(p // self.kk) if q is None else q

    def origin(self, p):
        """Top-left (x, y) of the block at T:L position p"""
        if p == ROOT:
            return (0, 0)
        d = self.depth_of(p)
        if d == self.height:
            x, y = self.origin(self._cell_parent(p))
            w = (p - len(self.T)) % self.leaf_cells
            return (x + w % self.leaf_side, y + w // self.leaf_side)
        x = y = 0
        while p != ROOT:
            i = p % self.kk
            s = self._sides[d]
            x += (i % self.k) * s
            y += (i // self.k) * s
            p = ROOT if p < self.kk else self.T.select1(p // self.kk)
            d -= 1
        return (x, y)

    def node_region(self, p):
        x, y = self.origin(p)
        return Region.square(x, y, self._sides[0 if p == ROOT else self.depth_of(p)])

    # Queries

    def access(self, r, stats=None):
        """Dense grid of the cells in region r"""
        if not r.within(self.side):
            raise OutOfBoundsError(f"region {r} outside side {self.side}")
        walk = _Walk(np.zeros(r.shape, dtype=np.uint8), stats if stats is not None else QueryStats())
        self._descend(ROOT, 0, r.x_min, r.y_min, r.x_max, r.y_max, 0, 0, walk, 0)
        return walk.out

    region = access

    def cell(self, x, y):
        return int(self.access(Region(x, y, x, y))[0, 0])

    def row(self, y, stats=None):
        return self.access(Region(0, y, self.side - 1, y), stats)[0]

    def column(self, x, stats=None):
        return self.access(Region(x, 0, x, self.side - 1), stats)[:, 0]

    def direct_neighbors(self, node, stats=None):
        if not 0 <= node < self.rows:
            raise OutOfBoundsError(f"node {node} outside [0, {self.rows})")
        return np.flatnonzero(self.row(node, stats)).tolist()

    def reverse_neighbors(self, node, stats=None):
        if not 0 <= node < self.cols:
            raise OutOfBoundsError(f"node {node} outside [0, {self.cols})")
        return np.flatnonzero(self.column(node, stats)).tolist()

    def _descend(self, p, d, x0, y0, x1, y1, r, c, walk, chain):
        # (x0, y0)-(x1, y1) is relative to the top-left of internal node p
        if d == self.height - 1:
            start = self._cell_offset(p)
            cells = self._lbits[start:start + self.leaf_cells].reshape(self.leaf_side, self.leaf_side)
            walk.out[r:r + y1 - y0 + 1, c:c + x1 - x0 + 1] = cells[y0:y1 + 1, x0:x1 + 1]
            return

        k = self.k
        cs = self._sides[d + 1]
        first = self._first_child(p)
        for i in range(self.kk):
            cx = (i % k) * cs
            ix0 = max(x0, cx)
            ix1 = min(x1, cx + cs - 1)
            if ix0 > ix1:
                continue
            cy = (i // k) * cs
            iy0 = max(y0, cy)
            iy1 = min(y1, cy + cs - 1)
            if iy0 > iy1:
                continue

            q = first + i
            walk.stats.nodes += 1
            if self._tbits[q]:
                self._descend(q, d + 1, ix0 - cx, iy0 - cy, ix1 - cx, iy1 - cy,
                              r + iy0 - y0, c + ix0 - x0, walk, chain)
            else:
                self._leaf(q, d + 1, ix0 - cx, iy0 - cy, ix1 - cx, iy1 - cy,
                           r + iy0 - y0, c + ix0 - x0, walk, chain)

    def _leaf(self, p, d, x0, y0, x1, y1, r, c, walk, chain):
        # Empty submatrix; the result grid is pre-zeroed
        return

    # Size accounting

    @property
    def ones(self):
        return self.L.ones

    def size_breakdown(self):
        parts = {"T": len(self.T), "L": len(self.L)}
        parts["total"] = sum(parts.values())
        return parts

    def total_bits(self):
        return self.size_breakdown()["total"]

    def bits_per_edge(self):
        ones = self.ones
        return self.total_bits() / ones if ones else float("inf")


def build_k2(m, k=None):
    """Build the k^2-tree of a padded BitMatrix"""
    k = m.k if k is None else k
    if k < 2:
        raise ValueError(f"arity k must be at least 2, got {k}")
    side = m.side
    height = log_k(side, k)
    cells = m.cells
    pyramid = CostPyramid(cells, k)

    xs, ys = child_origins([0], [0], side, k)
    levels = []
    for d in range(1, height):
        s = side // k ** d
        nonzero = pyramid.nonzero[s][ys // s, xs // s]
        levels.append(nonzero.astype(np.uint8))
        xs, ys = child_origins(xs[nonzero], ys[nonzero], s, k)
        logger.debug("k2tree depth %d: %d nodes, %d internal", d, len(nonzero), int(nonzero.sum()))

    T = BitVector(np.concatenate(levels) if levels else np.zeros(0, dtype=np.uint8))
    L = BitVector(cells[ys, xs])
    logger.info("built k2tree k=%d side=%d: |T|=%d |L|=%d", k, side, len(T), len(L))
    return K2Tree(k, side, T, L, rows=m.rows, cols=m.cols)
