"""
Two-Dimensional Block Tree hybridised with k^2-tree empty-node pruning.

Layout (positions are in T:L, depths as in src/k2tree.py):
  T  1 = internal, 0 = leaf, levelwise, depths 1..height-1
  L  cells below the internal nodes of depth height-1
  N  one bit per 0 of T: 0 = empty node, 1 = back-reference leaf
  P  P[d] backward distances of the links of depth d
  O  O[d] offsets of the same links, x at even and y at odd positions
  D  D[d] = number of links at depths < d

Decoding a leaf p at depth d with exclusive rank:
  p' = rank0(T, p+1)                p is a link iff N[p'-1] == 1
  q  = rank1(N, p') - D[d]          1-based index of the link in its level
  ptr_block = p - P[d][q-1],  offsets = (O[d][2(q-1)], O[d][2(q-1)+1])

A link's source is the square of the same side starting at
origin(ptr_block) + offsets; every level block it overlaps is internal, so a
query that follows a link only meets further links at deeper levels.
"""

import logging
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.errors import HopBudgetExceeded, NotFoundError, OutOfBoundsError
from src.fingerprint2d import CandidateTable, KarpRabin, build_grid
from src.k2tree import ROOT, CostPyramid, K2Tree, QueryStats, child_origins, leaf_cells
from src.matrix_io import Region, extract_region_oracle, log_k
from src.settings import MERSENNE_61
from src.succinct import BitVector, PackedIntArray

logger = logging.getLogger(__name__)

# Node states used while a level is being classified
_EMPTY, _CANDIDATE, _INTERNAL, _LINK = 0, 1, 2, 3


class NodeClass(Enum):
    INTERNAL = "internal"
    EMPTY_LEAF = "empty"
    BACKREF_LEAF = "backref"
    CELL_LEVEL = "cell"


@dataclass(frozen=True)
class CopyLink:
    target_block: int
    source_origin: tuple
    ptr_block: int
    offsets: tuple
    depth: int


@dataclass
class BuildParams:
    seed: int = 0
    modulus: int = MERSENNE_61
    base: int = None
    # Off: every non-empty block is a copy candidate, however cheap its subtree
    cost_filter: bool = True
    # Side of the blocks stored verbatim in L; None means k. Containers only hold k
    leaf_side: int = None

    def karp_rabin(self):
        if self.base is not None:
            return KarpRabin(self.modulus, self.base)
        return KarpRabin.from_seed(self.seed, self.modulus)


def offset_width(block_side):
    """Bits per offset for a block of the given side"""
    return max(1, (block_side - 1).bit_length())


class TwoDBlockTree(K2Tree):
    kind = 1
    name = "bt2d"

    def __init__(self, k, side, T, L, N, P, O, D, rows=None, cols=None,
                 kr_modulus=0, kr_base=0, hop_check=True, leaf_side=None):
        super().__init__(k, side, T, L, rows, cols, leaf_side=leaf_side)
        if len(N) != T.zeros:
            raise ValueError(f"|N|={len(N)} but T has {T.zeros} zeros")
        if len(P) != self.height or len(O) != self.height:
            raise ValueError(f"expected {self.height} P/O levels, got {len(P)} and {len(O)}")
        if len(D) != self.height + 1 or D[0] != 0:
            raise ValueError("D must hold height+1 cumulative counts starting at 0")
        for d in range(self.height):
            if D[d + 1] - D[d] != len(P[d]) or len(O[d]) != 2 * len(P[d]):
                raise ValueError(f"level {d}: D, P and O disagree on the number of links")
        if D[-1] != N.ones:
            raise ValueError(f"N marks {N.ones} links, D counts {D[-1]}")

        self.N = N
        self.P = list(P)
        self.O = list(O)
        self.D = list(D)
        self.kr_modulus = kr_modulus
        self.kr_base = kr_base
        self.hop_budget = self.height * self.kk if hop_check else None
        self._nbits = N.bits
        self._ones = None
        # Encoder bookkeeping, only present on freshly built trees
        self.build_links = None

    # Layout decoding

    def node_class(self, p):
        if p == ROOT:
            return NodeClass.INTERNAL
        if p < 0:
            raise OutOfBoundsError(f"position {p} outside T:L")
        if p >= len(self.T):
            if p >= len(self.T) + len(self.L):
                raise OutOfBoundsError(f"position {p} outside T:L")
            return NodeClass.CELL_LEVEL
        if self._tbits[p]:
            return NodeClass.INTERNAL
        if self._nbits[self.T.rank0(p + 1) - 1]:
            return NodeClass.BACKREF_LEAF
        return NodeClass.EMPTY_LEAF

    def _decode(self, p, d, zeros):
        q = self.N.rank1(zeros) - self.D[d]
        ptr = p - self.P[d][q - 1]
        offsets = self.O[d]
        return ptr, offsets[2 * (q - 1)], offsets[2 * (q - 1) + 1]

    def decode_link(self, p, d=None):
        if not 0 <= p < len(self.T) or self._tbits[p]:
            raise NotFoundError(f"position {p} is not a leaf of T")
        zeros = self.T.rank0(p + 1)
        if not self._nbits[zeros - 1]:
            raise NotFoundError(f"position {p} is an empty node, not a back-reference")
        if d is None:
            d = self.depth_of(p)
        ptr, ox, oy = self._decode(p, d, zeros)
        px, py = self.origin(ptr)
        return CopyLink(target_block=p, source_origin=(px + ox, py + oy),
                        ptr_block=ptr, offsets=(ox, oy), depth=d)

    def links(self):
        """Decode every back-reference in T order"""
        return [self.decode_link(p) for p in np.flatnonzero(self._tbits == 0).tolist()
                if self._nbits[self.T.rank0(p + 1) - 1]]

    # Queries

    def _back(self, p, d, x0, y0, x1, y1):
        # Climb until the translated region fits inside the node
        s = self._sides[d]
        while x1 >= s or y1 >= s:
            i = p % self.kk
            x0 += (i % self.k) * s
            x1 += (i % self.k) * s
            y0 += (i // self.k) * s
            y1 += (i // self.k) * s
            p = ROOT if p < self.kk else self.T.select1(p // self.kk)
            d -= 1
            s = self._sides[d]
        return p, d, x0, y0, x1, y1

    def back(self, ptr_block, ox, oy, d, pending):
        """Translate a region relative to ptr_block by the offsets and climb
        to the first ancestor that contains it.

        Returns (region relative to that ancestor, ancestor position, its depth).
        """
        r = pending.shifted(ox, oy)
        p, d2, x0, y0, x1, y1 = self._back(ptr_block, d, r.x_min, r.y_min, r.x_max, r.y_max)
        return Region(x0, y0, x1, y1), p, d2

    def _leaf(self, p, d, x0, y0, x1, y1, r, c, walk, chain):
        zeros = self.T.rank0(p + 1)
        if not self._nbits[zeros - 1]:
            return

        chain += 1
        if self.hop_budget is not None and chain > self.hop_budget:
            raise HopBudgetExceeded(f"followed more than {self.hop_budget} links from position {p}")
        ptr, ox, oy = self._decode(p, d, zeros)
        q, dq, x0, y0, x1, y1 = self._back(ptr, d, x0 + ox, y0 + oy, x1 + ox, y1 + oy)
        walk.stats.hops += 1
        walk.stats.climbs.append(d - dq)
        self._descend(q, dq, x0, y0, x1, y1, r, c, walk, chain)

    # Size accounting

    @property
    def ones(self):
        if self._ones is None:
            full = Region(0, 0, self.side - 1, self.side - 1)
            self._ones = int(self.access(full).sum(dtype=np.int64))
        return self._ones

    def size_breakdown(self):
        parts = {
            "T": len(self.T),
            "L": len(self.L),
            "N": len(self.N),
            "P": sum(arr.payload_bits for arr in self.P),
            "O": sum(arr.payload_bits for arr in self.O),
            "D": 64 * len(self.D),
        }
        parts["total"] = sum(parts.values())
        return parts

    def links_per_level(self):
        return [self.D[d + 1] - self.D[d] for d in range(self.height)]


class _Builder:
    """Level-by-level construction; see build_bt2d"""

    def __init__(self, m, k, params):
        self.m = m
        self.k = k
        self.kk = k * k
        self.side = m.side
        self.leaf_side = k if params.leaf_side is None else params.leaf_side
        self.height = log_k(m.side, k) - log_k(self.leaf_side, k) + 1
        self.params = params
        self.kr = params.karp_rabin()
        self.pyramid = CostPyramid(m.cells, k, self.leaf_side)

    def run(self):
        side, k = self.side, self.k
        xs, ys = child_origins([0], [0], side, k)
        t_levels, n_levels = [], []
        P, O, D = [PackedIntArray(1, 0)], [PackedIntArray(1, 0)], [0, 0]
        links = []
        level_start = 0
        # Origins of the internal nodes of the deepest level built so far
        lx, ly = np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)

        for d in range(1, self.height):
            s = side // k ** d
            started = time.perf_counter()
            status, link_of = self._classify(s, xs, ys)

            internal = status == _INTERNAL
            leaves = status[~internal]
            t_levels.append(internal.astype(np.uint8))
            n_levels.append((leaves == _LINK).astype(np.uint8))

            distances, offsets = [], []
            for t in np.flatnonzero(status == _LINK).tolist():
                ptr, sx, sy = link_of[t]
                ox, oy = sx - int(xs[ptr]), sy - int(ys[ptr])
                distances.append(t - ptr)
                offsets.extend((ox, oy))
                links.append(CopyLink(target_block=level_start + t, source_origin=(sx, sy),
                                      ptr_block=level_start + ptr, offsets=(ox, oy), depth=d))
            P.append(PackedIntArray.from_values(distances))
            O.append(PackedIntArray.from_values(offsets, width=offset_width(s)))
            D.append(D[-1] + len(distances))

            logger.info("depth %d side %d: %d nodes, %d internal, %d links (%.3fs)",
                        d, s, len(status), int(internal.sum()), len(distances),
                        time.perf_counter() - started)
            level_start += len(status)
            lx, ly = xs[internal], ys[internal]
            xs, ys = child_origins(lx, ly, s, k)

        T = BitVector(np.concatenate(t_levels) if t_levels else np.zeros(0, dtype=np.uint8))
        N = BitVector(np.concatenate(n_levels) if n_levels else np.zeros(0, dtype=np.uint8))
        L = BitVector(leaf_cells(self.m.cells, lx, ly, self.leaf_side))
        tree = TwoDBlockTree(k, side, T, L, N, P, O, D, rows=self.m.rows, cols=self.m.cols,
                             kr_modulus=self.kr.modulus, kr_base=self.kr.base, leaf_side=self.leaf_side)
        tree.build_links = links
        return tree

    def _classify(self, s, xs, ys):
        """Classify the nodes of one level; returns (status, link_of)"""
        count = len(xs)
        bxs, bys = xs // s, ys // s
        nonzero = self.pyramid.nonzero[s][bys, bxs]
        status = np.where(nonzero, _CANDIDATE, _EMPTY).astype(np.int8)

        if self.params.cost_filter:
            # Pointer estimate: distance bounded by the level span, two offsets, one N bit
            pointer_bits = max(1, count.bit_length()) + 2 * offset_width(s) + 1
            costs = self.pyramid.cost(s)[bys, bxs]
            status[nonzero & (costs <= pointer_bits)] = _INTERNAL

        link_of = {}
        candidates = np.flatnonzero(status == _CANDIDATE)
        if candidates.size == 0:
            return status, link_of

        grid = build_grid(self.m, s, self.kr)
        table = CandidateTable(self.m, s)
        for t in candidates.tolist():
            table.insert(grid.at(int(xs[t]), int(ys[t])), (int(xs[t]), int(ys[t])), t)
        if logger.isEnabledFor(logging.DEBUG):
            distinct = sum(len(table.contents(int(fp))) for fp in table.keys())
            logger.debug("side %d: %d candidates, %d distinct contents under %d fingerprints",
                         s, candidates.size, distinct, len(table))

        blocks_per_side = self.side // s
        node_at = np.full((blocks_per_side, blocks_per_side), -1, dtype=np.int64)
        node_at[bys, bxs] = np.arange(count)
        marked = np.zeros(count, dtype=bool)

        flat = grid.block_fp.ravel()
        width = grid.block_fp.shape[1]
        for h in np.flatnonzero(np.isin(flat, table.keys())).tolist():
            fp = int(flat[h])
            sy, sx = divmod(h, width)
            content = table.match(fp, sx, sy)
            if content is None:
                continue
            self._resolve(content, s, sx, sy, xs, ys, status, node_at, marked, link_of)
            table.prune(fp)
            if not table:
                break

        # Targets never reached by the scan keep their subtree
        status[status == _CANDIDATE] = _INTERNAL
        return status, link_of

    def _resolve(self, content, s, sx, sy, xs, ys, status, node_at, marked, link_of):
        """Use the square at (sx, sy) as the first occurrence of content's targets"""
        covered = node_at[sy // s:(sy + s - 1) // s + 1, sx // s:(sx + s - 1) // s + 1].ravel()
        if (covered < 0).any():
            return
        covered_status = status[covered]
        if ((covered_status == _EMPTY) | (covered_status == _LINK)).any():
            return

        ptr = int(covered[0])
        converted = False
        waiting = []
        for t in content.targets:
            tx, ty = int(xs[t]), int(ys[t])
            if marked[t] or (abs(tx - sx) < s and abs(ty - sy) < s):
                # Self occurrence, overlap with the source, or already a source block
                status[t] = _INTERNAL
            elif ptr < t:
                status[t] = _LINK
                link_of[t] = (ptr, sx, sy)
                converted = True
                logger.debug("side %d: block (%d,%d) <- source (%d,%d)", s, tx, ty, sx, sy)
            else:
                # Would need a forward pointer; a later occurrence may still serve it
                waiting.append(t)
        content.targets = waiting
        if converted:
            marked[covered] = True


def build_bt2d(m, k=None, params=None):
    """Build the 2D Block Tree of a padded BitMatrix"""
    params = params or BuildParams()
    k = m.k if k is None else k
    if k < 2:
        raise ValueError(f"arity k must be at least 2, got {k}")
    log_k(m.side, k)
    if params.leaf_side is not None:
        if not k <= params.leaf_side <= m.side:
            raise ValueError(f"leaf side {params.leaf_side} outside [{k}, {m.side}]")
        log_k(params.leaf_side, k)

    started = time.perf_counter()
    tree = _Builder(m, k, params).run()
    logger.info("built bt2d k=%d side=%d: %d links, %d bits in %.3fs", k, m.side,
                len(tree.build_links), tree.total_bits(), time.perf_counter() - started)
    return tree


def audit(tree, m):
    """Structural post-build checks; returns a list of violation messages"""
    violations = []

    for d in range(tree.height):
        if tree.D[d + 1] - tree.D[d] != len(tree.P[d]):
            violations.append(f"D[{d + 1}]-D[{d}] does not match |P[{d}]|")

    # Block origins and classes per depth, rebuilt from the layout
    leaves_at = {}
    internal_at = {}
    xs, ys = child_origins([0], [0], tree.side, tree.k)
    for d in range(1, tree.height):
        start = tree.level_start[d]
        s = tree._sides[d]
        internal_at[d] = {}
        leaves_at[d] = {}
        for i, (x, y) in enumerate(zip(xs.tolist(), ys.tolist())):
            cls = tree.node_class(start + i)
            (internal_at if cls is NodeClass.INTERNAL else leaves_at)[d][(x // s, y // s)] = cls
        bits = tree._tbits[start:start + len(xs)].astype(bool)
        xs, ys = child_origins(xs[bits], ys[bits], s, tree.k)

    decoded = tree.links()
    for link in decoded:
        d = link.depth
        s = tree._sides[d]
        ox, oy = link.offsets
        if not (0 <= ox < s and 0 <= oy < s):
            violations.append(f"link at {link.target_block}: offsets {link.offsets} outside [0, {s})")
        if tree.node_class(link.ptr_block) is not NodeClass.INTERNAL:
            violations.append(f"link at {link.target_block}: pointed block {link.ptr_block} is not internal")
        if tree.depth_of(link.ptr_block) != d or link.ptr_block >= link.target_block:
            violations.append(f"link at {link.target_block}: pointer {link.ptr_block} is not an earlier block of depth {d}")

        sx, sy = link.source_origin
        for by in range(sy // s, (sy + s - 1) // s + 1):
            for bx in range(sx // s, (sx + s - 1) // s + 1):
                if (bx, by) in leaves_at[d]:
                    violations.append(f"link at {link.target_block}: source overlaps leaf block ({bx * s},{by * s})")
                elif (bx, by) not in internal_at[d]:
                    violations.append(f"link at {link.target_block}: source overlaps missing block ({bx * s},{by * s})")

        if not Region.square(sx, sy, s).within(tree.side):
            violations.append(f"link at {link.target_block}: source ({sx},{sy}) leaves the matrix")
            continue
        tx, ty = tree.origin(link.target_block)
        source = tree.access(Region.square(sx, sy, s))
        if not np.array_equal(source, extract_region_oracle(m, Region.square(tx, ty, s))):
            violations.append(f"link at {link.target_block}: source content differs from target")

    if tree.build_links is not None and tree.build_links != decoded:
        violations.append("decoded links differ from the links recorded at build time")
    return violations


__all__ = [
    "BuildParams", "CopyLink", "NodeClass", "QueryStats", "TwoDBlockTree",
    "audit", "build_bt2d", "offset_width",
]
