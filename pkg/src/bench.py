"""
Neighbor-query benchmark over one or two structures of the same matrix
"""

import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from src.errors import B2DTError
from src.k2tree import QueryStats

logger = logging.getLogger(__name__)


@dataclass
class StructureTimings:
    name: str
    total_bits: int
    bits_per_edge: float
    direct_mean_ns: float
    direct_median_ns: float
    reverse_mean_ns: float
    reverse_median_ns: float
    mean_upwalk: float = None
    max_upwalk: int = None
    hops: int = 0
    build_ns: int = None


@dataclass
class BenchReport:
    queries: int
    seed: int
    readers: int
    structures: list = field(default_factory=list)
    # Indexed by direction, bt2d over k2tree; only set when two structures were compared
    latency_ratio: dict = None

    def lines(self):
        """key=value lines, structure fields prefixed by structure name"""
        out = [f"queries={self.queries}", f"seed={self.seed}", f"readers={self.readers}"]
        for s in self.structures:
            out.append(f"{s.name}_bits={s.total_bits}")
            out.append(f"{s.name}_bpe={s.bits_per_edge:.4f}")
            if s.build_ns is not None:
                out.append(f"{s.name}_build_ns={s.build_ns}")
            out.append(f"{s.name}_direct_mean_ns={s.direct_mean_ns:.0f}")
            out.append(f"{s.name}_direct_median_ns={s.direct_median_ns:.0f}")
            out.append(f"{s.name}_reverse_mean_ns={s.reverse_mean_ns:.0f}")
            out.append(f"{s.name}_reverse_median_ns={s.reverse_median_ns:.0f}")
            if s.mean_upwalk is not None:
                out.append(f"{s.name}_hops={s.hops}")
                out.append(f"{s.name}_mean_upwalk={s.mean_upwalk:.4f}")
                out.append(f"{s.name}_max_upwalk={s.max_upwalk}")
        if self.latency_ratio is not None:
            out.append(f"bits_ratio={self.structures[1].total_bits / self.structures[0].total_bits:.4f}")
            for direction, ratio in self.latency_ratio.items():
                out.append(f"latency_ratio_{direction}={ratio:.4f}")
        return out


def sample_nodes(tree, count, seed):
    """Deterministic (direct, reverse) node samples"""
    rng = np.random.default_rng(seed)
    direct = rng.integers(0, tree.rows, size=count).tolist()
    reverse = rng.integers(0, tree.cols, size=count).tolist()
    return direct, reverse


def _same_matrix(a, b):
    return (a.k, a.rows, a.cols, a.side, a.ones) == (b.k, b.rows, b.cols, b.side, b.ones)


def _run(tree, direct, reverse, stats):
    """Answers and per-query latencies for one pass over the workload"""
    answers, latencies = [], {"direct": [], "reverse": []}
    for direction, nodes, query in (("direct", direct, tree.direct_neighbors),
                                    ("reverse", reverse, tree.reverse_neighbors)):
        for node in nodes:
            started = time.perf_counter_ns()
            answer = query(node, stats)
            latencies[direction].append(time.perf_counter_ns() - started)
            answers.append(answer)
    return answers, latencies


def _time(tree, direct, reverse, readers):
    stats = QueryStats()
    if readers <= 1:
        answers, latencies = _run(tree, direct, reverse, stats)
        return answers, latencies, stats

    # Each reader gets its own stats; the tree itself is shared read-only
    per_reader = [QueryStats() for _ in range(readers)]
    with ThreadPoolExecutor(max_workers=readers) as pool:
        results = list(pool.map(lambda st: _run(tree, direct, reverse, st), per_reader))
    answers, latencies = results[0]
    for i, (other, _) in enumerate(results[1:], start=1):
        if other != answers:
            raise B2DTError(f"{tree.name}: reader {i} got different answers from reader 0")
    for st in per_reader:
        stats.hops += st.hops
        stats.climbs.extend(st.climbs)
    for _, lat in results[1:]:
        latencies["direct"].extend(lat["direct"])
        latencies["reverse"].extend(lat["reverse"])
    return answers, latencies, stats


def run_bench(trees, queries, seed=0, readers=1, build_ns=None):
    """Benchmark one or two structures over the same sampled nodes.

    Structures are reported k2tree first, so both ratios read bt2d / k2tree
    whatever order they were passed in.
    """
    if not 1 <= len(trees) <= 2:
        raise ValueError(f"bench takes one or two structures, got {len(trees)}")
    if queries < 1:
        raise ValueError("query count must be positive")
    if len(trees) == 2 and not _same_matrix(*trees):
        raise B2DTError(f"{trees[0].name} and {trees[1].name} describe different matrices")
    trees = sorted(trees, key=lambda tree: tree.kind)

    direct, reverse = sample_nodes(trees[0], queries, seed)
    report = BenchReport(queries=queries, seed=seed, readers=readers)
    reference = None
    for tree in trees:
        answers, latencies, stats = _time(tree, direct, reverse, readers)
        if reference is None:
            reference = answers
        elif answers != reference:
            raise B2DTError(f"{tree.name} answers differ from {trees[0].name}")

        timings = StructureTimings(
            name=tree.name,
            total_bits=tree.total_bits(),
            bits_per_edge=tree.bits_per_edge(),
            direct_mean_ns=statistics.fmean(latencies["direct"]),
            direct_median_ns=statistics.median(latencies["direct"]),
            reverse_mean_ns=statistics.fmean(latencies["reverse"]),
            reverse_median_ns=statistics.median(latencies["reverse"]),
            build_ns=(build_ns or {}).get(tree.name),
        )
        if tree.kind == 1:
            timings.hops = stats.hops
            timings.mean_upwalk = stats.mean_upwalk
            timings.max_upwalk = max(stats.climbs, default=0)
        report.structures.append(timings)
        logger.info("bench %s: %d queries, %d hops", tree.name, 2 * queries, stats.hops)

    if len(trees) == 2:
        first, second = report.structures
        report.latency_ratio = {
            "direct": second.direct_mean_ns / first.direct_mean_ns if first.direct_mean_ns else float("inf"),
            "reverse": second.reverse_mean_ns / first.reverse_mean_ns if first.reverse_mean_ns else float("inf"),
        }
    return report
