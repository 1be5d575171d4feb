#!/usr/bin/env python3
"""
b2dt command line: build, query, extract, stats, bench and gen.
Results go to stdout as key=value lines; diagnostics go to stderr.
"""

import argparse
import logging
import sys
import time

from src import container
from src.bench import run_bench
from src.bt2d import BuildParams, build_bt2d
from src.errors import EXIT_DATA, EXIT_OK, B2DTError, OutOfBoundsError, UsageError
from src.generators import random_matrix, shifted_copy_matrix, tiled_matrix
from src.k2tree import build_k2
from src.matrix_io import Region, parse_edgelist, parse_pbm, write_edgelist, write_pbm
from src.settings import Settings

logger = logging.getLogger("b2dt")

STRUCTURES = ("k2tree", "bt2d")


class ArgumentParser(argparse.ArgumentParser):
    """argparse that reports usage errors with exit code 1"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def emit(**pairs):
    for key, value in pairs.items():
        if isinstance(value, float):
            value = f"{value:.4f}"
        print(f"{key}={value}")


def _input_format(path, fmt):
    if fmt:
        return fmt
    return "pbm" if path.lower().endswith((".pbm", ".pnm")) else "edgelist"


def read_matrix(path, fmt, k):
    fmt = _input_format(path, fmt)
    logger.info("reading %s as %s", path, fmt)
    if fmt == "pbm":
        with open(path, "rb") as f:
            return parse_pbm(f, k=k)
    with open(path, "r", encoding="utf-8") as f:
        return parse_edgelist(f, k=k)


def build_structures(m, structure, params):
    """Build the requested structures; returns [(tree, build_ns)]"""
    names = STRUCTURES if structure == "both" else (structure,)
    built = []
    for name in names:
        started = time.perf_counter_ns()
        tree = build_k2(m) if name == "k2tree" else build_bt2d(m, params=params)
        built.append((tree, time.perf_counter_ns() - started))
    return built


def _build_params(args, settings):
    return BuildParams(seed=settings.seed if args.seed is None else args.seed,
                       modulus=settings.kr_modulus if args.modulus is None else args.modulus,
                       base=args.base, cost_filter=not args.no_cost_filter)


def _size_pairs(tree, prefix=""):
    pairs = {f"{prefix}{part}_bits": bits for part, bits in tree.size_breakdown().items() if part != "total"}
    pairs[f"{prefix}total_bits"] = tree.total_bits()
    pairs[f"{prefix}bpe"] = tree.bits_per_edge()
    return pairs


def cmd_build(args, settings):
    k = settings.k if args.k is None else args.k
    m = read_matrix(args.input, args.format, k)
    params = _build_params(args, settings)
    built = build_structures(m, args.structure, params)

    emit(rows=m.rows, cols=m.cols, side=m.side, k=k, ones=m.ones)
    for tree, build_ns in built:
        path = args.output if len(built) == 1 else f"{args.output}.{tree.name}"
        size = container.store(tree, path)
        prefix = f"{tree.name}_" if len(built) > 1 else ""
        emit(**{f"{prefix}structure": tree.name, f"{prefix}output": path})
        emit(**_size_pairs(tree, prefix))
        emit(**{f"{prefix}file_bytes": size, f"{prefix}build_ns": build_ns})
    if len(built) == 2:
        emit(bits_ratio=built[1][0].total_bits() / built[0][0].total_bits())
    return EXIT_OK


def cmd_query(args, settings):
    tree = container.load(args.container, hop_check=settings.hop_check)
    query = tree.direct_neighbors if args.direction == "direct" else tree.reverse_neighbors
    for node in query(args.node):
        print(node)
    return EXIT_OK


def cmd_extract(args, settings):
    tree = container.load(args.container, hop_check=settings.hop_check)
    region = Region.parse(args.region)
    if not Region(0, 0, tree.cols - 1, tree.rows - 1).contains(region):
        raise OutOfBoundsError(f"region {args.region} outside the {tree.rows}x{tree.cols} matrix")
    grid = tree.access(region)
    with open(args.output, "wb") as f:
        write_pbm(grid, f, "P4")
    emit(output=args.output, width=region.width, height=region.height, ones=int(grid.sum()))
    return EXIT_OK


def cmd_stats(args, settings):
    tree = container.load(args.container, hop_check=settings.hop_check)
    emit(structure=tree.name, k=tree.k, rows=tree.rows, cols=tree.cols, side=tree.side,
         height=tree.height, ones=tree.ones)
    emit(**_size_pairs(tree))
    emit(framing_bits=container.framing_bits(tree), file_bits=container.file_bits(args.container))
    if tree.kind == 1:
        emit(links=tree.D[-1], links_per_level=",".join(map(str, tree.links_per_level()[1:])),
             kr_modulus=tree.kr_modulus, kr_base=tree.kr_base)
    return EXIT_OK


def cmd_bench(args, settings):
    queries = settings.query_count if args.queries is None else args.queries
    seed = settings.seed if args.seed is None else args.seed
    build_ns = None
    if args.input:
        if args.containers:
            raise UsageError("give either containers or --input, not both")
        k = settings.k if args.k is None else args.k
        m = read_matrix(args.input, args.format, k)
        built = build_structures(m, "both", BuildParams(seed=seed, modulus=settings.kr_modulus))
        trees = [tree for tree, _ in built]
        build_ns = {tree.name: ns for tree, ns in built}
    else:
        if not 1 <= len(args.containers) <= 2:
            raise UsageError("bench takes one or two containers")
        trees = [container.load(path, hop_check=settings.hop_check) for path in args.containers]

    report = run_bench(trees, queries, seed=seed, readers=args.readers, build_ns=build_ns)
    for line in report.lines():
        print(line)
    return EXIT_OK


def cmd_gen(args, settings):
    k = settings.k if args.k is None else args.k
    seed = settings.seed if args.seed is None else args.seed
    if args.kind == "random":
        m = random_matrix(args.size, args.density, seed=seed, k=k)
    elif args.kind == "tiled":
        m = tiled_matrix(args.size, args.tile, args.density, seed=seed, k=k)
    else:
        m = shifted_copy_matrix(args.size, args.block, args.density, seed=seed, copies=args.copies, k=k)

    fmt = _input_format(args.output, args.format)
    if fmt == "pbm":
        with open(args.output, "wb") as f:
            write_pbm(m, f, "P4")
    else:
        with open(args.output, "w", encoding="utf-8") as f:
            write_edgelist(m, f)
    emit(kind=args.kind, output=args.output, rows=m.rows, cols=m.cols, ones=m.ones)
    return EXIT_OK


def build_parser():
    parser = ArgumentParser(prog="b2dt", description="2D Block Trees and k2-trees for binary matrices")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="Build a container from an edge list or PBM")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="Output path (a prefix with --structure both)")
    p.add_argument("--format", choices=["edgelist", "pbm"], help="Input format (default: by extension)")
    p.add_argument("--structure", choices=[*STRUCTURES, "both"], default="bt2d")
    p.add_argument("--k", type=int, help="Arity (default B2DT_K)")
    p.add_argument("--seed", type=int, help="Karp-Rabin seed (default B2DT_SEED)")
    p.add_argument("--modulus", type=int, help="Karp-Rabin modulus (default B2DT_KR_MODULUS)")
    p.add_argument("--base", type=int, help="Explicit Karp-Rabin base")
    p.add_argument("--no-cost-filter", action="store_true", help="Allow links on blocks cheaper than a pointer")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="Direct or reverse neighbors of a node")
    p.add_argument("container")
    p.add_argument("node", type=int)
    p.add_argument("--direction", choices=["direct", "reverse"], default="direct")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("extract", help="Extract a region as a P4 bitmap")
    p.add_argument("container")
    p.add_argument("--region", required=True, help="x1,y1,x2,y2 (inclusive)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("stats", help="Size breakdown of a container")
    p.add_argument("container")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="Time neighbor queries")
    p.add_argument("containers", nargs="*")
    p.add_argument("--input", help="Build both structures from this file instead of loading containers")
    p.add_argument("--format", choices=["edgelist", "pbm"])
    p.add_argument("--k", type=int)
    p.add_argument("--queries", type=int, help="Nodes sampled per direction (default B2DT_QUERY_COUNT)")
    p.add_argument("--seed", type=int)
    p.add_argument("--readers", type=int, default=1, help="Concurrent reader threads")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="Generate a fixture matrix")
    p.add_argument("kind", choices=["random", "tiled", "shifted"])
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--density", type=float, default=0.1)
    p.add_argument("--tile", type=int, default=32)
    p.add_argument("--block", type=int, default=16)
    p.add_argument("--copies", type=int, default=3)
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--format", choices=["edgelist", "pbm"])
    p.set_defaults(func=cmd_gen)
    return parser


def setup_logging(settings, verbose):
    level = logging.getLevelName(settings.log_level)
    if not isinstance(level, int):
        level = logging.WARNING
    if verbose:
        level = min(level, logging.INFO if verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, force=True,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        settings = Settings.from_env()
        setup_logging(settings, args.verbose)
        if getattr(args, "readers", 1) < 1:
            raise UsageError("--readers must be at least 1")
        return args.func(args, settings)
    except (UsageError, B2DTError) as e:
        print(f"error={e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValueError) as e:
        print(f"error={e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
