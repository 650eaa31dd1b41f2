"""tree: build the prime forest up to a limit and export it."""

import argparse
from pathlib import Path

from primechain.cli.context import CommandContext, UsageError
from primechain.domain.bigreal import RationalExponent
from primechain.domain.trees import build_forest, export_dot, forest_stats


def register(commands: argparse._SubParsersAction) -> None:
    parser = commands.add_parser("tree", help="Build the prime forest for an exponent")
    parser.add_argument("limit", type=int, help="Largest integer considered")
    parser.add_argument("exponent", nargs="?", default="3/2", help="Exponent p/q (default 3/2)")
    parser.add_argument("--dot", type=Path, default=None, help="Write a Graphviz DOT file here")
    parser.add_argument("--path", type=int, default=None, help="Print the root path of this prime")
    parser.add_argument(
        "--cross-check", action="store_true", help="Also derive children from feasible windows"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, ctx: CommandContext) -> int:
    if args.limit < 2:
        raise UsageError(f"limit must be at least 2, got {args.limit}")
    exponent = RationalExponent.parse(args.exponent)
    forest = build_forest(args.limit, exponent, precision=ctx.precision, cross_check=args.cross_check)
    stats = forest_stats(forest)

    print(f"tree e={exponent} limit={args.limit}")
    print(f"  primes: {stats.prime_count}")
    print(f"  roots: {stats.root_count}")
    print(f"  edges: {len(forest.edges)}")
    print(f"  max depth: {stats.max_depth}")
    print(f"  largest tree: {max(stats.tree_sizes, default=0)}")
    print(f"  orphans: {stats.orphan_count}")

    if args.path is not None:
        if args.path not in forest.parent_of:
            raise UsageError(f"{args.path} is not a prime up to {args.limit}")
        print("  path: " + " <- ".join(str(p) for p in forest.path_to_root(args.path)))

    if args.dot is not None:
        args.dot.parent.mkdir(parents=True, exist_ok=True)
        args.dot.write_text(export_dot(forest), encoding="utf-8")
        print(f"  dot: {args.dot}")

    ctx.store.append(forest.to_record())
    ctx.outcome = f"forest with {stats.root_count} roots over {stats.prime_count} primes"
    return 0
