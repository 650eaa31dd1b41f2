"""generate: iterate a growth rule from a seed and report the rounded terms."""

import argparse
from pathlib import Path

from primechain.cli.context import CommandContext, UsageError
from primechain.cli.output import print_terms
from primechain.domain import constants
from primechain.domain.bigreal import PrecisionPolicy, RealInterval, parse_decimal
from primechain.domain.chains import first_composite_index, generate_from_seed
from primechain.domain.models import ChainRecord, GrowthRule, Provenance, SelectionPolicy


def read_seed(source: str, policy: PrecisionPolicy, exact: bool = False) -> tuple[RealInterval, str]:
    """
    A seed from a built-in constant name or a text file holding one decimal.

    Lines starting with ``#`` are ignored and the rest is joined, so long
    constants may be wrapped.

    Raises:
        UsageError: If ``source`` is neither a known name nor a readable file
    """
    if source in constants.NAMED_SEEDS:
        digits = constants.NAMED_SEEDS[source].digits
        return parse_decimal(digits, policy, truncated=True), digits
    path = Path(source)
    if not path.is_file():
        known = ", ".join(sorted(constants.NAMED_SEEDS))
        raise UsageError(f"seed '{source}' is neither a file nor one of: {known}")
    lines = path.read_text(encoding="utf-8").splitlines()
    digits = "".join(line.strip() for line in lines if line.strip() and not line.lstrip().startswith("#"))
    return parse_decimal(digits, policy, truncated=not exact), digits


def register(commands: argparse._SubParsersAction) -> None:
    parser = commands.add_parser("generate", help="Emit the rounded terms of a seed")
    parser.add_argument("seed", help="Seed file, or a built-in name such as power-5-4")
    parser.add_argument("rule", help="Rule spec: power:5/4:nearest, power:3:floor, exp2, shift:10, nn:3")
    parser.add_argument("count", type=int, help="Number of terms")
    parser.add_argument(
        "--policy",
        choices=[p.value for p in SelectionPolicy],
        default=SelectionPolicy.NEAREST.value,
        help="Selection policy recorded for later extension",
    )
    parser.add_argument("--start-index", type=int, default=0, help="Index of the first emitted term")
    parser.add_argument(
        "--exact", action="store_true", help="Read the seed as an exact value, not a truncated prefix"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, ctx: CommandContext) -> int:
    rule = GrowthRule.parse(args.rule)
    seed, digits = read_seed(args.seed, ctx.precision, args.exact)
    result = generate_from_seed(
        seed,
        rule,
        args.count,
        start_index=args.start_index,
        precision=ctx.precision,
        extra_rounds=ctx.extra_rounds,
        exp2_guard=ctx.exp2_guard,
    )

    print(f"generate {rule} from {args.seed}: {len(result.terms)} of {args.count} terms")
    print_terms([(t.index, t.value, t.status) for t in result.terms])
    composite_at = first_composite_index(result.terms)
    if composite_at is not None:
        print(f"  first composite term: index {composite_at}")
    if result.exhausted_at is not None:
        print(f"  seed exhausted at index {result.exhausted_at} ({result.bits_used} bits)")

    if result.terms:
        record = ChainRecord(
            rule=rule.spec(),
            policy=args.policy,
            first_index=result.terms[0].index,
            primes=result.values,
            seed_digits=digits,
            provenance=Provenance.GENERATE,
            notes={
                "statuses": [t.status.value for t in result.terms],
                "exhausted_at": result.exhausted_at,
                "exact_seed": args.exact,
            },
        )
        ctx.store.append(record)

    ctx.outcome = f"generated {len(result.terms)} terms"
    if result.exhausted_at is not None and len(result.terms) < args.count:
        return 2
    return 0
