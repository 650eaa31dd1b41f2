"""recover: the interval of seeds that reproduce a stored or listed chain."""

import argparse
import re
from dataclasses import replace
from pathlib import Path
from typing import Optional

from primechain.adapters.persistence.jsonl_chain_store import JsonLinesChainStore
from primechain.cli.context import CommandContext, UsageError
from primechain.domain.bigreal import RealInterval, correct_decimals, format_fixed, parse_integer
from primechain.domain.chains import PrimeChain, recover_scale_constant, recover_seed
from primechain.domain.models import ChainRecord, GrowthRule, Provenance, RuleKind

_INTEGER = re.compile(r"\d+")


def read_chain(
    path: Path, rule: Optional[GrowthRule], first_index: Optional[int], record_id: Optional[str] = None
) -> PrimeChain:
    """
    A chain from a store file (its last chain record, or ``record_id``) or from
    a text file listing the primes.

    Raises:
        UsageError: If the file is missing or holds no chain
    """
    if not path.is_file():
        raise UsageError(f"chain file not found: {path}")
    text = path.read_text(encoding="utf-8")

    if text.lstrip().startswith("{"):
        records = [r for r in JsonLinesChainStore(path).read_all() if isinstance(r, ChainRecord)]
        if record_id is not None:
            records = [r for r in records if str(r.id) == record_id]
        if not records:
            raise UsageError(f"no chain record in {path}")
        chain = PrimeChain.from_record(records[-1])
        if rule is not None:
            chain = PrimeChain(rule=rule, primes=chain.primes, policy=chain.policy, first_index=chain.first_index)
        return chain

    body = "\n".join(line for line in text.splitlines() if not line.lstrip().startswith("#"))
    primes = tuple(parse_integer(m) for m in _INTEGER.findall(body))
    if not primes:
        raise UsageError(f"no integers in {path}")
    rule = rule or GrowthRule.power("3/2")
    if first_index is None:
        first_index = (rule.range_start or 1) if rule.kind == RuleKind.SCALED_NN else 0
    return PrimeChain(rule=rule, primes=primes, first_index=first_index)


def recover_interval(chain: PrimeChain, ctx: CommandContext) -> RealInterval:
    if chain.rule.kind == RuleKind.SCALED_NN:
        return recover_scale_constant(chain.primes, chain.first_index, ctx.precision)
    return recover_seed(chain, ctx.precision)


def register(commands: argparse._SubParsersAction) -> None:
    parser = commands.add_parser("recover", help="Recover the seed of a chain")
    parser.add_argument("chain_file", type=Path, help="Store file or text file of primes")
    parser.add_argument("--rule", default=None, help="Rule spec (default power:3/2:nearest for lists)")
    parser.add_argument("--first-index", type=int, default=None, help="Index of the first prime")
    parser.add_argument("--record-id", default=None, help="Chain record to use from a store file")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, ctx: CommandContext) -> int:
    rule = GrowthRule.parse(args.rule) if args.rule else None
    chain = read_chain(args.chain_file, rule, args.first_index, args.record_id)
    seed = recover_interval(chain, ctx)
    representative = seed.midpoint()
    decimals = correct_decimals(seed)
    lo, hi = seed.exact_bounds()

    print(f"recover {chain.rule} from {len(chain)} primes (first index {chain.first_index})")
    print(f"seed: {seed.to_decimal()}")
    print(f"  lower: {format_fixed(lo, decimals + 4)}")
    print(f"  upper: {format_fixed(hi, decimals + 4)}")
    print(f"  correct decimals: {decimals}")
    print(f"  representative: {representative.to_decimal()}")

    record = replace(chain, seed=representative).to_record(
        Provenance.RECOVER,
        notes={"seed_lower": str(lo), "seed_upper": str(hi), "correct_decimals": decimals},
    )
    ctx.store.append(record)
    ctx.outcome = f"recovered seed {seed.to_decimal()}"
    return 0
