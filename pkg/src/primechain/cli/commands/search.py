"""search: anneal for a long prime chain using a named profile."""

import argparse

from primechain.cli.context import CommandContext
from primechain.cli.output import print_terms
from primechain.domain.config import SearchProfileRegistry
from primechain.domain.models import GrowthRule, Provenance
from primechain.domain.primality import is_probable_prime
from primechain.domain.search import SearchOutcome, anneal


def register(commands: argparse._SubParsersAction) -> None:
    parser = commands.add_parser("search", help="Simulated-annealing search for a long chain")
    parser.add_argument("profile", nargs="?", default="default", help="Profile name in the config file")
    parser.add_argument("--config", default=None, help="Search profiles YAML (default: settings)")
    parser.add_argument("--rule", default=None, help="Override the profile's rule spec")
    parser.add_argument("--target-length", type=int, default=None)
    parser.add_argument("--restarts", type=int, default=None)
    parser.add_argument("--max-steps", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, ctx: CommandContext) -> int:
    registry = SearchProfileRegistry(args.config or ctx.settings.search_config_path)
    profile = registry.get_profile(args.profile).with_overrides(
        rng_seed=args.rng_seed,
        time_budget=args.time_budget,
        target_length=args.target_length,
        restart_count=args.restarts,
        max_steps=args.max_steps,
        workers=args.workers,
    )
    rule = GrowthRule.parse(args.rule) if args.rule else profile.rule
    config = profile.config
    ctx.rng_seeds.append(config.rng_seed)

    def on_restart(restart: int, outcome: SearchOutcome) -> None:
        ctx.store.append(
            outcome.chain.to_record(
                Provenance.SEARCH,
                notes={
                    "profile": profile.name,
                    "restart": restart,
                    "stop_reason": outcome.stop_reason.value,
                    "steps": outcome.steps,
                    "energy": outcome.energy,
                },
            )
        )

    outcome = anneal(
        rule, config, precision=ctx.precision, extra_rounds=ctx.extra_rounds, on_restart=on_restart
    )
    chain = outcome.chain

    print(f"search {profile.name} ({rule}) rng_seed={config.rng_seed}")
    print_terms(
        [
            (chain.first_index + i, p, is_probable_prime(p, ctx.extra_rounds).status)
            for i, p in enumerate(chain.primes)
        ]
    )
    print(f"  length: {len(chain)} (target {config.target_length})")
    print(f"  stop reason: {outcome.stop_reason.value}")
    print(f"  moves: {outcome.steps} over {outcome.restarts} restarts, {outcome.elapsed_s:.1f}s")
    if chain.seed is not None:
        print(f"  seed: {chain.seed.to_decimal(40)}")

    ctx.store.append(
        chain.to_record(
            Provenance.SEARCH,
            notes={
                "profile": profile.name,
                "best": True,
                "stop_reason": outcome.stop_reason.value,
                "rng_seed": config.rng_seed,
            },
        )
    )
    ctx.outcome = f"search best length {len(chain)} ({outcome.stop_reason.value})"
    return 0
