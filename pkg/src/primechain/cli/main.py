"""
primechain - Command Line Entry Point.

Verification of published prime-representing constants, generation from seeds,
seed recovery, annealing search and prime forests.

Exit codes: 0 pass, 1 mismatch, 2 undecidable (precision), 64 usage.
"""

import argparse
import logging
import sys
import time
from collections.abc import Sequence
from typing import Any, Optional

from primechain import __version__
from primechain.adapters.persistence.jsonl_chain_store import JsonLinesChainStore
from primechain.cli.commands import generate, recover, search, tree, verify
from primechain.cli.context import CommandContext, UsageError
from primechain.domain.bigreal import PrecisionPolicy
from primechain.domain.config import Settings
from primechain.domain.exceptions import (
    ArithmeticDomainError,
    ConfigurationError,
    DomainException,
    EmptyIntersectionError,
    ExactTieError,
    InfeasibleError,
    ParseError,
    PrecisionError,
    ProfileNotFoundError,
    ResourceGuardError,
    StoreError,
)
from primechain.domain.models import RunManifest
from primechain.interfaces.chain_store import ChainStorePort

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_MISMATCH = 1
EXIT_UNDECIDABLE = 2
EXIT_USAGE = 64

_EXIT_CODES: tuple[tuple[type[DomainException], int], ...] = (
    (ParseError, EXIT_USAGE),
    (ConfigurationError, EXIT_USAGE),
    (ProfileNotFoundError, EXIT_USAGE),
    (ArithmeticDomainError, EXIT_USAGE),
    (StoreError, EXIT_USAGE),
    (PrecisionError, EXIT_UNDECIDABLE),
    (ExactTieError, EXIT_UNDECIDABLE),
    (ResourceGuardError, EXIT_UNDECIDABLE),
    (InfeasibleError, EXIT_MISMATCH),
    (EmptyIntersectionError, EXIT_MISMATCH),
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(message)


def exit_code_for(error: DomainException) -> int:
    for error_type, code in _EXIT_CODES:
        if isinstance(error, error_type):
            return code
    return EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="primechain",
        description="Verify, generate, recover and search prime-representing recurrences.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--precision-max-bits", type=int, default=None, help="Ceiling of the working precision"
    )
    parser.add_argument(
        "--prp-extra-rounds",
        type=int,
        default=None,
        help="Random-base strong tests added to Baillie-PSW",
    )
    parser.add_argument("--rng-seed", type=int, default=None, help="Seed of the search RNG")
    parser.add_argument(
        "--time-budget", type=float, default=None, help="Wall-clock budget of a search, seconds"
    )
    parser.add_argument(
        "--store", default=None, help="Chain store path (default: $PRIMECHAIN_STORE)"
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")

    commands = parser.add_subparsers(dest="command", required=True)
    for module in (verify, generate, recover, search, tree):
        module.register(commands)
    return parser


def _config_snapshot(args: argparse.Namespace) -> dict[str, Any]:
    snapshot: dict[str, Any] = {}
    for key, value in vars(args).items():
        if key == "handler":
            continue
        snapshot[key] = value if isinstance(value, (int, float, bool, type(None))) else str(value)
    return snapshot


def _record_manifest(
    store: ChainStorePort, argv: Sequence[str], args: Optional[argparse.Namespace],
    ctx: Optional[CommandContext], started: float, exit_code: int, outcome: str,
) -> None:
    manifest = RunManifest(
        command_line=["primechain", *argv],
        config=_config_snapshot(args) if args is not None else {},
        rng_seeds=ctx.rng_seeds if ctx is not None else [],
        library_version=__version__,
        wall_time_s=time.monotonic() - started,
        exit_code=exit_code,
        outcome=outcome,
    )
    try:
        store.append(manifest)
    except StoreError as e:
        logger.warning(f"Run manifest not stored: {e}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    started = time.monotonic()
    settings = Settings()

    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s [%(name)s] %(message)s",
    )

    store = JsonLinesChainStore(args.store or settings.store)
    ctx: Optional[CommandContext] = None
    try:
        ctx = CommandContext(
            settings=settings,
            precision=settings.precision_policy(args.precision_max_bits),
            extra_rounds=(
                args.prp_extra_rounds if args.prp_extra_rounds is not None else settings.prp_extra_rounds
            ),
            exp2_guard=settings.exp2_max_exponent,
            store=store,
        )
        exit_code = args.handler(args, ctx)
        outcome = ctx.outcome
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        exit_code, outcome = EXIT_USAGE, f"usage error: {e}"
    except DomainException as e:
        print(e.message, file=sys.stderr)
        exit_code, outcome = exit_code_for(e), e.message
    except ValueError as e:
        print(str(e), file=sys.stderr)
        exit_code, outcome = EXIT_USAGE, str(e)

    _record_manifest(store, argv, args, ctx, started, exit_code, outcome)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
