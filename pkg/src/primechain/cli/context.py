"""Shared state handed to every command."""

from dataclasses import dataclass, field

from primechain.domain.bigreal import PrecisionPolicy
from primechain.domain.config import Settings
from primechain.interfaces.chain_store import ChainStorePort


class UsageError(Exception):
    """Malformed command line or command input."""


@dataclass
class CommandContext:
    """What every command needs besides its own arguments."""

    settings: Settings
    precision: PrecisionPolicy
    extra_rounds: int
    exp2_guard: int
    store: ChainStorePort
    rng_seeds: list[int] = field(default_factory=list)
    outcome: str = ""
