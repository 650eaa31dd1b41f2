"""
Domain models for primechain.

Contains the enums, value objects and persisted records shared by the engine
modules, the chain store and the CLI. Integers of arbitrary size are kept as
Python ints in memory and rendered as decimal strings when serialized.
"""

from datetime import datetime, timezone
from enum import Enum
from typing import Any, Optional
from uuid import UUID, uuid4

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from primechain.domain.bigreal import RationalExponent, decimal_text, digit_count, parse_integer
from primechain.domain.exceptions import ParseError, PrecisionExhaustedError


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


# ===========================================
# ENUMS
# ===========================================


class PrimeStatus(str, Enum):
    """Outcome of the primality battery for one integer."""

    PROVEN_PRIME = "proven_prime"
    PROBABLE_PRIME = "probable_prime"
    COMPOSITE = "composite"
    UNKNOWN = "unknown"

    @property
    def is_prime(self) -> bool:
        return self in (PrimeStatus.PROVEN_PRIME, PrimeStatus.PROBABLE_PRIME)


class RoundingMode(str, Enum):
    """How a real iterate is turned into an integer term."""

    NEAREST = "nearest"
    FLOOR = "floor"


class SelectionPolicy(str, Enum):
    """
    How the next prime is picked inside a feasible window.

    NEAREST picks the prime closest to the real iterate (ties upward);
    NEXT_ABOVE picks the smallest prime at or above it.
    """

    NEAREST = "nearest"
    NEXT_ABOVE = "next_above"


class RuleKind(str, Enum):
    """Iteration maps supported by the chain engine."""

    POWER = "power"
    EXP2_TOWER = "exp2"
    DIGIT_SHIFT = "shift"
    SCALED_NN = "nn"


class StopReason(str, Enum):
    """Why a chain construction or search stopped."""

    TARGET_REACHED = "target_reached"
    MAX_STEPS = "max_steps"
    INFEASIBLE = "infeasible"
    STEP_BUDGET = "step_budget"
    BUDGET_EXHAUSTED = "budget_exhausted"


class Provenance(str, Enum):
    """Which command produced a stored record."""

    VERIFY = "verify"
    GENERATE = "generate"
    RECOVER = "recover"
    REGENERATE = "regenerate"
    SEARCH = "search"
    TREE = "tree"


# ===========================================
# PRIMALITY VALUE OBJECTS
# ===========================================


class PrimeCandidate(BaseModel):
    """
    An integer together with the verdict of the primality battery.

    Attributes:
        value: The integer tested
        status: Verdict of the battery
        tests_run: Names of the tests that produced the verdict, in order
        witness: For COMPOSITE, a reproducible witness (factor or failed test)
    """

    model_config = ConfigDict(frozen=True)

    value: int
    status: PrimeStatus
    tests_run: tuple[str, ...] = ()
    witness: Optional[str] = None

    @model_validator(mode="after")
    def _composite_has_witness(self) -> "PrimeCandidate":
        if self.status == PrimeStatus.COMPOSITE and not self.witness:
            raise ValueError("COMPOSITE verdicts require a witness")
        return self

    @property
    def is_prime(self) -> bool:
        return self.status.is_prime


class SearchWindow(BaseModel):
    """Half-open integer window [lo, hi)."""

    model_config = ConfigDict(frozen=True)

    lo: int
    hi: int

    @model_validator(mode="after")
    def _ordered(self) -> "SearchWindow":
        if self.lo >= self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi})")
        return self

    @property
    def size(self) -> int:
        return self.hi - self.lo

    def __contains__(self, n: int) -> bool:
        return self.lo <= n < self.hi


# ===========================================
# GROWTH RULES
# ===========================================


class GrowthRule(BaseModel):
    """
    Tagged union selecting the iteration map.

    - POWER: a(n+1) = a(n)^e, rounded to nearest or floored
    - EXP2_TOWER: a(n+1) = 2^a(n), floored
    - DIGIT_SHIFT: a(n+1) = base * a(n), rounded to nearest
    - SCALED_NN: a(n) = c * n^n, floored, indices from ``range_start``
    """

    model_config = ConfigDict(frozen=True)

    kind: RuleKind
    exponent: Optional[RationalExponent] = None
    rounding: RoundingMode = RoundingMode.NEAREST
    base: Optional[int] = None
    range_start: Optional[int] = None

    @model_validator(mode="after")
    def _check_fields(self) -> "GrowthRule":
        if self.kind == RuleKind.POWER and self.exponent is None:
            raise ValueError("POWER rules need an exponent")
        if self.kind == RuleKind.DIGIT_SHIFT and (self.base is None or self.base < 2):
            raise ValueError("DIGIT_SHIFT rules need a base >= 2")
        if self.kind == RuleKind.SCALED_NN and (self.range_start is None or self.range_start < 1):
            raise ValueError("SCALED_NN rules need range_start >= 1")
        return self

    @classmethod
    def power(
        cls, exponent: RationalExponent | str, rounding: RoundingMode = RoundingMode.NEAREST
    ) -> "GrowthRule":
        if isinstance(exponent, str):
            exponent = RationalExponent.parse(exponent)
        return cls(kind=RuleKind.POWER, exponent=exponent, rounding=rounding)

    @classmethod
    def exp2_tower(cls) -> "GrowthRule":
        return cls(kind=RuleKind.EXP2_TOWER, rounding=RoundingMode.FLOOR)

    @classmethod
    def digit_shift(cls, base: int = 10) -> "GrowthRule":
        return cls(kind=RuleKind.DIGIT_SHIFT, base=base, rounding=RoundingMode.NEAREST)

    @classmethod
    def scaled_nn(cls, range_start: int = 3) -> "GrowthRule":
        return cls(kind=RuleKind.SCALED_NN, range_start=range_start, rounding=RoundingMode.FLOOR)

    @classmethod
    def parse(cls, spec: str) -> "GrowthRule":
        """
        Parse the CLI rule syntax.

        ``power:5/4:nearest``, ``power:3:floor``, ``exp2``, ``shift:10``, ``nn:3``.
        """
        parts = spec.strip().lower().split(":")
        try:
            kind = RuleKind(parts[0])
        except ValueError as e:
            raise ParseError(f"Unknown rule kind '{parts[0]}'", text=spec) from e
        try:
            if kind == RuleKind.POWER:
                if len(parts) not in (2, 3):
                    raise ParseError("Expected power:<p/q>[:nearest|floor]", text=spec)
                rounding = RoundingMode(parts[2]) if len(parts) == 3 else RoundingMode.NEAREST
                return cls.power(RationalExponent.parse(parts[1]), rounding)
            if kind == RuleKind.EXP2_TOWER:
                return cls.exp2_tower()
            if kind == RuleKind.DIGIT_SHIFT:
                return cls.digit_shift(int(parts[1]) if len(parts) > 1 else 10)
            return cls.scaled_nn(int(parts[1]) if len(parts) > 1 else 3)
        except (ValueError, IndexError) as e:
            raise ParseError(f"Invalid rule specification: {e}", text=spec) from e

    def spec(self) -> str:
        """Inverse of ``parse``."""
        if self.kind == RuleKind.POWER:
            return f"power:{self.exponent}:{self.rounding.value}"
        if self.kind == RuleKind.DIGIT_SHIFT:
            return f"shift:{self.base}"
        if self.kind == RuleKind.SCALED_NN:
            return f"nn:{self.range_start}"
        return "exp2"

    def __str__(self) -> str:
        return self.spec()


# ===========================================
# RESULTS AND REPORTS
# ===========================================


class GeneratedTerm(BaseModel):
    """One emitted term of a formula: index, integer value and primality verdict."""

    index: int
    value: int
    status: PrimeStatus

    @property
    def digits(self) -> int:
        return digit_count(self.value)


class GenerationResult(BaseModel):
    """
    Terms emitted from a seed, plus the verified horizon.

    ``exhausted_at`` is the index of the first term the seed could not decide,
    or None when every requested term was decided.
    """

    terms: list[GeneratedTerm]
    exhausted_at: Optional[int] = None
    bits_used: int = 0

    @property
    def values(self) -> list[int]:
        return [t.value for t in self.terms]

    @property
    def all_prime(self) -> bool:
        return all(t.status.is_prime for t in self.terms)

    def raise_if_exhausted(self) -> "GenerationResult":
        """Turn a truncated run into a PrecisionExhaustedError."""
        if self.exhausted_at is not None:
            raise PrecisionExhaustedError(
                step=self.exhausted_at, horizon=len(self.terms), bits=self.bits_used
            )
        return self


class DigitGrowth(BaseModel):
    """Digit count of one chain term and its ratio to the previous term's."""

    index: int
    digits: int
    ratio: Optional[float] = None


class FeasibilityReport(BaseModel):
    """How much room the next step of a chain has."""

    window: SearchWindow
    found: Optional[int] = None
    window_width: float
    candidate_count: int


class ForestStats(BaseModel):
    """Summary statistics of a prime forest."""

    prime_count: int
    root_count: int
    max_depth: int
    tree_sizes: list[int]
    orphan_count: int = 0


# ===========================================
# PERSISTED RECORDS
# ===========================================


class ChainRecord(BaseModel):
    """
    One chain in the append-only store.

    Primes are serialized as decimal strings so that very large values stay
    bit-exact and the file stays diffable.
    """

    record_type: str = "chain"
    id: UUID = Field(default_factory=uuid4)
    timestamp: datetime = Field(default_factory=_utcnow)
    rule: str
    policy: str
    first_index: int = 0
    primes: list[int]
    seed_digits: Optional[str] = None
    provenance: Provenance
    notes: dict[str, Any] = Field(default_factory=dict)

    @field_serializer("primes")
    def _primes_as_text(self, primes: list[int]) -> list[str]:
        return [decimal_text(p) for p in primes]

    @field_validator("primes", mode="before")
    @classmethod
    def _primes_from_text(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [parse_integer(v) if isinstance(v, str) else v for v in value]
        return value


class ForestRecord(BaseModel):
    """Structured export of a prime forest."""

    record_type: str = "forest"
    id: UUID = Field(default_factory=uuid4)
    timestamp: datetime = Field(default_factory=_utcnow)
    exponent: str
    limit: int
    edges: list[tuple[int, int]]
    roots: list[int]
    provenance: Provenance = Provenance.TREE


class RunManifest(BaseModel):
    """
    Everything needed to reproduce one CLI run.

    Emitted for every run, successful or not.
    """

    record_type: str = "manifest"
    id: UUID = Field(default_factory=uuid4)
    started_at: datetime = Field(default_factory=_utcnow)
    command_line: list[str]
    config: dict[str, Any] = Field(default_factory=dict)
    rng_seeds: list[int] = Field(default_factory=list)
    library_version: str
    wall_time_s: float = 0.0
    exit_code: int = 0
    outcome: str = ""
