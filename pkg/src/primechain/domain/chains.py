"""
Prime chains.

A chain is a list of primes s(0) < s(1) < ... produced by rounding the iterates
of a growth rule started from a real seed. This module builds chains forward
(choosing primes inside feasible windows), generates terms from a known seed and
recovers the set of seeds that reproduce a chain by intersecting the rounding
intervals backward.

Forward construction tracks the *reach* of a chain prefix: an inner
approximation of the reals at the current level whose iterates round to every
prime chosen so far. Every window offered by a stepper is therefore reachable,
and ``recover_seed`` of a chain built here is never empty.
"""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, replace
from typing import Optional

import gmpy2
from gmpy2 import mpq, mpz

from primechain.domain import primality
from primechain.domain.bigreal import (
    DEFAULT_EXP2_GUARD,
    UNDECIDED,
    PrecisionPolicy,
    RationalExponent,
    RealInterval,
    Undecided,
    digit_count,
    exp2,
    floor_of,
    parse_decimal,
    pow_rational,
    pow_rational_inverse,
    round_nearest,
    with_escalation,
)
from primechain.domain.exceptions import (
    ArithmeticDomainError,
    EmptyIntersectionError,
    InfeasibleError,
    ResourceGuardError,
)
from primechain.domain.models import (
    ChainRecord,
    DigitGrowth,
    FeasibilityReport,
    GeneratedTerm,
    GenerationResult,
    GrowthRule,
    PrimeCandidate,
    Provenance,
    RoundingMode,
    RuleKind,
    SearchWindow,
    SelectionPolicy,
)
from primechain.domain.primality import DEFAULT_EXTRA_ROUNDS

logger = logging.getLogger(__name__)

GUARD_BITS = 64
WRIGHT_MAX_TERMS = 4
_LOG2_CAP = 1e15

_ITERATED = (RuleKind.POWER, RuleKind.DIGIT_SHIFT, RuleKind.EXP2_TOWER)
_INVERTIBLE = (RuleKind.POWER, RuleKind.DIGIT_SHIFT)


# ===========================================
# SMALL HELPERS
# ===========================================


def _floor(q: "mpq") -> int:
    return int(q.numerator // q.denominator)


def _ceil(q: "mpq") -> int:
    return -int((-q.numerator) // q.denominator)


def _log2(q: "mpq") -> int:
    """Approximate log2 of a positive rational (within one)."""
    return int(q.numerator.bit_length()) - int(q.denominator.bit_length())


def _exact_bits(q: "mpq") -> int:
    """Precision needed to hold a dyadic rational exactly."""
    return max(int(q.numerator.bit_length()), 1) + 2


def rounding_bounds(m: int, rounding: RoundingMode) -> tuple["mpq", "mpq"]:
    """The half-open set [lo, hi) of reals that round to m."""
    if rounding == RoundingMode.NEAREST:
        return mpq(2 * m - 1, 2), mpq(2 * m + 1, 2)
    return mpq(m), mpq(m + 1)


def _decide(x: RealInterval, rounding: RoundingMode) -> int | Undecided:
    if rounding == RoundingMode.NEAREST:
        return round_nearest(x)
    return floor_of(x)


def _ceil_of(x: RealInterval) -> int | Undecided:
    lo, hi = x.exact_bounds()
    c_lo, c_hi = _ceil(lo), _ceil(hi)
    return c_lo if c_lo == c_hi else UNDECIDED


def _growth_bits(rule: GrowthRule) -> int:
    """Bits of relative precision lost per inverse step."""
    if rule.kind == RuleKind.POWER:
        assert rule.exponent is not None
        return math.ceil(math.log2(float(rule.exponent.as_fraction())) + 1)
    if rule.kind == RuleKind.DIGIT_SHIFT:
        assert rule.base is not None
        return int(rule.base).bit_length()
    return 1


def _forward(
    x: RealInterval, rule: GrowthRule, bits: int, exp2_guard: int = DEFAULT_EXP2_GUARD
) -> RealInterval:
    """One application of the rule's map to an interval."""
    if rule.kind == RuleKind.POWER:
        assert rule.exponent is not None
        return pow_rational(x, rule.exponent, bits)
    if rule.kind == RuleKind.DIGIT_SHIFT:
        return x.with_precision(bits) * rule.base
    if rule.kind == RuleKind.EXP2_TOWER:
        return exp2(x, bits, max_exponent=exp2_guard)
    raise ArithmeticDomainError(f"{rule} is not an iterated map", "forward")


def _inverse(x: RealInterval, rule: GrowthRule, bits: int) -> RealInterval:
    if rule.kind == RuleKind.POWER:
        assert rule.exponent is not None
        return pow_rational_inverse(x, rule.exponent, bits)
    if rule.kind == RuleKind.DIGIT_SHIFT:
        return x.with_precision(bits) / rule.base
    raise ArithmeticDomainError(f"{rule} has no supported inverse", "inverse")


def _log2_after(log2_start: float, rule: GrowthRule, steps: int) -> float:
    """Estimated log2 of the iterate ``steps`` applications after one of size 2^log2_start."""
    m = max(log2_start, 1.0)
    for _ in range(steps):
        if m >= _LOG2_CAP:
            return _LOG2_CAP
        if rule.kind == RuleKind.POWER:
            assert rule.exponent is not None
            m *= float(rule.exponent.as_fraction())
        elif rule.kind == RuleKind.DIGIT_SHIFT:
            m += math.log2(rule.base or 2)
        else:
            m = 2.0**m if m < 50 else _LOG2_CAP
    return min(m, _LOG2_CAP)


# ===========================================
# CHAIN VALUE TYPE
# ===========================================


@dataclass(frozen=True)
class PrimeChain:
    """
    An ordered list of primes produced by a growth rule.

    Attributes:
        rule: Iteration map and rounding
        primes: Strictly increasing primes; ``primes[0]`` is term ``first_index``
        seed: Optional representative a(0) that regenerates the primes
        policy: How the next prime is picked when the chain is extended
        first_index: Index of the first listed prime (Mills and Wright start at 1)
    """

    rule: GrowthRule
    primes: tuple[int, ...]
    seed: Optional[RealInterval] = None
    policy: SelectionPolicy = SelectionPolicy.NEAREST
    first_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "primes", tuple(int(p) for p in self.primes))
        if not self.primes:
            raise ValueError("a chain holds at least one prime")
        if any(b <= a for a, b in zip(self.primes, self.primes[1:])):
            raise ValueError("chain primes must be strictly increasing")
        if self.first_index < 0:
            raise ValueError("first_index must be non-negative")

    def __len__(self) -> int:
        return len(self.primes)

    @property
    def head(self) -> int:
        return self.primes[-1]

    def non_primes(self, extra_rounds: int = DEFAULT_EXTRA_ROUNDS) -> list[PrimeCandidate]:
        """Members failing the primality battery (empty for a valid chain)."""
        verdicts = (primality.is_probable_prime(p, extra_rounds) for p in self.primes)
        return [v for v in verdicts if not v.is_prime]

    def truncated(self, length: int) -> "PrimeChain":
        return replace(self, primes=self.primes[:length], seed=None)

    def to_record(self, provenance: Provenance, notes: Optional[dict] = None) -> ChainRecord:
        return ChainRecord(
            rule=self.rule.spec(),
            policy=self.policy.value,
            first_index=self.first_index,
            primes=list(self.primes),
            seed_digits=self.seed.to_decimal() if self.seed is not None else None,
            provenance=provenance,
            notes=notes or {},
        )

    @classmethod
    def from_record(cls, record: ChainRecord) -> "PrimeChain":
        seed = None
        if record.seed_digits:
            seed = parse_decimal(record.seed_digits, truncated=False)
        return cls(
            rule=GrowthRule.parse(record.rule),
            primes=tuple(record.primes),
            seed=seed,
            policy=SelectionPolicy(record.policy),
            first_index=record.first_index,
        )


# ===========================================
# STEPPERS
# ===========================================


@dataclass(frozen=True)
class Reach:
    """
    Interval of exact rationals in the level variable of a stepper.

    For iterated rules the level variable is the real iterate a(n) and the
    interval is an inner approximation. For n^n scaling it is the constant c.
    ``open_hi`` excludes the upper end.
    """

    lo: "mpq"
    hi: "mpq"
    open_hi: bool = False

    def __post_init__(self):
        if self.lo > self.hi or (self.lo == self.hi and self.open_hi):
            raise ValueError("empty reach")

    @property
    def width(self) -> "mpq":
        return self.hi - self.lo

    @classmethod
    def of(cls, lo: "mpq", hi: "mpq", open_hi: bool) -> "Reach | None":
        """The reach [lo, hi] (or [lo, hi)), or None when that is empty."""
        if lo > hi or (lo == hi and open_hi):
            return None
        return cls(lo, hi, open_hi)


class ChainStepper(ABC):
    """
    Single-step logic shared by chain extension and the annealing search.

    ``position`` counts chain members from zero, so the state at ``position``
    describes the level of ``primes[position]``.
    """

    def __init__(
        self,
        rule: GrowthRule,
        precision: PrecisionPolicy | None = None,
        exp2_guard: int = DEFAULT_EXP2_GUARD,
    ):
        self.rule = rule
        self.precision = precision or PrecisionPolicy()
        self.exp2_guard = exp2_guard

    @abstractmethod
    def start(self, prime: int) -> Reach:
        """State after placing ``prime`` at position 0."""

    @abstractmethod
    def image(self, state: Reach, position: int) -> Reach | None:
        """Reals reachable by the term at ``position + 1``, or None when empty."""

    @abstractmethod
    def window(self, image: Reach) -> tuple[int, int] | None:
        """Inclusive integer range of reachable next terms."""

    @abstractmethod
    def restrict(self, state: Reach, image: Reach, position: int, prime: int) -> Reach | None:
        """State at ``position + 1`` after choosing ``prime`` there."""

    @abstractmethod
    def anchor(self, state: Reach, position: int, prime: int) -> RealInterval:
        """The real the NEXT_ABOVE policy measures from."""

    def successor_window(self, image: Reach, current: int) -> tuple[int, int] | None:
        """``window`` cut to the integers above ``current``, since chains strictly increase."""
        window = self.window(image)
        if window is None or window[1] <= current:
            return None
        return max(window[0], current + 1), window[1]

    def target(self, image: Reach) -> RealInterval:
        """The real the NEAREST policy measures from: the middle of the image."""
        mid = (image.lo + image.hi) / 2
        return RealInterval.exact(mid, self.precision.clamp(_exact_bits(mid)))

    def realize(self, primes: Sequence[int]) -> list[Reach]:
        """
        States for every prefix of ``primes``.

        Raises:
            EmptyIntersectionError: If no real iterate rounds to the whole list
        """
        states = [self.start(primes[0])]
        for position, prime in enumerate(primes[1:]):
            image = self.image(states[-1], position)
            state = None if image is None else self.restrict(states[-1], image, position, prime)
            if state is None:
                raise EmptyIntersectionError(level=position + 1)
            states.append(state)
        return states

    def select(
        self,
        state: Reach,
        position: int,
        current: int,
        image: Reach,
        window: tuple[int, int],
        policy: SelectionPolicy,
        extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
    ) -> PrimeCandidate | None:
        """Pick the next prime inside ``window`` by ``policy``; None when it holds no prime."""
        lo, hi = window
        if policy == SelectionPolicy.NEAREST:
            return primality.nearest_prime(lo, hi, self.target(image), extra_rounds)

        anchor_lo, _ = self.anchor(state, position, current).exact_bounds()
        start = min(max(lo, _ceil(anchor_lo)), hi)
        found = primality.first_prime_in_window(SearchWindow(lo=start, hi=hi + 1), extra_rounds)
        if found is None and start > lo:
            found = primality.first_prime_in_window(SearchWindow(lo=lo, hi=hi + 1), extra_rounds)
        return found


class IteratedStepper(ChainStepper):
    """Stepper for a(n+1) = f(a(n)) with f a power, a digit shift or 2^x."""

    def __init__(self, rule: GrowthRule, *args, **kwargs):
        if rule.kind not in _ITERATED:
            raise ArithmeticDomainError(f"{rule} is not an iterated rule", "stepper")
        super().__init__(rule, *args, **kwargs)

    def _bits(self, state: Reach) -> int:
        magnitude = _log2_after(float(_log2(state.hi)), self.rule, 1)
        width_bits = max(0, -_log2(state.width)) if state.width > 0 else GUARD_BITS
        return self.precision.clamp(int(magnitude) + GUARD_BITS + width_bits)

    def start(self, prime: int) -> Reach:
        lo, hi = rounding_bounds(prime, self.rule.rounding)
        return Reach(lo, hi, open_hi=True)

    def image(self, state: Reach, position: int) -> Reach | None:
        for bits in self.precision.levels(self._bits(state)):
            lo = _forward(RealInterval.exact(state.lo, bits), self.rule, bits, self.exp2_guard)
            hi = _forward(RealInterval.exact(state.hi, bits), self.rule, bits, self.exp2_guard)
            # Inner image: upper bound of f(lo), lower bound of f(hi).
            image = Reach.of(mpq(lo.hi), mpq(hi.lo), state.open_hi)
            if image is not None:
                return image
            logger.debug(f"Inner image empty at {bits} bits, escalating")
        return None

    def window(self, image: Reach) -> tuple[int, int] | None:
        lo = _ceil(image.lo)
        hi = _ceil(image.hi) - 1 if image.open_hi else _floor(image.hi)
        return (lo, hi) if lo <= hi else None

    def restrict(self, state: Reach, image: Reach, position: int, prime: int) -> Reach | None:
        lo_b, hi_b = rounding_bounds(prime, self.rule.rounding)
        if hi_b <= image.hi:
            return Reach.of(max(image.lo, lo_b), hi_b, True)
        return Reach.of(max(image.lo, lo_b), image.hi, image.open_hi)

    def anchor(self, state: Reach, position: int, prime: int) -> RealInterval:
        bits = self._bits(Reach(mpq(prime), mpq(prime + 1)))
        return _forward(RealInterval.exact(prime, bits), self.rule, bits, self.exp2_guard)


class ScaledStepper(ChainStepper):
    """Stepper for a(n) = floor(c * n^n), n counted from ``rule.range_start``."""

    def __init__(self, rule: GrowthRule, *args, **kwargs):
        if rule.kind != RuleKind.SCALED_NN:
            raise ArithmeticDomainError(f"{rule} is not an n^n rule", "stepper")
        super().__init__(rule, *args, **kwargs)

    def scale(self, position: int) -> "mpz":
        n = (self.rule.range_start or 1) + position
        return mpz(n) ** n

    def start(self, prime: int) -> Reach:
        scale = self.scale(0)
        return Reach(mpq(prime, scale), mpq(prime + 1, scale), open_hi=True)

    def constrain(self, state: Reach, position: int, prime: int) -> Reach | None:
        scale = self.scale(position)
        lo, hi = max(state.lo, mpq(prime, scale)), min(state.hi, mpq(prime + 1, scale))
        return Reach.of(lo, hi, True)

    def image(self, state: Reach, position: int) -> Reach | None:
        scale = self.scale(position + 1)
        return Reach(state.lo * scale, state.hi * scale, open_hi=True)

    def window(self, image: Reach) -> tuple[int, int] | None:
        lo, hi = _floor(image.lo), _ceil(image.hi) - 1
        return (lo, hi) if lo <= hi else None

    def restrict(self, state: Reach, image: Reach, position: int, prime: int) -> Reach | None:
        return self.constrain(state, position + 1, prime)

    def anchor(self, state: Reach, position: int, prime: int) -> RealInterval:
        return self.target(self.image(state, position))  # type: ignore[arg-type]


def stepper_for(
    rule: GrowthRule,
    precision: PrecisionPolicy | None = None,
    exp2_guard: int = DEFAULT_EXP2_GUARD,
) -> ChainStepper:
    if rule.kind == RuleKind.SCALED_NN:
        return ScaledStepper(rule, precision, exp2_guard)
    return IteratedStepper(rule, precision, exp2_guard)


# ===========================================
# FORWARD CONSTRUCTION
# ===========================================


def feasible_window(
    s: int,
    e: RationalExponent | str,
    rounding: RoundingMode = RoundingMode.NEAREST,
    precision: PrecisionPolicy | None = None,
) -> SearchWindow:
    """
    Integers reachable at the next step from every real that rounds to ``s``.

    NEAREST gives [ceil((s-1/2)^e), floor((s+1/2)^e)], FLOOR gives the integers
    in [s^e, (s+1)^e). Both ends are decided exactly, so the window is never
    larger than the true one.

    Raises:
        ArithmeticDomainError: If s < 2
        PrecisionExhaustedError: If the ends cannot be decided
    """
    if s < 2:
        raise ArithmeticDomainError(f"feasible_window needs s >= 2, got {s}", "feasible_window")
    rule = GrowthRule.power(e, rounding)
    assert rule.exponent is not None
    exponent = rule.exponent
    lower, upper = rounding_bounds(s, rounding)

    def exact_ceiling(base: "mpq", x: RealInterval) -> int | Undecided:
        decided = _ceil_of(x)
        if decided is not UNDECIDED:
            return decided
        # x straddles an integer k: decide whether base^e == k exactly.
        lo, hi = x.exact_bounds()
        for k in range(_ceil(lo), _ceil(hi) + 1):
            if base**exponent.num == mpq(k) ** exponent.den:
                return k
        return UNDECIDED

    def compute(bits: int) -> SearchWindow | Undecided:
        lo = exact_ceiling(lower, pow_rational(RealInterval.exact(lower, bits), exponent, bits))
        hi = exact_ceiling(upper, pow_rational(RealInterval.exact(upper, bits), exponent, bits))
        if lo is UNDECIDED or hi is UNDECIDED:
            return UNDECIDED
        return SearchWindow(lo=lo, hi=hi)

    policy = precision or PrecisionPolicy()
    floor_bits = int(_log2_after(float(_log2(upper)), rule, 1)) + GUARD_BITS
    return with_escalation(compute, policy, floor_bits=floor_bits)


def iter_extensions(
    chain: PrimeChain,
    *,
    precision: PrecisionPolicy | None = None,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
    exp2_guard: int = DEFAULT_EXP2_GUARD,
) -> Iterator[int]:
    """
    Yield the primes that extend ``chain`` one at a time, without end.

    Raises:
        EmptyIntersectionError: If the existing primes are not realizable
        InfeasibleError: When a window holds no probable prime
    """
    if chain.rule.kind not in (RuleKind.POWER, RuleKind.DIGIT_SHIFT):
        raise ArithmeticDomainError(f"cannot extend a {chain.rule} chain", "extend_chain")
    stepper = stepper_for(chain.rule, precision, exp2_guard)
    state = stepper.realize(chain.primes)[-1]
    current = chain.head
    step = len(chain)
    while True:
        position = step - 1
        image = stepper.image(state, position)
        window = stepper.successor_window(image, current) if image is not None else None
        if image is None or window is None:
            lo = _ceil(image.lo) if image is not None else 0
            raise InfeasibleError(step=step, window_lo=lo, window_hi=lo)
        choice = stepper.select(state, position, current, image, window, chain.policy, extra_rounds)
        if choice is None:
            raise InfeasibleError(step=step, window_lo=window[0], window_hi=window[1] + 1)
        next_state = stepper.restrict(state, image, position, choice.value)
        assert next_state is not None
        logger.debug(f"Step {step}: {choice.value} from window of {window[1] - window[0] + 1}")
        state, current, step = next_state, choice.value, step + 1
        yield choice.value


def extend_chain(
    chain: PrimeChain,
    steps: int,
    *,
    precision: PrecisionPolicy | None = None,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
) -> PrimeChain:
    """
    Append ``steps`` primes, each picked by the chain's policy inside the window
    its predecessor can reach.

    Raises:
        InfeasibleError: If a window holds no probable prime
    """
    primes = list(chain.primes)
    extensions = iter_extensions(chain, precision=precision, extra_rounds=extra_rounds)
    for _ in range(steps):
        primes.append(next(extensions))
    logger.info(f"Extended {chain.rule} chain from {len(chain)} to {len(primes)} primes")
    return replace(chain, primes=tuple(primes), seed=None)


def feasibility_report(
    chain: PrimeChain,
    *,
    precision: PrecisionPolicy | None = None,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
    count_limit: int = 256,
) -> FeasibilityReport:
    """
    How much room the chain head leaves for the next prime.

    ``candidate_count`` stops counting at ``count_limit``.
    """
    stepper = stepper_for(chain.rule, precision)
    state = stepper.start(chain.head)
    image = stepper.image(state, len(chain) - 1)
    window = stepper.successor_window(image, chain.head) if image is not None else None
    if image is None or window is None:
        raise InfeasibleError(step=len(chain), window_lo=0, window_hi=0)
    found = stepper.select(state, len(chain) - 1, chain.head, image, window, chain.policy, extra_rounds)
    search = SearchWindow(lo=window[0], hi=window[1] + 1)
    count = 0
    for _ in primality.primes_in_window(search, extra_rounds):
        count += 1
        if count >= count_limit:
            break
    return FeasibilityReport(
        window=search,
        found=found.value if found else None,
        window_width=float(image.width),
        candidate_count=count,
    )


# ===========================================
# BACKWARD RECOVERY
# ===========================================


def recover_seed(chain: PrimeChain, precision: PrecisionPolicy | None = None) -> RealInterval:
    """
    Interval of every a(0) whose rounded iterates reproduce the chain.

    Starts from the rounding interval of the last prime and walks back, pulling
    the interval through the inverse map and intersecting it with each prime's
    rounding interval.

    Raises:
        EmptyIntersectionError: If no seed reproduces the chain
    """
    rule = chain.rule
    if rule.kind not in _INVERTIBLE:
        raise ArithmeticDomainError(f"cannot recover a seed for a {rule} chain", "recover_seed")
    policy = precision or PrecisionPolicy()
    primes = chain.primes
    inversions = len(primes) - 1 + chain.first_index
    floor_bits = int(mpz(primes[-1]).bit_length()) + inversions * _growth_bits(rule) + GUARD_BITS

    def compute(bits: int) -> RealInterval:
        lower, upper = rounding_bounds(primes[-1], rule.rounding)
        current = RealInterval.from_bounds(lower, upper, bits)
        for level in range(len(primes) - 2, -1, -1):
            lower, upper = rounding_bounds(primes[level], rule.rounding)
            pulled = _inverse(current, rule, bits)
            narrowed = pulled.intersection(RealInterval.from_bounds(lower, upper, bits))
            if narrowed is None:
                raise EmptyIntersectionError(level=level)
            current = narrowed
        for _ in range(chain.first_index):
            current = _inverse(current, rule, bits)
        return current

    seed = with_escalation(compute, policy, floor_bits=floor_bits)
    logger.info(f"Recovered seed for {len(primes)}-prime {rule} chain at {seed.precision_bits} bits")
    return seed


def with_recovered_seed(chain: PrimeChain, precision: PrecisionPolicy | None = None) -> PrimeChain:
    """The chain carrying the midpoint of its recovered seed interval."""
    return replace(chain, seed=recover_seed(chain, precision).midpoint())


# ===========================================
# GENERATION FROM A SEED
# ===========================================


def _emit_terms(
    evaluate: Callable[[int], Iterator[tuple[int, RealInterval]]],
    wanted: range,
    rounding: RoundingMode,
    start_bits: int,
    policy: PrecisionPolicy,
    extra_rounds: int,
) -> GenerationResult:
    """
    Decide the integer terms yielded by ``evaluate(bits)`` for the indices in ``wanted``.

    Raises the precision until every term is decided. When doubling the
    precision no longer halves the width of an undecided term, the seed is what
    limits it and the run stops there.
    """
    terms: list[GeneratedTerm] = []
    widths: dict[int, "gmpy2.mpfr"] = {}
    bits = policy.clamp(start_bits)
    while True:
        undecided: tuple[int, RealInterval] | None = None
        for index, x in evaluate(bits):
            if index < wanted.start:
                continue
            if index >= wanted.stop:
                break
            value = _decide(x, rounding)
            if value is UNDECIDED:
                undecided = (index, x)
                break
            if index - wanted.start == len(terms):
                status = primality.is_probable_prime(value, extra_rounds).status
                terms.append(GeneratedTerm(index=index, value=value, status=status))
        if undecided is None:
            return GenerationResult(terms=terms, bits_used=bits)

        index, x = undecided
        width = x.width()
        previous = widths.get(index)
        if bits >= policy.max_bits or (previous is not None and width * 2 > previous):
            logger.info(f"Seed exhausted at index {index} after {len(terms)} terms ({bits} bits)")
            return GenerationResult(terms=terms, exhausted_at=index, bits_used=bits)
        widths[index] = width
        bits = min(policy.max_bits, bits * 2)
        logger.info(f"Term {index} undecided, escalating to {bits} bits")


def generate_from_seed(
    seed: RealInterval,
    rule: GrowthRule,
    count: int,
    *,
    start_index: int = 0,
    precision: PrecisionPolicy | None = None,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
    exp2_guard: int = DEFAULT_EXP2_GUARD,
) -> GenerationResult:
    """
    Iterate ``rule`` from ``seed`` and emit the rounded terms with their primality.

    Term ``i`` is the rounding of a(i), a(0) being the seed itself; terms with
    ``start_index <= i < start_index + count`` are emitted. For n^n rules the
    seed is the scale constant and indices start at the rule's range start.

    Returns:
        GenerationResult; ``exhausted_at`` marks the first index the seed's
        digits cannot decide
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if rule.kind == RuleKind.SCALED_NN:
        first = rule.range_start or 1
        return scan_scaled_nn(
            seed, first, first + count - 1, precision=precision, extra_rounds=extra_rounds
        )
    policy = precision or PrecisionPolicy()
    end = start_index + count

    needed = int(_log2_after(float(gmpy2.get_exp(seed.hi)), rule, end - 1)) + GUARD_BITS
    needed += (end - 1) * _growth_bits(rule)
    if seed.is_point:
        start_bits = max(seed.precision_bits, needed)
    else:
        start_bits = min(needed, seed.precision_bits + GUARD_BITS)

    def evaluate(bits: int) -> Iterator[tuple[int, RealInterval]]:
        x = seed.with_precision(max(bits, seed.precision_bits) if seed.is_point else bits)
        for index in range(end):
            if index:
                x = _forward(x, rule, bits, exp2_guard)
            yield index, x

    result = _emit_terms(evaluate, range(start_index, end), rule.rounding, start_bits, policy, extra_rounds)
    logger.info(f"Generated {len(result.terms)} {rule} terms from seed")
    return result


def verify_mills(
    A: RealInterval,
    count: int,
    *,
    precision: PrecisionPolicy | None = None,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
) -> GenerationResult:
    """floor(A^(3^n)) for n = 1..count."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rule = GrowthRule.power("3", RoundingMode.FLOOR)
    return generate_from_seed(
        A, rule, count, start_index=1, precision=precision, extra_rounds=extra_rounds
    )


def verify_wright(
    alpha: RealInterval,
    count: int,
    *,
    precision: PrecisionPolicy | None = None,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
    exp2_guard: int = DEFAULT_EXP2_GUARD,
) -> GenerationResult:
    """floor(g(n)) for n = 1..count, with g(0) = alpha and g(n+1) = 2^g(n)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    return generate_from_seed(
        alpha,
        GrowthRule.exp2_tower(),
        count,
        start_index=1,
        precision=precision,
        extra_rounds=extra_rounds,
        exp2_guard=exp2_guard,
    )


def regenerate_mills(count: int, extra_rounds: int = DEFAULT_EXTRA_ROUNDS) -> PrimeChain:
    """The Mills primes s(1) = 2, s(n+1) = next_prime(s(n)^3), by integer search alone."""
    if count < 1:
        raise ValueError("count must be at least 1")
    primes = [2]
    while len(primes) < count:
        primes.append(primality.next_prime(primes[-1] ** 3, extra_rounds).value)
        logger.debug(f"Mills term {len(primes)}: {digit_count(primes[-1])} digits")
    return PrimeChain(
        rule=GrowthRule.power("3", RoundingMode.FLOOR),
        primes=tuple(primes),
        policy=SelectionPolicy.NEXT_ABOVE,
        first_index=1,
    )


def regenerate_wright(count: int, extra_rounds: int = DEFAULT_EXTRA_ROUNDS) -> PrimeChain:
    """
    The Wright primes s(1) = 3, s(n+1) = largest prime below 2^(s(n)+1).

    Raises:
        ResourceGuardError: If count > 4 (the fifth term has about 10^4931 digits)
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if count > WRIGHT_MAX_TERMS:
        raise ResourceGuardError(
            f"Wright chains beyond {WRIGHT_MAX_TERMS} terms are out of reach", limit=WRIGHT_MAX_TERMS
        )
    primes = [3]
    while len(primes) < count:
        primes.append(primality.prev_prime(1 << (primes[-1] + 1), extra_rounds).value)
        logger.info(f"Wright term {len(primes)}: {digit_count(primes[-1])} digits")
    return PrimeChain(
        rule=GrowthRule.exp2_tower(),
        primes=tuple(primes),
        policy=SelectionPolicy.NEXT_ABOVE,
        first_index=1,
    )


# ===========================================
# SCALED n^n FORMULA
# ===========================================


def scan_scaled_nn(
    c: RealInterval,
    n_from: int,
    n_to: int,
    *,
    precision: PrecisionPolicy | None = None,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
) -> GenerationResult:
    """floor(c * n^n) and its primality for n = n_from..n_to."""
    if n_from < 1:
        raise ValueError("n_from must be at least 1")
    if n_to < n_from:
        raise ValueError("n_to must not be below n_from")
    policy = precision or PrecisionPolicy()
    top_bits = int(mpz(n_to) ** n_to).bit_length()

    def evaluate(bits: int) -> Iterator[tuple[int, RealInterval]]:
        scaled_c = c.with_precision(bits)
        for n in range(n_from, n_to + 1):
            yield n, scaled_c * RealInterval.exact(mpz(n) ** n, bits)

    start_bits = max(c.precision_bits, top_bits) + GUARD_BITS
    return _emit_terms(
        evaluate, range(n_from, n_to + 1), RoundingMode.FLOOR, start_bits, policy, extra_rounds
    )


def recover_scale_constant(
    primes: Sequence[int], n_from: int, precision: PrecisionPolicy | None = None
) -> RealInterval:
    """
    Every c with floor(c * n^n) = primes[n - n_from], as a closed enclosure of [lo, hi).

    Raises:
        EmptyIntersectionError: If no c reproduces the list
    """
    if not primes:
        raise ValueError("primes must not be empty")
    lo, hi = mpq(0), None
    scale = mpz(1)
    for offset, p in enumerate(primes):
        n = n_from + offset
        scale = mpz(n) ** n
        lo = max(lo, mpq(p, scale))
        hi = mpq(p + 1, scale) if hi is None else min(hi, mpq(p + 1, scale))
        if lo >= hi:
            raise EmptyIntersectionError(level=offset)
    policy = precision or PrecisionPolicy()
    bits = policy.clamp(int(scale.bit_length()) + int(mpz(primes[-1]).bit_length()) + GUARD_BITS)
    return RealInterval.from_bounds(lo, hi, bits)


# ===========================================
# REPORTING
# ===========================================


def digit_growth(chain: PrimeChain | Sequence[int], first_index: int = 0) -> list[DigitGrowth]:
    """Decimal digit counts of the terms and the ratio of each to its predecessor."""
    if isinstance(chain, PrimeChain):
        values, first_index = chain.primes, chain.first_index
    else:
        values = tuple(chain)
    rows: list[DigitGrowth] = []
    previous: int | None = None
    for offset, value in enumerate(values):
        digits = digit_count(value)
        ratio = digits / previous if previous else None
        rows.append(DigitGrowth(index=first_index + offset, digits=digits, ratio=ratio))
        previous = digits
    return rows


def first_composite_index(terms: Sequence[GeneratedTerm]) -> int | None:
    """Index of the first term that is not a (probable) prime, or None."""
    for term in terms:
        if not term.status.is_prime:
            return term.index
    return None
