"""
Arbitrary-precision real interval arithmetic.

Endpoints are MPFR floats (through gmpy2). Every endpoint is produced under an
explicit directed rounding mode, lower endpoints toward -inf and upper endpoints
toward +inf, so an interval always contains the exact real it stands for.
Decimal text is only used at the I/O boundary (``parse_decimal``,
``RealInterval.to_decimal``).

Values are immutable and every operation is a pure function; the MPFR context is
thread-local, so the module is safe to use from many threads.
"""

import logging
import math
import re
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import TypeVar, Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

from primechain.domain.exceptions import (
    ArithmeticDomainError,
    ExactTieError,
    ParseError,
    PrecisionError,
    PrecisionExhaustedError,
    ResourceGuardError,
)

logger = logging.getLogger(__name__)

MIN_PRECISION_BITS = 64
DEFAULT_MAX_BITS = 1 << 20
DEFAULT_EXP2_GUARD = 1 << 32

# Bits of slack carried through Newton iterations before the enclosure step.
_NEWTON_GUARD_BITS = 32
_LOG2_10 = math.log2(10)

_DECIMAL_RE = re.compile(r"^([+-]?)(\d*)(?:\.(\d*))?$")

T = TypeVar("T")
Exact = Union[int, Fraction, "mpz", "mpq", str]


class Undecided(Enum):
    """Marker for an integer rounding the interval cannot decide."""

    UNDECIDED = "undecided"

    def __repr__(self) -> str:
        return "UNDECIDED"


UNDECIDED = Undecided.UNDECIDED


# ===========================================
# PRECISION CONTEXTS
# ===========================================


def _ctx(bits: int, rounding: int) -> "gmpy2.context":
    return gmpy2.context(
        precision=bits,
        round=rounding,
        emax=gmpy2.get_emax_max(),
        emin=gmpy2.get_emin_min(),
        subnormalize=False,
    )


def _down(bits: int) -> "gmpy2.context":
    return _ctx(bits, gmpy2.RoundDown)


def _up(bits: int) -> "gmpy2.context":
    return _ctx(bits, gmpy2.RoundUp)


def _near(bits: int) -> "gmpy2.context":
    return _ctx(bits, gmpy2.RoundToNearest)


def _to_mpq(value: Exact) -> "mpq":
    if isinstance(value, str):
        return mpq(Fraction(value))
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


# ===========================================
# VALUE TYPES
# ===========================================


@dataclass(frozen=True)
class RationalExponent:
    """
    Exponent e = num/den in lowest terms with num > den >= 1.

    The identity exponent 1/1 is accepted for testing degenerate windows.
    """

    num: int
    den: int

    def __post_init__(self):
        if self.num < 1 or self.den < 1:
            raise ValueError("exponent terms must be positive integers")
        if math.gcd(self.num, self.den) != 1:
            raise ValueError(f"exponent {self.num}/{self.den} is not in lowest terms")
        if self.num <= self.den and not (self.num == 1 and self.den == 1):
            raise ValueError(f"exponent {self.num}/{self.den} must be greater than 1")

    @classmethod
    def parse(cls, text: str) -> "RationalExponent":
        """Parse ``"5/4"`` or ``"3"`` into an exponent."""
        try:
            if "/" in text:
                num_text, den_text = text.split("/", 1)
                return cls(int(num_text), int(den_text))
            return cls(int(text), 1)
        except ValueError as e:
            raise ParseError(f"Invalid exponent: {e}", text=text) from e

    @property
    def is_identity(self) -> bool:
        return self.num == self.den

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class PrecisionPolicy:
    """
    Working-precision escalation schedule.

    Attributes:
        start_bits: First precision tried
        max_bits: Ceiling; escalation past it is a precision failure
        growth: Factor applied to the precision at each escalation
    """

    start_bits: int = 128
    max_bits: int = DEFAULT_MAX_BITS
    growth: float = 2.0

    def __post_init__(self):
        if self.start_bits < MIN_PRECISION_BITS:
            raise ValueError(f"start_bits must be at least {MIN_PRECISION_BITS}")
        if self.start_bits > self.max_bits:
            raise ValueError("start_bits must not exceed max_bits")
        if self.growth <= 1:
            raise ValueError("growth must be greater than 1")

    def levels(self, floor_bits: int = 0) -> Iterator[int]:
        """Yield the precisions to try, starting at max(start_bits, floor_bits)."""
        bits = min(max(self.start_bits, floor_bits), self.max_bits)
        while True:
            yield bits
            if bits >= self.max_bits:
                return
            bits = min(self.max_bits, max(bits + 1, int(bits * self.growth)))

    def clamp(self, bits: int) -> int:
        return min(max(self.start_bits, bits), self.max_bits)


@dataclass(frozen=True)
class RealInterval:
    """
    Closed interval [lo, hi] guaranteed to contain an exact real value.

    Attributes:
        lo: Lower endpoint (rounded toward -inf when produced)
        hi: Upper endpoint (rounded toward +inf when produced)
        precision_bits: Working precision used to produce the endpoints
    """

    lo: "mpfr"
    hi: "mpfr"
    precision_bits: int

    def __post_init__(self):
        if self.precision_bits < MIN_PRECISION_BITS:
            raise ValueError(f"precision_bits must be at least {MIN_PRECISION_BITS}")
        if gmpy2.is_nan(self.lo) or gmpy2.is_nan(self.hi):
            raise ArithmeticDomainError("interval endpoint is NaN")
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: {self.lo} > {self.hi}")

    # ---------- construction ----------

    @classmethod
    def exact(cls, value: Exact, bits: int = 128) -> "RealInterval":
        """Tightest enclosure of an exact rational (a point when representable)."""
        q = _to_mpq(value)
        with _down(bits):
            lo = mpfr(q)
        with _up(bits):
            hi = mpfr(q)
        return cls(lo, hi, bits)

    @classmethod
    def from_bounds(cls, lo: Exact, hi: Exact, bits: int = 128) -> "RealInterval":
        """Outward enclosure of the rational interval [lo, hi]."""
        q_lo, q_hi = _to_mpq(lo), _to_mpq(hi)
        if q_lo > q_hi:
            raise ValueError("lower bound exceeds upper bound")
        with _down(bits):
            m_lo = mpfr(q_lo)
        with _up(bits):
            m_hi = mpfr(q_hi)
        return cls(m_lo, m_hi, bits)

    @classmethod
    def point(cls, value: "mpfr", bits: int) -> "RealInterval":
        return cls(value, value, max(bits, MIN_PRECISION_BITS))

    # ---------- inspection ----------

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def width(self) -> "mpfr":
        with _up(self.precision_bits):
            return self.hi - self.lo

    def exact_bounds(self) -> tuple["mpq", "mpq"]:
        """Endpoints as exact rationals (MPFR values are dyadic)."""
        return mpq(self.lo), mpq(self.hi)

    def contains(self, value: Exact) -> bool:
        q = _to_mpq(value)
        lo, hi = self.exact_bounds()
        return lo <= q <= hi

    def __contains__(self, value: Exact) -> bool:
        return self.contains(value)

    def contains_interval(self, other: "RealInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "RealInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersection(self, other: "RealInterval") -> "RealInterval | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return None
        return RealInterval(lo, hi, max(self.precision_bits, other.precision_bits))

    def midpoint(self) -> "RealInterval":
        """Point interval at (a representable value next to) the center."""
        bits = self.precision_bits + 2
        with _near(bits):
            mid = (self.lo + self.hi) / 2
        mid = min(max(mid, self.lo), self.hi)
        return RealInterval.point(mid, bits)

    def with_precision(self, bits: int) -> "RealInterval":
        """Re-round the endpoints outward at a new working precision."""
        with _down(bits):
            lo = mpfr(self.lo)
        with _up(bits):
            hi = mpfr(self.hi)
        return RealInterval(lo, hi, bits)

    # ---------- arithmetic ----------

    def _coerce(self, other: "RealInterval | Exact") -> "RealInterval":
        if isinstance(other, RealInterval):
            return other
        return RealInterval.exact(other, self.precision_bits)

    def __add__(self, other: "RealInterval | Exact") -> "RealInterval":
        o = self._coerce(other)
        bits = max(self.precision_bits, o.precision_bits)
        with _down(bits):
            lo = self.lo + o.lo
        with _up(bits):
            hi = self.hi + o.hi
        return RealInterval(lo, hi, bits)

    __radd__ = __add__

    def __sub__(self, other: "RealInterval | Exact") -> "RealInterval":
        o = self._coerce(other)
        bits = max(self.precision_bits, o.precision_bits)
        with _down(bits):
            lo = self.lo - o.hi
        with _up(bits):
            hi = self.hi - o.lo
        return RealInterval(lo, hi, bits)

    def __mul__(self, other: "RealInterval | Exact") -> "RealInterval":
        o = self._coerce(other)
        bits = max(self.precision_bits, o.precision_bits)
        pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)]
        with _down(bits):
            lo = min(a * b for a, b in pairs)
        with _up(bits):
            hi = max(a * b for a, b in pairs)
        return RealInterval(lo, hi, bits)

    __rmul__ = __mul__

    def __truediv__(self, other: "RealInterval | Exact") -> "RealInterval":
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ArithmeticDomainError("division by an interval containing zero", "div")
        bits = max(self.precision_bits, o.precision_bits)
        pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)]
        with _down(bits):
            lo = min(a / b for a, b in pairs)
        with _up(bits):
            hi = max(a / b for a, b in pairs)
        return RealInterval(lo, hi, bits)

    # ---------- output ----------

    def to_decimal(self, decimals: int | None = None) -> str:
        """
        Render the center with round-to-nearest decimal digits.

        Contract: every real in the interval lies within one unit of the last
        printed digit. When ``decimals`` is omitted, the largest count honoring
        the contract is used.
        """
        lo, hi = self.exact_bounds()
        if decimals is None:
            decimals = correct_decimals(self)
        center = (lo + hi) / 2
        return format_fixed(center, decimals)

    def __str__(self) -> str:
        return f"[{format_fixed(mpq(self.lo), 20)}, {format_fixed(mpq(self.hi), 20)}]"


# ===========================================
# DECIMAL I/O
# ===========================================


def format_fixed(value: "mpq", decimals: int) -> str:
    """Round an exact rational to ``decimals`` places (half away from zero)."""
    sign = "-" if value < 0 else ""
    scaled = abs(value) * mpq(10) ** decimals
    digits = int((2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator))
    text = decimal_text(digits)
    if decimals == 0:
        return sign + text
    text = text.rjust(decimals + 1, "0")
    return f"{sign}{text[:-decimals]}.{text[-decimals:]}"


def correct_decimals(x: RealInterval) -> int:
    """Largest d with width(x) <= 10^-d / 2, so the printed center is within 1 ulp."""
    lo, hi = x.exact_bounds()
    width = hi - lo
    if width == 0:
        integer_bits = max(0, int(gmpy2.get_exp(x.lo)))
        return max(0, int((x.precision_bits - integer_bits) / _LOG2_10))
    doubled = 2 * width
    log2_width = int(doubled.numerator).bit_length() - int(doubled.denominator).bit_length()
    estimate = max(0, int(-log2_width / _LOG2_10) - 1)
    while estimate > 0 and doubled * mpq(10) ** estimate > 1:
        estimate -= 1
    while 2 * width * mpq(10) ** (estimate + 1) <= 1:
        estimate += 1
    return estimate


def _normalize_literal(text: str) -> str:
    cleaned = text.replace("\\\n", "").replace("\\\r\n", "")
    cleaned = "".join(cleaned.split())
    for suffix in ("...", "…"):
        if cleaned.endswith(suffix):
            cleaned = cleaned[: -len(suffix)]
    return cleaned


def parse_decimal(
    text: str,
    policy: PrecisionPolicy | None = None,
    *,
    truncated: bool = True,
) -> RealInterval:
    """
    Parse a decimal literal into an enclosing interval.

    Backslash-newline continuations and whitespace are stripped, as are
    trailing ellipses. With ``truncated=True`` the literal is a prefix of a
    longer expansion and the interval covers every real that begins with it;
    otherwise the literal is taken as an exact value.

    Raises:
        ParseError: If the literal is malformed
    """
    policy = policy or PrecisionPolicy()
    cleaned = _normalize_literal(text)
    match = _DECIMAL_RE.match(cleaned)
    if not match or not (match.group(2) or match.group(3)):
        raise ParseError("Malformed decimal literal", text=text)

    sign, int_part, frac_part = match.group(1), match.group(2) or "0", match.group(3) or ""
    scale = len(frac_part)
    magnitude = mpq(mpz(int_part + frac_part), mpz(10) ** scale)
    ulp = mpq(1, 10**scale)

    total_digits = len(int_part.lstrip("0")) + scale
    bits = policy.clamp(int(total_digits * _LOG2_10) + 64)

    if sign == "-":
        value = -magnitude
        lo, hi = (value - ulp, value) if truncated else (value, value)
    else:
        value = magnitude
        lo, hi = (value, value + ulp) if truncated else (value, value)

    logger.debug(f"Parsed {total_digits}-digit literal at {bits} bits")
    return RealInterval.from_bounds(lo, hi, bits)


# ===========================================
# POWERS AND ROOTS
# ===========================================


def _pow_directed(base: "mpfr", k: int, bits: int, rounding_up: bool) -> "mpfr":
    """Square-and-multiply for a positive base with one rounding direction throughout."""
    ctx = _up(bits) if rounding_up else _down(bits)
    with ctx:
        result = mpfr(1)
        square = mpfr(base)
        while k:
            if k & 1:
                result = result * square
            k >>= 1
            if k:
                square = square * square
    return result


def pow_integer(x: RealInterval, k: int, bits: int | None = None) -> RealInterval:
    """
    Enclosure of x^k for a positive interval and positive integer k.

    Raises:
        ArithmeticDomainError: If x.lo <= 0 or k < 1
    """
    if k < 1:
        raise ArithmeticDomainError(f"exponent must be positive, got {k}", "pow_integer")
    if x.lo <= 0:
        raise ArithmeticDomainError("pow_integer requires a positive base", "pow_integer")
    if k == 1:
        return x
    bits = bits or x.precision_bits
    lo = _pow_directed(x.lo, k, bits, rounding_up=False)
    hi = _pow_directed(x.hi, k, bits, rounding_up=True)
    return RealInterval(lo, hi, bits)


def newton_iteration_cap(bits: int) -> int:
    return 4 * math.ceil(math.log2(bits)) + 16


def _newton_root(v: "mpfr", q: int, bits: int) -> "mpfr":
    """Round-to-nearest approximation of v^(1/q) by Newton's method on y^q - v."""
    work = bits + _NEWTON_GUARD_BITS
    cap = newton_iteration_cap(work)
    with _near(work):
        exponent = gmpy2.get_exp(mpfr(v))
        y = gmpy2.exp2(mpfr(exponent) / q)
        tolerance = gmpy2.mul_2exp(mpfr(1), -(bits + 4))
        for _ in range(cap):
            y_next = ((q - 1) * y + v / y ** (q - 1)) / q
            if abs(y_next - y) <= y * tolerance:
                return y_next
            y = y_next
    raise PrecisionError(f"Newton root of degree {q} did not converge in {cap} steps", bits)


def _root_bound(
    v: "mpfr", q: int, bits: int, upper: bool, estimate: "mpfr | None" = None
) -> "mpfr":
    """
    A value r with r^q <= v (upper=False) or r^q >= v (upper=True).

    Starts from the Newton estimate and walks outward by doubling ulp steps until
    the directed power check certifies the bound.
    """
    if estimate is None:
        estimate = _newton_root(v, q, bits)
    with _up(bits) if upper else _down(bits):
        r = mpfr(estimate)
    step = 1
    for _ in range(bits):
        if upper:
            if _pow_directed(r, q, bits, rounding_up=False) >= v:
                return r
            with _up(bits):
                r = r + gmpy2.mul_2exp(mpfr(1), gmpy2.get_exp(r) - bits) * step
        else:
            if r <= 0 or _pow_directed(r, q, bits, rounding_up=True) <= v:
                return max(r, mpfr(0))
            with _down(bits):
                r = r - gmpy2.mul_2exp(mpfr(1), gmpy2.get_exp(r) - bits) * step
        step *= 2
    raise PrecisionError(f"Could not certify a degree-{q} root enclosure", bits)


def nth_root(x: RealInterval, q: int, bits: int | None = None) -> RealInterval:
    """
    Enclosure of x^(1/q) for a positive interval.

    Raises:
        ArithmeticDomainError: If x.lo <= 0 or q < 1
        PrecisionError: If Newton's method stalls (caller escalates)
    """
    if q < 1:
        raise ArithmeticDomainError(f"root degree must be positive, got {q}", "nth_root")
    if x.lo <= 0:
        raise ArithmeticDomainError("nth_root requires a positive argument", "nth_root")
    if q == 1:
        return x
    bits = bits or x.precision_bits
    estimate = _newton_root(x.lo, q, bits)
    lo = _root_bound(x.lo, q, bits, upper=False, estimate=estimate)
    if x.is_point:
        hi = _root_bound(x.hi, q, bits, upper=True, estimate=estimate)
    else:
        hi = _root_bound(x.hi, q, bits, upper=True)
    return RealInterval(lo, hi, bits)


def pow_rational(x: RealInterval, e: RationalExponent, bits: int | None = None) -> RealInterval:
    """Enclosure of x^(num/den), computed as nth_root(pow_integer(x, num), den)."""
    return nth_root(pow_integer(x, e.num, bits), e.den, bits)


def pow_rational_inverse(
    x: RealInterval, e: RationalExponent, bits: int | None = None
) -> RealInterval:
    """Enclosure of x^(den/num); the root comes first to keep intermediates small."""
    return pow_integer(nth_root(x, e.num, bits), e.den, bits)


# ===========================================
# BASE-2 EXPONENTIAL
# ===========================================


def _exp2_bound(v: "mpfr", bits: int, upper: bool) -> "mpfr":
    whole = gmpy2.floor(v)
    ctx = _up(bits) if upper else _down(bits)
    with ctx:
        frac = v - whole
        scaled = gmpy2.exp2(frac)
        return gmpy2.mul_2exp(scaled, int(whole))


def exp2(
    x: RealInterval,
    bits: int | None = None,
    max_exponent: int = DEFAULT_EXP2_GUARD,
) -> RealInterval:
    """
    Enclosure of 2^x, evaluated as 2^floor(x) * 2^frac(x).

    Raises:
        ResourceGuardError: If x.hi exceeds ``max_exponent``
    """
    if x.hi > max_exponent:
        raise ResourceGuardError(
            f"2^x with x up to {float(x.hi):.6g} exceeds the exponent guard", limit=max_exponent
        )
    bits = bits or x.precision_bits
    lo = _exp2_bound(x.lo, bits, upper=False)
    hi = _exp2_bound(x.hi, bits, upper=True)
    return RealInterval(lo, hi, bits)


# ===========================================
# INTEGER DECISIONS
# ===========================================


def floor_of(x: RealInterval) -> int | Undecided:
    """floor(x) when both endpoints agree, else UNDECIDED."""
    lo_q, hi_q = x.exact_bounds()
    lo = lo_q.numerator // lo_q.denominator
    hi = hi_q.numerator // hi_q.denominator
    return int(lo) if lo == hi else UNDECIDED


def round_nearest(x: RealInterval) -> int | Undecided:
    """
    Integer m when x lies strictly inside (m - 1/2, m + 1/2), else UNDECIDED.

    Raises:
        ExactTieError: If x is the single point m + 1/2
    """
    lo, hi = x.exact_bounds()
    half = mpq(1, 2)
    shifted = lo + half
    m = int(shifted.numerator // shifted.denominator)
    if lo == m - half:
        if x.is_point:
            raise ExactTieError(format_fixed(lo, 1))
        return UNDECIDED
    if hi < m + half:
        return m
    return UNDECIDED


def with_escalation(
    compute: Callable[[int], T | Undecided],
    policy: PrecisionPolicy,
    *,
    floor_bits: int = 0,
    step: int = 0,
) -> T:
    """
    Run ``compute(bits)`` at increasing precision until it decides.

    ``compute`` may return UNDECIDED or raise PrecisionError to request more bits.

    Raises:
        PrecisionExhaustedError: If ``policy.max_bits`` is reached undecided
    """
    last_bits = 0
    for bits in policy.levels(floor_bits):
        last_bits = bits
        try:
            result = compute(bits)
        except PrecisionError as e:
            if isinstance(e, PrecisionExhaustedError):
                raise
            logger.debug(f"Escalating past {bits} bits: {e.message}")
            continue
        if result is not UNDECIDED:
            return result  # type: ignore[return-value]
        logger.debug(f"Undecided at {bits} bits, escalating")
    raise PrecisionExhaustedError(step=step, horizon=step, bits=last_bits, reason="max_bits reached")


def digit_count(n: int) -> int:
    """Number of decimal digits of |n| (1 for zero)."""
    m = abs(mpz(n))
    if m == 0:
        return 1
    # num_digits may overshoot by one
    d = int(gmpy2.num_digits(m, 10))
    return d if m >= mpz(10) ** (d - 1) else d - 1


def decimal_text(n: int) -> str:
    """Decimal string of an integer of any size."""
    return mpz(n).digits(10)


def parse_integer(text: str) -> int:
    """
    Parse a decimal integer of any size.

    Raises:
        ParseError: If the text is not an integer
    """
    try:
        return int(mpz(text.strip()))
    except ValueError as e:
        raise ParseError("Malformed integer", text=text[:40]) from e
