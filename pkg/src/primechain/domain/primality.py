"""
Probable-prime testing and directed prime search.

The battery is trial division by the primes below 10^4 (one gcd against their
product), a strong base-2 test, a strong Lucas test with Selfridge parameters
(together: Baillie-PSW) and a configurable number of extra strong tests to
pseudo-random bases. Below 2^64 a deterministic Miller-Rabin witness set upgrades
the verdict to PROVEN_PRIME.

Range scans use a mod-210 wheel and a block sieve by the small primes before any
strong test is run.
"""

import logging
import math
from collections.abc import Iterator
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpq, mpz

from primechain.domain.bigreal import RealInterval, decimal_text
from primechain.domain.exceptions import ArithmeticDomainError, PrecisionError
from primechain.domain.models import PrimeCandidate, PrimeStatus, SearchWindow

logger = logging.getLogger(__name__)

SMALL_PRIME_LIMIT = 10_000
TRIAL_COMPLETE_LIMIT = SMALL_PRIME_LIMIT * SMALL_PRIME_LIMIT
U64_LIMIT = 1 << 64
SIEVE_BLOCK = 1 << 16
WHEEL_MODULUS = 2 * 3 * 5 * 7
DEFAULT_EXTRA_ROUNDS = 2

# Strong-pseudoprime bases proven sufficient for every n < 3.3 * 10^24.
U64_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL = "trial_division"
_STRONG2 = "strong_base_2"
_LUCAS = "strong_lucas_selfridge"
_U64 = "deterministic_u64"


# ===========================================
# SMALL PRIME TABLES
# ===========================================


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit by the sieve of Eratosthenes."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


@lru_cache(maxsize=1)
def _small_primes() -> tuple[int, ...]:
    return tuple(int(p) for p in simple_sieve(SMALL_PRIME_LIMIT - 1))


@lru_cache(maxsize=1)
def _small_prime_set() -> frozenset[int]:
    return frozenset(_small_primes())


@lru_cache(maxsize=1)
def _small_primorial() -> "mpz":
    product = mpz(1)
    for p in _small_primes():
        product *= p
    return product


@lru_cache(maxsize=1)
def _wheel_mask() -> np.ndarray:
    residues = np.arange(WHEEL_MODULUS)
    mask = np.ones(WHEEL_MODULUS, dtype=bool)
    for p in (2, 3, 5, 7):
        mask[residues % p == 0] = False
    return mask


# ===========================================
# SINGLE-NUMBER TESTS
# ===========================================


def is_prime_u64(n: int) -> bool:
    """
    Exact primality for 0 <= n < 2^64 (deterministic strong-pseudoprime bases).

    Raises:
        ArithmeticDomainError: If n is outside [0, 2^64)
    """
    if n < 0 or n >= U64_LIMIT:
        raise ArithmeticDomainError(f"is_prime_u64 needs 0 <= n < 2^64, got {n}", "is_prime_u64")
    if n < 2:
        return False
    for p in U64_WITNESSES:
        if n == p:
            return True
        if n % p == 0:
            return False
    return all(gmpy2.is_strong_prp(n, a) for a in U64_WITNESSES)


def _small_factor(n: "mpz") -> int | None:
    common = gmpy2.gcd(n, _small_primorial())
    if common == 1:
        return None
    for p in _small_primes():
        if common % p == 0:
            return p
    return None  # pragma: no cover


def _extra_bases(n: "mpz", rounds: int) -> Iterator[int]:
    """Pseudo-random bases in [3, n - 2], seeded by n so verdicts are reproducible."""
    rng = np.random.default_rng(int(n % (1 << 63)))
    span = int(n) - 4
    for _ in range(rounds):
        yield 3 + int(rng.integers(0, 1 << 62, dtype=np.int64)) % span


def _battery(n: int, extra_rounds: int) -> tuple[PrimeStatus, tuple[str, ...], str | None]:
    if n < 2:
        return PrimeStatus.COMPOSITE, (), f"{n} < 2 is not prime"

    m = mpz(n)
    if n < SMALL_PRIME_LIMIT and n in _small_prime_set():
        return PrimeStatus.PROVEN_PRIME, (_TRIAL,), None
    factor = _small_factor(m)
    if factor is not None:
        return PrimeStatus.COMPOSITE, (_TRIAL,), f"factor {factor}"
    if n < TRIAL_COMPLETE_LIMIT:
        return PrimeStatus.PROVEN_PRIME, (_TRIAL,), None

    tests = [_TRIAL, _STRONG2]
    if not gmpy2.is_strong_prp(m, 2):
        return PrimeStatus.COMPOSITE, tuple(tests), "strong base-2 test failed"

    tests.append(_LUCAS)
    if gmpy2.is_square(m):
        return PrimeStatus.COMPOSITE, tuple(tests), f"perfect square of {gmpy2.isqrt(m)}"
    if not gmpy2.is_strong_selfridge_prp(m):
        return PrimeStatus.COMPOSITE, tuple(tests), "strong Lucas test failed"

    if n < U64_LIMIT:
        tests.append(_U64)
        if not is_prime_u64(n):
            # Would be the first known Baillie-PSW pseudoprime.
            logger.warning(f"Baillie-PSW passed but deterministic test failed for {n}")
            return PrimeStatus.COMPOSITE, tuple(tests), "deterministic u64 test failed"
        return PrimeStatus.PROVEN_PRIME, tuple(tests), None

    for base in _extra_bases(m, extra_rounds):
        tests.append(f"strong_base_{base}")
        if gmpy2.gcd(m, base) != 1:
            return PrimeStatus.COMPOSITE, tuple(tests), f"factor {gmpy2.gcd(m, base)}"
        if not gmpy2.is_strong_prp(m, base):
            return PrimeStatus.COMPOSITE, tuple(tests), f"strong base-{base} test failed"

    return PrimeStatus.PROBABLE_PRIME, tuple(tests), None


def is_probable_prime(n: int, extra_rounds: int = DEFAULT_EXTRA_ROUNDS) -> PrimeCandidate:
    """
    Run the primality battery on n.

    Args:
        n: Integer to test (n >= 0)
        extra_rounds: Strong tests to pseudo-random bases after Baillie-PSW

    Returns:
        PrimeCandidate with the verdict, the tests run and, for composites, a witness
    """
    status, tests, witness = _battery(int(n), extra_rounds)
    return PrimeCandidate(value=int(n), status=status, tests_run=tests, witness=witness)


def is_prime(n: int, extra_rounds: int = DEFAULT_EXTRA_ROUNDS) -> bool:
    """Boolean form of ``is_probable_prime`` for hot loops."""
    return _battery(int(n), extra_rounds)[0].is_prime


# ===========================================
# SIEVED SCANS
# ===========================================


def sieve_block(start: int, length: int) -> np.ndarray:
    """
    Survivor mask for the integers start .. start+length-1.

    A False entry is certainly composite (or < 2); a True entry still needs the
    battery unless it is a small prime itself.
    """
    offsets = np.arange(length, dtype=np.int64)
    mask = _wheel_mask()[(start % WHEEL_MODULUS + offsets) % WHEEL_MODULUS]
    for p in _small_primes()[4:]:
        first = (-start) % p
        if first < length:
            mask[first::p] = False
    if start < SMALL_PRIME_LIMIT:
        for p in _small_primes():
            if start <= p < start + length:
                mask[p - start] = True
    if start < 2:
        mask[: 2 - start] = False
    return mask


def _scan(
    lo: int,
    hi: int | None,
    descending: bool,
    extra_rounds: int,
) -> PrimeCandidate | None:
    """First probable prime in [lo, hi) scanning up (or down from hi - 1)."""
    if descending:
        assert hi is not None
        top = hi
        while top > lo:
            start = max(lo, top - SIEVE_BLOCK)
            mask = sieve_block(start, top - start)
            for idx in np.flatnonzero(mask)[::-1]:
                candidate = start + int(idx)
                status, tests, witness = _battery(candidate, extra_rounds)
                if status.is_prime:
                    return PrimeCandidate(value=candidate, status=status, tests_run=tests)
            top = start
        return None

    start = lo
    while hi is None or start < hi:
        length = SIEVE_BLOCK if hi is None else min(SIEVE_BLOCK, hi - start)
        mask = sieve_block(start, length)
        for idx in np.flatnonzero(mask):
            candidate = start + int(idx)
            status, tests, witness = _battery(candidate, extra_rounds)
            if status.is_prime:
                return PrimeCandidate(value=candidate, status=status, tests_run=tests)
        start += length
    return None


def next_prime(n: int, extra_rounds: int = DEFAULT_EXTRA_ROUNDS) -> PrimeCandidate:
    """Smallest probable prime strictly greater than n."""
    if n < 0:
        raise ArithmeticDomainError(f"next_prime needs n >= 0, got {n}", "next_prime")
    result = _scan(int(n) + 1, None, descending=False, extra_rounds=extra_rounds)
    assert result is not None
    return result


def prev_prime(n: int, extra_rounds: int = DEFAULT_EXTRA_ROUNDS) -> PrimeCandidate:
    """
    Largest probable prime strictly less than n.

    Raises:
        ArithmeticDomainError: If n < 3
    """
    if n < 3:
        raise ArithmeticDomainError(f"prev_prime needs n >= 3, got {n}", "prev_prime")
    result = _scan(2, int(n), descending=True, extra_rounds=extra_rounds)
    assert result is not None
    return result


def first_prime_in_window(
    window: SearchWindow, extra_rounds: int = DEFAULT_EXTRA_ROUNDS
) -> PrimeCandidate | None:
    """Smallest probable prime in [lo, hi), or None."""
    return _scan(max(window.lo, 0), window.hi, descending=False, extra_rounds=extra_rounds)


def last_prime_in_window(
    window: SearchWindow, extra_rounds: int = DEFAULT_EXTRA_ROUNDS
) -> PrimeCandidate | None:
    """Largest probable prime in [lo, hi), or None."""
    if window.hi <= 2:
        return None
    return _scan(max(window.lo, 0), window.hi, descending=True, extra_rounds=extra_rounds)


def primes_in_window(
    window: SearchWindow, extra_rounds: int = DEFAULT_EXTRA_ROUNDS
) -> Iterator[int]:
    """All probable primes in [lo, hi), ascending."""
    lo = max(window.lo, 0)
    while lo < window.hi:
        found = _scan(lo, window.hi, descending=False, extra_rounds=extra_rounds)
        if found is None:
            return
        yield found.value
        lo = found.value + 1


def count_primes_in_window(window: SearchWindow, extra_rounds: int = DEFAULT_EXTRA_ROUNDS) -> int:
    return sum(1 for _ in primes_in_window(window, extra_rounds))


def nearest_prime(
    x_lo: int,
    x_hi: int,
    target: RealInterval,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
) -> PrimeCandidate | None:
    """
    The prime in [x_lo, x_hi] closest to the real ``target`` (ties broken upward).

    The answer must be the same for every real inside ``target``; otherwise the
    target is too wide to decide.

    Returns:
        The nearest probable prime, or None when [x_lo, x_hi] holds no prime

    Raises:
        PrecisionError: If different points of ``target`` have different answers
    """
    t_lo, t_hi = target.exact_bounds()
    floor_lo = int(t_lo.numerator // t_lo.denominator)
    ceil_hi = -int((-t_hi.numerator) // t_hi.denominator)

    candidates: list[int] = []
    below = last_prime_in_window(_window(x_lo, min(x_hi, floor_lo) + 1), extra_rounds)
    if below is not None:
        candidates.append(below.value)
    inner_lo, inner_hi = max(x_lo, floor_lo + 1), min(x_hi, ceil_hi - 1)
    if inner_lo <= inner_hi:
        candidates.extend(primes_in_window(SearchWindow(lo=inner_lo, hi=inner_hi + 1), extra_rounds))
    above = first_prime_in_window(_window(max(x_lo, ceil_hi), x_hi + 1), extra_rounds)
    if above is not None:
        candidates.append(above.value)
    if not candidates:
        return None

    def winner(point: "mpq") -> int:
        return min(candidates, key=lambda p: (abs(p - point), -p))

    at_lo, at_hi = winner(t_lo), winner(t_hi)
    if at_lo != at_hi:
        raise PrecisionError(
            f"Target {target} is too wide to pick between "
            f"{decimal_text(at_lo)} and {decimal_text(at_hi)}",
            bits=target.precision_bits,
        )
    return is_probable_prime(at_lo, extra_rounds)


def _window(lo: int, hi: int) -> SearchWindow:
    # Degenerate requests collapse to a window that holds no integer >= 2.
    if lo >= hi:
        return SearchWindow(lo=0, hi=1)
    return SearchWindow(lo=lo, hi=hi)
