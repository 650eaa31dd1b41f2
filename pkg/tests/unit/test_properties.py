"""Invariants checked over generated inputs and exhaustive small ranges."""

import math

import gmpy2
import hypothesis.strategies as st
import pytest
from gmpy2 import mpq
from hypothesis import given, settings

from primechain.domain import constants
from primechain.domain.bigreal import (
    UNDECIDED,
    PrecisionPolicy,
    RationalExponent,
    RealInterval,
    digit_count,
    floor_of,
    nth_root,
    parse_decimal,
    pow_integer,
    pow_rational,
    round_nearest,
    with_escalation,
)
from primechain.domain.chains import (
    PrimeChain,
    feasible_window,
    recover_seed,
    regenerate_mills,
    verify_mills,
)
from primechain.domain.models import GrowthRule, PrimeStatus, SearchWindow
from primechain.domain.primality import (
    U64_LIMIT,
    first_prime_in_window,
    is_prime_u64,
    is_probable_prime,
    next_prime,
    prev_prime,
    primes_in_window,
    simple_sieve,
)
from primechain.domain.search import greedy_extend
from primechain.domain.trees import THREE_HALVES, parent

EXPONENTS = st.sampled_from([RationalExponent(3, 2), RationalExponent(5, 4), RationalExponent(11, 10)])


def width(x: RealInterval) -> "mpq":
    lo, hi = x.exact_bounds()
    return hi - lo


class TestIntervalProperties:
    @given(st.integers(1, 10**40), st.integers(1, 10**8), st.integers(2, 7))
    @settings(max_examples=300, deadline=None)
    def test_root_then_power_contains_the_input(self, num, den, q):
        x = mpq(num, den)
        root = nth_root(RealInterval.exact(x, 256), q, 256)
        lo, hi = root.exact_bounds()
        assert lo**q <= x <= hi**q
        assert pow_integer(root, q, 256).contains(x)

    @given(st.integers(2, 10**12), EXPONENTS, st.sampled_from([128, 256]))
    @settings(max_examples=300, deadline=None)
    def test_refinement_narrows_and_keeps_the_value(self, n, e, bits):
        coarse = pow_rational(RealInterval.exact(n, bits), e, bits)
        fine = pow_rational(RealInterval.exact(n, 4 * bits), e, 4 * bits)
        assert width(fine) <= width(coarse)
        for x in (coarse, fine):
            lo, hi = x.exact_bounds()
            assert lo**e.den <= mpq(n) ** e.num <= hi**e.den

    @given(st.integers(2, 10**12), EXPONENTS, st.sampled_from([128, 256]))
    @settings(max_examples=300, deadline=None)
    def test_integer_decisions_agree_with_four_times_the_precision(self, n, e, bits):
        coarse = pow_rational(RealInterval.exact(n, bits), e, bits)
        fine = pow_rational(RealInterval.exact(n, 4 * bits), e, 4 * bits)
        for decide in (round_nearest, floor_of):
            decided = decide(coarse)
            if decided is not UNDECIDED:
                assert decide(fine) == decided

    def test_longer_decimal_prefixes_nest(self):
        digits = constants.THREE_HALVES_SEED.digits
        previous = parse_decimal(digits[:4])
        for end in range(5, len(digits) + 1):
            current = parse_decimal(digits[:end])
            assert previous.contains_interval(current)
            previous = current

    @given(st.integers(1, 10**6000))
    @settings(max_examples=100, deadline=None)
    def test_digit_count_brackets_the_value(self, n):
        d = digit_count(n)
        assert 10 ** (d - 1) <= n < 10**d


class TestPrimalityProperties:
    @given(st.integers(0, U64_LIMIT - 1))
    @settings(max_examples=2000, deadline=None)
    def test_battery_matches_deterministic_test_below_2_64(self, n):
        verdict = is_probable_prime(n, extra_rounds=0)
        assert verdict.status.is_prime == is_prime_u64(n) == bool(gmpy2.is_prime(n))
        if verdict.status.is_prime:
            assert verdict.status == PrimeStatus.PROVEN_PRIME

    @pytest.mark.parametrize(
        "n",
        [2047, 3277, 4033, 4681, 8321, 561, 41041, 3215031751, 3825123056546413051],
    )
    def test_strong_pseudoprimes_are_composite(self, n):
        assert not is_probable_prime(n).status.is_prime
        assert not is_prime_u64(n)

    @given(st.integers(0, 2**80), st.integers(1, 600))
    @settings(max_examples=200, deadline=None)
    def test_sieved_window_scan_matches_naive_scan(self, lo, size):
        window = SearchWindow(lo=lo, hi=lo + size)
        naive = [n for n in range(window.lo, window.hi) if gmpy2.is_prime(n)]
        assert list(primes_in_window(window)) == naive
        found = first_prime_in_window(window)
        assert (found.value if found is not None else None) == (naive[0] if naive else None)

    @given(st.integers(2, 2**72))
    @settings(max_examples=200, deadline=None)
    def test_next_and_prev_prime_bracket(self, n):
        q = next_prime(n).value
        assert q > n and gmpy2.is_prime(q)
        assert gmpy2.next_prime(n) == q
        assert prev_prime(q).value <= n

    @pytest.mark.slow
    def test_next_prime_leaves_no_gap_below_10_to_5(self):
        limit = 10**5
        primes = [int(p) for p in simple_sieve(limit + 200)]
        following = iter(primes)
        expected = next(following)
        for n in range(limit):
            while expected <= n:
                expected = next(following)
            assert next_prime(n).value == expected, n
            if n >= 2:
                assert prev_prime(expected).value <= n


class TestChainProperties:
    def test_mills_terms_nest(self):
        primes = regenerate_mills(6).primes
        for i, p in enumerate(primes):
            for j in range(i + 1, len(primes)):
                power = 3 ** (j - i)
                assert p**power <= primes[j] and primes[j] + 1 <= (p + 1) ** power
        assert verify_mills(constants.MILLS_A.interval(), 3).values == list(primes[:3])

    def test_seed_interval_shrinks_as_primes_are_added(self):
        rule = GrowthRule.power("3/2")
        published = constants.THREE_HALVES_SEED.interval()
        widths = []
        for length in range(1, len(constants.THREE_HALVES_PRIMES) + 1):
            chain = PrimeChain(rule=rule, primes=constants.THREE_HALVES_PRIMES[:length])
            seed = recover_seed(chain)
            assert seed.intersects(published)
            widths.append(width(seed))
        assert all(b < a for a, b in zip(widths, widths[1:]))

    @pytest.mark.parametrize("exponent,start,steps", [("3/2", 2, 9), ("5/4", 113, 11), ("11/10", 10007, 10)])
    def test_digit_length_law(self, exponent, start, steps):
        e = float(RationalExponent.parse(exponent).as_fraction())
        primes = greedy_extend(GrowthRule.power(exponent), start, steps).chain.primes
        for p, q in zip(primes, primes[1:]):
            assert q in feasible_window(p, exponent)
            assert e * (digit_count(p) - 1) - 1 <= digit_count(q) <= e * digit_count(p) + 1

    def test_published_three_halves_digits_follow_the_seed(self):
        log_seed = math.log10(2.038239154782068767463490862609548)
        for n, p in enumerate(constants.THREE_HALVES_PRIMES):
            assert abs(digit_count(p) - (math.floor(1.5**n * log_seed) + 1)) <= 1

    def test_three_halves_never_ties(self):
        policy = PrecisionPolicy(128, 1 << 14)
        for p in (int(q) for q in simple_sieve(20_000)):
            assert parent(p, THREE_HALVES) >= 1
            forward = with_escalation(
                lambda bits: round_nearest(pow_rational(RealInterval.exact(p, bits), THREE_HALVES, bits)),
                policy,
            )
            assert forward >= p
