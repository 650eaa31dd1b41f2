"""Tests for chain construction, generation from seeds and backward recovery."""

import pytest
from gmpy2 import mpq

from primechain.domain import constants
from primechain.domain.bigreal import RationalExponent, RealInterval
from primechain.domain.chains import (
    PrimeChain,
    digit_growth,
    extend_chain,
    feasibility_report,
    feasible_window,
    first_composite_index,
    generate_from_seed,
    recover_scale_constant,
    recover_seed,
    regenerate_mills,
    regenerate_wright,
    rounding_bounds,
    scan_scaled_nn,
    verify_mills,
    verify_wright,
    with_recovered_seed,
)
from primechain.domain.exceptions import (
    ArithmeticDomainError,
    EmptyIntersectionError,
    PrecisionExhaustedError,
    ResourceGuardError,
)
from primechain.domain.models import (
    GeneratedTerm,
    GrowthRule,
    PrimeStatus,
    Provenance,
    RoundingMode,
    SearchWindow,
)

THREE_HALVES = GrowthRule.power("3/2")


class TestPrimeChain:
    def test_requires_increasing_primes(self):
        with pytest.raises(ValueError):
            PrimeChain(rule=THREE_HALVES, primes=(3, 2))
        with pytest.raises(ValueError):
            PrimeChain(rule=THREE_HALVES, primes=())

    def test_non_primes(self):
        chain = PrimeChain(rule=THREE_HALVES, primes=(2, 3, 6))
        assert [c.value for c in chain.non_primes()] == [6]

    def test_record_keeps_rule_and_seed(self):
        chain = PrimeChain(
            rule=THREE_HALVES,
            primes=(2, 3, 5),
            seed=RealInterval.exact(mpq(2)),
            first_index=0,
        )
        record = chain.to_record(Provenance.GENERATE, notes={"source": "test"})
        assert record.rule == "power:3/2:nearest"
        assert record.model_dump(mode="json")["primes"] == ["2", "3", "5"]

        restored = PrimeChain.from_record(record)
        assert restored.primes == chain.primes
        assert restored.rule == chain.rule
        assert 2 in restored.seed


class TestFeasibleWindow:
    def test_rounding_bounds(self):
        assert rounding_bounds(5, RoundingMode.NEAREST) == (mpq(9, 2), mpq(11, 2))
        assert rounding_bounds(5, RoundingMode.FLOOR) == (mpq(5), mpq(6))

    @pytest.mark.parametrize(
        "s,exponent,window",
        [
            (2, "3/2", (2, 4)),
            (3, "3/2", (4, 7)),
            (5, "3/2", (10, 13)),
            (3, "1/1", (3, 4)),
        ],
    )
    def test_nearest_windows(self, s, exponent, window):
        assert feasible_window(s, exponent) == SearchWindow(lo=window[0], hi=window[1])

    def test_floor_window_with_exact_ends(self):
        assert feasible_window(2, "3", RoundingMode.FLOOR) == SearchWindow(lo=8, hi=27)

    def test_five_quarters_window_reaches_published_term(self):
        assert 367 in feasible_window(113, RationalExponent(5, 4))

    def test_domain(self):
        with pytest.raises(ArithmeticDomainError):
            feasible_window(1, "3/2")


class TestExtension:
    def test_greedy_three_halves_from_two(self):
        chain = extend_chain(PrimeChain(rule=THREE_HALVES, primes=(2,)), 4)
        assert chain.primes == (2, 3, 5, 11, 37)

    def test_greedy_picks_nearest_to_middle(self):
        chain = PrimeChain(rule=THREE_HALVES, primes=(2, 3, 5, 11, 37))
        assert extend_chain(chain, 1).head == 227

    def test_digit_shift_from_73(self):
        chain = extend_chain(PrimeChain(rule=GrowthRule.digit_shift(10), primes=(73,)), 1)
        assert chain.primes == (73, 733)

    def test_every_appended_prime_lies_in_its_window(self):
        chain = extend_chain(PrimeChain(rule=GrowthRule.power("5/4"), primes=(113,)), 3)
        assert chain.primes == (113, 367, 1607, 10177)
        for s, q in zip(chain.primes, chain.primes[1:]):
            assert q in feasible_window(s, "5/4")
        assert chain.non_primes() == []

    def test_exp2_chains_cannot_be_extended(self):
        with pytest.raises(ArithmeticDomainError):
            extend_chain(PrimeChain(rule=GrowthRule.exp2_tower(), primes=(3,)), 1)

    def test_feasibility_report(self):
        chain = PrimeChain(rule=THREE_HALVES, primes=(2, 3, 5, 11, 37))
        report = feasibility_report(chain)
        assert report.window == SearchWindow(lo=221, hi=230)
        assert report.found == 227
        assert report.candidate_count == 3


class TestRecovery:
    def test_seed_of_published_three_halves_chain(self):
        chain = PrimeChain(rule=THREE_HALVES, primes=constants.THREE_HALVES_PRIMES)
        seed = recover_seed(chain)
        lo, hi = seed.exact_bounds()
        assert mpq(20382391547820, 10**13) < lo
        assert hi < mpq(20382391547821, 10**13)
        assert seed.intersects(constants.THREE_HALVES_SEED.interval())

    def test_recovered_seed_regenerates_the_chain(self):
        chain = PrimeChain(rule=THREE_HALVES, primes=constants.THREE_HALVES_PRIMES[:8])
        seeded = with_recovered_seed(chain)
        assert seeded.seed is not None and seeded.seed.is_point
        result = generate_from_seed(seeded.seed, THREE_HALVES, 8)
        assert tuple(result.values) == chain.primes

    def test_unrealizable_chain(self):
        with pytest.raises(EmptyIntersectionError):
            recover_seed(PrimeChain(rule=THREE_HALVES, primes=(2, 3, 11)))

    def test_scale_constant(self):
        c = recover_scale_constant(constants.SCALED_NN_PRIMES, 3)
        assert c.intersects(constants.SCALED_NN_C.interval())
        lo, hi = c.exact_bounds()
        assert mpq(26558837294314339, 10**17) < lo
        assert hi < mpq(26558837294314340, 10**17)

    def test_scale_constant_empty(self):
        with pytest.raises(EmptyIntersectionError):
            recover_scale_constant([7, 100], 3)

    def test_exp2_seed_is_not_recoverable(self):
        with pytest.raises(ArithmeticDomainError):
            recover_seed(PrimeChain(rule=GrowthRule.exp2_tower(), primes=(3, 13)))


class TestGeneration:
    def test_three_halves_seed_horizon(self):
        seed = constants.THREE_HALVES_SEED.interval()
        result = generate_from_seed(seed, THREE_HALVES, 14)
        assert tuple(result.values) == constants.THREE_HALVES_PRIMES[:13]
        assert result.exhausted_at == 13
        with pytest.raises(PrecisionExhaustedError):
            result.raise_if_exhausted()

    def test_start_index_skips_leading_terms(self):
        seed = constants.THREE_HALVES_SEED.interval()
        result = generate_from_seed(seed, THREE_HALVES, 3, start_index=4)
        assert [(t.index, t.value) for t in result.terms] == [(4, 37), (5, 223), (6, 3331)]

    def test_digit_shift_seed(self):
        seed = constants.CONCAT_SEED.interval()
        result = generate_from_seed(seed, GrowthRule.digit_shift(10), 5, start_index=1)
        assert tuple(result.values) == constants.CONCAT_PRIMES
        assert result.all_prime

    def test_mills(self):
        A = constants.MILLS_A.interval()
        assert verify_mills(A, 3).values == [2, 11, 1361]
        limited = verify_mills(A, 6)
        assert limited.values == [2, 11, 1361, 2521008887]
        assert limited.exhausted_at == 5

    def test_wright(self):
        alpha = constants.WRIGHT_ALPHA.interval()
        result = verify_wright(alpha, 3)
        assert tuple(result.values) == constants.WRIGHT_PRIMES
        assert [t.index for t in result.terms] == [1, 2, 3]

    def test_regenerated_sequences(self):
        assert regenerate_mills(4).primes == (2, 11, 1361, 2521008887)
        assert regenerate_wright(3).primes == constants.WRIGHT_PRIMES
        with pytest.raises(ResourceGuardError):
            regenerate_wright(5)

    def test_scaled_nn_scan(self):
        c = constants.SCALED_NN_C.interval()
        result = scan_scaled_nn(c, 3, 8)
        assert tuple(result.values) == constants.SCALED_NN_PRIMES[:6]
        assert result.terms[0].index == 3

    def test_scaled_nn_through_generate(self):
        c = constants.SCALED_NN_C.interval()
        result = generate_from_seed(c, GrowthRule.scaled_nn(3), 4)
        assert tuple(result.values) == constants.SCALED_NN_PRIMES[:4]


class TestReporting:
    def test_digit_growth(self):
        rows = digit_growth([2, 11, 1361], first_index=1)
        assert [(r.index, r.digits) for r in rows] == [(1, 1), (2, 2), (3, 4)]
        assert [r.ratio for r in rows] == [None, 2.0, 2.0]

    def test_first_composite_index(self):
        terms = [
            GeneratedTerm(index=0, value=2, status=PrimeStatus.PROVEN_PRIME),
            GeneratedTerm(index=1, value=9, status=PrimeStatus.COMPOSITE),
        ]
        assert first_composite_index(terms) == 1
        assert first_composite_index(terms[:1]) is None
