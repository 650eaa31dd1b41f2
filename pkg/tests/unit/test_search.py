"""Tests for the annealing search and greedy extension."""

import numpy as np
import pytest
from gmpy2 import mpq
from pydantic import ValidationError

from primechain.domain.chains import feasible_window, generate_from_seed, recover_scale_constant
from primechain.domain.exceptions import ArithmeticDomainError
from primechain.domain.models import GrowthRule, RuleKind, StopReason
from primechain.domain.primality import is_prime
from primechain.domain.search import (
    ChainAnnealer,
    SearchConfig,
    anneal,
    anneal_chain,
    chain_energy,
    greedy_extend,
)

THREE_HALVES = GrowthRule.power("3/2")


def quick_config(**overrides) -> SearchConfig:
    values = {
        "rng_seed": 11,
        "initial_temperature": 1.0,
        "min_temperature": 0.1,
        "steps_per_temperature": 10,
        "restart_count": 2,
        "target_length": 4,
        "time_budget": 600.0,
        "max_steps": 40,
        "start_lo": 2,
        "start_hi": 50,
    }
    values.update(overrides)
    return SearchConfig(**values)


def assert_valid_power_chain(primes, exponent="3/2"):
    assert all(is_prime(p) for p in primes)
    for s, q in zip(primes, primes[1:]):
        assert q in feasible_window(s, exponent)


class TestSearchConfig:
    def test_defaults(self):
        config = SearchConfig()
        assert config.target_length == 8
        assert config.workers == 1

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"cooling_factor": 1.0},
            {"min_temperature": 3.0, "initial_temperature": 2.0},
            {"start_lo": 50, "start_hi": 10},
            {"scale_lo": 0.5, "scale_hi": 0.5},
            {"rng_seed": -1},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            SearchConfig(**kwargs)


def test_chain_energy_prefers_length():
    assert chain_energy([2, 3, 5], 0.0) == -3
    assert chain_energy([2, 3, 5, 11], 0.01) < chain_energy([2, 3, 5], 0.01)


class TestGreedyExtend:
    def test_three_halves_from_two(self):
        outcome = greedy_extend(THREE_HALVES, 2, 4)
        assert outcome.chain.primes == (2, 3, 5, 11, 37)
        assert outcome.stop_reason == StopReason.MAX_STEPS
        assert outcome.steps == 4

    def test_digit_shift_runs_out(self):
        outcome = greedy_extend(GrowthRule.digit_shift(10), 73, 40)
        assert outcome.stop_reason == StopReason.INFEASIBLE
        assert outcome.chain.primes[:2] == (73, 733)
        assert outcome.steps < 40

    def test_start_must_be_prime(self):
        with pytest.raises(ArithmeticDomainError):
            greedy_extend(THREE_HALVES, 9, 3)


class TestChainAnnealer:
    def test_rejects_unsearchable_rules(self):
        with pytest.raises(ArithmeticDomainError):
            ChainAnnealer(GrowthRule.exp2_tower(), quick_config())
        with pytest.raises(ArithmeticDomainError):
            anneal(GrowthRule.digit_shift(10), quick_config())

    def test_moves_keep_chains_valid(self):
        annealer = ChainAnnealer(THREE_HALVES, quick_config(target_length=6))
        rng = np.random.default_rng([5, 0])
        primes, reaches = annealer.initial(rng)
        for _ in range(10):
            candidate = annealer.propose(primes, reaches, rng)
            if candidate is None:
                continue
            primes, reaches = candidate
            assert len(primes) == len(reaches)
            assert_valid_power_chain(primes)

    def test_start_window_for_scaled_rule(self):
        annealer = ChainAnnealer(
            GrowthRule.scaled_nn(3), quick_config(scale_lo=0.25, scale_hi=0.28)
        )
        window = annealer.start_window()
        assert (window.lo, window.hi) == (6, 8)
        assert annealer.first_index == 3

    def test_power_start_window_comes_from_the_seed_range(self):
        # a(0) in [43, 44) puts a(1) in [110.1, 113.3).
        annealer = ChainAnnealer(GrowthRule.power("5/4"), quick_config(start_lo=43, start_hi=43))
        window = annealer.start_window()
        assert (window.lo, window.hi) == (111, 114)
        assert annealer.first_index == 1
        reach = annealer.place_first(113)
        assert reach is not None
        assert reach.lo >= 112 and reach.hi <= mpq(227, 2)


class TestAnneal:
    def test_reaches_easy_target(self):
        # Seeds in [2, 3) start at 3 or 5, and both greedy chains reach length 4.
        outcome = anneal(THREE_HALVES, quick_config(start_hi=2))
        assert outcome.stop_reason == StopReason.TARGET_REACHED
        assert len(outcome.chain) >= 4
        assert outcome.restarts == 1
        assert_valid_power_chain(outcome.chain.primes)

    def test_best_chain_carries_a_working_seed(self):
        chain = anneal_chain(THREE_HALVES, quick_config())
        assert chain.seed is not None
        regenerated = generate_from_seed(
            chain.seed, THREE_HALVES, len(chain), start_index=chain.first_index
        )
        assert tuple(regenerated.values) == chain.primes

    def test_reproducible_from_seed(self):
        config = quick_config(target_length=7, max_steps=30)
        first = anneal(THREE_HALVES, config)
        second = anneal(THREE_HALVES, config)
        assert first.chain.primes == second.chain.primes
        assert first.stop_reason == second.stop_reason
        assert_valid_power_chain(first.chain.primes)

    def test_restart_callback(self):
        seen = []
        anneal(
            THREE_HALVES,
            quick_config(target_length=12, max_steps=5, restart_count=3, steps_per_temperature=5),
            on_restart=lambda restart, outcome: seen.append((restart, outcome.stop_reason)),
        )
        assert [r for r, _ in seen] == list(range(len(seen)))
        assert 1 <= len(seen) <= 3

    def test_scaled_rule(self):
        config = quick_config(target_length=5, scale_lo=0.25, scale_hi=0.28, max_steps=20)
        outcome = anneal(GrowthRule.scaled_nn(3), config)
        chain = outcome.chain
        assert chain.rule.kind == RuleKind.SCALED_NN
        assert chain.first_index == 3
        assert all(is_prime(p) for p in chain.primes)
        assert recover_scale_constant(chain.primes, 3).contains_interval(chain.seed)


class TestBudgets:
    SCALED = GrowthRule.scaled_nn(3)

    def long_target(self, **overrides) -> SearchConfig:
        # No c gives 30 primes in a row, so only the budgets can end these runs.
        return quick_config(target_length=30, scale_lo=0.25, scale_hi=0.28, **overrides)

    def test_runs_end_on_the_step_budget(self):
        outcome = anneal(self.SCALED, self.long_target(max_steps=25, restart_count=2))
        assert outcome.stop_reason == StopReason.STEP_BUDGET
        assert outcome.steps <= 2 * 25
        assert outcome.restarts == 2

    def test_deadline_is_only_a_safety_stop(self):
        outcome = anneal(self.SCALED, self.long_target(time_budget=1e-9))
        assert outcome.stop_reason == StopReason.BUDGET_EXHAUSTED
        assert outcome.steps == 0
        assert all(is_prime(p) for p in outcome.chain.primes)

    def test_best_chain_never_regresses(self):
        config = self.long_target(max_steps=30, restart_count=1)
        annealer = ChainAnnealer(self.SCALED, config)
        initial, _ = annealer.initial(np.random.default_rng([config.rng_seed, 0]))
        outcome = anneal(self.SCALED, config)
        assert len(outcome.chain) >= len(initial)


class TestWorkerPool:
    @pytest.mark.parametrize(
        "rule,overrides",
        [
            (THREE_HALVES, {"target_length": 4}),
            (GrowthRule.scaled_nn(3), {"target_length": 30, "scale_lo": 0.25, "scale_hi": 0.28}),
        ],
    )
    def test_pool_reports_what_the_sequential_loop_does(self, rule, overrides):
        config = quick_config(max_steps=20, restart_count=3, **overrides)
        sequential = anneal(rule, config)
        pooled = anneal(rule, config.model_copy(update={"workers": 2}))
        assert pooled.chain.primes == sequential.chain.primes
        assert pooled.chain.first_index == sequential.chain.first_index
        assert pooled.stop_reason == sequential.stop_reason
        assert pooled.restarts == sequential.restarts
        assert pooled.steps == sequential.steps
        assert pooled.energy == sequential.energy

    def test_pool_stops_merging_at_the_first_restart_on_target(self):
        seen = []
        config = quick_config(start_hi=2, restart_count=4, workers=2)
        outcome = anneal(THREE_HALVES, config, on_restart=lambda r, o: seen.append(r))
        assert outcome.stop_reason == StopReason.TARGET_REACHED
        assert seen == [0]
        assert outcome.restarts == 1


@pytest.mark.slow
def test_annealing_beats_greedy():
    rule = GrowthRule.power("5/4")
    annealed, greedy = [], []
    for seed in range(20):
        config = SearchConfig(
            rng_seed=seed, target_length=12, restart_count=1, max_steps=400, time_budget=600.0
        )
        annealer = ChainAnnealer(rule, config)
        start = annealer.random_prime(annealer.start_window(), np.random.default_rng(seed))
        greedy.append(len(greedy_extend(rule, start, 11).chain))
        annealed.append(len(anneal(rule, config).chain))
    assert np.median(annealed) >= np.median(greedy)
