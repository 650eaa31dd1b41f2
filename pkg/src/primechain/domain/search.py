"""
Simulated-annealing search for long prime chains.

The search walks over discrete prime choices rather than real seeds: a state
is a chain prefix together with the reach of every level, so each candidate is
a valid chain by construction. Once the best chain is known its seed (or scale
constant) is recovered backward.
"""

import logging
import math
import time
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from gmpy2 import mpq
from pydantic import BaseModel, ConfigDict, Field, model_validator

from primechain.domain import primality
from primechain.domain.bigreal import PrecisionPolicy, decimal_text
from primechain.domain.chains import (
    ChainStepper,
    PrimeChain,
    Reach,
    iter_extensions,
    recover_scale_constant,
    stepper_for,
    with_recovered_seed,
)
from primechain.domain.exceptions import (
    ArithmeticDomainError,
    DomainException,
    InfeasibleError,
    PrecisionError,
)
from primechain.domain.models import GrowthRule, RuleKind, SearchWindow, SelectionPolicy, StopReason
from primechain.domain.primality import DEFAULT_EXTRA_ROUNDS

logger = logging.getLogger(__name__)

_SEARCHABLE = (RuleKind.POWER, RuleKind.SCALED_NN)
_MAX_RNG_SEED = (1 << 64) - 1

# Energy gap (about one chain member) after which a level ends back at the best chain.
RETURN_GAP = 1.0


class SearchConfig(BaseModel):
    """
    Annealing schedule and budget for one search.

    Attributes:
        rng_seed: Root of every random draw; restart r uses the stream (rng_seed, r)
        initial_temperature: Starting temperature
        cooling_factor: Multiplier applied after each temperature level
        min_temperature: The schedule ends below this temperature
        steps_per_temperature: Moves tried at each level
        restart_count: Independent restarts
        target_length: Stop as soon as a chain this long is found
        time_budget: Wall-clock safety stop, in seconds; runs cut short by it
            are not reproducible
        max_steps: Move budget per restart, the limit a run normally ends on
        growth_penalty: Weight of log10(last prime)/length in the energy
        start_lo, start_hi: Power rules draw the real seed a(0) from
            [start_lo, start_hi + 1); chains start at a(1)
        scale_lo, scale_hi: Range of scale constants for n^n rules
        workers: Processes used for restarts; 1 runs them in order
    """

    model_config = ConfigDict(frozen=True)

    rng_seed: int = Field(default=0, ge=0, le=_MAX_RNG_SEED)
    initial_temperature: float = Field(default=2.0, gt=0)
    cooling_factor: float = Field(default=0.95, gt=0, lt=1)
    min_temperature: float = Field(default=0.01, gt=0)
    steps_per_temperature: int = Field(default=200, gt=0)
    restart_count: int = Field(default=8, gt=0)
    target_length: int = Field(default=8, gt=0)
    time_budget: float = Field(default=600.0, gt=0)
    max_steps: int = Field(default=3000, gt=0)
    growth_penalty: float = Field(default=0.01, ge=0)
    start_lo: int = Field(default=2, ge=2)
    start_hi: int = Field(default=100, ge=2)
    scale_lo: float = Field(default=0.0, ge=0)
    scale_hi: float = Field(default=1.0, gt=0)
    workers: int = Field(default=1, gt=0)

    @model_validator(mode="after")
    def _check_ranges(self) -> "SearchConfig":
        if self.start_lo > self.start_hi:
            raise ValueError("start_lo must not exceed start_hi")
        if self.scale_lo >= self.scale_hi:
            raise ValueError("scale_lo must be below scale_hi")
        if self.min_temperature >= self.initial_temperature:
            raise ValueError("min_temperature must be below initial_temperature")
        return self


@dataclass
class SearchState:
    """
    Current point of one annealing run.

    ``reaches[i]`` is the reach after placing ``chain.primes[i]``.
    """

    chain: PrimeChain
    reaches: list[Reach] = field(repr=False)
    energy: float
    temperature: float
    best_so_far: PrimeChain
    best_energy: float
    best_reaches: list[Reach] = field(repr=False)


@dataclass(frozen=True)
class SearchOutcome:
    """Best chain of a search and why it stopped."""

    chain: PrimeChain
    stop_reason: StopReason
    energy: float
    steps: int
    restarts: int = 1
    elapsed_s: float = 0.0


def chain_energy(primes: tuple[int, ...] | list[int], growth_penalty: float) -> float:
    """-length + penalty * log10(last prime) / length; lower is better."""
    length = len(primes)
    return -length + growth_penalty * math.log10(primes[-1]) / length


def _rank(length: int, energy: float, primes: tuple[int, ...]) -> tuple:
    # Longer first, then lower energy, then lexicographically first.
    return (-length, energy, primes)


def _uniform_offset(rng: np.random.Generator, size: int) -> int:
    if size < (1 << 62):
        return int(rng.integers(0, size))
    return (int(rng.integers(0, 1 << 62)) * size) >> 62


class ChainAnnealer:
    """Simulated annealing over the prime choices of a chain."""

    def __init__(
        self,
        rule: GrowthRule,
        config: SearchConfig,
        precision: PrecisionPolicy | None = None,
        extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
    ):
        if rule.kind not in _SEARCHABLE:
            raise ArithmeticDomainError(f"cannot search over {rule} chains", "anneal_chain")
        self.rule = rule
        self.config = config
        self.extra_rounds = extra_rounds
        self.stepper: ChainStepper = stepper_for(rule, precision)
        self.first_index = (rule.range_start or 1) if rule.kind == RuleKind.SCALED_NN else 1
        self._seed_image: Reach | None = None

    # --- windows and choices ---

    def seed_reach(self) -> Reach:
        """Seeds a(0) a power-rule search may start from."""
        return Reach(mpq(self.config.start_lo), mpq(self.config.start_hi + 1), open_hi=True)

    def seed_image(self) -> Reach:
        """Reals a(1) reachable from the seed range."""
        if self._seed_image is None:
            image = self.stepper.image(self.seed_reach(), -1)
            if image is None:
                raise InfeasibleError(
                    step=0, window_lo=self.config.start_lo, window_hi=self.config.start_hi + 1
                )
            self._seed_image = image
        return self._seed_image

    def start_window(self) -> SearchWindow:
        if self.rule.kind == RuleKind.SCALED_NN:
            scale = int(self.stepper.scale(0))  # type: ignore[attr-defined]
            lo = max(2, math.floor(self.config.scale_lo * scale))
            hi = max(lo + 1, math.ceil(self.config.scale_hi * scale))
            return SearchWindow(lo=lo, hi=hi)
        window = self.stepper.window(self.seed_image())
        if window is None:
            raise InfeasibleError(
                step=0, window_lo=self.config.start_lo, window_hi=self.config.start_hi + 1
            )
        return SearchWindow(lo=max(2, window[0]), hi=window[1] + 1)

    def place_first(self, prime: int) -> Reach | None:
        """State after placing ``prime`` as the first chain member."""
        if self.rule.kind == RuleKind.SCALED_NN:
            return self.stepper.start(prime)
        return self.stepper.restrict(self.seed_reach(), self.seed_image(), -1, prime)

    def random_start(self, rng: np.random.Generator) -> tuple[list[int], list[Reach]] | None:
        prime = self.random_prime(self.start_window(), rng)
        if prime is None:
            return None
        state = self.place_first(prime)
        return None if state is None else ([prime], [state])

    def random_prime(self, window: SearchWindow, rng: np.random.Generator) -> int | None:
        """First prime at or after a uniform point of ``window``, wrapping to its start."""
        pivot = window.lo + _uniform_offset(rng, window.size)
        found = primality.first_prime_in_window(SearchWindow(lo=pivot, hi=window.hi), self.extra_rounds)
        if found is None and pivot > window.lo:
            found = primality.first_prime_in_window(
                SearchWindow(lo=window.lo, hi=pivot), self.extra_rounds
            )
        return found.value if found is not None else None

    def next_window(self, primes: list[int], reaches: list[Reach]) -> tuple[Reach, tuple[int, int]] | None:
        position = len(primes) - 1
        image = self.stepper.image(reaches[-1], position)
        if image is None:
            return None
        window = self.stepper.successor_window(image, primes[-1])
        return (image, window) if window is not None else None

    # --- growth ---

    def grow(
        self, primes: list[int], reaches: list[Reach], rng: np.random.Generator | None
    ) -> StopReason:
        """
        Extend in place up to ``target_length``.

        With ``rng`` the next prime is a random one in the window; without it the
        prime nearest the middle of the image is taken.
        """
        while len(primes) < self.config.target_length:
            position = len(primes) - 1
            try:
                step = self.next_window(primes, reaches)
                if step is None:
                    return StopReason.INFEASIBLE
                image, (lo, hi) = step
                if rng is None:
                    choice = self.stepper.select(
                        reaches[-1], position, primes[-1], image, (lo, hi),
                        SelectionPolicy.NEAREST, self.extra_rounds,
                    )
                    prime = choice.value if choice is not None else None
                else:
                    prime = self.random_prime(SearchWindow(lo=lo, hi=hi + 1), rng)
            except PrecisionError as e:
                logger.debug(f"Growth stopped at length {len(primes)}: {e}")
                return StopReason.INFEASIBLE
            if prime is None:
                return StopReason.INFEASIBLE
            state = self.stepper.restrict(reaches[-1], image, position, prime)
            if state is None:
                return StopReason.INFEASIBLE
            primes.append(prime)
            reaches.append(state)
        return StopReason.TARGET_REACHED

    def initial(self, rng: np.random.Generator) -> tuple[list[int], list[Reach]] | None:
        start = self.random_start(rng)
        if start is None:
            return None
        primes, reaches = start
        self.grow(primes, reaches, None)
        return primes, reaches

    # --- moves ---

    def replace_at(
        self, primes: list[int], reaches: list[Reach], position: int, rng: np.random.Generator
    ) -> tuple[list[int], list[Reach]] | None:
        """The prefix up to ``position`` with a random prime from its window placed there."""
        if position == 0:
            return self.random_start(rng)
        prefix, prefix_reaches = primes[:position], reaches[:position]
        step = self.next_window(prefix, prefix_reaches)
        if step is None:
            return None
        image, (lo, hi) = step
        prime = self.random_prime(SearchWindow(lo=lo, hi=hi + 1), rng)
        if prime is None:
            return None
        state = self.stepper.restrict(prefix_reaches[-1], image, position - 1, prime)
        if state is None:
            return None
        return prefix + [prime], prefix_reaches + [state]

    def repick(
        self, primes: list[int], reaches: list[Reach], rng: np.random.Generator
    ) -> tuple[list[int], list[Reach]] | None:
        """Replace the prime at a random position, then regrow greedily."""
        candidate = self.replace_at(primes, reaches, int(rng.integers(0, len(primes))), rng)
        if candidate is not None:
            self.grow(*candidate, None)
        return candidate

    def regrow(
        self, primes: list[int], reaches: list[Reach], rng: np.random.Generator
    ) -> tuple[list[int], list[Reach]] | None:
        """Cut the chain at a random position and regrow it with random choices."""
        keep = int(rng.integers(1, len(primes) + 1))
        new_primes, new_reaches = primes[:keep], reaches[:keep]
        self.grow(new_primes, new_reaches, rng)
        return new_primes, new_reaches

    def swap(
        self, primes: list[int], reaches: list[Reach], rng: np.random.Generator
    ) -> tuple[list[int], list[Reach]] | None:
        """n^n rules: change one index's prime and keep the later primes that still fit."""
        position = int(rng.integers(0, len(primes)))
        candidate = self.replace_at(primes, reaches, position, rng)
        if candidate is None:
            return None
        new_primes, new_reaches = candidate
        for level in range(position + 1, len(primes)):
            image = self.stepper.image(new_reaches[-1], level - 1)
            state = None if image is None else self.stepper.restrict(new_reaches[-1], image, level - 1, primes[level])
            if state is None:
                break
            new_primes.append(primes[level])
            new_reaches.append(state)
        self.grow(new_primes, new_reaches, None)
        return new_primes, new_reaches

    def propose(
        self, primes: list[int], reaches: list[Reach], rng: np.random.Generator
    ) -> tuple[list[int], list[Reach]] | None:
        moves = [self.repick, self.regrow]
        if self.rule.kind == RuleKind.SCALED_NN:
            moves.append(self.swap)
        return moves[int(rng.integers(0, len(moves)))](primes, reaches, rng)

    # --- annealing ---

    def energy(self, primes: list[int] | tuple[int, ...]) -> float:
        return chain_energy(primes, self.config.growth_penalty)

    def as_chain(self, primes: list[int] | tuple[int, ...]) -> PrimeChain:
        return PrimeChain(rule=self.rule, primes=tuple(primes), first_index=self.first_index)

    def run(self, restart: int, deadline: float) -> SearchOutcome:
        """One restart; the random stream depends only on (rng_seed, restart)."""
        config = self.config
        rng = np.random.default_rng([config.rng_seed, restart])
        began = time.monotonic()

        start = self.initial(rng)
        if start is None:
            window = self.start_window()
            raise InfeasibleError(step=0, window_lo=window.lo, window_hi=window.hi)
        primes, reaches = start
        state = SearchState(
            chain=self.as_chain(primes),
            reaches=reaches,
            energy=self.energy(primes),
            temperature=config.initial_temperature,
            best_so_far=self.as_chain(primes),
            best_energy=self.energy(primes),
            best_reaches=list(reaches),
        )
        steps = 0
        reason = StopReason.STEP_BUDGET

        while len(state.best_so_far) < config.target_length:
            if state.temperature <= config.min_temperature or steps >= config.max_steps:
                reason = StopReason.STEP_BUDGET
                break
            if time.monotonic() >= deadline:
                reason = StopReason.BUDGET_EXHAUSTED
                break
            for _ in range(config.steps_per_temperature):
                steps += 1
                candidate = self.propose(list(state.chain.primes), state.reaches, rng)
                if candidate is not None:
                    new_primes, new_reaches = candidate
                    new_energy = self.energy(new_primes)
                    diff = new_energy - state.energy
                    accept = min(1.0, math.exp(-diff / state.temperature)) if diff > 0 else 1.0
                    if accept >= rng.uniform(0, 1):
                        state.chain = self.as_chain(new_primes)
                        state.reaches = new_reaches
                        state.energy = new_energy
                    best_rank = _rank(len(state.best_so_far), state.best_energy, state.best_so_far.primes)
                    if _rank(len(new_primes), new_energy, tuple(new_primes)) < best_rank:
                        state.best_so_far = self.as_chain(new_primes)
                        state.best_energy = new_energy
                        state.best_reaches = list(new_reaches)
                if len(state.best_so_far) >= config.target_length or steps >= config.max_steps:
                    break
            state.temperature *= config.cooling_factor
            if state.energy > state.best_energy + RETURN_GAP:
                # Drifted too far below the best chain: continue from it.
                state.chain = state.best_so_far
                state.reaches = list(state.best_reaches)
                state.energy = state.best_energy
            logger.debug(
                f"Restart {restart}: T={state.temperature:.4f} energy={state.energy:.3f} "
                f"best={len(state.best_so_far)}"
            )
        else:
            reason = StopReason.TARGET_REACHED

        logger.info(
            f"Restart {restart} finished: best length {len(state.best_so_far)} "
            f"after {steps} moves ({reason.value})"
        )
        return SearchOutcome(
            chain=state.best_so_far,
            stop_reason=reason,
            energy=state.best_energy,
            steps=steps,
            elapsed_s=time.monotonic() - began,
        )


def _run_restart(
    rule: GrowthRule,
    config: SearchConfig,
    precision: PrecisionPolicy | None,
    extra_rounds: int,
    restart: int,
    deadline: float,
) -> SearchOutcome:
    return ChainAnnealer(rule, config, precision, extra_rounds).run(restart, deadline)


def _attach_seed(chain: PrimeChain, precision: PrecisionPolicy | None) -> PrimeChain:
    try:
        if chain.rule.kind == RuleKind.SCALED_NN:
            c = recover_scale_constant(chain.primes, chain.first_index, precision)
            return replace(chain, seed=c.midpoint())
        return with_recovered_seed(chain, precision)
    except DomainException as e:
        logger.warning(f"Could not recover a seed for the best chain: {e}")
        return chain


def anneal(
    rule: GrowthRule,
    config: SearchConfig,
    *,
    precision: PrecisionPolicy | None = None,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
    on_restart: Optional[Callable[[int, SearchOutcome], None]] = None,
) -> SearchOutcome:
    """
    Run every restart and keep the best chain.

    Restarts are merged in index order and the merge stops at the first one
    that reaches ``target_length``, so a worker pool reports exactly what the
    sequential loop does. Ties are broken toward the lexicographically first
    prime list.

    Raises:
        ArithmeticDomainError: If the rule is neither a power nor an n^n rule
        InfeasibleError: If the start range holds no prime
    """
    if rule.kind not in _SEARCHABLE:
        raise ArithmeticDomainError(f"cannot search over {rule} chains", "anneal_chain")
    began = time.monotonic()
    deadline = began + config.time_budget
    outcomes: list[SearchOutcome] = []

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [
                pool.submit(_run_restart, rule, config, precision, extra_rounds, r, deadline)
                for r in range(config.restart_count)
            ]
            for restart, future in enumerate(futures):
                outcome = future.result()
                outcomes.append(outcome)
                if on_restart is not None:
                    on_restart(restart, outcome)
                if len(outcome.chain) >= config.target_length:
                    for pending in futures[restart + 1 :]:
                        pending.cancel()
                    break
    else:
        for restart in range(config.restart_count):
            outcome = _run_restart(rule, config, precision, extra_rounds, restart, deadline)
            outcomes.append(outcome)
            if on_restart is not None:
                on_restart(restart, outcome)
            if len(outcome.chain) >= config.target_length:
                break

    best = min(outcomes, key=lambda o: _rank(len(o.chain), o.energy, o.chain.primes))
    if len(best.chain) >= config.target_length:
        reason = StopReason.TARGET_REACHED
    elif any(o.stop_reason == StopReason.BUDGET_EXHAUSTED for o in outcomes):
        reason = StopReason.BUDGET_EXHAUSTED
    else:
        reason = StopReason.STEP_BUDGET

    chain = _attach_seed(best.chain, precision)
    elapsed = time.monotonic() - began
    logger.info(
        f"Search over {rule} finished: length {len(chain)} from {len(outcomes)} restarts "
        f"in {elapsed:.1f}s ({reason.value})"
    )
    return SearchOutcome(
        chain=chain,
        stop_reason=reason,
        energy=best.energy,
        steps=sum(o.steps for o in outcomes),
        restarts=len(outcomes),
        elapsed_s=elapsed,
    )


def anneal_chain(
    rule: GrowthRule,
    config: SearchConfig,
    *,
    precision: PrecisionPolicy | None = None,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
) -> PrimeChain:
    """Best chain found by ``anneal``; a spent budget still returns the best so far."""
    return anneal(rule, config, precision=precision, extra_rounds=extra_rounds).chain


def greedy_extend(
    rule: GrowthRule,
    start_prime: int,
    max_steps: int,
    *,
    precision: PrecisionPolicy | None = None,
    extra_rounds: int = DEFAULT_EXTRA_ROUNDS,
) -> SearchOutcome:
    """
    Extend from ``start_prime`` with the NEAREST policy until a window is empty
    or ``max_steps`` primes were added.

    Raises:
        ArithmeticDomainError: If ``start_prime`` fails the primality battery
    """
    if not primality.is_prime(start_prime, extra_rounds):
        raise ArithmeticDomainError(
            f"{decimal_text(start_prime)} is not a probable prime", "greedy_extend"
        )
    chain = PrimeChain(rule=rule, primes=(start_prime,))
    primes = [start_prime]
    reason = StopReason.MAX_STEPS
    extensions = iter_extensions(chain, precision=precision, extra_rounds=extra_rounds)
    try:
        while len(primes) - 1 < max_steps:
            primes.append(next(extensions))
    except InfeasibleError as e:
        logger.info(f"Greedy chain from {decimal_text(start_prime)} stopped: {e}")
        reason = StopReason.INFEASIBLE
    result = PrimeChain(rule=rule, primes=tuple(primes))
    return SearchOutcome(
        chain=result,
        stop_reason=reason,
        energy=chain_energy(result.primes, SearchConfig().growth_penalty),
        steps=len(primes) - 1,
    )
