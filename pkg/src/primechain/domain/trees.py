"""
Prime forests for a fixed exponent.

Every prime q has a parent integer round(q^(1/e)): the integer whose rounding
interval it can be reached from in one step. When the parent is itself a prime
(and not q), the pair is an edge; otherwise q is the root of its own tree.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpz

from primechain.domain.bigreal import (
    PrecisionPolicy,
    RationalExponent,
    RealInterval,
    pow_rational_inverse,
    round_nearest,
    with_escalation,
)
from primechain.domain.chains import GUARD_BITS, feasible_window
from primechain.domain.exceptions import ArithmeticDomainError, ExactTieError
from primechain.domain.models import ForestRecord, ForestStats, RoundingMode
from primechain.domain.primality import simple_sieve

logger = logging.getLogger(__name__)

THREE_HALVES = RationalExponent(3, 2)


@dataclass
class PrimeForest:
    """
    All primes up to ``limit`` arranged by their parent relation.

    Attributes:
        exponent: The growth exponent e
        limit: Largest integer considered
        parent_of: prime -> parent integer (prime or not)
        roots: Primes whose parent is not a different prime, ascending
        edges: (parent, child) pairs, ascending by child
    """

    exponent: RationalExponent
    limit: int
    parent_of: dict[int, int] = field(default_factory=dict)
    roots: list[int] = field(default_factory=list)
    edges: list[tuple[int, int]] = field(default_factory=list)

    @property
    def primes(self) -> list[int]:
        return sorted(self.parent_of)

    def children(self) -> dict[int, list[int]]:
        tree: dict[int, list[int]] = defaultdict(list)
        for parent_prime, child in self.edges:
            tree[parent_prime].append(child)
        return dict(tree)

    def root_of(self, prime: int) -> int:
        while not self.is_root(prime):
            prime = self.parent_of[prime]
        return prime

    def is_root(self, prime: int) -> bool:
        # parent_of holds exactly the primes up to limit, and every parent is at most its child.
        p = self.parent_of[prime]
        return p == prime or p not in self.parent_of

    def path_to_root(self, prime: int) -> list[int]:
        """``prime`` followed by its ancestors, ending at its root."""
        path = [prime]
        while not self.is_root(path[-1]):
            path.append(self.parent_of[path[-1]])
        return path

    def to_record(self) -> ForestRecord:
        return ForestRecord(
            exponent=str(self.exponent),
            limit=self.limit,
            edges=list(self.edges),
            roots=list(self.roots),
        )


def _exact_half(q: int, e: RationalExponent) -> int | None:
    """m when q^(1/e) is exactly m + 1/2, else None."""
    # q^(den/num) = k/2  <=>  2^num * q^den = k^num
    root, exact = gmpy2.iroot(mpz(2) ** e.num * mpz(q) ** e.den, e.num)
    if exact and root % 2 == 1:
        return int(root // 2)
    return None


def parent(q: int, e: RationalExponent = THREE_HALVES, precision: PrecisionPolicy | None = None) -> int:
    """
    The nearest integer to q^(1/e).

    Raises:
        ArithmeticDomainError: If q < 2
        ExactTieError: If q^(1/e) is exactly a half-integer
    """
    if q < 2:
        raise ArithmeticDomainError(f"parent needs q >= 2, got {q}", "parent")
    tie = _exact_half(q, e)
    if tie is not None:
        raise ExactTieError(f"{tie}.5")

    def compute(bits: int):
        return round_nearest(pow_rational_inverse(RealInterval.exact(q, bits), e, bits))

    floor_bits = int(mpz(q).bit_length()) + GUARD_BITS
    return with_escalation(compute, precision or PrecisionPolicy(), floor_bits=floor_bits)


def build_forest(
    limit: int,
    e: RationalExponent = THREE_HALVES,
    *,
    precision: PrecisionPolicy | None = None,
    cross_check: bool = False,
) -> PrimeForest:
    """
    The forest over all primes <= limit.

    One pass over a sieve computes every parent. With ``cross_check`` the
    children of each prime are also enumerated from its feasible window and
    compared with the parent relation.

    Raises:
        ValueError: If the two constructions disagree (cross_check only)
    """
    primes = [int(p) for p in simple_sieve(limit)]
    prime_set = frozenset(primes)
    forest = PrimeForest(exponent=e, limit=limit)

    for q in primes:
        p = parent(q, e, precision)
        forest.parent_of[q] = p
        if p != q and p in prime_set:
            forest.edges.append((p, q))
        else:
            forest.roots.append(q)

    if cross_check:
        _cross_check(forest, prime_set, precision)

    logger.info(
        f"Built {e} forest up to {limit}: {len(primes)} primes, "
        f"{len(forest.roots)} roots, {len(forest.edges)} edges"
    )
    return forest


def _cross_check(
    forest: PrimeForest, prime_set: frozenset[int], precision: PrecisionPolicy | None
) -> None:
    from_parents = forest.children()
    for p in sorted(prime_set):
        window = feasible_window(p, forest.exponent, RoundingMode.NEAREST, precision)
        expected = [
            q for q in range(window.lo, min(window.hi, forest.limit + 1)) if q in prime_set and q != p
        ]
        if expected != from_parents.get(p, []):
            raise ValueError(f"window children of {p} disagree with the parent relation")


def forest_stats(forest: PrimeForest) -> ForestStats:
    """Root count, depth and tree sizes; every prime lies in exactly one tree."""
    depth: dict[int, int] = {}
    for q in forest.primes:
        path = []
        node = q
        while node not in depth and not forest.is_root(node):
            path.append(node)
            node = forest.parent_of[node]
        base = depth.get(node, 0)
        depth.setdefault(node, base)
        for offset, member in enumerate(reversed(path), start=1):
            depth[member] = base + offset

    sizes: dict[int, int] = defaultdict(int)
    for q in forest.primes:
        sizes[forest.root_of(q)] += 1

    return ForestStats(
        prime_count=len(forest.parent_of),
        root_count=len(forest.roots),
        max_depth=max(depth.values(), default=0),
        tree_sizes=[sizes[r] for r in sorted(sizes)],
        orphan_count=0,
    )


def export_dot(forest: PrimeForest) -> str:
    """Graphviz digraph with one subgraph per tree, primes in ascending order."""
    children = forest.children()
    lines = ["digraph primes {"]
    for root in sorted(forest.roots):
        lines.append(f"  subgraph tree_{root} {{")
        lines.append(f"    {root};")
        frontier = [root]
        while frontier:
            node = frontier.pop(0)
            for child in sorted(children.get(node, [])):
                lines.append(f"    {node} -> {child};")
                frontier.append(child)
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
