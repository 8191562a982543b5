"""Brute-force ground truth and the structural property checks.

Everything here enumerates subsets and is exponential on purpose; these
functions exist to cross-check the polynomial solver.
"""

from __future__ import annotations

import itertools
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .core import Customer, Instance, Solution, Supplier, cost, optimal_assignment

__all__ = [
    "DEFAULT_CAP",
    "CapExceeded",
    "HProfile",
    "brute_force",
    "check_supermodular",
    "greedy",
    "h_profile",
    "random_instance",
]

DEFAULT_CAP = 20
_WARN_ABOVE = 16


class CapExceeded(ValueError):
    """The instance is too large for exhaustive enumeration."""


def _check_cap(instance: Instance, cap: int) -> None:
    n = len(instance.suppliers)
    if n > cap:
        raise CapExceeded(f"{n} suppliers exceeds the brute-force cap of {cap}")
    if n > _WARN_ABOVE:
        warnings.warn(f"brute force over {n} suppliers enumerates 2^{n} subsets",
                      RuntimeWarning, stacklevel=3)


def brute_force(instance: Instance, cap: int = DEFAULT_CAP) -> Solution:
    """Best set of exactly ``k`` upgrades by exhaustive search.

    Looking only at ``|X| = k`` is enough because upgrading never raises the
    cost.  Ties go to the lexicographically first index set.
    """
    _check_cap(instance, cap)
    ids = instance.supplier_ids
    best = None
    for combo in itertools.combinations(range(len(ids)), instance.k):
        X = frozenset(ids[i] for i in combo)
        value = cost(instance, X)
        if best is None or value < best[0]:
            best = (value, X)
    assignment, value = optimal_assignment(instance, best[1])
    return Solution(best[1], assignment, value)


@dataclass(frozen=True)
class HProfile:
    """``values[m]`` is the cheapest cost with exactly ``m`` upgrades."""

    values: tuple[Fraction, ...]

    @property
    def non_increasing(self) -> bool:
        return all(a >= b for a, b in zip(self.values, self.values[1:]))

    @property
    def convex(self) -> bool:
        steps = [b - a for a, b in zip(self.values, self.values[1:])]
        return all(s <= t for s, t in zip(steps, steps[1:]))


def h_profile(instance: Instance, cap: int = DEFAULT_CAP) -> HProfile:
    _check_cap(instance, cap)
    ids = instance.supplier_ids
    values = []
    for m in range(len(ids) + 1):
        values.append(
            min(cost(instance, [ids[i] for i in c])
                for c in itertools.combinations(range(len(ids)), m))
        )
    return HProfile(tuple(values))


def greedy(instance: Instance) -> Solution:
    """Add the single most useful upgrade ``k`` times (not optimal in general)."""
    chosen: frozenset = frozenset()
    for _ in range(instance.k):
        best = None
        for s in instance.supplier_ids:
            if s in chosen:
                continue
            value = cost(instance, chosen | {s})
            if best is None or value < best[0]:
                best = (value, s)
        chosen = chosen | {best[1]}
    assignment, value = optimal_assignment(instance, chosen)
    return Solution(chosen, assignment, value)


def check_supermodular(
    instance: Instance, trials: int = 1000, seed: int = 0
) -> tuple[bool, tuple | None]:
    """Test ``cost(A) + cost(A+s+t) >= cost(A+s) + cost(A+t)``.

    Exhaustive over every ``(A, s, t)`` when there are at most six
    suppliers, otherwise ``trials`` random triples.  Returns ``(holds,
    witness)`` where the witness is ``(A, s, t)`` on failure.
    """
    ids = instance.supplier_ids
    if len(ids) <= 6:
        triples = (
            (frozenset(A), s, t)
            for r in range(len(ids) + 1)
            for A in itertools.combinations(ids, r)
            for s, t in itertools.combinations([x for x in ids if x not in A], 2)
        )
    else:
        rng = random.Random(seed)

        def sample():
            for _ in range(trials):
                s, t = rng.sample(ids, 2)
                rest = [x for x in ids if x not in (s, t)]
                A = frozenset(x for x in rest if rng.random() < 0.5)
                yield A, s, t

        triples = sample()
    cache: dict[frozenset, Fraction] = {}

    def c(X: frozenset) -> Fraction:
        if X not in cache:
            cache[X] = cost(instance, X)
        return cache[X]

    for A, s, t in triples:
        lhs = c(A) + c(A | {s, t})
        rhs = c(A | {s}) + c(A | {t})
        if lhs < rhs:
            return False, (A, s, t)
    return True, None


def _rand_rational(rng: random.Random, hi: int, denominators: tuple[int, ...]) -> Fraction:
    return Fraction(rng.randint(0, hi), rng.choice(denominators))


def random_instance(
    rng: random.Random,
    n_suppliers: int,
    n_customers: int | None = None,
    k: int | None = None,
    hi: int = 12,
    denominators: tuple[int, ...] = (1, 1, 2, 3, 4),
) -> Instance:
    """Random instance with small rational data; ties are common by design."""
    if n_customers is None:
        n_customers = rng.randint(1, n_suppliers)
    if k is None:
        k = rng.randint(0, n_suppliers)
    suppliers = []
    for i in range(n_suppliers):
        c = _rand_rational(rng, hi, denominators)
        b = c * Fraction(rng.randint(0, 4), 4) if rng.random() < 0.8 else c
        suppliers.append(Supplier(f"s{i + 1}", c, b))
    customers = [
        Customer(f"c{j + 1}", _rand_rational(rng, hi, denominators) if rng.random() < 0.9 else Fraction(0))
        for j in range(n_customers)
    ]
    return Instance(tuple(suppliers), tuple(customers), k)
