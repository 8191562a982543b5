"""Strongly polynomial exact solver.

Two phases.  Narrowing starts from the pair ``(set(), I)`` and repeatedly
solves a Lagrangian matching whose penalty makes both ends of the current
pair equally attractive; any strictly better set replaces one end.  When no
such set exists the pair is optimal for the LP relaxation and rounding takes
over: the pair is stripped of wasted upgrades, then its symmetric difference
is dealt alternately into two sets until one of them has exactly ``k``
members.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .core import (
    Instance,
    Solution,
    cost,
    format_rational,
    normalize,
    optimal_assignment,
)
from .matching import lagrangian_matching

__all__ = [
    "InvariantViolation",
    "NarrowingStep",
    "Pair",
    "RoundingStep",
    "SolveTrace",
    "f_value",
    "find_optimal_pair",
    "is_clean",
    "make_pair",
    "penalty",
    "redistribute",
    "round_pair",
    "simplify_pair",
    "solve",
]


class InvariantViolation(RuntimeError):
    """A guarantee of the algorithm failed to hold; always a bug."""


@dataclass(frozen=True)
class Pair:
    A: frozenset
    B: frozenset
    cost_a: Fraction
    cost_b: Fraction
    weakly_optimal: bool = False
    optimal: bool = False
    clean: bool = False

    @property
    def gap(self) -> int:
        return len(self.B) - len(self.A)


def make_pair(instance: Instance, A: Iterable, B: Iterable, **flags) -> Pair:
    A, B = instance.upgrade_set(A), instance.upgrade_set(B)
    if not len(A) < instance.k < len(B):
        raise ValueError(f"need |A| < k < |B|, got {len(A)}, {instance.k}, {len(B)}")
    return Pair(A, B, cost(instance, A), cost(instance, B), **flags)


@dataclass(frozen=True)
class NarrowingStep:
    size_a: int
    size_b: int
    cost_a: Fraction
    cost_b: Fraction
    penalty: Fraction
    size_x: int
    cost_x: Fraction
    g_x: Fraction
    g_a: Fraction

    @property
    def extreme(self) -> bool:
        return self.g_x < self.g_a


@dataclass(frozen=True)
class RoundingStep:
    size_a: int
    size_b: int
    size_a2: int
    size_b2: int
    cost_a: Fraction
    cost_b: Fraction
    cost_a2: Fraction
    cost_b2: Fraction
    clean: bool
    chosen: str  # "A'" or "B'"
    f_before: Fraction
    f_after: Fraction | None  # None when the chosen set has exactly k members


@dataclass
class SolveTrace:
    narrowing_steps: list[NarrowingStep] = field(default_factory=list)
    rounding_steps: list[RoundingStep] = field(default_factory=list)
    simplified: tuple[int, int, int, int] | None = None  # |A|,|B| before, after
    final: Solution | None = None

    def to_json(self) -> dict:
        def enc(step) -> dict:
            out = {}
            for name, value in vars(step).items():
                out[name] = format_rational(value) if isinstance(value, Fraction) else value
            return out

        return {
            "narrowing_steps": [enc(s) for s in self.narrowing_steps],
            "rounding_steps": [enc(s) for s in self.rounding_steps],
            "simplified": list(self.simplified) if self.simplified else None,
            "final": self.final.to_json() if self.final else None,
        }


def f_value(pair: Pair, k: int) -> Fraction:
    """Cost of the convex combination of the two ends that upgrades ``k``."""
    a, b = len(pair.A), len(pair.B)
    if not a < k < b:
        raise ValueError(f"need |A| < k < |B|, got {a}, {k}, {b}")
    return (Fraction(b - k) * pair.cost_a + Fraction(k - a) * pair.cost_b) / (b - a)


def penalty(pair: Pair) -> Fraction:
    """Per-upgrade price that makes both ends of ``pair`` equally good."""
    if pair.gap <= 0:
        raise ValueError("penalty needs |A| < |B|")
    return (pair.cost_a - pair.cost_b) / pair.gap


def _solution(instance: Instance, X: frozenset, pad_to: int | None = None) -> Solution:
    if pad_to is not None and len(X) < pad_to:
        spare = [s.id for s in instance.suppliers if s.id not in X]
        X = X | frozenset(spare[: pad_to - len(X)])
    assignment, value = optimal_assignment(instance, X)
    return Solution(X, assignment, value)


def find_optimal_pair(instance: Instance, trace: SolveTrace | None = None) -> Pair | Solution:
    """Narrow ``(set(), I)`` down to an optimal pair, or hit ``k`` exactly.

    The instance must be normalized and have ``0 < k < |I|``.
    """
    if not instance.is_square:
        raise ValueError("find_optimal_pair needs a normalized instance")
    n, k = len(instance.suppliers), instance.k
    if not 0 < k < n:
        raise ValueError(f"find_optimal_pair needs 0 < k < {n}, got {k}")
    pair = make_pair(instance, (), instance.supplier_ids, weakly_optimal=True)
    for _ in range(n + 1):
        pen = penalty(pair)
        if pen < 0:
            raise InvariantViolation(f"negative penalty {pen}")
        X, _, g_x = lagrangian_matching(instance, pen)
        cost_x = cost(instance, X)
        if cost_x + pen * len(X) != g_x:
            raise InvariantViolation("Lagrangian total disagrees with cost(X)")
        g_a = pair.cost_a + pen * len(pair.A)
        if trace is not None:
            trace.narrowing_steps.append(
                NarrowingStep(
                    len(pair.A), len(pair.B), pair.cost_a, pair.cost_b,
                    pen, len(X), cost_x, g_x, g_a,
                )
            )
        if g_x >= g_a:
            return Pair(pair.A, pair.B, pair.cost_a, pair.cost_b,
                        weakly_optimal=True, optimal=True)
        if not len(pair.A) < len(X) < len(pair.B):
            raise InvariantViolation(
                f"extreme set of size {len(X)} outside ({len(pair.A)}, {len(pair.B)})"
            )
        if len(X) == k:
            return _solution(instance, X)
        if len(X) > k:
            pair = Pair(pair.A, X, pair.cost_a, cost_x, weakly_optimal=True)
        else:
            pair = Pair(X, pair.B, cost_x, pair.cost_b, weakly_optimal=True)
    raise InvariantViolation("narrowing did not terminate within |I| + 1 rounds")


def _strip_wasted(instance: Instance, X: frozenset) -> frozenset:
    """Drop upgraded suppliers that serve zero demand until none remain."""
    demand = {c.id: c.demand for c in instance.customers}
    while True:
        assignment, _ = optimal_assignment(instance, X)
        wasted = {s for c, s in assignment.items() if s in X and demand[c] == 0}
        if not wasted:
            return X
        X = X - wasted


def simplify_pair(
    instance: Instance, pair: Pair, trace: SolveTrace | None = None
) -> Pair | Solution:
    """Make both ends of an optimal pair simple, keeping their costs.

    If the shrunken upper end no longer exceeds ``k`` its matching, padded to
    ``k`` upgrades, is already optimal and is returned as a Solution.
    """
    A = _strip_wasted(instance, pair.A)
    B = _strip_wasted(instance, pair.B)
    cost_a, cost_b = cost(instance, A), cost(instance, B)
    if cost_a != pair.cost_a or cost_b != pair.cost_b:
        raise InvariantViolation("removing wasted upgrades changed a cost")
    if trace is not None:
        trace.simplified = (len(pair.A), len(pair.B), len(A), len(B))
    if len(B) <= instance.k:
        return _solution(instance, B, pad_to=instance.k)
    clean = is_clean(instance, A, B)
    if not clean:
        raise InvariantViolation("simple optimal pair is not clean")
    return Pair(A, B, cost_a, cost_b, pair.weakly_optimal, True, True)


def is_clean(instance: Instance, A: Iterable, B: Iterable) -> bool:
    """No supplier interval of ``A ^ B`` lies strictly inside another one.

    Strict nesting means ``b_i < b_j`` and ``c_j < c_i``.
    """
    diff = instance.upgrade_set(A) ^ instance.upgrade_set(B)
    spans = sorted(
        (s.upgraded_cost, s.base_cost)
        for s in instance.suppliers
        if s.id in diff
    )
    widest = None  # largest c among intervals with strictly smaller b
    group_max = None
    prev_b = None
    for b, c in spans:
        if b != prev_b:
            if group_max is not None and (widest is None or group_max > widest):
                widest = group_max
            group_max = None
            prev_b = b
        if widest is not None and c < widest:
            return False
        group_max = c if group_max is None else max(group_max, c)
    return True


def _redistribute(instance: Instance, pair: Pair):
    if not is_clean(instance, pair.A, pair.B):
        raise InvariantViolation("redistribute called on a pair that is not clean")
    common = pair.A & pair.B
    order = {s.id: i for i, s in enumerate(instance.suppliers)}
    spans = {s.id: (s.upgraded_cost, s.base_cost) for s in instance.suppliers}
    diff = sorted(pair.A ^ pair.B, key=lambda s: (*spans[s], order[s]))
    if not diff:
        raise InvariantViolation("redistribute called with A == B")
    # Positions 1, 3, 5, ... go to B' and 2, 4, ... to A'.
    A2 = common | frozenset(diff[1::2])
    B2 = common | frozenset(diff[0::2])
    cost_a2, cost_b2 = cost(instance, A2), cost(instance, B2)
    if not len(pair.A) < len(A2) <= len(B2) < len(pair.B):
        raise InvariantViolation(
            f"redistribution sizes {len(pair.A)}, {len(A2)}, {len(B2)}, {len(pair.B)}"
        )
    if cost_a2 + cost_b2 > pair.cost_a + pair.cost_b:
        raise InvariantViolation("redistribution increased the summed cost")
    return A2, B2, cost_a2, cost_b2


def redistribute(instance: Instance, pair: Pair) -> tuple[frozenset, frozenset]:
    """Deal the sorted symmetric difference alternately into ``(A', B')``."""
    A2, B2, _, _ = _redistribute(instance, pair)
    return A2, B2


def round_pair(instance: Instance, pair: Pair, trace: SolveTrace | None = None) -> Solution:
    """Turn a clean optimal pair into an optimal set of exactly ``k`` upgrades."""
    k = instance.k
    target = f_value(pair, k)
    for _ in range(len(instance.suppliers)):
        A2, B2, cost_a2, cost_b2 = _redistribute(instance, pair)
        s = pair.gap
        t = pair.cost_a - pair.cost_b
        r = len(pair.B) * pair.cost_a - len(pair.A) * pair.cost_b
        candidates = [
            (name, X, cX)
            for name, X, cX in (("A'", A2, cost_a2), ("B'", B2, cost_b2))
            if s * cX + t * len(X) <= r
        ]
        if not candidates:
            raise InvariantViolation("neither A' nor B' passes the selection test")
        name, X, cX = min(candidates, key=lambda c: (abs(len(c[1]) - k), len(c[1])))
        f_before = f_value(pair, k)
        if len(X) == k:
            if trace is not None:
                trace.rounding_steps.append(
                    RoundingStep(len(pair.A), len(pair.B), len(A2), len(B2),
                                 pair.cost_a, pair.cost_b, cost_a2, cost_b2,
                                 True, name, f_before, None)
                )
            if cX > target:
                raise InvariantViolation(f"rounded value {cX} exceeds {target}")
            return _solution(instance, X)
        if len(X) < k:
            nxt = Pair(X, pair.B, cX, pair.cost_b, optimal=True, clean=True)
        else:
            nxt = Pair(pair.A, X, pair.cost_a, cX, optimal=True, clean=True)
        f_after = f_value(nxt, k)
        if trace is not None:
            trace.rounding_steps.append(
                RoundingStep(len(pair.A), len(pair.B), len(A2), len(B2),
                             pair.cost_a, pair.cost_b, cost_a2, cost_b2,
                             True, name, f_before, f_after)
            )
        if f_after > f_before:
            raise InvariantViolation("rounding step increased the pair value")
        if nxt.gap >= pair.gap:
            raise InvariantViolation("rounding step did not shrink the gap")
        pair = nxt
    raise InvariantViolation("rounding did not terminate within |I| rounds")


def solve(instance: Instance) -> tuple[Solution, SolveTrace]:
    """Optimal upgrade set and assignment for any valid instance.

    The reported upgrade set has exactly ``k`` members and the assignment
    covers only the caller's customers.
    """
    norm = normalize(instance)
    n, k = len(norm.suppliers), norm.k
    trace = SolveTrace()
    if k == 0:
        X = frozenset()
    elif k == n:
        X = frozenset(norm.supplier_ids)
    else:
        outcome = find_optimal_pair(norm, trace)
        if isinstance(outcome, Pair):
            outcome = simplify_pair(norm, outcome, trace)
        if isinstance(outcome, Pair):
            outcome = round_pair(norm, outcome, trace)
        X = outcome.upgrades
    best = cost(norm, X)
    padded = _solution(norm, X, pad_to=k)
    if padded.value != best:
        raise InvariantViolation("padding the upgrade set changed the optimum")
    real = set(instance.customer_ids)
    final = Solution(
        padded.upgrades,
        {c: s for c, s in padded.assignment.items() if c in real},
        padded.value,
    )
    trace.final = final
    return final, trace
