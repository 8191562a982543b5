"""Exact min-cost perfect bipartite matching and the Lagrangian subproblem.

Rational weights are scaled to a common denominator so the kernel only
ever sees integers.  Small enough integers run on ``int64`` arrays; larger
ones fall back to numpy object arrays holding Python ints, which is slower
but still exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .core import Instance, InstanceError, parse_rational

__all__ = [
    "MatchingResult",
    "lagrangian_matching",
    "min_cost_perfect_matching",
    "verify_dual_certificate",
]

_INT64_SAFE = 2**62


@dataclass(frozen=True)
class MatchingResult:
    """A minimum-cost perfect matching with its dual certificate.

    ``permutation[r]`` is the column matched to row ``r``.  The potentials
    satisfy ``row_potentials[r] + col_potentials[c] <= m[r][c]`` with
    equality on matched cells.
    """

    permutation: tuple[int, ...]
    total: Fraction
    row_potentials: tuple[Fraction, ...]
    col_potentials: tuple[Fraction, ...]


def _hungarian(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shortest augmenting paths with potentials on an n x n integer array.

    Entries must be non-negative.  Returns (row->col, u, v).  O(n^3).
    """
    n = a.shape[0]
    dtype = a.dtype
    if dtype == object:
        inf = int(a.max()) * (8 * n + 16) + 1
    else:
        inf = _INT64_SAFE
    # Index 0 is a virtual column holding the row being inserted.
    u = np.zeros(n + 1, dtype=dtype)
    v = np.zeros(n + 1, dtype=dtype)
    owner = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)

    # Warm start: column reduction, then match every row whose cheapest
    # reduced column is still free.  Potentials stay feasible throughout.
    v[1:] = a.min(axis=0)
    reduced = a - v[1:]
    u[1:] = reduced.min(axis=1)
    pending = []
    for row in range(1, n + 1):
        col = int(np.argmin(reduced[row - 1])) + 1
        if owner[col] == 0:
            owner[col] = row
        else:
            pending.append(row)

    for row in pending:
        owner[0] = row
        j0 = 0
        minv = np.full(n + 1, inf, dtype=dtype)
        used = np.zeros(n + 1, dtype=bool)
        free = np.ones(n + 1, dtype=bool)
        free[0] = False
        while True:
            used[j0] = True
            free[j0] = False
            i0 = owner[j0]
            cur = a[i0 - 1] - u[i0] - v[1:]
            better = free[1:] & (cur < minv[1:])
            minv[1:] = np.where(better, cur, minv[1:])
            way[1:] = np.where(better, j0, way[1:])
            masked = np.where(free, minv, inf)
            j1 = int(masked.argmin())
            delta = masked[j1]
            u[owner[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    row_to_col = np.empty(n, dtype=np.int64)
    row_to_col[owner[1:] - 1] = np.arange(n)
    return row_to_col, u[1:], v[1:]


def _solve_scaled(scaled: list[list[int]]):
    """Run the kernel on an integer matrix; potentials come back as ints."""
    a = np.array(scaled, dtype=object)
    # The kernel wants non-negative entries; shifting every cell by the same
    # amount leaves the optimal permutation unchanged.
    shift = min(0, min(min(r) for r in scaled))
    if shift:
        a = a - shift
    n = a.shape[0]
    if int(a.max()) * (8 * n + 16) < _INT64_SAFE:
        a = a.astype(np.int64)
    perm, u, v = _hungarian(a)
    return perm, [int(x) + shift for x in u], [int(x) for x in v]


def min_cost_perfect_matching(
    m: Sequence[Sequence], certify: bool = False
) -> MatchingResult:
    """Minimum-total perfect matching of a square rational matrix.

    With ``certify=True`` the dual certificate is checked exactly before
    returning and a failure raises ``AssertionError``.
    """
    n = len(m)
    if n == 0:
        raise ValueError("cost matrix must be at least 1x1")
    rows = [[parse_rational(x) for x in row] for row in m]
    if any(len(r) != n for r in rows):
        raise ValueError("cost matrix must be square")
    scale = lcm(*(x.denominator for r in rows for x in r))
    scaled = [[int(x * scale) for x in r] for r in rows]
    perm, u, v = _solve_scaled(scaled)
    result = MatchingResult(
        permutation=tuple(int(c) for c in perm),
        total=sum((rows[r][int(perm[r])] for r in range(n)), Fraction(0)),
        row_potentials=tuple(Fraction(x, scale) for x in u),
        col_potentials=tuple(Fraction(x, scale) for x in v),
    )
    if certify:
        assert verify_dual_certificate(rows, result), "dual certificate failed"
    return result


def verify_dual_certificate(m: Sequence[Sequence], result: MatchingResult) -> bool:
    """Exact optimality check: feasible potentials, tight on the matching."""
    n = len(m)
    if sorted(result.permutation) != list(range(n)):
        return False
    u, v = result.row_potentials, result.col_potentials
    for r in range(n):
        for c in range(n):
            reduced = Fraction(m[r][c]) - u[r] - v[c]
            if reduced < 0:
                return False
            if c == result.permutation[r] and reduced != 0:
                return False
    return result.total == sum(Fraction(m[r][result.permutation[r]]) for r in range(n))


def lagrangian_matching(
    instance: Instance, penalty: Fraction
) -> tuple[frozenset, dict, Fraction]:
    """Minimise ``cost(X) + penalty * |X|`` over all supplier sets ``X``.

    Each supplier/customer cell keeps the cheaper of its two edges: the plain
    edge ``c_i d_j`` or the upgraded edge ``b_i d_j + penalty``.  A matched
    supplier counts as upgraded only when the upgraded edge is strictly
    cheaper.  Returns ``(X, assignment, total)``.
    """
    if not instance.is_square:
        raise InstanceError("lagrangian_matching needs a normalized instance")
    penalty = Fraction(penalty)
    if penalty < 0:
        raise ValueError(f"penalty must be non-negative, got {penalty}")
    sup, cus = instance.suppliers, instance.customers
    n = len(sup)
    dc = lcm(*(s.base_cost.denominator for s in sup), *(s.upgraded_cost.denominator for s in sup))
    dd = lcm(*(c.demand.denominator for c in cus))
    scale = lcm(dc * dd, penalty.denominator)
    factor = scale // (dc * dd)
    pen = int(penalty * scale)
    cs = [int(s.base_cost * dc) * factor for s in sup]
    bs = [int(s.upgraded_cost * dc) * factor for s in sup]
    ds = [int(c.demand * dd) for c in cus]
    plain = [[ci * dj for dj in ds] for ci in cs]
    upgraded = [[bi * dj + pen for dj in ds] for bi in bs]
    scaled = [[min(p, q) for p, q in zip(pr, ur)] for pr, ur in zip(plain, upgraded)]
    perm, _, _ = _solve_scaled(scaled)

    chosen = set()
    assignment = {}
    total = 0
    for i in range(n):
        j = int(perm[i])
        assignment[cus[j].id] = sup[i].id
        if upgraded[i][j] < plain[i][j]:
            chosen.add(sup[i].id)
        total += scaled[i][j]
    return frozenset(chosen), assignment, Fraction(total, scale)
