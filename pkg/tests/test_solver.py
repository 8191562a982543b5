import itertools
import random
from fractions import Fraction

import pytest
from conftest import instances
from hypothesis import given

from upgrade_assignment import Instance, brute_force, cost, evaluate, solve
from upgrade_assignment.core import normalize
from upgrade_assignment.oracle import random_instance
from upgrade_assignment.solver import (
    Pair,
    SolveTrace,
    f_value,
    find_optimal_pair,
    is_clean,
    make_pair,
    penalty,
    redistribute,
)


def test_two_supplier_example():
    sol, _ = solve(Instance.build([(0, 1), (2, 3)], [1, 1], 1))
    assert sol.value == 3
    assert len(sol.upgrades) == 1


def test_three_supplier_example():
    sol, _ = solve(Instance.build([(0, 1), (1, 1), (1, 4)], [3, 2, 1], 1))
    assert sol.value == 6


def test_greedy_counterexample_optimum():
    sol, _ = solve(Instance.build([(1, 5), (0, 3), (3, 10)], [1, 2, 3], 2))
    assert sol.value == 11
    assert sol.upgrades == {"2", "3"}


def test_extreme_budgets():
    inst = Instance.build([(1, 5), (0, 3), (3, 10)], [1, 2, 3], 0)
    assert solve(inst)[0].value == cost(inst, [])
    full = inst.with_k(3)
    assert solve(full)[0].value == cost(full, full.supplier_ids)


def test_fewer_customers_than_suppliers():
    inst = Instance.build([(0, 9), (1, 2), (0, 4), (5, 5)], [3, 1], 2)
    sol, _ = solve(inst)
    assert set(sol.assignment) == {"1", "2"}
    assert len(sol.upgrades) == 2
    assert sol.value == brute_force(inst).value


@given(instances(max_suppliers=6))
def test_solve_matches_brute_force(inst):
    sol, _ = solve(inst)
    assert sol.value == brute_force(inst).value
    assert len(sol.upgrades) == inst.k
    assert evaluate(inst, sol.upgrades, sol.assignment) == sol.value


def _f(size_a, size_b, cost_a, cost_b, k):
    return (Fraction(size_b - k) * cost_a + Fraction(k - size_a) * cost_b) / (size_b - size_a)


@given(instances(max_suppliers=7))
def test_trace_invariants(inst):
    sol, trace = solve(inst)
    k = inst.k
    fs = []
    for step in trace.narrowing_steps:
        assert step.penalty >= 0
        assert step.size_a < k < step.size_b
        fs.append(_f(step.size_a, step.size_b, step.cost_a, step.cost_b, k))
    for step in trace.rounding_steps:
        assert step.clean
        assert step.size_a < step.size_a2 <= step.size_b2 < step.size_b
        assert step.cost_a2 + step.cost_b2 <= step.cost_a + step.cost_b
        assert step.f_after is None or step.f_after <= step.f_before
        fs.append(step.f_before)
    for steps in (trace.narrowing_steps, trace.rounding_steps):
        gaps = [s.size_b - s.size_a for s in steps]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert all(a >= b for a, b in zip(fs, fs[1:]))
    assert trace.final == sol


def test_rounding_is_exercised():
    rng = random.Random(7)
    rounded = 0
    for _ in range(300):
        inst = random_instance(rng, rng.randint(3, 7))
        sol, trace = solve(inst)
        rounded += bool(trace.rounding_steps)
        assert sol.value == brute_force(inst).value
    assert rounded > 0


def test_f_value_and_penalty():
    pair = Pair(frozenset(), frozenset({"1", "2", "3"}), Fraction(30), Fraction(6))
    assert penalty(pair) == 8
    assert f_value(pair, 1) == 22
    with pytest.raises(ValueError):
        f_value(pair, 3)
    with pytest.raises(ValueError):
        penalty(Pair(frozenset(), frozenset(), Fraction(0), Fraction(0)))


def test_make_pair_requires_k_strictly_inside():
    inst = Instance.build([(0, 1), (0, 1)], [1, 1], 1)
    with pytest.raises(ValueError):
        make_pair(inst, ["1"], ["1", "2"])
    assert make_pair(inst, [], ["1", "2"]).gap == 2


def test_find_optimal_pair_brackets_k():
    inst = normalize(Instance.build([(0, 1), (1, 1), (1, 4)], [3, 2, 1], 1))
    trace = SolveTrace()
    out = find_optimal_pair(inst, trace)
    if isinstance(out, Pair):
        assert len(out.A) < 1 < len(out.B)
        assert f_value(out, 1) == 6
    else:
        assert out.value == 6


def _clean_quadratic(inst, A, B):
    diff = [inst.suppliers[inst.supplier_index(s)] for s in set(A) ^ set(B)]
    return not any(
        x.upgraded_cost < y.upgraded_cost and y.base_cost < x.base_cost
        for x, y in itertools.permutations(diff, 2)
    )


def test_is_clean_examples():
    inst = Instance.build([(0, 10), (2, 5), (2, 10), (0, 5)], [1, 1, 1, 1], 1)
    assert not is_clean(inst, [], ["1", "2"])  # [2,5] inside [0,10]
    assert is_clean(inst, [], ["1", "3"])  # shared right end
    assert is_clean(inst, [], ["1", "4"])  # shared left end
    assert is_clean(inst, ["2"], ["1", "2"])  # common members are ignored


@given(instances(max_suppliers=7))
def test_is_clean_matches_quadratic_check(inst):
    ids = inst.supplier_ids
    for r in range(len(ids) + 1):
        for B in itertools.combinations(ids, r):
            assert is_clean(inst, [], B) == _clean_quadratic(inst, [], B)


def test_redistribute_deals_alternately():
    inst = Instance.build([(0, 2), (1, 3), (2, 4), (3, 5)], [4, 3, 2, 1], 2)
    pair = make_pair(inst, [], ["1", "2", "3", "4"])
    A2, B2 = redistribute(inst, pair)
    assert B2 == {"1", "3"}
    assert A2 == {"2", "4"}
