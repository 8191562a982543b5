"""Acceptance gate: one test per criterion, each logging a PASS/FAIL line.

The lines are collected by ``conftest.py`` and printed in the terminal
summary of every pytest run.
"""

import random
import time
from fractions import Fraction

import pytest

from upgrade_assignment import (
    Instance,
    InvariantViolation,
    SchedulingInstance,
    brute_force,
    brute_force_schedule,
    builtin_fixtures,
    check_supermodular,
    cost,
    greedy,
    h_profile,
    solve,
    solve_schedule,
)
from upgrade_assignment.oracle import random_instance
from upgrade_assignment.variants import (
    DualUpgradeSpec,
    brute_force_dual,
    dual_cost,
)

SEED = 20240601
FIXTURES = {fx.name: fx for fx in builtin_fixtures()}


def record(log, n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    log.append(line)
    print(line)
    return ok


def _f(size_a, size_b, cost_a, cost_b, k):
    return (Fraction(size_b - k) * cost_a + Fraction(k - size_a) * cost_b) / (size_b - size_a)


def _trace_violations(trace, k):
    """Every structural guarantee the solver promises, re-checked from its trace."""
    bad = []
    fs = []
    for step in trace.narrowing_steps:
        if step.penalty < 0:
            bad.append(f"negative penalty {step.penalty}")
        fs.append(_f(step.size_a, step.size_b, step.cost_a, step.cost_b, k))
    for step in trace.rounding_steps:
        if not step.clean:
            bad.append("rounding pair not clean")
        if not step.size_a < step.size_a2 <= step.size_b2 < step.size_b:
            bad.append(f"sizes {step.size_a} {step.size_a2} {step.size_b2} {step.size_b}")
        if step.cost_a2 + step.cost_b2 > step.cost_a + step.cost_b:
            bad.append("redistribution raised the summed cost")
        fs.append(step.f_before)
        if step.f_after is not None:
            fs.append(step.f_after)
    for steps in (trace.narrowing_steps, trace.rounding_steps):
        gaps = [s.size_b - s.size_a for s in steps]
        if any(a <= b for a, b in zip(gaps, gaps[1:])):
            bad.append(f"gap did not shrink: {gaps}")
    if any(a < b for a, b in zip(fs, fs[1:])):
        bad.append("pair value increased")
    return bad


@pytest.fixture(scope="module")
def sweep():
    """500 seeded instances with |I| <= 7, solved and brute-forced for every k."""
    rng = random.Random(SEED)
    cases = []
    started = time.perf_counter()
    for index in range(500):
        n = rng.randint(1, 7)
        base = random_instance(rng, n, k=0)
        for k in range(n + 1):
            inst = base.with_k(k)
            try:
                sol, trace = solve(inst)
                got, violations = sol.value, _trace_violations(trace, k)
                steps = (len(trace.narrowing_steps), len(trace.rounding_steps))
            except InvariantViolation as exc:
                got, violations, steps = None, [str(exc)], (0, 0)
            cases.append((index, inst, got, brute_force(inst).value, violations, steps))
    elapsed = time.perf_counter() - started
    profiles = []
    seen = set()
    for index, inst, *_ in cases:
        if index not in seen:
            seen.add(index)
            profiles.append((index, h_profile(inst)))
    return cases, profiles, elapsed


def test_criterion_1_small_fixtures(acceptance_log):
    results = {}
    for name, want in (("sec2", 3), ("sec32", 6)):
        inst = FIXTURES[name].instance
        start = time.perf_counter()
        sol, _ = solve(inst)
        ms = (time.perf_counter() - start) * 1000
        results[name] = (sol.value, ms, sol.value == want and ms < 10)
    ok = all(r[2] for r in results.values())
    detail = ", ".join(f"{n}={v} in {ms:.2f} ms" for n, (v, ms, _) in results.items())
    assert record(acceptance_log, 1, ok, detail)


def test_criterion_2_oracle_equivalence(sweep, acceptance_log):
    cases, _, elapsed = sweep
    wrong = [(i, inst.k, got, want) for i, inst, got, want, *_ in cases if got != want]
    instances = len({c[0] for c in cases})
    ok = not wrong and elapsed < 60 and instances == 500
    detail = f"{instances} instances, {len(cases)} (instance, k) cases, {len(wrong)} mismatches, {elapsed:.1f} s"
    assert record(acceptance_log, 2, ok, detail), wrong[:5]


def test_criterion_3_greedy_failure(acceptance_log):
    inst = Instance.build([(1, 5), (0, 3), (3, 10)], [1, 2, 3], 2)
    g, opt, sol = greedy(inst).value, brute_force(inst).value, solve(inst)[0].value
    first = greedy(inst.with_k(1)).upgrades
    singles = [int(cost(inst, [s])) for s in "123"]
    ok = (g == 12 and opt == sol == 11 and g > opt and first == {"1"}
          and singles == [19, 20, 20])
    detail = f"greedy={g}, oracle={opt}, solve={sol}, greedy k=1 picks {sorted(first)}, singles={singles}"
    assert record(acceptance_log, 3, ok, detail)


def test_criterion_4_counterexamples(acceptance_log):
    problems = []

    part = FIXTURES["partition"]
    table = {("1", "3"): "24.6", ("1", "4"): "23.6", ("2", "3"): "23", ("2", "4"): "23"}
    for X, want in table.items():
        if cost(part.instance, X) != Fraction(want):
            problems.append(f"partition {X}: {cost(part.instance, X)} != {want}")
    p_int, p_frac = part.integral_optimum(), part.fractional_value()
    if not (p_int == 23 and p_frac == Fraction("22.8") and p_frac < p_int):
        problems.append(f"partition integral {p_int}, fractional {p_frac}")

    dual = FIXTURES["dual"]
    rows = [
        (["2", "3"], [], 113), (["2"], ["1"], 113), (["2"], ["3"], 113),
        (["3"], ["1"], 123), (["3"], ["3"], 116), ([], ["1", "3"], 113),
    ]
    for sups, custs, want in rows:
        got = dual_cost(dual.instance, dual.dual, sups, custs)
        if got != want:
            problems.append(f"dual row {sups}/{custs}: {got} != {want}")
    d_int, d_frac = dual.integral_optimum(), dual.fractional_value()
    if not (d_int == 113 and d_frac == 112):
        problems.append(f"dual integral {d_int}, fractional {d_frac}")
    anchors = {k: brute_force_dual(dual.instance, DualUpgradeSpec(dual.dual.upgraded_demands, k))
               for k in (1, 3)}
    if anchors != {1: 146, 3: 78}:
        problems.append(f"dual anchors {anchors}")

    nc = FIXTURES["noncomplete"]
    n_int, n_frac = nc.integral_optimum(), nc.fractional_value()
    if not (n_int == 5 and n_frac == Fraction(9, 2)):
        problems.append(f"noncomplete integral {n_int}, fractional {n_frac}")

    detail = (f"partition {p_int} vs {p_frac}, dual {d_int} vs {d_frac} "
              f"(anchors {anchors[1]}, {anchors[3]}), noncomplete {n_int} vs {n_frac}")
    assert record(acceptance_log, 4, not problems, detail), problems


def test_criterion_5_structural_invariants(sweep, acceptance_log):
    cases, _, _ = sweep
    bad = [(i, inst.k, v) for i, inst, _, _, v, _ in cases if v]
    narrowing = sum(c[5][0] for c in cases)
    rounding = sum(c[5][1] for c in cases)
    detail = (f"{len(cases)} solves ({narrowing} narrowing steps, {rounding} rounding steps), "
              f"{len(bad)} with violations")
    assert record(acceptance_log, 5, not bad, detail), bad[:5]


def test_criterion_6_h_profile(sweep, acceptance_log):
    _, profiles, _ = sweep
    bad = [i for i, p in profiles if not (p.non_increasing and p.convex)]
    detail = f"{len(profiles)} profiles, {len(bad)} not non-increasing and convex"
    assert record(acceptance_log, 6, not bad, detail), bad[:5]


def test_criterion_7_supermodularity(acceptance_log):
    bad = []
    for fx in FIXTURES.values():
        ok, witness = check_supermodular(fx.instance)
        if not ok:
            bad.append((fx.name, witness))
    rng = random.Random(SEED + 7)
    for index in range(500):
        inst = random_instance(rng, rng.randint(2, 6))
        ok, witness = check_supermodular(inst)
        if not ok:
            bad.append((index, witness))
    detail = f"{len(FIXTURES)} fixtures + 500 random instances, {len(bad)} violations"
    assert record(acceptance_log, 7, not bad, detail), bad[:5]


def _random_schedule(rng):
    n = rng.randint(1, 5)
    m = rng.randint(1, 2)
    speeds = [Fraction(rng.randint(1, 4), rng.choice([1, 2])) for _ in range(m)]
    times = []
    for _ in range(n):
        p = Fraction(rng.randint(0, 9), rng.choice([1, 2, 3]))
        times.append((p, p * Fraction(rng.randint(0, 4), 4)))
    return SchedulingInstance.build(speeds, times, 0)


def test_criterion_8_scheduling(acceptance_log):
    rng = random.Random(SEED + 8)
    started = time.perf_counter()
    wrong = []
    runs = 0
    for index in range(200):
        base = _random_schedule(rng)
        for k in range(len(base.jobs) + 1):
            s = SchedulingInstance(base.machines, base.jobs, k)
            got, want = solve_schedule(s).total_completion, brute_force_schedule(s)
            runs += 1
            if got != want:
                wrong.append((index, k, got, want))
    elapsed = time.perf_counter() - started
    spt = solve_schedule(SchedulingInstance.build([1], [(1, 1), (2, 2), (3, 3)], 0)).total_completion
    ok = not wrong and spt == 10 and elapsed < 60
    detail = f"200 instances, {runs} (instance, k) runs, {len(wrong)} mismatches, SPT total {spt}, {elapsed:.1f} s"
    assert record(acceptance_log, 8, ok, detail), wrong[:5]


def test_criterion_9_complexity_smoke(acceptance_log):
    rng = random.Random(SEED + 9)
    timings = []
    for k in (30, 150, 270):
        inst = random_instance(rng, 300, 300, k=k, hi=1000)
        start = time.perf_counter()
        sol, _ = solve(inst)
        timings.append(time.perf_counter() - start)
        assert len(sol.upgrades) == k
    ok = max(timings) < 30
    detail = "n=300 solves in " + ", ".join(f"{t:.1f}" for t in timings) + " s"
    assert record(acceptance_log, 9, ok, detail)
