import itertools
import random
from fractions import Fraction

import pytest
from conftest import instances
from hypothesis import given

from upgrade_assignment import Instance, brute_force, check_supermodular, cost, greedy, h_profile
from upgrade_assignment.oracle import CapExceeded, HProfile, random_instance

GREEDY_TRAP = Instance.build([(1, 5), (0, 3), (3, 10)], [1, 2, 3], 2)


def test_brute_force_picks_first_of_tied_sets():
    inst = Instance.build([(0, 1), (2, 3)], [1, 1], 1)
    sol = brute_force(inst)
    assert sol.value == 3
    assert sol.upgrades == {"1"}


def test_cap():
    inst = Instance.build([(0, 1)] * 5, [1], 1)
    with pytest.raises(CapExceeded):
        brute_force(inst, cap=4)
    with pytest.raises(CapExceeded):
        h_profile(inst, cap=4)


def test_warns_on_large_enumeration():
    inst = Instance.build([(0, 1)] * 17, [1], 0)
    with pytest.warns(RuntimeWarning):
        brute_force(inst)


def test_greedy_trap():
    g = greedy(GREEDY_TRAP)
    assert g.value == 12
    assert "1" in g.upgrades
    assert greedy(GREEDY_TRAP.with_k(1)).upgrades == {"1"}
    assert brute_force(GREEDY_TRAP).value == 11


def test_h_profile_of_greedy_trap():
    prof = h_profile(GREEDY_TRAP)
    assert prof.values == (29, 19, 11, 5)
    assert prof.non_increasing and prof.convex


def test_h_profile_flags():
    assert not HProfile((Fraction(1), Fraction(2))).non_increasing
    assert not HProfile((Fraction(9), Fraction(8), Fraction(1))).convex


@given(instances(max_suppliers=6))
def test_h_profile_is_monotone_and_convex(inst):
    prof = h_profile(inst)
    assert prof.non_increasing and prof.convex
    assert prof.values[inst.k] == brute_force(inst).value


@given(instances(max_suppliers=6))
def test_supermodular_exhaustive(inst):
    assert check_supermodular(inst) == (True, None)


def test_supermodular_sampled_on_larger_instance():
    inst = random_instance(random.Random(3), 9)
    ok, witness = check_supermodular(inst, trials=200, seed=1)
    assert ok and witness is None


def test_greedy_never_beats_optimum():
    rng = random.Random(11)
    for _ in range(100):
        inst = random_instance(rng, rng.randint(1, 6))
        assert greedy(inst).value >= brute_force(inst).value


def test_random_instance_is_reproducible():
    a = random_instance(random.Random(5), 6)
    b = random_instance(random.Random(5), 6)
    assert a == b
    assert len(a.customers) <= 6


def test_brute_force_exact_size_is_enough():
    # Fewer than k upgrades is never better because upgrades never hurt.
    rng = random.Random(2)
    for _ in range(50):
        inst = random_instance(rng, rng.randint(1, 5))
        ids = inst.supplier_ids
        at_most = min(
            cost(inst, c) for r in range(inst.k + 1) for c in itertools.combinations(ids, r)
        )
        assert brute_force(inst).value == at_most
