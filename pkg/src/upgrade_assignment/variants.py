"""Generalisations where the LP relaxation loses its integral optimum.

Three variants are covered: a non-complete supplier/customer graph, per-group
upgrade budgets, and upgrades that may also lower customer demands.  For
each there is a brute-force integral optimum and an exact evaluator for
fractional LP points, plus bundled fixtures on which the fractional point is
strictly cheaper than every integral solution.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .core import (
    Instance,
    InstanceError,
    cost,
    format_rational,
    instance_from_json,
    instance_to_json,
    optimal_assignment,
    parse_rational,
)
from .oracle import greedy

__all__ = [
    "CheckResult",
    "DualUpgradeSpec",
    "EdgeMask",
    "Fixture",
    "FractionalEntry",
    "FractionalSolution",
    "InfeasibleError",
    "PartitionBudget",
    "brute_force_dual",
    "brute_force_masked",
    "brute_force_partition",
    "builtin_fixtures",
    "dual_cost",
    "eval_fractional",
    "fixture_from_json",
    "fixture_to_json",
    "load_fixture_dir",
    "verify_fixture",
]


class InfeasibleError(ValueError):
    """A fractional point violates a constraint, or no feasible solution exists."""


@dataclass(frozen=True)
class EdgeMask:
    """Allowed ``(supplier id, customer id)`` pairs."""

    allowed: frozenset

    def __post_init__(self):
        object.__setattr__(self, "allowed", frozenset(tuple(map(str, p)) for p in self.allowed))
        if not self.allowed:
            raise InstanceError("edge mask is empty", "mask")

    def validate(self, instance: Instance) -> None:
        for s, c in self.allowed:
            instance.supplier_index(s)
            instance.customer_index(c)


@dataclass(frozen=True)
class PartitionBudget:
    """Supplier groups, each with its own upgrade budget."""

    groups: tuple  # of (frozenset of supplier ids, budget)

    def __post_init__(self):
        object.__setattr__(
            self, "groups", tuple((frozenset(map(str, g)), int(b)) for g, b in self.groups)
        )

    def validate(self, instance: Instance) -> None:
        seen: list[str] = []
        for members, budget in self.groups:
            if budget < 0:
                raise InstanceError(f"negative group budget {budget}", "groups")
            seen.extend(members)
        if sorted(seen) != sorted(instance.supplier_ids):
            raise InstanceError("groups must partition the suppliers", "groups")


@dataclass(frozen=True)
class DualUpgradeSpec:
    """Reduced demands for upgradable customers and a shared budget ``k``."""

    upgraded_demands: Mapping  # customer id -> Fraction
    k: int

    def validate(self, instance: Instance) -> None:
        for cid, d2 in self.upgraded_demands.items():
            d = instance.customers[instance.customer_index(cid)].demand
            if not 0 <= d2 <= d:
                raise InstanceError(
                    f"upgraded demand {d2} outside [0, {d}]", f"customer_upgrades.{cid}"
                )


@dataclass(frozen=True)
class FractionalEntry:
    supplier: str
    customer: str
    color: str  # "red" (supplier upgraded) or "blue"
    weight: Fraction
    customer_upgraded: bool = False


@dataclass(frozen=True)
class FractionalSolution:
    entries: tuple[FractionalEntry, ...]

    @classmethod
    def combine(cls, *parts: tuple[Fraction, Iterable[FractionalEntry]]) -> FractionalSolution:
        """Weighted sum of (usually integral) solutions, merging equal edges."""
        acc: dict = {}
        for w, entries in parts:
            for e in entries:
                key = (e.supplier, e.customer, e.color, e.customer_upgraded)
                acc[key] = acc.get(key, Fraction(0)) + Fraction(w) * e.weight
        return cls(tuple(FractionalEntry(s, c, col, wt, cu)
                         for (s, c, col, cu), wt in acc.items() if wt))

    @classmethod
    def integral(cls, assignment: Mapping, upgrades: Iterable,
                 customer_upgrades: Iterable = ()) -> FractionalSolution:
        upgrades, cu = set(upgrades), set(customer_upgrades)
        return cls(tuple(
            FractionalEntry(s, c, "red" if s in upgrades else "blue", Fraction(1), c in cu)
            for c, s in assignment.items()
        ))


def eval_fractional(
    instance: Instance,
    fs: FractionalSolution,
    *,
    mask: EdgeMask | None = None,
    partition: PartitionBudget | None = None,
    dual: DualUpgradeSpec | None = None,
) -> Fraction:
    """Exact LP objective of ``fs`` after checking every LP constraint.

    The upgrade budget is ``instance.k`` unless ``partition`` (per-group
    budgets) or ``dual`` (shared budget over suppliers and customers) says
    otherwise.  Raises :class:`InfeasibleError` naming the failed constraint.
    """
    by_customer = {c: Fraction(0) for c in instance.customer_ids}
    by_supplier = {s: Fraction(0) for s in instance.supplier_ids}
    red = {s: Fraction(0) for s in instance.supplier_ids}
    customer_red = Fraction(0)
    total = Fraction(0)
    for e in fs.entries:
        s = instance.suppliers[instance.supplier_index(e.supplier)]
        c = instance.customers[instance.customer_index(e.customer)]
        if not 0 <= e.weight <= 1:
            raise InfeasibleError(f"weight {e.weight} outside [0, 1] on ({s.id}, {c.id})")
        if e.color not in ("red", "blue"):
            raise InfeasibleError(f"unknown edge colour {e.color!r}")
        if mask is not None and e.weight and (s.id, c.id) not in mask.allowed:
            raise InfeasibleError(f"edge ({s.id}, {c.id}) is not in the mask")
        demand = c.demand
        if e.customer_upgraded:
            if dual is None or c.id not in dual.upgraded_demands:
                raise InfeasibleError(f"customer {c.id} cannot be upgraded")
            demand = dual.upgraded_demands[c.id]
            customer_red += e.weight
        unit = s.upgraded_cost if e.color == "red" else s.base_cost
        if e.color == "red":
            red[s.id] += e.weight
        by_customer[c.id] += e.weight
        by_supplier[s.id] += e.weight
        total += e.weight * unit * demand
    for cid, w in by_customer.items():
        if w != 1:
            raise InfeasibleError(f"customer {cid} is covered {w} times, not once")
    for sid, w in by_supplier.items():
        if w > 1 or (instance.is_square and w != 1):
            raise InfeasibleError(f"supplier {sid} is used {w} times")
    if partition is not None:
        for members, budget in partition.groups:
            used = sum((red[s] for s in members), Fraction(0))
            if used > budget:
                raise InfeasibleError(f"group {sorted(members)} upgrades {used} > {budget}")
    elif dual is not None:
        used = sum(red.values(), Fraction(0)) + customer_red
        if used > dual.k:
            raise InfeasibleError(f"{used} upgrades exceed the budget {dual.k}")
    else:
        used = sum(red.values(), Fraction(0))
        if used > instance.k:
            raise InfeasibleError(f"{used} upgrades exceed k = {instance.k}")
    return total


def brute_force_masked(instance: Instance, mask: EdgeMask, k: int | None = None) -> Fraction:
    """Cheapest injective assignment inside ``mask`` with at most ``k`` upgrades.

    Enumerates assignments; for a fixed assignment the best upgrades are the
    ``k`` largest savings ``(c_i - b_i) d_j``.
    """
    mask.validate(instance)
    k = instance.k if k is None else k
    sup, cus = instance.suppliers, instance.customers
    best = None
    for perm in itertools.permutations(range(len(sup)), len(cus)):
        if any((sup[i].id, cus[j].id) not in mask.allowed for j, i in enumerate(perm)):
            continue
        plain = sum((sup[i].base_cost * cus[j].demand for j, i in enumerate(perm)), Fraction(0))
        savings = sorted(
            ((sup[i].base_cost - sup[i].upgraded_cost) * cus[j].demand for j, i in enumerate(perm)),
            reverse=True,
        )
        value = plain - sum(savings[:k], Fraction(0))
        if best is None or value < best:
            best = value
    if best is None:
        raise InfeasibleError("no perfect assignment respects the edge mask")
    return best


def brute_force_partition(instance: Instance, pb: PartitionBudget) -> Fraction:
    """Cheapest cost over upgrade sets within every group budget."""
    pb.validate(instance)
    per_group = []
    for members, budget in pb.groups:
        ordered = sorted(members, key=instance.supplier_index)
        per_group.append([
            frozenset(c)
            for r in range(min(budget, len(ordered)) + 1)
            for c in itertools.combinations(ordered, r)
        ])
    return min(cost(instance, frozenset().union(*choice))
               for choice in itertools.product(*per_group))


def dual_cost(instance: Instance, spec: DualUpgradeSpec,
              suppliers: Iterable, customers: Iterable) -> Fraction:
    """Optimal assignment cost with the given suppliers and customers upgraded."""
    customers = set(map(str, customers))
    for cid in customers:
        if cid not in spec.upgraded_demands:
            raise InstanceError(f"customer {cid} has no upgraded demand")
    lowered = Instance(
        instance.suppliers,
        tuple(
            type(c)(c.id, spec.upgraded_demands[c.id] if c.id in customers else c.demand)
            for c in instance.customers
        ),
        instance.k,
    )
    return optimal_assignment(lowered, suppliers)[1]


def brute_force_dual(instance: Instance, spec: DualUpgradeSpec) -> Fraction:
    """Cheapest cost over supplier and customer upgrades with ``|S| + |T| <= k``."""
    spec.validate(instance)
    sids = instance.supplier_ids
    cids = [c for c in instance.customer_ids if c in spec.upgraded_demands]
    best = None
    for r in range(min(spec.k, len(sids)) + 1):
        for S in itertools.combinations(sids, r):
            for q in range(min(spec.k - r, len(cids)) + 1):
                for T in itertools.combinations(cids, q):
                    value = dual_cost(instance, spec, S, T)
                    if best is None or value < best:
                        best = value
    return best


# -- fixtures ---------------------------------------------------------------


@dataclass(frozen=True)
class Fixture:
    """An instance with optional variant constraints, an LP point and checks.

    ``checks`` is a list of dicts, each with ``label``, ``kind``, ``expected``
    and kind-specific keys:

    * ``integral`` - constrained integral optimum
    * ``fractional`` - objective of the bundled fractional point
    * ``greedy`` - value of the one-at-a-time greedy heuristic
    * ``cost`` - ``cost(upgrades)`` for a forced supplier set
    * ``dual_cost`` - dual-variant cost for forced ``suppliers``/``customers``
    * ``dual_optimum`` - dual-variant optimum for another budget ``k``
    """

    name: str
    instance: Instance
    fractional: FractionalSolution
    checks: tuple
    mask: EdgeMask | None = None
    partition: PartitionBudget | None = None
    dual: DualUpgradeSpec | None = None
    notes: str = ""

    def __post_init__(self):
        canonical = tuple(
            dict(c, expected=format_rational(parse_rational(c["expected"], "checks.expected")))
            for c in self.checks
        )
        object.__setattr__(self, "checks", canonical)

    def integral_optimum(self) -> Fraction:
        if self.mask is not None:
            return brute_force_masked(self.instance, self.mask)
        if self.partition is not None:
            return brute_force_partition(self.instance, self.partition)
        if self.dual is not None:
            return brute_force_dual(self.instance, self.dual)
        from .solver import solve

        return solve(self.instance)[0].value

    def fractional_value(self) -> Fraction:
        return eval_fractional(self.instance, self.fractional, mask=self.mask,
                               partition=self.partition, dual=self.dual)


@dataclass(frozen=True)
class CheckResult:
    fixture: str
    label: str
    expected: Fraction
    got: Fraction | None
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.got == self.expected


def _run_check(fx: Fixture, check: Mapping) -> Fraction:
    kind = check["kind"]
    if kind == "integral":
        return fx.integral_optimum()
    if kind == "fractional":
        return fx.fractional_value()
    if kind == "greedy":
        return greedy(fx.instance).value
    if kind == "cost":
        return cost(fx.instance, check["upgrades"])
    if kind == "dual_cost":
        return dual_cost(fx.instance, fx.dual, check["suppliers"], check["customers"])
    if kind == "dual_optimum":
        spec = DualUpgradeSpec(fx.dual.upgraded_demands, int(check["k"]))
        return brute_force_dual(fx.instance, spec)
    raise InstanceError(f"unknown check kind {kind!r}", "checks")


def verify_fixture(fx: Fixture) -> list[CheckResult]:
    results = []
    for check in fx.checks:
        expected = parse_rational(check["expected"])
        try:
            got, err = _run_check(fx, check), None
        except (InfeasibleError, InstanceError) as exc:
            got, err = None, str(exc)
        except KeyError as exc:
            got, err = None, f"check is missing field {exc}"
        results.append(CheckResult(fx.name, check["label"], expected, got, err))
    return results


def _edges(*rows) -> tuple[FractionalEntry, ...]:
    """Half-weight entries from ``(supplier, customer, colour[, customer_upgraded])``."""
    return tuple(FractionalEntry(*row[:3], Fraction(1, 2), *row[3:]) for row in rows)


def _sec2() -> Fixture:
    inst = Instance.build([(0, 1), (2, 3)], [1, 1], 1)
    fs = FractionalSolution(_edges(
        ("1", "2", "red"), ("2", "1", "red"), ("1", "1", "blue"), ("2", "2", "blue"),
    ))
    return Fixture("sec2", inst, fs, (
        {"label": "integral optimum", "kind": "integral", "expected": "3"},
        {"label": "fractional vertex value", "kind": "fractional", "expected": "3"},
    ), notes="fractional optimal vertex; an integral vertex ties it")


def _sec32() -> Fixture:
    inst = Instance.build([(0, 1), (1, 1), (1, 4)], [3, 2, 1], 1)
    # Half of the plain matching (cost 9) plus half of upgrading {1, 3}
    # (cost 3).
    empty, _ = optimal_assignment(inst, ())
    both, _ = optimal_assignment(inst, ("1", "3"))
    fs = FractionalSolution.combine(
        (Fraction(1, 2), FractionalSolution.integral(empty, ()).entries),
        (Fraction(1, 2), FractionalSolution.integral(both, ("1", "3")).entries),
    )
    return Fixture("sec32", inst, fs, (
        {"label": "integral optimum", "kind": "integral", "expected": "6"},
        {"label": "fractional vertex value", "kind": "fractional", "expected": "6"},
        {"label": "upgrade {1}", "kind": "cost", "upgrades": ["1"], "expected": "6"},
        {"label": "upgrade {3}", "kind": "cost", "upgrades": ["3"], "expected": "6"},
    ), notes="equal costs; fractional vertex ties the integral optimum")


def _noncomplete() -> Fixture:
    # b3 = c3 = 2: supplier 3 is never upgraded in the fractional point, and a
    # smaller b3 would push the integral optimum below 5.
    inst = Instance.build([(0, 1), (2, 5), (2, 2)], [3, 1, 0], 1)
    mask = EdgeMask(frozenset(
        (s, c) for s in "123" for c in "123" if (s, c) != ("3", "2")
    ))
    fs = FractionalSolution(_edges(
        ("1", "1", "red"), ("1", "2", "blue"), ("2", "2", "red"),
        ("2", "3", "blue"), ("3", "1", "blue"), ("3", "3", "blue"),
    ))
    return Fixture("noncomplete", inst, fs, (
        {"label": "integral optimum", "kind": "integral", "expected": "5"},
        {"label": "fractional value", "kind": "fractional", "expected": "9/2"},
    ), mask=mask, notes="missing edge (3, 2) forces an integrality gap of 1/2")


def _partition() -> Fixture:
    inst = Instance.build([("0.9", 2), (2, 5), (2, 3), (3, 5)], [4, 3, 2, 1], 2)
    pb = PartitionBudget(((("1", "2"), 1), (("3", "4"), 1)))
    fs = FractionalSolution(_edges(
        ("1", "1", "red"), ("1", "2", "blue"), ("2", "2", "red"), ("2", "4", "blue"),
        ("3", "1", "red"), ("3", "3", "blue"), ("4", "3", "red"), ("4", "4", "blue"),
    ))
    return Fixture("partition", inst, fs, (
        {"label": "integral optimum", "kind": "integral", "expected": "23"},
        {"label": "fractional value", "kind": "fractional", "expected": "22.8"},
        {"label": "upgrade {1,3}", "kind": "cost", "upgrades": ["1", "3"], "expected": "24.6"},
        {"label": "upgrade {1,4}", "kind": "cost", "upgrades": ["1", "4"], "expected": "23.6"},
        {"label": "upgrade {2,3}", "kind": "cost", "upgrades": ["2", "3"], "expected": "23"},
        {"label": "upgrade {2,4}", "kind": "cost", "upgrades": ["2", "4"], "expected": "23"},
    ), partition=pb, notes="one upgrade per group; the half/half point beats every integral choice")


def _dual() -> Fixture:
    inst = Instance.build([(7, 7), (2, 5), (1, 3)], [9, 15, 20], 2)
    spec = DualUpgradeSpec({"1": Fraction(4), "2": Fraction(15), "3": Fraction(8)}, 2)
    # Half of the k=1 optimum (customer 3 lowered) plus half of the k=3
    # optimum (suppliers 2, 3 and customer 1).
    fs = FractionalSolution(_edges(
        ("3", "2", "blue"), ("2", "1", "blue"), ("1", "3", "blue", True),
        ("3", "3", "red"), ("2", "2", "red"), ("1", "1", "blue", True),
    ))
    rows = [
        (["2", "3"], [], "113"), (["2"], ["1"], "113"), (["2"], ["3"], "113"),
        (["3"], ["1"], "123"), (["3"], ["3"], "116"), ([], ["1", "3"], "113"),
    ]
    checks = [
        {"label": "integral optimum", "kind": "integral", "expected": "113"},
        {"label": "fractional value", "kind": "fractional", "expected": "112"},
        {"label": "optimum for k=1", "kind": "dual_optimum", "k": 1, "expected": "146"},
        {"label": "optimum for k=3", "kind": "dual_optimum", "k": 3, "expected": "78"},
    ]
    for sups, custs, value in rows:
        checks.append({
            "label": f"suppliers {{{','.join(sups)}}} customers {{{','.join(custs)}}}",
            "kind": "dual_cost", "suppliers": sups, "customers": custs, "expected": value,
        })
    return Fixture("dual", inst, fs, tuple(checks), dual=spec,
                   notes="customer upgrades share the supplier budget; gap of 1")


def _greedy() -> Fixture:
    inst = Instance.build([(1, 5), (0, 3), (3, 10)], [1, 2, 3], 2)
    best, _ = optimal_assignment(inst, ("2", "3"))
    return Fixture("greedy", inst, FractionalSolution.integral(best, ("2", "3")), (
        {"label": "integral optimum", "kind": "integral", "expected": "11"},
        {"label": "greedy value", "kind": "greedy", "expected": "12"},
        {"label": "upgrade {1}", "kind": "cost", "upgrades": ["1"], "expected": "19"},
        {"label": "upgrade {2}", "kind": "cost", "upgrades": ["2"], "expected": "20"},
        {"label": "upgrade {3}", "kind": "cost", "upgrades": ["3"], "expected": "20"},
        {"label": "upgrade {2,3}", "kind": "cost", "upgrades": ["2", "3"], "expected": "11"},
        {"label": "upgrade {1,2}", "kind": "cost", "upgrades": ["1", "2"], "expected": "12"},
        {"label": "upgrade {1,3}", "kind": "cost", "upgrades": ["1", "3"], "expected": "12"},
    ), notes="best single upgrade is not part of the best pair")


def builtin_fixtures() -> list[Fixture]:
    return [_sec2(), _sec32(), _noncomplete(), _partition(), _dual(), _greedy()]


# -- JSON -------------------------------------------------------------------


def fixture_to_json(fx: Fixture) -> dict:
    data = {"name": fx.name, **instance_to_json(fx.instance)}
    if fx.mask is not None:
        data["mask"] = sorted(list(p) for p in fx.mask.allowed)
    if fx.partition is not None:
        data["groups"] = [
            {"suppliers": sorted(m, key=fx.instance.supplier_index), "budget": b}
            for m, b in fx.partition.groups
        ]
    if fx.dual is not None:
        data["customer_upgrades"] = {
            c: format_rational(d) for c, d in sorted(fx.dual.upgraded_demands.items())
        }
        data["upgrade_budget"] = fx.dual.k
    data["fractional"] = [
        {"supplier": e.supplier, "customer": e.customer, "color": e.color,
         "weight": format_rational(e.weight), **({"customer_upgraded": True} if e.customer_upgraded else {})}
        for e in fx.fractional.entries
    ]
    data["checks"] = [dict(c) for c in fx.checks]
    if fx.notes:
        data["notes"] = fx.notes
    return data


def fixture_from_json(data: Mapping) -> Fixture:
    instance = instance_from_json(data)
    mask = partition = dual = None
    if "mask" in data:
        mask = EdgeMask(frozenset(tuple(p) for p in data["mask"]))
        mask.validate(instance)
    if "groups" in data:
        partition = PartitionBudget(tuple((g["suppliers"], g["budget"]) for g in data["groups"]))
        partition.validate(instance)
    if "customer_upgrades" in data:
        dual = DualUpgradeSpec(
            {str(c): parse_rational(d, f"customer_upgrades.{c}")
             for c, d in data["customer_upgrades"].items()},
            int(data.get("upgrade_budget", instance.k)),
        )
        dual.validate(instance)
    entries = []
    for n, e in enumerate(data.get("fractional", [])):
        entries.append(FractionalEntry(
            str(e["supplier"]), str(e["customer"]), e["color"],
            parse_rational(e["weight"], f"fractional[{n}].weight"),
            bool(e.get("customer_upgraded", False)),
        ))
    checks = tuple(data.get("checks", ()))
    if not checks:
        raise InstanceError("fixture has no checks", "checks")
    return Fixture(str(data.get("name", "unnamed")), instance, FractionalSolution(tuple(entries)),
                   checks, mask, partition, dual, data.get("notes", ""))


def load_fixture_dir(path: str | Path) -> list[Fixture]:
    """Read every ``*.json`` fixture in ``path`` (sorted by file name)."""
    files = sorted(Path(path).glob("*.json"))
    if not files:
        raise InstanceError(f"no fixture files in {path}")
    out = []
    for f in files:
        try:
            data = json.loads(f.read_text(), parse_float=Fraction)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"invalid JSON at line {exc.lineno}: {exc.msg}", f.name) from None
        try:
            out.append(fixture_from_json(data))
        except InstanceError as exc:
            raise InstanceError(str(exc), f.name) from None
        except (KeyError, TypeError, AttributeError) as exc:
            raise InstanceError(f"malformed fixture ({exc!r})", f.name) from None
    return out
