"""Instance model and the fixed-upgrade-set optimal assignment.

Every number in this package is a :class:`fractions.Fraction`.  Nothing is
ever rounded; comparisons of objective values are exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping

__all__ = [
    "DUMMY_MARKER",
    "Assignment",
    "Customer",
    "Instance",
    "InstanceError",
    "Solution",
    "Supplier",
    "UpgradeSet",
    "cost",
    "effective_costs",
    "evaluate",
    "format_rational",
    "instance_from_json",
    "instance_to_json",
    "normalize",
    "optimal_assignment",
    "parse_rational",
]

Rational = Fraction
UpgradeSet = frozenset  # frozenset[str] of supplier ids
Assignment = Mapping  # customer id -> supplier id

DUMMY_MARKER = "~dummy"

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_RATIO = re.compile(r"^[+-]?\d+\s*/\s*\d+$")


class InstanceError(ValueError):
    """Raised for malformed instances, unknown ids or invalid assignments.

    ``field`` names the offending location, e.g. ``suppliers[2].base_cost``.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


def parse_rational(value: Any, field: str | None = None) -> Fraction:
    """Convert an int, Fraction, decimal string or ``"p/q"`` string exactly.

    Floats are rejected because they cannot be converted without guessing
    the intended decimal.
    """
    if isinstance(value, bool):
        raise InstanceError(f"expected a number, got {value!r}", field)
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if _DECIMAL.match(text) or _RATIO.match(text):
            try:
                return Fraction(text.replace(" ", ""))
            except ZeroDivisionError:
                raise InstanceError(f"zero denominator in {value!r}", field) from None
        raise InstanceError(f"not a rational number: {value!r}", field)
    if isinstance(value, float):
        raise InstanceError(
            f"float {value!r} is not exact; pass a decimal string instead", field
        )
    raise InstanceError(f"expected a number, got {type(value).__name__}", field)


def format_rational(x: Fraction) -> str:
    """``"3"`` for integers, ``"9/2"`` otherwise."""
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Supplier:
    id: str
    base_cost: Fraction
    upgraded_cost: Fraction

    def __post_init__(self):
        if not 0 <= self.upgraded_cost <= self.base_cost:
            raise InstanceError(
                f"need 0 <= upgraded_cost <= base_cost, got "
                f"{self.upgraded_cost} and {self.base_cost}",
                f"supplier {self.id}",
            )


@dataclass(frozen=True)
class Customer:
    id: str
    demand: Fraction

    def __post_init__(self):
        if self.demand < 0:
            raise InstanceError(f"negative demand {self.demand}", f"customer {self.id}")


@dataclass(frozen=True)
class Instance:
    suppliers: tuple[Supplier, ...]
    customers: tuple[Customer, ...]
    k: int
    _supplier_index: dict = field(init=False, repr=False, compare=False)
    _customer_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "suppliers", tuple(self.suppliers))
        object.__setattr__(self, "customers", tuple(self.customers))
        sidx = {s.id: i for i, s in enumerate(self.suppliers)}
        cidx = {c.id: j for j, c in enumerate(self.customers)}
        if len(sidx) != len(self.suppliers):
            raise InstanceError("duplicate supplier id", "suppliers")
        if len(cidx) != len(self.customers):
            raise InstanceError("duplicate customer id", "customers")
        if len(self.suppliers) < len(self.customers):
            raise InstanceError(
                f"{len(self.customers)} customers but only "
                f"{len(self.suppliers)} suppliers",
                "customers",
            )
        if isinstance(self.k, bool) or not isinstance(self.k, int):
            raise InstanceError(f"k must be an integer, got {self.k!r}", "k")
        if not 0 <= self.k <= len(self.suppliers):
            raise InstanceError(f"k={self.k} outside 0..{len(self.suppliers)}", "k")
        object.__setattr__(self, "_supplier_index", sidx)
        object.__setattr__(self, "_customer_index", cidx)

    @classmethod
    def build(cls, costs: Iterable, demands: Iterable, k: int) -> Instance:
        """Instance with ids ``"1"``, ``"2"``, ... from ``(b, c)`` pairs."""
        suppliers = [
            Supplier(str(i), parse_rational(c), parse_rational(b))
            for i, (b, c) in enumerate(costs, 1)
        ]
        customers = [Customer(str(j), parse_rational(d)) for j, d in enumerate(demands, 1)]
        return cls(tuple(suppliers), tuple(customers), k)

    @property
    def supplier_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.suppliers)

    @property
    def customer_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.customers)

    def supplier_index(self, sid: str) -> int:
        try:
            return self._supplier_index[sid]
        except KeyError:
            raise InstanceError(f"unknown supplier id {sid!r}") from None

    def customer_index(self, cid: str) -> int:
        try:
            return self._customer_index[cid]
        except KeyError:
            raise InstanceError(f"unknown customer id {cid!r}") from None

    def upgrade_set(self, ids: Iterable) -> frozenset:
        """Validate ``ids`` as supplier ids and return them as a frozenset."""
        members = frozenset(str(i) for i in ids)
        for sid in members:
            self.supplier_index(sid)
        return members

    def with_k(self, k: int) -> Instance:
        return Instance(self.suppliers, self.customers, k)

    @property
    def is_square(self) -> bool:
        return len(self.suppliers) == len(self.customers)


@dataclass(frozen=True)
class Solution:
    upgrades: frozenset
    assignment: Mapping
    value: Fraction

    def to_json(self) -> dict:
        return {
            "upgrades": sorted(self.upgrades),
            "assignment": dict(sorted(self.assignment.items())),
            "value": format_rational(self.value),
        }


def normalize(instance: Instance) -> Instance:
    """Pad with zero-demand customers until there are as many as suppliers."""
    missing = len(instance.suppliers) - len(instance.customers)
    if missing == 0:
        return instance
    taken = set(instance.customer_ids)
    extra = []
    n = 0
    while len(extra) < missing:
        cid = f"{n}{DUMMY_MARKER}"
        n += 1
        if cid not in taken:
            extra.append(Customer(cid, Fraction(0)))
    return Instance(instance.suppliers, instance.customers + tuple(extra), instance.k)


def effective_costs(instance: Instance, X: Iterable) -> dict[str, Fraction]:
    """Upgraded cost for members of ``X``, base cost for everyone else."""
    X = instance.upgrade_set(X)
    return {
        s.id: s.upgraded_cost if s.id in X else s.base_cost for s in instance.suppliers
    }


def _sorted_pairing(instance: Instance, X: frozenset) -> list[tuple[int, int]]:
    eff = [s.upgraded_cost if s.id in X else s.base_cost for s in instance.suppliers]
    by_cost = sorted(range(len(eff)), key=lambda i: (eff[i], i))
    demands = [c.demand for c in instance.customers]
    by_demand = sorted(range(len(demands)), key=lambda j: (-demands[j], j))
    return list(zip(by_demand, by_cost))


def optimal_assignment(instance: Instance, X: Iterable) -> tuple[dict, Fraction]:
    """Cheapest assignment when exactly the suppliers in ``X`` are upgraded.

    The j-th largest demand is served by the j-th cheapest effective cost.
    Ties go to the lower list index on both sides.  ``X`` may be larger
    than ``instance.k``.
    """
    X = instance.upgrade_set(X)
    assignment = {}
    total = Fraction(0)
    for j, i in _sorted_pairing(instance, X):
        s = instance.suppliers[i]
        c = instance.customers[j]
        assignment[c.id] = s.id
        total += (s.upgraded_cost if s.id in X else s.base_cost) * c.demand
    return assignment, total


def cost(instance: Instance, X: Iterable) -> Fraction:
    return optimal_assignment(instance, X)[1]


def evaluate(instance: Instance, X: Iterable, assignment: Mapping) -> Fraction:
    """Objective value of ``assignment`` with the suppliers in ``X`` upgraded."""
    X = instance.upgrade_set(X)
    if set(assignment) != set(instance.customer_ids):
        missing = set(instance.customer_ids) - set(assignment)
        if missing:
            raise InstanceError(f"assignment misses customers {sorted(missing)}")
        raise InstanceError(
            f"unknown customers {sorted(set(assignment) - set(instance.customer_ids))}"
        )
    used = list(assignment.values())
    if len(set(used)) != len(used):
        raise InstanceError("assignment is not injective")
    total = Fraction(0)
    for cid, sid in assignment.items():
        s = instance.suppliers[instance.supplier_index(sid)]
        d = instance.customers[instance.customer_index(cid)].demand
        total += (s.upgraded_cost if sid in X else s.base_cost) * d
    return total


def _field(obj: Mapping, key: str, where: str) -> Any:
    if not isinstance(obj, Mapping):
        raise InstanceError("expected an object", where)
    if key not in obj:
        raise InstanceError(f"missing field {key!r}", where)
    return obj[key]


def instance_from_json(data: Mapping) -> Instance:
    """Build an :class:`Instance` from the JSON object layout.

    Numeric fields may be integers, decimal strings (``"0.9"``) or
    ratios (``"9/10"``).  Floats produced by ``json.loads(parse_float=...)``
    should already be Fractions.
    """
    suppliers = []
    for n, raw in enumerate(_field(data, "suppliers", "instance")):
        where = f"suppliers[{n}]"
        suppliers.append(
            Supplier(
                str(_field(raw, "id", where)),
                parse_rational(_field(raw, "base_cost", where), f"{where}.base_cost"),
                parse_rational(
                    _field(raw, "upgraded_cost", where), f"{where}.upgraded_cost"
                ),
            )
        )
    customers = []
    for n, raw in enumerate(_field(data, "customers", "instance")):
        where = f"customers[{n}]"
        customers.append(
            Customer(
                str(_field(raw, "id", where)),
                parse_rational(_field(raw, "demand", where), f"{where}.demand"),
            )
        )
    return Instance(tuple(suppliers), tuple(customers), _field(data, "k", "instance"))


def instance_to_json(instance: Instance) -> dict:
    return {
        "suppliers": [
            {
                "id": s.id,
                "base_cost": format_rational(s.base_cost),
                "upgraded_cost": format_rational(s.upgraded_cost),
            }
            for s in instance.suppliers
        ],
        "customers": [
            {"id": c.id, "demand": format_rational(c.demand)} for c in instance.customers
        ],
        "k": instance.k,
    }
