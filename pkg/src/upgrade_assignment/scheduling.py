"""Total completion time on uniform machines with up to ``k`` job upgrades.

A job placed ``l`` positions from the end of machine ``i`` delays ``l`` jobs
(itself included) by its processing time over the machine speed, so it
contributes ``(l / s_i) * p_j``.  Jobs become suppliers with costs
``(q_j, p_j)`` and the ``n`` cheapest slots ``l / s_i`` become customers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .core import (
    Customer,
    Instance,
    InstanceError,
    Supplier,
    _field,
    format_rational,
    parse_rational,
)
from .oracle import CapExceeded
from .solver import solve

__all__ = [
    "Job",
    "Schedule",
    "SchedulingInstance",
    "brute_force_schedule",
    "reduce",
    "schedule_from_json",
    "schedule_to_json",
    "solve_schedule",
]

_MAX_BRUTE_JOBS = 6


@dataclass(frozen=True)
class Job:
    id: str
    p: Fraction
    q: Fraction

    def __post_init__(self):
        if not 0 <= self.q <= self.p:
            raise InstanceError(f"need 0 <= q <= p, got q={self.q}, p={self.p}", f"job {self.id}")


@dataclass(frozen=True)
class SchedulingInstance:
    machines: tuple[Fraction, ...]  # speeds
    jobs: tuple[Job, ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "machines", tuple(self.machines))
        object.__setattr__(self, "jobs", tuple(self.jobs))
        if not self.machines:
            raise InstanceError("need at least one machine", "machines")
        if any(s <= 0 for s in self.machines):
            raise InstanceError("machine speeds must be positive", "machines")
        if not self.jobs:
            raise InstanceError("need at least one job", "jobs")
        if len({j.id for j in self.jobs}) != len(self.jobs):
            raise InstanceError("duplicate job id", "jobs")
        if isinstance(self.k, bool) or not isinstance(self.k, int):
            raise InstanceError(f"k must be an integer, got {self.k!r}", "k")
        if not 0 <= self.k <= len(self.jobs):
            raise InstanceError(f"k={self.k} outside 0..{len(self.jobs)}", "k")

    @classmethod
    def build(cls, speeds, times, k: int) -> SchedulingInstance:
        """Jobs ``j1, j2, ...`` from ``(p, q)`` pairs."""
        jobs = tuple(Job(f"j{n}", parse_rational(p), parse_rational(q))
                     for n, (p, q) in enumerate(times, 1))
        return cls(tuple(parse_rational(s) for s in speeds), jobs, k)


@dataclass(frozen=True)
class Schedule:
    orders: tuple[tuple[str, ...], ...]  # per machine, in processing order
    upgraded: frozenset
    total_completion: Fraction
    average_completion: Fraction

    def to_json(self) -> dict:
        return {
            "machines": [list(o) for o in self.orders],
            "upgraded": sorted(self.upgraded),
            "total_completion": format_rational(self.total_completion),
            "average_completion": format_rational(self.average_completion),
        }


def reduce(s: SchedulingInstance) -> tuple[Instance, dict]:
    """Assignment instance plus the slot map ``customer id -> (machine, l)``.

    Keeps the ``n`` cheapest of the ``m * n`` slots; ties go to the lower
    machine index, then the lower position.  Within one machine the cost
    strictly grows with ``l`` so the kept slots are prefixes.
    """
    n = len(s.jobs)
    slots = sorted(
        ((Fraction(l) / speed, i, l) for i, speed in enumerate(s.machines) for l in range(1, n + 1)),
    )[:n]
    customers = []
    slot_map = {}
    for coef, i, l in slots:
        cid = f"m{i}:{l}"
        customers.append(Customer(cid, coef))
        slot_map[cid] = (i, l)
    suppliers = tuple(Supplier(j.id, j.p, j.q) for j in s.jobs)
    return Instance(suppliers, tuple(customers), s.k), slot_map


def _completion_total(orders, times: Mapping, speeds) -> Fraction:
    total = Fraction(0)
    for order, speed in zip(orders, speeds):
        clock = Fraction(0)
        for job in order:
            clock += times[job] / speed
            total += clock
    return total


def solve_schedule(s: SchedulingInstance) -> Schedule:
    instance, slot_map = reduce(s)
    solution, _ = solve(instance)
    per_machine: dict[int, dict[int, str]] = {i: {} for i in range(len(s.machines))}
    for cid, job in solution.assignment.items():
        i, l = slot_map[cid]
        per_machine[i][l] = job
    orders = []
    for i in range(len(s.machines)):
        slots = per_machine[i]
        if sorted(slots) != list(range(1, len(slots) + 1)):
            raise AssertionError(f"machine {i} uses non-contiguous slots {sorted(slots)}")
        # Slot 1 runs last.
        orders.append(tuple(slots[l] for l in sorted(slots, reverse=True)))
    times = {j.id: j.q if j.id in solution.upgrades else j.p for j in s.jobs}
    total = _completion_total(orders, times, s.machines)
    if total != solution.value:
        raise AssertionError(f"schedule total {total} != assignment value {solution.value}")
    return Schedule(tuple(orders), solution.upgrades, total, total / len(s.jobs))


def brute_force_schedule(s: SchedulingInstance) -> Fraction:
    """Exhaustive minimum total completion time (at most six jobs).

    Tries every upgrade set of size at most ``k``, every job-to-machine map and
    every processing order on every machine.
    """
    n = len(s.jobs)
    if n > _MAX_BRUTE_JOBS:
        raise CapExceeded(f"{n} jobs exceeds the brute-force cap of {_MAX_BRUTE_JOBS}")
    m = len(s.machines)
    best = None
    for r in range(s.k + 1):
        for up in itertools.combinations(range(n), r):
            times = [j.q if idx in up else j.p for idx, j in enumerate(s.jobs)]
            # Cheapest ordering of every job subset at unit speed; a machine
            # of speed s scales every completion time by 1/s.
            table = [Fraction(0)] * (1 << n)
            for mask in range(1, 1 << n):
                members = [x for x in range(n) if mask >> x & 1]
                cheapest = None
                for perm in itertools.permutations(members):
                    clock = total = Fraction(0)
                    for x in perm:
                        clock += times[x]
                        total += clock
                    if cheapest is None or total < cheapest:
                        cheapest = total
                table[mask] = cheapest
            for placement in itertools.product(range(m), repeat=n):
                masks = [0] * m
                for x, i in enumerate(placement):
                    masks[i] |= 1 << x
                value = sum(table[masks[i]] / s.machines[i] for i in range(m))
                if best is None or value < best:
                    best = value
    return best


def schedule_from_json(data: Mapping) -> SchedulingInstance:
    """Parse ``{"machines": [{"speed": ..}], "jobs": [{"p": .., "q": ..}], "k": ..}``.

    ``q`` defaults to ``p`` (no benefit from upgrading) and job ids default
    to ``j1, j2, ...``.
    """
    speeds = tuple(
        parse_rational(_field(m, "speed", f"machines[{n}]"), f"machines[{n}].speed")
        for n, m in enumerate(_field(data, "machines", "schedule"))
    )
    jobs = []
    for n, raw in enumerate(_field(data, "jobs", "schedule")):
        where = f"jobs[{n}]"
        p = parse_rational(_field(raw, "p", where), f"{where}.p")
        q = parse_rational(raw["q"], f"{where}.q") if "q" in raw else p
        jobs.append(Job(str(raw.get("id", f"j{n + 1}")), p, q))
    return SchedulingInstance(speeds, tuple(jobs), _field(data, "k", "schedule"))


def schedule_to_json(s: SchedulingInstance) -> dict:
    return {
        "machines": [{"speed": format_rational(v)} for v in s.machines],
        "jobs": [{"id": j.id, "p": format_rational(j.p), "q": format_rational(j.q)} for j in s.jobs],
        "k": s.k,
    }
