"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 verification mismatch, 3 size cap.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .core import InstanceError, Solution, format_rational, instance_from_json
from .oracle import DEFAULT_CAP, CapExceeded, brute_force, greedy, h_profile, random_instance
from .scheduling import brute_force_schedule, schedule_from_json, solve_schedule
from .solver import InvariantViolation, solve
from .variants import builtin_fixtures, load_fixture_dir, verify_fixture

EXIT_OK, EXIT_INPUT, EXIT_MISMATCH, EXIT_CAP = 0, 1, 2, 3


class Mismatch(Exception):
    """Carries a finished report whose verification failed."""

    def __init__(self, report: RunReport):
        super().__init__("verification mismatch")
        self.report = report


@dataclass
class RunReport:
    command: list[str]
    input_digest: str
    result: Any
    trace: Any = None
    duration_s: float = 0.0

    def to_json(self) -> dict:
        out = {"command": self.command, "input_sha256": self.input_digest, "result": self.result}
        if self.trace is not None:
            out["trace"] = self.trace
        out["duration_s"] = round(self.duration_s, 6)
        return out


def value(x: Fraction) -> dict:
    """Exact rational plus a 6-place decimal rendering (rounded, approximate)."""
    scaled = round(abs(x) * 10**6)
    sign = "-" if x < 0 and scaled else ""
    return {"exact": format_rational(x), "approx": f"{sign}{scaled // 10**6}.{scaled % 10**6:06d}"}


def _read_json(path: str) -> tuple[Any, str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InstanceError(f"cannot read file: {exc.strerror}", path) from None
    try:
        data = json.loads(raw, parse_float=Fraction)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        where = f"line {exc.lineno} column {exc.colno}: {exc.msg}" if isinstance(exc, json.JSONDecodeError) else str(exc)
        raise InstanceError(f"invalid JSON at {where}", path) from None
    return data, hashlib.sha256(raw).hexdigest()


def _parse(parser, data, path: str):
    try:
        return parser(data)
    except (KeyError, TypeError, AttributeError) as exc:
        raise InstanceError(f"malformed input ({exc!r})", path) from None


def _load_instance(path: str):
    data, digest = _read_json(path)
    return _parse(instance_from_json, data, path), digest


def _solution_json(sol: Solution) -> dict:
    return {**sol.to_json(), "value": value(sol.value)}


def cmd_solve(args) -> RunReport:
    instance, digest = _load_instance(args.path)
    sol, trace = solve(instance)
    result = _solution_json(sol)
    report = RunReport(args.argv, digest, result, trace.to_json() if args.trace else None)
    if args.verify:
        if len(instance.suppliers) > args.cap:
            result["verified"] = None
            result["verify_skipped"] = f"{len(instance.suppliers)} suppliers exceeds cap {args.cap}"
        else:
            oracle = brute_force(instance, args.cap)
            result["oracle_value"] = value(oracle.value)
            result["verified"] = oracle.value == sol.value
            if not result["verified"]:
                raise Mismatch(report)
    return report


def cmd_oracle(args) -> RunReport:
    instance, digest = _load_instance(args.path)
    return RunReport(args.argv, digest, _solution_json(brute_force(instance, args.cap)))


def cmd_hprofile(args) -> RunReport:
    instance, digest = _load_instance(args.path)
    prof = h_profile(instance, args.cap)
    result = {
        "values": [value(v) for v in prof.values],
        "non_increasing": prof.non_increasing,
        "convex": prof.convex,
    }
    report = RunReport(args.argv, digest, result)
    if not (prof.non_increasing and prof.convex):
        raise Mismatch(report)
    return report


def cmd_greedy(args) -> RunReport:
    instance, digest = _load_instance(args.path)
    g = greedy(instance)
    result = _solution_json(g)
    if len(instance.suppliers) <= args.cap:
        best = brute_force(instance, args.cap).value
        result["oracle_value"] = value(best)
        result["suboptimal"] = g.value > best
    return RunReport(args.argv, digest, result)


def cmd_schedule(args) -> RunReport:
    data, digest = _read_json(args.path)
    s = _parse(schedule_from_json, data, args.path)
    sched = solve_schedule(s)
    result = {
        **sched.to_json(),
        "total_completion": value(sched.total_completion),
        "average_completion": value(sched.average_completion),
    }
    report = RunReport(args.argv, digest, result)
    if args.verify:
        best = brute_force_schedule(s)
        result["oracle_total"] = value(best)
        result["verified"] = best == sched.total_completion
        if not result["verified"]:
            raise Mismatch(report)
    return report


def cmd_verify_fixtures(args) -> RunReport:
    if args.fixtures_dir:
        fixtures = load_fixture_dir(args.fixtures_dir)
        digest = hashlib.sha256()
        for f in sorted(Path(args.fixtures_dir).glob("*.json")):
            digest.update(f.read_bytes())
        digest = digest.hexdigest()
    else:
        fixtures = builtin_fixtures()
        digest = hashlib.sha256(b"builtin").hexdigest()
    rows = []
    for fx in fixtures:
        for r in verify_fixture(fx):
            rows.append({
                "fixture": r.fixture,
                "check": r.label,
                "expected": format_rational(r.expected),
                "got": None if r.got is None else format_rational(r.got),
                "passed": r.passed,
                **({"error": r.error} if r.error else {}),
            })
    report = RunReport(args.argv, digest, {"checks": rows, "all_passed": all(r["passed"] for r in rows)})
    if not report.result["all_passed"]:
        raise Mismatch(report)
    return report


def _sweep_one(seed: int, index: int, max_suppliers: int) -> dict:
    rng = random.Random(f"{seed}:{index}")
    n = rng.randint(1, max_suppliers)
    base = random_instance(rng, n, k=0)
    out = {"index": index, "suppliers": n, "customers": len(base.customers), "mismatches": []}
    for k in range(n + 1):
        inst = base.with_k(k)
        try:
            got = solve(inst)[0].value
        except InvariantViolation as exc:
            out["mismatches"].append({"k": k, "error": str(exc)})
            continue
        want = brute_force(inst).value
        if got != want:
            out["mismatches"].append({"k": k, "solve": format_rational(got), "oracle": format_rational(want)})
    return out


def cmd_sweep(args) -> RunReport:
    if not 1 <= args.max_suppliers <= args.cap:
        raise InstanceError(f"must be between 1 and the cap {args.cap}", "--max-suppliers")
    jobs = range(args.count)
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        rows = list(pool.map(lambda i: _sweep_one(args.seed, i, args.max_suppliers), jobs))
    rows.sort(key=lambda r: r["index"])
    bad = [r for r in rows if r["mismatches"]]
    digest = hashlib.sha256(f"{args.seed}:{args.count}:{args.max_suppliers}".encode()).hexdigest()
    result = {
        "seed": args.seed,
        "instances": len(rows),
        "cases": sum(r["suppliers"] + 1 for r in rows),
        "failures": bad,
        "all_passed": not bad,
    }
    report = RunReport(args.argv, digest, result)
    if bad:
        raise Mismatch(report)
    return report


def _text(report: RunReport) -> str:
    lines = [f"command: {' '.join(report.command)}", f"input sha256: {report.input_digest}"]

    def walk(obj, prefix=""):
        if isinstance(obj, dict) and set(obj) == {"exact", "approx"}:
            lines.append(f"{prefix}: {obj['exact']} (~{obj['approx']})")
        elif isinstance(obj, dict):
            for key, val in obj.items():
                walk(val, f"{prefix}.{key}" if prefix else key)
        elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
            for n, val in enumerate(obj):
                walk(val, f"{prefix}[{n}]")
        else:
            lines.append(f"{prefix}: {json.dumps(obj)}")

    walk(report.result)
    if report.trace is not None:
        walk(report.trace, "trace")
    lines.append(f"duration: {report.duration_s:.3f}s")
    return "\n".join(lines)


def _common(defaults: bool) -> argparse.ArgumentParser:
    # Subcommands get suppressed defaults so they never overwrite a global
    # flag given before the command name.
    def d(x):
        return x if defaults else argparse.SUPPRESS

    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--trace", action="store_true", default=d(False), help="include the solver trace")
    p.add_argument("--verify", action="store_true", default=d(False),
                   help="cross-check against brute force")
    p.add_argument("--cap", type=int, default=d(DEFAULT_CAP), help="brute-force supplier cap")
    p.add_argument("--seed", type=int, default=d(0), help="seed for generated instances")
    p.add_argument("--format", choices=("json", "text"), default=d("json"))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="upgrade-assign",
        description="Exact solver for the multiplicative assignment problem with upgrades.",
        parents=[_common(True)],
    )
    common = _common(False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in [
        ("solve", cmd_solve, "optimal upgrade set and assignment"),
        ("oracle", cmd_oracle, "exhaustive optimum"),
        ("hprofile", cmd_hprofile, "optimum for every number of upgrades"),
        ("greedy", cmd_greedy, "one-upgrade-at-a-time heuristic"),
        ("schedule", cmd_schedule, "uniform-machine scheduling with job upgrades"),
    ]:
        p = sub.add_parser(name, help=help_, parents=[common])
        p.add_argument("path")
        p.set_defaults(func=fn)
    p = sub.add_parser("verify-fixtures", help="check the bundled fixtures", parents=[common])
    p.add_argument("--fixtures-dir", help="load fixtures from this directory instead")
    p.set_defaults(func=cmd_verify_fixtures)
    p = sub.add_parser("sweep", help="random solver/oracle comparison", parents=[common])
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-suppliers", type=int, default=7)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    start = time.perf_counter()
    code = EXIT_OK
    try:
        report = args.func(args)
    except Mismatch as exc:
        report, code = exc.report, EXIT_MISMATCH
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report.duration_s = time.perf_counter() - start
    if args.format == "text":
        print(_text(report))
    else:
        print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    if code == EXIT_MISMATCH:
        print("error: verification mismatch", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
