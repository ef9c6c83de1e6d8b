"""``arbor`` command line: generate, solve, oracle, compare, adversary, validate, render.

Exit codes: 0 success, 1 usage, 2 validation or input failure, 3 internal
invariant breach.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .checks import Report
from .generate import GENERATORS, generate, instance_seeds
from .grid import GridSolution, InstanceError, InvariantError, RequestSeq, is_feasible
from .online import run_online, validate_online
from .oracle import AREA_CAP, KMAX, opt_dmcd, opt_rsa
from .plane import Segment, fmt, parse_points
from .render import render_grid, render_segments
from .rsa import monotone_reachable, run_onrsa, validate_rsa
from .square import run_square, validate_trace

log = logging.getLogger("arbor")

CSV_SCHEMA = "# arbor-results schema=1"
CSV_FIELDS = ["instance_id", "n", "N", "algorithm", "cost", "opt_cost", "ratio", "delta",
              "runtime_ms"]

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def load_instance(path):
    """Parsed DMCD ``RequestSeq`` or list of RSA points, by document shape."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"{path}: {exc}") from exc
    if isinstance(data, dict) and "points" in data:
        return parse_points(data)
    return RequestSeq.from_json(data)


def _is_rsa(inst) -> bool:
    return isinstance(inst, list)


# ---------------------------------------------------------------------------
# Algorithm dispatch
# ---------------------------------------------------------------------------

def solve_instance(inst, alg: str):
    """``(cost, solution_doc, trace_doc, report, delta)`` for one algorithm."""
    if _is_rsa(inst):
        if alg != "rsa":
            raise UsageError(f"RSA instances take --alg rsa, not {alg}")
        sol = run_onrsa(inst)
        rep = validate_rsa(sol)
        trace = {"subinstances": [s.to_json() for s in sol.subinstances],
                 "events": [[e.point, fmt(e.event_y)] for e in sol.emitted],
                 "checks": rep.summary()}
        return sol.cost, sol.to_json(), trace, rep, None
    if alg == "square":
        tr = run_square(inst)
        rep = validate_trace(tr)
        trace = tr.to_json()
        trace["checks"] = rep.summary()
        return tr.cost, tr.solution.to_json(), trace, rep, None
    if alg == "online":
        on = run_online(inst)
        rep = validate_online(on, run_square(inst))
        trace = {"delta": on.delta,
                 "deliveries": [[d.index, d.u_sq, d.radius, d.u_on] for d in on.deliveries],
                 "commits": on.commit_log(),
                 "checks": rep.summary()}
        return on.cost, on.to_json(), trace, rep, on.delta
    raise UsageError(f"algorithm {alg!r} does not apply to DMCD instances")


def oracle_cost(inst, kmax: int, area_cap: int):
    """Exact optimum, or None when the instance exceeds the caps."""
    try:
        if _is_rsa(inst):
            return opt_rsa(inst, kmax=kmax).cost
        return opt_dmcd(inst, kmax=kmax, area_cap=area_cap).cost
    except InstanceError as exc:
        log.info("oracle skipped: %s", exc)
        return None


def _num(x) -> str:
    return fmt(x) if isinstance(x, Fraction) else str(x)


def compare_one(job):
    path, algs, kmax, area_cap, timing = job
    inst = load_instance(path)
    opt = oracle_cost(inst, kmax, area_cap)
    rows, ok = [], True
    for alg in algs:
        if _is_rsa(inst) != (alg == "rsa"):
            continue
        t0 = time.perf_counter()
        cost, _, _, rep, delta = solve_instance(inst, alg)
        ms = (time.perf_counter() - t0) * 1000
        ok = ok and rep.ok
        for name, detail in rep.failures[:5]:
            log.warning("%s %s: %s %s", Path(path).name, alg, name, detail)
        ratio = ""
        if opt is not None:
            ratio = "1.000000" if opt == 0 and cost == 0 else (
                f"{float(Fraction(cost) / Fraction(opt)):.6f}" if opt else "")
        rows.append({
            "instance_id": Path(path).stem,
            "n": "" if _is_rsa(inst) else inst.n,
            "N": len(inst),
            "algorithm": alg,
            "cost": _num(cost),
            "opt_cost": "" if opt is None else _num(opt),
            "ratio": ratio,
            "delta": "" if delta is None else delta,
            "runtime_ms": f"{ms:.1f}" if timing else "",
        })
    return rows, ok


def compare_dir(directory, algs, kmax=KMAX, area_cap=AREA_CAP, jobs=1, timing=False):
    files = sorted(Path(directory).glob("*.json"))
    work = [(str(f), algs, kmax, area_cap, timing) for f in files]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(compare_one, work))
    else:
        results = [compare_one(w) for w in work]
    rows = [r for rs, _ in results for r in rs]
    return rows, all(ok for _, ok in results)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_SCHEMA + "\n")
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    out = Path(args.out or ".")
    seeds = instance_seeds(args.seed, args.count)
    for k, s in enumerate(seeds):
        doc = generate(args.gen, args.n, args.N, s)
        path = out / f"{args.gen}-n{args.n}-N{args.N}-s{args.seed}-{k:03d}.json"
        _write(path, _dumps(doc))
        print(path)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    alg = args.alg or ("rsa" if _is_rsa(inst) else "square")
    cost, sol, trace, rep, delta = solve_instance(inst, alg)
    stem = Path(args.instance).stem
    out = Path(args.out) if args.out else None
    if out is not None:
        _write(out / f"{stem}.{alg}.solution.json", _dumps(sol))
        _write(out / f"{stem}.{alg}.trace.json", _dumps(trace))
    extra = f" delta={delta}" if delta is not None else ""
    print(f"{stem} alg={alg} cost={_num(cost)}{extra} checks={'ok' if rep.ok else 'FAILED'}")
    if out is None:
        sys.stdout.write(_dumps(sol))
    for name, detail in rep.failures[:10]:
        print(f"  failed {name}: {detail}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    if _is_rsa(inst):
        res = opt_rsa(inst, kmax=args.kmax)
        doc = {"cost": fmt(res.cost), "segments": [s.to_json() for s in res.segments]}
    else:
        res = opt_dmcd(inst, kmax=args.kmax, area_cap=args.area_cap)
        doc = {"cost": res.cost, "solution": res.solution.to_json()}
    print(f"{Path(args.instance).stem} opt={doc['cost']}")
    if args.out:
        _write(args.out, _dumps(doc))
    return EXIT_OK


def cmd_compare(args) -> int:
    algs = [a.strip() for a in args.alg.split(",") if a.strip()]
    rows, ok = compare_dir(args.dir, algs, args.kmax, args.area_cap, args.jobs, args.timing)
    text = rows_to_csv(rows)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_INVALID


def cmd_adversary(args) -> int:
    from .adversary import run_adversary
    runs = [run_adversary(n, args.alg) for n in args.n]
    fields = ["n", "alg", "alg_cost", "adv_cost", "ratio", "probe_count"]
    buf = io.StringIO()
    buf.write("# arbor-adversary schema=1\n")
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in runs:
        w.writerow(r.csv_row())
    if args.out:
        out = Path(args.out)
        for r in runs:
            _write(out / f"adversary-{args.alg}-n{r.n}.json", _dumps(r.to_json()))
        _write(out / f"adversary-{args.alg}.csv", buf.getvalue())
    sys.stdout.write(buf.getvalue())
    ok = all(r.report.ok for r in runs)
    for r in runs:
        for name, detail in r.report.failures[:10]:
            print(f"  n={r.n} failed {name}: {detail}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_INVALID


def cmd_validate(args) -> int:
    inst = load_instance(args.instance)
    reports = []
    if args.solution:
        data = json.loads(Path(args.solution).read_text())
        rep = Report("solution")
        if _is_rsa(inst):
            segs = [Segment.from_json(d) for d in data.get("segments", [])]
            for i, ok in enumerate(monotone_reachable(segs, inst)):
                rep.check("monotone_feasible", ok, f"point {i} has no monotone path")
        else:
            sol = GridSolution.from_json(data)
            rep.check("feasible", is_feasible(sol, inst), "a request is unreachable")
        reports.append(rep)
    else:
        algs = ["rsa"] if _is_rsa(inst) else ["square", "online"]
        for alg in algs:
            reports.append(solve_instance(inst, alg)[3])
    ok = True
    for rep in reports:
        print(_dumps(rep.summary()), end="")
        ok = ok and rep.ok
    return EXIT_OK if ok else EXIT_INVALID


def cmd_render(args) -> int:
    data = json.loads(Path(args.solution).read_text())
    if "solution" in data and "horizontal" not in data:
        data = data["solution"]
    pts = []
    if args.instance:
        inst = load_instance(args.instance)
        pts = inst if _is_rsa(inst) else list(inst)
    if "segments" in data:
        svg = render_segments([Segment.from_json(d) for d in data["segments"]], pts)
    else:
        svg = render_grid(GridSolution.from_json(data), pts)
    if args.out:
        _write(args.out, svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="arbor", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=False, caps=False, out=True):
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        if caps:
            sp.add_argument("--kmax", type=int, default=KMAX)
            sp.add_argument("--area-cap", type=int, default=AREA_CAP)
        if out:
            sp.add_argument("--out")

    g = sub.add_parser("generate", help="write seeded instances")
    g.add_argument("--gen", choices=GENERATORS, default="uniform")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--N", type=int, default=10)
    g.add_argument("--count", type=int, default=1)
    common(g, seed=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run one algorithm on an instance")
    s.add_argument("instance")
    s.add_argument("--alg", choices=["square", "online", "rsa"])
    common(s)
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exact optimum of a small instance")
    o.add_argument("instance")
    common(o, caps=True)
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("compare", help="CSV of costs and oracle ratios over a directory")
    c.add_argument("dir")
    c.add_argument("--alg", default="square,online,rsa")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--timing", action="store_true", help="fill runtime_ms (not reproducible)")
    common(c, caps=True)
    c.set_defaults(func=cmd_compare)

    a = sub.add_parser("adversary", help="lower-bound adversary runs")
    a.add_argument("--n", type=int, nargs="+", required=True)
    a.add_argument("--alg", choices=["online", "square", "strawman"], default="online")
    common(a, seed=True)
    a.set_defaults(func=cmd_adversary)

    v = sub.add_parser("validate", help="property checks for an instance or a given solution")
    v.add_argument("instance")
    v.add_argument("--solution")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("render", help="SVG drawing of a solution")
    r.add_argument("solution")
    r.add_argument("--instance")
    common(r)
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    level = os.environ.get("ARBOR_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"arbor: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InstanceError as exc:
        print(f"arbor: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InvariantError as exc:
        print(f"arbor: internal invariant breach: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
