"""Command-line front end: gen, solve, exact, indicators, table."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .front import Front, union_points
from .indicators import assess
from .lbset import InfeasibleError, LpFailure
from .model import GENERATORS, InstanceError, dump_instance, load_instance, parse_instance
from .oracle import DEFAULT_MAX_N, exact_front
from .search import Params, lpbm

log = logging.getLogger("lpbm")

TABLE_COLUMNS = ["instance", "n", "seed", "|Y|", "time_s", "hv_pct", "epsilon", "branch", "fractionality"]
INDICATOR_COLUMNS = ["|Y|", "time_s", "hv_pct", "epsilon"]


class CliError(Exception):
    """Reported to the user with a message and a nonzero exit code."""

    def __init__(self, msg: str, code: int = 1):
        super().__init__(msg)
        self.code = code


def _write_checked(path: str | None, text: str, parse) -> None:
    """Write ``text`` (stdout when ``path`` is None) and make sure it parses back."""
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text if text.endswith("\n") else text + "\n")
        reread = p.read_text()
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from None
    parse(reread)


def _load_instance(path: str):
    try:
        return load_instance(path)
    except FileNotFoundError:
        raise CliError(f"no such file: {path}", 2) from None
    except InstanceError as exc:
        raise CliError(f"{path}: {exc}", 2) from None


def _load_front(path: str) -> Front:
    try:
        return Front.from_json(Path(path).read_text())
    except FileNotFoundError:
        raise CliError(f"no such file: {path}", 2) from None
    except (ValueError, KeyError) as exc:
        raise CliError(f"{path}: not a front document ({exc})", 2) from None


def _params(args) -> Params:
    try:
        return Params(bensolve_time_limit=args.bensolve_limit, algo_time_limit=args.time_limit,
                      allowed_fractionality=args.allowed_frac, fp_iter=args.fp_iter,
                      gpr_iter=args.gpr_iter, seed=args.seed)
    except ValueError as exc:
        raise CliError(str(exc), 2) from None


def _solve(inst, params: Params) -> Front:
    try:
        return lpbm(inst, params)
    except InfeasibleError:
        raise CliError(f"{inst.name}: the LP relaxation is infeasible") from None
    except LpFailure as exc:
        raise CliError(f"{inst.name}: {exc}") from None


# --------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    size = {"moap": args.tasks, "mokp": args.n, "toflp": args.facilities}[args.family]
    if size < 1:
        raise CliError("instance size must be positive", 2)
    inst = GENERATORS[args.family](size, args.seed)
    _write_checked(args.out, dump_instance(inst), parse_instance)
    return 0


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    front = _solve(inst, _params(args))
    if front.stats.get("status") == "empty":
        log.warning("%s: no feasible solution found", inst.name)
    _write_checked(args.out, front.to_json(with_timing=args.record_time), Front.from_json)
    return 0


def cmd_exact(args) -> int:
    inst = _load_instance(args.instance)
    try:
        front = exact_front(inst, max_n=args.max_n)
    except ValueError as exc:
        raise CliError(str(exc), 2) from None
    _write_checked(args.out, front.to_json(), Front.from_json)
    return 0


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def cmd_indicators(args) -> int:
    approx = _load_front(args.approx)
    ref = _load_front(args.ref)
    if not ref.points:
        raise CliError(f"{args.ref}: reference front is empty", 2)
    rep = assess(approx.points, ref.points)
    print(json.dumps(rep.to_dict(), indent=1, sort_keys=True))
    if args.csv:
        path = Path(args.csv)
        new = not path.exists() or path.stat().st_size == 0
        try:
            with path.open("a", newline="") as fh:
                w = csv.writer(fh)
                if new:
                    w.writerow(INDICATOR_COLUMNS)
                w.writerow([len(approx), _fmt(approx.stats.get("time_s", float("nan"))),
                            _fmt(rep.hv_pct), _fmt(rep.epsilon)])
        except OSError as exc:
            raise CliError(f"cannot write {args.csv}: {exc}") from None
    return 0


def _table_instances(directory: Path) -> list[Path]:
    out = []
    for p in sorted(directory.glob("*.json")):
        if p.name.endswith((".front.json", ".exact.json")):
            continue
        out.append(p)
    return out


def _reference(inst, path: Path, approx: list[Front], mode: str) -> np.ndarray:
    exact_path = path.with_name(path.stem + ".exact.json")
    if exact_path.exists():
        return np.array(_load_front(str(exact_path)).points, dtype=np.float64)
    if mode == "combined":
        return union_points(approx)
    if inst.n > DEFAULT_MAX_N:
        raise CliError(f"{path.name}: no exact front and n={inst.n} is too large to enumerate; "
                       "use --ref combined", 2)
    ex = exact_front(inst)
    _write_checked(str(exact_path), ex.to_json(), Front.from_json)
    return np.array(ex.points, dtype=np.float64)


def cmd_table(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise CliError(f"not a directory: {directory}", 2)
    paths = _table_instances(directory)
    if not paths:
        raise CliError(f"{directory}: no instance files", 2)

    base_params = _params(args)
    rows = []
    by_class: dict[str, list[dict]] = {}
    for path in paths:
        inst = _load_instance(str(path))
        fronts = []
        seeds = [args.seed + k for k in range(args.runs)]
        for seed in seeds:
            fpath = path.with_name(f"{path.stem}.seed{seed}.front.json")
            if fpath.exists():
                front = _load_front(str(fpath))
                if front.stats.get("instance", inst.name) != inst.name or front.stats.get("n", inst.n) != inst.n:
                    raise CliError(f"{fpath.name} does not belong to {path.name}", 2)
            else:
                front = _solve(inst, replace(base_params, seed=seed))
                _write_checked(str(fpath), front.to_json(with_timing=True), Front.from_json)
                front.stats.update(front.timing)
            fronts.append(front)
        ref = _reference(inst, path, fronts, args.ref)
        for seed, front in zip(seeds, fronts):
            if len(ref):
                rep = assess(front.points, ref)
                hv, eps = rep.hv_pct, rep.epsilon
            else:
                hv, eps = float("nan"), float("nan")
            row = {"instance": inst.name, "n": inst.n, "seed": seed, "|Y|": len(front),
                   "time_s": float(front.stats.get("time_s", float("nan"))), "hv_pct": hv,
                   "epsilon": eps, "branch": front.stats.get("branch", ""),
                   "fractionality": float(front.stats.get("fractionality", float("nan")))}
            rows.append(row)
            by_class.setdefault(inst.family, []).append(row)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in TABLE_COLUMNS])
    for family, group in by_class.items():
        avg = {c: float(np.mean([r[c] for r in group])) for c in
               ("n", "|Y|", "time_s", "hv_pct", "epsilon", "fractionality")}
        branches = sorted({r["branch"] for r in group})
        w.writerow([f"{family} (avg)", _fmt(avg["n"]), "avg", _fmt(avg["|Y|"]), _fmt(avg["time_s"]),
                    _fmt(avg["hv_pct"]), _fmt(avg["epsilon"]), "/".join(branches),
                    _fmt(avg["fractionality"])])
    _write_checked(args.out, buf.getvalue(), lambda text: list(csv.reader(io.StringIO(text))))
    return 0


# --------------------------------------------------------------------------


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-limit", type=float, default=120.0, help="search budget in seconds")
    p.add_argument("--bensolve-limit", type=float, default=600.0, help="bound-set budget in seconds")
    p.add_argument("--allowed-frac", type=float, default=0.20,
                   help="largest bound-set fractionality that still selects FP+")
    p.add_argument("--fp-iter", type=int, default=10)
    p.add_argument("--gpr-iter", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpbm", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark instance")
    p.add_argument("family", choices=sorted(GENERATORS))
    p.add_argument("--tasks", type=int, default=5, help="assignment: tasks (= agents)")
    p.add_argument("--n", type=int, default=10, help="knapsack: items")
    p.add_argument("--facilities", type=int, default=5, help="facility location: facilities")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="approximate the nondominated front")
    p.add_argument("instance")
    _add_solver_flags(p)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--record-time", action="store_true",
                   help="include wall-clock figures in the output (makes it non-reproducible)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", help="exact front by enumeration")
    p.add_argument("instance")
    p.add_argument("--max-n", type=int, default=DEFAULT_MAX_N)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("indicators", help="hypervolume and epsilon of one front against another")
    p.add_argument("--approx", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--csv", help="append a summary row to this CSV file")
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("table", help="solve every instance in a directory and tabulate quality")
    p.add_argument("directory")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--ref", choices=("exact", "combined"), default="exact")
    _add_solver_flags(p)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"lpbm: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
