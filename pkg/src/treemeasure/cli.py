"""Command-line front end.

Exit codes: 0 success, 1 unreadable or invalid input, 2 solver did not
converge, 3 backends or reproduced values disagree.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .automata import AutomatonError, GameAutomaton, builtin, parse_automaton, validate
from .exact import ExactAmbiguity, ExactUnsupported, NoRootError, solve_exact, wik_determinant, wik_value
from .exact.algebraic import AlgebraicNumber
from .exact.intpoly import IntPoly
from .exact.wik import wik_pipeline_value
from .montecarlo import UnsupportedMBP, estimate
from .numeric import NonMonotoneError, NumericConfig, solve_numeric
from .pipeline import Pipeline, run_pipeline
from .qe import NotStageable, QEError, export_qe

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGENCE, EXIT_DISAGREE = 0, 1, 2, 3
AGREEMENT_TOL = 1e-7


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# input ------------------------------------------------------------------------

def _builtin_params(args) -> tuple:
    if args.builtin == "W":
        if args.i is None or args.k is None:
            raise CliError("builtin W needs --i and --k", EXIT_INPUT)
        return (args.i, args.k)
    if args.builtin == "L":
        if args.n is None:
            raise CliError("builtin L needs --n", EXIT_INPUT)
        return (args.n,)
    return ()


def load_input(args) -> tuple[GameAutomaton, dict, str]:
    """Automaton, input description for reports, and a short name for output files."""
    if bool(args.builtin) == bool(args.file):
        raise CliError("give exactly one of --builtin or --file", EXIT_INPUT)
    if args.builtin:
        params = _builtin_params(args)
        try:
            a = builtin(args.builtin, *params)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_INPUT) from exc
        name = "_".join([args.builtin, *map(str, params)])
        return a, {"builtin": args.builtin, "params": list(params)}, name
    path = Path(args.file)
    return read_automaton(path), {"file": str(path)}, path.stem


def read_automaton(path: Path) -> GameAutomaton:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"{path}: cannot read ({exc})", EXIT_INPUT) from exc
    try:
        return parse_automaton(text)
    except AutomatonError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from exc


def _pipeline(a: GameAutomaton) -> Pipeline:
    try:
        return run_pipeline(a)
    except AutomatonError as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc


# reports ----------------------------------------------------------------------

def _exact_entry(value: AlgebraicNumber) -> dict:
    lo, hi = value.decimal_interval(12)
    return {
        "poly": value.minimal_polynomial().format("x"),
        "interval": [lo, hi],
        "decimal": value.decimal(12),
        "value": value.format("x"),
    }


def solve_report(a: GameAutomaton, input_info: dict, *, exact: bool, numeric: bool, mc: bool,
                 tol: float, depth: int, samples: int, seed: int) -> tuple[dict, int]:
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    p = _pipeline(a)
    timings["pipeline"] = time.perf_counter() - t0
    report = {
        "input": input_info,
        "system": {"equations": p.system.format().splitlines(), "class": str(p.classification)},
        "results": {},
        "checks": [],
        "timings": timings,
    }
    code = EXIT_OK
    checks = report["checks"]

    t0 = time.perf_counter()
    try:
        num = solve_numeric(p.system, NumericConfig(tol=tol))
        num_value = float(p.value_from(num.as_dict()))
        report["results"]["numeric"] = {"value": num_value, "residual": num.residual,
                                        "iterations": num.iterations, "converged": num.converged}
        if not num.converged:
            code = EXIT_NONCONVERGENCE
    except NonMonotoneError as exc:
        num_value = None
        report["results"]["numeric"] = {"error": str(exc)}
        code = EXIT_NONCONVERGENCE
    timings["numeric"] = time.perf_counter() - t0
    checks.append({"name": "numeric converged", "pass": code != EXIT_NONCONVERGENCE,
                   "detail": f"tol {tol:g}"})

    exact_value = None
    if exact:
        t0 = time.perf_counter()
        try:
            sol = solve_exact(p.system)
            exact_value = sol.evaluate(p.target_binding)
            entry = _exact_entry(exact_value)
            entry["method"] = sol.method
            report["results"]["exact"] = entry
        except (ExactUnsupported, ExactAmbiguity, NoRootError) as exc:
            report["results"]["exact"] = {"error": f"{type(exc).__name__}: {exc}"}
        timings["exact"] = time.perf_counter() - t0

    if exact_value is not None and num_value is not None:
        diff = abs(float(exact_value) - num_value)
        ok = diff <= AGREEMENT_TOL
        checks.append({"name": "exact vs numeric", "pass": ok, "detail": f"|difference| = {diff:.3e}"})
        if not ok and code == EXIT_OK:
            code = EXIT_DISAGREE

    if mc:
        t0 = time.perf_counter()
        try:
            est = estimate(p.mbp, p.start, depth, samples, seed)
            lo3, hi3 = est.bracket(3.0)
            report["results"]["montecarlo"] = {
                "lo": est.lo, "hi": est.hi, "n": est.n, "depth": est.depth, "seed": est.seed,
                "optimistic_mean": est.optimistic_mean, "pessimistic_mean": est.pessimistic_mean,
                "ci_halfwidth": est.ci_halfwidth,
            }
            ref = float(exact_value) if exact_value is not None else num_value
            if ref is not None:
                ok = lo3 <= ref <= hi3
                checks.append({"name": "value inside Monte Carlo 3-sigma bracket", "pass": ok,
                               "detail": f"[{lo3:.6f}, {hi3:.6f}] vs {ref:.6f}"})
                if not ok and code == EXIT_OK:
                    code = EXIT_DISAGREE
        except UnsupportedMBP as exc:
            report["results"]["montecarlo"] = {"error": str(exc)}
        timings["montecarlo"] = time.perf_counter() - t0

    if not numeric:
        report["results"].pop("numeric", None)
    return report, code


def _print_solve(report: dict) -> None:
    print("system (" + report["system"]["class"] + "):")
    for line in report["system"]["equations"]:
        print("  " + line)
    res = report["results"]
    if "exact" in res:
        e = res["exact"]
        print("exact:    " + (e.get("error") or e["value"]))
    if "numeric" in res:
        n = res["numeric"]
        if "error" in n:
            print("numeric:  " + n["error"])
        else:
            print(f"numeric:  {n['value']:.12g}  (residual {n['residual']:.2e}, {n['iterations']} iterations)")
    if "montecarlo" in res:
        m = res["montecarlo"]
        if "error" in m:
            print("montecarlo: " + m["error"])
        else:
            print(f"montecarlo: [{m['lo']:.6f}, {m['hi']:.6f}]  depth {m['depth']}, n {m['n']}, seed {m['seed']}")
    for c in report["checks"]:
        print(f"check {'PASS' if c['pass'] else 'FAIL'}: {c['name']} ({c['detail']})")


def _emit(obj, as_json: bool, printer) -> None:
    if as_json:
        print(json.dumps(obj, indent=2, ensure_ascii=False))
    else:
        printer(obj)


# commands ----------------------------------------------------------------------

def cmd_validate(args) -> int:
    if bool(args.builtin) == bool(args.file):
        raise CliError("give exactly one of --builtin or --file", EXIT_INPUT)
    if args.file:
        path = Path(args.file)
        try:
            a = parse_automaton(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise CliError(f"{path}: cannot read ({exc})", EXIT_INPUT) from exc
        except AutomatonError as exc:
            where = f":{exc.line}" if getattr(exc, "line", None) else ""
            raise CliError(f"{path}{where}: {exc}", EXIT_INPUT) from exc
    else:
        a, _, _ = load_input(args)
    d = validate(a)
    out = {"ok": d.ok, "errors": [str(x) for x in d.errors], "warnings": [str(x) for x in d.warnings],
           "states": len(a.states), "alphabet": list(a.alphabet)}
    _emit(out, args.json, lambda o: print("\n".join(
        [f"error: {e}" for e in o["errors"]] + [f"warning: {w}" for w in o["warnings"]]
        + [f"ok: {len(a.states)} states, {len(a.alphabet)} letters" if o["ok"] else "invalid"])))
    return EXIT_OK if d.ok else EXIT_INPUT


def cmd_solve(args) -> int:
    a, info, _ = load_input(args)
    exact, numeric, mc = args.exact, args.numeric, args.mc
    if not (exact or numeric or mc):
        exact = numeric = True
    report, code = solve_report(a, info, exact=exact, numeric=numeric, mc=mc, tol=args.tol,
                                depth=args.depth, samples=args.samples, seed=args.seed)
    _emit(report, args.json, _print_solve)
    return code


def cmd_export_qe(args) -> int:
    a, _, name = load_input(args)
    p = _pipeline(a)
    try:
        res = export_qe(p.system, name, args.out_dir, run=args.run_qepcad, command=args.qepcad,
                        timeout=args.timeout)
    except NotStageable as exc:
        raise CliError(f"system is not stageable: {exc}", EXIT_INPUT) from exc
    except QEError as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc
    out = {"files": [str(f) for f in res.files], "sources": res.sources}
    _emit(out, args.json, lambda o: print("\n".join(o["files"])))
    return EXIT_OK


def cmd_estimate(args) -> int:
    a, info, _ = load_input(args)
    p = _pipeline(a)
    try:
        est = estimate(p.mbp, p.start, args.depth, args.samples, args.seed)
    except UnsupportedMBP as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc
    out = {"input": info, "lo": est.lo, "hi": est.hi, "optimistic_mean": est.optimistic_mean,
           "pessimistic_mean": est.pessimistic_mean, "ci_halfwidth": est.ci_halfwidth,
           "n": est.n, "depth": est.depth, "seed": est.seed}
    _emit(out, args.json, lambda o: print(
        f"pessimistic {o['pessimistic_mean']:.6f}  optimistic {o['optimistic_mean']:.6f}  "
        f"95% interval [{o['lo']:.6f}, {o['hi']:.6f}]  (depth {o['depth']}, n {o['n']}, seed {o['seed']})"))
    return EXIT_OK


def cmd_wik(args) -> int:
    if args.i is None or args.k is None:
        raise CliError("wik needs --i and --k", EXIT_INPUT)
    try:
        closed = wik_value(args.i, args.k)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc
    piped = wik_pipeline_value(args.i, args.k)
    out = {"i": args.i, "k": args.k, "closed_form": closed, "pipeline": str(piped),
           "agree": piped == closed}
    if args.k >= 3:
        out["determinant"] = str(wik_determinant(args.k))
    _emit(out, args.json, lambda o: print(
        f"W({o['i']},{o['k']}): closed form {o['closed_form']}, pipeline {o['pipeline']}"
        + (f", det A_{o['k']} = {o['determinant']}" if "determinant" in o else "")))
    return EXIT_OK if out["agree"] else EXIT_DISAGREE


# reproduction ----------------------------------------------------------------------

W_CASES = ((1, 3, 0), (1, 5, 0), (0, 3, 0), (0, 2, 1), (1, 2, 1), (1, 4, 1))
L2_VALUE = (3 - math.sqrt(7)) / 4
L3_VALUE = (3 - math.sqrt(1 + 3 * math.sqrt(7))) / 4


def corpus_dir(override: str | None = None) -> Path:
    if override:
        return Path(override)
    return Path(str(resources.files("treemeasure") / "corpus"))


def _solve_file(path: Path) -> tuple[Pipeline, AlgebraicNumber, float]:
    p = _pipeline(read_automaton(path))
    sol = solve_exact(p.system)
    ex = sol.evaluate(p.target_binding)
    num = solve_numeric(p.system)
    if not num.converged:
        raise CliError(f"{path}: numeric solver did not converge", EXIT_NONCONVERGENCE)
    return p, ex, float(p.value_from(num.as_dict()))


def reproduce_claims(directory: Path, tol: float = 1e-9) -> list[dict]:
    """Every headline value, recomputed from the corpus files."""
    claims = []

    def claim(name, ok, detail):
        claims.append({"name": name, "pass": bool(ok), "detail": detail})

    _, ex, num = _solve_file(directory / "L1.gta")
    claim("mu(L1) = 1/2", ex == Fraction(1, 2) and ex.minimal_polynomial() == IntPoly([-1, 2])
          and abs(num - 0.5) <= tol, f"exact {ex.format()}, numeric {num:.12g}")

    _, ex, num = _solve_file(directory / "L2.gta")
    claim("mu(L2) = (3 - sqrt 7)/4", ex.minimal_polynomial() == IntPoly([1, -12, 8])
          and abs(float(ex) - L2_VALUE) <= tol and abs(num - L2_VALUE) <= tol,
          f"{ex.format()}, numeric {num:.12g}")

    _, ex, num = _solve_file(directory / "L3.gta")
    quartic = IntPoly([1, -384, 832, -768, 256])
    claim("mu(L3) = (3 - sqrt(1 + 3 sqrt 7))/4", ex.minimal_polynomial() == quartic
          and abs(float(ex) - L3_VALUE) <= tol and abs(num - L3_VALUE) <= tol,
          f"{ex.format()}, numeric {num:.12g}")
    factors = quartic.factors()
    claim("mu(L3) is not a quadratic irrational", len(factors) == 1 and factors[0].degree == 4,
          "minimal polynomial irreducible of degree " + str(factors[0].degree))

    _, ex, num = _solve_file(directory / "Linf.gta")
    claim("mu(Linf) = 0", ex == 0 and abs(num) <= tol, f"exact {ex.format()}, numeric {num:.3g}")

    bad = []
    for i, k, want in W_CASES:
        path = directory / f"W_{i}_{k}.gta"
        p = _pipeline(read_automaton(path))
        sol = solve_exact(p.system)
        got = sol.evaluate(p.target_binding)
        num = float(p.value_from(solve_numeric(p.system).as_dict()))
        if not (got == want and wik_value(i, k) == want and abs(num - want) <= max(tol, 1e-9)):
            bad.append(f"W({i},{k})")
    claim("mu(W(i,k)) = 0 for odd k, 1 for even k", not bad,
          "all six cases" if not bad else "failed: " + ", ".join(bad))

    dets = {k: wik_determinant(k) for k in range(3, 13)}
    claim("det A_k = (-1)^(k-1)/k for 3 <= k <= 12",
          all(d == Fraction((-1) ** (k - 1), k) for k, d in dets.items()),
          f"det A_3 = {dets[3]}, det A_12 = {dets[12]}")

    l2 = _solve_file(directory / "L2.gta")[2]
    claim("mu(L2) is approximately 0.088", abs(l2 - 0.088) < 1e-3, f"{l2:.6f}")
    return claims


def cmd_reproduce(args) -> int:
    directory = corpus_dir(args.corpus_dir)
    t0 = time.perf_counter()
    claims = reproduce_claims(directory, args.tol)
    elapsed = time.perf_counter() - t0
    failed = [c for c in claims if not c["pass"]]
    out = {"corpus": str(directory), "claims": claims, "passed": len(claims) - len(failed),
           "total": len(claims), "timings": {"total": elapsed}}

    def table(o):
        width = max(len(c["name"]) for c in o["claims"])
        for c in o["claims"]:
            print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']:<{width}}  {c['detail']}")
        print(f"{o['passed']}/{o['total']} claims reproduced")

    _emit(out, args.json, table)
    return EXIT_OK if not failed else EXIT_DISAGREE


# argument parsing -------------------------------------------------------------------

def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--builtin", metavar="NAME", help="L<n>, L (with --n), Linf or W (with --i, --k)")
    p.add_argument("--file", metavar="PATH", help="automaton in .gta format")
    p.add_argument("--n", type=int, help="parameter of builtin L")
    p.add_argument("--i", type=int, help="lowest priority of builtin W")
    p.add_argument("--k", type=int, help="highest priority of builtin W")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treemeasure",
                                     description="Coin-flipping measure of game automaton languages.")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)
    json_parent = argparse.ArgumentParser(add_help=False)
    json_parent.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                             help="machine-readable output")
    mc_parent = argparse.ArgumentParser(add_help=False)
    mc_parent.add_argument("--depth", type=int, default=30, help="Monte Carlo truncation depth")
    mc_parent.add_argument("--samples", type=int, default=100_000, help="Monte Carlo sample count")
    mc_parent.add_argument("--seed", type=int, default=0, help="Monte Carlo seed (64-bit)")

    p = sub.add_parser("validate", parents=[json_parent], help="parse and check an automaton")
    _add_input(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", parents=[json_parent, mc_parent], help="compute the measure")
    _add_input(p)
    p.add_argument("--exact", action="store_true", help="run the exact backend")
    p.add_argument("--numeric", action="store_true", help="report the numeric solution")
    p.add_argument("--mc", action="store_true", help="run the Monte Carlo oracle")
    p.add_argument("--tol", type=float, default=1e-12, help="numeric solver tolerance")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("export-qe", parents=[json_parent], help="write staged qepcad inputs")
    _add_input(p)
    p.add_argument("--out-dir", default=".", help="directory for <name>_stage<i>.qe files")
    p.add_argument("--run-qepcad", action="store_true",
                   help="run the external qepcad (--qepcad or $TREEMEASURE_QEPCAD) between stages")
    p.add_argument("--qepcad", metavar="CMD", help="qepcad command line")
    p.add_argument("--timeout", type=float, default=60.0, help="seconds per qepcad run")
    p.set_defaults(func=cmd_export_qe)

    p = sub.add_parser("estimate", parents=[json_parent, mc_parent], help="Monte Carlo bracket")
    _add_input(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("wik", parents=[json_parent], help="W(i,k) closed form vs pipeline")
    p.add_argument("--i", type=int)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_wik)

    p = sub.add_parser("reproduce", parents=[json_parent], help="recompute every headline value")
    p.add_argument("--corpus-dir", help="directory with the .gta corpus (default: bundled)")
    p.add_argument("--tol", type=float, default=1e-9, help="tolerance for numeric claims")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
