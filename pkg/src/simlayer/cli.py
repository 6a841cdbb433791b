"""Command line: solve, classify, sweep, verify.

Exit codes: 0 ok, 1 usage or invalid input, 2 hypotheses fail, 3 no accepted
solution (bracket, convergence, strip exit, nonexistence), 4 verify failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from . import report as rep
from .analysis import nonexistence_for
from .errors import EvaluationError, HypothesisError, InvalidParameter, ParseError, \
    SimlayerError, SolveError
from .gfamily import Branch, GKind, make_builtin, parse_g_expression
from .integrator import IntegratorConfig
from .problem import ProblemSpec
from .shooting import SolverSettings, classify_shot, solve_bvp
from . import verify as ver

EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS, EXIT_SOLVE, EXIT_VERIFY = 0, 1, 2, 3, 4

# flag dest -> default, applied after the --config file has been merged in
DEFAULTS = {"g": None, "g_expr": None, "m": None, "alpha": 0.0, "beta": 0.0, "lambda_": 1.0,
            "gamma": None, "branch": "auto", "t_max": 50.0, "rel_tol": 1e-10,
            "abs_tol": 1e-12, "gamma_tol": 1e-12, "out": None, "format": "json",
            "force": False, "emit_profile": False, "param": None, "from_": None,
            "to": None, "steps": None, "jobs": 1}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _problem_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--config", help="JSON file whose keys mirror flag names; flags win")
    ap.add_argument("--g", choices=[k.value for k in GKind], default=None)
    ap.add_argument("--g-expr", dest="g_expr", default=None, help="g(x) when --g expr")
    ap.add_argument("--m", type=float, default=None)
    ap.add_argument("--alpha", type=float, default=None)
    ap.add_argument("--beta", type=float, default=None)
    ap.add_argument("--lambda", dest="lambda_", type=float, default=None)
    ap.add_argument("--branch", choices=["auto", "concave", "convex"], default=None)
    ap.add_argument("--t-max", dest="t_max", type=float, default=None)
    ap.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    ap.add_argument("--abs-tol", dest="abs_tol", type=float, default=None)
    ap.add_argument("--gamma-tol", dest="gamma_tol", type=float, default=None)
    ap.add_argument("--out", default=None)
    ap.add_argument("--format", choices=["json", "csv"], default=None)
    ap.add_argument("--force", action="store_true", default=None,
                    help="shoot even when the existence hypotheses fail")
    ap.add_argument("--emit-profile", dest="emit_profile", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="simlayer", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", help="solve one problem, JSON report")
    _problem_flags(p)
    p = sub.add_parser("classify", help="classify one shot f''(0) = gamma")
    _problem_flags(p)
    p.add_argument("--gamma", type=float, default=None)
    p = sub.add_parser("sweep", help="solve over a parameter grid, CSV table")
    _problem_flags(p)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--param", choices=["m", "alpha", "beta", "lambda", "gamma"], default=None)
    p.add_argument("--from", dest="from_", type=float, default=None)
    p.add_argument("--to", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default 1)")
    p = sub.add_parser("verify", help="run the oracle suite")
    p.add_argument("--list", action="store_true", help="print check names and exit")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    p.add_argument("--abs-tol", dest="abs_tol", type=float, default=None)
    return ap


def _merge_config(args: argparse.Namespace) -> dict:
    vals = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise UsageError(f"cannot read --config: {e}")
        if not isinstance(data, dict):
            raise UsageError("--config must hold a JSON object")
        for key, v in data.items():
            dest = key.lstrip("-").replace("-", "_")
            dest = {"lambda": "lambda_", "from": "from_"}.get(dest, dest)
            if dest not in DEFAULTS:
                raise UsageError(f"unknown --config key {key!r}")
            vals[dest] = v
    for dest, v in vars(args).items():
        if v is not None:
            vals[dest] = v
    for dest, v in DEFAULTS.items():
        vals.setdefault(dest, v)
    return vals


def _float(vals: dict, key: str) -> float:
    v = vals[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise UsageError(f"{key.rstrip('_').replace('_', '-')} must be a number")
    return float(v)


def make_g(vals: dict):
    kind = vals["g"]
    if kind is None:
        raise UsageError("--g is required")
    kind = GKind(kind)
    if kind is GKind.EXPRESSION:
        if not vals["g_expr"]:
            raise UsageError("--g expr needs --g-expr")
        return parse_g_expression(vals["g_expr"])
    if kind is GKind.BLASIUS:
        return make_builtin(kind)
    if vals["m"] is None:
        raise UsageError(f"--g {kind.value} needs --m")
    return make_builtin(kind, _float(vals, "m"))


def make_problem(vals: dict) -> ProblemSpec:
    return ProblemSpec(_float(vals, "alpha"), _float(vals, "beta"), _float(vals, "lambda_"),
                       make_g(vals), Branch(vals["branch"]))


def make_config(vals: dict) -> IntegratorConfig:
    return IntegratorConfig(rel_tol=_float(vals, "rel_tol"), abs_tol=_float(vals, "abs_tol"),
                            T_max=_float(vals, "t_max"))


def make_settings(vals: dict) -> SolverSettings:
    return SolverSettings(gamma_tol=_float(vals, "gamma_tol"))


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def solve_to_dict(vals: dict) -> tuple[int, dict]:
    """Solve one problem; returns (exit code, JSON-ready report)."""
    p = make_problem(vals)
    cfg, settings = make_config(vals), make_settings(vals)
    try:
        r = solve_bvp(p, cfg, settings, force=bool(vals["force"]))
    except HypothesisError as e:
        verdict = nonexistence_for(p)
        if verdict is not None and verdict.applies:
            return EXIT_SOLVE, rep.failure_to_dict(p, "nonexistence", cfg.T_max, str(e),
                                                   verdict, e.diagnostics)
        return EXIT_HYPOTHESIS, rep.failure_to_dict(p, "hypothesis-failure", cfg.T_max, str(e),
                                                    None, e.diagnostics)
    except SolveError as e:
        verdict = nonexistence_for(p)
        status = "nonexistence" if verdict is not None and verdict.applies else _slug(e)
        return EXIT_SOLVE, rep.failure_to_dict(p, status, cfg.T_max, str(e), verdict,
                                               e.diagnostics)
    code = EXIT_OK if r.status in ("solved", "linear") else EXIT_SOLVE
    return code, rep.report_to_dict(r, bool(vals["emit_profile"]))


def _slug(e: Exception) -> str:
    return {"BracketFailure": "bracket-failure", "ConvergenceFailure": "convergence-failure",
            "StripExitAtMidpoint": "strip-exit"}.get(type(e).__name__, "error")


def cmd_solve(vals: dict) -> int:
    code, d = solve_to_dict(vals)
    if code != EXIT_OK:
        print(f"simlayer: {d['status']}: {d.get('message', 'no accepted solution')}",
              file=sys.stderr)
    if vals["format"] == "csv":
        row = (None, d["status"], d["gamma_star"], d["mu_est"], d["fp_at_horizon"],
               d["iterations"])
        _write(rep.emit_csv([row]), vals["out"])
    else:
        _write(rep.emit_json(d), vals["out"])
    return code


def cmd_classify(vals: dict) -> int:
    if vals["gamma"] is None:
        raise UsageError("classify needs --gamma")
    p = make_problem(vals)
    o = classify_shot(p, _float(vals, "gamma"), make_config(vals), make_settings(vals),
                      force=bool(vals["force"]))
    _write(rep.emit_json(rep.outcome_to_dict(p, o, bool(vals["emit_profile"]))), vals["out"])
    return EXIT_OK


def sweep_row(vals: dict) -> tuple:
    """One CSV row; failures are folded into the status column, never raised."""
    param, x = vals["param"], vals[{"lambda": "lambda_"}.get(vals["param"], vals["param"])]
    try:
        if param == "gamma":
            o = classify_shot(make_problem(vals), float(x), make_config(vals),
                              make_settings(vals), force=bool(vals["force"]))
            return (x, o.cls.value, None, None, o.fp_final, 0)
        code, d = solve_to_dict(vals)
    except (HypothesisError, InvalidParameter, EvaluationError, UsageError):
        return (x, "hypothesis-failure", None, None, None, 0)
    except SimlayerError:
        return (x, "bracket-failure", None, None, None, 0)
    status = d["status"]
    if status in ("linear", "solved"):
        status = "solved"
    elif status not in ("nonexistence", "hypothesis-failure"):
        status = "bracket-failure"
    return (x, status, d["gamma_star"], d["mu_est"], d["fp_at_horizon"], d["iterations"])


def sweep_grid(lo: float, hi: float, steps: int) -> list:
    return [lo + i * (hi - lo) / (steps - 1) for i in range(steps)]


def cmd_sweep(vals: dict) -> int:
    for key in ("param", "from_", "to", "steps"):
        if vals[key] is None:
            raise UsageError(f"sweep needs --{key.rstrip('_')}")
    steps = vals["steps"]
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        raise UsageError("--steps must be an integer >= 2")
    jobs = vals["jobs"]
    if isinstance(jobs, bool) or not isinstance(jobs, int) or jobs < 1:
        raise UsageError("--jobs must be a positive integer")
    dest = {"lambda": "lambda_"}.get(vals["param"], vals["param"])
    # validate the shared configuration before any computation starts
    if vals["g"] is None:
        raise UsageError("--g is required")
    make_config(vals)
    make_settings(vals)
    points = []
    for x in sweep_grid(_float(vals, "from_"), _float(vals, "to"), steps):
        v = dict(vals)
        v[dest] = x
        points.append(v)
    if jobs == 1:
        rows = [sweep_row(v) for v in points]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, points))
    _write(rep.emit_csv(rows), vals["out"])
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.list:
        sys.stdout.write("".join(name + "\n" for name in ver.CHECKS))
        return EXIT_OK
    kw = {}
    if args.rel_tol is not None:
        kw["rel_tol"] = args.rel_tol
    if args.abs_tol is not None:
        kw["abs_tol"] = args.abs_tol
    results = ver.run_checks(IntegratorConfig(**kw))
    sys.stdout.write(ver.format_table(results))
    return EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        vals = _merge_config(args)
        return {"solve": cmd_solve, "classify": cmd_classify, "sweep": cmd_sweep}[
            args.command](vals)
    except (UsageError, InvalidParameter, ParseError) as e:
        print(f"simlayer: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (HypothesisError, EvaluationError) as e:
        print(f"simlayer: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except SolveError as e:
        print(f"simlayer: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SOLVE
    except SimlayerError as e:
        print(f"simlayer: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SOLVE


if __name__ == "__main__":
    raise SystemExit(main())
