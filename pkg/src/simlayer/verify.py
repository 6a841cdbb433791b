"""Release-gate oracle suite behind ``simlayer verify``.

Each check returns (ok, detail). Solves are memoized per run so the residual
and f''(T_max) checks can sweep every accepted trajectory the other checks
produced without re-solving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .analysis import ClosedForm, ClosedFormCase, closed_form_eval, nonexistence_concave, \
    nonexistence_convex, toepfer_gamma_star
from .errors import BracketFailure, DomainError, SimlayerError, StripExitAtMidpoint
from .gfamily import make_builtin
from .integrator import IntegratorConfig, integrate_with_events
from .problem import ProblemSpec
from .shooting import SolverSettings, solve_bvp


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def integrate_closed_form(cf: ClosedForm, t_end: float, cfg: IntegratorConfig):
    """Plain IVP run from the closed form's initial data, no events, no settling."""
    return integrate_with_events(cf.initial_state(), cf.g(), 0.0, (),
                                 cfg.replace(T_max=t_end, settle_tol=0.0))


def closed_form_error(cf: ClosedForm, t_end: float, cfg: IntegratorConfig):
    """(max |f_num - f_exact| over the step grid, final numeric state)."""
    traj = integrate_closed_form(cf, t_end, cfg)
    worst = max(abs(s.f - closed_form_eval(cf, s.t).f) for s in traj.samples)
    return worst, traj.final


# problems from the nonexistence truth table: (label, problem, expected applies)
def truth_table() -> list:
    return [
        ("free-convection m=-1/2 concave",
         ProblemSpec(-1.0, 1.0, 0.0, make_builtin("free-convection", -0.5)), True),
        ("falkner-skan m=-0.6 convex",
         ProblemSpec(0.0, 0.0, 1.0, make_builtin("falkner-skan", -0.6)), True),
        ("mixed-convection m=-0.5 convex",
         ProblemSpec(0.0, 0.0, 1.0, make_builtin("mixed-convection", -0.5)), True),
        ("falkner-skan m=1",
         ProblemSpec(0.0, 0.0, 1.0, make_builtin("falkner-skan", 1.0)), False),
    ]


def any_predicate_applies(p: ProblemSpec) -> bool:
    for fn in (nonexistence_concave, nonexistence_convex):
        try:
            if fn(p).applies:
                return True
        except DomainError:
            pass
    return False


def linear_cases() -> list:
    """Builtin g with g(1) = 0, for the beta = lambda = 1 fast path."""
    return [make_builtin("blasius"), make_builtin("falkner-skan", 1.0),
            make_builtin("falkner-skan", -0.5), make_builtin("mixed-convection", 1.0),
            make_builtin("mixed-convection", -0.5), make_builtin("free-convection", 0.0)]


class Suite:
    def __init__(self, cfg: Optional[IntegratorConfig] = None,
                 settings: Optional[SolverSettings] = None):
        self.cfg = cfg or IntegratorConfig()
        self.settings = settings or SolverSettings()
        self._solves: dict = {}

    def solve(self, p: ProblemSpec, cfg: Optional[IntegratorConfig] = None):
        cfg = cfg or self.cfg
        key = (p, cfg)
        if key not in self._solves:
            self._solves[key] = solve_bvp(p, cfg, self.settings)
        return self._solves[key]

    def accepted(self) -> list:
        return [r for r in self._solves.values() if r.status in ("solved", "linear")]

    # individual checks ---------------------------------------------------

    def bounded_gx2(self):
        err, last = closed_form_error(ClosedForm(ClosedFormCase.BOUNDED_GX2, 0.0, 1.0), 10.0,
                                      self.cfg)
        return err <= 1e-6 and abs(last.fp) <= 1e-3, f"max err {err:.3g}, f'(10) {last.fp:.3g}"

    def falkner_skan_quadratic(self):
        err, _ = closed_form_error(ClosedForm(ClosedFormCase.FALKNER_SKAN_QUADRATIC, 1.0, 0.0),
                                   5.0, self.cfg)
        return err <= 1e-8, f"max err {err:.3g}"

    def sin_solution(self):
        err, _ = closed_form_error(ClosedForm(ClosedFormCase.SIN_SOLUTION), math.pi, self.cfg)
        return err <= 1e-6, f"max err {err:.3g}"

    def toepfer(self):
        ref = toepfer_gamma_star()
        r = self.solve(ProblemSpec(0.0, 0.0, 1.0, make_builtin("blasius")))
        diff = abs(r.gamma_star - ref)
        ok = diff <= 1e-6 and 0.46 < ref < 0.48 and 0.46 < r.gamma_star < 0.48
        return ok, f"solver {r.gamma_star:.12g}, scaling {ref:.12g}, diff {diff:.2g}"

    def falkner_skan_reproducible(self):
        p = ProblemSpec(0.0, 0.0, 1.0, make_builtin("falkner-skan", 1.0))
        gammas = [self.solve(p, self.cfg.replace(T_max=T, rel_tol=rt)).gamma_star
                  for T in (50.0, 80.0) for rt in (1e-10, 1e-12)]
        spread = max(gammas) - min(gammas)
        return spread <= 1e-6, f"gamma* {gammas[0]:.12g}, spread {spread:.2g}"

    def nonexistence_table(self):
        bad = [label for label, p, want in truth_table() if any_predicate_applies(p) != want]
        return not bad, "mismatch: " + ", ".join(bad) if bad else "4/4 cases"

    def predicate_solver_consistency(self):
        bad = []
        for label, p, want in truth_table():
            if not want:
                continue
            try:
                solve_bvp(p, self.cfg, self.settings, force=True)
                bad.append(label)
            except (BracketFailure, StripExitAtMidpoint):
                pass
            except SimlayerError as e:
                bad.append(f"{label} ({type(e).__name__})")
        return not bad, "accepted or wrong error: " + ", ".join(bad) if bad else "3/3 rejected"

    def mu_bounds(self):
        r = self.solve(ProblemSpec(0.0, 2.0, 1.0, make_builtin("mixed-convection", 1.0)))
        ok = 0.0 < r.mu_est < math.sqrt(2.0) and r.richardson_gap <= 1e-4
        return ok, f"mu {r.mu_est:.10g}, gap {r.richardson_gap:.2g}"

    def linear_fast_path(self):
        bad = []
        for g in linear_cases():
            r = self.solve(ProblemSpec(3.0, 1.0, 1.0, g))
            exact = all(s.f == s.t + 3.0 and s.fp == 1.0 and s.fpp == 0.0
                        for s in r.outcome.trajectory.samples)
            if not (exact and r.gamma_star == 0.0 and r.identity_residual_max == 0.0):
                bad.append(g.kind.value)
        return not bad, "inexact: " + ", ".join(bad) if bad else f"{len(linear_cases())} families"

    def identity_residual(self):
        rs = self._all_solves()
        worst = max(r.identity_residual_max for r in rs)
        return worst <= 1e-7 and all(r.status != "unverified" for r in rs), \
            f"{len(rs)} solves, worst {worst:.3g}"

    def fpp_horizon(self):
        rs = self._all_solves()
        worst = max(abs(r.fpp_at_horizon) for r in rs)
        return worst <= 1e-5, f"{len(rs)} solves, worst |f''(T)| {worst:.3g}"

    def _all_solves(self) -> list:
        # run the solving checks first if they have not been run
        if not self._solves:
            for fn in (self.toepfer, self.falkner_skan_reproducible, self.mu_bounds,
                       self.linear_fast_path):
                try:
                    fn()
                except SimlayerError:
                    pass
        return list(self._solves.values())


CHECKS: dict[str, Callable[[Suite], tuple]] = {
    "closed-form-bounded-gx2": Suite.bounded_gx2,
    "closed-form-falkner-skan-quadratic": Suite.falkner_skan_quadratic,
    "closed-form-sin": Suite.sin_solution,
    "toepfer-blasius": Suite.toepfer,
    "falkner-skan-reproducible": Suite.falkner_skan_reproducible,
    "nonexistence-truth-table": Suite.nonexistence_table,
    "predicate-solver-consistency": Suite.predicate_solver_consistency,
    "mu-bounds-concave": Suite.mu_bounds,
    "linear-fast-path": Suite.linear_fast_path,
    "identity-residual": Suite.identity_residual,
    "fpp-at-horizon": Suite.fpp_horizon,
}


def run_checks(cfg: Optional[IntegratorConfig] = None, names=None) -> list:
    suite = Suite(cfg)
    results = []
    for name in names or CHECKS:
        try:
            ok, detail = CHECKS[name](suite)
        except (SimlayerError, ArithmeticError, ValueError) as e:
            ok, detail = False, f"{type(e).__name__}: {e}"
        results.append(CheckResult(name, bool(ok), detail))
    return results


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{r.name:<{width}}  {'PASS' if r.ok else 'FAIL'}  {r.detail}" for r in results]
    n_ok = sum(r.ok for r in results)
    lines.append(f"{n_ok}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
