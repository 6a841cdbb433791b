"""Shooting on gamma = f''(0): classify shots, seed a bracket, bisect.

A shot is TypeA when it ends on the interior side of lambda (concavity
reversed, or stalled short of lambda), TypeB when f' crosses lambda with the
branch's curvature intact, and TypeC when it settles onto the strip's edge
f' = lambda, f'' = 0. The A/B split is monotone in gamma, which is what
makes bisection a certificate for the type-C shot between them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import BracketFailure, ConvergenceFailure, HypothesisError, \
    InvalidParameter, StripExitAtMidpoint
from .gfamily import Branch, HypothesisReport, check_hypotheses, max_abs_g_on_interval
from .integrator import EventKind, IntegratorConfig, State, Termination, Trajectory, \
    integrate_with_events
from .problem import ProblemSpec


class ShotClass(str, enum.Enum):
    TYPE_A = "TypeA"
    TYPE_B = "TypeB"
    TYPE_C = "TypeC"
    DIVERGED = "Diverged"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class SolverSettings:
    gamma_tol: float = 1e-12
    residual_tol: float = 1e-7
    lemma2_tol: float = 1e-5
    max_bisection_iters: int = 200
    # near-zero TypeA seed is eps_seed*(1+beta), shrunk x10 up to seed_shrinks times
    eps_seed: float = 1e-6
    seed_shrinks: int = 6
    max_expansions: int = 40
    # |f' - lambda| <= strip_tol*(1+beta+lambda) counts as having reached lambda
    strip_tol: float = 1e-8


@dataclass
class ShotOutcome:
    gamma: float
    cls: ShotClass
    trajectory: Trajectory
    fp_final: float
    reason: str = ""

    def describe(self, with_samples: bool = False) -> dict:
        out = {"gamma": self.gamma, "class": self.cls.value, "reason": self.reason,
               "fp_final": self.fp_final, "fpp_final": self.trajectory.final.fpp,
               "t_final": self.trajectory.final.t,
               "termination": self.trajectory.termination.value,
               "events": [{"kind": e.kind.value, "t": e.t_event} for e in self.trajectory.events]}
        if with_samples:
            out["samples"] = [list(s) for s in self.trajectory.samples]
        return out


@dataclass(frozen=True)
class BracketPlan:
    gamma_a: float
    gamma_b: float
    C: float
    p_gamma_seed: float
    n_shots: int = 0


@dataclass
class SolveReport:
    problem: ProblemSpec
    gamma_star: float
    outcome: ShotOutcome
    mu_est: float
    mu_bounds: tuple
    richardson_gap: float
    identity_residual_max: float
    fpp_at_horizon: float
    fp_at_horizon: float
    iterations: int
    hypothesis: HypothesisReport
    t_max: float
    status: str = "solved"
    plan: Optional[BracketPlan] = None
    brackets: list = field(default_factory=list)


def _branch_sign(p: ProblemSpec) -> float:
    """-1 on the concave branch, +1 on the convex one."""
    b = p.resolved_branch
    if b is Branch.LINEAR:
        raise InvalidParameter("beta = lambda has no shooting branch")
    return -1.0 if b is Branch.CONCAVE else 1.0


def _classify(p: ProblemSpec, gamma: float, cfg: IntegratorConfig,
              settings: SolverSettings) -> ShotOutcome:
    s = _branch_sign(p)
    lam = p.lambda_
    # fire when f'' leaves the branch sign, or when f' moves past lambda
    directions = {EventKind.FPP_ZERO: -int(s), EventKind.FP_HITS_LAMBDA: int(s)}
    traj = integrate_with_events(State(0.0, p.alpha, p.beta, gamma), p.g, lam,
                                 directions.keys(), cfg, directions)
    last = traj.final
    band = settings.strip_tol * (1.0 + p.beta + lam)
    near = abs(last.fp - lam) <= band
    interior = s * (lam - last.fp) > 0

    def out(cls, reason):
        return ShotOutcome(gamma, cls, traj, last.fp, reason)

    term = traj.termination
    if term is Termination.EVENT:
        if traj.events[-1].kind is EventKind.FP_HITS_LAMBDA:
            return out(ShotClass.TYPE_B, "fp-hits-lambda")
        return out(ShotClass.TYPE_A if interior else ShotClass.TYPE_B, "fpp-zero")
    if term is Termination.SETTLED:
        if last.t == 0.0:
            return out(ShotClass.DEGENERATE, "linear-at-start")
        if near:
            return out(ShotClass.TYPE_C, "settled")
        return out(ShotClass.TYPE_A if interior else ShotClass.TYPE_B, "plateau")
    if term in (Termination.HORIZON, Termination.MAX_STEPS):
        if near and abs(last.fpp) <= settings.lemma2_tol:
            return out(ShotClass.TYPE_C, "horizon")
        if interior:
            return out(ShotClass.TYPE_A, "horizon-undershoot")
        return out(ShotClass.TYPE_B, "horizon-overshoot")
    # blow-up before any event: fold by what has visibly happened
    if not interior:
        return out(ShotClass.TYPE_B, "blowup")
    if s * last.fpp < 0:
        return out(ShotClass.TYPE_A, "blowup")
    return out(ShotClass.DIVERGED, "blowup")


def _require(p: ProblemSpec, force: bool) -> HypothesisReport:
    hyp = check_hypotheses(p.g, p.alpha, p.beta, p.lambda_)
    if not force and not hyp.admissible:
        raise HypothesisError("problem fails the existence hypotheses", hypothesis=hyp)
    return hyp


def classify_shot(p: ProblemSpec, gamma: float, cfg: Optional[IntegratorConfig] = None,
                  settings: Optional[SolverSettings] = None, force: bool = False) -> ShotOutcome:
    """Integrate the shot f''(0) = gamma and classify it."""
    cfg = cfg or IntegratorConfig()
    settings = settings or SolverSettings()
    _require(p, force)
    if p.resolved_branch is Branch.LINEAR:
        if gamma != 0.0:
            raise InvalidParameter("beta = lambda: only gamma = 0 is meaningful")
        traj = _linear_trajectory(p, cfg)
        return ShotOutcome(0.0, ShotClass.DEGENERATE, traj, p.lambda_, "linear")
    if _branch_sign(p) * gamma < 0:
        raise InvalidParameter("gamma must have the branch's sign (<= 0 concave, >= 0 convex)")
    return _classify(p, gamma, cfg, settings)


def p_gamma_seed(p: ProblemSpec, C: float) -> float:
    """Boundary gamma beyond which P_gamma(t) = lambda has two positive roots."""
    a, b, lam = p.alpha, p.beta, p.lambda_
    if p.resolved_branch is Branch.CONCAVE:
        return -(a * b + abs(a) * b) - math.sqrt(2.0 * (b * b + C) * (b - lam))
    return (abs(a) * lam - a * b) + math.sqrt(2.0 * (lam * lam + C) * (lam - b))


def initial_bracket(p: ProblemSpec, cfg: Optional[IntegratorConfig] = None,
                    settings: Optional[SolverSettings] = None) -> BracketPlan:
    """TypeA endpoint near 0, TypeB endpoint from the quadratic bound P_gamma."""
    cfg = cfg or IntegratorConfig()
    settings = settings or SolverSettings()
    s = _branch_sign(p)
    lo, hi = min(p.beta, p.lambda_), max(p.beta, p.lambda_)
    C = max_abs_g_on_interval(p.g, lo, hi)
    seed = p_gamma_seed(p, C)
    shots = 0

    gamma_b = seed + s * 1e-3 * (1.0 + abs(seed))
    for _ in range(settings.max_expansions):
        shots += 1
        if _classify(p, gamma_b, cfg, settings).cls is ShotClass.TYPE_B:
            break
        gamma_b *= 2.0
    else:
        raise BracketFailure("no TypeB shot found from the P_gamma seed", seed=seed, C=C)

    eps = settings.eps_seed * (1.0 + p.beta)
    gamma_a = None
    tried = []
    for _ in range(settings.seed_shrinks + 1):
        if eps < settings.gamma_tol:
            break
        shots += 1
        o = _classify(p, s * eps, cfg, settings)
        tried.append((s * eps, o.cls.value, o.reason))
        if o.cls is ShotClass.TYPE_A:
            gamma_a = s * eps
            break
        eps /= 10.0
    if gamma_a is None:
        raise BracketFailure("no TypeA shot near gamma = 0", tried=tried)
    if not s * gamma_a < s * gamma_b:
        raise BracketFailure("TypeA seed lies beyond the TypeB seed", gamma_a=gamma_a,
                             gamma_b=gamma_b)
    return BracketPlan(gamma_a, gamma_b, C, seed, shots)


def _linear_trajectory(p: ProblemSpec, cfg: IntegratorConfig) -> Trajectory:
    lam, alpha = p.lambda_, p.alpha
    n = max(1, int(math.ceil(cfg.T_max / cfg.h_max)))
    ts = [cfg.T_max * i / n for i in range(n + 1)]
    samples = [State(t, lam * t + alpha, lam, 0.0) for t in ts]
    return Trajectory(samples, [], Termination.HORIZON, p.g, 0.0, lam, n_steps=n,
                      t_max=cfg.T_max)


_GL_NODES = (0.04691007703066800, 0.23076534494715845, 0.5,
             0.76923465505284155, 0.95308992296933200)
_GL_WEIGHTS = (0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
               0.23931433524968324, 0.11846344252809454)


def _hermite5(s: float):
    s2, s3 = s * s, s * s * s
    s4, s5 = s3 * s, s3 * s2
    return (1 - 10 * s3 + 15 * s4 - 6 * s5,
            s - 6 * s3 + 8 * s4 - 3 * s5,
            0.5 * (s2 - 3 * s3 + 3 * s4 - s5),
            10 * s3 - 15 * s4 + 6 * s5,
            -4 * s3 + 7 * s4 - 3 * s5,
            0.5 * (s3 - 2 * s4 + s5))


_GL_BASIS = tuple(_hermite5(s) for s in _GL_NODES)


def identity_residual(traj: Trajectory, p: ProblemSpec, gamma: float) -> float:
    """max_t |f'' - gamma + f f' - alpha beta - int_0^t (f'^2 - g(f'))|.

    The integral runs over the sample grid: on each step f' is replaced by its
    quintic Hermite interpolant (from f', f'', f''' at both ends) and
    integrated with 5-point Gauss-Legendre.
    """
    g = p.g
    ab = p.alpha * p.beta
    samples = traj.samples
    integral = 0.0
    prev = samples[0]
    prev_f3 = -prev.f * prev.fpp - g(prev.fp)
    worst = abs(prev.fpp - gamma + prev.f * prev.fp - ab)
    for cur in samples[1:]:
        h = cur.t - prev.t
        cur_f3 = -cur.f * cur.fpp - g(cur.fp)
        y = (prev.fp, h * prev.fpp, h * h * prev_f3, cur.fp, h * cur.fpp, h * h * cur_f3)
        acc = 0.0
        for w, basis in zip(_GL_WEIGHTS, _GL_BASIS):
            v = sum(c * b for c, b in zip(y, basis))
            acc += w * (v * v - g(v))
        integral += h * acc
        r = abs(cur.fpp - gamma + cur.f * cur.fp - ab - integral)
        if r > worst:
            worst = r
        prev, prev_f3 = cur, cur_f3
    return worst


def _finish(p: ProblemSpec, hyp: HypothesisReport, outcome: ShotOutcome, iterations: int,
            cfg: IntegratorConfig, settings: SolverSettings, plan=None, brackets=()) -> SolveReport:
    from .analysis import estimate_mu

    traj = outcome.trajectory
    asym = estimate_mu(traj, p.lambda_)
    resid = identity_residual(traj, p, outcome.gamma)
    last = traj.final
    ok = resid <= settings.residual_tol and abs(last.fpp) <= settings.lemma2_tol
    return SolveReport(p, outcome.gamma, outcome, asym.mu_est, (asym.mu_lo, asym.mu_hi),
                       asym.richardson_gap, resid, last.fpp, last.fp, iterations, hyp,
                       cfg.T_max, "solved" if ok else "unverified", plan, list(brackets))


def solve_bvp(p: ProblemSpec, cfg: Optional[IntegratorConfig] = None,
              settings: Optional[SolverSettings] = None, force: bool = False) -> SolveReport:
    """Find the unique concave/convex solution by bisection on gamma.

    Bisection stops early if a midpoint shot already settles onto the strip
    edge; otherwise the final midpoint is re-shot and must be TypeC.
    """
    cfg = cfg or IntegratorConfig()
    settings = settings or SolverSettings()
    hyp = _require(p, force)
    if p.resolved_branch is Branch.LINEAR:
        if not hyp.g_lambda_zero:
            raise HypothesisError("beta = lambda needs g(lambda) = 0", hypothesis=hyp)
        traj = _linear_trajectory(p, cfg)
        outcome = ShotOutcome(0.0, ShotClass.DEGENERATE, traj, p.lambda_, "linear")
        report = _finish(p, hyp, outcome, 0, cfg, settings)
        report.status = "linear" if report.status == "solved" else report.status
        return report

    plan = initial_bracket(p, cfg, settings)
    ga, gb = plan.gamma_a, plan.gamma_b
    brackets = [(ga, gb)]
    accepted = None
    iterations = 0
    while abs(ga - gb) > settings.gamma_tol * (1.0 + abs(ga)):
        if iterations >= settings.max_bisection_iters:
            raise ConvergenceFailure("bisection iteration limit reached", bracket=(ga, gb))
        mid = 0.5 * (ga + gb)
        o = _classify(p, mid, cfg, settings)
        iterations += 1
        if o.cls is ShotClass.TYPE_A:
            ga = mid
        elif o.cls is ShotClass.TYPE_B:
            gb = mid
        elif o.cls is ShotClass.TYPE_C:
            accepted = o
            break
        else:
            raise BracketFailure("midpoint shot diverged without classification",
                                 gamma=mid, reason=o.reason, bracket=(ga, gb))
        brackets.append((ga, gb))
    if accepted is None:
        mid = 0.5 * (ga + gb)
        accepted = _classify(p, mid, cfg, settings)
        if accepted.cls is not ShotClass.TYPE_C:
            raise StripExitAtMidpoint("final midpoint shot is not TypeC", gamma=mid,
                                      cls=accepted.cls.value, reason=accepted.reason,
                                      fp_final=accepted.fp_final, bracket=(ga, gb))
    return _finish(p, hyp, accepted, iterations, cfg, settings, plan, brackets)
