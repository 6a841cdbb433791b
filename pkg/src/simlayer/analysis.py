"""Nonexistence predicates, asymptotic shift estimates and closed forms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, InvalidParameter
from .gfamily import Branch, GSpec, _quad_eval, _quad_extrema, _refine_max, \
    make_builtin, parse_g_expression
from .integrator import State, Termination, Trajectory
from .problem import ProblemSpec

# slack for the pointwise ">=" so that e.g. m = -1/3 (not exact in binary)
# is not rejected by a rounding-level negative
POINTWISE_TOL = 1e-12


@dataclass(frozen=True)
class NonexistenceVerdict:
    applies: bool
    branch: Branch
    margin: float
    pointwise_ok: bool
    witness_x: float
    min_gap: float = 0.0

    def describe(self) -> dict:
        return {"applies": self.applies, "branch": self.branch.value, "margin": self.margin,
                "pointwise_ok": self.pointwise_ok, "witness_x": self.witness_x}


def _extremes(g: GSpec, lo: float, hi: float, sign: float, lam: float):
    """(argmin, min, argmax, max) of sign*(g(x) - x^2 + lam x) on [lo, hi]."""
    q = g.quadratic()
    if q is not None:
        a, b, c = q
        hq = (sign * (a - 1.0), sign * (b + lam), sign * c)
        pts = _quad_extrema(hq, lo, hi)
        vals = [_quad_eval(hq, x) for x in pts]
        i_min = min(range(len(pts)), key=vals.__getitem__)
        i_max = max(range(len(pts)), key=vals.__getitem__)
        return pts[i_min], vals[i_min], pts[i_max], vals[i_max]

    def h(x):
        return sign * (g(x) - x * x + lam * x)

    x_max, v_max = _refine_max(h, lo, hi)
    x_min, neg_min = _refine_max(lambda x: -h(x), lo, hi)
    return x_min, -neg_min, x_max, v_max


def _verdict(p: ProblemSpec, branch: Branch, lo: float, hi: float, sign: float):
    x_min, v_min, x_max, v_max = _extremes(p.g, lo, hi, sign, p.lambda_)
    pointwise_ok = v_min >= -POINTWISE_TOL * (1.0 + abs(v_max) + abs(v_min))
    margin = -p.alpha + v_max
    return NonexistenceVerdict(pointwise_ok and margin > 0, branch, margin, pointwise_ok,
                               x_max, v_min)


def nonexistence_concave(p: ProblemSpec) -> NonexistenceVerdict:
    """g >= x^2 - lam x on [lam, beta] with a positive margin rules out concave solutions."""
    if p.alpha > 0 or not (0 <= p.lambda_ < p.beta):
        raise DomainError("concave nonexistence needs alpha <= 0 and 0 <= lambda < beta")
    return _verdict(p, Branch.CONCAVE, p.lambda_, p.beta, 1.0)


def nonexistence_convex(p: ProblemSpec) -> NonexistenceVerdict:
    """g <= x^2 - lam x on [beta, lam] with a positive margin rules out convex solutions."""
    if p.alpha > 0 or not (0 <= p.beta < p.lambda_):
        raise DomainError("convex nonexistence needs alpha <= 0 and 0 <= beta < lambda")
    return _verdict(p, Branch.CONVEX, p.beta, p.lambda_, -1.0)


def nonexistence_for(p: ProblemSpec) -> Optional[NonexistenceVerdict]:
    """The predicate matching the problem's branch, or None outside its hypotheses."""
    try:
        if p.resolved_branch is Branch.CONCAVE:
            return nonexistence_concave(p)
        if p.resolved_branch is Branch.CONVEX:
            return nonexistence_convex(p)
    except DomainError:
        return None
    return None


@dataclass(frozen=True)
class AsymptoticsReport:
    mu_est: float
    mu_lo: float
    mu_hi: float
    richardson_gap: float


def estimate_mu(traj: Trajectory, lambda_: float) -> AsymptoticsReport:
    """mu ~ f(T) - lambda T at the end of an accepted trajectory.

    A settled run sits on the linear solution lambda t + mu, so f - lambda t
    is held constant from the settle point out to the requested horizon;
    the gap compares mu at that horizon with mu at half of it.

    Concave: alpha < mu < sqrt(alpha^2 + 2(beta - lambda)). Convex: the fields
    are (alpha, +inf) as placeholders only; there f - lambda t decreases from
    alpha, so in fact mu < alpha.
    """
    first, last = traj.samples[0], traj.samples[-1]
    alpha, beta = first.f, first.fp
    mu = last.f - lambda_ * last.t
    t_end = last.t
    if traj.termination is Termination.SETTLED and math.isfinite(traj.t_max):
        t_end = max(t_end, traj.t_max)
    half = 0.5 * t_end
    if half >= last.t:
        gap = 0.0
    else:
        mid = min(traj.samples, key=lambda s: abs(s.t - half))
        gap = abs(mu - (mid.f - lambda_ * mid.t))
    if beta > lambda_:
        lo, hi = alpha, math.sqrt(alpha * alpha + 2.0 * (beta - lambda_))
    elif beta < lambda_:
        lo, hi = alpha, math.inf
    else:
        lo = hi = alpha
    return AsymptoticsReport(mu, lo, hi, gap)


class ClosedFormCase(str, enum.Enum):
    BOUNDED_GX2 = "BoundedGx2"
    FALKNER_SKAN_QUADRATIC = "FalknerSkanQuadratic"
    SIN_SOLUTION = "SinSolution"


@dataclass(frozen=True)
class ClosedForm:
    """Exact solutions of the equation for three particular g.

    BoundedGx2(alpha, beta): g = x^2, gamma = -alpha beta, bounded with limit d.
    FalknerSkanQuadratic(a, b): g = (1 - x^2)/2, f = a t^2 + b t + (b^2 - 1)/(4a).
    SinSolution: g = -x^2 + x + 1, f = sin t.
    """

    case: ClosedFormCase
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "case", ClosedFormCase(self.case))
        if self.case is ClosedFormCase.BOUNDED_GX2:
            alpha, beta = self.p1, self.p2
            if not beta > -alpha * alpha / 2:
                raise InvalidParameter("BoundedGx2 needs beta > -alpha^2/2")
            d = math.sqrt(alpha * alpha + 2 * beta)
            if d == 0 or alpha == d:
                raise InvalidParameter("BoundedGx2 coefficient has a pole (d = 0 or alpha = d)")
        elif self.case is ClosedFormCase.FALKNER_SKAN_QUADRATIC and self.p1 == 0:
            raise InvalidParameter("FalknerSkanQuadratic needs a != 0")

    @property
    def d(self) -> float:
        return math.sqrt(self.p1 ** 2 + 2 * self.p2)

    def g(self) -> GSpec:
        if self.case is ClosedFormCase.BOUNDED_GX2:
            return parse_g_expression("x^2")
        if self.case is ClosedFormCase.FALKNER_SKAN_QUADRATIC:
            return make_builtin("falkner-skan", 0.5)
        return parse_g_expression("-x^2+x+1")

    def initial_state(self) -> State:
        return closed_form_eval(self, 0.0)


def _derivatives(cf: ClosedForm, t: float) -> tuple[float, float, float, float]:
    if cf.case is ClosedFormCase.SIN_SOLUTION:
        return math.sin(t), math.cos(t), -math.sin(t), -math.cos(t)
    if cf.case is ClosedFormCase.FALKNER_SKAN_QUADRATIC:
        a, b = cf.p1, cf.p2
        return a * t * t + b * t + (b * b - 1) / (4 * a), 2 * a * t + b, 2 * a, 0.0
    alpha, d = cf.p1, cf.d
    c = (alpha + d) / (2 * alpha * d - 2 * d * d)
    e = c * math.exp(d * t)
    den = -1 / (2 * d) + e
    if den == 0:
        raise InvalidParameter(f"BoundedGx2 has a pole at t={t!r}")
    d1, d2, d3 = d * e, d * d * e, d ** 3 * e
    r = 1 / den
    f = r + d
    fp = -d1 * r * r
    fpp = -d2 * r * r + 2 * d1 * d1 * r ** 3
    fppp = -d3 * r * r + 6 * d1 * d2 * r ** 3 - 6 * d1 ** 3 * r ** 4
    return f, fp, fpp, fppp


def closed_form_eval(cf: ClosedForm, t: float) -> State:
    if t < 0:
        raise InvalidParameter("closed forms are evaluated for t >= 0")
    f, fp, fpp, _ = _derivatives(cf, t)
    return State(t, f, fp, fpp)


def residual_of(cf: ClosedForm, t: float) -> float:
    """|f''' + f f'' + g(f')| of the exact formula at t."""
    f, fp, fpp, fppp = _derivatives(cf, t)
    if cf.case is ClosedFormCase.BOUNDED_GX2:
        gv = fp * fp
    elif cf.case is ClosedFormCase.FALKNER_SKAN_QUADRATIC:
        gv = 0.5 * (1 - fp * fp)
    else:
        gv = -fp * fp + fp + 1
    return abs(fppp + f * fpp + gv)


def blasius_limit_slope(gamma: float, alpha0: float = 0.0, t_end: float = 20.0,
                        rtol: float = 1e-12, atol: float = 1e-14) -> float:
    """lim f' for the g = 0 shot (alpha0, 0, gamma), via scipy's DOP853."""
    from scipy.integrate import solve_ivp

    sol = solve_ivp(lambda t, y: [y[1], y[2], -y[0] * y[2]], (0.0, t_end),
                    [alpha0, 0.0, gamma], method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(sol.message)
    return float(sol.y[1, -1])


def toepfer_gamma_star(alpha0: float = 0.0) -> float:
    """Blasius f''(0) from one unnormalized shot and the scaling k f(k t).

    With f_k(t) = k f(k t), f_k''(0) = k^3 f''(0) and f_k'(inf) = k^2 f'(inf),
    so the shot with f''(0) = 1 and limit slope l rescales to l^(-3/2).
    """
    if alpha0 != 0.0:
        raise InvalidParameter("the scaling argument needs f(0) = 0")
    return blasius_limit_slope(1.0, alpha0) ** -1.5
