"""The nonlinearity g: builtin physical families, parsed expressions, checks.

Builtin families are quadratics, so their sign and extremum questions are
answered analytically; parsed expressions fall back to sampling.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import expression
from .errors import EvaluationError, InvalidParameter

N_CHECK = 1001
ZERO_TOL = 1e-9
LINEAR_TOL = 1e-14


class GKind(str, enum.Enum):
    BLASIUS = "blasius"
    FALKNER_SKAN = "falkner-skan"
    FREE_CONVECTION = "free-convection"
    MIXED_CONVECTION = "mixed-convection"
    EXPRESSION = "expr"


class Branch(str, enum.Enum):
    CONCAVE = "concave"
    CONVEX = "convex"
    LINEAR = "linear"
    AUTO = "auto"


PARAMETRIC = (GKind.FALKNER_SKAN, GKind.FREE_CONVECTION, GKind.MIXED_CONVECTION)


@dataclass(frozen=True)
class GSpec:
    """A concrete g. Immutable; ``m`` is set only for parametric families."""

    kind: GKind
    m: Optional[float] = None
    expr: Optional[str] = None
    _fn: Callable[[float], float] = field(default=None, repr=False, compare=False)

    def __call__(self, x: float) -> float:
        return self._fn(x)

    def quadratic(self) -> Optional[tuple[float, float, float]]:
        """(a, b, c) with g(x) = a x^2 + b x + c for builtins, else None."""
        if self.kind is GKind.BLASIUS:
            return (0.0, 0.0, 0.0)
        if self.kind is GKind.FALKNER_SKAN:
            return (-self.m, 0.0, self.m)
        if self.kind is GKind.FREE_CONVECTION:
            k = 2.0 * self.m / (self.m + 1.0)
            return (-k, 0.0, 0.0)
        if self.kind is GKind.MIXED_CONVECTION:
            k = 2.0 * self.m / (self.m + 1.0)
            return (-k, k, 0.0)
        return None

    def to_text(self) -> str:
        """Self-description in the expression language."""
        if self.kind is GKind.EXPRESSION:
            return self.expr
        if self.kind is GKind.BLASIUS:
            return "0"
        m = repr(self.m)
        if self.kind is GKind.FALKNER_SKAN:
            return f"{m}*(1-x)*(1+x)"
        k = f"(2*{m}/({m}+1))"
        if self.kind is GKind.FREE_CONVECTION:
            return f"{k}*(-x)*x"
        return f"{k}*(1-x)*x"

    def describe(self) -> dict:
        out = {"kind": self.kind.value}
        if self.m is not None:
            out["m"] = self.m
        if self.expr is not None:
            out["expr"] = self.expr
        return out


def _family_fn(kind: GKind, m: float) -> Callable[[float], float]:
    if kind is GKind.BLASIUS:
        return lambda x: 0.0
    if kind is GKind.FALKNER_SKAN:
        return lambda x: m * (1.0 - x) * (1.0 + x)
    k = 2.0 * m / (m + 1.0)
    if kind is GKind.FREE_CONVECTION:
        return lambda x: k * (-x) * x
    return lambda x: k * (1.0 - x) * x


def make_builtin(kind, m: Optional[float] = None) -> GSpec:
    """Builtin family g; ``m`` is ignored for Blasius."""
    kind = GKind(kind)
    if kind is GKind.EXPRESSION:
        raise InvalidParameter("use parse_g_expression for expression kinds")
    if kind is GKind.BLASIUS:
        return GSpec(GKind.BLASIUS, None, None, _family_fn(kind, 0.0))
    if m is None or not math.isfinite(m):
        raise InvalidParameter(f"{kind.value} needs a finite parameter m")
    m = float(m)
    if m == -1.0:
        raise InvalidParameter("m = -1 makes the factor 2m/(m+1) infinite")
    return GSpec(kind, m, None, _family_fn(kind, m))


def parse_g_expression(text: str) -> GSpec:
    tree = expression.parse(text)
    return GSpec(GKind.EXPRESSION, None, text, expression.compile_node(tree))


def eval_g(g: GSpec, x: float) -> float:
    return g(x)


def _quad_eval(q, x):
    a, b, c = q
    return (a * x + b) * x + c


def _quad_roots(q) -> list[float]:
    a, b, c = q
    if a == 0.0:
        if b == 0.0:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    s = math.sqrt(disc)
    # cancellation-free form
    t = -0.5 * (b + math.copysign(s, b))
    if t == 0.0:
        return [0.0]
    return sorted({t / a, c / t})


def _quad_extrema(q, lo, hi) -> list[float]:
    a, b, _ = q
    pts = [lo, hi]
    if a != 0.0:
        v = -b / (2.0 * a)
        if lo < v < hi:
            pts.append(v)
    return pts


def _grid(lo: float, hi: float, n: int = N_CHECK) -> list[float]:
    if n < 2 or hi == lo:
        return [lo]
    return [lo + i * (hi - lo) / (n - 1) for i in range(n)]


def _refine_max(fn: Callable[[float], float], lo: float, hi: float, n: int = N_CHECK):
    """Sample ``fn`` then polish the best sample with a bounded 1-D search."""
    xs = _grid(lo, hi, n)
    vals = [fn(x) for x in xs]
    i = max(range(len(xs)), key=vals.__getitem__)
    best_x, best = xs[i], vals[i]
    if len(xs) > 1:
        from scipy.optimize import minimize_scalar

        a, b = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
        res = minimize_scalar(lambda x: -fn(x), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-13 * (1.0 + abs(best_x))})
        if res.success and -res.fun > best:
            best_x, best = float(res.x), float(-res.fun)
    return best_x, best


def max_abs_g_on_interval(g: GSpec, lo: float, hi: float) -> float:
    """max |g| on [lo, hi]; analytic for builtins, sampled then refined otherwise."""
    if lo > hi:
        raise InvalidParameter("lo must not exceed hi")
    q = g.quadratic()
    if q is not None:
        return max(abs(_quad_eval(q, x)) for x in _quad_extrema(q, lo, hi))
    _, best = _refine_max(lambda x: abs(g(x)), lo, hi)
    return best


@dataclass(frozen=True)
class HypothesisReport:
    g_at_lambda: float
    sign_ok: bool
    branch: Branch
    violations: tuple = ()
    interval: tuple = (0.0, 0.0)
    pole_detected: bool = False
    g_lambda_zero: bool = True
    identically_zero: bool = False

    @property
    def admissible(self) -> bool:
        """True when the existence theorem (or its g = 0 limit) applies."""
        if self.pole_detected or not self.g_lambda_zero:
            return False
        if self.branch is Branch.LINEAR:
            return True
        return self.sign_ok or self.identically_zero

    def describe(self, max_violations: int = 5) -> dict:
        return {"g_at_lambda": self.g_at_lambda, "sign_ok": self.sign_ok,
                "branch": self.branch.value, "admissible": self.admissible,
                "n_violations": len(self.violations),
                "violations": [list(v) for v in self.violations[:max_violations]],
                "interval": list(self.interval), "pole_detected": self.pole_detected,
                "g_lambda_zero": self.g_lambda_zero}


def resolve_branch(beta: float, lambda_: float) -> Branch:
    if abs(beta - lambda_) <= LINEAR_TOL:
        return Branch.LINEAR
    return Branch.CONCAVE if lambda_ < beta else Branch.CONVEX


def _sign_points(branch: Branch, lo: float, hi: float) -> list[float]:
    # The theorem's interval is open at lambda: (lambda, beta] or [beta, lambda).
    xs = _grid(lo, hi)
    return xs[1:] if branch is Branch.CONCAVE else xs[:-1]


def check_hypotheses(g: GSpec, alpha: float, beta: float, lambda_: float) -> HypothesisReport:
    """Check g(lambda) = 0 and the strict sign of g between beta and lambda.

    Builtin quadratics are decided analytically; expressions are sampled at
    N_CHECK points, which is evidence rather than proof.
    """
    if beta < 0 or lambda_ < 0:
        raise InvalidParameter("beta and lambda must be nonnegative")
    branch = resolve_branch(beta, lambda_)
    lo, hi = min(beta, lambda_), max(beta, lambda_)
    want = -1.0 if branch is Branch.CONCAVE else 1.0
    try:
        g_lam = g(lambda_)
        scale = max_abs_g_on_interval(g, lo, hi)
    except EvaluationError:
        return HypothesisReport(math.nan, False, branch, (), (lo, hi), True, False)
    g_zero = abs(g_lam) <= ZERO_TOL * (1.0 + scale)

    if branch is Branch.LINEAR:
        return HypothesisReport(g_lam, True, branch, (), (lo, hi), False, g_zero)

    q = g.quadratic()
    violations = []
    pole = False
    if q is not None:
        identically_zero = q == (0.0, 0.0, 0.0)
        roots_inside = [r for r in _quad_roots(q) if lo < r < hi]
        end = beta  # closed end of the theorem's interval
        ok = not identically_zero and not roots_inside and want * _quad_eval(q, end) > 0
        if not ok:
            cand = roots_inside + _sign_points(branch, lo, hi)
            violations = [(x, _quad_eval(q, x)) for x in cand if not want * _quad_eval(q, x) > 0]
            ok = False
    else:
        identically_zero = True
        for x in _sign_points(branch, lo, hi):
            try:
                v = g(x)
            except EvaluationError:
                pole = True
                violations.append((x, math.nan))
                continue
            if v != 0.0:
                identically_zero = False
            if not want * v > 0:
                violations.append((x, v))
        ok = not violations
    return HypothesisReport(g_lam, ok, branch, tuple(violations), (lo, hi), pole, g_zero,
                            identically_zero and not pole)


@dataclass(frozen=True)
class ScalingRecipe:
    """Maps a normalized solution f back to u(t) = f(sqrt(a) t) / sqrt(a)."""

    a: float

    def t_to_normalized(self, t: float) -> float:
        return math.sqrt(self.a) * t

    def to_original(self, t_norm: float, f: float, fp: float, fpp: float) -> tuple:
        """(t, u, u', u'') for a normalized sample (s, f(s), f'(s), f''(s))."""
        r = math.sqrt(self.a)
        return (t_norm / r, f / r, fp, fpp * r)

    def scale_g(self, h: GSpec) -> GSpec:
        """g = h / a, expressed in the expression language."""
        if self.a == 1.0:
            return h
        return parse_g_expression(f"{(1.0 / self.a)!r}*({h.to_text()})")


def normalize_scaling(a: float, alpha: float, beta: float, lambda_: float):
    """Normalize u''' + a u u'' + h(u') = 0 to f''' + f f'' + g(f') = 0.

    Returns ``(alpha', beta', lambda', recipe)``; only f(0) changes.
    """
    if not a > 0:
        raise InvalidParameter("scaling factor a must be positive")
    return math.sqrt(a) * alpha, beta, lambda_, ScalingRecipe(float(a))
