"""Adaptive Dormand-Prince 5(4) integration of (f, f', f'') with events.

The state vector is tiny (three components), so everything here works on
plain Python floats; numpy would only add per-call overhead.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional

from .errors import InvalidParameter, StepUnderflow
from .gfamily import GSpec


class State(NamedTuple):
    t: float
    f: float
    fp: float
    fpp: float


class EventKind(str, enum.Enum):
    FPP_ZERO = "FppZero"
    FP_HITS_LAMBDA = "FpHitsLambda"


class Termination(str, enum.Enum):
    HORIZON = "HorizonReached"
    EVENT = "EventStop"
    BLOWUP = "BlowUp"
    UNDERFLOW = "StepUnderflow"
    SETTLED = "Settled"
    MAX_STEPS = "MaxSteps"


@dataclass(frozen=True)
class EventRecord:
    kind: EventKind
    t_event: float
    state: State


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1.0
    T_max: float = 50.0
    blowup_threshold: float = 1e8
    event_tol: float = 1e-12
    max_steps: int = 1_000_000
    # degenerate-shot guard: |f''| / min(1, |f|) and |g(f')| both below
    # settle_tol*(1+|gamma|) means the shot sits on a linear solution;
    # 0 disables the guard.
    settle_tol: float = 1e-8

    def __post_init__(self):
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise InvalidParameter("need 0 < h_min <= h_init <= h_max")
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.event_tol > 0):
            raise InvalidParameter("tolerances must be positive")
        if not self.T_max > 0:
            raise InvalidParameter("T_max must be positive")
        if self.max_steps < 1 or self.settle_tol < 0:
            raise InvalidParameter("max_steps >= 1 and settle_tol >= 0 required")

    def replace(self, **changes) -> "IntegratorConfig":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass
class Trajectory:
    samples: list
    events: list
    termination: Termination
    g_used: GSpec
    gamma: float
    lambda_: float
    n_steps: int = 0
    n_rejected: int = 0
    # horizon the run was asked to reach; a settled run continues linearly to it
    t_max: float = math.inf

    @property
    def final(self) -> State:
        return self.samples[-1]

    def column(self, name: str) -> list:
        return [getattr(s, name) for s in self.samples]


# Dormand-Prince 5(4) tableau
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                                22 / 525, -1 / 40)


def rhs(state, g: GSpec) -> tuple[float, float, float]:
    """(f', f'', f''') for f''' = -f f'' - g(f')."""
    _, f, fp, fpp = state
    return (fp, fpp, -f * fpp - g(fp))


def _deriv(y, gf):
    f, fp, fpp = y
    return (fp, fpp, -f * fpp - gf(fp))


def _dp_step(y, k1, h, gf):
    """One DP5(4) step; returns (y_new, k7, local_error_vector).

    Unrolled over the three components: this is the hot loop of every shot.
    """
    f0, p0, q0 = y
    a1, b1, c1 = k1

    def d(f, p, q):
        return p, q, -f * q - gf(p)

    a2, b2, c2 = d(f0 + h * _A21 * a1, p0 + h * _A21 * b1, q0 + h * _A21 * c1)
    a3, b3, c3 = d(f0 + h * (_A31 * a1 + _A32 * a2), p0 + h * (_A31 * b1 + _A32 * b2),
                   q0 + h * (_A31 * c1 + _A32 * c2))
    a4, b4, c4 = d(f0 + h * (_A41 * a1 + _A42 * a2 + _A43 * a3),
                   p0 + h * (_A41 * b1 + _A42 * b2 + _A43 * b3),
                   q0 + h * (_A41 * c1 + _A42 * c2 + _A43 * c3))
    a5, b5, c5 = d(f0 + h * (_A51 * a1 + _A52 * a2 + _A53 * a3 + _A54 * a4),
                   p0 + h * (_A51 * b1 + _A52 * b2 + _A53 * b3 + _A54 * b4),
                   q0 + h * (_A51 * c1 + _A52 * c2 + _A53 * c3 + _A54 * c4))
    a6, b6, c6 = d(f0 + h * (_A61 * a1 + _A62 * a2 + _A63 * a3 + _A64 * a4 + _A65 * a5),
                   p0 + h * (_A61 * b1 + _A62 * b2 + _A63 * b3 + _A64 * b4 + _A65 * b5),
                   q0 + h * (_A61 * c1 + _A62 * c2 + _A63 * c3 + _A64 * c4 + _A65 * c5))
    y_new = (f0 + h * (_B1 * a1 + _B3 * a3 + _B4 * a4 + _B5 * a5 + _B6 * a6),
             p0 + h * (_B1 * b1 + _B3 * b3 + _B4 * b4 + _B5 * b5 + _B6 * b6),
             q0 + h * (_B1 * c1 + _B3 * c3 + _B4 * c4 + _B5 * c5 + _B6 * c6))
    k7 = a7, b7, c7 = d(*y_new)
    err = (h * (_E1 * a1 + _E3 * a3 + _E4 * a4 + _E5 * a5 + _E6 * a6 + _E7 * a7),
           h * (_E1 * b1 + _E3 * b3 + _E4 * b4 + _E5 * b5 + _E6 * b6 + _E7 * b7),
           h * (_E1 * c1 + _E3 * c3 + _E4 * c4 + _E5 * c5 + _E6 * c6 + _E7 * c7))
    return y_new, k7, err


def _scaled_norm(err, y, y_new, rel_tol, abs_tol) -> float:
    worst = 0.0
    for e, a, b in zip(err, y, y_new):
        r = abs(e) / (abs_tol + rel_tol * max(abs(a), abs(b)))
        if not r <= worst:  # catches nan
            worst = r if r == r else math.inf
    return worst


def step(state: State, h: float, g: GSpec, rel_tol: float = 1e-10,
         abs_tol: float = 1e-12) -> tuple[State, float]:
    """A single DP5(4) step; the error estimate is the max scaled component."""
    if not h > 0:
        raise InvalidParameter("step size must be positive")
    y = (state.f, state.fp, state.fpp)
    y_new, _, err = _dp_step(y, _deriv(y, g), h, g)
    return State(state.t + h, *y_new), _scaled_norm(err, y, y_new, rel_tol, abs_tol)


def _event_value(kind: EventKind, y, lambda_: float) -> float:
    return y[2] if kind is EventKind.FPP_ZERO else y[1] - lambda_


def integrate_with_events(init: State, g: GSpec, lambda_: float,
                          watch: Iterable[EventKind] = (),
                          cfg: Optional[IntegratorConfig] = None,
                          directions: Optional[Mapping[EventKind, int]] = None) -> Trajectory:
    """Integrate from ``init`` until an event, settling, blow-up or T_max.

    ``directions`` maps an event kind to +1 (fire when the event function
    becomes positive), -1 (becomes negative) or 0 (any sign change away
    from the last nonzero sign). Events are located by bisecting the step
    length and re-integrating the sub-step from the step's start.
    """
    cfg = cfg or IntegratorConfig()
    if init.t != 0.0:
        raise InvalidParameter("integration starts at t = 0")
    bound = max(1.0, abs(init.f), abs(init.fp), abs(lambda_))
    if not cfg.blowup_threshold > bound:
        raise InvalidParameter("blowup_threshold must exceed max(1, |alpha|, beta, lambda)")
    directions = dict(directions or {})
    watch = [EventKind(k) for k in watch]
    gf = g._fn
    gamma = init.fpp
    settle = cfg.settle_tol * (1.0 + abs(gamma))
    value_tol = {EventKind.FPP_ZERO: cfg.event_tol * (1.0 + abs(gamma)),
                 EventKind.FP_HITS_LAMBDA: cfg.event_tol * (1.0 + abs(init.fp) + abs(lambda_))}

    def settled(yy) -> bool:
        # in the tail f' - lambda ~ -f''/f, so a small |f| leaves f' still drifting
        return abs(yy[2]) <= settle * min(1.0, abs(yy[0])) and abs(gf(yy[1])) <= settle

    y = (init.f, init.fp, init.fpp)
    samples = [State(0.0, *y)]
    events: list = []
    last_sign = {}
    for kind in watch:
        v = _event_value(kind, y, lambda_)
        last_sign[kind] = math.copysign(1.0, v) if v != 0.0 else 0.0

    def fired(kind, v) -> bool:
        d = directions.get(kind, 0)
        if d:
            return d * v > 0
        s = last_sign[kind]
        return s != 0.0 and v * s < 0

    traj = Trajectory(samples, events, Termination.HORIZON, g, gamma, lambda_,
                      t_max=cfg.T_max)
    if cfg.settle_tol > 0 and settled(y):
        traj.termination = Termination.SETTLED
        return traj

    t = 0.0
    h = cfg.h_init
    k1 = _deriv(y, gf)
    # d != 0 events must start on their non-firing side to be armed
    armed = {k: not (directions.get(k, 0) and fired(k, _event_value(k, y, lambda_))) for k in watch}
    for n in range(cfg.max_steps):
        remaining = cfg.T_max - t
        if remaining <= 1e-14 * cfg.T_max:
            traj.termination = Termination.HORIZON
            return traj
        h = min(h, cfg.h_max)
        last = h >= remaining
        if last:
            h = remaining
        while True:
            y_new, k7, err = _dp_step(y, k1, h, gf)
            en = _scaled_norm(err, y, y_new, cfg.rel_tol, cfg.abs_tol)
            if en <= 1.0:
                break
            traj.n_rejected += 1
            last = False
            h *= max(0.2, 0.9 * en ** -0.2) if math.isfinite(en) else 0.2
            if h < cfg.h_min:
                traj.termination = Termination.UNDERFLOW
                raise StepUnderflow(f"step size {h:.3e} below h_min at t={t:.17g}", traj)
        t_new = cfg.T_max if last else t + h
        traj.n_steps = n + 1

        hit = None
        for kind in watch:
            v_new = _event_value(kind, y_new, lambda_)
            if armed[kind] and fired(kind, v_new):
                lo, hi, y_lo, y_hi = 0.0, h, y, y_new
                width = cfg.event_tol * (1.0 + abs(t))
                vtol = value_tol[kind]
                # narrow until both the bracket and the event value are small,
                # or the bracket cannot be split in floating point
                for _ in range(200):
                    if hi - lo <= width and abs(v_new) <= vtol:
                        break
                    mid = 0.5 * (lo + hi)
                    if not lo < mid < hi or not t < t + mid < t + hi:
                        break
                    y_mid = _dp_step(y, k1, mid, gf)[0]
                    v_mid = _event_value(kind, y_mid, lambda_)
                    if fired(kind, v_mid):
                        hi, y_hi, v_new = mid, y_mid, v_mid
                    else:
                        lo, y_lo = mid, y_mid
                if hit is None or hi < hit[1]:
                    hit = (kind, hi, y_hi, lo, y_lo)
            elif directions.get(kind, 0):
                armed[kind] = armed[kind] or not fired(kind, v_new)
            elif v_new != 0.0:
                last_sign[kind] = math.copysign(1.0, v_new)

        if hit is not None:
            kind, hi, y_hi, lo, y_lo = hit
            t_hit = t_new if hi == h else t + hi
            events.append(EventRecord(kind, t_hit, State(t_hit, *y_hi)))
            if cfg.settle_tol > 0 and settled(y_hi):
                # crossing inside the settled neighbourhood: keep the last
                # point before it, where the strip's signs still hold
                if lo > 0.0:
                    samples.append(State(t + lo, *y_lo))
                traj.termination = Termination.SETTLED
            else:
                samples.append(State(t_hit, *y_hi))
                traj.termination = Termination.EVENT
            return traj

        t, y, k1 = t_new, y_new, k7
        samples.append(State(t, *y))
        if cfg.settle_tol > 0 and settled(y):
            traj.termination = Termination.SETTLED
            return traj
        if max(abs(y[0]), abs(y[1]), abs(y[2])) > cfg.blowup_threshold:
            traj.termination = Termination.BLOWUP
            return traj
        h *= min(5.0, max(0.2, 0.9 * en ** -0.2)) if en > 0 else 5.0
    traj.termination = Termination.MAX_STEPS
    return traj
