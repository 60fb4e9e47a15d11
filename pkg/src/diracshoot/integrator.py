"""Adaptive embedded Runge-Kutta 5(4) integration with event detection.

The stepper is the classic Dormand-Prince pair with FSAL, working on plain
float tuples (the systems here are 2- or 4-dimensional and are integrated
many thousands of times during a shooting run, so the per-step overhead
matters).  Events are located by sign bracketing over each accepted step
and refined by bisection on a cubic Hermite interpolant.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .equations import hamiltonian, rhs_autonomous, rhs_radial, rhs_shifted
from .params import Params, Tolerances

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# error weights: 5th order minus embedded 4th order
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_MAX_STEPS = 5_000_000


class EventKind(str, enum.Enum):
    V_SIGN_CHANGE = "v_sign_change"
    ENTERED_NEGATIVE_ENERGY = "entered_negative_energy"
    NORM_BELOW_ETA = "norm_below_eta"
    CERTIFICATE_FIRED = "certificate_fired"
    RMAX_REACHED = "rmax_reached"


@dataclass(frozen=True)
class Event:
    kind: EventKind
    r: float
    payload: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Detector:
    """Scalar event function g whose root (with the given crossing
    direction) marks an event.  direction: -1 crossing into g <= 0,
    +1 crossing into g >= 0, 0 any sign change."""

    kind: EventKind
    g: Callable[[float, tuple], float]
    direction: int = 0
    terminal: bool = False
    once: bool = False
    payload: Callable[[float, tuple], dict] | None = None


class IntegrationError(RuntimeError):
    """Step-size underflow; carries the trajectory integrated so far."""

    def __init__(self, message: str, partial: "Trajectory | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Trajectory:
    """Recorded integration path: samples (r, state, derivative, H) plus
    the event log.  r is strictly increasing; arrays are never mutated.
    y and dy have one row per sample; the first two columns are the (u, v)
    plane for the 2-dimensional flows."""

    r: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    H: np.ndarray
    events: tuple[Event, ...]
    status: str  # "completed" or "event:<kind>"

    def __len__(self) -> int:
        return len(self.r)

    @property
    def u(self) -> np.ndarray:
        return self.y[:, 0]

    @property
    def v(self) -> np.ndarray:
        return self.y[:, 1]

    @property
    def du(self) -> np.ndarray:
        return self.dy[:, 0]

    @property
    def dv(self) -> np.ndarray:
        return self.dy[:, 1]

    @property
    def norm1(self) -> np.ndarray:
        return np.abs(self.u) + np.abs(self.v)

    @property
    def final_state(self) -> tuple[float, float]:
        return float(self.u[-1]), float(self.v[-1])

    def events_of(self, kind: EventKind) -> list[Event]:
        return [e for e in self.events if e.kind == kind]


def _hermite(r0, y0, f0, r1, y1, f1, r):
    """Cubic Hermite interpolation of the state inside one accepted step."""
    h = r1 - r0
    t = (r - r0) / h
    t2 = t * t
    t3 = t2 * t
    c00 = 2.0 * t3 - 3.0 * t2 + 1.0
    c10 = t3 - 2.0 * t2 + t
    c01 = -2.0 * t3 + 3.0 * t2
    c11 = t3 - t2
    return tuple(
        c00 * a + c10 * h * fa + c01 * b + c11 * h * fb
        for a, fa, b, fb in zip(y0, f0, y1, f1)
    )


def _crossed(g0: float, g1: float, direction: int) -> bool:
    if direction < 0:
        return g0 > 0.0 >= g1
    if direction > 0:
        return g0 < 0.0 <= g1
    return (g0 > 0.0 >= g1) or (g0 < 0.0 <= g1)


def _initial_step(f, r0, y0, f0, r_end, rel, abs_tol):
    span = r_end - r0
    sc = [abs_tol + rel * abs(yi) for yi in y0]
    d0 = math.sqrt(sum((yi / c) ** 2 for yi, c in zip(y0, sc)) / len(y0))
    d1 = math.sqrt(sum((fi / c) ** 2 for fi, c in zip(f0, sc)) / len(y0))
    h0 = 1e-6 * span if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = tuple(yi + h0 * fi for yi, fi in zip(y0, f0))
    f1 = f(r0 + h0, y1)
    d2 = math.sqrt(sum(((a - b) / c) ** 2 for a, b, c in zip(f1, f0, sc)) / len(y0)) / h0
    if max(d1, d2) < 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, span)


def solve(
    f: Callable[[float, tuple], tuple],
    r_span: tuple[float, float],
    y0: Sequence[float],
    *,
    rel: float,
    abs_tol: float,
    detectors: Sequence[Detector] = (),
    r_eval: Sequence[float] | None = None,
    energy: Callable[[tuple], float] | None = None,
    emit_end_event: bool = True,
) -> Trajectory:
    """Integrate y' = f(r, y) over r_span with event detection.

    Samples are recorded at every accepted step, or exactly at r_eval when
    given (values interpolated on the dense output, derivatives re-evaluated
    on the interpolated state).  A terminal event truncates the trajectory
    at the refined crossing.
    """
    r0, r_end = float(r_span[0]), float(r_span[1])
    if not r_end > r0:
        raise ValueError(f"need r_end > r_start, got {r_span}")
    y = tuple(float(c) for c in y0)
    n = len(y)
    r = r0
    k1 = f(r, y)

    eval_pts = None
    eval_idx = 0
    if r_eval is not None:
        eval_pts = [float(x) for x in r_eval]
        if any(b <= a for a, b in zip(eval_pts, eval_pts[1:])):
            raise ValueError("r_eval must be strictly increasing")
        if eval_pts and (eval_pts[0] < r0 or eval_pts[-1] > r_end):
            raise ValueError("r_eval must lie within r_span")

    rs, ys, fs = [], [], []

    def record(rr, yy, ff):
        rs.append(rr)
        ys.append(yy)
        fs.append(ff)

    if eval_pts is None:
        record(r, y, k1)
    else:
        while eval_idx < len(eval_pts) and eval_pts[eval_idx] <= r:
            record(eval_pts[eval_idx], y, k1)
            eval_idx += 1

    active = list(detectors)
    g_prev = [d.g(r, y) for d in active]
    events: list[Event] = []
    status = "completed"

    def build(status_str) -> Trajectory:
        arr = np.array(ys, dtype=float).reshape(len(ys), n)
        farr = np.array(fs, dtype=float).reshape(len(fs), n)
        rarr = np.array(rs, dtype=float)
        Harr = (
            np.array([energy(tuple(row)) for row in arr], dtype=float)
            if energy is not None
            else np.full(len(rs), np.nan)
        )
        return Trajectory(rarr, arr, farr, Harr, tuple(events), status_str)

    h = _initial_step(f, r, y, k1, r_end, rel, abs_tol)
    nsteps = 0
    while r < r_end:
        nsteps += 1
        if nsteps > _MAX_STEPS:
            raise IntegrationError(f"step budget exhausted at r={r}", build("failed"))
        last = h >= r_end - r
        if last:
            h = r_end - r
        if h < 1e-14 * max(1.0, abs(r)):
            raise IntegrationError(f"step size underflow at r={r}", build("failed"))

        k2 = f(r + _C2 * h, tuple(yi + h * _A21 * a for yi, a in zip(y, k1)))
        k3 = f(r + _C3 * h, tuple(yi + h * (_A31 * a + _A32 * b) for yi, a, b in zip(y, k1, k2)))
        k4 = f(
            r + _C4 * h,
            tuple(yi + h * (_A41 * a + _A42 * b + _A43 * c) for yi, a, b, c in zip(y, k1, k2, k3)),
        )
        k5 = f(
            r + _C5 * h,
            tuple(
                yi + h * (_A51 * a + _A52 * b + _A53 * c + _A54 * d)
                for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
            ),
        )
        k6 = f(
            r + h,
            tuple(
                yi + h * (_A61 * a + _A62 * b + _A63 * c + _A64 * d + _A65 * e)
                for yi, a, b, c, d, e in zip(y, k1, k2, k3, k4, k5)
            ),
        )
        y_new = tuple(
            yi + h * (_B1 * a + _B3 * c + _B4 * d + _B5 * e + _B6 * g)
            for yi, a, c, d, e, g in zip(y, k1, k3, k4, k5, k6)
        )
        # land exactly on r_end so endpoint r_eval samples are never dropped
        r_new = r_end if last else r + h
        k7 = f(r_new, y_new)

        err = 0.0
        for yi, yn, a, c, d, e, g, s in zip(y, y_new, k1, k3, k4, k5, k6, k7):
            sc = abs_tol + rel * max(abs(yi), abs(yn))
            e_i = h * (_E1 * a + _E3 * c + _E4 * d + _E5 * e + _E6 * g + _E7 * s)
            err += (e_i / sc) ** 2
        err = math.sqrt(err / n)

        if err > 1.0:
            last = False
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            continue

        # accepted: locate events inside [r, r_new]
        stop_at = None  # (r*, y*, detector)
        fired_here: list[tuple[float, Detector]] = []
        for i, det in enumerate(active):
            if det is None:
                continue
            g1 = det.g(r_new, y_new)
            if _crossed(g_prev[i], g1, det.direction):
                # bisect on the dense output; hi_r stays on the crossed side
                # so the event condition holds at the reported point
                lo_r, hi_r = r, r_new
                g_lo = g_prev[i]
                for _ in range(80):
                    if hi_r - lo_r <= 4e-16 * max(1.0, abs(hi_r)):
                        break
                    mid = 0.5 * (lo_r + hi_r)
                    y_mid = _hermite(r, y, k1, r_new, y_new, k7, mid)
                    g_mid = det.g(mid, y_mid)
                    if _crossed(g_lo, g_mid, det.direction):
                        hi_r = mid
                        if abs(g_mid) <= abs_tol:
                            break
                    else:
                        lo_r, g_lo = mid, g_mid
                r_star = hi_r
                fired_here.append((r_star, det))
                if det.once:
                    active[i] = None
            g_prev[i] = g1

        def make_event(r_star, y_star, det) -> Event:
            payload = dict(det.payload(r_star, y_star)) if det.payload else {}
            payload["step"] = (r, r_new)  # the bracketing step of the crossing
            return Event(det.kind, r_star, payload)

        fired_here.sort(key=lambda t: t[0])
        for r_star, det in fired_here:
            if det.terminal:
                stop_at = (r_star, det)
                break
            y_star = _hermite(r, y, k1, r_new, y_new, k7, r_star)
            events.append(make_event(r_star, y_star, det))

        if stop_at is not None:
            r_star, det = stop_at
            y_star = _hermite(r, y, k1, r_new, y_new, k7, r_star)
            f_star = f(r_star, y_star) if r_star > r_span[0] else k1
            events.append(make_event(r_star, y_star, det))
            if eval_pts is None:
                record(r_star, y_star, f_star)
            else:
                while eval_idx < len(eval_pts) and eval_pts[eval_idx] <= r_star:
                    pt = eval_pts[eval_idx]
                    y_pt = _hermite(r, y, k1, r_new, y_new, k7, pt)
                    record(pt, y_pt, f(pt, y_pt))
                    eval_idx += 1
            status = f"event:{det.kind.value}"
            return build(status)

        if eval_pts is None:
            record(r_new, y_new, k7)
        else:
            while eval_idx < len(eval_pts) and eval_pts[eval_idx] <= r_new:
                pt = eval_pts[eval_idx]
                if pt == r_new:
                    record(pt, y_new, k7)
                else:
                    y_pt = _hermite(r, y, k1, r_new, y_new, k7, pt)
                    record(pt, y_pt, f(pt, y_pt))
                eval_idx += 1

        r, y, k1 = r_new, y_new, k7
        factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
        h *= max(_MIN_FACTOR, factor)

    if emit_end_event:
        events.append(Event(EventKind.RMAX_REACHED, r_end, {}))
    return build("completed")


# --- system wrappers -------------------------------------------------------


@dataclass(frozen=True)
class Radial:
    """Full radial system; singular at r = 0, start from a series state."""


@dataclass(frozen=True)
class Autonomous:
    """Hamiltonian system obtained by dropping the 1/r terms."""


@dataclass(frozen=True)
class Shifted:
    """Radial system with the singular term moved to 1/(r + rho)."""

    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("shift rho must be positive")


System = Radial | Autonomous | Shifted


def _system_rhs(system: System, p: Params) -> Callable[[float, tuple], tuple]:
    if isinstance(system, Radial):
        return lambda r, y: rhs_radial(r, y, p)
    if isinstance(system, Autonomous):
        return lambda r, y: rhs_autonomous(y, p)
    if isinstance(system, Shifted):
        rho = system.rho
        return lambda r, y: rhs_shifted(r, y, p, rho)
    raise TypeError(f"unknown system {system!r}")


def integrate(
    system: System,
    start: tuple[float, tuple[float, float]],
    p: Params,
    tol: Tolerances,
    detectors: Sequence[Detector] = (),
    r_end: float | None = None,
    r_eval: Sequence[float] | None = None,
) -> Trajectory:
    """Integrate one of the three flows from start = (r_start, (u, v)).

    Runs up to r_end (default tol.rmax) or to the first terminal event,
    recording the energy trace alongside the samples.
    """
    tol = tol.resolved(p)
    r_start, y_start = start
    if isinstance(system, Radial) and r_start <= 0.0:
        raise ValueError("the radial system must start at r > 0")
    end = float(r_end) if r_end is not None else float(tol.rmax)
    return solve(
        _system_rhs(system, p),
        (r_start, end),
        y_start,
        rel=tol.rel,
        abs_tol=tol.abs,
        detectors=detectors,
        r_eval=r_eval,
        energy=lambda y: hamiltonian(y, p),
    )
