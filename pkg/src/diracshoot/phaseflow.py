"""Phase-plane diagnostics: energy level sets, capture spirals, and the
shifted-system comparison.

The energy is a biquadratic polynomial, so for a given v the set
{H(u, v) = c} solves in closed form: with q = u^2 + v^2,

    H = q^2/4 + (m + omega) q / 2 - m v^2

which is quadratic in q.  Level curves are traced exactly from the
positive root q(v); no grid contouring is needed and every emitted point
satisfies |H - c| at rounding level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .equations import hamiltonian, taylor_start
from .integrator import Detector, EventKind, Radial, Trajectory, integrate
from .params import Params, Tolerances
from .shooting import VERDICT_A, classify


@dataclass(frozen=True)
class LevelSet:
    level: float
    pieces: tuple[np.ndarray, ...]  # each piece is an (n, 2) closed polyline

    @property
    def points(self) -> np.ndarray:
        if not self.pieces:
            return np.zeros((0, 2))
        return np.vstack(self.pieces)


@dataclass(frozen=True)
class AttractionReport:
    lam: float
    entered_at: float
    terminal_distance: float
    nearest_equilibrium: tuple[float, float]
    u_sign_alternations: int
    trajectory: Trajectory


def _radial_q(level: float, v: float, p: Params) -> float:
    """Positive root q = u^2 + v^2 of H(u, v) = level at fixed v.

    Returns a negative number when no real intersection exists.
    """
    mp = p.m + p.omega
    disc = mp * mp + 4.0 * (p.m * v * v + level)
    if disc < 0.0:
        return -1.0
    return -mp + math.sqrt(disc)


def level_set(level: float, p: Params, resolution: int = 512) -> LevelSet:
    """Trace {H = level} as ordered closed polylines.

    The curve is parameterized by v: u = +-sqrt(q(v) - v^2) on the v-spans
    where the radicand is nonnegative.  Level values below the global
    minimum -(m-omega)^2/4 give the empty set; the minimum itself gives
    the two equilibrium points.
    """
    h_min = -(p.gap ** 2) / 4.0
    if level < h_min - 1e-12:
        return LevelSet(level, ())

    def g(v: float) -> float:
        return _radial_q(level, v, p) - v * v

    v_box = 2.0 * math.sqrt(1.0 + max(level, 0.0) + p.m + p.omega)
    scan = np.linspace(-v_box, v_box, max(8 * resolution, 1024) + 1)
    gs = np.array([g(v) for v in scan])

    spans: list[tuple[float, float]] = []
    inside = gs >= 0.0
    i = 0
    n = len(scan)
    while i < n:
        if inside[i]:
            j = i
            while j + 1 < n and inside[j + 1]:
                j += 1
            va = scan[i] if i == 0 else brentq(g, scan[i - 1], scan[i])
            vb = scan[j] if j == n - 1 else brentq(g, scan[j], scan[j + 1])
            spans.append((va, vb))
            i = j + 1
        else:
            i += 1

    if not spans and level <= h_min + 1e-12:
        v0 = math.sqrt(p.gap)
        return LevelSet(level, (np.array([[0.0, v0]]), np.array([[0.0, -v0]])))

    # the zero level pinches at the saddle (0, 0): split the span so both
    # lobes pass through the origin exactly
    if abs(g(0.0)) <= 1e-9:
        split = []
        for va, vb in spans:
            if va < 0.0 < vb:
                split.extend([(va, 0.0), (0.0, vb)])
            else:
                split.append((va, vb))
        spans = split

    pieces = []
    for va, vb in spans:
        vs = np.linspace(va, vb, resolution)
        us = np.sqrt(np.maximum([g(v) for v in vs], 0.0))
        right = np.column_stack([us, vs])
        left = np.column_stack([-us[-2:0:-1], vs[-2:0:-1]])
        closed = np.vstack([right, left, right[:1]])
        pieces.append(closed)
    return LevelSet(level, tuple(pieces))


def attraction_report(lam: float, p: Params, tol: Tolerances) -> AttractionReport:
    """Follow a captured datum to the horizon and report where it lands.

    The datum must classify as captured (verdict A); the trajectory is then
    re-integrated without the terminal energy event so the spiral toward
    (0, +-sqrt(m-omega)) is visible.  Spiraling is quantified by the number
    of sign alternations of u after entering {H < -delta}.
    """
    tol = tol.resolved(p)
    cls = classify(lam, p, tol)
    if cls.verdict != VERDICT_A:
        raise ValueError(
            f"attraction_report needs a captured datum, got {cls.verdict}({cls.node_count})"
        )
    entered_at = cls.evidence["r"]

    r0 = tol.r0 / max(1.0, lam * lam)
    det = [
        Detector(
            EventKind.V_SIGN_CHANGE,
            lambda r, y: y[1],
            direction=0,
            payload=lambda r, y: {"u": y[0]},
        )
    ]
    traj = integrate(Radial(), (r0, taylor_start(lam, p, r0)), p, tol, detectors=det)

    v0 = math.sqrt(p.gap)
    u_end, v_end = traj.final_state
    d_plus = math.hypot(u_end, v_end - v0)
    d_minus = math.hypot(u_end, v_end + v0)
    nearest = (0.0, v0) if d_plus <= d_minus else (0.0, -v0)

    mask = traj.r >= entered_at
    signs = np.sign(traj.u[mask])
    signs = signs[signs != 0.0]
    alternations = int(np.count_nonzero(np.diff(signs) != 0.0))

    return AttractionReport(
        lam=lam,
        entered_at=float(entered_at),
        terminal_distance=float(min(d_plus, d_minus)),
        nearest_equilibrium=nearest,
        u_sign_alternations=alternations,
        trajectory=traj,
    )


def stability_compare(
    rho: float,
    start: tuple[float, float],
    T: float,
    p: Params,
    tol: Tolerances,
    n_grid: int = 512,
) -> float:
    """Sup-norm deviation between the shifted and autonomous flows on [0, T].

    The shifted system carries the singular term as u/(r + rho); its flow
    approaches the autonomous one at rate O(1/rho) on bounded intervals.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if T < 0.0:
        raise ValueError("T must be nonnegative")
    if T == 0.0:
        return 0.0
    from .integrator import Autonomous, Shifted

    tol = tol.resolved(p)
    grid = np.linspace(0.0, float(T), n_grid)
    auto = integrate(Autonomous(), (0.0, start), p, tol, r_end=float(T), r_eval=grid)
    shift = integrate(Shifted(rho), (0.0, start), p, tol, r_end=float(T), r_eval=grid)
    return float(np.max(np.abs(auto.y[:, 0] - shift.y[:, 0]) + np.abs(auto.y[:, 1] - shift.y[:, 1])))
