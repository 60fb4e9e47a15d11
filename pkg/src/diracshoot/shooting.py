"""Classification of initial data and ground-state search by bisection.

A datum lambda = v(0) is classified by the fate of its radial trajectory:
capture by the negative-energy region after k sign changes of v (verdict
"A", k nodes), decay to the origin (verdict "I-candidate"), or neither
within the horizon ("undecided").  The node-free ground state sits at the
supremum of the node-free captured set and is located by bisection.

Shooting into a saddle point cannot hold the connection forever: the best
double-precision trajectory leaves the origin again after its closest
approach.  The converged profile is therefore assembled from the numerical
trajectory up to that closest approach and the exact decaying solution of
the linearized system (a modified Bessel pair) beyond it; the matched tail
solves the radial system to below the integrator's own residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import k0 as bessel_k0, k1 as bessel_k1

from .equations import hamiltonian, taylor_start
from .integrator import (
    Detector,
    Event,
    EventKind,
    IntegrationError,
    Radial,
    Trajectory,
    integrate,
)
from .params import Params, Tolerances

VERDICT_A = "A"
VERDICT_I = "I-candidate"
VERDICT_UNDECIDED = "undecided"


class BracketError(RuntimeError):
    """No node-bearing datum found while doubling the initial datum."""


@dataclass(frozen=True)
class Certificate:
    """Fired capture certificate: at radius R the trajectory satisfies
    H < C0/R, u v > 0 and v^2 < 2(m - omega), which pins the datum to
    at most one further sign change."""

    R: float
    H_at_R: float
    uv_product: float
    v_squared: float
    C0: float


@dataclass(frozen=True)
class Classification:
    lam: float
    verdict: str
    node_count: int
    evidence: dict
    summary: dict
    trajectory: Trajectory | None = None

    @property
    def certificate(self) -> Certificate | None:
        return self.evidence.get("certificate")


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    history: tuple[Classification, ...]

    def __post_init__(self):
        # a degenerate bracket (lo == hi) is allowed and returned as-is
        if not self.lo <= self.hi:
            raise ValueError(f"need lo <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class GroundState:
    lambda_star: float
    bracket_width: float
    profile: Trajectory
    decay_slope: float
    node_count: int
    converged: bool
    anchor_r: float
    closest_approach: float
    history: tuple[Classification, ...] = ()


def universal_constant(p: Params) -> float:
    """Capture-certificate constant C0 = (m-omega)^2 / (4 (3m - omega))."""
    return p.gap ** 2 / (4.0 * (3.0 * p.m - p.omega))


def certificate_check(r: float, s: tuple[float, float], p: Params) -> Certificate | None:
    """Evaluate the capture certificate at a single point (empty for r <= 1)."""
    if r <= 1.0:
        return None
    u, v = s
    c0 = universal_constant(p)
    H = hamiltonian(s, p)
    if H < c0 / r and u * v > 0.0 and v * v < 2.0 * p.gap:
        return Certificate(r, H, u * v, v * v, c0)
    return None


def _start_radius(lam: float, tol: Tolerances) -> float:
    # series start is valid while lambda^2 r0 is small
    return tol.r0 / max(1.0, lam * lam)


def _detectors(p: Params, tol: Tolerances, stop_at_first_node: bool) -> list[Detector]:
    delta = tol.delta
    eta = tol.eta
    gap2 = 2.0 * p.gap
    c0 = universal_constant(p)

    def g_energy(r, y):
        return hamiltonian(y, p) + delta

    def g_norm(r, y):
        return abs(y[0]) + abs(y[1]) - eta

    def g_cert(r, y):
        if r <= 1.0:
            return -1.0
        return min(c0 / r - hamiltonian(y, p), y[0] * y[1], gap2 - y[1] * y[1])

    return [
        Detector(
            EventKind.V_SIGN_CHANGE,
            lambda r, y: y[1],
            direction=0,
            terminal=stop_at_first_node,
            payload=lambda r, y: {"u": y[0]},
        ),
        Detector(
            EventKind.ENTERED_NEGATIVE_ENERGY,
            g_energy,
            direction=-1,
            terminal=True,
            payload=lambda r, y: {"H": hamiltonian(y, p)},
        ),
        Detector(
            EventKind.NORM_BELOW_ETA,
            g_norm,
            direction=-1,
            terminal=True,
            payload=lambda r, y: {"norm": abs(y[0]) + abs(y[1]), "H": hamiltonian(y, p)},
        ),
        Detector(
            EventKind.CERTIFICATE_FIRED,
            g_cert,
            direction=1,
            once=True,
            payload=lambda r, y: {
                "H": hamiltonian(y, p),
                "uv": y[0] * y[1],
                "v2": y[1] * y[1],
            },
        ),
    ]


def _certificate_from_events(traj: Trajectory, p: Params) -> Certificate | None:
    fired = traj.events_of(EventKind.CERTIFICATE_FIRED)
    if not fired:
        return None
    e = fired[0]
    return Certificate(e.r, e.payload["H"], e.payload["uv"], e.payload["v2"], universal_constant(p))


def _summary(traj: Trajectory) -> dict:
    n1 = traj.norm1
    i = int(np.argmin(n1))
    return {
        "r_end": float(traj.r[-1]),
        "H_end": float(traj.H[-1]),
        "min_norm1": float(n1[i]),
        "r_at_min": float(traj.r[i]),
        "samples": len(traj),
    }


def classify(
    lam: float,
    p: Params,
    tol: Tolerances,
    *,
    stop_at_first_node: bool = False,
    horizon: float | None = None,
    keep_trajectory: bool = True,
) -> Classification:
    """Classify one initial datum by integrating its radial trajectory.

    Counts sign changes of v; stops at the first entry into {H < -delta}
    (verdict A(k)) or at the first drop of |u| + |v| below eta while the
    energy is still above -delta (verdict I-candidate(k)).  A trajectory
    that reaches the horizon undecided is reported as such.
    """
    if lam <= 0.0:
        raise ValueError(f"datum must be positive, got {lam}")
    tol = tol.resolved(p)
    r0 = _start_radius(lam, tol)
    y0 = taylor_start(lam, p, r0)
    rmax = float(horizon) if horizon is not None else tol.rmax

    H0 = hamiltonian(y0, p)
    if H0 < -tol.delta:
        # the datum starts inside the capture region and H only decreases
        ev = Event(EventKind.ENTERED_NEGATIVE_ENERGY, r0, {"H": H0})
        from .equations import rhs_radial

        traj = Trajectory(
            np.array([r0]),
            np.array([[y0[0], y0[1]]]),
            np.array([list(rhs_radial(r0, y0, p))]),
            np.array([H0]),
            (ev,),
            "event:entered_negative_energy",
        )
        return Classification(
            lam,
            VERDICT_A,
            0,
            {"r": r0, "H": H0, "certificate": None},
            _summary(traj),
            traj if keep_trajectory else None,
        )

    dets = _detectors(p, tol, stop_at_first_node)
    try:
        traj = integrate(Radial(), (r0, y0), p, tol, detectors=dets, r_end=rmax)
    except IntegrationError as err:
        traj = err.partial
        ev = {"r": float("nan"), "H": float("nan"), "certificate": None, "note": str(err)}
        summ = _summary(traj) if traj is not None and len(traj) else {}
        nodes = len(traj.events_of(EventKind.V_SIGN_CHANGE)) if traj is not None else 0
        return Classification(
            lam, VERDICT_UNDECIDED, nodes, ev, summ, traj if keep_trajectory else None
        )

    cert = _certificate_from_events(traj, p)
    terminal = traj.events[-1] if traj.events else None
    nodes_before = lambda r: sum(
        1 for e in traj.events if e.kind == EventKind.V_SIGN_CHANGE and e.r < r
    )

    if terminal is not None and terminal.kind == EventKind.ENTERED_NEGATIVE_ENERGY:
        k = nodes_before(terminal.r)
        verdict, evid = VERDICT_A, {"r": terminal.r, "H": terminal.payload["H"], "certificate": cert}
    elif terminal is not None and terminal.kind == EventKind.NORM_BELOW_ETA:
        k = nodes_before(terminal.r)
        verdict, evid = VERDICT_I, {"r": terminal.r, "H": terminal.payload["H"], "certificate": cert}
    elif stop_at_first_node and terminal is not None and terminal.kind == EventKind.V_SIGN_CHANGE:
        k = 1
        verdict, evid = (
            VERDICT_UNDECIDED,
            {"r": terminal.r, "H": float(traj.H[-1]), "certificate": cert, "note": "stopped at first node"},
        )
    else:
        k = len(traj.events_of(EventKind.V_SIGN_CHANGE))
        u_end, v_end = traj.final_state
        H_end = float(traj.H[-1])
        if abs(u_end) + abs(v_end) < tol.eta and H_end >= -tol.delta:
            verdict, evid = VERDICT_I, {"r": float(traj.r[-1]), "H": H_end, "certificate": cert}
        else:
            verdict, evid = (
                VERDICT_UNDECIDED,
                {"r": float(traj.r[-1]), "H": H_end, "certificate": cert, "note": "horizon reached"},
            )

    return Classification(lam, verdict, k, evid, _summary(traj), traj if keep_trajectory else None)


def bracket_search(p: Params, tol: Tolerances, max_factor: float = 1e6) -> Bracket:
    """Bracket the node-free/nodal transition by doubling the datum.

    Starts at sqrt(2(m-omega)) (guaranteed captured without nodes) and
    doubles until a trajectory shows a sign change of v.
    """
    tol = tol.resolved(p)
    lam0 = math.sqrt(2.0 * p.gap)
    lam = lam0
    history: list[Classification] = []
    last_a0 = None
    while lam <= max_factor * lam0:
        c = classify(lam, p, tol, stop_at_first_node=True, keep_trajectory=False)
        history.append(c)
        if c.node_count >= 1:
            if last_a0 is None:
                raise BracketError(
                    f"first datum {lam} already has a node; no node-free lower bound"
                )
            return Bracket(last_a0.lam, c.lam, tuple(history))
        if c.verdict == VERDICT_A and c.node_count == 0:
            last_a0 = c
        lam *= 2.0
    raise BracketError(f"no sign change found up to lambda = {max_factor * lam0:.3e}")


def decay_fit(t: Trajectory, window: tuple[float, float]) -> float:
    """Least-squares slope of log(|u| + |v|) over the radius window."""
    r_a, r_b = window
    if not r_a < r_b:
        raise ValueError(f"need r_a < r_b, got {window}")
    mask = (t.r >= r_a) & (t.r <= r_b)
    if int(mask.sum()) < 2:
        raise ValueError("window contains fewer than two samples")
    n1 = t.norm1[mask]
    if np.any(n1 <= 0.0):
        raise ValueError("window contains non-positive |u| + |v|")
    return float(np.polyfit(t.r[mask], np.log(n1), 1)[0])


def _tail_basis(r, p: Params):
    """Decaying solution of the linearized radial system.

    (u, v) = (mu K1(mu r)/(m+omega), K0(mu r)) with mu = sqrt(m^2 - omega^2)
    solves u' + u/r = -(m-omega) v, v' = -(m+omega) u exactly.
    """
    mu = math.sqrt(p.m * p.m - p.omega * p.omega)
    x = mu * np.asarray(r, dtype=float)
    bu = mu * bessel_k1(x) / (p.m + p.omega)
    bv = bessel_k0(x)
    dbu = -mu * mu * (bessel_k0(x) + np.where(x > 0, bessel_k1(x) / np.where(x > 0, x, 1.0), 0.0)) / (
        p.m + p.omega
    )
    dbv = -mu * bessel_k1(x)
    return bu, bv, dbu, dbv


def extend_with_decay_tail(
    traj: Trajectory, p: Params, r_end: float, n_tail: int = 256
) -> tuple[Trajectory, float, float]:
    """Truncate a near-connection trajectory at its closest approach to the
    origin and continue it with the matched decaying tail up to r_end.

    Returns (profile, anchor_r, tail_amplitude).  The tail is matched by
    least squares against the last reliable decade of the numerical decay.
    """
    n1 = traj.norm1
    eta_events = traj.events_of(EventKind.NORM_BELOW_ETA)
    if eta_events:
        i_c = int(np.searchsorted(traj.r, eta_events[0].r, side="right")) - 1
    else:
        i_c = int(np.argmin(n1))
    i_c = max(i_c, 1)
    r_c = float(traj.r[i_c])

    window = (n1[: i_c + 1] <= 1e-2) & (traj.r[: i_c + 1] >= 0.5 * r_c)
    idx = np.nonzero(window)[0]
    if len(idx) < 2:
        idx = np.arange(max(0, i_c - 10), i_c + 1)
    bu, bv, _, _ = _tail_basis(traj.r[idx], p)
    num = float(np.dot(traj.u[idx], bu) + np.dot(traj.v[idx], bv))
    den = float(np.dot(bu, bu) + np.dot(bv, bv))
    amp = num / den

    r_tail = np.linspace(r_c, float(r_end), n_tail + 1)[1:]
    bu, bv, dbu, dbv = _tail_basis(r_tail, p)
    u_tail, v_tail = amp * bu, amp * bv
    H_tail = np.array([hamiltonian((uu, vv), p) for uu, vv in zip(u_tail, v_tail)])

    profile = Trajectory(
        np.concatenate([traj.r[: i_c + 1], r_tail]),
        np.concatenate([traj.y[: i_c + 1], np.column_stack([u_tail, v_tail])]),
        np.concatenate([traj.dy[: i_c + 1], np.column_stack([amp * dbu, amp * dbv])]),
        np.concatenate([traj.H[: i_c + 1], H_tail]),
        tuple(e for e in traj.events if e.r <= r_c),
        "completed",
    )
    return profile, r_c, amp


def _decay_window(profile: Trajectory, anchor_r: float, tol: Tolerances) -> tuple[float, float]:
    """Last decade of radius with eta < |u|+|v| < 1e-2 before the anchor."""
    mask = (profile.r <= anchor_r) & (profile.norm1 < 1e-2) & (profile.norm1 > tol.eta)
    rs = profile.r[mask]
    if len(rs) < 2:
        raise ValueError("no usable decay window before the anchor")
    r_a = max(float(rs[0]), anchor_r / 10.0)
    return (r_a, anchor_r)


def bisect(
    bracket: Bracket,
    p: Params,
    tol: Tolerances,
    lambda_tol: float = 0.0,
    max_iter: int = 200,
) -> GroundState:
    """Bisection on the node count: node-free captured data move the lower
    endpoint, any datum with a sign change moves the upper one.

    With lambda_tol = 0 the loop runs until the bracket collapses to one
    ulp.  The returned profile is the best near-connection run, truncated
    at its closest approach and continued with the matched decay tail.
    """
    tol = tol.resolved(p)
    lo, hi = bracket.lo, bracket.hi
    history = list(bracket.history)
    converged = True
    connection = None  # datum whose trajectory reached the eta tube

    for _ in range(max_iter):
        width = hi - lo
        mid = 0.5 * (lo + hi)
        if width <= lambda_tol or mid <= lo or mid >= hi:
            break
        c = classify(mid, p, tol, stop_at_first_node=True, keep_trajectory=False)
        history.append(c)
        if c.node_count >= 1:
            hi = mid
        elif c.verdict == VERDICT_A:
            lo = mid
        elif c.verdict == VERDICT_I:
            connection = mid
            break
        else:
            # undecided without a node: retry once on a doubled horizon,
            # then count as a lower point while the energy stayed positive
            c2 = classify(mid, p, tol, stop_at_first_node=True, horizon=2.0 * tol.rmax)
            history.append(c2)
            if c2.node_count >= 1:
                hi = mid
            elif c2.verdict == VERDICT_A:
                lo = mid
            elif c2.verdict == VERDICT_I:
                connection = mid
                break
            else:
                converged = False
                lo = mid

    # full-horizon probes select the profile datum; they are not bisection
    # side decisions, so they stay out of the history
    probes = {lo, hi, 0.5 * (lo + hi)} if connection is None else {connection}
    candidates = [classify(lam_c, p, tol) for lam_c in sorted(probes)]

    def nodes_before_min(c: Classification) -> int:
        r_min = c.summary["r_at_min"]
        return sum(1 for e in c.trajectory.events if e.kind == EventKind.V_SIGN_CHANGE and e.r < r_min)

    ideal = [c for c in candidates if c.verdict == VERDICT_I and c.node_count == 0]
    clean = [c for c in candidates if nodes_before_min(c) == 0]
    if ideal:
        best = ideal[0]
    elif clean:
        best = min(clean, key=lambda c: c.summary["min_norm1"])
    else:
        converged = False
        best = min(candidates, key=lambda c: c.summary["min_norm1"])

    profile, anchor_r, _amp = extend_with_decay_tail(best.trajectory, p, tol.rmax)
    node_count = sum(1 for e in profile.events if e.kind == EventKind.V_SIGN_CHANGE)
    slope = decay_fit(profile, _decay_window(profile, anchor_r, tol))

    return GroundState(
        lambda_star=best.lam,
        bracket_width=hi - lo,
        profile=profile,
        decay_slope=slope,
        node_count=node_count,
        converged=converged and node_count == 0,
        anchor_r=anchor_r,
        closest_approach=best.summary["min_norm1"],
        history=tuple(history),
    )


def ground_state(p: Params, tol: Tolerances, lambda_tol: float = 0.0) -> GroundState:
    """Full pipeline: bracket the transition, bisect, assemble the profile."""
    return bisect(bracket_search(p, tol), p, tol, lambda_tol=lambda_tol)
