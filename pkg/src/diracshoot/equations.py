"""Right-hand sides, energy functions and the series start at the origin.

The radial system for (u, v) with datum v(0) = lambda reads

    u' + (S+1) u / r = (u^2 + v^2) v - (m - omega) v
    v' - S v / r     = -(u^2 + v^2) u - (m + omega) u

and is singular at r = 0.  Dropping the 1/r terms gives the autonomous
Hamiltonian system whose energy H confines every trajectory.
"""

from __future__ import annotations

import math

from .params import Params

State = tuple[float, float]


def rhs_radial(r: float, s: State, p: Params) -> State:
    """Radial flow derivative (u', v'); requires r > 0."""
    if r <= 0.0:
        raise ValueError(f"radial right-hand side needs r > 0, got r={r}")
    u, v = s
    q = u * u + v * v
    du = q * v - p.gap * v - (p.S + 1) * u / r
    dv = -q * u - (p.m + p.omega) * u
    if p.S:
        dv += p.S * v / r
    return du, dv


def rhs_autonomous(s: State, p: Params) -> State:
    """Radial flow with the singular 1/r terms dropped."""
    u, v = s
    q = u * u + v * v
    return q * v - p.gap * v, -q * u - (p.m + p.omega) * u


def rhs_shifted(r: float, s: State, p: Params, rho: float) -> State:
    """Radial flow with r replaced by r + rho in the singular term."""
    u, v = s
    q = u * u + v * v
    du = q * v - p.gap * v - (p.S + 1) * u / (r + rho)
    dv = -q * u - (p.m + p.omega) * u
    if p.S:
        dv += p.S * v / (r + rho)
    return du, dv


def hamiltonian(s: State, p: Params) -> float:
    """Energy H(u, v) = (u^2+v^2)^2/4 + (m/2)(u^2-v^2) + (omega/2)(u^2+v^2)."""
    u, v = s
    q = u * u + v * v
    return q * q / 4.0 + 0.5 * p.m * (u * u - v * v) + 0.5 * p.omega * q


def hamiltonian_rate(r: float, s: State, p: Params) -> float:
    """dH/dr along the radial flow: -(u^2/r)(m + omega + u^2 + v^2) <= 0."""
    if r <= 0.0:
        raise ValueError(f"hamiltonian_rate needs r > 0, got r={r}")
    u, v = s
    return -(u * u / r) * (p.m + p.omega + u * u + v * v)


def r2h_rate(r: float, s: State, p: Params) -> float:
    """(1/r) d(r^2 H)/dr = -u^4/2 + (v^2/2)(v^2 - 2(m - omega))."""
    if r <= 0.0:
        raise ValueError(f"r2h_rate needs r > 0, got r={r}")
    u, v = s
    return -u ** 4 / 2.0 + 0.5 * v * v * (v * v - 2.0 * p.gap)


def equilibria(p: Params) -> list[tuple[State, float]]:
    """Fixed points of the autonomous flow with their energies.

    Returns [(0,0), (0, +sqrt(m-omega)), (0, -sqrt(m-omega))]; the origin
    sits at H = 0, the other two at the global minimum -(m-omega)^2/4.
    """
    v0 = math.sqrt(p.gap)
    pts = [(0.0, 0.0), (0.0, v0), (0.0, -v0)]
    return [(pt, hamiltonian(pt, p)) for pt in pts]


def taylor_start(lam: float, p: Params, r0: float) -> State:
    """Second-order series start (u(r0), v(r0)) for the datum v(0) = lambda.

    Matched against the integral form of the radial system:

        u(r0) = (r0/2) lambda (lambda^2 - (m-omega)) + O(r0^3)
        v(r0) = lambda - (r0^2/4) lambda (lambda^2 - (m-omega))
                                         (lambda^2 + m + omega) + O(r0^4)

    Valid while lambda^2 * r0 is small; callers shooting at large lambda
    should shrink r0 like 1/lambda^2.
    """
    if lam <= 0.0:
        raise ValueError(f"datum must be positive, got {lam}")
    if r0 <= 0.0:
        raise ValueError(f"start radius must be positive, got {r0}")
    if p.S != 0:
        raise NotImplementedError("series start is only available for S = 0")
    return taylor_start_scaled(lam, p.gap, p.m + p.omega, r0)


def taylor_start_scaled(lam: float, a_minus: float, a_plus: float, r0: float) -> State:
    """Series start for the radial structure with mass weights (a-, a+).

    The radial system uses (a-, a+) = (m-omega, m+omega); the blow-up
    rescaled system uses (eps^2 (m-omega), eps^2 (m+omega)) with lam = 1.
    """
    cu = lam * (lam * lam - a_minus)
    u = 0.5 * r0 * cu
    v = lam - 0.25 * r0 * r0 * cu * (lam * lam + a_plus)
    return u, v


def rescaled_hamiltonian(s: State, eps: float, p: Params) -> float:
    """Energy of the rescaled system: quartic term plus eps^2 mass terms."""
    u, v = s
    q = u * u + v * v
    e2 = eps * eps
    return q * q / 4.0 + e2 * (0.5 * p.m * (u * u - v * v) + 0.5 * p.omega * q)
