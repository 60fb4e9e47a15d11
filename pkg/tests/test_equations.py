import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diracshoot import (
    Params,
    equilibria,
    hamiltonian,
    hamiltonian_rate,
    r2h_rate,
    rhs_autonomous,
    rhs_radial,
    taylor_start,
)

P = Params(1.0, 0.5)

params_st = st.tuples(
    st.floats(0.1, 2.0), st.floats(0.05, 0.95)
).map(lambda t: Params(t[0], t[0] * t[1]))
state_st = st.tuples(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))


def test_rhs_radial_frozen_values():
    assert rhs_radial(1.0, (0.0, 0.0), P) == (0.0, 0.0)
    assert rhs_radial(1.0, (0.0, 1.0), P) == pytest.approx((0.5, 0.0))
    assert rhs_radial(2.0, (1.0, 0.0), P) == pytest.approx((-0.5, -2.5))


def test_rhs_radial_domain():
    with pytest.raises(ValueError):
        rhs_radial(0.0, (0.1, 0.1), P)
    with pytest.raises(ValueError):
        rhs_radial(-1.0, (0.1, 0.1), P)


def test_rhs_autonomous_frozen_values():
    assert rhs_autonomous((0.0, 0.0), P) == (0.0, 0.0)
    v0 = math.sqrt(0.5)
    assert rhs_autonomous((0.0, v0), P) == pytest.approx((0.0, 0.0), abs=1e-15)
    assert rhs_autonomous((0.0, 1.0), P) == pytest.approx((0.5, 0.0))


def test_hamiltonian_frozen_values():
    assert hamiltonian((0.0, 0.0), P) == 0.0
    assert hamiltonian((0.0, math.sqrt(0.5)), P) == pytest.approx(-0.0625, abs=1e-15)
    assert hamiltonian((1.0, 0.0), P) == pytest.approx(1.0)


def test_hamiltonian_rate_frozen_values():
    assert hamiltonian_rate(1.0, (0.0, 0.7), P) == 0.0
    assert hamiltonian_rate(1.0, (1.0, 0.0), P) == pytest.approx(-2.5)
    assert hamiltonian_rate(2.0, (1.0, 1.0), P) == pytest.approx(-1.75)
    with pytest.raises(ValueError):
        hamiltonian_rate(0.0, (1.0, 1.0), P)


def test_r2h_rate_frozen_values():
    assert r2h_rate(1.0, (0.0, 0.0), P) == 0.0
    assert r2h_rate(1.0, (0.0, 1.0), P) == pytest.approx(0.0, abs=1e-15)
    assert r2h_rate(3.0, (0.0, math.sqrt(2 * P.gap)), P) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        r2h_rate(-2.0, (0.0, 1.0), P)


def test_equilibria_frozen_values():
    eqs = equilibria(P)
    states = [e[0] for e in eqs]
    energies = [e[1] for e in eqs]
    assert states[0] == (0.0, 0.0) and energies[0] == 0.0
    assert states[1][1] == pytest.approx(0.7071067811865476)
    assert states[2][1] == pytest.approx(-0.7071067811865476)
    assert energies[1] == pytest.approx(-0.0625, abs=1e-15)
    assert energies[2] == pytest.approx(-0.0625, abs=1e-15)

    eqs2 = equilibria(Params(2.0, 1.0))
    assert eqs2[1][0][1] == pytest.approx(1.0)
    assert eqs2[1][1] == pytest.approx(-0.25, abs=1e-14)


@given(params_st)
def test_equilibria_energy_formula(p):
    eqs = equilibria(p)
    assert eqs[0][1] == 0.0
    for _, H in eqs[1:]:
        assert H == pytest.approx(-p.gap ** 2 / 4.0, abs=1e-13)


@given(params_st, state_st, st.floats(1e-3, 1e3))
def test_hamiltonian_rate_nonpositive(p, s, r):
    assert hamiltonian_rate(r, s, p) <= 0.0


@given(params_st, state_st, st.floats(1e-2, 1e2))
def test_r2h_identity(p, s, r):
    # (1/r) d(r^2 H)/dr = 2 H + r dH/dr must hold as an algebraic identity
    lhs = r2h_rate(r, s, p)
    rhs = 2.0 * hamiltonian(s, p) + r * hamiltonian_rate(r, s, p)
    scale = 1.0 + abs(lhs) + abs(rhs)
    assert abs(lhs - rhs) <= 1e-12 * scale


@given(params_st, state_st, st.floats(1e-3, 1e3))
def test_rhs_odd_symmetry(p, s, r):
    du, dv = rhs_radial(r, s, p)
    mu, mv = rhs_radial(r, (-s[0], -s[1]), p)
    assert (mu, mv) == (-du, -dv)


def test_taylor_start_frozen_values():
    u, v = taylor_start(1.0, P, 1e-3)
    assert u == pytest.approx(2.5e-4, rel=1e-12)
    assert v == pytest.approx(1.0 - 3.125e-7, rel=1e-12)


def test_taylor_start_vanishing_u_coefficient():
    lam = math.sqrt(P.gap)
    u, v = taylor_start(lam, P, 1e-4)
    assert abs(u) < 1e-19  # leading coefficient lambda(lambda^2 - gap) = 0


@given(st.floats(0.1, 4.0))
@settings(max_examples=30)
def test_taylor_start_datum_limit(lam):
    _, v1 = taylor_start(lam, P, 1e-4)
    _, v2 = taylor_start(lam, P, 1e-6)
    assert abs(v2 - lam) < abs(v1 - lam) + 1e-18
    # the correction scales like r0^2 lam (lam^2 - gap)(lam^2 + m + omega)
    assert v2 == pytest.approx(lam, abs=1e-12 * (1.0 + lam) ** 5)


def test_taylor_start_domain():
    with pytest.raises(ValueError):
        taylor_start(-1.0, P, 1e-6)
    with pytest.raises(ValueError):
        taylor_start(1.0, P, 0.0)
