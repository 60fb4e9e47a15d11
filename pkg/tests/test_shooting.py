import math

import numpy as np
import pytest

from diracshoot import (
    Bracket,
    EventKind,
    Params,
    Radial,
    Tolerances,
    Trajectory,
    bisect,
    bracket_search,
    certificate_check,
    classify,
    decay_fit,
    hamiltonian,
    integrate,
    rhs_radial,
    taylor_start,
    universal_constant,
)

P = Params(1.0, 0.5)
TOL = Tolerances()
TOLR = TOL.resolved(P)


def test_universal_constant_frozen():
    assert universal_constant(P) == pytest.approx(0.025)


def test_certificate_check_frozen():
    # H(0.01, 0.01) = 1e-8 + 5e-5 = 5.001e-5 by direct evaluation;
    # all three firing conditions hold
    cert = certificate_check(2.0, (0.01, 0.01), P)
    assert cert is not None
    assert cert.H_at_R == pytest.approx(5.001e-5, rel=1e-12)
    assert cert.H_at_R < cert.C0 / 2.0
    assert certificate_check(0.5, (0.01, 0.01), P) is None  # needs r > 1
    assert certificate_check(2.0, (-0.01, 0.01), P) is None  # u v <= 0
    assert certificate_check(2.0, (0.01, 1.5), P) is None  # v^2 too large


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75, 1.0])
def test_small_data_captured_without_nodes(lam):
    c = classify(lam, P, TOL)
    assert c.verdict == "A"
    assert c.node_count == 0


@pytest.mark.parametrize("lam", [10.0, 100.0])
def test_large_data_have_nodes(lam):
    c = classify(lam, P, TOL)
    assert c.node_count >= 1


def test_classify_rejects_nonpositive():
    with pytest.raises(ValueError):
        classify(0.0, P, TOL)
    with pytest.raises(ValueError):
        classify(-2.0, P, TOL)


def test_classification_evidence_consistent():
    c = classify(2.0, P, TOL)
    assert c.verdict == "A"
    assert c.evidence["H"] <= -TOLR.delta
    nodes_before = sum(
        1
        for e in c.trajectory.events
        if e.kind == EventKind.V_SIGN_CHANGE and e.r < c.evidence["r"]
    )
    assert nodes_before == c.node_count == 1


def test_certificate_fires_on_near_connection():
    c = classify(1.8078, P, TOL)
    cert = c.certificate
    assert cert is not None
    assert cert.R > 1.0
    assert cert.H_at_R < cert.C0 / cert.R
    assert cert.uv_product > 0.0
    assert cert.v_squared < 2.0 * P.gap


def test_certificate_soundness_within_horizon():
    # after a fired certificate with k prior nodes the trajectory shows at
    # most k+1 sign changes or is captured
    for lam in (1.5, 1.8, 1.8078, 1.81, 2.5):
        c = classify(lam, P, TOL)
        cert = c.certificate
        if cert is None:
            continue
        k_before = sum(
            1
            for e in c.trajectory.events
            if e.kind == EventKind.V_SIGN_CHANGE and e.r < cert.R
        )
        total = sum(1 for e in c.trajectory.events if e.kind == EventKind.V_SIGN_CHANGE)
        assert total <= k_before + 1 or c.verdict == "A"


def test_bracket_search():
    b = bracket_search(P, TOL)
    assert b.lo == pytest.approx(1.0)
    assert b.hi == pytest.approx(2.0)
    assert b.history[0].verdict == "A" and b.history[0].node_count == 0
    assert b.history[-1].node_count >= 1


def test_bracket_requires_order():
    with pytest.raises(ValueError):
        Bracket(2.0, 1.0, ())


def test_bracket_search_failure_when_capped():
    # with the doubling capped before the first nodal datum the search
    # must report a bracket failure rather than fabricate an endpoint
    from diracshoot.shooting import BracketError

    with pytest.raises(BracketError):
        bracket_search(P, TOL, max_factor=1.5)


def test_bisect_ground_state(gs):
    assert gs.lambda_star == pytest.approx(1.8078961486, abs=1e-9)
    assert gs.bracket_width < 1e-10
    assert gs.node_count == 0
    assert gs.converged
    assert gs.decay_slope <= -P.gap / 2.0 + 0.05


def test_bisect_shrinks(gs):
    # width after n steps of bisection from [1, 2] is bounded by 2^-n
    assert gs.bracket_width <= 1.0


def test_bisect_history_sides_consistent(gs):
    # every node-free captured datum in the history sits below every datum
    # that showed a sign change; bisection nesting guarantees this ordering
    a0 = [c.lam for c in gs.history if c.verdict == "A" and c.node_count == 0]
    nodal = [c.lam for c in gs.history if c.node_count >= 1]
    assert a0 and nodal
    assert max(a0) < min(nodal)
    assert abs(gs.lambda_star - max(a0)) <= max(gs.bracket_width, 1e-12)


def test_ground_state_profile_localized(gs):
    prof = gs.profile
    n40 = float(np.interp(40.0, prof.r, prof.norm1))
    assert n40 < 1e-6
    assert prof.norm1[-1] < 1e-12
    assert np.all(np.diff(prof.r) > 0)


def test_ground_state_residual(gs):
    worst = 0.0
    for rr, y, dy in zip(gs.profile.r, gs.profile.y, gs.profile.dy):
        fu, fv = rhs_radial(rr, tuple(y), P)
        bound = 1e3 * TOLR.rel * (1.0 + abs(y[0]) + abs(y[1]))
        worst = max(worst, abs(fu - dy[0]) + abs(fv - dy[1]) - bound)
    assert worst <= 0.0


def test_ground_state_decay_bound(gs):
    prof = gs.profile
    logn = np.log(np.maximum(prof.norm1, 1e-300))
    for r in np.linspace(1.2 * gs.anchor_r, TOLR.rmax, 16):
        n_r = math.exp(np.interp(r, prof.r, logn))
        n_half = math.exp(np.interp(r / 2.0, prof.r, logn))
        assert n_r <= n_half * math.exp(-P.gap * (r - r / 2.0) / 2.0) * 1.1


def test_degenerate_bracket_returns_immediately():
    lam = 1.8078961486370915
    gs2 = bisect(Bracket(lam, lam, ()), P, TOL)
    assert gs2.lambda_star == pytest.approx(lam, rel=1e-12)


def test_decay_fit_exact_exponential():
    r = np.linspace(1.0, 10.0, 200)
    vals = 3.0 * np.exp(-0.4 * r)
    traj = Trajectory(
        r,
        np.column_stack([vals / 2.0, vals / 2.0]),
        np.zeros((len(r), 2)),
        np.zeros(len(r)),
        (),
        "completed",
    )
    slope = decay_fit(traj, (1.0, 10.0))
    assert slope == pytest.approx(-0.4, abs=1e-6)


def test_decay_fit_constant_is_flat():
    r = np.linspace(1.0, 5.0, 50)
    traj = Trajectory(
        r, np.full((len(r), 2), 0.5), np.zeros((len(r), 2)), np.zeros(len(r)), (), "completed"
    )
    assert decay_fit(traj, (1.0, 5.0)) == pytest.approx(0.0, abs=1e-12)


def test_decay_fit_domain_errors():
    r = np.linspace(1.0, 5.0, 50)
    traj = Trajectory(
        r, np.zeros((len(r), 2)), np.zeros((len(r), 2)), np.zeros(len(r)), (), "completed"
    )
    with pytest.raises(ValueError):
        decay_fit(traj, (1.0, 5.0))  # |u|+|v| = 0 in window
    with pytest.raises(ValueError):
        decay_fit(traj, (5.0, 1.0))  # reversed window


def test_sign_flip_symmetry_of_flow():
    lam = 1.3
    y0 = taylor_start(lam, P, 1e-6)
    a = integrate(Radial(), (1e-6, y0), P, TOL, r_end=15.0)
    b = integrate(Radial(), (1e-6, (-y0[0], -y0[1])), P, TOL, r_end=15.0)
    assert np.max(np.abs(a.y + b.y)) == 0.0
