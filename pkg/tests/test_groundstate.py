"""Radial plasma profiles w_gamma and their invariants."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import jn_zeros

from spherevortex.groundstate import (
    R_START,
    GroundStateError,
    ground_state,
    solve_unit_profile,
)


def test_gamma_range_guard():
    with pytest.raises(GroundStateError):
        ground_state(0.5)
    with pytest.raises(GroundStateError):
        ground_state(11.0)


def test_gamma1_is_bessel_eigenfunction():
    gs = ground_state(1.0)
    tau = float(jn_zeros(0, 1)[0])
    assert gs.r_support == pytest.approx(tau, abs=1e-9)
    assert gs.w0 == pytest.approx(1.0, abs=1e-12)
    # mass kappa = 2 pi tau |J0'(tau)| = 2 pi tau J1(tau)
    from scipy.special import j1

    assert gs.mass_kappa == pytest.approx(2 * np.pi * tau * j1(tau), rel=1e-10)


@pytest.mark.parametrize("gamma", [1.0, 1.5, 2.0, 3.0, 5.0])
def test_divergence_identity(gamma):
    # integrating -Laplace w = w^gamma over the support gives
    # int w^gamma = 2 pi r |w'(boundary)| for the normalized profile
    gs = ground_state(gamma)
    mass, _ = quad(
        lambda r: 2.0 * np.pi * r * gs.profile_eval(r) ** gamma,
        0.0,
        gs.r_support,
        limit=200,
        epsabs=1e-12,
        epsrel=1e-12,
    )
    ident = 2.0 * np.pi * gs.r_support * gs.d_boundary
    assert mass == pytest.approx(ident, rel=1e-8)


def test_gamma2_reference_values():
    gs = ground_state(2.0)
    assert gs.unit_zero == pytest.approx(2.921320723781178, abs=1e-9)
    assert gs.d_boundary == pytest.approx(7.897071013129136, rel=1e-9)
    assert gs.w0 == pytest.approx(8.534114771193385, rel=1e-9)
    assert gs.r_support == pytest.approx(1.0, abs=1e-13)


def test_profile_zero_beyond_support():
    gs = ground_state(2.0)
    assert gs.profile_eval(1.5) == 0.0
    assert gs.profile_eval(gs.r_support) == pytest.approx(0.0, abs=1e-10)
    r = np.linspace(0.0, 0.99, 50)
    w = gs.profile_eval(r)
    assert np.all(np.diff(w) < 0.0)  # radially decreasing
    assert np.all(w > 0.0)


def test_self_convergence_under_tolerance_tightening():
    a = ground_state(2.0, rtol=1e-12)
    b = ground_state(2.0, rtol=5e-13)
    assert abs(a.d_boundary - b.d_boundary) < 1e-10
    assert abs(a.unit_zero - b.unit_zero) < 1e-10


@pytest.mark.parametrize("gamma", [1.0, 2.0, 3.0])
def test_ode_residual_on_dense_output(gamma):
    # differentiate u' of the dense output with a 5-point stencil; the
    # residual of u'' + u'/r + u^gamma = 0 stays below 1e-8
    sol, r0 = solve_unit_profile(gamma, rtol=1e-13, atol=1e-14)
    rs = np.linspace(1e-3, r0 - 0.02, 40)
    worst = 0.0
    for r in rs:
        h = min(0.002, (r - R_START) / 2.5)
        pts = r + h * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        du = sol.sol(pts)[1]
        d2u = np.dot([1.0, -8.0, 0.0, 8.0, -1.0], du) / (12.0 * h)
        u, dur = sol.sol(r)
        res = d2u + dur / r + np.sign(u) * np.abs(u) ** gamma
        worst = max(worst, abs(res))
    assert worst < 1e-8
