"""Green kernel, flat-log split, and the regular remainder."""

import numpy as np
import pytest

from spherevortex.kernels import (
    CAP_RADIUS,
    H_DIAGONAL,
    RHO_SWITCH,
    OutOfCapError,
    SingularityError,
    gamma_singular,
    grad_G,
    grad_H,
    green_G,
    regular_H,
)
from spherevortex.sphere import SpherePoint


def test_green_symmetry_and_antipodal_zero():
    rng = np.random.default_rng(3)
    for _ in range(30):
        p = SpherePoint(rng.uniform(0.2, np.pi - 0.2), rng.uniform(0, 2 * np.pi))
        q = SpherePoint(rng.uniform(0.2, np.pi - 0.2), rng.uniform(0, 2 * np.pi))
        assert green_G(p, q) == green_G(q, p)
    equator = SpherePoint(np.pi / 2, 0.0)
    antipode = SpherePoint(np.pi / 2, np.pi)
    assert abs(green_G(equator, antipode)) < 1e-14


def test_singularity_errors():
    p = SpherePoint(1.0, 1.0)
    with pytest.raises(SingularityError):
        green_G(p, p)
    with pytest.raises(SingularityError):
        gamma_singular(p, p)
    with pytest.raises(SingularityError):
        grad_G(p, p)


def test_gamma_uses_first_argument_latitude():
    # the flat-log singular part is asymmetric by construction
    p = SpherePoint(0.6, 0.1)
    q = SpherePoint(0.6005, 0.13)
    assert gamma_singular(p, q) != gamma_singular(q, p)


def test_H_diagonal_value_and_extrapolation():
    z = SpherePoint(1.2, 0.8)
    assert regular_H(z, z) == pytest.approx(np.log(2.0) / (2.0 * np.pi), abs=0)
    # extrapolation oracle: the deviation of H from the diagonal constant
    # decays linearly along a shrinking offset, so Richardson
    # extrapolation across a step halving reproduces the constant
    def H_at(t):
        return regular_H(z, SpherePoint(z.theta + t, z.phi + 0.3 * t))

    devs = [abs(H_at(t) - H_DIAGONAL) for t in (1e-5, 1e-6, 1e-7)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[1] < 1e-8 and devs[2] < 1e-8
    richardson = 2.0 * H_at(1e-6) - H_at(2e-6)
    assert richardson == pytest.approx(H_DIAGONAL, abs=1e-10)


def test_H_branch_continuity():
    # series branch and direct branch agree across the switch radius
    z = SpherePoint(0.9, 2.0)
    for direction in ((1.0, 0.0), (0.0, 1.0), (0.6, 0.8)):
        for fac in (0.99, 1.01):
            rho = RHO_SWITCH * fac
            zp = SpherePoint(
                z.theta + rho * direction[0],
                z.phi + rho * direction[1] / np.sin(z.theta),
            )
            direct = green_G(z, zp) - gamma_singular(z, zp)
            assert regular_H(z, zp) == pytest.approx(direct, abs=1e-11)


def test_H_equals_G_minus_gamma_away_from_diagonal():
    z = SpherePoint(1.0, 0.5)
    zp = SpherePoint(1.2, 0.7)
    assert regular_H(z, zp) == pytest.approx(
        green_G(z, zp) - gamma_singular(z, zp), abs=1e-15
    )


def test_cap_radius_guard():
    z = SpherePoint(np.pi / 2, 0.0)
    far = SpherePoint(np.pi / 2, CAP_RADIUS + 0.2)
    with pytest.raises(OutOfCapError):
        regular_H(z, far)
    with pytest.raises(OutOfCapError):
        grad_H(z, far)
    # disabling the cap serves the same value as the raw difference
    assert regular_H(z, far, cap_radius=None) == pytest.approx(
        green_G(z, far) - gamma_singular(z, far), abs=1e-15
    )


def _fd_gradient(fn, z, h=1e-6):
    up = fn(SpherePoint(z.theta + h, z.phi))
    dn = fn(SpherePoint(z.theta - h, z.phi))
    lf = fn(SpherePoint(z.theta, z.phi + h))
    rt = fn(SpherePoint(z.theta, z.phi - h))
    return np.array([(up - dn) / (2 * h), (lf - rt) / (2 * h)])


def test_grad_G_matches_finite_differences():
    z = SpherePoint(1.1, 0.3)
    zp = SpherePoint(1.6, 1.1)
    fd = _fd_gradient(lambda w: green_G(w, zp), z)
    assert np.allclose(grad_G(z, zp), fd, atol=1e-9)


def test_grad_H_matches_finite_differences():
    z = SpherePoint(1.1, 0.3)
    zp = SpherePoint(1.25, 0.45)
    fd = _fd_gradient(lambda w: regular_H(w, zp), z)
    assert np.allclose(grad_H(z, zp), fd, atol=1e-8)


def test_grad_H_series_branch_consistency():
    # just above and below the switch radius the gradients agree
    z = SpherePoint(0.9, 2.0)
    for fac in (0.5, 0.99):
        rho = RHO_SWITCH * fac
        zp = SpherePoint(z.theta + 0.6 * rho, z.phi + 0.8 * rho / np.sin(z.theta))
        fd = _fd_gradient(lambda w: regular_H(w, zp, rho_switch=1e-9), z, h=1e-7)
        assert np.allclose(grad_H(z, zp), fd, atol=1e-5)


def test_grad_H_diagonal_is_zero():
    z = SpherePoint(0.77, 3.1)
    assert np.array_equal(grad_H(z, z), np.zeros(2))
