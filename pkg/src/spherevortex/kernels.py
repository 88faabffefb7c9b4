"""Green's function of -Laplace on the sphere, its flat-log singular
approximation, and the bounded remainder.

The kernel splits as G = Gamma + H.  Gamma is the flat logarithm in chart
offsets with sin^2(theta) taken at the *first* argument, so it is not
symmetric; only its near-diagonal behaviour matters.  H = G - Gamma is
evaluated directly away from the diagonal and by a second-order Taylor
series inside a small switch radius, anchored at the constant diagonal
value ln2/(2pi).
"""

from __future__ import annotations

import numpy as np

from .sphere import SpherePoint, chord_argument, wrap_angle

FOUR_PI = 4.0 * np.pi

#: Diagonal value of the regular part, H(z, z) = ln2/(2pi).
H_DIAGONAL = np.log(2.0) / (2.0 * np.pi)

#: Chart separation below which the diagonal series branch of H is used.
RHO_SWITCH = 1e-4

#: Default chart cap radius on which H is served.
CAP_RADIUS = 0.5


class SingularityError(ValueError):
    """Kernel evaluated at coincident points."""


class OutOfCapError(ValueError):
    """Regular part requested outside its local chart cap."""


def _offsets(z: SpherePoint, zp: SpherePoint):
    a = z.theta - zp.theta
    b = float(wrap_angle(z.phi - zp.phi))
    return a, b


def green_G(z: SpherePoint, zp: SpherePoint) -> float:
    """G(z, z') = -(1/4pi) ln(chord argument) + ln2/(4pi)."""
    c = chord_argument(z, zp)
    if c == 0.0:
        raise SingularityError("Green function evaluated at coincident points")
    return float(-np.log(c) / FOUR_PI + np.log(2.0) / FOUR_PI)


def gamma_singular(z: SpherePoint, zp: SpherePoint) -> float:
    """Flat-log singular part, sin^2(theta) at the first argument."""
    a, b = _offsets(z, zp)
    flat2 = a * a + b * b * np.sin(z.theta) ** 2
    if flat2 == 0.0:
        raise SingularityError("singular part evaluated at coincident points")
    return float(-np.log(flat2) / FOUR_PI)


def grad_G(z: SpherePoint, zp: SpherePoint):
    """(d/dtheta, d/dphi) of G at the first argument."""
    c = chord_argument(z, zp)
    if c == 0.0:
        raise SingularityError("Green gradient at coincident points")
    dphi = wrap_angle(z.phi - zp.phi)
    dc_dth = np.sin(z.theta) * np.cos(zp.theta) - np.cos(z.theta) * np.sin(
        zp.theta
    ) * np.cos(dphi)
    dc_dph = np.sin(z.theta) * np.sin(zp.theta) * np.sin(dphi)
    return np.array([-dc_dth / (FOUR_PI * c), -dc_dph / (FOUR_PI * c)])


def _grad_gamma(z: SpherePoint, zp: SpherePoint):
    a, b = _offsets(z, zp)
    s, c = np.sin(z.theta), np.cos(z.theta)
    flat2 = a * a + b * b * s * s
    if flat2 == 0.0:
        raise SingularityError("singular-part gradient at coincident points")
    dth = 2.0 * a + 2.0 * b * b * s * c
    dph = 2.0 * b * s * s
    return np.array([-dth / (FOUR_PI * flat2), -dph / (FOUR_PI * flat2)])


def _series_u(a, b, s, c):
    """u = chord/(flat^2/2) - 1 expanded to second order in the offset.

    E collects the deficit chord*2 - flat^2; all terms through O(rho^4)
    are kept, so u = E/flat^2 is accurate to O(rho^3).
    """
    flat2 = a * a + b * b * s * s
    E = (
        -(a**4) / 12.0
        - s * c * a * b * b
        - 0.5 * s * s * a * a * b * b
        - s * s * b**4 / 12.0
    )
    return E / flat2, E, flat2


def _series_H(a, b, s, c):
    u, _, _ = _series_u(a, b, s, c)
    return H_DIAGONAL - np.log1p(u) / FOUR_PI


def regular_H(
    z: SpherePoint,
    zp: SpherePoint,
    cap_radius: float | None = CAP_RADIUS,
    rho_switch: float = RHO_SWITCH,
) -> float:
    """Regular remainder H = G - Gamma, series branch near the diagonal.

    Pass cap_radius=None to disable the locality check (used when
    assembling global fields, where G - Gamma is still well defined).
    """
    a, b = _offsets(z, zp)
    s, c = np.sin(z.theta), np.cos(z.theta)
    rho = np.hypot(a, b * s)
    if cap_radius is not None and rho > cap_radius:
        raise OutOfCapError(
            f"chart separation {rho:.3g} exceeds the cap radius {cap_radius}"
        )
    if rho < rho_switch:
        if rho == 0.0:
            return float(H_DIAGONAL)
        return float(_series_H(a, b, s, c))
    return green_G(z, zp) - gamma_singular(z, zp)


def grad_H(
    z: SpherePoint,
    zp: SpherePoint,
    cap_radius: float | None = CAP_RADIUS,
    rho_switch: float = RHO_SWITCH,
):
    """(d/dtheta, d/dphi) of H at the first argument.

    At exact coincidence this returns (0, 0): the diagonal map
    z -> H(z, z) is the constant ln2/(2pi), which is the reading the
    vortex-energy gradient needs.  Off the diagonal the derivative is
    direction dependent at small separation; the series branch tracks it.
    """
    a, b = _offsets(z, zp)
    s, c = np.sin(z.theta), np.cos(z.theta)
    rho = np.hypot(a, b * s)
    if cap_radius is not None and rho > cap_radius:
        raise OutOfCapError(
            f"chart separation {rho:.3g} exceeds the cap radius {cap_radius}"
        )
    if rho == 0.0:
        return np.zeros(2)
    if rho < rho_switch:
        u, E, flat2 = _series_u(a, b, s, c)
        # dE and dflat2 with respect to the first slot; s, c depend on theta.
        dE_dth = (
            -(a**3) / 3.0
            - (c * c - s * s) * a * b * b
            - s * c * b * b
            - s * c * a * a * b * b
            - s * s * a * b * b
            - s * c * b**4 / 6.0
        )
        dE_dph = -2.0 * s * c * a * b - s * s * a * a * b - s * s * b**3 / 3.0
        dflat_dth = 2.0 * a + 2.0 * b * b * s * c
        dflat_dph = 2.0 * b * s * s
        du_dth = (dE_dth * flat2 - E * dflat_dth) / flat2**2
        du_dph = (dE_dph * flat2 - E * dflat_dph) / flat2**2
        return np.array([du_dth, du_dph]) / (-(FOUR_PI) * (1.0 + u))
    return grad_G(z, zp) - _grad_gamma(z, zp)
