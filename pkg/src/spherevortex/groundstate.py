"""Radial ground states of the plasma problem -Delta w = w_+^gamma.

For gamma > 1 the parameter-free IVP u'' + u'/r + u^gamma = 0, u(0) = 1,
u'(0) = 0 is integrated once and rescaled so the support is the unit
disk: w(r) = r0^{2/(gamma-1)} u(r0 r) with r0 the first zero of u.  For
gamma = 1 the same IVP is linear and its solution is the first Dirichlet
eigenfunction normalized to 1 at the origin; the support radius tau is
the first zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

#: Start radius for the series launch of the radial IVP; the 1/r term
#: forbids starting at the origin itself.
R_START = 1e-4

#: Number of radial samples stored in a GroundState profile.
N_SAMPLES = 4096


class GroundStateError(RuntimeError):
    """Profile construction failed a tolerance or consistency check."""


def _rhs(gamma):
    def rhs(r, y):
        u, v = y
        return [v, -v / r - max(u, 0.0) ** gamma]

    return rhs


def _series_start(gamma, r):
    """u = 1 - r^2/4 + gamma r^4/64 + O(r^6) and its derivative."""
    u = 1.0 - r * r / 4.0 + gamma * r**4 / 64.0
    du = -r / 2.0 + gamma * r**3 / 16.0
    return u, du


def solve_unit_profile(gamma: float, rtol: float = 1e-12, atol: float = 1e-13):
    """Integrate the unnormalized profile; returns (solution, r0).

    solution is a dense-output object with solution(r) = (u, u'); r0 is
    the first zero of u, located by bisection on the dense output.
    """
    if gamma < 1.0 or gamma > 10.0:
        raise GroundStateError(f"gamma {gamma} outside the supported range [1, 10]")
    u0, du0 = _series_start(gamma, R_START)
    # The first zero moves slowly with gamma; r = 6 covers gamma <= 10.
    sol = solve_ivp(
        _rhs(gamma),
        (R_START, 6.0),
        [u0, du0],
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
    )
    if not sol.success:
        raise GroundStateError(f"radial integration failed: {sol.message}")
    rr = np.linspace(R_START, 6.0, 4000)
    uu = sol.sol(rr)[0]
    idx = np.nonzero(uu <= 0.0)[0]
    if len(idx) == 0:
        raise GroundStateError("no sign change found for the radial profile")
    i = idx[0]
    r0 = brentq(lambda r: sol.sol(r)[0], rr[i - 1], rr[i], xtol=1e-14, rtol=8.9e-16)
    return sol, float(r0)


@dataclass(frozen=True)
class GroundState:
    """Radial core profile with its boundary derivative and mass."""

    gamma: float
    r_support: float
    r_samples: np.ndarray = field(repr=False)
    w_samples: np.ndarray = field(repr=False)
    d_boundary: float
    mass_kappa: float | None
    unit_zero: float
    _spline: CubicSpline = field(repr=False, compare=False)

    def profile_eval(self, r):
        """w(r) with cubic interpolation; zero beyond the support."""
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.r_support, self._spline(np.minimum(r, self.r_support)), 0.0)
        return out if out.ndim else float(out)

    @property
    def w0(self) -> float:
        """Central value w(0)."""
        return float(self.w_samples[0])


def _mass_quadrature(sol, r0):
    """2 pi * int_0^r0 u(r) r dr by Gauss-Legendre on the dense output."""
    x, w = np.polynomial.legendre.leggauss(200)
    r = 0.5 * r0 * (x + 1.0)
    wr = 0.5 * r0 * w
    u = sol.sol(np.clip(r, R_START, r0))[0]
    # below R_START the series is more accurate than the clipped solution
    small = r < R_START
    if np.any(small):
        u[small] = 1.0 - r[small] ** 2 / 4.0
    return 2.0 * np.pi * float(np.sum(u * r * wr))


def ground_state(gamma: float, rtol: float = 1e-12) -> GroundState:
    """Build the normalized ground state for gamma in [1, 10]."""
    sol, r0 = solve_unit_profile(gamma, rtol=rtol, atol=rtol / 10.0)
    du_r0 = float(sol.sol(r0)[1])

    if gamma == 1.0:
        tau = r0
        r = np.linspace(0.0, tau, N_SAMPLES)
        w = sol.sol(np.clip(r, R_START, tau))[0]
        w[r < R_START] = _series_start(1.0, r[r < R_START])[0]
        w[0] = 1.0
        w[-1] = 0.0
        d_boundary = abs(du_r0)
        mass_quad = _mass_quadrature(sol, tau)
        mass_ident = 2.0 * np.pi * tau * d_boundary
        if abs(mass_quad - mass_ident) > 1e-7:
            raise GroundStateError(
                f"mass mismatch: quadrature {mass_quad} vs divergence identity {mass_ident}"
            )
        spline = CubicSpline(r, w, bc_type=((1, 0.0), (1, du_r0)))
        return GroundState(1.0, tau, r, w, d_boundary, mass_ident, tau, spline)

    # gamma > 1: rescale so the support is the unit disk.
    amp = r0 ** (2.0 / (gamma - 1.0))
    r = np.linspace(0.0, 1.0, N_SAMPLES)
    w = amp * sol.sol(np.clip(r0 * r, R_START, r0))[0]
    w[r0 * r < R_START] = amp * _series_start(gamma, r0 * r[r0 * r < R_START])[0]
    w[-1] = 0.0
    d_boundary = r0 ** ((gamma + 1.0) / (gamma - 1.0)) * abs(du_r0)
    spline = CubicSpline(r, w, bc_type=((1, 0.0), (1, -d_boundary)))
    gs = GroundState(gamma, 1.0, r, w, d_boundary, None, r0, spline)

    # Divergence identity int w^gamma = 2 pi |w'(1)| must hold by construction.
    x, wq = np.polynomial.legendre.leggauss(400)
    rq = 0.5 * (x + 1.0)
    integral = 2.0 * np.pi * float(
        np.sum(gs.profile_eval(rq) ** gamma * rq * 0.5 * wq)
    )
    if abs(integral - 2.0 * np.pi * d_boundary) > 1e-6 * max(1.0, d_boundary):
        raise GroundStateError(
            f"divergence identity violated: {integral} vs {2*np.pi*d_boundary}"
        )
    return gs
