"""Spherical geometry in the colatitude/longitude chart.

Everything lives in the single chart (theta, phi) in (0, pi) x [0, 2pi),
which excludes the poles.  Grids use Gauss-Legendre nodes in cos(theta)
so no sample ever touches a pole, and the quadrature weights reproduce
the surface measure sin(theta) dtheta dphi exactly for band-limited
integrands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

TWO_PI = 2.0 * np.pi


class OutOfChartError(ValueError):
    """Raised when a chart operation would leave (0, pi) in colatitude."""


class ConfigurationError(ValueError):
    """Raised for invalid grid or solver configuration."""


def wrap_angle(dphi):
    """Reduce a longitude difference to (-pi, pi]."""
    w = np.mod(-np.asarray(dphi) + np.pi, TWO_PI)
    return -(w - np.pi)


@dataclass(frozen=True)
class SpherePoint:
    """A pole-free point on the unit sphere, phi stored mod 2*pi."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 < self.theta < np.pi):
            raise OutOfChartError(
                f"colatitude {self.theta} outside (0, pi): poles are excluded"
            )
        object.__setattr__(self, "phi", float(np.mod(self.phi, TWO_PI)))
        object.__setattr__(self, "theta", float(self.theta))


def to_cartesian(p: SpherePoint) -> np.ndarray:
    """Embed a chart point as a unit 3-vector."""
    st = np.sin(p.theta)
    return np.array([st * np.cos(p.phi), st * np.sin(p.phi), np.cos(p.theta)])


def chord_argument(p: SpherePoint, q: SpherePoint) -> float:
    """1 - cos(t)cos(t') - sin(t)sin(t')cos(dphi), in the half-angle form.

    The half-angle form is a sum of non-negative terms, so it keeps full
    relative accuracy near p = q where the naive expression cancels
    catastrophically.  The result is in [0, 2], zero iff p = q.
    """
    dth = 0.5 * abs(p.theta - q.theta)
    dphi = abs(p.phi - q.phi)
    if dphi > np.pi:
        dphi = TWO_PI - dphi
    dph = 0.5 * dphi
    # absolute offsets make the value bitwise symmetric in (p, q)
    return float(
        2.0
        * (np.sin(dth) ** 2 + np.sin(p.theta) * np.sin(q.theta) * np.sin(dph) ** 2)
    )


@dataclass(frozen=True)
class TangentMap:
    """Chart linearization at a base point: (dtheta, sin(theta)*dphi)/scale."""

    base: SpherePoint
    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0.0:
            raise ConfigurationError(f"tangent scale must be positive, got {self.scale}")

    def apply(self, p: SpherePoint) -> np.ndarray:
        """Map a chart point to tangent-plane coordinates at the base."""
        dth = p.theta - self.base.theta
        dph = wrap_angle(p.phi - self.base.phi)
        return np.array([dth, np.sin(self.base.theta) * dph]) / self.scale

    def apply_offset(self, dtheta, dphi) -> np.ndarray:
        """Map a raw chart offset (dtheta, dphi) to tangent coordinates."""
        return np.array([dtheta, np.sin(self.base.theta) * np.asarray(dphi)]) / self.scale

    def invert(self, x) -> SpherePoint:
        """Inverse map; raises OutOfChartError if the image leaves the chart."""
        x = np.asarray(x, dtype=float)
        theta = self.base.theta + self.scale * x[0]
        if not (0.0 < theta < np.pi):
            raise OutOfChartError(f"inverted colatitude {theta} leaves the chart")
        phi = self.base.phi + self.scale * x[1] / np.sin(self.base.theta)
        return SpherePoint(theta, phi)


@dataclass(frozen=True)
class LatLonGrid:
    """Gauss-Legendre x equispaced grid with surface-measure weights.

    theta nodes come from Gauss-Legendre nodes in cos(theta), ordered by
    increasing theta; phi nodes are equispaced on [0, 2pi).  weights[i, j]
    integrates f over the sphere as sum(weights * values).
    """

    n_theta: int
    n_phi: int
    theta_nodes: np.ndarray = field(init=False, repr=False)
    phi_nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 4:
            raise ConfigurationError(
                f"grid too small: {self.n_theta} x {self.n_phi}"
            )
        x, w = leggauss(self.n_theta)
        # x ascending in cos(theta); reverse so theta is ascending.
        theta = np.arccos(x[::-1])
        wq = w[::-1] * (TWO_PI / self.n_phi)
        object.__setattr__(self, "theta_nodes", theta)
        object.__setattr__(self, "phi_nodes", np.arange(self.n_phi) * TWO_PI / self.n_phi)
        object.__setattr__(
            self, "weights", np.broadcast_to(wq[:, None], (self.n_theta, self.n_phi)).copy()
        )

    @property
    def cos_theta(self) -> np.ndarray:
        return np.cos(self.theta_nodes)

    @property
    def sin_theta(self) -> np.ndarray:
        return np.sin(self.theta_nodes)

    def meshgrid(self):
        """(theta, phi) arrays of shape (n_theta, n_phi)."""
        return np.meshgrid(self.theta_nodes, self.phi_nodes, indexing="ij")


@dataclass(frozen=True)
class SphericalField:
    """Scalar samples on a LatLonGrid, shape (n_theta, n_phi)."""

    grid: LatLonGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size != self.grid.n_theta * self.grid.n_phi:
            raise ConfigurationError(
                f"field has {v.size} values for a "
                f"{self.grid.n_theta} x {self.grid.n_phi} grid"
            )
        object.__setattr__(self, "values", v.reshape(self.grid.n_theta, self.grid.n_phi))


def field_from_function(grid: LatLonGrid, fn) -> SphericalField:
    """Sample fn(theta, phi) (vectorized) on the grid."""
    th, ph = grid.meshgrid()
    return SphericalField(grid, fn(th, ph))


def integrate(f: SphericalField) -> float:
    """Quadrature of the field over the sphere."""
    return float(np.sum(f.grid.weights * f.values))


def _fornberg_weights(x, x0, m):
    """Finite-difference weights for the m-th derivative at x0 on nodes x.

    Fornberg's algorithm; returns weights for derivatives 0..m, shape
    (m+1, len(x)).
    """
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def _diff_matrices(nodes, stencil=9):
    """First- and second-derivative matrices on arbitrary nodes."""
    n = len(nodes)
    if stencil > n:
        stencil = n
    D1 = np.zeros((n, n))
    D2 = np.zeros((n, n))
    half = stencil // 2
    for i in range(n):
        lo = min(max(i - half, 0), n - stencil)
        sl = slice(lo, lo + stencil)
        w = _fornberg_weights(nodes[sl], nodes[i], 2)
        D1[i, sl] = w[1]
        D2[i, sl] = w[2]
    return D1, D2


def laplace_beltrami(f: SphericalField) -> SphericalField:
    """Discrete Laplace-Beltrami operator on the grid.

    The colatitude part d^2/dtheta^2 + cot(theta) d/dtheta is evaluated
    with high-order Lagrange stencils on the non-uniform Gauss-Legendre
    theta nodes (one-sided near the ends; no node is at a pole).  The
    longitude part is spectral via FFT.
    """
    grid = f.grid
    if grid.n_theta < 16 or grid.n_phi < 16:
        raise ConfigurationError(
            f"laplace_beltrami needs at least a 16 x 16 grid, got "
            f"{grid.n_theta} x {grid.n_phi}"
        )
    th = grid.theta_nodes
    D1, D2 = _diff_matrices(th)
    cot = (grid.cos_theta / grid.sin_theta)[:, None]
    theta_part = D2 @ f.values + cot * (D1 @ f.values)

    m = np.fft.rfftfreq(grid.n_phi, d=1.0 / grid.n_phi)
    fhat = np.fft.rfft(f.values, axis=1)
    d2phi = np.fft.irfft(-(m**2) * fhat, n=grid.n_phi, axis=1)
    phi_part = d2phi / grid.sin_theta[:, None] ** 2

    return SphericalField(grid, theta_part + phi_part)
