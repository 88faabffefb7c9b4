"""Desingularized traveling point-vortex solutions of the incompressible
Euler equation on the unit sphere.

Subpackages by topic:

- sphere: chart geometry, quadrature grids, discrete Laplace-Beltrami
- kernels: Green's function of -Laplace, flat-log split G = Gamma + H
- vortex: signed point-vortex energy, critical points, dynamics
- groundstate: radial plasma profiles w_gamma
- desing: core scales, flux constants, approximate stream functions
- spectral: spherical-harmonic Poisson inversion and the level-set solve
"""

__version__ = "0.1.0"
