"""Shared fixtures: ground states and the canonical traveling dipole."""

import numpy as np
import pytest

from spherevortex.groundstate import ground_state
from spherevortex.sphere import SpherePoint
from spherevortex.vortex import SignedVortex, VortexSystem, find_critical


@pytest.fixture(scope="session")
def gs1():
    return ground_state(1.0)


@pytest.fixture(scope="session")
def gs2():
    return ground_state(2.0)


def make_dipole(kappa=1.0, theta=np.pi / 3, W=1.0):
    """Mirror-symmetric opposite-sign pair seed."""
    return VortexSystem(
        (
            SignedVortex(kappa, +1, SpherePoint(theta, 0.0)),
            SignedVortex(kappa, -1, SpherePoint(np.pi - theta, 0.0)),
        ),
        W=W,
    )


def solve_dipole(kappa=1.0, theta=np.pi / 3):
    """Critical point of the dipole with W free and the gauge pinned."""
    return find_critical(
        make_dipole(kappa, theta),
        frozen=("phi0", "phi1", "theta0"),
        solve_for_W=True,
    )


@pytest.fixture(scope="session")
def dipole_critical():
    return solve_dipole()
