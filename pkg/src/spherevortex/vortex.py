"""Signed point-vortex systems: interaction energy, critical points,
and Hamiltonian dynamics on the sphere.

The renormalized energy K of a configuration of j positive and k
negative vortices traveling at longitude rate W is

    K = 1/2 sum_{m != l} k+_m k+_l G  +  1/2 sum_{n != l} k-_n k-_l G
      + 1/2 sum (k+_m)^2 H(z,z)      + 1/2 sum (k-_n)^2 H(z,z)
      - sum_m sum_n k+_m k-_n G
      - W sum k+_m cos(theta+_m) + W sum k-_n cos(theta-_n).

Its critical points are relative equilibria of the point-vortex flow; the
self terms are constant on the sphere (H(z,z) = ln2/2pi) so they never
enter the gradient.  The dynamics use conjugate pairs (cos(theta), phi)
per vortex, weighted by the signed strength.  With this convention a
configuration critical for K drifts rigidly at phi-rate -W (sigma = -1).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import H_DIAGONAL, SingularityError, grad_G, green_G
from .sphere import SpherePoint, chord_argument, to_cartesian

#: Sign of the rigid longitude drift rate in units of W, derived from the
#: Hamiltonian convention above and asserted by the dynamics harness.
DRIFT_SIGN = -1.0

#: Minimum chart separation for energy evaluation.
MIN_SEPARATION = 1e-8


class GaussConstraintError(ValueError):
    """Total positive and negative circulations do not balance."""


class ConvergenceError(RuntimeError):
    """Newton search failed to converge."""


@dataclass(frozen=True)
class SignedVortex:
    kappa: float
    sign: int  # +1 or -1
    pos: SpherePoint

    def __post_init__(self):
        if self.kappa <= 0.0:
            raise ValueError(f"circulation magnitude must be positive, got {self.kappa}")
        if self.sign not in (+1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def strength(self) -> float:
        """Signed circulation."""
        return self.sign * self.kappa


@dataclass(frozen=True)
class VortexSystem:
    """Ordered vortices (positives first by convention) plus travel speed W."""

    vortices: tuple
    W: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "vortices", tuple(self.vortices))
        pos = sum(v.kappa for v in self.vortices if v.sign > 0)
        neg = sum(v.kappa for v in self.vortices if v.sign < 0)
        if abs(pos - neg) > 1e-12 * max(pos, neg, 1.0):
            raise GaussConstraintError(
                f"total circulations unbalanced: +{pos} vs -{neg}"
            )

    def __len__(self):
        return len(self.vortices)

    def coords(self) -> np.ndarray:
        """Flat (theta_0, phi_0, theta_1, phi_1, ...) vector."""
        return np.array(
            [c for v in self.vortices for c in (v.pos.theta, v.pos.phi)]
        )

    def with_coords(self, x, W=None) -> "VortexSystem":
        x = np.asarray(x, dtype=float)
        vs = tuple(
            replace(v, pos=SpherePoint(x[2 * i], x[2 * i + 1]))
            for i, v in enumerate(self.vortices)
        )
        return VortexSystem(vs, self.W if W is None else float(W))

    def check_separation(self):
        for a, b in itertools.combinations(self.vortices, 2):
            if chord_argument(a.pos, b.pos) < MIN_SEPARATION**2:
                raise SingularityError(
                    f"vortices at {a.pos} and {b.pos} closer than {MIN_SEPARATION}"
                )


def kr_energy(sys: VortexSystem) -> float:
    """Renormalized interaction energy of the configuration."""
    sys.check_separation()
    K = 0.0
    vs = sys.vortices
    for a, b in itertools.combinations(vs, 2):
        gab = green_G(a.pos, b.pos)
        K += a.strength * b.strength * gab
    K += 0.5 * H_DIAGONAL * sum(v.kappa**2 for v in vs)
    K -= sys.W * sum(v.strength * np.cos(v.pos.theta) for v in vs)
    return float(K)


def kr_gradient(sys: VortexSystem) -> np.ndarray:
    """Analytic gradient of kr_energy in (theta_l, phi_l) per vortex.

    The self term H(z, z) is the constant ln2/(2pi), so it drops out.
    """
    sys.check_separation()
    vs = sys.vortices
    grad = np.zeros(2 * len(vs))
    for i, v in enumerate(vs):
        g = np.zeros(2)
        for l, u in enumerate(vs):
            if l == i:
                continue
            g += v.strength * u.strength * grad_G(v.pos, u.pos)
        g[0] += sys.W * v.strength * np.sin(v.pos.theta)
        grad[2 * i : 2 * i + 2] = g
    return grad


def _interaction_gradient(sys: VortexSystem, W: float) -> np.ndarray:
    """Gradient of the pair-interaction energy plus W terms at speed W."""
    return kr_gradient(VortexSystem(sys.vortices, W))


def reduced_hessian(sys: VortexSystem, step: float = 1e-5, grad_tol: float = 1e-8):
    """FD Hessian of kr_energy at a critical point, phi-shift mode removed.

    Returns (hessian, reduced_eigenvalues).  The full Hessian is built by
    central differences of the analytic gradient, symmetrized, and then
    restricted to the orthogonal complement of the global phi-shift
    direction (the exact zero mode of the longitude symmetry).
    """
    g0 = kr_gradient(sys)
    if np.linalg.norm(g0) > grad_tol:
        raise ValueError(
            f"reduced_hessian requires a critical point; |grad| = {np.linalg.norm(g0):.3g}"
        )
    x0 = sys.coords()
    n = len(x0)
    Hm = np.zeros((n, n))
    for i in range(n):
        xp = x0.copy()
        xp[i] += step
        xm = x0.copy()
        xm[i] -= step
        Hm[:, i] = (kr_gradient(sys.with_coords(xp)) - kr_gradient(sys.with_coords(xm))) / (
            2.0 * step
        )
    Hm = 0.5 * (Hm + Hm.T)
    shift = np.zeros(n)
    shift[1::2] = 1.0
    shift /= np.linalg.norm(shift)
    # orthonormal basis of the complement of the shift direction
    basis = np.linalg.qr(
        np.eye(n) - np.outer(shift, shift)
    )[0][:, : n - 1]
    # guard against a degenerate QR column aligned with shift
    proj = basis - np.outer(shift, shift @ basis)
    q, _ = np.linalg.qr(proj)
    reduced = q.T @ Hm @ q
    eig = np.linalg.eigvalsh(0.5 * (reduced + reduced.T))
    return Hm, eig


@dataclass(frozen=True)
class CriticalPointReport:
    config: VortexSystem
    grad_norm: float
    reduced_spectrum: np.ndarray
    nondegenerate: bool
    iterations: int = 0


def find_critical(
    seed: VortexSystem,
    frozen: tuple = (),
    solve_for_W: bool = False,
    tol: float = 1e-11,
    max_iter: int = 100,
    degeneracy_tol: float = 1e-8,
) -> CriticalPointReport:
    """Damped Newton search for a critical point of the energy.

    frozen lists coordinate labels like "theta0", "phi1" that are pinned
    at their seed values; at least one phi must be pinned to fix the
    longitude-shift gauge.  If solve_for_W is true, W joins the unknowns
    and the gradient entries of the pinned theta coordinates join the
    residual, keeping the system square.
    """
    labels = [
        f"{name}{i}" for i in range(len(seed)) for name in ("theta", "phi")
    ]
    frozen = set(frozen)
    unknown = [idx for idx, lab in enumerate(labels) if lab not in frozen]
    if not any(lab.startswith("phi") and lab in frozen for lab in labels):
        raise ValueError("at least one phi coordinate must be pinned (gauge fix)")
    residual_idx = list(unknown)
    if solve_for_W:
        residual_idx += [
            idx
            for idx, lab in enumerate(labels)
            if lab in frozen and lab.startswith("theta")
        ]
    nuk = len(unknown) + (1 if solve_for_W else 0)
    if len(residual_idx) != nuk:
        raise ValueError(
            f"system not square: {len(residual_idx)} residuals for {nuk} unknowns"
        )

    def unpack(p):
        x = seed.coords()
        x[unknown] = p[: len(unknown)]
        W = p[-1] if solve_for_W else seed.W
        return seed.with_coords(x, W)

    def residual(p):
        return kr_gradient(unpack(p))[residual_idx]

    p = np.concatenate(
        [seed.coords()[unknown], [seed.W]] if solve_for_W else [seed.coords()[unknown]]
    )
    F = residual(p)
    iterations = 0
    for iterations in range(max_iter):
        if np.linalg.norm(kr_gradient(unpack(p))) < tol:
            break
        J = np.zeros((len(F), len(p)))
        h = 1e-7
        for c in range(len(p)):
            pp = p.copy()
            pp[c] += h
            pm = p.copy()
            pm[c] -= h
            J[:, c] = (residual(pp) - residual(pm)) / (2.0 * h)
        try:
            dp = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Newton matrix: {exc}") from exc
        lam = 1.0
        base = np.linalg.norm(F)
        while lam > 1e-8:
            cand = p + lam * dp
            try:
                Fc = residual(cand)
            except SingularityError:
                lam *= 0.5
                continue
            if np.linalg.norm(Fc) < base:
                p, F = cand, Fc
                break
            lam *= 0.5
        else:
            raise ConvergenceError("line search stalled before reaching tolerance")
    final = unpack(p)
    gnorm = float(np.linalg.norm(kr_gradient(final)))
    if gnorm >= tol:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations; |grad| = {gnorm:.3g}"
        )
    _, eig = reduced_hessian(final)
    nondeg = bool(np.min(np.abs(eig)) > degeneracy_tol * np.max(np.abs(eig)))
    return CriticalPointReport(final, gnorm, eig, nondeg, iterations)


def eom_rhs(sys: VortexSystem, frame: str = "inertial") -> np.ndarray:
    """Time derivatives (theta_dot_l, phi_dot_l) of the point-vortex flow.

    frame "inertial" uses the pure pair-interaction Hamiltonian; frame
    "co-rotating" retains the W terms so fixed points coincide with
    critical points of the full energy.
    """
    if frame not in ("inertial", "co-rotating"):
        raise ValueError(f"unknown frame {frame!r}")
    W = sys.W if frame == "co-rotating" else 0.0
    grad = _interaction_gradient(sys, W)
    out = np.zeros_like(grad)
    for i, v in enumerate(sys.vortices):
        st = np.sin(v.pos.theta)
        out[2 * i] = -grad[2 * i + 1] / (v.strength * st)  # theta_dot
        out[2 * i + 1] = grad[2 * i] / (v.strength * st)  # phi_dot
    return out


def interaction_hamiltonian(sys: VortexSystem) -> float:
    """Pair-interaction energy (no W, no self terms)."""
    sys.check_separation()
    K = 0.0
    for a, b in itertools.combinations(sys.vortices, 2):
        K += a.strength * b.strength * green_G(a.pos, b.pos)
    return float(K)


def moment_vector(sys: VortexSystem) -> np.ndarray:
    """M = sum of signed strengths times Cartesian positions."""
    return sum(v.strength * to_cartesian(v.pos) for v in sys.vortices)


@dataclass(frozen=True)
class TrajectoryReport:
    times: np.ndarray
    coords: np.ndarray  # shape (n_samples, 2 * n_vortices)
    hamiltonian_drift: float
    moment_drift: float
    completed: bool
    system: VortexSystem = None


def integrate(
    sys: VortexSystem,
    T: float,
    dt: float,
    frame: str = "inertial",
    sample_every: int = 1,
) -> TrajectoryReport:
    """Classical RK4 integration of the point-vortex flow.

    Reports max drift of the interaction Hamiltonian and of the moment
    vector over the sampled trajectory.  A vortex collision aborts the
    run, returning the partial trajectory with completed=False.
    """
    n_steps = int(round(T / dt))
    x = sys.coords()
    times = [0.0]
    traj = [x.copy()]
    H0 = interaction_hamiltonian(sys)
    M0 = moment_vector(sys)
    h_drift = 0.0
    m_drift = 0.0
    completed = True

    def rhs(xv):
        return eom_rhs(sys.with_coords(xv), frame=frame)

    for step in range(1, n_steps + 1):
        try:
            k1 = rhs(x)
            k2 = rhs(x + 0.5 * dt * k1)
            k3 = rhs(x + 0.5 * dt * k2)
            k4 = rhs(x + dt * k3)
        except SingularityError:
            completed = False
            break
        x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        # keep phi unreduced in the trajectory so drifts are readable;
        # SpherePoint reduces internally.
        if step % sample_every == 0 or step == n_steps:
            cur = sys.with_coords(x)
            times.append(step * dt)
            traj.append(x.copy())
            h_drift = max(h_drift, abs(interaction_hamiltonian(cur) - H0))
            m_drift = max(m_drift, float(np.linalg.norm(moment_vector(cur) - M0)))
    return TrajectoryReport(
        np.array(times), np.array(traj), h_drift, m_drift, completed, sys
    )


def rotating_frame_transfer(W: float, gamma_rot: float):
    """Traveling speed and vorticity offset on a sphere rotating at gamma_rot.

    Returns (W - gamma_rot, descriptor); the descriptor tells field
    exporters to add 2 * gamma_rot * cos(theta) to vorticity samples.
    """
    return W - gamma_rot, {"background_vorticity": "2*gamma_rot*cos(theta)", "gamma_rot": gamma_rot}
