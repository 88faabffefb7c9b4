"""Command-line interface: deterministic, file-based orchestration.

Every subcommand writes a JSON manifest recording its inputs and the
files it produced; bulk numbers go to CSV.  Exit codes: 0 success,
1 numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .groundstate import GroundState, GroundStateError, ground_state
from .kernels import H_DIAGONAL, gamma_singular, green_G, regular_H
from .sphere import (
    ConfigurationError,
    LatLonGrid,
    OutOfChartError,
    SpherePoint,
    SphericalField,
    field_from_function,
    integrate,
    laplace_beltrami,
)
from .vortex import (
    ConvergenceError,
    GaussConstraintError,
    SignedVortex,
    VortexSystem,
    eom_rhs,
    find_critical,
    integrate as integrate_dynamics,
    kr_energy,
    kr_gradient,
    rotating_frame_transfer,
)
from .desing import (
    AnsatzError,
    ScaleError,
    assemble_Psi,
    assemble_Psi_grid,
    boundary_curves,
    build_ansatz,
    core_circulation,
    solve_scales,
    weak_convergence_error,
)
from .spectral import (
    SolveParams,
    SpectralPlan,
    extract_profile,
    fixed_point_solve,
    poisson_inverse,
    rhs_eval,
)

CONFIG_ERRORS = (
    ConfigurationError,
    OutOfChartError,
    GaussConstraintError,
    ScaleError,
    ValueError,
    KeyError,
    json.JSONDecodeError,
    FileNotFoundError,
)
NUMERICAL_ERRORS = (ConvergenceError, AnsatzError, GroundStateError)


def _output_dir(args) -> Path:
    d = args.output_dir or os.environ.get("SPHEREVORTEX_OUTPUT") or "."
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: str, rows):
    lines = [header]
    for row in rows:
        lines.append(",".join(repr(x) if isinstance(x, float) else str(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _manifest(out: Path, command: str, inputs: dict, outputs: list, extra=None):
    m = {
        "command": command,
        "version": __version__,
        "inputs": inputs,
        "outputs": outputs,
    }
    if extra:
        m.update(extra)
    path = out / f"{command.replace(' ', '_')}_manifest.json"
    _write_json(path, m)
    return path


def _load_system(path: str) -> VortexSystem:
    cfg = json.loads(Path(path).read_text())
    return _system_from_dict(cfg)


def _system_from_dict(cfg: dict) -> VortexSystem:
    vortices = tuple(
        SignedVortex(float(v["kappa"]), int(v["sign"]), SpherePoint(float(v["theta"]), float(v["phi"])))
        for v in cfg["vortices"]
    )
    return VortexSystem(vortices, float(cfg.get("W", 0.0)))


def _system_to_dict(sys_: VortexSystem) -> dict:
    return {
        "vortices": [
            {"kappa": v.kappa, "sign": v.sign, "theta": v.pos.theta, "phi": v.pos.phi}
            for v in sys_.vortices
        ],
        "W": sys_.W,
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_kernel_eval(args):
    out = _output_dir(args)
    z = SpherePoint(args.theta1, args.phi1)
    zp = SpherePoint(args.theta2, args.phi2)
    result = {
        "G": green_G(z, zp),
        "Gamma": gamma_singular(z, zp),
        "H": regular_H(z, zp, cap_radius=None),
        "H_diagonal": H_DIAGONAL,
    }
    inputs = {k: v for k, v in vars(args).items() if isinstance(v, (int, float, str, bool, type(None)))}
    _manifest(out, "kernel_eval", inputs | {"output_dir": str(out)}, [], {"result": result})
    print(json.dumps(result, sort_keys=True))
    return 0


def cmd_kr(args):
    out = _output_dir(args)
    sys_ = _load_system(args.system)
    if args.action == "energy":
        result = {"energy": kr_energy(sys_)}
    elif args.action == "grad":
        result = {"gradient": list(kr_gradient(sys_))}
    else:  # critical
        frozen = tuple(s for s in (args.frozen or "").split(",") if s)
        rep = find_critical(sys_, frozen=frozen, solve_for_W=args.solve_w, tol=args.tol)
        sys_path = out / "critical_system.json"
        _write_json(sys_path, _system_to_dict(rep.config))
        result = {
            "grad_norm": rep.grad_norm,
            "reduced_spectrum": list(rep.reduced_spectrum),
            "nondegenerate": rep.nondegenerate,
            "iterations": rep.iterations,
        }
        _manifest(
            out,
            "kr_critical",
            {"system": args.system, "frozen": args.frozen, "solve_w": args.solve_w},
            [sys_path.name],
            {"result": result},
        )
        print(json.dumps(result, sort_keys=True))
        return 0
    _manifest(out, f"kr_{args.action}", {"system": args.system}, [], {"result": result})
    print(json.dumps(result, sort_keys=True))
    return 0


def cmd_dynamics(args):
    out = _output_dir(args)
    sys_ = _load_system(args.system)
    rep = integrate_dynamics(sys_, args.t, args.dt, frame=args.frame, sample_every=args.sample_every)
    n = len(sys_)
    header = "t," + ",".join(f"theta{i},phi{i}" for i in range(n))
    rows = [
        [float(t)] + [float(c) for c in coords]
        for t, coords in zip(rep.times, rep.coords)
    ]
    traj_path = out / "trajectory.csv"
    _write_csv(traj_path, header, rows)
    result = {
        "hamiltonian_drift": rep.hamiltonian_drift,
        "moment_drift": rep.moment_drift,
        "completed": rep.completed,
    }
    _manifest(
        out,
        "dynamics_run",
        {"system": args.system, "t": args.t, "dt": args.dt, "frame": args.frame},
        [traj_path.name],
        {"result": result},
    )
    print(json.dumps(result, sort_keys=True))
    return 0 if rep.completed else 1


def cmd_ground_state(args):
    out = _output_dir(args)
    gs = ground_state(args.gamma)
    prof_path = out / "ground_state.csv"
    _write_csv(
        prof_path,
        "r,w",
        [[float(r), float(w)] for r, w in zip(gs.r_samples[:: args.stride], gs.w_samples[:: args.stride])],
    )
    result = {
        "gamma": gs.gamma,
        "r_support": gs.r_support,
        "d_boundary": gs.d_boundary,
        "mass_kappa": gs.mass_kappa,
        "unit_zero": gs.unit_zero,
        "w0": gs.w0,
    }
    _manifest(out, "ground_state_solve", {"gamma": args.gamma}, [prof_path.name], {"result": result})
    print(json.dumps(result, sort_keys=True))
    return 0


def cmd_scale(args):
    out = _output_dir(args)
    gs = ground_state(args.gamma)
    sc = solve_scales(args.epsilon, args.kappa, args.gamma, gs)
    result = {
        "epsilon": sc.epsilon,
        "kappa": sc.kappa,
        "gamma": sc.gamma,
        "s": sc.s,
        "beta": sc.beta,
    }
    _manifest(
        out, "scale_solve", {"gamma": args.gamma, "epsilon": args.epsilon, "kappa": args.kappa}, [], {"result": result}
    )
    print(json.dumps(result, sort_keys=True))
    return 0


def cmd_construct(args):
    out = _output_dir(args)
    cfg = json.loads(Path(args.config).read_text())
    sys_ = _system_from_dict(cfg["system"])
    gamma = float(cfg["gamma"])
    eps_list = cfg["epsilon"]
    if not isinstance(eps_list, list):
        eps_list = [eps_list]
    gs = ground_state(gamma)
    outputs = []
    ansatz_records = []
    convergence_rows = []
    f_cos = lambda th, ph: np.cos(th)  # noqa: E731
    f_harm = lambda th, ph: np.sin(th) * np.cos(ph)  # noqa: E731
    for ei, eps in enumerate(eps_list):
        ans = build_ansatz(sys_, float(eps), gamma, gs)
        record = {
            "epsilon": float(eps),
            "scales": [
                {"kappa": s.kappa, "s": s.s, "beta": s.beta} for s in ans.scales
            ],
            "mu": list(ans.mu),
        }
        diag = []
        for vi in range(len(sys_)):
            cc = core_circulation(ans, vi)
            diag.append({"vortex": vi, "core_circulation": cc, "deficit": ans.scales[vi].kappa - cc})
        record["diagnostics"] = diag
        werr_cos = weak_convergence_error(ans, f_cos)
        werr_harm = weak_convergence_error(ans, f_harm)
        record["weak_error_cos_theta"] = werr_cos
        record["weak_error_sin_theta_cos_phi"] = werr_harm
        convergence_rows.append(
            [float(eps), float(diag[0]["deficit"]), float(werr_cos), float(werr_harm)]
        )
        if args.boundaries:
            curves = boundary_curves(ans)
            rows = []
            for vi, c in enumerate(curves):
                for x, r in zip(c.xi, c.r_measured):
                    rows.append([vi, float(x), float(r), float(c.r_predicted)])
            bpath = out / f"boundary_{ei}.csv"
            _write_csv(bpath, "vortex,xi,r_measured,r_predicted", rows)
            outputs.append(bpath.name)
            record["boundary_csv"] = bpath.name
            record["boundary_max_deviation"] = [c.max_deviation for c in curves]
            record["boundary_curvature_positive"] = [
                bool(np.all(c.curvature > 0)) for c in curves
            ]
        if args.field_grid:
            n_th, n_ph = (int(x) for x in args.field_grid.split(","))
            grid = LatLonGrid(n_th, n_ph)
            th, ph = grid.meshgrid()
            vals = assemble_Psi(ans)(th.ravel(), ph.ravel()).reshape(th.shape)
            rows = [
                [float(th[i, j]), float(ph[i, j]), float(vals[i, j])]
                for i in range(n_th)
                for j in range(n_ph)
            ]
            fpath = out / f"field_{ei}.csv"
            _write_csv(fpath, "theta,phi,psi", rows)
            outputs.append(fpath.name)
            record["field_csv"] = fpath.name
        ansatz_records.append(record)
    conv_path = out / "convergence.csv"
    _write_csv(
        conv_path,
        "epsilon,circulation_deficit,weak_error_cos_theta,weak_error_sin_theta_cos_phi",
        convergence_rows,
    )
    outputs.append(conv_path.name)
    _manifest(
        out,
        "construct",
        {"config": args.config, "gamma": gamma, "epsilon": eps_list, "system": _system_to_dict(sys_)},
        outputs,
        {"ansatz": ansatz_records},
    )
    print(json.dumps({"epsilon_count": len(eps_list), "outputs": outputs}, sort_keys=True))
    return 0


def cmd_solve(args):
    out = _output_dir(args)
    cfg = json.loads(Path(args.config).read_text())
    sys_ = _system_from_dict(cfg["system"])
    gamma = float(cfg["gamma"])
    eps = float(cfg["epsilon"])
    grid_cfg = cfg.get("grid", {"n_theta": 512, "n_phi": 1024})
    grid = LatLonGrid(int(grid_cfg["n_theta"]), int(grid_cfg["n_phi"]))
    gs = ground_state(gamma)
    ans = build_ansatz(sys_, eps, gamma, gs)
    seed = SphericalField(grid, assemble_Psi_grid(ans, grid))
    solver_cfg = cfg.get("solver", {})
    params = SolveParams(
        epsilon=eps,
        gamma=gamma,
        mu=ans.mu,
        alpha=float(solver_cfg.get("damping", 0.5)),
        tol=float(solver_cfg.get("tol", 1e-9 * float(np.max(np.abs(seed.values))))),
        max_iter=int(solver_cfg.get("max_iter", 300)),
        delta=float(solver_cfg.get("delta", 0.25)),
    )
    plan = SpectralPlan(grid)
    rep = fixed_point_solve(seed, sys_, params, plan)

    hist_path = out / "residual_history.csv"
    _write_csv(
        hist_path,
        "iter,increment,residual",
        [[i + 1, float(r[0]), float(r[1])] for i, r in enumerate(rep.residual_history)],
    )
    field_path = out / "psi.csv"
    _write_csv(
        field_path,
        "theta,phi,psi",
        [
            [float(grid.theta_nodes[i]), float(grid.phi_nodes[j]), float(rep.psi.values[i, j])]
            for i in range(0, grid.n_theta, args.field_stride)
            for j in range(0, grid.n_phi, args.field_stride)
        ],
    )
    # profiles are measured at the calibrated traveling speed with the
    # transported flux constants reported by the solver
    sys_final = rep.system or sys_
    params_final = replace(params, mu=rep.mu or params.mu)
    prof_rows = []
    prof_summaries = []
    for vi in range(len(sys_)):
        pc = extract_profile(rep, vi, sys_final, params_final, gs, ans.scales[vi].s)
        mean_stream = pc.scaled_stream.mean(axis=0)
        for k, r in enumerate(pc.r_over_s):
            prof_rows.append(
                [vi, float(r), float(mean_stream[k]), float(pc.reference_stream[0, k])]
            )
        prof_summaries.append(
            {
                "vortex": vi,
                "stream_deviation": pc.stream_deviation,
                "vorticity_deviation": pc.vorticity_deviation,
                "w0": gs.w0,
            }
        )
    prof_path = out / "profile.csv"
    _write_csv(prof_path, "vortex,r_over_s,scaled_psi,w_gamma", prof_rows)
    result = {
        "converged": rep.converged,
        "iterations": rep.iterations,
        "seed_residual": rep.seed_residual,
        "final_residual": float(rep.residual_history[-1, 1]),
        "final_increment": float(rep.residual_history[-1, 0]),
        "solved_system": _system_to_dict(sys_final),
        "calibrated_W": sys_final.W,
        "profiles": prof_summaries,
    }
    _manifest(
        out,
        "solve",
        {"config": args.config, "grid": grid_cfg, "epsilon": eps, "gamma": gamma},
        [hist_path.name, field_path.name, prof_path.name],
        {"result": result},
    )
    print(json.dumps({k: v for k, v in result.items() if k != "profiles"}, sort_keys=True))
    return 0 if rep.converged else 1


def cmd_transfer(args):
    W_new, descriptor = rotating_frame_transfer(args.w, args.gamma_rot)
    print(json.dumps({"W": W_new, "background": descriptor}, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# verify suites


def _check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'}  {name}{'  ' + detail if detail else ''}")
    return bool(ok)


def _default_dipole(kappa=1.0):
    seed = VortexSystem(
        (
            SignedVortex(kappa, +1, SpherePoint(np.pi / 3, 0.0)),
            SignedVortex(kappa, -1, SpherePoint(2 * np.pi / 3, 0.0)),
        ),
        W=0.1,
    )
    return find_critical(seed, frozen=("phi0", "phi1", "theta0"), solve_for_W=True).config


def verify_kernels():
    ok = True
    a = SpherePoint(0.7, 1.1)
    b = SpherePoint(2.1, 4.0)
    ok &= _check("G symmetry", green_G(a, b) == green_G(b, a))
    eq = SpherePoint(np.pi / 2, 0.3)
    anti = SpherePoint(np.pi / 2, 0.3 + np.pi)
    ok &= _check("G antipodal zero", abs(green_G(eq, anti)) < 1e-14)
    # diagonal limit by extrapolation of direct G - Gamma values
    hs = [1e-2, 1e-3]
    vals = [green_G(a, SpherePoint(a.theta + h, a.phi)) - gamma_singular(a, SpherePoint(a.theta + h, a.phi)) for h in hs]
    extrap = vals[1] + (vals[1] - vals[0]) / 99.0
    ok &= _check("H diagonal extrapolation", abs(extrap - H_DIAGONAL) < 1e-6)
    grid = LatLonGrid(128, 256)
    one = field_from_function(grid, lambda th, ph: np.ones_like(th))
    ok &= _check("quadrature of 1", abs(integrate(one) - 4 * np.pi) < 1e-12)
    f = field_from_function(grid, lambda th, ph: np.cos(th))
    lap = laplace_beltrami(f)
    ok &= _check("-Delta cos = 2 cos", float(np.max(np.abs(lap.values + 2 * f.values))) < 1e-6)
    return ok


def verify_dynamics():
    ok = True
    crit = _default_dipole()
    gnorm = float(np.linalg.norm(kr_gradient(crit)))
    ok &= _check("dipole critical point", gnorm < 1e-11, f"|grad|={gnorm:.2e}")
    rhs = eom_rhs(crit, frame="inertial")
    ok &= _check(
        "rigid drift rate", float(np.max(np.abs(rhs[1::2] + crit.W))) < 1e-9
    )
    rep = integrate_dynamics(crit, 2.0, 0.01)
    ok &= _check("Hamiltonian drift", rep.hamiltonian_drift < 1e-10)
    ok &= _check("moment drift", rep.moment_drift < 1e-10)
    return ok


def verify_asymptotics():
    ok = True
    gs2 = ground_state(2.0)
    sc = solve_scales(1e-6, 1.0, 2.0, gs2)
    lhs = (1e-6 / sc.s) ** 2 * gs2.d_boundary
    rhs = (1.0 / (2 * np.pi)) * abs(np.log(1e-6)) / abs(np.log(sc.s))
    ok &= _check("scale identity", abs(lhs - rhs) < 1e-12)
    gs1 = ground_state(1.0)
    sc1 = solve_scales(1e-3, 1.0, 1.0, gs1)
    ok &= _check("gamma=1 closed form", sc1.s == gs1.r_support * 1e-3)
    crit = _default_dipole()
    ans = build_ansatz(crit, 1e-4, 2.0, gs2)
    cc = core_circulation(ans, 0)
    ident = abs(np.log(1e-4)) / abs(np.log(ans.scales[0].s))
    ok &= _check("core circulation identity", abs(cc - ident) < 1e-8)
    return ok


def verify_pde():
    ok = True
    grid = LatLonGrid(256, 512)
    plan = SpectralPlan(grid)
    f = field_from_function(grid, lambda th, ph: 2 * np.cos(th))
    u, _ = poisson_inverse(plan, f)
    err = float(np.max(np.abs(u.values - np.cos(grid.meshgrid()[0]))))
    ok &= _check("poisson eigenfunction", err < 1e-10, f"err={err:.2e}")
    gs2 = ground_state(2.0)
    kappa = 4 * np.pi * gs2.d_boundary  # core scale about 1.4 eps
    crit = _default_dipole(kappa)
    eps = 0.1
    ans = build_ansatz(crit, eps, 2.0, gs2)
    seed = SphericalField(grid, assemble_Psi_grid(ans, grid))
    params = SolveParams(
        epsilon=eps, gamma=2.0, mu=ans.mu, alpha=0.5,
        tol=1e-7 * float(np.max(np.abs(seed.values))), max_iter=200,
    )
    rep = fixed_point_solve(seed, crit, params, plan)
    ok &= _check("fixed point converged", rep.converged, f"iters={rep.iterations}")
    ratio = rep.seed_residual / float(rep.residual_history[-1, 1])
    ok &= _check("residual reduction", ratio > 10.0, f"ratio={ratio:.1f}")
    return ok


def cmd_verify(args):
    suites = {
        "kernels": verify_kernels,
        "dynamics": verify_dynamics,
        "asymptotics": verify_asymptotics,
        "pde": verify_pde,
    }
    return 0 if suites[args.suite]() else 1


# ---------------------------------------------------------------------------
# parser


def build_parser():
    p = argparse.ArgumentParser(prog="spherevortex", description=__doc__)
    p.add_argument("--output-dir", default=None, help="output directory (or env SPHEREVORTEX_OUTPUT)")
    p.add_argument("--threads", type=int, default=1, help="worker thread cap")
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="Green kernel evaluation")
    ksub = k.add_subparsers(dest="action", required=True)
    ke = ksub.add_parser("eval")
    for name in ("theta1", "phi1", "theta2", "phi2"):
        ke.add_argument(f"--{name}", type=float, required=True)
    ke.set_defaults(func=cmd_kernel_eval)

    kr = sub.add_parser("kr", help="vortex interaction energy")
    krsub = kr.add_subparsers(dest="action", required=True)
    for action in ("energy", "grad", "critical"):
        a = krsub.add_parser(action)
        a.add_argument("--system", required=True, help="system JSON path")
        if action == "critical":
            a.add_argument("--frozen", default="", help="comma list, e.g. phi0,phi1,theta0")
            a.add_argument("--solve-w", action="store_true", dest="solve_w")
            a.add_argument("--tol", type=float, default=1e-11)
        a.set_defaults(func=cmd_kr)

    d = sub.add_parser("dynamics", help="point-vortex time integration")
    dsub = d.add_subparsers(dest="action", required=True)
    dr = dsub.add_parser("run")
    dr.add_argument("--system", required=True)
    dr.add_argument("--t", type=float, required=True)
    dr.add_argument("--dt", type=float, required=True)
    dr.add_argument("--frame", choices=("inertial", "co-rotating"), default="inertial")
    dr.add_argument("--sample-every", type=int, default=1, dest="sample_every")
    dr.set_defaults(func=cmd_dynamics)

    g = sub.add_parser("ground-state", help="radial plasma profile")
    gsub = g.add_subparsers(dest="action", required=True)
    gsolve = gsub.add_parser("solve")
    gsolve.add_argument("--gamma", type=float, required=True)
    gsolve.add_argument("--stride", type=int, default=16)
    gsolve.set_defaults(func=cmd_ground_state)

    s = sub.add_parser("scale", help="core scale relation")
    ssub = s.add_subparsers(dest="action", required=True)
    ssolve = ssub.add_parser("solve")
    ssolve.add_argument("--gamma", type=float, required=True)
    ssolve.add_argument("--epsilon", type=float, required=True)
    ssolve.add_argument("--kappa", type=float, required=True)
    ssolve.set_defaults(func=cmd_scale)

    c = sub.add_parser("construct", help="assemble the approximate solution")
    c.add_argument("--config", required=True)
    c.add_argument("--boundaries", action="store_true", help="measure patch boundaries")
    c.add_argument("--field-grid", default=None, help="export Psi on n_theta,n_phi")
    c.set_defaults(func=cmd_construct)

    so = sub.add_parser("solve", help="fixed-point solve of the level-set equation")
    so.add_argument("--config", required=True)
    so.add_argument("--field-stride", type=int, default=4)
    so.set_defaults(func=cmd_solve)

    tr = sub.add_parser("transfer", help="rotating-frame speed transfer")
    tr.add_argument("--w", type=float, required=True)
    tr.add_argument("--gamma-rot", type=float, required=True, dest="gamma_rot")
    tr.set_defaults(func=cmd_transfer)

    v = sub.add_parser("verify", help="built-in acceptance suites")
    v.add_argument("--suite", choices=("kernels", "dynamics", "asymptotics", "pde"), required=True)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already
        raise exc
    if args.threads is not None and args.threads > 0:
        os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    try:
        return args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
