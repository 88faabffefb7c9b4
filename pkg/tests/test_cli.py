"""CLI subcommands: manifests, determinism, and exit codes."""

import json

import numpy as np
import pytest

from spherevortex.cli import main


@pytest.fixture()
def dipole_json(tmp_path):
    path = tmp_path / "system.json"
    path.write_text(
        json.dumps(
            {
                "vortices": [
                    {"kappa": 1.0, "sign": 1, "theta": np.pi / 3, "phi": 0.0},
                    {"kappa": 1.0, "sign": -1, "theta": 2 * np.pi / 3, "phi": 0.0},
                ],
                "W": 0.1,
            }
        )
    )
    return path


def test_kernel_eval(tmp_path, capsys):
    rc = main(
        [
            "--output-dir",
            str(tmp_path),
            "kernel",
            "eval",
            "--theta1",
            "0.7",
            "--phi1",
            "1.1",
            "--theta2",
            "0.9",
            "--phi2",
            "1.3",
        ]
    )
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["H"] == pytest.approx(out["G"] - out["Gamma"], abs=1e-14)
    manifest = json.loads((tmp_path / "kernel_eval_manifest.json").read_text())
    assert manifest["command"] == "kernel_eval"
    assert "version" in manifest


def test_kr_energy_grad_critical(tmp_path, dipole_json, capsys):
    rc = main(["--output-dir", str(tmp_path), "kr", "energy", "--system", str(dipole_json)])
    assert rc == 0
    assert "energy" in json.loads(capsys.readouterr().out)

    rc = main(["--output-dir", str(tmp_path), "kr", "grad", "--system", str(dipole_json)])
    assert rc == 0
    assert len(json.loads(capsys.readouterr().out)["gradient"]) == 4

    rc = main(
        [
            "--output-dir",
            str(tmp_path),
            "kr",
            "critical",
            "--system",
            str(dipole_json),
            "--frozen",
            "phi0,phi1,theta0",
            "--solve-w",
        ]
    )
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["grad_norm"] < 1e-11
    assert out["nondegenerate"] is True
    crit = json.loads((tmp_path / "critical_system.json").read_text())
    assert crit["W"] == pytest.approx(1.0 / (2 * np.pi), rel=1e-10)


def test_dynamics_run(tmp_path, dipole_json, capsys):
    # start from the solved critical configuration for clean invariants
    main(
        [
            "--output-dir",
            str(tmp_path),
            "kr",
            "critical",
            "--system",
            str(dipole_json),
            "--frozen",
            "phi0,phi1,theta0",
            "--solve-w",
        ]
    )
    capsys.readouterr()
    rc = main(
        [
            "--output-dir",
            str(tmp_path),
            "dynamics",
            "run",
            "--system",
            str(tmp_path / "critical_system.json"),
            "--t",
            "1.0",
            "--dt",
            "0.01",
            "--sample-every",
            "10",
        ]
    )
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["completed"] is True
    assert out["hamiltonian_drift"] < 1e-10
    lines = (tmp_path / "trajectory.csv").read_text().strip().splitlines()
    assert lines[0] == "t,theta0,phi0,theta1,phi1"
    assert len(lines) > 5


def test_ground_state_solve(tmp_path, capsys):
    rc = main(["--output-dir", str(tmp_path), "ground-state", "solve", "--gamma", "2"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["d_boundary"] == pytest.approx(7.897071013129136, rel=1e-9)
    prof = (tmp_path / "ground_state.csv").read_text().splitlines()
    assert prof[0] == "r,w"


def test_scale_solve_gamma1_closed_form(tmp_path, capsys):
    rc = main(
        [
            "--output-dir",
            str(tmp_path),
            "scale",
            "solve",
            "--gamma",
            "1",
            "--epsilon",
            "1e-3",
            "--kappa",
            "1",
        ]
    )
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    from scipy.special import jn_zeros

    tau = float(jn_zeros(0, 1)[0])
    assert out["s"] == pytest.approx(tau * 1e-3, rel=1e-9)


def test_scale_solve_deterministic(tmp_path, capsys):
    argv = [
        "--output-dir",
        str(tmp_path),
        "scale",
        "solve",
        "--gamma",
        "2",
        "--epsilon",
        "1e-4",
        "--kappa",
        "2.5",
    ]
    assert main(argv) == 0
    first = (tmp_path / "scale_solve_manifest.json").read_bytes()
    out1 = capsys.readouterr().out
    assert main(argv) == 0
    second = (tmp_path / "scale_solve_manifest.json").read_bytes()
    out2 = capsys.readouterr().out
    assert first == second  # byte-identical reruns
    assert out1 == out2


def test_transfer(capsys):
    rc = main(["transfer", "--w", "0.7", "--gamma-rot", "0.2"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["W"] == pytest.approx(0.5)


def test_construct(tmp_path, dipole_json, capsys):
    main(
        [
            "--output-dir",
            str(tmp_path),
            "kr",
            "critical",
            "--system",
            str(dipole_json),
            "--frozen",
            "phi0,phi1,theta0",
            "--solve-w",
        ]
    )
    capsys.readouterr()
    crit = json.loads((tmp_path / "critical_system.json").read_text())
    cfg = tmp_path / "construct.json"
    cfg.write_text(json.dumps({"system": crit, "gamma": 2.0, "epsilon": [1e-2, 1e-3]}))
    rc = main(["--output-dir", str(tmp_path), "construct", "--config", str(cfg)])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["epsilon_count"] == 2
    conv = (tmp_path / "convergence.csv").read_text().splitlines()
    assert conv[0].startswith("epsilon,circulation_deficit")
    assert len(conv) == 3
    manifest = json.loads((tmp_path / "construct_manifest.json").read_text())
    deficits = [abs(r["diagnostics"][0]["deficit"]) for r in manifest["ansatz"]]
    assert deficits[1] < deficits[0]  # logarithmic improvement with epsilon


def test_exit_code_config_error(tmp_path, capsys):
    rc = main(["--output-dir", str(tmp_path), "kr", "energy", "--system", str(tmp_path / "missing.json")])
    assert rc == 2


def test_exit_code_numerical_failure(tmp_path, capsys):
    rc = main(["--output-dir", str(tmp_path), "ground-state", "solve", "--gamma", "50"])
    assert rc == 1


def test_verify_kernels_prints_checks(tmp_path, capsys):
    rc = main(["--output-dir", str(tmp_path), "verify", "--suite", "kernels"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS" in out and "FAIL" not in out
