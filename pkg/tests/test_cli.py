"""Command-line behavior, exercised in process through main(argv)."""

import json

import numpy as np
import pytest

from cribtransfer.cli import load_config, main, resolve_units
from cribtransfer.core import ConfigError
from cribtransfer.transfer import TransferError, TransferParams, run_staggered


def _run(*argv):
    return main(list(argv))


# ----------------------------------------------------------- config

def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/no/such/file.toml")


def test_load_config_rejects_bad_toml(tmp_path):
    p = tmp_path / "broken.toml"
    p.write_text("[transfer\nn_spins = 3\n")
    with pytest.raises(ConfigError, match="parse error"):
        load_config(str(p))


def test_load_config_rejects_unknown_schema(tmp_path):
    p = tmp_path / "wrong.toml"
    p.write_text('schema = "other/9"\n')
    with pytest.raises(ConfigError, match="unknown config schema"):
        load_config(str(p))


def test_load_config_unwraps_report_json(tmp_path):
    p = tmp_path / "report.json"
    p.write_text(json.dumps({"efficiency": 1.0, "resolved_config": {"seed": 3}}))
    assert load_config(str(p)) == {"seed": 3}


def test_resolve_units_scales_frequencies_and_times():
    doc = {
        "units": "MHz",
        "g_mhz": 5.0,
        "transfer": {"delta_ib": 10.0, "tau_r": 0.03, "n_spins": 8},
        "sweep": {
            "axis1": {"name": "delta_IB", "min": 0.0, "max": 25.0, "n_points": 3},
            "axis2": {"name": "tau_R", "min": 0.0, "max": 0.1, "n_points": 3},
        },
    }
    out = resolve_units(doc)
    assert out["transfer"]["delta_ib"] == 2.0  # frequency: divide by g
    assert out["transfer"]["tau_r"] == pytest.approx(0.15)  # time: multiply
    assert out["transfer"]["n_spins"] == 8  # counts untouched
    assert out["sweep"]["axis1"]["max"] == 5.0
    assert out["sweep"]["axis2"]["max"] == pytest.approx(0.5)
    assert out["units"] == "G-units" and "g_mhz" not in out
    assert doc["transfer"]["delta_ib"] == 10.0  # original untouched


def test_resolve_units_validation():
    with pytest.raises(ConfigError, match="g_mhz"):
        resolve_units({"units": "MHz"})
    with pytest.raises(ConfigError, match="units"):
        resolve_units({"units": "Hz"})


# --------------------------------------------------------- estimate

def test_estimate_prints_both_closed_forms(capsys):
    assert _run("estimate", "--delta-ib", "2", "--kappa-sqrtn", "6") == 0
    out = capsys.readouterr().out
    assert "0.911891" in out
    assert "0.912666" in out


def test_estimate_needs_a_window(capsys):
    assert _run("estimate", "--delta-ib", "2") == 2
    assert "kappa-sqrtn" in capsys.readouterr().err


# ---------------------------------------------------------- storage

def test_storage_flat_report(tmp_path, capsys):
    code = _run(
        "storage", "--envelope", "flat", "--optical-depth", "1",
        "--out-dir", str(tmp_path),
    )
    assert code == 0
    assert "eta_s = 0.998133" in capsys.readouterr().out
    report = json.loads((tmp_path / "storage_report.json").read_text())
    assert report["eta_s"] == pytest.approx(0.9981325572682921, rel=1e-9)
    assert report["envelope"] == "flat"
    assert report["resolved_config"]["storage"]["optical_depth"] == 1.0


def test_storage_optimized_width(tmp_path):
    code = _run(
        "storage", "--optical-depth", "1", "--optimize-width", "0.5", "4",
        "--out-dir", str(tmp_path),
    )
    assert code == 0
    report = json.loads((tmp_path / "storage_report.json").read_text())
    assert report["eta_s"] > 0.90
    assert 0.5 <= report["optimized_width"]["best_bandwidth_ratio"] <= 4.0


def test_storage_missing_depth_names_field(tmp_path, capsys):
    assert _run("storage", "--envelope", "flat", "--out-dir", str(tmp_path)) == 2
    assert "optical_depth" in capsys.readouterr().err


def test_storage_crosscheck_emits_both_solutions(tmp_path):
    code = _run(
        "storage", "--optical-depth", "1", "--bandwidth-ratio", "0.5",
        "--crosscheck", "--out-dir", str(tmp_path),
    )
    assert code == 0
    report = json.loads((tmp_path / "storage_report.json").read_text())
    assert report["crosscheck"]["l2_relative_difference"] < 0.02
    pde = np.genfromtxt(tmp_path / "coherence_pde.csv", delimiter=",", names=True)
    ana = np.genfromtxt(tmp_path / "coherence_analytic.csv", delimiter=",", names=True)
    assert pde.size == ana.size == 512


# --------------------------------------------------------- transfer

def test_transfer_default_run(tmp_path, capsys):
    assert _run("transfer", "--out-dir", str(tmp_path)) == 0
    assert "efficiency = 0.914220" in capsys.readouterr().out
    report = json.loads((tmp_path / "transfer_report.json").read_text())
    assert report["efficiency"] == pytest.approx(0.91421993, abs=1e-6)
    pops = report["final_populations"]
    # default tol is 1e-8; the run guards norm drift at 100 * tol
    assert pops["spins"] + pops["cavity"] + pops["qubit"] == pytest.approx(1.0, abs=1e-6)
    traj = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert traj[0] == "t,spin_pop,cavity_pop,qubit_pop,sym_overlap"
    assert len(traj) > 400


def test_transfer_mhz_config_matches_dimensionless_run(tmp_path):
    # g = 4 MHz: every conversion is a power-of-two scale, so the resolved
    # values are bit-identical to the dimensionless defaults
    cfg = tmp_path / "mhz.toml"
    cfg.write_text(
        'units = "MHz"\ng_mhz = 4.0\n\n[transfer]\n'
        "delta_ib = 8.0\ndelta_inh = 40.0\nkappa_sqrtn = 24.0\n"
        "delta = 80.0\ntau_r = 0.0375\nn_spins = 128\n"
    )
    d1, d2 = tmp_path / "a", tmp_path / "b"
    assert _run("transfer", "--config", str(cfg), "--out-dir", str(d1)) == 0
    assert _run("transfer", "--out-dir", str(d2)) == 0
    r1 = json.loads((d1 / "transfer_report.json").read_text())
    r2 = json.loads((d2 / "transfer_report.json").read_text())
    assert r1["efficiency"] == r2["efficiency"]  # exact, same integration
    assert r1["resolved_config"]["units"] == "G-units"


def test_transfer_report_replay_is_bit_identical(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        "[transfer]\nn_spins = 32\n\n[storage]\n"
        'envelope = "flat"\noptical_depth = 2.0\n'
    )
    d1, d2 = tmp_path / "a", tmp_path / "b"
    assert _run("transfer", "--config", str(cfg), "--out-dir", str(d1)) == 0
    report1 = d1 / "transfer_report.json"
    assert json.loads(report1.read_text())["eta_total"] > 0
    assert _run("transfer", "--config", str(report1), "--out-dir", str(d2)) == 0
    assert report1.read_bytes() == (d2 / "transfer_report.json").read_bytes()
    assert (d1 / "trajectory.csv").read_bytes() == (d2 / "trajectory.csv").read_bytes()


def test_transfer_rejects_unknown_protocol(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('[transfer]\nprotocol = "warp"\n')
    assert _run("transfer", "--config", str(cfg), "--out-dir", str(tmp_path)) == 2
    assert "unknown protocol" in capsys.readouterr().err


def test_transfer_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise TransferError("integrator gave up")

    monkeypatch.setattr("cribtransfer.cli.run_staggered", boom)
    assert _run("transfer", "--out-dir", str(tmp_path)) == 3
    assert "numerical failure" in capsys.readouterr().err


# ------------------------------------------------------------ sweep

def test_sweep_writes_csv_and_sidecar(tmp_path, capsys):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("[transfer]\nn_spins = 16\n")
    code = _run(
        "sweep", "--config", str(cfg), "--axis1", "delta_IB:0:2:3",
        "--out-dir", str(tmp_path),
    )
    assert code == 0
    assert "3 points, 0 failed" in capsys.readouterr().out
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "delta_IB,efficiency"
    assert len(lines) == 4
    sidecar = json.loads((tmp_path / "sweep.json").read_text())
    assert sidecar["schema"] == "cribtransfer.sweep-sidecar/1"
    assert sidecar["resolved_config"]["sweep"]["axis1"]["name"] == "delta_IB"
    assert sidecar["csv"] == "sweep.csv"


def test_sweep_resume_keeps_existing_rows(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("[transfer]\nn_spins = 16\n")
    args = ["sweep", "--config", str(cfg), "--axis1", "delta_IB:0:2:3",
            "--out-dir", str(tmp_path)]
    assert _run(*args) == 0
    csv = tmp_path / "sweep.csv"
    rows = csv.read_text().splitlines()
    # plant a sentinel value; --resume must trust and keep it
    rows[2] = rows[2].rsplit(",", 1)[0] + ",0.5"
    csv.write_text("\n".join(rows) + "\n")
    assert _run(*args, "--resume") == 0
    assert csv.read_text().splitlines()[2].endswith(",0.5")


def test_sweep_invalid_axis_lists_valid_names(tmp_path, capsys):
    code = _run("sweep", "--axis1", "bogus:0:1:4", "--out-dir", str(tmp_path))
    assert code == 2
    err = capsys.readouterr().err
    assert "valid axes" in err and "tau_R" in err


def test_sweep_needs_axis1(tmp_path, capsys):
    assert _run("sweep", "--out-dir", str(tmp_path)) == 2
    assert "axis1" in capsys.readouterr().err


# -------------------------------------------------------- reproduce

def test_reproduce_trajectory_preset(tmp_path, capsys):
    assert _run("reproduce", "fig3", "--out-dir", str(tmp_path)) == 0
    assert "final qubit population" in capsys.readouterr().out
    report = json.loads((tmp_path / "fig3_report.json").read_text())
    assert abs(report["efficiency"] - 0.92) < 0.03
    assert (tmp_path / "fig3_trajectory.csv").exists()
    # the embedded config replays through the transfer command
    d2 = tmp_path / "replay"
    assert _run("transfer", "--config", str(tmp_path / "fig3_report.json"),
                "--out-dir", str(d2)) == 0
    rep2 = json.loads((d2 / "transfer_report.json").read_text())
    assert rep2["efficiency"] == report["efficiency"]


def test_reproduce_heatmap_small_grid(tmp_path, capsys):
    assert _run("reproduce", "fig2", "--n-points", "3", "--out-dir", str(tmp_path)) == 0
    assert "9 points" in capsys.readouterr().out
    lines = (tmp_path / "fig2.csv").read_text().splitlines()
    assert lines[0] == "delta_IB,tau_R,efficiency"
    assert len(lines) == 10
    sidecar = json.loads((tmp_path / "fig2.json").read_text())
    assert sidecar["axes"][0]["n_points"] == 3


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_exercised_defaults_match_library():
    # the CLI default run and the library default run are the same point
    assert run_staggered(TransferParams()).efficiency == pytest.approx(
        0.91421993, abs=1e-6
    )
