import json
import math

import numpy as np
import pytest

import spinrephase as sr
from spinrephase.cli import main
from spinrephase.presets import get_preset

TWO_PI = 2.0 * math.pi


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2))
    return str(path)


def zero_rate_config(tmp_path, out):
    return write_config(
        tmp_path,
        {
            "rates_override": {"delta0_hz": 0.0, "omega_ex_hz": 0.0, "gamma_c_per_s": 0.0, "detuning_hz": 0.0},
            "grid": {"scheme": "uniform", "n_points": 64, "e_max": 12.0},
            "kernel": {"kind": "uniform"},
            "times": {"t_final_s": 0.05, "dt_s": 0.001, "sample_every": 5},
            "output": {"path": str(out), "format": "csv"},
        },
    )


class TestDerive:
    def test_experiment1_preset_is_tight_sync(self, capsys, tmp_path):
        assert main(["derive", "--config", "experiment1"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["regime"]["label"] == "TightSync"
        assert all(doc["regime"][k] for k in (
            "knudsen_ok", "isre_dominates_collisions", "isre_dominates_inhomogeneity"))
        assert doc["rates_hz"]["omega_ex_hz"] == pytest.approx(7.5869, rel=1e-4)
        assert doc["rates_hz"]["gamma_c_per_s"] == pytest.approx(2.0847, rel=1e-4)
        assert doc["thermal_velocity_m_per_s"] == pytest.approx(4.0917e-3, rel=1e-4)

    def test_zero_density_dephasing(self, capsys, tmp_path):
        cfg = get_preset("experiment1")
        cfg["atomic"]["density_nbar_m3"] = 0.0
        path = write_config(tmp_path, cfg)
        assert main(["derive", "--config", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["rates_hz"]["omega_ex_hz"] == 0.0
        assert doc["rates_hz"]["gamma_c_per_s"] == 0.0
        assert doc["regime"]["label"] == "Dephasing"

    def test_malformed_config_exits_2_with_field(self, capsys, tmp_path):
        cfg = get_preset("experiment1")
        del cfg["atomic"]["temperature_k"]
        path = write_config(tmp_path, cfg)
        assert main(["derive", "--config", path]) == 2
        assert "atomic.temperature_k" in capsys.readouterr().err

    def test_both_rate_sources_rejected(self, capsys, tmp_path):
        cfg = get_preset("experiment1")
        cfg["rates_override"] = {"delta0_hz": 1.0, "omega_ex_hz": 1.0, "gamma_c_per_s": 0.0}
        path = write_config(tmp_path, cfg)
        assert main(["derive", "--config", path]) == 2
        assert "exactly one" in capsys.readouterr().err


class TestSimulate:
    def test_zero_rates_constant_contrast(self, tmp_path):
        out = tmp_path / "out"
        cfg = zero_rate_config(tmp_path, out)
        assert main(["simulate", "--config", cfg]) == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        contrasts = [float(line.split(",")[4]) for line in lines[1:]]
        assert contrasts == [contrasts[0]] * len(contrasts)
        assert contrasts[0] == pytest.approx(1.0, abs=1e-12)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert "resolved_config" in manifest

    def test_fig3_preset_shows_revival(self, tmp_path):
        out = tmp_path / "out"
        assert main(["simulate", "--config", "fig3", "--out", str(out)]) == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        t = np.array([float(line.split(",")[0]) for line in lines[1:]])
        c = np.array([float(line.split(",")[4]) for line in lines[1:]])
        curve = sr.ContrastCurve.from_sbar(
            t, np.stack([c, np.zeros_like(c), np.zeros_like(c)], axis=1)
        )
        t_rev = sr.fit_revival_time(curve)
        assert 0.05 < t_rev < 0.15

    def test_determinism_and_manifest_rerun(self, tmp_path):
        out1, out2, out3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        cfg = zero_rate_config(tmp_path, out1)
        assert main(["simulate", "--config", cfg]) == 0
        assert main(["simulate", "--config", cfg, "--out", str(out2)]) == 0
        csv1 = (out1 / "trajectory.csv").read_bytes()
        assert csv1 == (out2 / "trajectory.csv").read_bytes()
        # rerunning from the manifest reproduces the run byte-identically
        assert main([
            "simulate", "--config", str(out1 / "manifest.json"), "--out", str(out3)
        ]) == 0
        assert csv1 == (out3 / "trajectory.csv").read_bytes()

    def test_dump_grid(self, tmp_path):
        out = tmp_path / "out"
        cfg = zero_rate_config(tmp_path, out)
        grid_csv = tmp_path / "grid.csv"
        assert main(["simulate", "--config", cfg, "--dump-grid", str(grid_csv)]) == 0
        lines = grid_csv.read_text().splitlines()
        assert lines[0] == "node,weight"
        assert len(lines) == 65
        weights = np.array([float(line.split(",")[1]) for line in lines[1:]])
        assert weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_matrix_kernel_flag_matches_uniform(self, tmp_path):
        out_u, out_m = tmp_path / "u", tmp_path / "m"
        n = 64
        kpath = tmp_path / "ones.csv"
        np.savetxt(kpath, np.ones((n, n)), delimiter=",")
        cfg = write_config(
            tmp_path,
            {
                "rates_override": {"delta0_hz": 2.0, "omega_ex_hz": 5.0, "gamma_c_per_s": 1.0},
                "grid": {"scheme": "uniform", "n_points": n, "e_max": 12.0},
                "times": {"t_final_s": 0.05, "dt_s": 0.001, "sample_every": 5},
            },
        )
        assert main(["simulate", "--config", cfg, "--out", str(out_u), "--kernel", "uniform"]) == 0
        assert main(["simulate", "--config", cfg, "--out", str(out_m), "--kernel", f"matrix:{kpath}"]) == 0
        a = (out_u / "trajectory.csv").read_text().splitlines()
        b = (out_m / "trajectory.csv").read_text().splitlines()
        for la, lb in zip(a[1:], b[1:]):
            va = [float(x) for x in la.split(",")]
            vb = [float(x) for x in lb.split(",")]
            assert va == pytest.approx(vb, abs=1e-12)


class TestFlagOverrides:
    def test_grid_points_dt_and_renorm_enter_resolved_config(self, tmp_path):
        out = tmp_path / "out"
        cfg = get_preset("fig3")
        cfg["times"] = {"t_final_s": 0.02, "dt_s": 0.001, "sample_every": 5}
        cfg["output"]["path"] = str(out)
        path = write_config(tmp_path, cfg)
        assert main([
            "simulate", "--config", path,
            "--grid-points", "64", "--dt", "0.0005", "--renorm", "0.6",
        ]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        resolved = manifest["resolved_config"]
        assert resolved["grid"]["n_points"] == 64
        assert resolved["times"]["dt_s"] == 0.0005
        assert resolved["rates_override"]["exchange_renorm"] == 0.6
        assert manifest["rates_rad_per_s"]["exchange_renorm"] == 0.6
        assert manifest["rates_rad_per_s"]["omega_ex_effective"] == pytest.approx(
            0.6 * TWO_PI * 11.7, rel=1e-12
        )

    def test_bad_kernel_flag_rejected(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = zero_rate_config(tmp_path, out)
        assert main(["simulate", "--config", cfg, "--kernel", "banana"]) == 2
        assert "--kernel" in capsys.readouterr().err


class TestTwoClassCommand:
    def test_writes_trajectory(self, tmp_path):
        out = tmp_path / "out"
        assert main(["two-class", "--out", str(out)]) == 0
        lines = (out / "twoclass.csv").read_text().splitlines()
        assert lines[0].startswith("t,")
        assert len(lines) > 10


class TestFig3Command:
    def small_config(self, tmp_path, out, densities):
        cfg = get_preset("fig3")
        cfg["densities"] = densities
        cfg["times"]["tr_list_s"] = [0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14]
        cfg["sequence"]["n_detuning_steps"] = 7
        cfg["grid"] = {"scheme": "uniform", "n_points": 96, "e_max": 16.0}
        cfg["output"]["path"] = str(out)
        return write_config(tmp_path, cfg)

    def test_revival_and_no_revival_entries(self, tmp_path):
        out = tmp_path / "out"
        cfg = self.small_config(tmp_path, out, [0.2, 2.6])
        assert main(["fig3", "--config", cfg]) == 0
        summary = json.loads((out / "fig3_summary.json").read_text())
        by_density = {e["nbar"]: e for e in summary["densities"]}
        assert by_density[0.2]["no_revival"] is True
        assert by_density[0.2]["revival_time_s"] is None
        assert by_density[2.6]["no_revival"] is False
        assert 0.04 < by_density[2.6]["revival_time_s"] < 0.18
        assert (out / "fig3_nbar_0.2.csv").exists()
        assert (out / "fig3_nbar_2.6.csv").exists()

    def test_empty_densities_rejected(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = self.small_config(tmp_path, out, [])
        assert main(["fig3", "--config", cfg]) == 2
        assert "densities" in capsys.readouterr().err


class TestRamseyScanCommand:
    def test_scan_and_fit(self, tmp_path):
        out = tmp_path / "out"
        cfg = get_preset("fig3")
        cfg["sequence"]["ramsey_time_tr_s"] = 0.1
        cfg["sequence"]["n_detuning_steps"] = 9
        cfg["grid"] = {"scheme": "uniform", "n_points": 96, "e_max": 16.0}
        cfg["output"]["path"] = str(out)
        path = write_config(tmp_path, cfg)
        assert main(["ramsey-scan", "--config", path]) == 0
        lines = (out / "ramsey_scan.csv").read_text().splitlines()
        assert lines[0] == "t_or_detuning,value"
        assert len(lines) == 10
        fit = json.loads((out / "fringe.json").read_text())
        assert fit["model"] == "ramsey-fringe"
        assert 0.0 <= fit["parameters"]["contrast"] <= 1.0


class TestFitCommand:
    def test_exp_decay_round_trip(self, tmp_path, capsys):
        path = tmp_path / "decay.csv"
        t = np.arange(6.0)
        rows = "\n".join(f"{ti},{0.9 * math.exp(-ti / 58.0)!r}" for ti in t)
        path.write_text("t_or_detuning,value\n" + rows + "\n")
        assert main(["fit", "exp_decay", str(path)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["parameters"]["tau_s"] == pytest.approx(58.0, rel=1e-9)

    def test_atom_number_round_trip(self, tmp_path, capsys):
        path = tmp_path / "atoms.csv"
        t = np.linspace(0.0, 5.0, 11)
        rows = "\n".join(f"{ti},{0.5 * 24.8e3 * (1 + math.exp(-ti / 8.7))!r}" for ti in t)
        path.write_text("t_or_detuning,value\n" + rows + "\n")
        assert main(["fit", "atom_number", str(path)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["parameters"]["n_total"] == pytest.approx(24.8e3, rel=1e-6)
        assert doc["parameters"]["tau_s"] == pytest.approx(8.7, rel=1e-6)

    def test_revival_of_monotone_data_fails_numeric(self, tmp_path, capsys):
        path = tmp_path / "mono.csv"
        path.write_text("t,value\n0,1.0\n1,0.5\n2,0.25\n3,0.125\n")
        assert main(["fit", "revival", str(path)]) == 3
        assert "numeric failure" in capsys.readouterr().err

    def test_single_row_is_precondition_error(self, tmp_path, capsys):
        path = tmp_path / "one.csv"
        path.write_text("t,value\n0,1.0\n")
        assert main(["fit", "exp_decay", str(path)]) == 3
        assert "at least 2" in capsys.readouterr().err

    def test_parse_error_exits_2_with_line(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("t,value\n0,1.0\nx,2.0\n")
        assert main(["fit", "exp_decay", str(path)]) == 2
        assert ":3:" in capsys.readouterr().err

    def test_missing_file_exits_4(self, tmp_path, capsys):
        assert main(["fit", "exp_decay", str(tmp_path / "nope.csv")]) == 4


def test_preset_documents_match_packaged_files(tmp_path):
    # the JSON presets shipped in the repo root mirror the packaged ones
    import pathlib

    repo_presets = pathlib.Path(__file__).resolve().parents[1] / "presets"
    for name in ("experiment1", "fig3"):
        on_disk = json.loads((repo_presets / f"{name}.json").read_text())
        assert on_disk == get_preset(name)
