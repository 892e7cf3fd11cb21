import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cnoidal import cli
from cnoidal.cli import COLUMNS, ConfigError, RunConfig, main


def read_csv(text):
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    return rows[0], np.array(rows[1:], dtype=float)


def simulate(tmp_path, *flags, name="out.csv"):
    out = tmp_path / name
    code = main(["simulate", *flags, "--out", str(out)])
    return code, out


class TestRunConfig:
    def test_json_round_trip(self):
        cfg = RunConfig(field="cnoidal", N=2, k=0.3, delta=-1.5, omega=2.0, samples=17, format="json")
        assert RunConfig.from_json(cfg.to_json()) == cfg

    @pytest.mark.parametrize("kwargs", [
        {"field": "other"}, {"method": "other"}, {"samples": 1}, {"tau_max": -1.0},
        {"k": 1.5}, {"N": 3, "delta": 1.0}, {"field": "lp-harmonic"}, {"field": "soliton", "k": 0.5},
        {"omega": 1.0}, {"delta": math.nan},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ConfigError):
            RunConfig(**kwargs).validate()

    def test_unknown_keys(self):
        with pytest.raises(ConfigError):
            RunConfig.from_json('{"bogus": 1}')
        with pytest.raises(ConfigError):
            RunConfig.from_json("[1, 2]")

    def test_exact_allowed_for_limits(self):
        RunConfig(N=3, delta=0.0).validate()
        RunConfig(field="soliton", N=3, k=1.0, delta=0.5, tau_min=-20).validate()


class TestSimulate:
    def test_csv_schema_and_norm(self, tmp_path):
        code, out = simulate(tmp_path, "--N", "2", "--k", "0.25", "--delta", "0.4", "--samples", "51")
        assert code == 0
        header, rows = read_csv(out.read_text())
        assert header == list(COLUMNS)
        assert rows.shape == (51, 9)
        s = rows[:, 5:8]
        assert np.max(np.abs(np.sum(s * s, axis=1) - 1)) < 1e-6
        assert rows[0, 7] == pytest.approx(1.0)

    def test_ode_rows_normalized(self, tmp_path):
        code, out = simulate(tmp_path, "--method", "ode", "--field", "cnoidal", "--omega", "2",
                             "--k", "0.9", "--samples", "41")
        assert code == 0
        _, rows = read_csv(out.read_text())
        s = rows[:, 5:8]
        assert np.max(np.abs(np.sum(s * s, axis=1) - 1)) < 1e-6

    def test_deterministic(self, tmp_path):
        flags = ("--method", "ode", "--k", "0.5", "--delta", "3", "--samples", "31")
        _, a = simulate(tmp_path, *flags, name="a.csv")
        _, b = simulate(tmp_path, *flags, name="b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_redirect_note(self, tmp_path):
        code, out = simulate(tmp_path, "--delta", "0", "--samples", "5")
        assert code == 0
        assert "# note: zero detuning redirected" in out.read_text()

    def test_rwa_column(self, tmp_path):
        code, out = simulate(tmp_path, "--field", "rabi", "--method", "rwa", "--amplitude", "0.5",
                             "--omega", "1", "--delta", "0", "--samples", "21")
        assert code == 0
        _, rows = read_csv(out.read_text())
        assert np.allclose(rows[:, 7], np.cos(rows[:, 0]), atol=1e-14)

    def test_json_output(self, tmp_path):
        code, out = simulate(tmp_path, "--format", "json", "--samples", "5", name="o.json")
        assert code == 0
        data = json.loads(out.read_text())
        assert set(COLUMNS) <= set(data["columns"])
        assert data["params"]["samples"] == 5
        assert len(data["columns"]["tau"]) == 5

    def test_save_config_round_trip(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        code, first = simulate(tmp_path, "--N", "2", "--k", "0.3", "--delta", "2", "--samples", "11",
                               "--save-config", str(cfg_path), name="first.csv")
        assert code == 0
        saved = RunConfig.from_json(cfg_path.read_text())
        assert saved.N == 2 and saved.k == 0.3
        code, second = simulate(tmp_path, "--config", str(cfg_path), name="second.csv")
        assert first.read_text() == second.read_text().replace("second.csv", "first.csv")

    def test_preset_adds_reference(self, tmp_path):
        code, out = simulate(tmp_path, "--preset", "fig2a")
        assert code == 0
        header, rows = read_csv(out.read_text())
        assert header[-1] == "s3_reference"
        assert rows.shape[1] == len(COLUMNS) + 1

    def test_exit_codes(self, tmp_path, capsys):
        code, _ = simulate(tmp_path, "--N", "3", "--delta", "1")
        assert code == cli.EXIT_CONFIG
        code, _ = simulate(tmp_path, "--field", "soliton", "--k", "0.5")
        assert code == cli.EXIT_CONFIG
        code, _ = simulate(tmp_path, "--delta", "1", "--omega0", "2")
        assert code == cli.EXIT_CONFIG
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--k", "abc"])
        assert exc.value.code == 2

    def test_solver_error_exit(self, tmp_path, monkeypatch):
        def boom(*a, **kw):
            raise cli.UnresolvedBranchError("forced")
        monkeypatch.setattr(cli, "run", boom)
        code, _ = simulate(tmp_path, "--samples", "5")
        assert code == cli.EXIT_SOLVER


class TestCompare:
    def report(self, capsys):
        return json.loads(capsys.readouterr().out.strip().splitlines()[-1])

    def test_exact_vs_ode(self, capsys):
        code = main(["compare", "--N", "2", "--k", "0.5", "--delta", "3", "--tau-max", "20", "--samples", "101"])
        rep = self.report(capsys)
        assert code == 0 and rep["max_abs_ds3"] < 1e-6

    def test_identical(self, tmp_path, capsys):
        cfg = tmp_path / "a.json"
        cfg.write_text(RunConfig(samples=21).to_json())
        code = main(["compare", "--config-a", str(cfg), "--config-b", str(cfg)])
        assert code == 0 and self.report(capsys)["max_abs_ds3"] == 0.0

    def test_grid_mismatch(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        a.write_text(RunConfig(samples=21).to_json())
        b.write_text(RunConfig(samples=22).to_json())
        assert main(["compare", "--config-a", str(a), "--config-b", str(b)]) == cli.EXIT_CONFIG

    def test_threshold_and_residuals(self, tmp_path, capsys):
        res = tmp_path / "res.csv"
        code = main(["compare", "--preset", "fig2b", "--threshold", "1e-9", "--residuals", str(res)])
        rep = self.report(capsys)
        assert code == cli.EXIT_THRESHOLD and not rep["passed"]
        header, rows = read_csv(res.read_text())
        assert header == ["tau", "s3_a", "s3_b", "ds3"]
        assert np.max(np.abs(rows[:, 3])) == pytest.approx(rep["max_abs_ds3"])


class TestResonanceCommand:
    def test_rabi_table(self, capsys):
        assert main(["resonance", "rabi", "--N", "2", "--m", "1", "2", "3", "4"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert list(rows[0]) == ["kind", "N", "index", "k", "value", "residual"]
        ks = [float(r["k"]) for r in rows]
        assert np.allclose(ks, [0.4701, 0.2461, 0.1655, 0.1245], atol=5e-4)
        assert all(float(r["residual"]) < 1e-12 for r in rows)

    def test_chebyshev_json(self, capsys):
        assert main(["resonance", "chebyshev", "--N", "2", "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert rows[0]["k"] == pytest.approx(0.70711, abs=1e-5)

    def test_bloch_siegert(self, capsys):
        assert main(["resonance", "bloch-siegert", "--k", "0", "--format", "json"]) == 0
        assert json.loads(capsys.readouterr().out)[0]["value"] == 1.0

    def test_invalid(self):
        assert main(["resonance", "rabi", "--N", "2"]) == cli.EXIT_CONFIG
        assert main(["resonance", "rabi", "--N", "0", "--m", "1"]) == cli.EXIT_CONFIG


class TestFigure:
    @pytest.mark.parametrize("fig,panels", [("fig1", 2), ("fig2", 2), ("fig3", 4)])
    def test_datasets(self, tmp_path, fig, panels):
        assert main(["figure", fig, "--out-dir", str(tmp_path), "--samples", "81"]) == 0
        manifest = json.loads((tmp_path / f"{fig}_manifest.json").read_text())
        assert len(manifest["panels"]) == panels
        for panel in manifest["panels"]:
            header, rows = read_csv((tmp_path / panel["file"]).read_text())
            assert header == panel["columns"]
            assert rows.shape == (81, len(header))
            assert np.all(np.abs(rows[:, 1:]) <= 1 + 1e-9)

    def test_fig1_exact_matches_ode(self, tmp_path):
        main(["figure", "fig1", "--out-dir", str(tmp_path), "--samples", "81"])
        header, rows = read_csv((tmp_path / "fig1_N2_k0.70711.csv").read_text())
        assert np.max(np.abs(rows[:, 1] - rows[:, 2])) < 1e-6


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cnoidal", "resonance", "chebyshev", "--N", "3"],
                          capture_output=True, text=True, check=True)
    assert "0.8660254" in proc.stdout
