import csv
import json

import numpy as np
import pytest

from cloaksynth.cli import main
from cloaksynth.config import ConfigError, load_config
from cloaksynth.sphere_grid import build_grid

BASE = """
# compact configuration used across the CLI tests
k = 1.0
a = 1.0
h_real = 1.0
cap_aperture_deg = 30
l_max = 12
basis_p = 2
basis_m = 1
lambda_list = 1e-6, 1e-2
figures = false
"""


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(BASE + f"output_dir = {tmp_path / 'out'}\n")
    return path


def read_summary(tmp_path):
    return json.loads((tmp_path / "out" / "summary.json").read_text())


class TestConfig:
    def test_round_trip(self, cfg_file):
        cfg = load_config(cfg_file)
        assert cfg.k == 1.0
        assert cfg.cap_aperture_deg == 30.0
        assert cfg.lambda_list == (1e-6, 1e-2)
        assert cfg.figures is False

    def test_overrides_win(self, cfg_file):
        cfg = load_config(cfg_file, {"k": "2.5", "alpha": "1 0 0"})
        assert cfg.k == 2.5
        assert cfg.alpha == (1.0, 0.0, 0.0)

    def test_vectors_normalized(self, cfg_file):
        cfg = load_config(cfg_file, {"alpha": "0 0 3"})
        assert cfg.alpha == (0.0, 0.0, 1.0)

    def test_unknown_key_rejected(self, cfg_file):
        with pytest.raises(ConfigError):
            load_config(cfg_file, {"wavelength": "3"})

    def test_bad_values_rejected(self, cfg_file):
        for key, value in [("k", "-1"), ("h_imag", "-0.5"),
                           ("bc_variant", "neumann"), ("cap_aperture_deg", "0"),
                           ("alpha", "0 0 0"), ("k", "fast")]:
            with pytest.raises(ConfigError):
                load_config(cfg_file, {key: value})

    def test_malformed_line_location(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("k = 1\nnot a pair\n")
        with pytest.raises(ConfigError, match="2"):
            load_config(path)


class TestExitCodes:
    def test_ok(self, cfg_file):
        assert main(["scatter", "--config", str(cfg_file)]) == 0

    def test_config_error(self, cfg_file):
        assert main(["scatter", "--config", str(cfg_file), "--k", "-2"]) == 2

    def test_dangling_override(self, cfg_file):
        assert main(["scatter", "--config", str(cfg_file), "--k"]) == 2

    def test_solver_failure(self, cfg_file):
        # far too coarse a band limit: the mixed residual gate trips
        assert main(["scatter", "--config", str(cfg_file), "--l_max", "4"]) == 3

    def test_io_error(self, cfg_file, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("")
        code = main(["scatter", "--config", str(cfg_file),
                     "--output_dir", str(blocker)])
        assert code == 5

    def test_unknown_mode_rejected(self, cfg_file):
        with pytest.raises(SystemExit):
            main(["transmogrify", "--config", str(cfg_file)])


class TestSummaries:
    def test_schema(self, cfg_file, tmp_path):
        assert main(["scatter", "--config", str(cfg_file)]) == 0
        summary = read_summary(tmp_path)
        assert set(summary) == {"mode", "config_echo", "sigma_before",
                                "sigma_after", "reduction_db", "control_norm",
                                "lambda_used", "solve_reports", "checks",
                                "timing_seconds"}
        assert set(summary["checks"]) == {"optical_residual",
                                          "reciprocity_residual",
                                          "oracle_rel_err"}
        assert summary["mode"] == "scatter"
        assert summary["sigma_before"] > 0
        assert summary["timing_seconds"] > 0
        assert len(summary["solve_reports"]) == 1

    def test_validate_checks(self, cfg_file, tmp_path):
        assert main(["validate", "--config", str(cfg_file)]) == 0
        summary = read_summary(tmp_path)
        checks = summary["checks"]
        assert checks["oracle_rel_err"] < 1e-6
        assert checks["optical_residual"] < 1e-6
        assert checks["reciprocity_residual"] < 1e-6

    def test_cloak_reports_reduction(self, cfg_file, tmp_path):
        assert main(["cloak", "--config", str(cfg_file)]) == 0
        summary = read_summary(tmp_path)
        assert summary["lambda_used"] == 1e-6
        assert summary["sigma_after"] <= summary["sigma_before"]
        assert summary["reduction_db"] >= 0

    def test_determinism_modulo_timing(self, cfg_file, tmp_path):
        assert main(["cloak", "--config", str(cfg_file)]) == 0
        first = read_summary(tmp_path)
        assert main(["cloak", "--config", str(cfg_file)]) == 0
        second = read_summary(tmp_path)
        first.pop("timing_seconds")
        second.pop("timing_seconds")
        assert first == second


class TestArtifacts:
    def test_pattern_csv_format(self, cfg_file, tmp_path):
        assert main(["scatter", "--config", str(cfg_file)]) == 0
        with open(tmp_path / "out" / "pattern.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["theta_rad", "phi_rad", "re_A", "im_A", "abs2_A"]
        grid = build_grid(12)
        assert len(rows) - 1 == grid.n_nodes
        data = np.array(rows[1:], dtype=float)
        np.testing.assert_allclose(data[:, 4], data[:, 2] ** 2 + data[:, 3] ** 2,
                                   atol=1e-12)

    def test_sigma_from_emitted_pattern(self, cfg_file, tmp_path):
        assert main(["scatter", "--config", str(cfg_file)]) == 0
        summary = read_summary(tmp_path)
        data = np.loadtxt(tmp_path / "out" / "pattern.csv", delimiter=",",
                          skiprows=1)
        grid = build_grid(12)
        quad = grid.weights @ data[:, 4]
        assert quad == pytest.approx(summary["sigma_before"], rel=1e-10)

    def test_coefficient_dump_format(self, cfg_file, tmp_path):
        assert main(["scatter", "--config", str(cfg_file)]) == 0
        with open(tmp_path / "out" / "coeffs.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["l", "m", "re", "im"]
        assert len(rows) - 1 == 13 * 13
        assert rows[1][:2] == ["0", "0"]
        assert rows[-1][:2] == ["12", "12"]

    def test_sweep_outputs(self, cfg_file, tmp_path):
        assert main(["sweep", "--config", str(cfg_file), "--jobs", "2"]) == 0
        with open(tmp_path / "out" / "sweep.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["lambda", "sigma_after", "reduction_db", "control_norm"]
        assert len(rows) - 1 == 2

    def test_density_outputs(self, cfg_file, tmp_path):
        assert main(["density", "--config", str(cfg_file)]) == 0
        with open(tmp_path / "out" / "density.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["basis_p", "basis_m", "n_columns", "residual"]
        residuals = [float(r[3]) for r in rows[1:]]
        assert residuals == sorted(residuals, reverse=True)

    def test_figures_rendered_on_request(self, cfg_file, tmp_path):
        assert main(["cloak", "--config", str(cfg_file),
                     "--figures", "true"]) == 0
        assert (tmp_path / "out" / "cloak.png").stat().st_size > 0
