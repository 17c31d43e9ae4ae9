import json
import os

import numpy as np
import pytest

from magzak import (
    DomainError,
    ParseError,
    TorusGrid,
    UnknownGenerator,
    ValidationError,
    generate_initial_data,
    read_state_snapshot,
    write_state_snapshot,
)
from magzak import fields as fs
from magzak.cli import main
from magzak.config import parse_config


class TestConfigParsing:
    def test_empty_text_gives_documented_defaults(self):
        cfg = parse_config("")
        assert cfg.grid.d == 2 and cfg.grid.N == 64
        assert abs(cfg.grid.P - 16.0 * np.pi) < 1e-12
        assert cfg.params.alpha == 1.0 and cfg.params.epsilon == 0.0 and cfg.params.s == 2.0
        assert cfg.integrator.scheme == "strang" and cfg.integrator.dt == 1e-3
        assert cfg.initial["generator"] == "gaussian-packet"
        assert cfg.seed == 0

    def test_alpha_domain_cited(self):
        with pytest.raises(ValidationError, match="alpha >= 1"):
            parse_config("[params]\nalpha = 0.5\n")

    def test_duplicate_key(self):
        with pytest.raises(ParseError):
            parse_config("[grid]\nN = 64\nN = 128\n")

    def test_unknown_key_and_section(self):
        with pytest.raises(ParseError):
            parse_config("[grid]\nQ = 3\n")
        with pytest.raises(ParseError):
            parse_config("[warp]\nfactor = 9\n")

    def test_syntax_errors_carry_line_numbers(self):
        with pytest.raises(ParseError) as err:
            parse_config("[grid]\nN 64\n")
        assert err.value.line == 2

    def test_key_outside_section(self):
        with pytest.raises(ParseError):
            parse_config("N = 64\n")

    def test_epsilon_and_s_domains(self):
        with pytest.raises(ValidationError):
            parse_config("[params]\nepsilon = 1.5\n")
        with pytest.raises(ValidationError):
            parse_config("[grid]\nd = 3\n[params]\ns = 1.2\n")

    def test_scheme_and_steps(self):
        with pytest.raises(ValidationError):
            parse_config("[integrator]\nscheme = euler\n")
        with pytest.raises(ValidationError):
            parse_config("[integrator]\ndt = 0.2\nt_win = 0.1\n")

    def test_snapshot_path_must_resolve(self):
        with pytest.raises(ValidationError):
            parse_config("[initial]\ngenerator = snapshot\npath = /does/not/exist.mzk\n")

    def test_generator_key_scoping(self):
        with pytest.raises(ValidationError):
            parse_config("[initial]\ngenerator = single-mode\nwidth = 2.0\n")

    def test_comments_and_valid_document(self):
        text = """
# full document
[grid]
d = 2
N = 32
P = 6.283185307179586

[params]
alpha = 1.25   # dispersion weight
epsilon = 0.05

[integrator]
scheme = picard
dt = 0.005
t_end = 0.1

[initial]
generator = single-mode
k_index = 1,0
amplitude = 0.2
orientation = transverse

[study]
ladder = 0.2, 0.1
"""
        cfg = parse_config(text)
        assert cfg.grid.N == 32
        assert cfg.params.alpha == 1.25
        assert cfg.integrator.scheme == "picard"
        assert cfg.initial["k_index"] == [1, 0]
        assert cfg.study["ladder"] == [0.2, 0.1]


class TestGenerators:
    def test_single_mode_transverse(self, grid2, params):
        st = generate_initial_data(
            {"generator": "single-mode", "k_index": (1, 0), "amplitude": 0.1,
             "orientation": "transverse"},
            grid2,
            params=params,
        )
        expected = 0.1 * np.exp(1j * grid2.x[0])
        assert np.max(np.abs(grid2.to_physical(st.E[1]) - expected)) < 1e-12
        assert np.max(np.abs(st.E[0])) < 1e-12
        assert np.max(np.abs(st.n)) == 0

    def test_same_seed_bit_identical(self, sim_grid, params):
        spec = {"generator": "random-smooth", "e_amp": 0.1, "n_amp": 0.2, "kcut": 2.0}
        a = generate_initial_data(spec, sim_grid, seed=42, params=params)
        b = generate_initial_data(spec, sim_grid, seed=42, params=params)
        for x, y in zip(a.fields(), b.fields()):
            assert np.array_equal(x, y)

    def test_random_smooth_grid_converged(self, params):
        # fixed physical cutoff: the same field reappears on the refined grid
        spec = {"generator": "random-smooth", "e_amp": 0.1, "decay": 4.0, "kcut": 2.0,
                "seed": 7}
        coarse = TorusGrid(2, 64)
        fine = TorusGrid(2, 128)
        a = generate_initial_data(spec, coarse, params=params)
        b = generate_initial_data(spec, fine, params=params)
        na = fs.sobolev_norm(coarse, a.E, params.s + 1.0)
        nb = fs.sobolev_norm(fine, b.E, params.s + 1.0)
        assert abs(na - nb) / na < 0.01

    def test_gaussian_packet_norm_pinned(self, sim_grid, params):
        st = generate_initial_data(
            {"generator": "gaussian-packet", "e_norm": 0.1}, sim_grid, params=params
        )
        assert abs(fs.l2_norm(sim_grid, st.E) - 0.1) < 1e-13

    def test_states_satisfy_invariants(self, sim_grid, params):
        st = generate_initial_data(
            {"generator": "random-smooth", "e_amp": 0.1, "n_amp": 0.1, "n1_amp": 0.1,
             "b_amp": 0.1, "b1_amp": 0.1, "kcut": 2.0},
            sim_grid,
            seed=3,
            params=params,
        )
        assert st.imag_residue() < 1e-12
        assert st.mean_residue() == 0.0
        assert st.embedding_residue() == 0.0

    def test_unknown_generator(self, grid2, params):
        with pytest.raises(UnknownGenerator):
            generate_initial_data({"generator": "vortex"}, grid2, params=params)

    def test_snapshot_generator(self, tmp_path, sim_grid, params):
        st = generate_initial_data(
            {"generator": "gaussian-packet", "e_norm": 0.1}, sim_grid, params=params
        )
        path = tmp_path / "init.mzk"
        write_state_snapshot(path, st)
        back = generate_initial_data(
            {"generator": "snapshot", "path": str(path)}, sim_grid, params=params
        )
        for a, b in zip(st.fields(), back.fields()):
            assert np.array_equal(a, b)


def _write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


BASE_CFG = """
[grid]
d = 2
N = 32

[params]
epsilon = 0.1

[integrator]
dt = 0.005
t_end = {t_end}

[initial]
generator = gaussian-packet
e_norm = 0.05

[output]
diag_interval = 0.01
"""


class TestCli:
    def test_simulate_t_end_zero(self, tmp_path):
        cfg = _write_config(tmp_path, BASE_CFG.format(t_end=0.0))
        out = str(tmp_path / "out")
        code = main(["simulate", "--config", cfg, "--out", out, "--quiet"])
        assert code == 0
        lines = open(os.path.join(out, "diagnostics.ndjson")).read().splitlines()
        assert len(lines) == 1
        manifest = json.load(open(os.path.join(out, "manifest.json")))
        assert manifest["status"] == "ok"
        assert manifest["seed"] == 0
        assert "version" in manifest
        assert os.path.exists(os.path.join(out, "state_final.mzk"))

    def test_simulate_reproducible_ndjson(self, tmp_path):
        cfg = _write_config(tmp_path, BASE_CFG.format(t_end=0.02))
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["simulate", "--config", cfg, "--out", out1, "--quiet"]) == 0
        assert main(["simulate", "--config", cfg, "--out", out2, "--quiet"]) == 0
        a = open(os.path.join(out1, "diagnostics.ndjson"), "rb").read()
        b = open(os.path.join(out2, "diagnostics.ndjson"), "rb").read()
        assert a == b

    def test_usage_error_missing_config(self, tmp_path):
        code = main(["simulate", "--config", str(tmp_path / "nope.cfg"), "--quiet"])
        assert code == 1

    def test_config_error_exit_one(self, tmp_path):
        cfg = _write_config(tmp_path, "[params]\nalpha = 0.5\n")
        assert main(["simulate", "--config", cfg, "--quiet"]) == 1

    def test_converge_single_entry_usage_error(self, tmp_path):
        text = BASE_CFG.format(t_end=0.02) + "\n[study]\nladder = 0.1\nT = 0.02\n"
        cfg = _write_config(tmp_path, text)
        out = str(tmp_path / "out")
        assert main(["converge", "--config", cfg, "--out", out, "--quiet"]) == 1
        manifest = json.load(open(os.path.join(out, "manifest.json")))
        assert manifest["status"].startswith("usage-error")

    def test_converge_writes_outputs(self, tmp_path):
        text = BASE_CFG.format(t_end=0.02) + "\n[study]\nladder = 0.2, 0.1\nT = 0.02\n"
        cfg = _write_config(tmp_path, text)
        out = str(tmp_path / "out")
        assert main(["converge", "--config", cfg, "--out", out, "--quiet"]) == 0
        assert os.path.exists(os.path.join(out, "convergence.csv"))
        summary = json.load(open(os.path.join(out, "convergence_summary.json")))
        assert len(summary["combined"]) == 1

    def test_physics_failure_exit_two(self, tmp_path):
        text = """
[grid]
d = 2
N = 32

[integrator]
scheme = picard
dt = 0.05
t_win = 0.8
t_end = 0.8
max_iter = 10

[initial]
generator = gaussian-packet
e_norm = 5.0
n_amp = 20.0
b_amp = 10.0

[output]
diag_interval = 0.4
"""
        cfg = _write_config(tmp_path, text)
        out = str(tmp_path / "out")
        code = main(["simulate", "--config", cfg, "--out", out, "--quiet"])
        assert code == 2
        manifest = json.load(open(os.path.join(out, "manifest.json")))
        assert manifest["status"].startswith("physics-failure")

    def test_thresholds_reporting_not_failing(self, tmp_path):
        # data violating the smallness condition still exits 0 with a report
        text = BASE_CFG.format(t_end=0.0).replace("e_norm = 0.05", "e_norm = 10.0")
        cfg = _write_config(tmp_path, text)
        out = str(tmp_path / "out")
        assert main(["thresholds", "--config", cfg, "--out", out, "--quiet"]) == 0
        report = json.load(open(os.path.join(out, "thresholds.json")))
        assert report["condition_2d"] is False
        assert report["passed"] is False

    def test_split_data_outputs(self, tmp_path):
        text = BASE_CFG.format(t_end=0.0).replace(
            "generator = gaussian-packet\ne_norm = 0.05",
            "generator = random-smooth\ne_amp = 0.1\nn1_amp = 0.2\nb_amp = 0.2\nkcut = 2.0",
        )
        cfg = _write_config(tmp_path, text)
        out = str(tmp_path / "out")
        assert main(["split-data", "--config", cfg, "--out", out, "--quiet"]) == 0
        mod = read_state_snapshot(os.path.join(out, "initial_modified.mzk"), s=2.0)
        low = read_state_snapshot(os.path.join(out, "low_frequency.mzk"), s=2.0)
        g = mod.grid
        # the low container holds spectra supported in |k| <= 2
        assert np.max(np.abs(low.n_t * (g.kabs > 2.0))) < 1e-12
        report = json.load(open(os.path.join(out, "split_report.json")))
        assert "n1L_H4" in report

    def test_verify_inequalities_outputs(self, tmp_path):
        text = BASE_CFG.format(t_end=0.0) + "\n[study]\nsamples = 5\n"
        cfg = _write_config(tmp_path, text)
        out = str(tmp_path / "out")
        assert main(["verify-inequalities", "--config", cfg, "--out", out, "--quiet"]) == 0
        summary = json.load(open(os.path.join(out, "inequalities.json")))
        assert summary["trilinear"]["max_J13_plus_J22"] < 1e-11
        csv_lines = open(os.path.join(out, "kato_ponce_samples.csv")).read().splitlines()
        assert len(csv_lines) == 6  # header + 5 samples

    def test_groundstate_subcommand(self, tmp_path):
        text = BASE_CFG.format(t_end=0.0) + "\n[groundstate]\nd = 2\nN = 512\nP = 56.0\n"
        cfg = _write_config(tmp_path, text)
        out = str(tmp_path / "out")
        assert main(["groundstate", "--config", cfg, "--out", out, "--quiet"]) == 0
        report = json.load(open(os.path.join(out, "groundstate.json")))
        assert report["mass_rel_error_vs_oracle"] < 5e-3
        gs_file = os.path.join(out, "groundstate_d2.mzk")
        assert os.path.exists(gs_file)

    def test_threads_env_fallback(self, tmp_path, monkeypatch):
        cfg = _write_config(tmp_path, BASE_CFG.format(t_end=0.0))
        out = str(tmp_path / "out")
        monkeypatch.setenv("MAGZAK_THREADS", "3")
        assert main(["simulate", "--config", cfg, "--out", out, "--quiet"]) == 0
        manifest = json.load(open(os.path.join(out, "manifest.json")))
        assert manifest["threads"] == 3

    def test_seed_flag_overrides(self, tmp_path):
        text = BASE_CFG.format(t_end=0.0).replace(
            "generator = gaussian-packet\ne_norm = 0.05",
            "generator = random-smooth\ne_amp = 0.1\nkcut = 2.0",
        )
        cfg = _write_config(tmp_path, text)
        out1, out2, out3 = (str(tmp_path / x) for x in ("s1", "s2", "s3"))
        main(["simulate", "--config", cfg, "--out", out1, "--seed", "11", "--quiet"])
        main(["simulate", "--config", cfg, "--out", out2, "--seed", "11", "--quiet"])
        main(["simulate", "--config", cfg, "--out", out3, "--seed", "12", "--quiet"])
        s1 = read_state_snapshot(os.path.join(out1, "state_final.mzk"), s=2.0)
        s2 = read_state_snapshot(os.path.join(out2, "state_final.mzk"), s=2.0)
        s3 = read_state_snapshot(os.path.join(out3, "state_final.mzk"), s=2.0)
        assert np.array_equal(s1.E, s2.E)
        assert not np.array_equal(s1.E, s3.E)
