"""Tests for the experiment-file CLI: validation, artifacts, determinism."""

import json

import numpy as np
import pytest

import apbench.linalg
from apbench.algorithms import AlgorithmKind, step_multiplies, step_multiplies_literal
from apbench.cli import (
    ConfigError,
    load_experiment_file,
    main,
    resolve_config_path,
)
from apbench.signals import design_highpass_fir


def _tiny_config(out_dir, **overrides):
    config = {
        "output_dir": str(out_dir),
        "iterations": 60,
        "ensemble_runs": 4,
        "base_seed": 7,
        "plant": {"design": {"num_taps": 7, "cutoff_fn": 0.5}},
        "noise": {"kind": "white", "sigma": 1.0},
        "algorithms": [
            {"name": "lms", "kind": "lms", "filter_length": 7, "mu": 0.05},
            {"name": "bndr_lms", "kind": "bndr_lms", "filter_length": 7,
             "mu_mode": "fixed", "mu": 1.0},
            {"name": "r_ap", "kind": "r_ap", "filter_length": 7, "projection_order": 3,
             "mu_mode": "fixed", "mu": 1.0},
        ],
    }
    config.update(overrides)
    return config


def _write_config(tmp_path, config, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return path


ARTIFACTS = ["lms_mse.csv", "lms_weights.csv", "lms_freqresp.csv",
             "bndr_lms_mse.csv", "bndr_lms_weights.csv", "bndr_lms_freqresp.csv",
             "r_ap_mse.csv", "r_ap_weights.csv", "r_ap_freqresp.csv", "summary.csv"]


class TestDesignCommand:
    def test_output_matches_library_bit_for_bit(self, capsys):
        assert main(["design", "13", "0.4"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 13
        printed = np.array([float(v) for v in lines])
        assert np.array_equal(printed, design_highpass_fir(13, 0.4))
        assert abs(printed.sum()) < 1e-3
        assert np.array_equal(printed, printed[::-1])

    def test_even_tap_count_is_validation_error(self, capsys):
        assert main(["design", "12", "0.4"]) == 1
        assert "odd" in capsys.readouterr().err

    def test_bad_cutoff_is_validation_error(self):
        assert main(["design", "13", "1.5"]) == 1


class TestRunCommand:
    def test_artifacts_and_summary(self, tmp_path):
        out = tmp_path / "out"
        path = _write_config(tmp_path, _tiny_config(out))
        assert main(["run", str(path)]) == 0
        for name in ARTIFACTS:
            assert (out / name).is_file(), name

        rows = (out / "summary.csv").read_text().strip().splitlines()
        header = rows[0].split(",")
        assert header == ["algorithm", "final_smoothed_mse_db", "t_m", "misalignment_db",
                          "total_multiplies_literal", "total_multiplies_corrected"]
        by_name = {r.split(",")[0]: r.split(",") for r in rows[1:]}
        assert set(by_name) == {"lms", "bndr_lms", "r_ap"}
        for name, kind, order in (("lms", AlgorithmKind.LMS, 1),
                                  ("bndr_lms", AlgorithmKind.BNDR_LMS, 2),
                                  ("r_ap", AlgorithmKind.R_AP, 3)):
            assert int(by_name[name][4]) == 60 * step_multiplies_literal(kind, 7, order)
            assert int(by_name[name][5]) == 60 * step_multiplies(kind, 7, order)

        mse_rows = (out / "lms_mse.csv").read_text().strip().splitlines()
        assert mse_rows[0] == "iteration,mse_db,smoothed_mse_db"
        assert len(mse_rows) == 61

        weight_rows = (out / "r_ap_weights.csv").read_text().strip().splitlines()
        assert weight_rows[0] == "tap_index,adaptive_weight,plant_weight"
        plant = design_highpass_fir(7, 0.5)
        got_plant = np.array([float(r.split(",")[2]) for r in weight_rows[1:]])
        assert np.array_equal(got_plant, plant)

        freq_rows = (out / "r_ap_freqresp.csv").read_text().strip().splitlines()
        assert freq_rows[0] == "omega_over_pi,magnitude_db,plant_magnitude_db"
        assert len(freq_rows) == 513

    def test_rerun_is_byte_identical(self, tmp_path):
        out_a, out_b, out_c = (tmp_path / x for x in ("a", "b", "c"))
        path = _write_config(tmp_path, _tiny_config(out_a))
        assert main(["run", str(path)]) == 0
        assert main(["run", str(path), "--out", str(out_b)]) == 0
        assert main(["run", str(path), "--out", str(out_c), "--threads", "3"]) == 0
        for name in ARTIFACTS:
            blob = (out_a / name).read_bytes()
            assert blob == (out_b / name).read_bytes(), name
            assert blob == (out_c / name).read_bytes(), name

    def test_out_flag_overrides_config_dir(self, tmp_path):
        cfg_dir = tmp_path / "ignored"
        out = tmp_path / "flagged"
        path = _write_config(tmp_path, _tiny_config(cfg_dir))
        assert main(["run", str(path), "--out", str(out)]) == 0
        assert (out / "summary.csv").is_file()
        assert not cfg_dir.exists()

    def test_unknown_key_rejected_before_running(self, tmp_path, capsys):
        out = tmp_path / "out"
        config = _tiny_config(out)
        config["typo_key"] = 1
        path = _write_config(tmp_path, config)
        assert main(["run", str(path)]) == 1
        assert "typo_key" in capsys.readouterr().err
        assert not out.exists()

    def test_nested_unknown_key_rejected(self, tmp_path):
        out = tmp_path / "out"
        config = _tiny_config(out)
        config["algorithms"][0]["step"] = 0.1
        path = _write_config(tmp_path, config)
        assert main(["run", str(path)]) == 1
        assert not out.exists()

    def test_invalid_invariants_rejected(self, tmp_path):
        out = tmp_path / "out"
        for patch in ({"ensemble_runs": 0}, {"iterations": 0},
                      {"noise": {"kind": "ar1", "sigma": 1.0, "ar_coefficient": 1.5}}):
            path = _write_config(tmp_path, _tiny_config(out, **patch))
            assert main(["run", str(path)]) == 1
            assert not out.exists()

    def test_fir_colored_noise_end_to_end(self, tmp_path):
        out = tmp_path / "out"
        config = _tiny_config(out, noise={"kind": "fir", "sigma": 1.0,
                                          "fir_coefficients": [1.0, 0.5, 0.25]})
        path = _write_config(tmp_path, config)
        assert main(["run", str(path)]) == 0
        assert (out / "summary.csv").is_file()

    def test_cross_kind_noise_keys_rejected(self, tmp_path):
        out = tmp_path / "out"
        for noise in ({"kind": "white", "sigma": 1.0, "ar_coefficient": 0.5},
                      {"kind": "ar1", "sigma": 1.0, "ar_coefficient": 0.5,
                       "fir_coefficients": [1.0]}):
            path = _write_config(tmp_path, _tiny_config(out, noise=noise))
            assert main(["run", str(path)]) == 1
            assert not out.exists()

    def test_duplicate_variant_names_rejected(self, tmp_path):
        config = _tiny_config(tmp_path / "out")
        config["algorithms"][1]["name"] = "lms"
        path = _write_config(tmp_path, config)
        assert main(["run", str(path)]) == 1

    def test_malformed_json_rejected(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        assert main(["run", str(path)]) == 1
        assert "JSON" in capsys.readouterr().err

    def test_missing_config_is_validation_error(self):
        assert main(["run", "no_such_config.json"]) == 1

    def test_runtime_failure_exit_code(self, tmp_path, capsys):
        # scalar-regressor BNDR-LMS makes the order-2 Gram singular mid-run
        config = _tiny_config(tmp_path / "out")
        config["algorithms"] = [{"name": "bndr_lms", "kind": "bndr_lms",
                                 "filter_length": 1, "mu_mode": "fixed", "mu": 1.0}]
        config["plant"] = {"coefficients": [1.0]}
        path = _write_config(tmp_path, config)
        assert main(["run", str(path)]) == 2
        err = capsys.readouterr().err
        assert "iteration" in err

    def test_bundled_configs_resolve_and_validate(self):
        for name in ("white", "colored"):
            spec = load_experiment_file(resolve_config_path(name))
            assert spec.iterations >= 500
            assert spec.ensemble_runs == 100
            assert [n for n, _ in spec.variants] == ["lms", "bndr_lms", "r_ap"]

    def test_unknown_bundled_name(self):
        with pytest.raises(ConfigError):
            resolve_config_path("grey")


class TestSelftestCommand:
    def test_passes_on_healthy_build(self, capsys):
        import time

        started = time.perf_counter()
        assert main(["selftest"]) == 0
        assert time.perf_counter() - started < 10.0
        out = capsys.readouterr().out
        assert out.count("PASS") == 3

    def test_negative_control_perturbed_solver(self, monkeypatch, capsys):
        real = apbench.linalg.solve_regularized

        def perturbed(gram, delta, rhs):
            return real(gram, 0.1, rhs)  # solves the wrong system

        monkeypatch.setattr(apbench.linalg, "solve_regularized", perturbed)
        assert main(["selftest"]) != 0
        assert "FAIL" in capsys.readouterr().out


def test_usage_errors_are_validation_failures():
    assert main(["bogus-command"]) == 1
    assert main(["run"]) == 1
