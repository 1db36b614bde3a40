"""Command-line interface: artifacts, determinism, exit codes."""

from pathlib import Path

import numpy as np
import pytest

from pmrsim import (
    DenseOracle,
    dense_matrix,
    gamma_bounds,
    parse_hamiltonian_file,
    pauli_to_pmr,
    plan_segments,
)
from pmrsim.cli import main

DATA = Path(__file__).parent / "data"
SAMPLE = str(DATA / "sample4q.txt")


def read_csv(path):
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def write_diag_file(tmp_path):
    path = tmp_path / "diag.txt"
    path.write_text("0.7 ZZI\n-0.4 IZZ\n0.25 ZIZ\n")
    return str(path)


class TestEvolveCommand:
    def test_diagonal_file_is_exact(self, tmp_path):
        out = tmp_path / "run.csv"
        code = main(
            ["evolve", "--hamiltonian", write_diag_file(tmp_path), "--t", "3.0",
             "--epsilon", "0.5", "--output", str(out)]
        )
        assert code == 0
        row = read_csv(out)[0]
        assert float(row["error_2norm"]) <= 1e-13
        assert row["Q"] == "0" and row["r"] == "1"

    def test_bundled_sample_meets_tolerance(self, tmp_path):
        h = pauli_to_pmr(parse_hamiltonian_file(SAMPLE))
        g = gamma_bounds(h)
        t = 5.0 / g.gamma_total
        out = tmp_path / "run.csv"
        code = main(
            ["evolve", "--hamiltonian", SAMPLE, "--t", repr(t), "--epsilon", "1e-6",
             "--output", str(out), "--check"]
        )
        assert code == 0
        row = read_csv(out)[0]
        assert float(row["error_2norm"]) <= 1e-6
        assert float(row["T"]) == pytest.approx(5.0)

    def test_seeded_runs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["evolve", "--hamiltonian", SAMPLE, "--t", "1.1", "--epsilon", "1e-5",
                "--seed", "7"]
        assert main(argv + ["--output", str(a)]) == 0
        assert main(argv + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_parse_failure_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("0.5 ZI\nwhat is this\n")
        assert main(["evolve", "--hamiltonian", str(bad)]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_budget_exceeded_exit_3(self):
        assert main(
            ["evolve", "--hamiltonian", SAMPLE, "--t", "1.0", "--epsilon", "1e-12"]
        ) == 3

    def test_basis_initial_state(self, tmp_path):
        out = tmp_path / "run.csv"
        code = main(
            ["evolve", "--hamiltonian", SAMPLE, "--t", "0.4", "--epsilon", "1e-6",
             "--initial", "3", "--output", str(out)]
        )
        assert code == 0
        assert float(read_csv(out)[0]["error_2norm"]) <= 1e-6

    def test_human_format(self, capsys):
        assert main(
            ["evolve", "--hamiltonian", SAMPLE, "--t", "0.5", "--epsilon", "1e-4",
             "--format", "human"]
        ) == 0
        text = capsys.readouterr().out
        assert "error_2norm" in text and "," not in text.split("\n")[0]


class TestLcuCommand:
    def test_agrees_with_series_run(self, tmp_path):
        ev, lc = tmp_path / "ev.csv", tmp_path / "lc.csv"
        eps = 1e-4
        argv = ["--hamiltonian", SAMPLE, "--t", "0.9", "--epsilon", repr(eps), "--seed", "3"]
        assert main(["evolve"] + argv + ["--output", str(ev)]) == 0
        assert main(["lcu"] + argv + ["--output", str(lc)]) == 0
        e1 = float(read_csv(ev)[0]["error_2norm"])
        total = [r for r in read_csv(lc) if r["segment"] == "total"][0]
        e2 = float(total["error_2norm"])
        assert abs(e1 - e2) <= 5 * eps

    def test_s_column_near_two(self, tmp_path):
        out = tmp_path / "lc.csv"
        assert main(
            ["lcu", "--hamiltonian", SAMPLE, "--t", "0.9", "--epsilon", "1e-4",
             "--output", str(out)]
        ) == 0
        h = pauli_to_pmr(parse_hamiltonian_file(SAMPLE))
        g = gamma_bounds(h)
        plan = plan_segments(h, g, 0.9, 1e-4)
        for row in read_csv(out):
            if row["segment"] != "total":
                assert abs(float(row["s"]) - 2.0) <= plan.tail_bound * (1 + 1e-9)
                assert float(row["anc_zero_weight"]) == pytest.approx(1.0, abs=1e-3)

    def test_phase_bit_error_ordering(self, tmp_path):
        errors = {}
        for bits in (8, 24):
            out = tmp_path / f"b{bits}.csv"
            assert main(
                ["lcu", "--hamiltonian", SAMPLE, "--t", "0.7", "--epsilon", "1e-3",
                 "--phase-bits", str(bits), "--output", str(out)]
            ) == 0
            total = [r for r in read_csv(out) if r["segment"] == "total"][0]
            errors[bits] = float(total["error_2norm"])
            assert total["quantization_error"] != ""
        assert errors[8] > errors[24]

    def test_check_fails_on_coarse_quantization(self, tmp_path):
        code = main(
            ["lcu", "--hamiltonian", SAMPLE, "--t", "0.7", "--epsilon", "1e-3",
             "--phase-bits", "4", "--check", "--output", str(tmp_path / "x.csv")]
        )
        assert code == 4

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["lcu", "--hamiltonian", SAMPLE, "--t", "0.8", "--epsilon", "1e-4",
                "--seed", "11"]
        assert main(argv + ["--output", str(a)]) == 0
        assert main(argv + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestDivdiffCommand:
    def test_triple_zero_matches_derivative_form(self, tmp_path):
        out = tmp_path / "dd.csv"
        assert main(["divdiff", "0", "0", "0", "--t", "1.0", "--output", str(out)]) == 0
        rows = {r["quantity"]: r for r in read_csv(out)}
        assert float(rows["taylor"]["value_re"]) == pytest.approx(-0.5)
        assert float(rows["taylor"]["value_im"]) == pytest.approx(0.0, abs=1e-15)
        assert rows["naive"]["value_re"] == "n/a"

    def test_single_input_all_methods_equal(self, tmp_path):
        out = tmp_path / "dd.csv"
        assert main(["divdiff", "0.8", "--t", "2.0", "--output", str(out)]) == 0
        rows = {r["quantity"]: r for r in read_csv(out)}
        expected = np.exp(-1j * 2.0 * 0.8)
        for method in ("taylor", "naive", "pyramid", "leibniz"):
            val = complex(float(rows[method]["value_re"]), float(rows[method]["value_im"]))
            assert abs(val - expected) < 1e-12

    def test_random_inputs_deviations_small(self, tmp_path):
        rng = np.random.default_rng(5)
        for _ in range(5):
            vals = [f"{v:.6f}" for v in rng.uniform(-2, 2, size=5)]
            out = tmp_path / "dd.csv"
            assert main(["divdiff", *vals, "--t", "0.9", "--output", str(out)]) == 0
            rows = {r["quantity"]: r for r in read_csv(out)}
            mag = float(rows["magnitude"]["value_re"])
            assert mag <= float(rows["magnitude_bound"]["value_re"]) * (1 + 1e-12)
            for method in ("naive", "pyramid", "leibniz"):
                assert float(rows[method]["abs_dev_vs_taylor"]) <= 1e-9 * max(mag, 1e-6)
            assert float(rows["seed_error"]["value_re"]) <= float(
                rows["seed_error_bound"]["value_re"]
            )


class TestResourcesCommand:
    def test_schwinger_both_conventions_present(self, tmp_path):
        out = tmp_path / "res.csv"
        assert main(
            ["resources", "--model", "schwinger", "--N", "6", "--output", str(out)]
        ) == 0
        rows = {r["quantity"]: r["value"] for r in read_csv(out)}
        assert "T_quoted_convention" in rows and "T_exact_maxnorm" in rows
        assert float(rows["T_quoted_convention"]) == pytest.approx(6 * 0.5)
        assert float(rows["T_exact_maxnorm"]) == pytest.approx(5 * 1.0)
        assert "gates_short_time_evolution" in rows

    def test_hamiltonian_file_input(self, tmp_path):
        out = tmp_path / "res.csv"
        assert main(
            ["resources", "--hamiltonian", SAMPLE, "--t", "1.0", "--output", str(out)]
        ) == 0
        rows = {r["quantity"]: r["value"] for r in read_csv(out)}
        assert rows["M"] == "4"

    def test_needs_model_or_file(self):
        assert main(["resources"]) == 2


class TestCompareCommand:
    def test_zz_only_row(self, tmp_path):
        out = tmp_path / "cmp.csv"
        assert main(["compare", "--model", "zz_only", "--N", "3", "--output", str(out)]) == 0
        row = read_csv(out)[0]
        assert row["M"] == "0"
        assert float(row["T"]) == 0.0

    def test_all_models(self, tmp_path):
        out = tmp_path / "cmp.csv"
        assert main(["compare", "--model", "all", "--N", "3", "--output", str(out)]) == 0
        rows = read_csv(out)
        assert {r["model"] for r in rows} >= {"zz_only", "zz_zx", "fermi_hubbard", "schwinger"}

    def test_unknown_model_exit_2(self):
        assert main(["compare", "--model", "heisenberg_xyz", "--N", "3"]) == 2


class TestModelsCommand:
    def test_written_file_round_trips(self, tmp_path):
        out = tmp_path / "fh.txt"
        assert main(["models", "--model", "fermi_hubbard", "--N", "4", "--output", str(out)]) == 0
        reparsed = pauli_to_pmr(parse_hamiltonian_file(out))
        from pmrsim.models import build_fermi_hubbard

        h, _ = build_fermi_hubbard(4)
        assert np.max(np.abs(dense_matrix(reparsed) - dense_matrix(h))) < 1e-12

    def test_deterministic_artifact(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for path in (a, b):
            assert main(["models", "--model", "schwinger", "--N", "5", "--output", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestOracleUtilities:
    def test_dense_oracle_unitary_and_group_property(self):
        from conftest import random_pmr_hamiltonian

        rng = np.random.default_rng(3)
        for _ in range(5):
            h = random_pmr_hamiltonian(rng, n=3)
            oracle = DenseOracle(h)
            u = oracle.unitary(0.9)
            eye = np.eye(u.shape[0])
            assert np.max(np.abs(u @ u.conj().T - eye)) < 1e-11
            composed = oracle.unitary(0.4) @ oracle.unitary(0.9)
            assert np.max(np.abs(composed - oracle.unitary(1.3))) < 1e-10

    def test_trotter_comparator_first_order(self):
        # non-core baseline: halving the step size halves the error
        from conftest import random_pmr_hamiltonian, random_state
        from pmrsim.oracle import trotter_first_order

        rng = np.random.default_rng(9)
        h = random_pmr_hamiltonian(rng, n=3, m_terms=3)
        psi = random_state(rng, 3)
        ref = DenseOracle(h).evolve(psi, 0.8)
        errs = [
            np.linalg.norm(trotter_first_order(h, psi, 0.8, steps) - ref)
            for steps in (50, 100)
        ]
        assert errs[1] < errs[0]
        assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.2)


class TestConfigFile:
    def test_key_value_defaults_applied(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("t = 0.75\nepsilon = 1e-5  # comment\nseed = 9\n")
        direct = tmp_path / "direct.csv"
        via_cfg = tmp_path / "cfg.csv"
        assert main(
            ["evolve", "--hamiltonian", SAMPLE, "--t", "0.75", "--epsilon", "1e-5",
             "--seed", "9", "--output", str(direct)]
        ) == 0
        assert main(
            ["evolve", "--hamiltonian", SAMPLE, "--config", str(cfg),
             "--output", str(via_cfg)]
        ) == 0
        assert direct.read_bytes() == via_cfg.read_bytes()

    def test_malformed_config_exit_2(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("this is not key value\n")
        assert main(["evolve", "--hamiltonian", SAMPLE, "--config", str(cfg)]) == 2
