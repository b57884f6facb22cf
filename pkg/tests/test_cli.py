import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from minor_moments.cli import main
from minor_moments.constraints import sample_cm_cov
from minor_moments.general_moments import (
    cov_compound_general,
    cross_moment_general,
    e_minor_general,
    variance_breakdown,
)
from minor_moments.linalg import compound, format_matrix_csv
from minor_moments.minor_test import SampleInput, standardized_minor_test
from minor_moments.oracle import mc_minor_moments
from minor_moments.sampling import RngStream, WishartSpec
from minor_moments.standard_moments import cov_compound_std

from conftest import random_spd


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def sigma_csv(tmp_path):
    gen = np.random.default_rng(40)
    sigma = random_spd(gen, 4)
    path = tmp_path / "sigma.csv"
    path.write_text(format_matrix_csv(sigma), encoding="utf-8")
    return path, sigma


class TestMoment:
    def test_identity_golden(self, capsys):
        code, out, _ = run_cli(
            capsys, "moment", "--df", "10", "--identity", "4",
            "--rows", "1,2", "--cols", "1,2",
        )
        assert code == 0
        assert out.strip() == "90"

    def test_sign_via_order(self, capsys):
        code, out, _ = run_cli(
            capsys, "moment", "--df", "10", "--identity", "4",
            "--rows", "2,1", "--cols", "1,2",
        )
        assert code == 0 and out.strip() == "-90"

    def test_matrix_route_matches_library(self, capsys, sigma_csv):
        path, sigma = sigma_csv
        code, out, _ = run_cli(
            capsys, "moment", "--df", "9", "--matrix", str(path),
            "--rows", "1,2", "--cols", "3,4",
        )
        assert code == 0
        want = e_minor_general(9, sigma, (1, 2), (3, 4))
        assert out.strip() == "%.17g" % want
        assert float(out) == pytest.approx(want, rel=1e-15)

    def test_identity_and_matrix_exclusive(self, capsys, sigma_csv):
        path, _ = sigma_csv
        code, _, err = run_cli(
            capsys, "moment", "--df", "9", "--identity", "4",
            "--matrix", str(path), "--rows", "1", "--cols", "1",
        )
        assert code == 1 and "error" in err


class TestCrossMoment:
    def test_flagship_signs(self, capsys):
        base = ["cross-moment", "--df", "10", "--identity", "4"]
        code, out, _ = run_cli(
            capsys, *base, "--rows1", "1,2", "--cols1", "1,3",
            "--rows2", "2,4", "--cols2", "3,4",
        )
        assert code == 0 and out.strip() == "810"
        code, out, _ = run_cli(
            capsys, *base, "--rows1", "1,2", "--cols1", "1,4",
            "--rows2", "2,3", "--cols2", "3,4",
        )
        assert code == 0 and out.strip() == "-810"

    def test_matrix_route(self, capsys, sigma_csv):
        path, sigma = sigma_csv
        code, out, _ = run_cli(
            capsys, "cross-moment", "--df", "8", "--matrix", str(path),
            "--rows1", "1,2", "--cols1", "1,2", "--rows2", "3,4", "--cols2", "3,4",
        )
        assert code == 0
        want = cross_moment_general(8, sigma, (1, 2), (1, 2), (3, 4), (3, 4))
        assert out.strip() == "%.17g" % want


class TestVar:
    def test_disjoint_golden(self, capsys):
        code, out, _ = run_cli(
            capsys, "var", "--df", "10", "--identity", "4",
            "--rows", "1,2", "--cols", "3,4",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["total"] == 180.0
        assert payload["formula"] == "disjoint"
        assert set(payload) == {
            "total", "conditional_mean_part", "conditional_var_part", "formula",
        }

    def test_matrix_route(self, capsys, sigma_csv):
        path, sigma = sigma_csv
        code, out, _ = run_cli(
            capsys, "var", "--df", "9", "--matrix", str(path),
            "--rows", "1,2", "--cols", "2,3",
        )
        assert code == 0
        payload = json.loads(out)
        bd = variance_breakdown(9, sigma, (1, 2), (2, 3))
        assert payload["total"] == bd.total
        assert payload["formula"] == "partial-overlap"

    def test_non_pd_matrix_is_numerical_failure(self, capsys, tmp_path):
        bad = tmp_path / "indefinite.csv"
        bad.write_text("1.0,2.0\n2.0,1.0\n", encoding="utf-8")
        code, _, err = run_cli(
            capsys, "var", "--df", "5", "--matrix", str(bad),
            "--rows", "1", "--cols", "2",
        )
        assert code == 2
        assert "numerical error" in err


class TestCovCompound:
    def test_csv_identity(self, capsys):
        code, out, _ = run_cli(
            capsys, "cov-compound", "--df", "10", "--identity", "4", "--order", "2",
        )
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        labels = rows[0][1:]
        assert labels[0] == "1,2|1,2" and len(labels) == 36
        table = cov_compound_std(10, 4, 2).pair_table()
        got = np.array([[float(cell) for cell in row[1:]] for row in rows[1:]])
        assert np.array_equal(got, table)
        assert [row[0] for row in rows[1:]] == labels

    def test_json_matrix_route(self, capsys, sigma_csv):
        path, sigma = sigma_csv
        code, out, _ = run_cli(
            capsys, "cov-compound", "--df", "9", "--matrix", str(path),
            "--order", "2", "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        want = cov_compound_general(9, sigma, 2)
        assert payload["labels"] == want.pair_labels()
        assert_allclose(np.array(payload["values"]), want.table, rtol=0, atol=0)


class TestTestCommand:
    def test_matches_library(self, capsys, sigma_csv):
        path, sigma = sigma_csv
        code, out, _ = run_cli(
            capsys, "test", "--data", str(path), "--n", "40",
            "--rows", "1,2", "--cols", "3,4",
        )
        assert code == 0
        payload = json.loads(out)
        want = standardized_minor_test(
            SampleInput(matrix=sigma, sample_size=40), (1, 2), (3, 4)
        )
        assert payload == want.to_dict()

    def test_keep_null_term_flag(self, capsys, sigma_csv):
        path, sigma = sigma_csv
        code, out, _ = run_cli(
            capsys, "test", "--data", str(path), "--n", "40",
            "--rows", "1,2", "--cols", "3,4", "--keep-null-term",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["drop_null_term"] is False
        bd = variance_breakdown(39, sigma, (1, 2), (3, 4))
        assert payload["variance_estimate"] == bd.total

    def test_overlap_needs_flag(self, capsys, sigma_csv):
        path, _ = sigma_csv
        args = ["test", "--data", str(path), "--n", "40",
                "--rows", "1,2", "--cols", "2,3"]
        code, _, err = run_cli(capsys, *args)
        assert code == 1 and "allow_overlap" in err
        with pytest.warns(UserWarning):
            code, out, _ = run_cli(capsys, *args, "--allow-overlap")
        assert code == 0
        assert json.loads(out)["formula"] == "partial-overlap"

    def test_df_override(self, capsys, sigma_csv):
        path, _ = sigma_csv
        code, out, _ = run_cli(
            capsys, "test", "--data", str(path), "--n", "40", "--df", "40",
            "--rows", "1,2", "--cols", "3,4",
        )
        assert code == 0 and json.loads(out)["df"] == 40


class TestSimulate:
    def test_writes_matrix_and_sidecar(self, capsys, tmp_path):
        out_csv = tmp_path / "draw.csv"
        code, out, _ = run_cli(
            capsys, "simulate", "--model", "gm", "--m", "2",
            "--seed", "3", "--out", str(out_csv),
        )
        assert code == 0
        sidecar = json.loads(out)
        assert sidecar["model"] == "gm" and sidecar["dim"] == 4
        assert sidecar["vanishing_rows"] == [1, 2]
        assert sidecar["vanishing_cols"] == [3, 4]
        on_disk = json.loads((tmp_path / "draw.json").read_text())
        assert on_disk == sidecar
        text = out_csv.read_text()
        got = np.array([[float(c) for c in line.split(",")] for line in text.splitlines()])
        want = sample_cm_cov(2, RngStream(3)).sigma.values
        assert np.array_equal(got, want)

    def test_order_alias_and_spreads(self, capsys, tmp_path):
        out_csv = tmp_path / "draw3.csv"
        code, out, _ = run_cli(
            capsys, "simulate", "--model", "hidden-factor", "--order", "3",
            "--seed", "7", "--stream", "2", "--lambda-spread", "0.5",
            "--omega-spread", "2.0", "--out", str(out_csv),
        )
        assert code == 0
        sidecar = json.loads(out)
        assert sidecar["order"] == 3 and sidecar["stream"] == 2
        want = sample_cm_cov(3, RngStream(7, 2), 0.5, 2.0).sigma.values
        got = np.array([
            [float(c) for c in line.split(",")]
            for line in out_csv.read_text().splitlines()
        ])
        assert np.array_equal(got, want)

    def test_json_out_rejected(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "simulate", "--m", "2", "--out", str(tmp_path / "x.json"),
        )
        assert code == 1 and ".json" in err


class TestOracleCommand:
    def test_matches_library(self, capsys):
        code, out, _ = run_cli(
            capsys, "oracle", "--sigma", "identity:4", "--df", "10",
            "--pairs", "1,2|1,2 1,2|1,3;2,4|3,4", "--reps", "500",
            "--seed", "77", "--chunk-size", "200",
        )
        assert code == 0
        payload = json.loads(out)
        want = mc_minor_moments(
            WishartSpec(10, np.eye(4)),
            [((1, 2), (1, 2)), ((1, 2), (1, 3), (2, 4), (3, 4))],
            500,
            RngStream(77),
            chunk_size=200,
        )
        assert payload == [
            {
                "estimate": e.estimate, "std_error": e.std_error, "reps": e.reps,
                "seed": e.seed, "stream": e.stream, "kind": e.kind, "target": e.target,
            }
            for e in want
        ]

    def test_repeated_pairs_flags(self, capsys):
        code, out, _ = run_cli(
            capsys, "oracle", "--sigma", "identity:3", "--df", "5",
            "--pairs", "1,2|1,2", "--pairs", "1|2", "--reps", "200", "--seed", "1",
        )
        assert code == 0
        payload = json.loads(out)
        assert [e["target"] for e in payload] == ["1,2|1,2", "1|2"]

    def test_sigma_csv_route(self, capsys, sigma_csv):
        path, sigma = sigma_csv
        code, out, _ = run_cli(
            capsys, "oracle", "--sigma", str(path), "--df", "9",
            "--pairs", "1,2|3,4", "--reps", "200", "--seed", "5",
        )
        assert code == 0
        want = mc_minor_moments(
            WishartSpec(9, sigma), [((1, 2), (3, 4))], 200, RngStream(5)
        )[0]
        assert json.loads(out)[0]["estimate"] == want.estimate

    def test_bad_pairs(self, capsys):
        code, _, err = run_cli(
            capsys, "oracle", "--sigma", "identity:3", "--df", "5",
            "--pairs", "1,2|1,2;1|2;1|2", "--reps", "200", "--seed", "1",
        )
        assert code == 1 and "--pairs" in err

    def test_three_part_target_rejected(self, capsys):
        code, _, err = run_cli(
            capsys, "oracle", "--sigma", "identity:3", "--df", "5",
            "--pairs", "1,2", "--reps", "200", "--seed", "1",
        )
        assert code == 1 and "--pairs" in err


class TestCompound:
    def test_identity_csv(self, capsys, tmp_path):
        path = tmp_path / "id4.csv"
        path.write_text(format_matrix_csv(np.eye(4)), encoding="utf-8")
        code, out, _ = run_cli(capsys, "compound", "--matrix", str(path), "--order", "2")
        assert code == 0
        got = np.array([
            [float(c) for c in line.split(",")] for line in out.splitlines()
        ])
        assert np.array_equal(got, np.eye(6))

    def test_json_matches_library(self, capsys, sigma_csv):
        path, sigma = sigma_csv
        code, out, _ = run_cli(
            capsys, "compound", "--matrix", str(path), "--order", "3",
            "--format", "json",
        )
        assert code == 0
        want = compound(sigma, 3).values
        assert np.array_equal(np.array(json.loads(out)), want)


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        code, _, err = run_cli(capsys, "nonsense")
        assert code == 1 and err

    def test_unknown_flag(self, capsys):
        code, _, err = run_cli(
            capsys, "moment", "--df", "10", "--identity", "4",
            "--rows", "1", "--cols", "1", "--bogus",
        )
        assert code == 1 and err

    def test_missing_required(self, capsys):
        code, _, err = run_cli(capsys, "moment", "--df", "10", "--identity", "4")
        assert code == 1

    def test_malformed_csv(self, capsys, tmp_path):
        bad = tmp_path / "ragged.csv"
        bad.write_text("1,2\n3\n", encoding="utf-8")
        code, _, err = run_cli(
            capsys, "moment", "--df", "5", "--matrix", str(bad),
            "--rows", "1", "--cols", "1",
        )
        assert code == 1 and "--matrix" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "moment", "--df", "5", "--matrix", str(tmp_path / "nope.csv"),
            "--rows", "1", "--cols", "1",
        )
        assert code == 1 and "--matrix" in err

    def test_index_out_of_bounds(self, capsys):
        code, _, err = run_cli(
            capsys, "moment", "--df", "10", "--identity", "4",
            "--rows", "1,5", "--cols", "1,2",
        )
        assert code == 1 and err

    def test_non_integer_indices(self, capsys):
        code, _, err = run_cli(
            capsys, "moment", "--df", "10", "--identity", "4",
            "--rows", "1,x", "--cols", "1,2",
        )
        assert code == 1 and "--rows" in err

    def test_help_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        assert "COMMAND" in capsys.readouterr().out


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "minor_moments.cli", "moment", "--df", "10",
         "--identity", "4", "--rows", "1,2", "--cols", "1,2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "90"
