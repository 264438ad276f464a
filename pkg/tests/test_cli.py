import csv
import io
import json

import numpy as np
import pytest

import lazykron.lazy
from lazykron import bench, cli
from lazykron.kron_ops import face_split
from lazykron.semiring import REAL

from golden_runs import GOLDEN, GOLDEN_RUNS


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden_byte_for_byte(name, tmp_path, capsys):
    outputs = []
    for i in range(2):
        path = tmp_path / f"{i}_{name}"
        code, _, _ = run(GOLDEN_RUNS[name] + ["--out", str(path)], capsys)
        assert code == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    assert outputs[0] == (GOLDEN / name).read_bytes()


def test_csv_header_matches_bench_row(capsys):
    code, out, _ = run(["bench", "--n", "2", "--k", "2", "--K", "2", "--T", "4"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == bench.BENCH_FIELDS
    assert len(rows) == 2
    assert "\r" not in out


def test_json_round_trip(capsys):
    code, out, _ = run(["bench", "--n", "2", "--k", "2,3", "--K", "2", "--T", "4", "--format", "json"],
                       capsys)
    assert code == 0
    data = json.loads(out)
    assert [list(d) for d in data] == [bench.BENCH_FIELDS] * 2
    assert json.loads(json.dumps(data)) == data


def test_bench_same_seed_same_counts(capsys):
    argv = ["bench", "--n", "3", "--k", "3", "--s", "1,2", "--K", "3", "--T", "9", "--format", "json"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    keys = ("amortized_update_mul", "worst_query_mul", "baseline_eager_update_mul")
    pick = lambda rows: [[r[k] for k in keys] for r in json.loads(rows)]
    assert pick(a) == pick(b)


def test_bench_baseline_column_formula(capsys):
    _, out, _ = run(["bench", "--n", "2,3", "--k", "1,2,3", "--K", "2", "--T", "4", "--format", "json"],
                    capsys)
    for row in json.loads(out):
        assert row["baseline_eager_update_mul"] == row["n"] ** row["k"] * (row["k"] - 1)


def test_doubling_capacity_halves_flushes():
    T = 24
    for K in (2, 3, 4):
        _, lazy1 = bench.bench_point(2, 3, 1, K, T, np.random.default_rng(0))
        _, lazy2 = bench.bench_point(2, 3, 1, 2 * K, T, np.random.default_rng(0))
        assert lazy1.n_flushes == T // K
        assert abs(lazy2.n_flushes - lazy1.n_flushes / 2) <= 1


def test_counts_examples(capsys):
    code, out, _ = run(["counts", "--n", "2", "--k", "2", "--K", "3", "--format", "json"], capsys)
    assert code == 0
    rows = {(r["check"], r["fill"]): r for r in json.loads(out)}
    assert rows[("flush_matmul", 3)]["measured"] == 12
    assert rows[("eager_update", 0)]["measured"] == 4
    assert all(r["ok"] for r in rows.values())
    code, out, _ = run(["counts", "--n", "2", "--k", "3", "--s", "1", "--K", "3", "--format", "json"],
                       capsys)
    rows = {(r["check"], r["fill"]): r for r in json.loads(out)}
    assert rows[("query_matmul", 2)]["measured"] == 8


def test_counts_detects_deviation(monkeypatch, capsys):
    monkeypatch.setattr(bench, "flush_mul_formula",
                        lambda n, k, K: {"face_split": 0, "matmul": n ** k * K + 1})
    code, _, err = run(["counts"], capsys)
    assert code == 1
    assert "count mismatch: flush_matmul" in err


def test_verify_small_grid_passes(capsys):
    code, out, _ = run(["verify", "--k", "1,2,3", "--n", "2", "--K", "1,3", "--T", "6", "--trials", "3"],
                       capsys)
    assert code == 0
    assert out.startswith("OK")


def test_verify_zero_trials(capsys):
    code, out, _ = run(["verify", "--trials", "0"], capsys)
    assert code == 0
    assert "OK 0 checks" in out


def test_verify_reports_counterexample_for_corrupted_face_split(monkeypatch, capsys):
    def corrupted(mats, semiring=REAL, cols=None):
        out = face_split(mats, semiring, cols)
        if out.shape[0] > 1:
            out = out.copy()
            out[[0, 1]] = out[[1, 0]]
        return out

    monkeypatch.setattr(lazykron.lazy, "face_split", corrupted)
    code, out, _ = run(["verify", "--k", "2,3", "--n", "2", "--K", "2", "--T", "5", "--trials", "2"], capsys)
    assert code == 1
    assert "counterexample" in out
    assert "u(1) =" in out


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# audit\nn = 3\nk=3\ns=2\nK=4\nformat=json\n")
    code, out, _ = run(["counts", "--config", str(cfg), "--K", "2"], capsys)
    assert code == 0
    rows = json.loads(out)
    assert {(r["n"], r["k"], r["s"], r["K"]) for r in rows} == {(3, 3, 2, 2)}


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n=2\ncolour=blue\n")
    code, _, err = run(["counts", "--config", str(cfg)], capsys)
    assert code == 2
    assert "unknown key 'colour'" in err


@pytest.mark.parametrize("argv", [
    ["counts", "--n", "0"],
    ["verify", "--trials", "-1"],
    ["bench", "--k", "2", "--s", "3"],
    ["counts", "--kernel", "blocked"],
])
def test_invalid_config_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert "error" in err


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path))
    code, out, _ = run(["hinted-mv", "--no-wall"], capsys)
    assert code == 0
    assert out == ""
    assert (tmp_path / "hinted-mv.csv").read_text().startswith("n,k,s,tau")


def test_unwritable_output_reports_path(tmp_path, capsys):
    target = tmp_path / "missing" / "out.csv"
    code, _, err = run(["counts", "--out", str(target)], capsys)
    assert code == 2
    assert str(target) in err


def test_capacity_from_exponent(capsys):
    code, out, _ = run(["counts", "--n", "3", "--k", "2", "--a", "1", "--format", "json"], capsys)
    assert code == 0
    assert {r["K"] for r in json.loads(out)} == {3}


def test_bool_bench(capsys):
    code, out, _ = run(["bench", "--scalar", "bool", "--n", "3", "--k", "3", "--K", "2", "--T", "4"], capsys)
    assert code == 0
