import subprocess
import sys

import pytest

from judgekit.cli import main

GOOD_RATINGS = """item,rater,rating
i1,gold,1
i1,gpt,1
i2,gold,2
i2,gpt,2
i3,gold,3
i3,gpt,3
i4,gold,4
i4,gpt,3
"""


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture
def ratings_file(tmp_path):
    path = tmp_path / "ratings.csv"
    path.write_text(GOOD_RATINGS, encoding="utf-8")
    return path


def test_validate_ok_exit_zero(ratings_file, tmp_path):
    out = tmp_path / "report.tsv"
    assert run_cli("validate", "--ratings", str(ratings_file), "--format", "tsv", "--output", str(out)) == 0
    assert b"n_co_rated\t4" in out.read_bytes()


def test_validate_violations_exit_two(tmp_path):
    path = tmp_path / "lonely.csv"
    path.write_text("item,rater,rating\ni1,a,1\ni2,b,2\n", encoding="utf-8")
    out = tmp_path / "report.tsv"
    assert run_cli("validate", "--ratings", str(path), "--output", str(out)) == 2
    assert b"no co-rated items" in out.read_bytes()


def test_parse_error_exit_one(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("item,rater,rating\ni1,a,9\n", encoding="utf-8")
    assert run_cli("validate", "--ratings", str(path)) == 1
    assert "line 2" in capsys.readouterr().err


def test_duplicate_data_exit_two(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("item,rater,rating\ni1,a,1\ni1,a,2\n", encoding="utf-8")
    assert run_cli("validate", "--ratings", str(path)) == 2


def test_degenerate_statistics_exit_three(tmp_path, capsys):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    assert run_cli("compare", "--runs", str(path)) == 3
    assert "degenerate" in capsys.readouterr().err


def test_usage_error_exit_one(capsys):
    with pytest.raises(SystemExit) as excinfo:
        run_cli("compare", "--runs", "x.jsonl", "--correction", "bogus")
    assert excinfo.value.code == 1


def test_missing_file_exit_one(capsys):
    assert run_cli("validate", "--ratings", "/nonexistent/x.csv") == 1


def test_judge_eval_markdown_bolds_best(ratings_file, tmp_path):
    out = tmp_path / "judges.md"
    assert run_cli(
        "judge-eval", "--ratings", str(ratings_file), "--gold", "gold",
        "--format", "markdown", "--output", str(out),
    ) == 0
    assert b"**" in out.read_bytes()


def test_judge_eval_unknown_gold_exit_two(ratings_file):
    assert run_cli("judge-eval", "--ratings", str(ratings_file), "--gold", "nobody") == 2


def test_gen_synthetic_and_compare_deterministic(tmp_path):
    runs_a = tmp_path / "a.jsonl"
    runs_b = tmp_path / "b.jsonl"
    assert run_cli("gen-synthetic", "--seed", "11", "--queries", "30", "--output", str(runs_a)) == 0
    assert run_cli("gen-synthetic", "--seed", "11", "--queries", "30", "--output", str(runs_b)) == 0
    assert runs_a.read_bytes() == runs_b.read_bytes()
    rep_a = tmp_path / "a.json"
    rep_b = tmp_path / "b.json"
    for dst in (rep_a, rep_b):
        assert run_cli("compare", "--runs", str(runs_a), "--format", "json", "--output", str(dst)) == 0
    assert rep_a.read_bytes() == rep_b.read_bytes()


def test_gen_synthetic_different_seeds_differ(tmp_path):
    runs_a = tmp_path / "a.jsonl"
    runs_b = tmp_path / "b.jsonl"
    run_cli("gen-synthetic", "--seed", "1", "--queries", "10", "--output", str(runs_a))
    run_cli("gen-synthetic", "--seed", "2", "--queries", "10", "--output", str(runs_b))
    assert runs_a.read_bytes() != runs_b.read_bytes()


def test_describe_reports_each_metric(tmp_path):
    runs = tmp_path / "runs.jsonl"
    run_cli("gen-synthetic", "--seed", "3", "--queries", "25", "--output", str(runs))
    out = tmp_path / "describe.tsv"
    assert run_cli("describe", "--runs", str(runs), "--format", "tsv", "--output", str(out)) == 0
    text = out.read_text()
    for metric in ("Relevance", "Completeness", "Readability"):
        assert metric in text


def test_sweep_prevalence_infeasible_share_exit_one(capsys):
    assert run_cli("sweep-prevalence", "--shares", "0.99") == 1


def test_module_entrypoint_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "judgekit", "--version"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "judgekit" in proc.stdout
