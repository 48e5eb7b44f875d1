import csv

from src.cli import collect_runs, main
from src.cli.report import COLUMNS, INCOMPLETE
from src.io import read_json


def _rows(path):
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


def test_empty_results_give_a_header(tmp_path):
    results = tmp_path / "results"
    results.mkdir()
    assert main(["report", "--results", str(results), "--out", str(tmp_path / "report")]) == 0
    assert (tmp_path / "report" / "summary.csv").read_text() == ",".join(COLUMNS) + "\n"
    assert not (tmp_path / "report" / "manifest.json").exists()


def test_report_collects_every_run(models_dir, tmp_path):
    results = tmp_path / "results"
    assert main(["solve", "--config", str(models_dir / "t2.json"), "--out", str(results / "a_solve")]) == 0
    assert main(["certify", "--config", str(models_dir / "isolated_pair.json"), "--out", str(results / "b_pair")]) == 2
    (results / "c_broken").mkdir()
    assert main(["report", "--out", str(results)]) == 0
    rows = _rows(results / "summary.csv")
    assert [row["run"] for row in rows] == ["a_solve", "b_pair", "c_broken"]
    solved = read_json(results / "a_solve" / "spectral.json")
    assert float(rows[0]["lambda0"]) == solved["lambda0"]
    assert rows[0]["verdict"] == "OK"
    assert rows[1]["verdict"] == "A1-FAIL"
    assert rows[2]["verdict"] == INCOMPLETE
    assert "a_solve" in (results / "summary.txt").read_text()
    assert collect_runs(results).incomplete == 1


def test_missing_results_directory(tmp_path):
    assert main(["report", "--results", str(tmp_path / "nowhere"), "--out", str(tmp_path / "out")]) == 1
