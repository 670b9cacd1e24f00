import csv
import json
import math
import subprocess
import sys

import pytest

from eisenlab.cli import (
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_USAGE,
    UsageError,
    build_config,
    main,
    parse_complex,
    parse_list,
    parse_number,
    read_config,
)
from eisenlab.experiments import (
    CSV_COLUMNS,
    ExperimentConfig,
    Report,
    ReportRow,
    classify,
    read_rows,
    run_measure_xval,
    run_theorem2,
    write_report,
)


def write_cfg(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return str(p)


@pytest.mark.parametrize("text, value", [("1/40", 0.025), ("2", 2.0), (" 0.75 ", 0.75)])
def test_parse_number(text, value):
    assert parse_number(text) == value


def test_parse_complex_and_list():
    assert parse_complex("30+2i") == 30 + 2j
    assert parse_complex("0.1 + 1.3i") == 0.1 + 1.3j
    assert parse_list("1/40, 1/80") == (0.025, 0.0125)


def test_read_config(tmp_path):
    path = write_cfg(tmp_path, "# comment\npair.nu = 2\npair.h_list = 1/40,1/80\nrun.tol = 1e-4\n")
    cfg = read_config(path)
    assert cfg == {"pair": {"nu": 2.0, "h_list": (0.025, 0.0125)}, "run": {"tol": 1e-4}}
    built = build_config("pair", cfg, {"radius": None})
    assert built.tol == 1e-4 and built.h_list == (0.025, 0.0125)
    assert build_config("scatter", {"run": {"tol": 1e-5}}, {}).dual_tol == 1e-5


@pytest.mark.parametrize("text", ["pair.bogus = 1\n", "nu = 2\n", "pair.nu = two\n"])
def test_read_config_rejects(tmp_path, text):
    with pytest.raises(UsageError):
        read_config(write_cfg(tmp_path, text))


def test_build_config_rejects_bad_values():
    with pytest.raises(UsageError):
        build_config("pair", {}, {"h_list": (1 / 80, 1 / 40)})


@pytest.mark.parametrize("argv", [[], ["bogus"], ["eval"], ["eval", "--lambda", "6+2i"],
                                  ["pair", "--config", "/nonexistent.cfg"]])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_unknown_config_key_exit(tmp_path):
    assert main(["scatter", "--config", write_cfg(tmp_path, "scatter.speed = 3\n")]) == EXIT_USAGE


def test_eval_writes_csv(tmp_path):
    assert main(["eval", "--lambda", "6+2i", "--z", "0.1+1.3i,0+1i", "--tol", "1e-6", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "eval.csv")))
    assert len(rows) == 2
    assert float(rows[0]["tail_bound"]) <= 1e-6


def test_modes_and_flow(tmp_path):
    assert main(["modes", "--lambda", "6+2i", "--k", "0", "--out", str(tmp_path)]) == EXIT_PASS
    assert len(list(csv.DictReader(open(tmp_path / "modes.csv")))) == 1
    assert main(["flow", "--z", "0.1+1.3i", "--steps", "10", "--out", str(tmp_path)]) == EXIT_PASS
    rows = list(csv.DictReader(open(tmp_path / "flow.csv")))
    assert len(rows) == 11
    # straight down the imaginary axis: y decays like e^{-t}
    assert float(rows[-1]["y"]) == pytest.approx(1.3 * math.exp(-5.0))


def test_modes_infeasible_exit(capsys):
    assert main(["modes", "--lambda", "6+0.75i", "--k", "0", "--tol", "1e-9"]) == EXIT_FAIL
    assert "numerical failure" in capsys.readouterr().err


def test_scatter_pass_and_fail(tmp_path):
    assert main(["scatter", "--nu", "2", "--re-lambda", "40,80,160", "--out", str(tmp_path), "--id", "s2"]) == EXIT_PASS
    man = json.loads((tmp_path / "s2.manifest.json").read_text())
    assert man["status"] == "PASS" and man["library"] == "eisenlab"
    # at nu = 3/4 the table is not monotone
    assert main(["scatter", "--nu", "0.75", "--re-lambda", "25,50,100,200", "--out", str(tmp_path)]) == EXIT_FAIL


def test_dry_run_and_cost_guard(tmp_path, capsys):
    assert main(["pair", "--dry-run", "--out", str(tmp_path)]) == EXIT_PASS
    assert "estimated cost" in capsys.readouterr().err
    assert not (tmp_path / "pair.csv").exists()
    assert main(["pair", "--max-cost", "10", "--out", str(tmp_path)]) == EXIT_USAGE


def test_measure_empty_suite(tmp_path):
    assert main(["measure", "--suite", "empty", "--out", str(tmp_path)]) == EXIT_PASS
    with open(tmp_path / "measure.csv") as fh:
        assert next(csv.reader(fh)) == CSV_COLUMNS
    assert read_rows(tmp_path / "measure.csv") == []


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "eisenlab.cli", "flow", "--z", "0.2+1.1i", "--steps", "2"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.splitlines()[0] == "t,x,y,angle,x_F,y_F"


def test_csv_round_trip_and_classification(tmp_path):
    cfg = ExperimentConfig(experiment="scatter", nu=2.0, re_lambda_list=(40.0, 80.0))
    rep = run_theorem2(cfg)
    csv_path, _ = write_report(rep, tmp_path, "rt")
    rows = read_rows(csv_path)
    assert rows == rep.rows
    assert classify("scatter", rows, cfg) == rep.passed


def row(kind, lhs, rhs, **params):
    return ReportRow.compare("x", kind, ";".join(f"{k}={v!r}" for k, v in params.items()), lhs, rhs)


def test_classify_pair():
    cfg = ExperimentConfig()
    good = [row("pair", 1.2, 1.0), row("pair", 1.05, 1.0), row("pair", 1.01, 1.0)]
    assert classify("pair", good, cfg)
    assert not classify("pair", good[::-1], cfg)
    assert not classify("pair", [row("pair", 1.5, 1.0), row("pair", 1.3, 1.0)], cfg)


def test_classify_scatter():
    cfg = ExperimentConfig()
    decay = [row("scatter", x ** -0.5, 0.0, re_lambda=x, nu=0.75) for x in (25.0, 50.0, 100.0)]
    assert classify("scatter", decay, cfg)
    flat = [row("scatter", x ** -0.2, 0.0, re_lambda=x, nu=0.75) for x in (25.0, 50.0, 100.0)]
    assert not classify("scatter", flat, cfg)


def test_classify_measure():
    cfg = ExperimentConfig()
    assert classify("measure", [row("ps_vs_prop", 1.015, 1.0), row("decay", 1.005, 1.0)], cfg)
    assert not classify("measure", [row("decay", 1.02, 1.0)], cfg)


def test_report_row_rejects_nan():
    with pytest.raises(ValueError):
        ReportRow("x", "y", "", float("nan"), 0, 0, 0, 0, 0)


def test_measure_report_empty_is_pass():
    rep = run_measure_xval(ExperimentConfig(experiment="measure", suite="empty"))
    assert rep.rows == [] and rep.passed
    assert isinstance(rep, Report)
