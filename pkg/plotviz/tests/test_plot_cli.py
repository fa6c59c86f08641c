"""Command-line behaviour tests for the plot tool."""

import numpy as np
import pytest

from plotviz.cli import main


def _three_runs(write_run):
    t = np.linspace(0.0, 2.0, 21)
    return [str(write_run(f"r{i}.csv", t)) for i in range(3)]


def test_timeseries_single_input(write_run, tmp_path, capsys):
    t = np.linspace(0.0, 1.0, 11)
    path = write_run("run.csv", t)
    out = tmp_path / "fig.png"
    assert main(["timeseries", "--in", str(path), "--out", str(out)]) == 0
    assert out.exists() and out.stat().st_size > 0
    assert "wrote" in capsys.readouterr().out


def test_batch_overlay_comma_separated(write_run, tmp_path):
    paths = _three_runs(write_run)
    out = tmp_path / "batch.png"
    assert main(["batch-overlay", "--in", ",".join(paths),
                 "--out", str(out)]) == 0
    assert out.exists()


def test_style_flags_accepted(write_run, tmp_path):
    paths = _three_runs(write_run)
    out = tmp_path / "plain.png"
    assert main(["batch-overlay", "--in", ",".join(paths), "--out", str(out),
                 "--no-mean-emphasis", "--no-worst-highlight"]) == 0


def test_unknown_kind_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["sparkline", "--in", "a.csv", "--out", str(tmp_path / "f.png")])
    assert info.value.code == 2


def test_missing_input_file(tmp_path, capsys):
    assert main(["timeseries", "--in", str(tmp_path / "absent.csv"),
                 "--out", str(tmp_path / "f.png")]) == 2
    assert "plot error" in capsys.readouterr().err


def test_missing_column_reported(tmp_path, capsys):
    path = tmp_path / "partial.csv"
    path.write_text("t,ey,ez\n0,0,0\n1,0,0\n")
    assert main(["timeseries", "--in", str(path),
                 "--out", str(tmp_path / "f.png")]) == 2
    assert "missing columns: ex" in capsys.readouterr().err


def test_batch_overlay_single_run_rejected(write_run, tmp_path, capsys):
    t = np.linspace(0.0, 1.0, 5)
    path = write_run("one.csv", t)
    assert main(["batch-overlay", "--in", str(path),
                 "--out", str(tmp_path / "f.png")]) == 2
    assert "at least 2" in capsys.readouterr().err
