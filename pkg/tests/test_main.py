"""Command line verbs and exit codes."""

import json
import os

import pytest

from main import build_parser, main


def read_text(path):
    with open(path, encoding="utf-8") as f:
        return f.read()


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps({
        "frequencies_ghz": [26.0],
        "angles_deg": [65.0],
        "max_order": 0,
    }), encoding="utf-8")
    return str(path)


def test_parser_rejects_unknown_order():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["sweep-angle", "--max-order", "2"])


def test_sweep_angle(tmp_path, small_config, capsys):
    out = tmp_path / "out"
    code = main(["sweep-angle", "--config", small_config, "--out", str(out), "--quiet"])
    assert code == 0
    assert sorted(os.listdir(out)) == ["angular_sweep.csv", "angular_sweep.dat", "angular_sweep_evm.csv"]
    lines = read_text(out / "angular_sweep.csv").splitlines()
    assert lines[0] == "freq_ghz,angle_deg,method,p_dbm"
    assert [line.split(",")[2] for line in lines[1:]] == ["method1", "method2", "raytrace0"]
    assert "[✓]" in capsys.readouterr().out


def test_los_ref_reproduces_shipped_table(data_dir, tmp_path):
    out = tmp_path / "ref"
    code = main([
        "los-ref", "--measurements", os.path.join(data_dir, "measurements_16qam.csv"),
        "--out", str(out), "--quiet",
    ])
    assert code == 0
    assert read_text(out / "corrections.csv") == read_text(os.path.join(data_dir, "pdiff_16qam.csv"))
    assert len(read_text(out / "los_reference.csv").splitlines()) == 22


def test_correct(data_dir, tmp_path):
    results = tmp_path / "sweep.csv"
    results.write_text(
        "freq_ghz,angle_deg,method,p_dbm\n"
        "26.0000,65.0000,method1,-30.0000\n"
        "26.0000,65.0000,method1_corrected,-99.0000\n"
        "26.0000,62.5000,method1,-29.0000\n",
        encoding="utf-8",
    )
    code = main([
        "correct", "--results", str(results), "--out", str(tmp_path),
        "--corrections", os.path.join(data_dir, "pdiff_16qam.csv"), "--quiet",
    ])
    assert code == 0
    assert read_text(tmp_path / "sweep_corrected.csv") == (
        "freq_ghz,angle_deg,method,p_dbm\n"
        "26.0000,65.0000,method1,-30.0000\n"
        "26.0000,65.0000,method1_corrected,-31.0800\n"
        "26.0000,62.5000,method1,-29.0000\n"
    )


def test_missing_arguments_are_config_errors(tmp_path):
    assert main(["los-ref", "--out", str(tmp_path), "--quiet"]) == 2
    assert main(["correct", "--out", str(tmp_path), "--quiet"]) == 2
    assert main(["correct", "--results", "x.csv", "--out", str(tmp_path), "--quiet"]) == 2


def test_bad_config_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"panel": 50}', encoding="utf-8")
    assert main(["sweep-angle", "--config", str(bad), "--quiet"]) == 2
    assert main(["sweep-angle", "--config", str(tmp_path / "nope.json"), "--quiet"]) == 2


def test_data_errors_exit_code(tmp_path):
    broken = tmp_path / "m.csv"
    broken.write_text("freq_ghz,angle_deg,waveform,p_m_dbm\n26,65,continuous-wave,oops\n", encoding="utf-8")
    assert main(["los-ref", "--measurements", str(broken), "--out", str(tmp_path), "--quiet"]) == 3
    missing = tmp_path / "none.csv"
    assert main(["los-ref", "--measurements", str(missing), "--out", str(tmp_path), "--quiet"]) == 3
