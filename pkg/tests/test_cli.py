"""Command line interface: scenario parsing, exit codes, artifacts."""

import json
import subprocess
import sys

import pytest

from localfloer.cli import main


def write_scenario(tmp_path, obj, name="scenario.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def spectrum_scenario(formula="quartic-max", **extra):
    sc = {
        "schema": 1,
        "name": "cli test",
        "germ": {"formula": formula},
        "tasks": ["spectrum"],
        "k_range": [1, 3],
    }
    sc.update(extra)
    return sc


# ------------------------------------------------------------ usage errors


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "localfloer" in capsys.readouterr().out


def test_no_arguments_is_usage_error(capsys):
    assert main([]) == 2


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 2


# ------------------------------------------------------------ parse errors


def run_expecting_parse_error(tmp_path, capsys, obj):
    path = write_scenario(tmp_path, obj)
    code = main(["run", "--scenario", path, "--out", str(tmp_path / "out")])
    err = capsys.readouterr().err
    assert code == 2
    assert err.startswith("error:")
    return err


def test_malformed_json_reports_line(tmp_path, capsys):
    err = run_expecting_parse_error(tmp_path, capsys, '{"schema": 1,\n  bad\n}')
    assert ":2:" in err


def test_unknown_top_level_key(tmp_path, capsys):
    err = run_expecting_parse_error(
        tmp_path, capsys, dict(spectrum_scenario(), surprise=1)
    )
    assert "surprise" in err


def test_unknown_germ_key(tmp_path, capsys):
    sc = spectrum_scenario()
    sc["germ"] = {"formula": "quartic-max", "flavor": "strange"}
    err = run_expecting_parse_error(tmp_path, capsys, sc)
    assert "flavor" in err


def test_unknown_task_kind(tmp_path, capsys):
    sc = spectrum_scenario()
    sc["tasks"] = ["frobnicate"]
    run_expecting_parse_error(tmp_path, capsys, sc)


def test_unknown_formula(tmp_path, capsys):
    err = run_expecting_parse_error(
        tmp_path, capsys, spectrum_scenario(formula="definitely-not-a-germ")
    )
    assert "definitely-not-a-germ" in err


def test_missing_formula(tmp_path, capsys):
    sc = spectrum_scenario()
    sc["germ"] = {}
    run_expecting_parse_error(tmp_path, capsys, sc)


@pytest.mark.parametrize("bad", [[0, 2], [4, 2], [1], "1-6"])
def test_bad_k_range(tmp_path, capsys, bad):
    run_expecting_parse_error(tmp_path, capsys, spectrum_scenario(k_range=bad))


def test_bad_parameter_name(tmp_path, capsys):
    sc = spectrum_scenario(formula="linear-rotation")
    sc["germ"]["parameters"] = {"beta": 1.0}
    run_expecting_parse_error(tmp_path, capsys, sc)


def test_empty_tasks_rejected(tmp_path, capsys):
    sc = spectrum_scenario()
    sc["tasks"] = []
    run_expecting_parse_error(tmp_path, capsys, sc)


def test_missing_out_directory(tmp_path, capsys):
    path = write_scenario(tmp_path, spectrum_scenario())
    code = main(["run", "--scenario", path])
    assert code == 2
    assert "output directory" in capsys.readouterr().err


# ------------------------------------------------------------- happy path


def test_spectrum_and_morse_run(tmp_path, capsys):
    sc = spectrum_scenario()
    sc["tasks"] = ["spectrum", {"kind": "morse", "field": "neg-r2"}]
    path = write_scenario(tmp_path, sc)
    out = tmp_path / "out"
    code = main(["run", "--scenario", path, "--out", str(out), "--jobs", "2"])
    printed = capsys.readouterr().out
    assert code == 0
    assert "(pass)" in printed
    assert "PASS morse.stabilized" in printed
    assert "PASS morse.euler-matches-degree" in printed

    summary = json.loads((out / "summary.json").read_text())
    assert summary["pass"] is True
    assert summary["errors"] == []
    assert summary["germ"] == "quartic-max"
    assert summary["seed"] == 0
    assert summary["artifacts"] == ["00-spectrum.json", "01-morse.json"]
    spec = json.loads((out / "00-spectrum.json").read_text())
    assert {"admissible", "good"} <= set(spec["orders"][0])


def test_seed_override_recorded(tmp_path, capsys):
    path = write_scenario(tmp_path, spectrum_scenario())
    out = tmp_path / "out"
    assert main(["run", "--scenario", path, "--out", str(out), "--seed", "7"]) == 0
    assert json.loads((out / "summary.json").read_text())["seed"] == 7


def test_rerun_is_byte_identical(tmp_path, capsys):
    path = write_scenario(tmp_path, spectrum_scenario())
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["run", "--scenario", path, "--out", str(out)]) == 0
        outs.append(out)
    files_a = sorted(p.name for p in outs[0].iterdir())
    files_b = sorted(p.name for p in outs[1].iterdir())
    assert files_a == files_b
    for name in files_a:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_parametrized_formula(tmp_path, capsys):
    sc = spectrum_scenario(formula="linear-rotation")
    sc["germ"]["parameters"] = {"alpha": 0.05}
    path = write_scenario(tmp_path, sc)
    out = tmp_path / "out"
    assert main(["run", "--scenario", path, "--out", str(out)]) == 0
    assert json.loads((out / "summary.json").read_text())["pass"] is True


def test_isolation_task_writes_constant_table(tmp_path, capsys):
    sc = {
        "schema": 1,
        "name": "isolation",
        "germ": {"formula": "resonant-rotation"},
        "tasks": [{"kind": "isolation", "radii": [0.05, 0.01], "seeds_per_axis": 7}],
        "k_range": [2, 2],
    }
    path = write_scenario(tmp_path, sc)
    out = tmp_path / "out"
    assert main(["run", "--scenario", path, "--out", str(out)]) == 0
    table = (out / "00-isolation-c-constant.csv").read_text().splitlines()
    assert table[0] == "k,c_exact,c_float"
    assert table[1] == "2,1/2,0.5"
    assert len(table) == 12


# ---------------------------------------------------------- failure paths


def test_degenerate_identity_germ_fails_honestly(tmp_path, capsys):
    sc = {
        "schema": 1,
        "germ": {"formula": "zero"},
        "tasks": ["persistence"],
        "k_range": [1, 2],
    }
    path = write_scenario(tmp_path, sc)
    out = tmp_path / "out"
    code = main(["run", "--scenario", path, "--out", str(out)])
    printed = capsys.readouterr().out
    assert code == 1
    assert "ERROR 00-persistence" in printed
    assert "(fail)" in printed
    summary = json.loads((out / "summary.json").read_text())
    assert summary["pass"] is False
    assert summary["errors"][0]["error"] == "HypothesisFailed"
    assert summary["errors"][0]["task"] == "00-persistence"


# ------------------------------------------------------- corpus and plots


def test_corpus_listing(capsys):
    assert main(["corpus"]) == 0
    listing = json.loads(capsys.readouterr().out)
    names = [g["name"] for g in listing["germs"]]
    assert "quartic-max" in names
    assert "shear" in names
    assert "neg-r2" in listing["fields"] or any(
        f == "neg-r2" or (isinstance(f, dict) and f.get("name") == "neg-r2")
        for f in listing["fields"]
    )
    assert "linear-rotation" in listing["parametrized_formulas"]


def test_plots_roundtrip(tmp_path, capsys):
    sc = {
        "schema": 1,
        "name": "plots",
        "germ": {"formula": "quartic-max"},
        "tasks": ["persistence"],
        "k_range": [1, 2],
    }
    path = write_scenario(tmp_path, sc)
    out = tmp_path / "out"
    assert main(["run", "--scenario", path, "--out", str(out)]) == 0
    capsys.readouterr()

    assert main(["plots", "--out", str(out)]) == 0
    written = capsys.readouterr().out.split()
    assert any(name.endswith("-shift.dat") for name in written)
    for name in written:
        lines = (out / name).read_text().splitlines()
        assert lines[0].startswith("#")
        assert len(lines) > 1


def test_plots_without_reports(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["plots", "--out", str(empty)]) == 2
    assert "error:" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "localfloer", "corpus"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "quartic-max" in proc.stdout
