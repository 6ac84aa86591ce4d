import json
import textwrap

import pytest

from orbitglue import cli
from orbitglue.config import OUTPUT_ENV, ConfigError, load, parse_text

FULL2 = """
[system]
kind = markov
adjacency = full
size = 2

[family]
kind = cylinders
length = 2

[experiment]
name = glue
targets = 0; 1
weights = 1/2, 1/2
N = 32
"""


def write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text), encoding="utf-8")
    return path


def run(*argv):
    return cli.main([str(a) for a in argv])


def records(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return [json.loads(x) for x in lines]


def test_glue_report(tmp_path):
    cfg = write(tmp_path, FULL2)
    assert run("glue", "--config", cfg, "--N", 64, "--output-dir", tmp_path / "out") == 0
    recs = records(tmp_path / "out" / "glue.jsonl")
    assert recs[0]["record"] == "config" and recs[0]["config"]["experiment"]["N"] == "64"
    first = recs[1]
    assert first["period"] == 128 and first["word"] == "0" * 64 + "1" * 64
    assert first["measured"] == "1/128" and first["passed"]
    table = (tmp_path / "out" / "glue.csv").read_text().splitlines()
    assert table[0] == "N,measured,bound" and table[1].startswith("64,0.0078125,")


def test_validate_config_weight_sum(tmp_path, capsys):
    cfg = write(tmp_path, FULL2.replace("1/2, 1/2", "1/2, 1/3"))
    assert run("validate-config", "--config", cfg) == 2
    err = capsys.readouterr().err.strip()
    assert "weights" in err and "5/6" in err and len(err.splitlines()) == 1


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        run("--help")
    assert exc.value.code == 0
    assert "usage" in capsys.readouterr().out


def test_unknown_key_names_line(tmp_path, capsys):
    cfg = write(tmp_path, FULL2 + "colour = blue\n")
    assert run("glue", "--config", cfg) == 2
    err = capsys.readouterr().err
    assert "[experiment] colour" in err and "unknown key" in err and ":16:" in err


def test_range_checks():
    with pytest.raises(ConfigError, match="size"):
        parse_text(FULL2.replace("size = 2", "size = 0"))
    with pytest.raises(ConfigError, match="seed"):
        parse_text("[experiment]\nname = close\n")
    with pytest.raises(ConfigError, match="delta"):
        parse_text("[experiment]\nname = close\nseed = 1\neps = 0.1\ndelta = 0.2\n")


def test_infeasible_exit_code(tmp_path, capsys):
    text = FULL2.replace("adjacency = full", "adjacency = golden-mean").replace("0; 1", "0; 11")
    cfg = write(tmp_path, text)
    assert run("glue", "--config", cfg, "--output-dir", tmp_path) == 3
    assert capsys.readouterr().err.startswith("infeasible:")


def test_determinism_and_round_trip(tmp_path):
    cfg = write(tmp_path, """
        [system]
        adjacency = full
        [family]
        kind = coordinate
        [experiment]
        name = birkhoff-gap
        trials = 5
        horizon = 4096
    """)
    for out in ("a", "b"):
        assert run("birkhoff-gap", "--config", cfg, "--seed", 9, "--output-dir", tmp_path / out) == 0
    a = (tmp_path / "a" / "birkhoff-gap.jsonl").read_bytes()
    assert a == (tmp_path / "b" / "birkhoff-gap.jsonl").read_bytes()
    assert (tmp_path / "a" / "birkhoff-gap.csv").read_bytes() == (tmp_path / "b" / "birkhoff-gap.csv").read_bytes()
    # the embedded config alone reproduces the report
    report = tmp_path / "a" / "birkhoff-gap.jsonl"
    assert run("birkhoff-gap", "--config", report, "--output-dir", tmp_path / "c") == 0
    assert (tmp_path / "c" / "birkhoff-gap.jsonl").read_bytes() == a


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    cfg = write(tmp_path, "[experiment]\nname = enumerate\nmax_period = 4\n")
    assert run("enumerate", "--config", cfg) == 0
    recs = records(tmp_path / "env" / "enumerate.jsonl")
    assert [r["count"] for r in recs[1:]] == [2, 1, 2, 3]


def test_set_override(tmp_path):
    cfg = write(tmp_path, FULL2)
    assert run("glue", "--config", cfg, "--set", "experiment.sweep=1", "--set", "experiment.N=4",
               "--output-dir", tmp_path) == 0
    recs = records(tmp_path / "glue.jsonl")
    assert len(recs) == 2 and recs[1]["word"] == "00001111"


@pytest.mark.parametrize("text,command", [
    ("[system]\nadjacency = renewal(5)\n[experiment]\nname = close\nseed = 1\ntrials = 20\n", "close"),
    ("[system]\nkind = schottky\n[experiment]\nname = close\nseed = 0\nword_length = 2\n", "close"),
    ("[system]\nadjacency = golden-mean\n[family]\nlength = 3\n[experiment]\nname = support-audit\n",
     "support-audit"),
    ("[system]\nkind = schottky\n[experiment]\nname = support-audit\nmax_period = 2\n", "support-audit"),
    ("[system]\nkind = schottky\n[experiment]\nname = enumerate\nmax_period = 2\n", "enumerate"),
    ("[experiment]\nname = full-support-sequence\ntargets = 0; 01\nweights = 1/3, 2/3\nbase = 011\n",
     "full-support-sequence"),
    ("[system]\nkind = schottky\n[experiment]\nname = glue\ntargets = a; B\nweights = 1/2, 1/2\nN = 4\n",
     "glue"),
])
def test_every_experiment_passes(tmp_path, text, command):
    cfg = write(tmp_path, text)
    assert run(command, "--config", cfg, "--output-dir", tmp_path) == 0
    recs = records(tmp_path / f"{command}.jsonl")
    assert len(recs) > 1
    assert all(r.get("passed", True) for r in recs[1:])


def test_mismatched_command(tmp_path):
    cfg = write(tmp_path, FULL2)
    assert run("close", "--config", cfg) == 2


def test_load_reads_embedded_config(tmp_path):
    cfg = write(tmp_path, FULL2)
    run("glue", "--config", cfg, "--output-dir", tmp_path)
    again = load(tmp_path / "glue.jsonl")
    assert again.embedded == load(cfg).embedded
