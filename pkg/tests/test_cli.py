import json

import pytest

from itle.cli import main
from itle.gallery import ENTRIES, SEPARATION_MODEL

TREE = "tree\nnode r A\nnode s A parent r\nnode t B parent s\n"
LASSO = "lasso loop 0\nstratum\nnode a\nnode b parent a\nsucc a a\nsucc b b\nval b p\n"


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in (("m", SEPARATION_MODEL), ("t", TREE), ("l", LASSO),
                       ("bad", "model\nworlds a\n")):
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)
    return paths


def test_check_world(files, capsys):
    assert main(["check", "-m", files["m"], "-f", "~Xp & ~X~p", "-w", "w"]) == 0
    assert capsys.readouterr().out.strip() == "true"


def test_check_truth_sets(files, capsys):
    assert main(["check", "-m", files["m"], "-f", "false"]) == 1
    assert main(["check", "-m", files["m"], "-f", "X p"]) == 0
    assert "X p: {u}" in capsys.readouterr().out


def test_errors_exit_2(files, capsys):
    assert main(["check", "-m", files["bad"], "-f", "p"]) == 2
    assert main(["check", "-m", files["m"], "-f", "p &"]) == 2
    assert main(["check", "-m", files["m"], "-f", "p", "-w", "zz"]) == 2
    assert main(["check", "-m", "/no/such/file", "-f", "p"]) == 2
    assert main(["frobnicate"]) == 2
    assert "error" in capsys.readouterr().err


def test_valid_exit_codes(capsys):
    f = "~~F G p -> F ~~G p"
    assert main(["valid", "-f", f, "--frame", "dynamic", "--max-worlds", "3"]) == 0
    assert capsys.readouterr().out.startswith("CounterModel")
    assert main(["valid", "-f", f, "--frame", "persistent", "--max-worlds", "3"]) == 1
    assert "ExhaustedUpTo(3)" in capsys.readouterr().out
    assert main(["sat", "-f", "p & ~p", "--frame", "dynamic", "--max-worlds", "4"]) == 1


def test_json_schema(capsys):
    assert main(["sat", "-f", "~Xp & ~X~p", "--max-worlds", "3", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"verdict", "formula", "frame", "bound", "world", "witness",
                        "theoretical_bound", "stats"}
    assert doc["verdict"] == "satisfiable" and doc["frame"] == "dynamic"
    assert doc["witness"].startswith("model\n")
    assert doc["theoretical_bound"]["exact"] is False
    assert main(["sat", "-f", "false", "--max-worlds", "2", "--json"]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdict"] == "exhausted" and doc["witness"] is None and doc["bound"] == 2


def test_bounds_command(capsys):
    assert main(["bounds", "--Q", "1", "3"]) == 0
    assert capsys.readouterr().out.strip() == "7"
    assert main(["bounds", "--E", "2", "2"]) == 0
    assert capsys.readouterr().out.strip() == "10"
    assert main(["bounds", "--B", "1"]) == 0
    assert "exceeds digit cap" in capsys.readouterr().out


def test_tree_commands(files, capsys):
    assert main(["normalize", "-t", files["t"]]) == 0
    out = capsys.readouterr().out
    assert out.count("node ") == 2
    assert main(["normalize", "-t", files["t"], "--pointed"]) == 2
    assert main(["simulate", "-a", files["t"], "-b", files["t"]]) == 0
    out = capsys.readouterr().out
    assert "bimersion: yes" in out and "same normal form: yes" in out


def test_extract_and_stratify(files, capsys):
    assert main(["extract", "-l", files["l"], "--sigma", "F p", "--trace"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("lasso loop") and "preserved: True" in out
    assert main(["stratify", "-m", files["m"], "-w", "w", "--sigma", "p",
                 "--steps", "10", "--depth", "3"]) == 0
    assert "node (0,2) h v" in capsys.readouterr().out


def test_ltl_command(capsys):
    assert main(["ltl", "-f", "~Xp & ~X~p", "--max-lasso", "4"]) == 1


@pytest.mark.parametrize("entry", ENTRIES, ids=lambda e: e.name)
def test_examples_run(entry, capsys):
    assert main(["examples", "run", entry.name]) == 0
    assert f"result: {entry.expected}" in capsys.readouterr().out


def test_examples_list_and_unknown(capsys):
    assert main(["examples", "list"]) == 0
    assert "itl2-next" in capsys.readouterr().out
    assert main(["examples", "run", "nope"]) == 2
    assert main(["examples", "run"]) == 2
