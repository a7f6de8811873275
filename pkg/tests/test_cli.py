import json

import pytest

from frame_iterates.cli import run

SPEC = '{"kind": "sinc_oversampled", "size": 12, "params": {"rate": 3}}'


def _run(capsys, *argv):
    rc = run(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


@pytest.fixture
def family_file(tmp_path, capsys):
    p = tmp_path / "f.json"
    assert _run(capsys, "generate", "--spec", SPEC, "--output", str(p))[0] == 0
    return p


@pytest.mark.parametrize("cmd", ["analyze", "represent", "dual"])
def test_commands_on_family(capsys, family_file, cmd):
    rc, out, _ = _run(capsys, cmd, "--input", str(family_file))
    assert rc == 0
    doc = json.loads(out)
    assert doc["command"] == cmd and doc["schema"] == "frame-iterates/1"


def test_outputs_are_byte_identical(capsys, family_file):
    a = _run(capsys, "dual", "--input", str(family_file), "--seed", "3")[1]
    b = _run(capsys, "dual", "--input", str(family_file), "--seed", "3")[1]
    assert a == b


def test_perturb(capsys, family_file):
    rc, out, _ = _run(capsys, "perturb", "--input", str(family_file), "--perturbed", str(family_file))
    assert rc == 0 and json.loads(out)["verdict"]["mu_min"] == 0


def test_ladder_csv(capsys):
    rc, out, _ = _run(capsys, "ladder", "--spec", '{"kind": "weighted_onb"}', "--windows", "8,16,32",
                      "--format", "csv")
    assert rc == 0 and len(out.strip().splitlines()) == 4


def test_config_precedence(capsys, tmp_path, family_file):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"eta": 0.25, "seed": 5}')
    doc = json.loads(_run(capsys, "analyze", "--input", str(family_file), "--config", str(cfg),
                          "--eta", "0.5")[1])
    assert doc["tolerances"]["eta"] == 0.5 and doc["seed"] == 5


@pytest.mark.parametrize("argv", [["bogus"], ["reproduce", "nope"], ["analyze"],
                                  ["ladder", "--spec", SPEC, "--windows", "16,8"],
                                  ["generate", "--spec", "{not json"],
                                  ["analyze", "--input", "/nonexistent.json"]])
def test_usage_errors_exit_1(capsys, argv):
    assert _run(capsys, *argv)[0] == 1


def test_reproduce_ok(capsys):
    rc, out, _ = _run(capsys, "reproduce", "fourier-onb")
    assert rc == 0 and json.loads(out)["ok"] is True


def test_contract_violation_exits_2(capsys, monkeypatch):
    import frame_iterates.cli as cli
    monkeypatch.setattr(cli, "reproduce", lambda *a, **k: {"ok": False, "checks": {"x": False}})
    rc, out, err = _run(capsys, "reproduce", "fourier-onb")
    assert rc == 2 and json.loads(out)["ok"] is False and "contract violation" in err


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "frame_iterates", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "reproduce" in r.stdout


def test_ladder_needs_three_windows(capsys):
    assert _run(capsys, "ladder", "--spec", '{"kind": "weighted_onb"}', "--windows", "8,16")[0] == 1
