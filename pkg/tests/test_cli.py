import csv
import io
import json

import pytest

from effroth.cli import main


def run(capsys, *argv):
    status = main(list(argv))
    return status, capsys.readouterr().out


def run_json(capsys, *argv):
    status, out = run(capsys, *argv)
    return status, json.loads(out)


def test_farey_example(capsys):
    status, out = run(capsys, "farey", "--order", "4", "--format", "csv")
    assert status == 0
    rows = list(csv.DictReader(io.StringIO("\n".join(ln for ln in out.splitlines() if not ln.startswith("#")))))
    assert len(rows) == 7
    assert [r["fraction"] for r in rows[-2:]] == ["3/4", "1/1"]


def test_census_example(capsys, tmp_path):
    status, rep = run_json(capsys, "census", "--d", "2", "--H", "1", "--mode", "restricted", "--cache-dir", str(tmp_path))
    assert status == 0 and rep["results"]["total"] == 1


def test_constants_example(capsys):
    status, rep = run_json(capsys, "constants", "dump", "--name", "E1", "--d", "2")
    assert status == 0 and rep["results"]["constant"]["exact"] == "72"
    assert rep["results"]["constant"]["provenance"] == "exact"


def test_constants_list(capsys):
    status, rep = run_json(capsys, "constants", "list")
    assert status == 0 and rep["results"]["count"] == len(rep["rows"]) > 10


def test_jset_reports_exact_rationals(capsys):
    status, rep = run_json(capsys, "jset", "--psi", "const:1/100", "--q1", "2", "--q2", "3")
    assert status == 0
    assert rep["results"]["measure"]["value"] == "1/50"
    assert rep["results"]["len_star"]["value"] == "49/100"


@pytest.mark.parametrize("argv", [
    ["farey"],
    ["farey", "--order", "x"],
    ["no-such-command"],
    ["jset", "--psi", "wobble:3", "--q1", "1", "--q2", "2"],
    ["jset", "--psi", "power:2", "--q1", "3", "--q2", "2"],
    ["constants", "dump", "--name", "nothing"],
    ["constants", "dump", "--name", "E1"],
    ["bounds", "--H", "10"],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_budget_exceeded_exits_3_with_flagged_report(capsys):
    status, rep = run_json(capsys, "davenport", "count", "--disk", "40", "--budget", "100")
    assert status == 3
    assert rep["budget_exceeded"] and "error" in rep["results"]
    assert rep["results"]["fiber"]["n"] == 2  # the partial report keeps what was computed


def test_identical_config_gives_identical_bytes(capsys, tmp_path):
    argv = ["subspace", "fibervol", "--n", "2", "--eta", "0.1", "--samples", "20000", "--seed", "7"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv)[1]
    assert a == b
    c = run(capsys, *argv[:-1], "8")[1]
    assert c != a


def test_out_file_matches_stdout(capsys, tmp_path):
    out = tmp_path / "r.json"
    _, text = run(capsys, "davenport", "reducible", "--d", "2", "--H", "10")
    main(["davenport", "reducible", "--d", "2", "--H", "10", "--out", str(out)])
    assert out.read_text() == text


def test_report_header_has_version_hash_and_config(capsys):
    _, rep = run_json(capsys, "farey", "--order", "3")
    assert rep["tool"] == "effroth" and rep["version"]
    assert len(rep["config_hash"]) == 16 and rep["config"]["params"]["order"] == 3
    _, other = run_json(capsys, "farey", "--order", "3", "--threads", "4")
    assert other["config_hash"] != rep["config_hash"]


def test_cache_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("EFFROTH_CACHE", str(tmp_path))
    _, rep = run_json(capsys, "census", "--d", "2", "--H", "3")
    assert rep["config"]["cache_dir"] == str(tmp_path)
    assert any(tmp_path.iterdir())
    _, again = run_json(capsys, "census", "--d", "2", "--H", "3")
    assert again["results"] == rep["results"]


def test_bounds_single_form(capsys, tmp_path):
    status, rep = run_json(capsys, "bounds", "--H", "20", "--psi", "power:3", "--q1", "5", "--q2", "40",
                           "--form", "closed", "--cache-dir", str(tmp_path))
    assert status == 0 and set(rep["results"]["reports"]) == {"closed"}


def test_subspace_test_and_solve(capsys):
    lines = json.dumps([["1", "root:-1,-1,1:1"], ["0", "1"]])
    status, rep = run_json(capsys, "subspace", "test", "--chart", "direction", "--lines", lines, "--lam", "1,1",
                           "--psi", "const:0")
    assert status == 0 and rep["results"]["verdict"] == "violated"
    status, rep = run_json(capsys, "subspace", "solve", "--chart", "direction", "--lines", lines, "--psi",
                           "power:1/2", "--qmax", "50")
    assert rep["results"]["solutions"] == 4


def test_davenport_actions(capsys):
    _, rep = run_json(capsys, "davenport", "count", "--disk", "2")
    assert rep["results"]["count"] == 13
    _, rep = run_json(capsys, "davenport", "verify", "--disk", "2")
    assert rep["results"]["report"]["passes"] and rep["results"]["report"]["C"] == 18


def test_davenport_points_from_file(capsys, tmp_path):
    fiber = {"n": 1, "box": [[0], [1]], "predicate": True, "box_constraint": True}
    path = tmp_path / "unit.json"
    path.write_text(json.dumps(fiber))
    status, rep = run_json(capsys, "davenport", "points", "--fiber", str(path), "--d", "2", "--H", "20")
    assert status == 0
    r = rep["results"]["report"]
    assert r["multiplicity"]["consistent"] and r["count"] > 0


def test_verify_all_counts_failures(capsys, tmp_path):
    suite = tmp_path / "test_fake.py"
    suite.write_text(
        "import pytest\n"
        "def test_a():\n    print('criterion 1: PASS ok')\n"
        "@pytest.mark.xfail(strict=True)\n"
        "def test_b():\n    print('criterion 2: XFAIL known')\n    assert False\n")
    status, rep = run_json(capsys, "verify-all", "--tests", str(suite))
    assert status == 0 and rep["results"]["criteria_lines"] == 2 and rep["results"]["failed"] == 0
    suite.write_text("def test_a():\n    print('criterion 1: FAIL off')\n")
    status, rep = run_json(capsys, "verify-all", "--tests", str(suite))
    assert status == 1 and rep["results"]["failed"] == 1
