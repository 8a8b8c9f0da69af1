import csv
import json

import pytest

from seeleyext.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, LOCK_NAME, main


def _report(path, name="moments"):
    return json.loads((path / f"{name}.json").read_text())


def test_vandermonde_generation(tmp_path):
    rc = main(["coeffs", "gen", "--kind", "vandermonde", "--nodes", "1,2", "--m1", "0", "--m2", "1",
               "--out", str(tmp_path)])
    assert rc == EXIT_OK
    rep = _report(tmp_path)
    assert rep["pass"] is True and rep["tool"] == "seeleyext"
    fam = json.loads((tmp_path / "coeffs.json").read_text())
    assert [float(e["a"]) for e in fam["entries"]] == pytest.approx([3.0, -2.0])
    assert not (tmp_path / LOCK_NAME).exists()
    rows = list(csv.DictReader(open(tmp_path / "moments.csv")))
    assert len(rows) == 2


def test_numbers_are_strings(tmp_path):
    main(["coeffs", "gen", "--kind", "dyadic", "--kmax", "1", "--out", str(tmp_path)])
    rep = _report(tmp_path)

    def walk(obj):
        if isinstance(obj, dict):
            for v in obj.values():
                walk(v)
        elif isinstance(obj, list):
            for v in obj:
                walk(v)
        else:
            assert isinstance(obj, (str, bool)) or obj is None

    walk(rep["result"])
    walk(rep["config"])


def test_reports_are_deterministic(tmp_path):
    outs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        assert main(["coeffs", "gen", "--kind", "seeley", "--kmax", "3", "--out", str(d)]) == EXIT_OK
        rep = _report(d)
        rep.pop("timestamp")
        rep["config"].pop("out")
        outs.append((rep, (d / "coeffs.json").read_text()))
    assert outs[0] == outs[1]


def test_check_round_trip(tmp_path):
    main(["coeffs", "gen", "--kind", "seeley", "--kmax", "3", "--out", str(tmp_path)])
    rc = main(["coeffs", "check", "--coeffs", str(tmp_path / "coeffs.json"), "--out", str(tmp_path)])
    assert rc == EXIT_OK and _report(tmp_path)["command"] == "coeffs check"


def test_usage_errors(tmp_path, capsys):
    assert main(["coeffs", "check", "--coeffs", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_USAGE
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["command"] == "coeffs"
    assert main(["coeffs", "gen", "--kind", "two-sided", "--bits", "64", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["nonsense"]) == EXIT_USAGE
    assert main(["domain", "extend", "--shape", "disk", "--t-max", "1.2", "--out", str(tmp_path)]) == EXIT_USAGE


def test_lock_is_respected(tmp_path):
    (tmp_path / LOCK_NAME).write_text("1")
    assert main(["coeffs", "gen", "--kind", "dyadic", "--kmax", "1", "--out", str(tmp_path)]) == EXIT_USAGE
    assert (tmp_path / LOCK_NAME).exists()


def test_extend_with_negative_range(tmp_path):
    main(["coeffs", "gen", "--kind", "seeley", "--kmax", "3", "--out", str(tmp_path)])
    rc = main(["extend", "--f", "poly:2", "--coeffs", str(tmp_path / "coeffs.json"), "--range", "-2:2",
               "--h", "0.5", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    lines = (tmp_path / "extend.csv").read_text().splitlines()
    assert lines[0].startswith("# dim=1") and "shape=9" in lines[0]
    vals = [float(v) for v in lines[1].split(",")]
    xs = [-2 + 0.5 * i for i in range(9)]
    assert vals == pytest.approx([x * x for x in xs], abs=1e-12)


def test_probe_dilation(tmp_path):
    rc = main(["probe", "dilation", "--out", str(tmp_path)])
    assert rc == EXIT_OK


def test_probe_empty_order_list(tmp_path):
    assert main(["probe", "sobolev", "--k", "", "--out", str(tmp_path)]) == EXIT_OK


def test_boundary_probe_fails_with_exit_code(tmp_path):
    # moments -1..1 only: the second derivative jumps by |sum a b^2 - 1| f''(0)
    main(["coeffs", "gen", "--kind", "dyadic", "--kmax", "1", "--out", str(tmp_path)])
    rc = main(["probe", "boundary", "--coeffs", str(tmp_path / "coeffs.json"), "--orders", "2",
               "--f", "exp-decay", "--hs", "1e-4,1e-5", "--out", str(tmp_path)])
    assert rc == EXIT_FAIL
    rows = _report(tmp_path, "probe-boundary")["result"]["rows"]
    assert [r["pass"] for r in rows] == [True, True, False]
    assert float(rows[2]["mismatch"][1]) == pytest.approx(3.75, rel=1e-4)
