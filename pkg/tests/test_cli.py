import json
import subprocess
import sys

import pytest

from wallcross.cli import main
from wallcross.invariants import closed_form
from wallcross.lpoly import LambdaPoly
from wallcross.series import BiSeries, GaussianRational


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_delta_json_shape(capsys):
    code, out, _ = run(capsys, "delta", "--surface", "P2hat", "--xi", "2E", "--L", "H",
                       "--dmax", "12", "--format", "json")
    assert code == 0
    assert json.loads(out) == {"xi": "2E", "delta": [{"d": 4, "c": "1"}]}


def test_delta_json_round_trip(capsys):
    code, out, _ = run(capsys, "delta", "--xi", "2E", "--L", "3H-E", "--dmax", "16",
                       "--format", "json")
    assert code == 0
    got = LambdaPoly.from_json_obj(json.loads(out)["delta"], 16)
    assert got == closed_form("2*L^4-38*L^8", 16)


def test_delta_table(capsys):
    code, out, _ = run(capsys, "delta", "--xi", "2E", "--L", "H-E", "--dmax", "12")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("xi = 2E")
    assert lines[-2].split() == ["4", "2"] and lines[-1].split() == ["8", "-18"]


def test_series_dump_round_trip(capsys):
    code, out, _ = run(capsys, "series", "zeta", "--dmax", "6", "--format", "json")
    assert code == 0
    s = BiSeries.from_json(out)
    assert s.D == 6
    assert s[1, -1] == GaussianRational(0, 1)


def test_chi_p2_theorem_convention(capsys):
    code, out, _ = run(capsys, "chi", "--surface", "P2", "--L", "2H", "--dmax", "12",
                       "--convention", "theorem", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["convention"] == "theorem"
    got = LambdaPoly.from_json_obj(obj["series"], obj["lambda_truncation"])
    assert got == closed_form("1/(1-L^4)^6-1", 12)


def test_chi_tiebreak_label(capsys):
    code, out, _ = run(capsys, "chi", "--L", "2H", "--pol", "H", "--tiebreak=-E", "--dmax", "8")
    assert code == 0
    assert "H+eps(-E)" in out.splitlines()[0]


def test_walls(capsys):
    code, out, _ = run(capsys, "walls", "--L", "H", "--from", "F", "--to", "H", "--dmax", "12",
                       "--format", "json")
    assert code == 0
    assert json.loads(out) == [{"xi": "-2E", "weight": "1/2", "square": -4, "N": -2}]


def test_verify_dims_and_order(capsys):
    code, out, _ = run(capsys, "verify", "dims", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["ok"] and [c["name"] for c in rep["checks"]] == [f"c2={c}" for c in range(1, 11)]


def test_blowup_poly_and_dims(capsys):
    code, out, _ = run(capsys, "blowup-poly", "2")
    assert code == 0 and "S_2 = lambda*x" in out
    code, out, _ = run(capsys, "dims", "--c2max", "3")
    assert code == 0 and out.splitlines()[-1].split() == ["3", "21", "21"]


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["delta", "--xi", "2Q", "--L", "H"],
    ["delta", "--xi", "E", "--L", "E"],
    ["chi", "--L", "H"],
    ["walls", "--L", "H"],
    ["delta", "--xi", "2E", "--dmax", "0"],
    ["chi", "--c1", "F", "--L", "0", "--pol", "F+", "--surface", "P1xP1",
     "--convention", "theorem"],
])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_env_default_truncation(capsys, monkeypatch):
    monkeypatch.setenv("WALLCROSS_DMAX", "6")
    code, out, _ = run(capsys, "series", "u", "--format", "json")
    assert code == 0 and json.loads(out)["lambda_truncation"] == 6
    monkeypatch.setenv("WALLCROSS_DMAX", "six")
    assert run(capsys, "series", "u")[0] == 2


def test_verification_failure_exit_code(capsys, monkeypatch):
    import wallcross.cli as cli
    monkeypatch.setattr(cli, "run_verify", lambda *a, **k: {
        "suite": "dims", "ok": False,
        "checks": [{"name": "c2=1", "ok": False, "seconds": 0,
                    "failure": {"d": 3, "k": None, "expected": "5", "got": "4"}}]})
    code, out, _ = run(capsys, "verify", "dims")
    assert code == 1 and "d=3" in out


def test_precision_exit_code(capsys, monkeypatch):
    import wallcross.cli as cli
    from wallcross.series import WindowError

    def boom(*a, **k):
        raise WindowError("q^0 outside the window")
    monkeypatch.setattr(cli, "delta_op", boom)
    assert run(capsys, "delta", "--xi", "2E", "--L", "H")[0] == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "wallcross", "dims", "--c2max", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "C(c2+4,5)" in r.stdout
