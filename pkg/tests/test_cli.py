import csv
import io
import json

import pytest

from hbern.cli import main, surface_from_spec, surface_to_spec


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    text = out.getvalue()
    return code, (json.loads(text) if text else None), text, err.getvalue()


def test_curvature_on_a_strip(tmp_path):
    path = tmp_path / "h.csv"
    code, rec, _, _ = call("curvature", "--strip", "G=@tan_tanh", "--grid", "21",
                           "--window=-2,2", "--csv", str(path))
    assert code == 0
    assert rec["max_abs_H"]["value"] < 1e-10 and "error" in rec["max_abs_H"]
    assert rec["points"] == 441
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["u", "v", "x", "y", "t", "W", "H"] and len(rows) == 442


def test_characteristic_set_reported():
    code, rec, _, _ = call("curvature", "--graph-xy", "f=x*y/2", "--grid", "21")
    assert code == 0 and rec["sigma"]["count"] > 0
    assert all(abs(p[1]) < 1e-8 for p in rec["sigma"]["points"])


def test_output_is_deterministic(tmp_path):
    args = ("variation", "--strip", "G=@affine(0.5,1)", "--family", "random", "--samples", "1",
            "--seed", "7", "--quad-tol", "1e-5", "--support=-0.5,0.5,-0.5,0.5")
    first = call(*args)[2]
    second = call(*args)[2]
    assert first == second
    path = tmp_path / "out.json"
    call(*args, "--json", str(path))
    assert path.read_text() == first


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[curvature]\nsurface = strip\nG = @tan_tanh\ngrid = 5\n")
    code, rec, _, _ = call("curvature", "--config", str(cfg))
    assert code == 0 and rec["points"] == 25
    code, rec, _, _ = call("curvature", "--config", str(cfg), "--grid", "7")
    assert rec["points"] == 49


@pytest.mark.parametrize("argv,code", [
    (("curvature", "--strip", "G=tan(t"), 2),
    (("curvature",), 2),
    (("highdim", "--n", "0"), 2),
    (("curvature", "--strip", "G=t", "--window=1,0"), 2),
    (("instability", "--strip", "G=2+0*t"), 3),
    (("instability", "--strip", "G=-t", "--I=-1,1"), 3),
    (("reduce", "--graph-yt", "psi=2*y+1"), 3),
    (("reduce", "--graph-yt", "psi=2*(y-t)/y", "--probe", "1,2,-1,0"), 3),
])
def test_exit_codes(argv, code):
    assert call(*argv)[0] == code


def test_parse_error_reports_offset():
    code, rec, _, err = call("curvature", "--strip", "G=t^")
    assert code == 2 and rec["offset"] == 2 and "parse error" in err


def test_rejection_record_names_the_stage():
    code, rec, _, _ = call("reduce", "--graph-yt", "psi=2*y+1")
    assert code == 3 and rec["stage"] == "psi_t" and rec["trace"]


def test_thread_variable_is_validated(monkeypatch):
    monkeypatch.setenv("HBERN_THREADS", "lots")
    code, rec, _, _ = call("variation", "--strip", "G=@tan_tanh", "--family", "random",
                           "--samples", "1")
    assert code == 2 and "HBERN_THREADS" in rec["message"]


def test_instability_certificate():
    code, rec, _, _ = call("instability", "--strip", "G=@tan_tanh", "--J=-1,1", "--no-fd")
    cert = rec["certificate"]
    assert code == 0 and cert["gap"]["value"] < 0 and cert["k0"] <= 2**12


@pytest.mark.parametrize("spec", [
    {"surface": "strip", "G": "@tan_tanh", "I": "-inf,inf", "branch": "X"},
    {"surface": "strip", "G": "@affine(0.5,1)", "I": "-inf,inf", "branch": "Y"},
    {"surface": "graph-xy", "f": "x*y/2"},
    {"surface": "plane", "a": "1", "b": "0", "c": "0", "gamma": "0"},
])
def test_surface_spec_round_trip(spec):
    S = surface_from_spec(spec, None)
    again = surface_from_spec(surface_to_spec(S), None)
    assert again.describe() == S.describe()
