import json

import pytest

from toricflex import serialize as io
from toricflex.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(io.dumps(obj))
    return path


# toric


def test_info_a2(capsys):
    code, out, _ = run(capsys, "toric", "info", "catalog:a2")
    info = json.loads(out)
    assert code == 0
    assert len(info["hilbert_basis"]) == 2 and len(info["faces"]) == 4
    assert info["ml_trivial"] is True


def test_info_x21_from_file(capsys, tmp_path):
    path = write(tmp_path, "x21.json", {"rank": 2, "rays": [[1, 0], [1, 2]]})
    code, out, _ = run(capsys, "toric", "info", path, "--bound", 2)
    assert code == 0 and len(json.loads(out)["hilbert_basis"]) == 3


def test_malformed_json(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"rank": 2, "rays": [[1, 0],')
    code, out, err = run(capsys, "toric", "info", path)
    assert code == 2 and not out
    assert "bad.json:1:" in err


def test_roots(capsys):
    code, out, _ = run(capsys, "toric", "roots", "catalog:a2", "--bound", 2)
    roots = json.loads(out)["roots"]
    assert code == 0 and len(roots) == 6


def test_flex_and_ml(capsys):
    code, out, _ = run(capsys, "toric", "flex", "catalog:quadric3")
    assert code == 0 and json.loads(out)["rank"] == 3
    code, out, _ = run(capsys, "toric", "flex", "catalog:x21", "--point", '{"torus": ["2", "3"]}')
    assert code == 0 and json.loads(out)["verdict"]
    code, out, _ = run(capsys, "toric", "ml", "catalog:x31")
    assert code == 0 and json.loads(out)["intersection"] == []


def test_toric_solve_verify_round_trip(capsys, tmp_path):
    pts = write(tmp_path, "p.json", [{"torus": ["2", "3"]}, {"values": ["0", "5"]}])
    tgt = write(tmp_path, "q.json", [{"torus": ["-1", "1/2"]}, {"torus": ["4", "4"]}])
    cert = tmp_path / "cert.json"
    code, _, _ = run(capsys, "toric", "solve", "catalog:a2", "--points", pts, "--targets", tgt, "--out", cert)
    assert code == 0
    code, out, _ = run(capsys, "toric", "verify", cert)
    assert code == 0 and json.loads(out)["verdict"] is True
    # deterministic output
    again = tmp_path / "again.json"
    run(capsys, "toric", "solve", "catalog:a2", "--points", pts, "--targets", tgt, "--out", again)
    assert again.read_bytes() == cert.read_bytes()


def test_toric_tampered_word(capsys, tmp_path):
    pts = write(tmp_path, "p.json", [{"torus": ["2", "3"]}])
    cert = tmp_path / "cert.json"
    run(capsys, "toric", "solve", "catalog:a2", "--points", pts, "--out", cert)
    obj = json.loads(cert.read_text())
    obj["word"][0]["t"] = str(int(obj["word"][0]["t"].split("/")[0]) + 1)
    bad = write(tmp_path, "bad.json", obj)
    code, out, _ = run(capsys, "toric", "verify", bad)
    assert code == 1 and json.loads(out)["verdict"] is False
    obj = json.loads(cert.read_text())
    obj["inputs"]["points"] = [{"torus": ["2", "5"]}]
    code, out, _ = run(capsys, "toric", "verify", write(tmp_path, "bad2.json", obj))
    assert code == 1


def test_toric_solve_to_standard(capsys, tmp_path):
    pts = write(tmp_path, "p.json", {"points": [{"torus": ["2", "3", "5"]}]})
    code, out, _ = run(capsys, "toric", "solve", "catalog:a3", "--points", pts)
    assert code == 0 and json.loads(out)["inputs"]["targets"] is None
    cert = write(tmp_path, "c.json", json.loads(out))
    assert run(capsys, "toric", "verify", cert)[0] == 0


def test_toric_act_identity_and_motion(capsys, tmp_path):
    pts = write(tmp_path, "p.json", [{"torus": ["2", "3"]}, {"values": ["0", "0", "5"]}])
    letter = json.dumps({"e": [-1, 1], "ray": 0, "t": "0"})
    code, out, _ = run(capsys, "toric", "act", "catalog:x21", "--points", pts, "--letter", letter)
    assert code == 0
    assert out == pts.read_text()
    letter = json.dumps({"e": [-1, 1], "ray": 0, "t": "1"})
    code, out, _ = run(capsys, "toric", "act", "catalog:x21", "--points", pts, "--letter", letter)
    assert code == 0 and out != pts.read_text()


def test_toric_stage_errors_are_reported(capsys, tmp_path):
    pts = write(tmp_path, "p.json", [{"values": ["1", "1", "1"]}])
    tgt = write(tmp_path, "q.json", [{"values": ["2", "2", "2"]}])
    code, _, err = run(capsys, "toric", "solve", "catalog:x21", "--points", pts, "--targets", tgt)
    assert code == 2 and "FieldExtensionError" in err and "[" in err


def test_wrong_variety_kind(capsys):
    assert run(capsys, "toric", "info", "catalog:susp_x2")[0] == 2
    assert run(capsys, "susp", "build", "catalog:a2")[0] == 2
    assert run(capsys, "toric", "act", "catalog:a2", "--points", "[]")[0] == 2


# suspensions


def test_susp_build(capsys):
    code, out, _ = run(capsys, "susp", "build", "--k", 1, "--f", "x^2 - x", "--f", "u1 + x0")
    obj = json.loads(out)
    assert code == 0 and obj["level"] == 2 and obj["coordinates"] == ["x0", "u1", "v1", "u2", "v2"]
    code, out, _ = run(capsys, "susp", "build", "catalog:susp_x3px")
    assert code == 0 and json.loads(out)["relations"] == ["u1*v1 - x0^3 - x0"]
    assert run(capsys, "susp", "build", "--k", 1, "--f", "7")[0] == 2
    assert run(capsys, "susp", "build")[0] == 2


def test_susp_act(capsys, tmp_path):
    pts = write(tmp_path, "p.json", [["1", "1", "1"]])
    code, out, _ = run(capsys, "susp", "act", "catalog:susp_x2", "--points", pts, "--letter", '{"side": "u", "q": ["0", "1"], "t": "1"}')
    assert code == 0 and json.loads(out) == [["2", "1", "4"]]
    code, out, _ = run(capsys, "susp", "act", "catalog:susp_x2", "--points", pts, "--letter", '{"side": "u", "q": ["0", "1"], "t": "0"}')
    assert out == pts.read_text()
    word = write(tmp_path, "w.json", [{"side": "u", "q": ["0", "1"], "t": "1"}, {"side": "u", "q": ["0", "1"], "t": "-1"}])
    code, out, _ = run(capsys, "susp", "act", "catalog:susp_x2", "--points", pts, "--word", word)
    assert out == pts.read_text()
    assert run(capsys, "susp", "act", "catalog:susp_x2", "--points", pts)[0] == 2


def test_susp_solve_verify_exact(capsys, tmp_path):
    pts = write(tmp_path, "p.json", [["2", "2", "1"], ["3", "3", "2"]])
    cert = tmp_path / "c.json"
    code, _, err = run(capsys, "susp", "solve", "catalog:susp_x2mx", "--points", pts, "--out", cert)
    assert code == 0, err
    code, out, _ = run(capsys, "susp", "verify", cert)
    assert code == 0 and json.loads(out)["residual"] == 0
    obj = json.loads(cert.read_text())
    obj["word"][-1]["t"] = "7"
    assert run(capsys, "susp", "verify", write(tmp_path, "bad.json", obj))[0] == 1


def test_susp_solve_verify_numeric(capsys, tmp_path):
    pts = write(tmp_path, "p.json", [["1", "1", "2"], ["0", "0", "4"], ["-1", "2", "-1"]])
    tgt = write(tmp_path, "q.json", [["2", "5", "2"], ["1", "2", "1"], ["0", "1", "0"]])
    cert = tmp_path / "c.json"
    code, _, err = run(capsys, "susp", "solve", "catalog:susp_x3px", "--points", pts, "--targets", tgt, "--mode", "numeric", "--out", cert)
    assert code == 0, err
    obj = json.loads(cert.read_text())
    assert obj["residual"] < 1e-9
    assert all(all(v.values()) for v in obj["stages"]["postconditions"].values())
    code, out, _ = run(capsys, "susp", "verify", cert)
    assert code == 0 and json.loads(out)["verdict"]


def test_susp_exact_field_extension_error(capsys, tmp_path):
    pts = write(tmp_path, "p.json", [["1", "2", "1/2"]])
    code, _, err = run(capsys, "susp", "solve", "catalog:susp_x2", "--points", pts)
    assert code == 2 and "[fix-v]" in err


def test_susp_flex(capsys):
    code, out, _ = run(capsys, "susp", "flex", "catalog:susp_x2", "--point", '["1", "1", "1"]')
    obj = json.loads(out)
    assert code == 0 and obj["matrix"] == [["1", "2", "0"], ["1", "0", "2"]] and obj["rank"] == 2
    assert run(capsys, "susp", "flex", "catalog:susp_x2", "--point", '["0", "0", "3"]')[0] == 2


def test_verify_rejects_wrong_certificate_kind(capsys, tmp_path):
    cert = write(tmp_path, "c.json", {"kind": "toric-solve"})
    assert run(capsys, "susp", "verify", cert)[0] == 2
    cert = write(tmp_path, "d.json", {"kind": "suspension-solve"})
    assert run(capsys, "toric", "verify", cert)[0] == 2


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0 and "quadric3" in json.loads(out)["catalog"]
    code, out, _ = run(capsys, "catalog", "x31")
    assert json.loads(out)["rays"] == [[0, 1], [3, -1]]
    assert run(capsys, "catalog", "missing")[0] == 2


def test_usage_errors_exit_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["toric"])
    assert exc.value.code != 0
