import io
import json
from pathlib import Path

from reidemeister.cli import EXIT_ERROR, EXIT_OK, EXIT_UNDECIDED, run

GOLDEN = Path(__file__).parent / "golden"


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def payload(text):
    return json.loads(text)


def test_spectrum_hyperbolic_example():
    code, out, err = invoke(["spectrum", "--family", "z2-semidirect", "--matrix", "2,3;3,5"])
    assert code == EXIT_OK and err == ""
    env = payload(out)
    assert env["result"]["spectrum"] == {"kind": "finite", "values": [4]}
    assert env["trace"]
    assert env["version"]


def test_rnumber_witness_example():
    code, out, _ = invoke(
        ["rnumber", "--family", "heisenberg-times-z", "--n", "1", "--witness", "phi_m", "--param", "3"]
    )
    assert code == EXIT_OK
    assert payload(out)["result"]["rnumber"] == 12


def test_spectrum_identity_is_full():
    code, out, _ = invoke(["spectrum", "--family", "z2-semidirect", "--matrix", "1,0;0,1"])
    assert code == EXIT_OK
    assert payload(out)["result"]["spectrum"] == {"kind": "full"}


def test_json_output_is_byte_deterministic():
    argv = ["spectrum", "--family", "z3-semidirect", "--matrix", "1,0,1;0,5,2;0,2,1"]
    _, first, _ = invoke(argv)
    _, second, _ = invoke(argv)
    assert first == second


def test_decide_outcomes_and_exit_codes():
    code, out, _ = invoke(["decide", "--matrix", "2,3;3,5"])
    assert code == EXIT_OK
    body = payload(out)["result"]
    assert body["outcome"] == "witness"
    assert body["witness"]["matrix"] == [[0, -1], [1, 0]]

    code, out, _ = invoke(["decide", "--matrix", "0,-1;1,0"])
    assert code == EXIT_OK
    assert payload(out)["result"]["outcome"] == "proven-empty"

    # no solution with |m| <= 1 for this matrix, so the bounded search is inconclusive
    code, out, _ = invoke(["decide", "--matrix", "1,1;3,4", "--bound", "1"])
    assert code == EXIT_UNDECIDED
    assert payload(out)["result"]["outcome"] == "none-up-to-bound"


def test_parse_errors_name_token_and_position():
    code, out, err = invoke(["spectrum", "--family", "z2-semidirect", "--matrix", "2,x;3,5"])
    assert code == EXIT_ERROR and out == ""
    assert "row 1, entry 2" in err and "'x'" in err


def test_dimension_errors_exit_one():
    code, _, err = invoke(["spectrum", "--family", "z3-semidirect", "--matrix", "2,3;3,5"])
    assert code == EXIT_ERROR and "3x3" in err


def test_unknown_family_exit_one():
    code, _, err = invoke(["spectrum", "--family", "mystery", "--matrix", "1,0;0,1"])
    assert code == EXIT_ERROR and "mystery" in err


def test_spectrum_undecided_exit_code():
    code, out, _ = invoke(
        ["spectrum", "--family", "z2-semidirect", "--matrix", "1,1;3,4", "--bound", "1"]
    )
    assert code == EXIT_UNDECIDED
    body = payload(out)["result"]["spectrum"]
    assert body["kind"] == "undecided" and body["bound"] == 1


def test_double_ext_and_hn_families():
    code, out, _ = invoke(
        ["spectrum", "--family", "double-ext", "--matrix", "5,2;2,1", "--n0", "1,0"]
    )
    assert code == EXIT_OK
    assert payload(out)["result"]["spectrum"] == {"kind": "r_infinity"}

    code, out, _ = invoke(["spectrum", "--family", "hn-semidirect", "--n", "2", "--k", "1", "--l", "0"])
    assert code == EXIT_OK
    assert payload(out)["result"]["spectrum"] == {"kind": "multiples", "c": 8}

    code, out, _ = invoke(["spectrum", "--family", "heisenberg", "--n", "5"])
    assert payload(out)["result"]["spectrum"] == {"kind": "multiples", "c": 2}

    code, out, _ = invoke(["spectrum", "--family", "three-step"])
    assert payload(out)["result"]["spectrum"] == {"kind": "r_infinity"}


def test_tables_match_golden_json():
    _, out, _ = invoke(["tables", "--format", "json"])
    assert out == (GOLDEN / "tables.json").read_text()


def test_tables_match_golden_text():
    _, out, _ = invoke(["tables", "--format", "text"])
    assert out == (GOLDEN / "tables.txt").read_text()


def test_oracle_exit_codes():
    code, out, _ = invoke(
        ["oracle", "--family", "z2-semidirect", "--matrix=-1,0;0,-1",
         "--witness", "M_m", "--param", "2", "--radius", "3"]
    )
    assert code == EXIT_OK
    body = payload(out)["result"]
    assert body["complete"] is True and body["classes"] == 4 and body["formula"] == 4

    code, out, _ = invoke(
        ["oracle", "--family", "free-abelian", "--n", "1", "--witness", "negation",
         "--param", "1", "--radius", "2"]
    )
    assert code == EXIT_OK and payload(out)["result"]["classes"] == 2


def test_oracle_incomplete_exit_code(tmp_path):
    spec_file = tmp_path / "identity.json"
    spec_file.write_text(
        json.dumps({"family": {"tag": "free-abelian", "n": 1}, "images": {"e1": [1]}})
    )
    code, out, _ = invoke(["oracle", "--spec-json", str(spec_file), "--radius", "3"])
    assert code == EXIT_UNDECIDED
    body = payload(out)["result"]
    assert body["complete"] is False and body["formula"] == "infinity"


def test_rnumber_from_spec_json(tmp_path):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(
        json.dumps(
            {
                "family": {"tag": "heisenberg-times-z", "n": 1},
                "images": {"x": [0, 1, 0, 0], "y": [1, 2, 0, 0], "z": [0, 0, -1, 0], "u": [0, 0, 0, -1]},
            }
        )
    )
    code, out, _ = invoke(["rnumber", "--spec-json", str(spec_file)])
    assert code == EXIT_OK
    assert payload(out)["result"]["rnumber"] == 8


def test_rnumber_spec_json_rejects_non_automorphism(tmp_path):
    spec_file = tmp_path / "bad.json"
    spec_file.write_text(
        json.dumps(
            {
                "family": {"tag": "heisenberg", "n": 1},
                "images": {"x": [1, 0, 0], "y": [0, 1, 0], "z": [0, 0, 2]},
            }
        )
    )
    code, _, err = invoke(["rnumber", "--spec-json", str(spec_file)])
    assert code == EXIT_ERROR and "verification failed" in err


def test_env_bound_override(monkeypatch):
    monkeypatch.setenv("TWISTED_BOUND", "77")
    _, out, _ = invoke(["spectrum", "--family", "z2-semidirect", "--matrix", "2,3;3,5"])
    assert payload(out)["bound"] == 77
    # --bound wins over the environment
    _, out, _ = invoke(["spectrum", "--family", "z2-semidirect", "--matrix", "2,3;3,5", "--bound", "5"])
    assert payload(out)["bound"] == 5
    monkeypatch.setenv("TWISTED_BOUND", "zero")
    code, _, err = invoke(["spectrum", "--family", "z2-semidirect", "--matrix", "2,3;3,5"])
    assert code == EXIT_ERROR and "TWISTED_BOUND" in err


def test_text_format_renders():
    code, out, _ = invoke(["spectrum", "--family", "z2-semidirect", "--matrix", "2,3;3,5", "--format", "text"])
    assert code == EXIT_OK
    assert "spectrum: {4,oo}" in out
    assert "trace:" in out
