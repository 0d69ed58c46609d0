import csv
import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rht import cli

EXAMPLE = """# worked example
algebra R { gen x : 4; }
algebra S { gen y : 2; }
map phi : R -> S { x -> y^2; }
transfer phi;
"""

MANY = """algebra S2 { gen y : 2; gen z : 3; d z = y^2; }
algebra P { gen y : 2; }
hh P;
hc P;
euler S2;
check S2;
hh S2;
"""


def run_main(tmp_path, text, *args):
    p = tmp_path / "in.rht"
    p.write_text(text, encoding="utf-8")
    return cli.main([str(p), *args])


def test_json_report_shape(tmp_path, capsys):
    assert run_main(tmp_path, EXAMPLE, "--format", "json", "--max-degree", "8") == 0
    out = json.loads(capsys.readouterr().out)
    assert isinstance(out, list) and len(out) == 1
    r = out[0]
    assert r["schema"] == 1 and r["job"] == "transfer phi"
    assert [d["n"] for d in r["degrees"]] == list(range(9))
    d4 = r["degrees"][4]
    assert d4["src_basis"] == ["y^2"] and d4["tgt_basis"] == ["x"] and d4["matrix"] == [["2"]]
    assert all(d["certified"] for d in r["degrees"])


def test_table_and_csv(tmp_path, capsys):
    assert run_main(tmp_path, EXAMPLE, "--max-degree", "4") == 0
    table = capsys.readouterr().out
    assert table.startswith("== transfer phi") and "[y^2] -> [x]  2" in table
    assert run_main(tmp_path, EXAMPLE, "--max-degree", "4", "--format", "csv") == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["job", "n", "certified", "src_basis", "tgt_basis", "matrix"]
    assert ["transfer phi", "4", "1", "y^2", "x", "2"] in rows


def test_out_file_and_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_main(tmp_path, MANY, "--format", "json", "--max-degree", "6", "--out", str(a)) == 0
    assert run_main(tmp_path, MANY, "--format", "json", "--max-degree", "6", "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_parallel_jobs_keep_file_order(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_main(tmp_path, MANY, "--format", "json", "--max-degree", "6", "--out", str(a)) == 0
    assert run_main(tmp_path, MANY, "--format", "json", "--max-degree", "6", "--out", str(b), "--parallel-jobs", "3") == 0
    assert a.read_bytes() == b.read_bytes()
    jobs = [r["job"] for r in json.loads(a.read_text(encoding="utf-8"))]
    assert jobs == ["hh P", "hc P", "euler S2", "check S2", "hh S2"]


def test_hh_and_euler_reports(tmp_path, capsys):
    assert run_main(tmp_path, MANY, "--format", "json", "--max-degree", "6") == 0
    out = {r["job"]: r for r in json.loads(capsys.readouterr().out)}
    assert [d["dim"] for d in out["hh P"]["degrees"]] == [1] * 7
    assert [d["dim"] for d in out["hc P"]["degrees"]] == [1, 0, 1, 0, 1, 0, 1]
    assert out["euler S2"]["diagnostics"]["euler"] == "2"
    assert out["euler S2"]["diagnostics"]["betti_alternating_sum"] == 2
    assert out["check S2"]["diagnostics"]["passed"] is True


def test_parse_errors_exit_1(tmp_path, capsys):
    assert run_main(tmp_path, "algebra A { gen y : 2; d y = y; }") == 1
    err = capsys.readouterr().err
    assert "in.rht:1:" in err and "DslDegreeError" in err
    assert run_main(tmp_path, "algebra A { gen y : 2 }") == 1
    assert "DslSyntaxError" in capsys.readouterr().err
    assert run_main(tmp_path, "hh Nope;") == 1


def test_validation_errors_exit_2(tmp_path, capsys):
    assert run_main(tmp_path, EXAMPLE, "--max-degree", "65") == 2
    assert run_main(tmp_path, EXAMPLE, "--max-degree", "-1") == 2
    assert cli.main([str(tmp_path / "missing.rht")]) == 2
    bad_action = EXAMPLE + "action A on S { auto g { y -> -y; } relation g^2; }\n" \
        "action B on R { auto g { x -> -x; } relation g^2; }\ntransfer phi, A, B;\n"
    assert run_main(tmp_path, bad_action, "--max-degree", "4") == 2
    capsys.readouterr()


def test_failed_check_exits_2_but_still_reports(tmp_path, capsys):
    src = "algebra R { gen x : 4; }\naction A on R { auto g { x -> -x; } relation g; }\ncheck A;\n"
    assert run_main(tmp_path, src, "--format", "json", "--max-degree", "8") == 2
    out = json.loads(capsys.readouterr().out)
    assert out[0]["diagnostics"]["passed"] is False


def test_hard_cap_can_be_raised(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RHT_MAX_DEGREE", "3")
    assert run_main(tmp_path, EXAMPLE, "--max-degree", "4") == 2
    monkeypatch.setenv("RHT_MAX_DEGREE", "junk")
    assert run_main(tmp_path, EXAMPLE, "--max-degree", "4") == 2
    monkeypatch.setenv("RHT_MAX_DEGREE", "100")
    assert cli.hard_cap() == 100
    capsys.readouterr()


def test_unsafe_truncation_exit_4(tmp_path, capsys):
    src = "algebra L { gen a : 1; }\nhh L;\n"
    assert run_main(tmp_path, src, "--max-degree", "4") == 4
    assert run_main(tmp_path, src, "--max-degree", "4", "--length-cutoff", "3", "--format", "json") == 0
    out = json.loads(capsys.readouterr().out)
    assert "TRUNCATION-DEPENDENT" in out[0]["diagnostics"]["stamps"]


def test_computation_error_exit_3(tmp_path, capsys):
    src = "algebra R { gen x : 2; }\nalgebra Q0 { }\nmap e : R -> Q0 { x -> 0; }\ntransfer e;\n"
    assert run_main(tmp_path, src, "--max-degree", "4") == 3
    assert "UnsupportedModel" in capsys.readouterr().err


def test_zigzag_route_from_cli(tmp_path, capsys):
    assert run_main(tmp_path, EXAMPLE, "--route", "both", "--max-degree", "6", "--format", "json") == 0
    r = json.loads(capsys.readouterr().out)[0]
    assert r["diagnostics"]["route_agreement"] is True


ALPHABET = list("{}();:,^*/+-=#$ \nabdgxyz0123456789") + ["gen", "algebra", "map", "->", "hh", "transfer"]


@settings(max_examples=40)
@given(st.data())
def test_malformed_inputs_never_crash(tmp_path_factory, data):
    text = EXAMPLE
    for _ in range(data.draw(st.integers(1, 4))):
        pos = data.draw(st.integers(0, len(text)))
        if data.draw(st.booleans()) and pos < len(text):
            text = text[:pos] + text[pos + 1:]
        else:
            text = text[:pos] + data.draw(st.sampled_from(ALPHABET)) + text[pos:]
    d = tmp_path_factory.mktemp("m")
    code = run_main(d, text, "--max-degree", "3")
    assert code in (0, 1, 2, 3, 4)
