import json
import subprocess
import sys

import pytest

from callcheck.cli import main
from callcheck.pipeline import EXIT_BUDGET, EXIT_INPUT, EXIT_PASS, EXIT_VIOLATION
from conftest import FIXTURES

FS_RULES = str(FIXTURES / "first_second.rules")
SOCK_RULES = str(FIXTURES / "socket.rules")


def ir(name):
    return str(FIXTURES / f"{name}.ll")


def run_cli(capsys, *args):
    code = main(["analyze", *args])
    out, err = capsys.readouterr()
    return code, out, err


def test_pass_exit_code(capsys):
    code, out, _ = run_cli(capsys, "--ir", ir("socket"), "--rules", SOCK_RULES)
    assert code == EXIT_PASS
    doc = json.loads(out)
    assert doc["violations"] == [] and doc["rules"][0]["verdict"] == "pass"


def test_violation_exit_code_and_schema(capsys):
    code, out, _ = run_cli(capsys, "--ir", ir("socket_noclose"), "--rules", SOCK_RULES)
    assert code == EXIT_VIOLATION
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert set(doc) == {"schema_version", "tool", "config", "rules", "violations",
                        "stats", "diagnostics"}
    assert doc["tool"]["name"] == "callcheck"
    assert set(doc["stats"]) == {"phase_times", "constraint_count", "pts_fact_count",
                                 "callgraph_edge_count", "grammar_production_count",
                                 "propagation_steps", "contexts"}
    assert all(t is None for t in doc["stats"]["phase_times"].values())
    v = doc["violations"][0]
    assert v["property"] == "converge" and v["missing"] == ["close"]
    assert [e["event"] for e in v["witness"]] == ["connect", "write_to_server"]
    for e in v["witness"]:
        assert e["function"] == "main" and e["file"] == ir("socket_noclose")
        assert isinstance(e["index"], int) and e["chain"]


@pytest.mark.parametrize("args", [
    ["--ir", "/nonexistent.ll", "--rules", SOCK_RULES],
    ["--ir", ir("socket"), "--rules", "/nonexistent.rules"],
    ["--ir", ir("socket"), "--rules", SOCK_RULES, "--entry", "nope"],
    ["--ir", ir("socket"), "--rules", ir("socket")],
    ["--ir", FS_RULES, "--rules", SOCK_RULES],
])
def test_input_errors(capsys, args):
    code, out, err = run_cli(capsys, *args)
    assert code == EXIT_INPUT
    assert out == "" and err.startswith("callcheck: error:")


def test_budget_exit_code(capsys):
    code, _, err = run_cli(capsys, "--ir", ir("branched_funptr_order"), "--rules", FS_RULES,
                           "--budget", "3")
    assert code == EXIT_BUDGET and "budget" in err


def test_bad_flag_is_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["analyze", "--ir", ir("socket"), "--rules", SOCK_RULES, "--sensitivity", "5"])
    assert e.value.code == 2


def test_text_format(capsys):
    code, out, _ = run_cli(capsys, "--ir", ir("branched_funptr_order"), "--rules", FS_RULES,
                           "--format", "text")
    assert code == EXIT_VIOLATION
    lines = out.splitlines()
    assert lines[0].startswith("FAIL ") and "missing={first}" in lines[0]
    assert "witness=second·first" in lines[2]
    assert lines[-1].startswith("stats: constraints=")


def test_timings_populate_phase_times(capsys):
    _, out, _ = run_cli(capsys, "--ir", ir("socket"), "--rules", SOCK_RULES, "--timings")
    times = json.loads(out)["stats"]["phase_times"]
    assert list(times) == ["parse", "constraints", "solve", "graphs", "grammar", "rules"]
    assert all(isinstance(t, float) for t in times.values())


def test_witness_export_single_record(capsys, tmp_path):
    out = tmp_path / "w.ndjson"
    run_cli(capsys, "--ir", ir("socket_noclose"), "--rules", SOCK_RULES,
            "--witness-out", str(out))
    recs = [json.loads(x) for x in out.read_text().splitlines()]
    assert [(r["property"], r["missing"]) for r in recs] == [("converge", ["close"]),
                                                             ("order", [])]
    assert recs[0]["events"] == ["connect", "write_to_server"]
    assert len(recs[0]["provenance"]) == 2


def test_witness_export_empty_when_passing(capsys, tmp_path):
    out = tmp_path / "w.ndjson"
    run_cli(capsys, "--ir", ir("socket"), "--rules", SOCK_RULES, "--witness-out", str(out))
    assert out.exists() and out.read_text() == ""


def test_witness_export_converge_records_in_order(capsys, tmp_path):
    out = tmp_path / "w.ndjson"
    run_cli(capsys, "--ir", ir("branched_funptr_order"), "--rules", FS_RULES,
            "--witness-out", str(out))
    recs = [json.loads(x) for x in out.read_text().splitlines()]
    conv = [r for r in recs if r["property"] == "converge"]
    assert [r["missing"] for r in conv] == [["first"], ["second"]]
    assert [r["events"] for r in conv] == [["second", "second"], ["first", "first"]]


def test_dot_and_grammar_export(capsys, tmp_path):
    run_cli(capsys, "--ir", ir("branched_funptr"), "--rules", FS_RULES,
            "--dot-out", str(tmp_path / "dot"), "--grammar-out", str(tmp_path / "gr"))
    assert (tmp_path / "dot" / "callgraph.dot").read_text().startswith("digraph callgraph")
    assert (tmp_path / "dot" / "icfg.dot").read_text().startswith("digraph icfg")
    dumps = sorted((tmp_path / "gr").iterdir())
    assert dumps and "<S>" in dumps[0].read_text()


def test_multiple_ir_files_are_linked(capsys, tmp_path):
    a = tmp_path / "a.ll"
    b = tmp_path / "b.ll"
    a.write_text("declare void @connect()\ndeclare void @helper()\n"
                 "define i32 @main() {\nentry:\n  call void @connect()\n"
                 "  call void @helper()\n  ret i32 0\n}\n")
    b.write_text("declare void @write_to_server()\ndeclare void @close()\n"
                 "define void @helper() {\nentry:\n  call void @write_to_server()\n"
                 "  call void @close()\n  ret void\n}\n")
    code, out, _ = run_cli(capsys, "--ir", str(a), "--rules", SOCK_RULES)
    assert code == EXIT_VIOLATION
    code, out, _ = run_cli(capsys, "--ir", str(a), str(b), "--rules", SOCK_RULES)
    assert code == EXIT_PASS, out


def test_sensitivity_flag_recorded(capsys):
    _, out, _ = run_cli(capsys, "--ir", ir("id_function"), "--rules", FS_RULES,
                        "--sensitivity", "2", "--context-expansion")
    doc = json.loads(out)
    assert doc["config"]["sensitivity"] == 2
    assert all(v["sensitivity"] == 2 for v in doc["violations"])


def test_subprocess_output_is_byte_identical():
    cmd = [sys.executable, "-m", "callcheck", "analyze", "--ir", ir("branched_funptr_order"),
           "--rules", FS_RULES]
    runs = [subprocess.run(cmd, capture_output=True) for _ in range(3)]
    assert {r.returncode for r in runs} == {EXIT_VIOLATION}
    assert len({r.stdout for r in runs}) == 1 and runs[0].stdout
