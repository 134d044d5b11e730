"""CLI contract: exit codes, schemas, equality with the library."""

from __future__ import annotations

import json
import subprocess
import sys
from importlib import resources

import jsonschema

from infradep import (
    eliminate_vanishing,
    label_probability,
    mean_time_to_absorption,
    steady_state,
)
from infradep.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def load_schema(name):
    path = resources.files("infradep") / "schemas" / name
    return json.loads(path.read_text())


def test_list_models_text(capsys):
    code, out, _ = run(capsys, "list-models")
    assert code == 0
    lines = [l for l in out.splitlines() if l.strip()]
    assert len(lines) == 4
    assert lines[0].startswith("accidental")


def test_list_models_json_schema(capsys):
    code, out, _ = run(capsys, "list-models", "--format", "json")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, load_schema("models.schema.json"))
    assert [e["name"] for e in data] == [
        "accidental", "cascading-only", "common-cause", "attack",
    ]


def test_unknown_flag_is_usage(capsys):
    code, _, _ = run(capsys, "list-models", "--bogus")
    assert code == 64


def test_unknown_model_is_usage(capsys):
    code, _, err = run(capsys, "graph", "--model", "nosuch")
    assert code == 64
    assert "nosuch" in err


def test_missing_command_is_usage(capsys):
    assert run(capsys)[0] == 64


def test_graph_dot_output(capsys, graphs):
    code, out, _ = run(capsys, "graph", "--model", "cascading-only")
    assert code == 0
    from .dot_checker import check_dot

    dot = check_dot(out)
    # The normal-operation state exists and something flows into it.
    g = graphs["cascading-only"]
    from infradep import label_sets

    s1 = next(iter(label_sets(g)["state1"]))
    assert f"s{s1}" in dot.nodes
    assert any(dst == f"s{s1}" for _, dst, _ in dot.edges)


def test_graph_summary_schema_and_reduction(capsys, graphs):
    code, out, _ = run(capsys, "graph", "--model", "accidental",
                       "--hide-vanishing", "--summary")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, load_schema("graph-summary.schema.json"))
    c = eliminate_vanishing(graphs["accidental"])
    assert data["states"] == c.n
    assert data["vanishing"] == 0


def test_graph_out_file(capsys, tmp_path):
    target = tmp_path / "g.dot"
    code, out, _ = run(capsys, "graph", "--model", "accidental", "--out", str(target))
    assert code == 0
    assert target.read_text().startswith("digraph accidental")


def test_validate_claims_all_builtins(capsys):
    for name in ("accidental", "cascading-only", "common-cause", "attack"):
        code, out, _ = run(capsys, "validate", "--model", name, "--claims")
        assert code == 0
        assert "FAIL" not in out


def test_validate_bad_builtin_param_exit1(capsys):
    code, _, err = run(capsys, "validate", "--model", "accidental", "--set", "rho=0")
    assert code == 1
    assert "INVALID_PARAM" in err


def test_failing_claims_exit1(capsys, tmp_path):
    # Strip the severity-escalation transition: the blackout-path claim
    # must fail for a model presenting itself as the one-way variant.
    from dataclasses import replace

    from infradep import cascading_only_model, serialize_model

    m = cascading_only_model()
    mutant = replace(
        m,
        transitions=tuple(t for t in m.transitions if t.name != "e_failure_escal_sev"),
    )
    f = tmp_path / "mutant.gsts"
    f.write_text(serialize_model(mutant))
    code, out, _ = run(capsys, "validate", "--model", str(f), "--claims")
    assert code == 1
    assert "FAIL" in out


def test_graph_format_json_gives_summary(capsys):
    code, out, _ = run(capsys, "graph", "--model", "accidental", "--format", "json")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, load_schema("graph-summary.schema.json"))


def test_solve_transient_at_time(capsys, ctmcs):
    from infradep import transient

    code, out, _ = run(capsys, "solve", "--model", "accidental", "--measure",
                       "transient", "--time", "2.5", "--format", "json")
    assert code == 0
    c = ctmcs["accidental"]
    dist = transient(c, 2.5)
    expected = label_probability(dist, c.label_sets["state2"]).value
    got = next(d for d in json.loads(out) if d["name"] == "p[state2]")
    assert got["value"] == expected
    assert got["metadata"]["time"] == 2.5


def test_parse_error_exit2(capsys, tmp_path):
    bad = tmp_path / "bad.gsts"
    bad.write_text("model broken { var x {a} init a; }")
    code, _, err = run(capsys, "graph", "--model", str(bad))
    assert code == 2
    assert "bad.gsts:" in err


def test_validation_findings_in_file_exit2(capsys, tmp_path):
    f = tmp_path / "overflow.gsts"
    f.write_text(
        "model m { var n : [0..2] init 0; "
        "timed t rate 1.0 when n >= 0 -> { n := n + 1; }; }"
    )
    code, _, err = run(capsys, "validate", "--model", str(f))
    assert code == 2
    assert "OUT_OF_DOMAIN_UPDATE" in err


def test_not_ergodic_exit3(capsys, tmp_path):
    f = tmp_path / "split.gsts"
    f.write_text(
        "model split { var x : [0..2] init 0; "
        "timed a rate 1.0 when x == 0 -> { x := 1; }; "
        "timed b rate 1.0 when x == 0 -> { x := 2; }; }"
    )
    code, _, err = run(capsys, "solve", "--model", str(f), "--measure", "steady")
    assert code == 3
    assert "NOT_ERGODIC" in err


def test_unreachable_target_exit3(capsys):
    code, _, err = run(capsys, "solve", "--model", "cascading-only",
                       "--measure", "mtta", "--target", "info == i_weakened")
    assert code == 3
    assert "UNREACHABLE_TARGET" in err


def test_state_limit_exit4(capsys, monkeypatch):
    monkeypatch.setenv("INFRADEP_STATE_LIMIT", "3")
    code, _, err = run(capsys, "graph", "--model", "accidental")
    assert code == 4
    assert "STATE_LIMIT" in err


def test_reps_below_two_is_usage(capsys):
    code, _, _ = run(capsys, "simulate", "--model", "accidental",
                     "--occupancy", "state1", "--reps", "1")
    assert code == 64


def test_solve_results_schema(capsys):
    code, out, _ = run(capsys, "solve", "--model", "common-cause",
                       "--measure", "steady", "--format", "json")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, load_schema("results.schema.json"))
    p8 = next(d for d in data if d["name"] == "p[state8]")
    assert 0 < p8["value"] < 1


def test_solve_steady_with_label_prob_filter(capsys):
    code, out, _ = run(capsys, "solve", "--model", "common-cause",
                       "--measure", "steady", "--label-prob", "state8",
                       "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [d["name"] for d in data] == ["p[state8]"]
    assert 0 < data[0]["value"] < 1


def test_cli_mtta_equals_library(capsys, ctmcs):
    code, out, _ = run(capsys, "solve", "--model", "accidental", "--measure", "mtta",
                       "--target", "elec == e_lost", "--format", "json")
    assert code == 0
    c = ctmcs["accidental"]
    vi = c.model.var_index["elec"]
    target = frozenset(i for i, s in enumerate(c.states) if s[vi] == "e_lost")
    expected = mean_time_to_absorption(c, target).value
    assert json.loads(out)[0]["value"] == expected  # bit-for-bit


def test_cli_steady_equals_library(capsys, ctmcs):
    code, out, _ = run(capsys, "solve", "--model", "accidental",
                       "--measure", "label-prob", "--label", "state1",
                       "--format", "json")
    assert code == 0
    c = ctmcs["accidental"]
    expected = label_probability(steady_state(c), c.label_sets["state1"]).value
    assert json.loads(out)[0]["value"] == expected


def test_transient_needs_time(capsys):
    code, _, _ = run(capsys, "solve", "--model", "accidental", "--measure", "transient")
    assert code == 64


def test_set_overrides_parameter(capsys):
    code1, out1, _ = run(capsys, "solve", "--model", "accidental",
                         "--measure", "mtta", "--target", "elec == e_lost",
                         "--format", "json")
    code2, out2, _ = run(capsys, "solve", "--model", "accidental",
                         "--measure", "mtta", "--target", "elec == e_lost",
                         "--set", "lambda_e=0.002", "--format", "json")
    assert code1 == code2 == 0
    assert json.loads(out2)[0]["value"] > json.loads(out1)[0]["value"]


def test_set_unknown_parameter_is_usage(capsys):
    code, _, _ = run(capsys, "solve", "--model", "accidental",
                     "--measure", "steady", "--set", "nope=1")
    assert code == 64


def test_set_k_max_changes_structure(capsys):
    code, out, _ = run(capsys, "graph", "--model", "accidental", "--summary",
                       "--set", "k_max=3")
    assert code == 0
    base = json.loads(run(capsys, "graph", "--model", "accidental", "--summary")[1])
    assert json.loads(out)["states"] > base["states"]


def test_simulate_identical_invocations_identical_bytes(tmp_path):
    cmd = [
        sys.executable, "-m", "infradep", "simulate", "--model", "accidental",
        "--occupancy", "state1", "--horizon", "200", "--reps", "5",
        "--seed", "7", "--format", "json",
    ]
    a = subprocess.run(cmd, capture_output=True, cwd="/")
    b = subprocess.run(cmd, capture_output=True, cwd="/")
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


def test_simulate_results_schema_and_ci(capsys):
    code, out, _ = run(capsys, "simulate", "--model", "accidental",
                       "--occupancy", "state1", "--horizon", "300",
                       "--reps", "8", "--seed", "3", "--format", "json")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, load_schema("results.schema.json"))
    assert data[0]["method"] == "simulation"
    assert data[0]["ci_halfwidth"] >= 0


def test_simulate_trace_dir(capsys, tmp_path):
    tdir = tmp_path / "traces"
    code, _, _ = run(capsys, "simulate", "--model", "accidental",
                     "--occupancy", "state1", "--horizon", "100",
                     "--reps", "3", "--seed", "5", "--trace-dir", str(tdir))
    assert code == 0
    files = sorted(p.name for p in tdir.iterdir())
    assert files == ["rep_0000.csv", "rep_0001.csv", "rep_0002.csv"]
    line = (tdir / "rep_0000.csv").read_text().splitlines()[0]
    assert line.count(",") >= 3  # time, transition, three assignments


def test_fmt_canonicalizes(capsys, tmp_path):
    f = tmp_path / "messy.gsts"
    f.write_text(
        "model m {  var x :   {a,b} init a;\n"
        "timed t rate 1.0 when x==a -> {x:=b;};}"
    )
    code, out, _ = run(capsys, "fmt", str(f))
    assert code == 0
    assert out.startswith("model m {")
    # In-place formatting is idempotent.
    code, _, _ = run(capsys, "fmt", str(f), "--in-place")
    assert code == 0
    assert f.read_text() == out
    code, out2, _ = run(capsys, "fmt", str(f))
    assert out2 == out


def test_fmt_shipped_models_are_canonical(capsys):
    import pathlib

    for p in sorted((pathlib.Path(__file__).parent.parent / "models").glob("*.gsts")):
        code, out, _ = run(capsys, "fmt", str(p))
        assert code == 0
        assert out == p.read_text(encoding="utf-8")


def test_solve_from_gsts_file_matches_builtin(capsys):
    import pathlib

    path = pathlib.Path(__file__).parent.parent / "models" / "accidental.gsts"
    _, from_file, _ = run(capsys, "solve", "--model", str(path),
                          "--measure", "label-prob", "--label", "state1",
                          "--format", "json")
    _, from_builtin, _ = run(capsys, "solve", "--model", "accidental",
                             "--measure", "label-prob", "--label", "state1",
                             "--format", "json")
    assert json.loads(from_file)[0]["value"] == json.loads(from_builtin)[0]["value"]
