import json
import subprocess
import sys

import pytest
from conftest import sample_path

from pargraph.cli import main
from pargraph.syntax import parse_document

RULES_ONLY = "rule grow over Env { L { node x [a]; } K { node x [a]; } R { node x [a]; node n; } }\n"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_match_lists_ordinals(capsys):
    code, out, _ = run(capsys, "match", "-g", sample_path("swap"))
    assert code == 0
    lines = out.splitlines()
    assert [line.split("\t")[0] for line in lines] == ["0", "1"]
    assert lines[0].split("\t")[1].startswith("r1[")


def test_check_text(capsys):
    code, out, err = run(capsys, "check", "-g", sample_path("constant_fn"))
    assert code == 1 and "regular, coherent" in err
    assert "parindep: true" in out and "regular: false" in out
    assert "witness:" in out


def test_check_json(capsys):
    code, out, _ = run(capsys, "check", "-g", sample_path("recovery"), "--format", "json")
    data = json.loads(out)
    assert code == 1
    assert data["properties"] == {"parindep": False, "seqindep": False, "regular": False,
                                  "coherent": True, "edp": True}
    assert data["recovered"] == {"x": ["0"]}
    assert set(data) >= {"matchings", "witnesses", "deleted"}


def test_check_selected_properties_and_subset(capsys):
    code, out, _ = run(capsys, "check", "-g", sample_path("three_rules"), "-m", "0,2", "--props", "edp")
    assert code == 1 and "edp: false" in out
    code, out, _ = run(capsys, "check", "-g", sample_path("three_rules"), "--props", "edp")
    assert code == 0 and "parindep" not in out


def test_check_undecided_sequential_independence(capsys, tmp_path):
    from pargraph.eca import eca_document

    f = tmp_path / "eca.pg"
    f.write_text(eca_document(30, 7, None))
    code, out, err = run(capsys, "check", "-g", str(f), "--props", "seqindep")
    assert code == 1 and "not decided" in err
    code, out, err = run(capsys, "check", "-g", str(f), "--props", "edp")
    assert code == 0


def test_apply_writes_a_reparseable_document(capsys, tmp_path):
    out_file = tmp_path / "h.pg"
    code, _, _ = run(capsys, "apply", "-g", sample_path("swap"), "-o", str(out_file))
    assert code == 0
    H = parse_document(out_file.read_text()).graphs["G"]
    assert {str(v) for v in H.attr("x")} == {"a", "-1"}


def test_apply_to_stdout(capsys):
    code, out, _ = run(capsys, "apply", "-g", sample_path("swap"), "-m", "0")
    assert code == 0 and "graph G over Z" in out


def test_apply_refuses_attribute_survival(capsys, tmp_path):
    out_file = tmp_path / "h.pg"
    code, _, err = run(capsys, "apply", "-g", sample_path("three_rules"), "-m", "0,2", "-o", str(out_file))
    assert code == 1 and "attributes of x: 0" in err
    assert not out_file.exists()


def test_separate_rules_file(capsys, tmp_path):
    rules = tmp_path / "rules.pg"
    rules.write_text(RULES_ONLY)
    code, out, _ = run(capsys, "match", "-g", sample_path("swap"), "-r", str(rules))
    assert code == 0 and len(out.splitlines()) == 1 and "grow[" in out
    code, out, _ = run(capsys, "apply", "-g", sample_path("swap"), "-r", str(rules))
    assert code == 0 and "node n@grow#0;" in out


def test_run_iterates_and_stops(capsys):
    code, out, err = run(capsys, "run", "-g", sample_path("swap"), "--steps", "2")
    assert code == 0
    # two swaps restore the original graph
    assert parse_document(out).graphs["G"] == parse_document(open(sample_path("swap")).read()).graphs["G"]


def test_run_reports_refusal(capsys):
    code, out, err = run(capsys, "run", "-g", sample_path("conflict"), "--steps", "3")
    assert code == 1 and "step 1 refused" in err and "node y" in err
    assert "graph G" in out


def test_run_stops_without_matchings(capsys, tmp_path):
    f = tmp_path / "shrink.pg"
    f.write_text("signature E { } algebra A over E { } graph G over A { node x; }"
                 " rule r over E { L { node p; } K { } R { } }")
    code, out, err = run(capsys, "run", "-g", str(f), "--steps", "4")
    assert code == 0 and "no matchings after 1 step(s)" in err
    assert parse_document(out).graphs["G"].items == set()


def test_eca(capsys):
    code, out, err = run(capsys, "eca", "--rule", "90", "--width", "7", "--steps", "2", "--check-oracle")
    assert code == 0
    assert out.split() == ["0001000", "0010100", "0100010"]
    assert "agree" in err
    code, out, _ = run(capsys, "eca", "--rule", "110", "--width", "5", "--steps", "1", "--init", "00110")
    assert out.split() == ["00110", "01110"]


@pytest.mark.parametrize("argv, fragment", [
    (["match", "-g", "/nonexistent/file.pg"], "cannot read"),
    (["check", "-g", "SAMPLE", "-m", "0,x"], "ordinals"),
    (["check", "-g", "SAMPLE", "-m", "7"], "no matching with ordinal 7"),
    (["check", "-g", "SAMPLE", "--props", "bogus"], "bogus"),
    (["match", "-g", "SAMPLE", "--graph", "H"], "no graph named 'H'"),
    (["eca", "--rule", "90", "--width", "2", "--steps", "1"], "width"),
    (["eca", "--rule", "256", "--width", "5", "--steps", "1"], "rule"),
    (["eca", "--rule", "90", "--width", "5", "--steps", "1", "--init", "01"], "5"),
    (["eca", "--rule", "90", "--width", "5", "--steps", "-1"], "non-negative"),
    (["apply"], "required"),
    (["frobnicate"], "invalid choice"),
])
def test_failures_exit_nonzero_with_a_diagnostic(capsys, argv, fragment):
    argv = [sample_path("swap") if a == "SAMPLE" else a for a in argv]
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert fragment in err and not out


def test_parse_error_is_reported_with_position(capsys, tmp_path):
    bad = tmp_path / "bad.pg"
    bad.write_text("signature S {\n  sort s\n}\n")
    code, out, err = run(capsys, "match", "-g", str(bad))
    assert code == 2 and f"{bad}:3:1: error:" in err and not out


def test_several_graphs_need_a_name(capsys, tmp_path):
    two = tmp_path / "two.pg"
    two.write_text("signature E { } algebra A over E { } graph G over A { node x; } graph H over A { }")
    code, _, err = run(capsys, "match", "-g", str(two))
    assert code == 2 and "use --graph" in err
    code, out, _ = run(capsys, "match", "-g", str(two), "--graph", "H")
    assert code == 0 and out == ""


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "apply", "-g", sample_path("swap"), "-o", str(tmp_path / "no" / "such" / "dir"))
    assert code == 2 and "cannot write" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pargraph", "match", "-g", sample_path("conflict")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and len(proc.stdout.splitlines()) == 2
    proc = subprocess.run([sys.executable, "-m", "pargraph", "apply", "-g", sample_path("conflict")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 1 and "effective deletion" in proc.stderr
