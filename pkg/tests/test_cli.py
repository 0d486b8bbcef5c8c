"""Command-line behavior: outputs, exit codes, file round-trips."""

import json

import pytest

from tracepdl.cli import main
from tracepdl.machines import machine_from_json, machine_to_json
from tracepdl.parsing import parse_event_formula
from tracepdl.semantics import equivalent_on
from tracepdl.traces import DistributedAlphabet


@pytest.fixture()
def files(tmp_path):
    alpha = tmp_path / "alpha.txt"
    alpha.write_text("p: a c\nq: b c\n")
    def mk(name, text):
        (tmp_path / name).write_text(text)
        return str(tmp_path / name)
    return str(alpha), mk, tmp_path


def test_eval_sentence_exit_codes_and_output(files, capsys):
    alpha, mk, _ = files
    f = mk("f.txt", "EM_p <<-_p> T\n")
    assert main(["eval", alpha, "a a b", f]) == 0
    assert "EM_p <<-_p> T: true" in capsys.readouterr().out
    assert main(["eval", alpha, "a b", f]) == 1
    assert "false" in capsys.readouterr().out


def test_eval_multiple_formulas_exit_zero(files, capsys):
    alpha, mk, _ = files
    f = mk("f.txt", "EM b\nEM a\n# comment only\n")
    assert main(["eval", alpha, "a b", f]) == 0
    out = capsys.readouterr().out
    assert "EM b: true" in out and "EM a: true" in out


def test_eval_event_mode(files, capsys):
    alpha, mk, _ = files
    f = mk("fe.txt", "<<-_p> T\n")
    assert main(["eval", alpha, "a a b", f, "--event", "1"]) == 0
    assert main(["eval", alpha, "a a b", f, "--event", "0"]) == 1
    capsys.readouterr()


def test_eval_trace_from_file(files, capsys):
    alpha, mk, _ = files
    trace = mk("trace.txt", "a a\nb\n")
    f = mk("f.txt", "EM_q b\n")
    assert main(["eval", alpha, trace, f]) == 0
    capsys.readouterr()


def test_parse_error_exits_2(files, capsys):
    alpha, mk, _ = files
    bad = mk("bad.txt", "EM_p ((\n")
    assert main(["eval", alpha, "a", bad]) == 2
    assert "parse error" in capsys.readouterr().err
    missing_letter = mk("ml.txt", "EM_p zz\n")
    assert main(["eval", alpha, "a", missing_letter]) == 2
    capsys.readouterr()
    assert main(["eval", alpha, "a zz", mk("ok.txt", "EM a\n")]) == 2
    capsys.readouterr()


def test_event_index_out_of_range_exits_2(files, capsys):
    alpha, mk, _ = files
    f = mk("fe.txt", "a\n")
    assert main(["eval", alpha, "a b", f, "--event", "9"]) == 2
    capsys.readouterr()


def test_translate_local_input_echoes(files, capsys):
    alpha, mk, _ = files
    f = mk("loc.txt", "a | !b\n")
    assert main(["translate", alpha, f]) == 0
    out = capsys.readouterr().out
    assert "# constants: none" in out
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines == ["a | !b"]


def test_translate_eliminates_constant_correctly(tmp_path, capsys):
    alpha_file = tmp_path / "solo.txt"
    alpha_file.write_text("s: a b\n")
    f = tmp_path / "y.txt"
    f.write_text("Yleq s s\n")
    assert main(["translate", str(alpha_file), str(f)]) == 0
    out = capsys.readouterr().out
    assert "# constants: Yleq s s" in out
    text = [l for l in out.splitlines() if l and not l.startswith("#")][0]
    alpha = DistributedAlphabet({"s": ("a", "b")})
    produced = parse_event_formula(alpha, text)
    oracle = parse_event_formula(alpha, "<<-_s> T")
    assert equivalent_on(alpha, 4, produced, oracle) is None


def test_translate_process_limit_exits_3(tmp_path, capsys):
    alpha_file = tmp_path / "five.txt"
    alpha_file.write_text("".join(f"p{k}: l{k}\n" for k in range(5)))
    f = tmp_path / "y.txt"
    f.write_text("Yleq p0 p1\n")
    assert main(["translate", str(alpha_file), str(f)]) == 3
    assert "resource limit" in capsys.readouterr().err


def test_compile_event_formula_roundtrip(files, capsys):
    alpha, mk, tmp = files
    f = mk("f.txt", "a | <<-_p> c\n")
    out_file = str(tmp / "machine.json")
    assert main(["compile", alpha, f, "--out", out_file,
                 "--check-bound", "4"]) == 0
    out = capsys.readouterr().out
    assert "sort event" in out
    assert "check ok" in out
    assert "stages " in out and "global_state_count " in out
    blob = open(out_file).read().strip()
    machine = machine_from_json(blob)
    assert machine_to_json(machine) == blob


def test_compile_sentence_and_check(files, capsys):
    alpha, mk, tmp = files
    f = mk("s.txt", "EM_q (b & !<<-_q> T)\n")
    out_file = str(tmp / "m.json")
    assert main(["compile", alpha, f, "--out", out_file,
                 "--check-bound", "4"]) == 0
    out = capsys.readouterr().out
    assert "sort sentence" in out and "check ok" in out


def test_compile_requires_single_formula(files, capsys):
    alpha, mk, tmp = files
    f = mk("two.txt", "a\nb\n")
    assert main(["compile", alpha, f, "--out", str(tmp / "m.json")]) == 2
    capsys.readouterr()


def test_compile_nonlocal_path_exits_2(files, capsys):
    alpha, mk, tmp = files
    f = mk("nl.txt", "<<-_p . <-_q> T\n")
    assert main(["compile", alpha, f, "--out", str(tmp / "m.json")]) == 2
    capsys.readouterr()


def test_gossip_single_process(tmp_path, capsys):
    alpha_file = tmp_path / "solo.txt"
    alpha_file.write_text("s: a b\n")
    out_file = str(tmp_path / "g.json")
    assert main(["gossip", str(alpha_file), "--out", out_file]) == 0
    out = capsys.readouterr().out
    assert "pairs s,s" in out
    machine = machine_from_json(open(out_file).read().strip())
    assert machine.base.n_global >= 1


def test_gossip_node_budget_exits_3(files, capsys):
    alpha, mk, tmp = files
    assert main(["gossip", alpha, "--out", str(tmp / "g.json"),
                 "--node-budget", "10"]) == 3
    assert "resource limit" in capsys.readouterr().err


def test_check_equiv_ok_and_counterexample(files, capsys):
    alpha, mk, _ = files
    f1 = mk("f1.txt", "a\n")
    f2 = mk("f2.txt", "!!a\n")
    assert main(["check-equiv", alpha, f1, f2, "--bound", "3"]) == 0
    assert "ok (" in capsys.readouterr().out
    f3 = mk("f3.txt", "a | c\n")
    assert main(["check-equiv", alpha, f1, f3, "--bound", "3"]) == 1
    out = capsys.readouterr().out
    assert "counterexample" in out


def test_check_equiv_jobs_same_verdict(files, capsys):
    alpha, mk, _ = files
    f1 = mk("f1.txt", "a\n")
    f3 = mk("f3.txt", "a | c\n")
    assert main(["check-equiv", alpha, f1, f3, "--bound", "3",
                 "--jobs", "2"]) == 1
    two = capsys.readouterr().out
    assert main(["check-equiv", alpha, f1, f3, "--bound", "3"]) == 1
    one = capsys.readouterr().out
    assert two.strip().splitlines()[-1] == one.strip().splitlines()[-1]
    f2 = mk("f2.txt", "!!a\n")
    assert main(["check-equiv", alpha, f1, f2, "--bound", "3",
                 "--jobs", "2"]) == 0
    capsys.readouterr()


def test_check_equiv_mixed_sorts_exits_2(files, capsys):
    alpha, mk, _ = files
    f1 = mk("f1.txt", "a\n")
    fs = mk("fs.txt", "EM a\n")
    assert main(["check-equiv", alpha, f1, fs, "--bound", "2"]) == 2
    capsys.readouterr()


def test_seed_is_echoed(files, capsys):
    alpha, mk, _ = files
    f = mk("f.txt", "EM a\n")
    assert main(["--seed", "7", "eval", alpha, "a", f]) == 0
    assert "seed 7" in capsys.readouterr().out
