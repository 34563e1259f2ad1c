"""Command-line interface: exit codes and output shapes."""

import os

from pie.cli import main

FIXTURE = os.path.join(os.path.dirname(__file__), "..", "fixtures",
                       "workbench.pie")


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_valid_exit_codes(capsys):
    code, out, _ = run(capsys, "valid", "p ; ~p")
    assert code == 0 and out.strip() == "valid"
    code, out, _ = run(capsys, "valid", "p -> q")
    assert code == 1 and out.startswith("not valid")
    assert "domain size" in out


def test_parse_error_is_usage_error(capsys):
    code, _, err = run(capsys, "valid", "p ->")
    assert code == 2 and "error:" in err


def test_elim(capsys):
    code, out, _ = run(capsys, "elim", "ex2(p, (p, (p -> q(a))))")
    assert code == 0 and out.strip() == "q(a)"


def test_elim_nonreducible_exit(capsys):
    code, _, err = run(capsys, "elim",
                       "ex2(p, all([x,y], ((p(x), r(x,y)) -> p(y))))")
    assert code in (0, 1)


def test_ipol(capsys):
    code, out, _ = run(capsys, "ipol", "(p, q -> (p ; r))")
    assert code == 0 and out.strip() == "p"


def test_ipol_needs_implication(capsys):
    code, _, err = run(capsys, "ipol", "p")
    assert code == 2


def test_ipol_dot(capsys, tmp_path):
    dot = tmp_path / "t.dot"
    code, out, _ = run(capsys, "ipol",
                       "(all(x, p(x)), all(x, (p(x) -> q(x))) -> q(c))",
                       "--no-simp-sides", "--dot", str(dot))
    assert code == 0
    assert out.strip() == "all(x, q(x))"
    assert dot.read_text().startswith("digraph")


def test_tptp_and_dimacs(capsys):
    code, out, _ = run(capsys, "tptp", "all(x, p(x))", "--name", "ax")
    assert code == 0 and out == "fof(ax, axiom, (! [X] : p(X))).\n"
    code, out, _ = run(capsys, "dimacs", "(p ; q), (~p ; r)")
    assert code == 0 and out.startswith("p cnf ")


def test_expand_with_doc(capsys):
    code, out, _ = run(capsys, "expand", "kb2", "--doc", FIXTURE)
    assert code == 0 and "all(x" in out


def test_process_writes_output(capsys, tmp_path):
    target = tmp_path / "out.tex"
    code, out, _ = run(capsys, "process", FIXTURE, "-o", str(target))
    assert code == 0
    assert "Result of interpolation" in target.read_text()


def test_missing_file_is_usage_error(capsys):
    code, _, err = run(capsys, "process", "/nonexistent/x.pie")
    assert code == 2


def test_bad_subcommand(capsys):
    assert main(["frobnicate"]) == 2


def test_env_timeout(capsys, monkeypatch):
    monkeypatch.setenv("PIE_TIMEOUT_MS", "50")
    code, out, _ = run(capsys, "valid", "p ; ~p")
    assert code == 0
