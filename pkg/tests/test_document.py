"""Literate document processing and LaTeX rendering."""

import os

import pytest

from pie.document import (
    ConfigDefault, Directive, DocumentError, LatexFragment,
    MacroDefStatement, ProcessingContext, load_document, process_document,
    process_file, run_directive,
)
from pie.syntax import ParseError

FIXTURE = os.path.join(os.path.dirname(__file__), "..", "fixtures",
                       "workbench.pie")


# ---------------------------------------------------------------------------
# Scanning and loading

def test_statement_scanner_splits_on_period_whitespace():
    # a period terminates only when followed by whitespace or EOF, so
    # periods inside quoted atoms do not split the statement
    doc, _ = load_document("def(kb) :: p(a), q('b.c').\n")
    (item,) = doc.items
    assert isinstance(item, MacroDefStatement)


def test_fragments_pass_through():
    doc, _ = load_document("/* \\emph{prose} */\ndef(m) :: p.\n")
    assert isinstance(doc.items[0], LatexFragment)
    assert doc.items[0].text.strip() == "\\emph{prose}"


def test_line_comments_ignored():
    doc, _ = load_document("% a comment\ndef(m) :: p.  % trailing\n")
    assert len(doc.items) == 1


def test_unterminated_statement_rejected():
    with pytest.raises(DocumentError):
        load_document("def(m) :: p")


def test_unknown_statement_rejected():
    with pytest.raises(DocumentError):
        load_document("frobnicate(m).\n")


def test_unknown_directive_rejected():
    with pytest.raises(ParseError):
        load_document(":- ppl_frobnicate(p).\n")


def test_directive_with_options():
    doc, _ = load_document(
        ":- ppl_printtime(ppl_elim(ex2(p, p(a)), "
        "[simp_result=[c6], timeout_ms=1000])).\n")
    (d,) = doc.items
    assert isinstance(d, Directive)
    assert d.kind == "elim"
    assert d.options == {"simp_result": ["c6"], "timeout_ms": 1000}


def test_ip_dotgraph_wrapper_unwraps(tmp_path):
    doc, _ = load_document(
        ":- ppl_printtime(ppl_ipol((p, q -> (p ; r)), "
        "[ip_dotgraph=printstyle('/tmp/g.dot')])).\n")
    (d,) = doc.items
    assert d.options == {"ip_dotgraph": "/tmp/g.dot"}


def test_ppl_default():
    doc, _ = load_document(":- ppl_default(timeout_ms=1234).\n")
    (d,) = doc.items
    assert isinstance(d, ConfigDefault)
    assert (d.key, d.value) == ("timeout_ms", 1234)


# ---------------------------------------------------------------------------
# Directive execution

def run_one(src, **defaults):
    doc, table = load_document(src)
    pctx = ProcessingContext(table)
    pctx.defaults.update(defaults)
    results = [run_directive(item, pctx) for item in doc.items
               if isinstance(item, Directive)]
    return results[-1], pctx


def test_valid_directive_renders_verdict():
    r, _ = run_one(":- ppl_printtime(ppl_valid((p ; ~p))).\n")
    assert r.status == "ok"
    assert "is valid" in r.text


def test_invalid_directive_renders_verdict():
    r, _ = run_one(":- ppl_printtime(ppl_valid(p)).\n")
    assert r.status == "failed"
    assert "is not valid" in r.text


def test_elim_directive_stores_last_result():
    src = (":- ppl_printtime(ppl_elim(ex2(p, (p, (p -> q(a)))))).\n"
           "def(prev) :: Prev ::- last_ppl_result(Prev).\n"
           ":- ppl_printtime(ppl_valid((prev <-> q(a)))).\n")
    r, _ = run_one(src)
    assert r.status == "ok", r.detail
    assert "is valid" in r.text


def test_result_binding_via_r_option():
    src = (":- ppl_printtime(ppl_elim(ex2(p, (p, (p -> q(a)))), [r=h1])).\n")
    r, pctx = run_one(src)
    assert r.status == "ok"
    assert "h1" in pctx.results


def test_printing_false_suppresses_output():
    r, _ = run_one(
        ":- ppl_printtime(ppl_valid((p ; ~p), [printing=false])).\n")
    assert r.status == "ok"
    assert r.text == ""


def test_directive_failure_is_reported_not_raised():
    r, _ = run_one(":- ppl_printtime(ppl_ipol(p)).\n")
    assert r.status == "failed"
    assert "interpolation needs" in r.text


def test_timeout_option_flows_into_elim():
    r, _ = run_one(
        ":- ppl_printtime(ppl_elim(ex2(p, (p ; q)), [timeout_ms=1])).\n")
    assert r.status in ("ok", "failed")


# ---------------------------------------------------------------------------
# Full document processing

def test_defaults_apply_in_document_order():
    src = (":- ppl_default(printing=false).\n"
           ":- ppl_printtime(ppl_valid((p ; ~p))).\n")
    doc, table = load_document(src)
    out = process_document(doc, table=table)
    assert "is valid" not in out


def test_fixture_document_is_deterministic():
    out1 = process_file(FIXTURE)
    out2 = process_file(FIXTURE)
    assert out1 == out2


def test_fixture_document_content():
    out = process_file(FIXTURE)
    assert "Result of elimination" in out
    assert "Result of interpolation" in out
    assert "is valid" in out
    assert "\\section{" in out


def test_env_timeout_respected(monkeypatch):
    monkeypatch.setenv("PIE_TIMEOUT_MS", "1234")
    from pie.document import system_defaults
    assert system_defaults()["timeout_ms"] == 1234
