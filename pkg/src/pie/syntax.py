"""Textual formula syntax: parser, text/LaTeX printers, TPTP and
(Q)DIMACS emitters.

Operator precedences, loosest to tightest: '<->', '->', ';', ',', '~'.
'->' and '<->' are right-associative; ',' and ';' collect into n-ary
And/Or.  Identifiers starting lowercase (or digits) are constants,
functions and predicates; capitalized identifiers are macro parameters.
Names bound by all/ex/lambda become variables within their scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .formula import (
    And, Atom, Eq, Exists, Exists2, FALSE, Falsity, Fn, ForAll, ForAll2,
    Formula, Iff, Implies, Lambda, LambdaApp, MacroCall, Not, Or, PredSpec,
    TRUE, Term, Truth, Var, beta_reduce,
)


@dataclass(frozen=True)
class SourcePosition:
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}"


class ParseError(Exception):
    def __init__(self, message, pos: SourcePosition):
        super().__init__(f"{message} at {pos}")
        self.message = message
        self.pos = pos


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<name>[a-zA-Z_][a-zA-Z0-9_]*|\d+)
  | (?P<quoted>'[^']*')
  | (?P<op>::-|::|:-|<->|->|\\=|[()\[\],;~=./\-])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str  # 'name' | 'op' | 'quoted' | 'end'
    text: str
    pos: SourcePosition


def tokenize(src: str):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        m = _TOKEN_RE.match(src, i)
        if not m:
            raise ParseError(f"unexpected character {src[i]!r}",
                             SourcePosition(line, col))
        text = m.group(0)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, text, SourcePosition(line, col)))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        i = m.end()
    tokens.append(Token("end", "", SourcePosition(line, col)))
    return tokens


class Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.i = 0

    # -- token plumbing

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at(self, text) -> bool:
        t = self.peek()
        return t.kind == "op" and t.text == text

    def expect(self, text) -> Token:
        t = self.next()
        if t.kind == "end" or not (t.kind == "op" and t.text == text):
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.pos)
        return t

    def error(self, msg):
        raise ParseError(msg, self.peek().pos)

    # -- formula grammar

    def parse_formula(self, env=frozenset()) -> Formula:
        f = self.parse_iff(env)
        return f

    def parse_iff(self, env):
        lhs = self.parse_impl(env)
        if self.at("<->"):
            self.next()
            return Iff(lhs, self.parse_iff(env))
        return lhs

    def parse_impl(self, env):
        lhs = self.parse_disj(env)
        if self.at("->"):
            self.next()
            return Implies(lhs, self.parse_impl(env))
        return lhs

    def parse_disj(self, env):
        parts = [self.parse_conj(env)]
        while self.at(";"):
            self.next()
            parts.append(self.parse_conj(env))
        if len(parts) == 1:
            return parts[0]
        out = []
        for p in parts:
            out.extend(p.args if isinstance(p, Or) else (p,))
        return Or(tuple(out))

    def parse_conj(self, env):
        parts = [self.parse_neg(env)]
        while self.at(","):
            self.next()
            parts.append(self.parse_neg(env))
        if len(parts) == 1:
            return parts[0]
        out = []
        for p in parts:
            out.extend(p.args if isinstance(p, And) else (p,))
        return And(tuple(out))

    def parse_neg(self, env):
        if self.at("~"):
            self.next()
            return Not(self.parse_neg(env))
        return self.parse_primary(env)

    def parse_primary(self, env) -> Formula:
        t = self.peek()
        if t.kind == "op" and t.text == "(":
            self.next()
            f = self.parse_formula(env)
            self.expect(")")
            return self._maybe_eq(f, env)
        if t.kind != "name" and t.kind != "quoted":
            self.error(f"expected a formula, found {t.text!r}"
                       if t.kind != "end" else "unexpected end of input")
        name = self.next().text
        if name == "true" and not self.at("("):
            return TRUE
        if name == "false" and not self.at("("):
            return FALSE
        if name in ("all", "ex") and self.at("("):
            self.next()
            vars_ = self.parse_name_list()
            self.expect(",")
            body = self.parse_formula(env | set(vars_))
            self.expect(")")
            cls = ForAll if name == "all" else Exists
            return cls(tuple(vars_), body)
        if name in ("all2", "ex2") and self.at("("):
            self.next()
            preds = tuple(PredSpec(n) for n in self.parse_name_list())
            self.expect(",")
            body = self.parse_formula(env)
            self.expect(")")
            cls = ForAll2 if name == "all2" else Exists2
            return cls(preds, body)
        if name == "lambda" and self.at("("):
            self.next()
            params = self.parse_name_list()
            self.expect(",")
            body = self.parse_formula(env | set(params))
            self.expect(")")
            return Lambda(tuple(params), body)
        # plain atom / term head / macro call
        if self.at("("):
            self.next()
            args = [self.parse_arg(env)]
            while self.at(","):
                self.next()
                args.append(self.parse_arg(env))
            self.expect(")")
            terms = _coerce_terms(args)
            if terms is not None:
                return self._maybe_eq_atom(name, terms, env)
            return MacroCall(name, tuple(args))
        return self._maybe_eq_atom(name, (), env)

    def _maybe_eq_atom(self, name, args, env):
        term = Var(name) if (name in env and not args) else Fn(name, tuple(args))
        if self.at("="):
            self.next()
            rhs = self.parse_term(env)
            return Eq(term, rhs)
        if self.at("\\="):
            self.next()
            rhs = self.parse_term(env)
            return Not(Eq(term, rhs))
        if isinstance(term, Var):
            # a bound variable standing alone cannot be an atom
            self.error(f"variable {name!r} used as a formula")
        return Atom(name, tuple(args))

    def _maybe_eq(self, f, env):
        if self.at("=") or self.at("\\="):
            t = _formula_to_term(f)
            if t is None:
                self.error("left side of '=' is not a term")
            negated = self.at("\\=")
            self.next()
            rhs = self.parse_term(env)
            eq = Eq(t, rhs)
            return Not(eq) if negated else eq
        return f

    def parse_arg(self, env):
        """One argument of a compound: a bracketed list or a formula at
        argument precedence (no top-level ','/';'/'->').  Infix '/' and
        '-' are accepted for spec terms like p/1-n."""
        if self.at("["):
            return tuple(self.parse_bracket_list(env))
        t = self.peek()
        if t.kind == "name" and t.text in env:
            la = self.tokens[self.i + 1]
            if not (la.kind == "op" and la.text == "("):
                self.next()
                if self.at("=") or self.at("\\="):
                    negated = self.at("\\=")
                    self.next()
                    rhs = self.parse_term(env)
                    eq = Eq(Var(t.text), rhs)
                    return Not(eq) if negated else eq
                item = Var(t.text)
                while self.at("/") or self.at("-"):
                    op = self.next().text
                    rhs = self.parse_neg(env)
                    rt = _formula_to_term(rhs) if isinstance(rhs, Formula) \
                        else rhs
                    if rt is None:
                        self.error(f"bad operand for {op!r}")
                    item = Fn(op, (item, rt))
                return item
        item = self.parse_neg(env)
        while self.at("/") or self.at("-"):
            op = self.next().text
            rhs = self.parse_neg(env)
            lt = _formula_to_term(item) if isinstance(item, Formula) else item
            rt = _formula_to_term(rhs) if isinstance(rhs, Formula) else rhs
            if lt is None or rt is None:
                self.error(f"bad operand for {op!r}")
            item = Fn(op, (lt, rt))
        return item

    def parse_bracket_list(self, env):
        self.expect("[")
        items = []
        if not self.at("]"):
            items.append(self.parse_arg(env))
            while self.at(","):
                self.next()
                items.append(self.parse_arg(env))
        self.expect("]")
        return items

    def parse_name_list(self):
        if self.at("["):
            self.next()
            names = []
            if not self.at("]"):
                names.append(self._name())
                while self.at(","):
                    self.next()
                    names.append(self._name())
            self.expect("]")
            return names
        return [self._name()]

    def _name(self):
        t = self.next()
        if t.kind not in ("name", "quoted"):
            raise ParseError(f"expected a name, found {t.text!r}", t.pos)
        return t.text.strip("'") if t.kind == "quoted" else t.text

    def parse_term(self, env) -> Term:
        t = self.peek()
        if t.kind == "op" and t.text == "(":
            self.next()
            inner = self.parse_term(env)
            self.expect(")")
            return inner
        if t.kind != "name":
            self.error(f"expected a term, found {t.text!r}")
        name = self.next().text
        if self.at("("):
            self.next()
            args = [self.parse_term(env)]
            while self.at(","):
                self.next()
                args.append(self.parse_term(env))
            self.expect(")")
            return Fn(name, tuple(args))
        if name in env:
            return Var(name)
        return Fn(name)

    def check_end(self):
        t = self.peek()
        if t.kind != "end":
            self.error(f"unexpected {t.text!r} after formula")


def _formula_to_term(f):
    """View a formula parsed as an atom back as a term, if possible."""
    if isinstance(f, Atom):
        return Fn(f.pred, f.args)
    return None


def _coerce_terms(args):
    """If every parsed argument reads as a term, return the term tuple."""
    out = []
    for a in args:
        if isinstance(a, Term):
            out.append(a)
        elif isinstance(a, Atom):
            t = _atom_to_term(a)
            if t is None:
                return None
            out.append(t)
        else:
            return None
    return tuple(out)


def _atom_to_term(a):
    # arguments of atoms are already terms by construction
    return Fn(a.pred, a.args)


def parse_formula(src: str) -> Formula:
    p = Parser(src)
    f = p.parse_formula()
    p.check_end()
    _check_arities(f)
    return f


def parse_term(src: str) -> Term:
    p = Parser(src)
    t = p.parse_term(frozenset())
    p.check_end()
    return t


def _check_arities(f):
    from .formula import predicate_arities
    for name, arities in predicate_arities(f).items():
        if len(arities) > 1 and not name[0].isupper():
            raise ParseError(
                f"symbol {name!r} used with several arities "
                f"{sorted(arities)}", SourcePosition(1, 1))


# ---------------------------------------------------------------------------
# Text printing

@dataclass(frozen=True)
class PrintOptions:
    style: str = "text"          # 'text' | 'latex'
    compact: bool = False
    symbol_conversion: bool = True


# precedence levels; lower binds looser
_P_IFF, _P_IMPL, _P_OR, _P_AND, _P_NEG, _P_PRIM = range(6)


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.functor
    return f"{t.functor}({','.join(print_term(a) for a in t.args)})"


def _txt(f, level) -> str:
    def wrap(s, mylevel):
        return f"({s})" if mylevel < level else s

    if isinstance(f, Truth):
        return "true"
    if isinstance(f, Falsity):
        return "false"
    if isinstance(f, Atom):
        return print_term(Fn(f.pred, f.args))
    if isinstance(f, Eq):
        return f"{print_term(f.lhs)}={print_term(f.rhs)}"
    if isinstance(f, Not):
        return f"~{_txt(f.arg, _P_NEG)}"
    if isinstance(f, And):
        return wrap(", ".join(_txt(a, _P_NEG) for a in f.args), _P_AND)
    if isinstance(f, Or):
        return wrap("; ".join(_txt(a, _P_AND) for a in f.args), _P_OR)
    if isinstance(f, Implies):
        return wrap(f"{_txt(f.lhs, _P_OR)}->{_txt(f.rhs, _P_IMPL)}", _P_IMPL)
    if isinstance(f, Iff):
        return wrap(f"{_txt(f.lhs, _P_IMPL)}<->{_txt(f.rhs, _P_IFF)}", _P_IFF)
    if isinstance(f, (ForAll, Exists)):
        kw = "all" if isinstance(f, ForAll) else "ex"
        vs = f.vars[0] if len(f.vars) == 1 else f"[{','.join(f.vars)}]"
        return f"{kw}({vs}, {_txt(f.body, _P_NEG)})"
    if isinstance(f, (ForAll2, Exists2)):
        kw = "all2" if isinstance(f, ForAll2) else "ex2"
        names = [p.name for p in f.preds]
        vs = names[0] if len(names) == 1 else f"[{','.join(names)}]"
        return f"{kw}({vs}, {_txt(f.body, _P_NEG)})"
    if isinstance(f, Lambda):
        return f"lambda([{','.join(f.params)}], {_txt(f.body, _P_NEG)})"
    if isinstance(f, LambdaApp):
        return _txt(beta_reduce(f), level)
    if isinstance(f, MacroCall):
        parts = []
        for a in f.args:
            if isinstance(a, tuple):
                parts.append("[" + ",".join(_arg_txt(x) for x in a) + "]")
            else:
                parts.append(_arg_txt(a))
        return f"{f.name}({','.join(parts)})" if parts else f.name
    raise ValueError(f"cannot print {f!r}")


def _arg_txt(a):
    if isinstance(a, Term):
        return print_term(a)
    return _txt(a, _P_NEG)


def print_text(f: Formula) -> str:
    """Text printing; quantifier bodies are parenthesized when compound,
    matching console output style."""
    s = _txt(f, _P_IFF)
    return s


# ---------------------------------------------------------------------------
# LaTeX printing

_LATEX_CONN = {
    "and": r" \land ",
    "or": r" \lor ",
}


def latex_symbol(name: str, italic=False) -> str:
    """Symbol conversion: trailing digits become subscripts, '_p' suffix
    becomes a prime, inner underscores are escaped."""
    prime = ""
    while name.endswith("_p"):
        prime += r"'"
        name = name[:-2]
    m = re.match(r"^(.*?)(\d+)$", name)
    sub = ""
    if m and m.group(1):
        name, sub = m.group(1), m.group(2)
    name = name.replace("_", r"\_")
    cmd = r"\mathit" if italic else r"\mathsf"
    out = f"{cmd}{{{name}}}"
    if sub:
        out = f"{cmd}{{{name}_{{{sub}}}}}"
    if prime:
        out += f"^{{{prime}}}"
    return out


def latex_term(t: Term, opts: PrintOptions) -> str:
    if isinstance(t, Var):
        return latex_symbol(t.name, italic=True) if opts.symbol_conversion \
            else f"\\mathit{{{t.name}}}"
    head = latex_symbol(t.functor) if opts.symbol_conversion \
        else f"\\mathsf{{{t.functor}}}"
    if not t.args:
        return head
    return head + "(" + ",".join(latex_term(a, opts) for a in t.args) + ")"


def _ltx(f, level, opts) -> str:
    def wrap(s, mylevel):
        return f"({s})" if mylevel < level else s

    if isinstance(f, Truth):
        return r"\top"
    if isinstance(f, Falsity):
        return r"\bot"
    if isinstance(f, Atom):
        return latex_term(Fn(f.pred, f.args), opts)
    if isinstance(f, Eq):
        return f"{latex_term(f.lhs, opts)}={latex_term(f.rhs, opts)}"
    if isinstance(f, Not):
        if isinstance(f.arg, Eq):
            return (f"{latex_term(f.arg.lhs, opts)}\\neq "
                    f"{latex_term(f.arg.rhs, opts)}")
        return r"\lnot " + _ltx(f.arg, _P_NEG, opts)
    if isinstance(f, And):
        return wrap(r" \land ".join(_ltx(a, _P_NEG, opts) for a in f.args),
                    _P_AND)
    if isinstance(f, Or):
        return wrap(r" \lor ".join(_ltx(a, _P_AND, opts) for a in f.args),
                    _P_OR)
    if isinstance(f, Implies):
        return wrap(_ltx(f.lhs, _P_OR, opts) + r" \rightarrow "
                    + _ltx(f.rhs, _P_IMPL, opts), _P_IMPL)
    if isinstance(f, Iff):
        return wrap(_ltx(f.lhs, _P_IMPL, opts) + r" \leftrightarrow "
                    + _ltx(f.rhs, _P_IFF, opts), _P_IFF)
    if isinstance(f, (ForAll, Exists)):
        q = r"\forall" if isinstance(f, ForAll) else r"\exists"
        vs = " ".join(f"{q} {latex_symbol(v, italic=True)}" for v in f.vars)
        return wrap(vs + r" \, " + _ltx(f.body, _P_NEG, opts), _P_NEG)
    if isinstance(f, (ForAll2, Exists2)):
        q = r"\forall" if isinstance(f, ForAll2) else r"\exists"
        vs = " ".join(f"{q} {latex_symbol(p.name, italic=True)}"
                      for p in f.preds)
        return wrap(vs + r" \, " + _ltx(f.body, _P_NEG, opts), _P_NEG)
    if isinstance(f, Lambda):
        vs = ",".join(latex_symbol(v, italic=True) for v in f.params)
        return wrap(r"\lambda (" + vs + ")." + _ltx(f.body, _P_NEG, opts),
                    _P_NEG)
    if isinstance(f, LambdaApp):
        return _ltx(beta_reduce(f), level, opts)
    if isinstance(f, MacroCall):
        head = latex_symbol(f.name, italic=True)
        if not f.args:
            return head
        return head + "(" + ",".join(
            ("[" + ",".join(_arg_ltx(x, opts) for x in a) + "]")
            if isinstance(a, tuple) else _arg_ltx(a, opts)
            for a in f.args) + ")"
    raise ValueError(f"cannot print {f!r}")


def _arg_ltx(a, opts):
    if isinstance(a, Term):
        return latex_term(a, opts)
    return _ltx(a, _P_NEG, opts)


def print_latex(f: Formula, opts: PrintOptions = PrintOptions("latex")) -> str:
    if isinstance(f, And):
        rows = r" \; \land \\" + "\n"
        body = rows.join(_ltx(a, _P_NEG, opts) for a in f.args)
        return "\\begin{array}{l}\n" + body + "\n\\end{array}"
    return _ltx(f, _P_IFF, opts)


def print_formula(f: Formula, opts: PrintOptions = PrintOptions()) -> str:
    if opts.style == "latex":
        return print_latex(f, opts)
    return print_text(f)


# ---------------------------------------------------------------------------
# TPTP FOF

class EmitError(Exception):
    pass


def emit_tptp(name: str, role: str, f: Formula) -> str:
    """One annotated TPTP FOF formula; variables are upper-cased."""
    if role not in ("axiom", "conjecture"):
        raise EmitError(f"unsupported TPTP role {role!r}")

    used = set()

    def varname(v, env):
        if v in env:
            return env[v]
        base = v[0].upper() + v[1:] if v[0].islower() else "V" + v
        cand, i = base, 0
        while cand in used:
            i += 1
            cand = f"{base}{i}"
        used.add(cand)
        return cand

    def term(t, env):
        if isinstance(t, Var):
            if t.name not in env:
                raise EmitError(f"free variable {t.name!r} in TPTP output")
            return env[t.name]
        if not t.args:
            return t.functor
        return t.functor + "(" + ",".join(term(a, env) for a in t.args) + ")"

    def go(g, env):
        if isinstance(g, Truth):
            return "$true"
        if isinstance(g, Falsity):
            return "$false"
        if isinstance(g, Atom):
            if not g.args:
                return g.pred
            return g.pred + "(" + ",".join(term(a, env) for a in g.args) + ")"
        if isinstance(g, Eq):
            return f"({term(g.lhs, env)} = {term(g.rhs, env)})"
        if isinstance(g, Not):
            return f"~({go(g.arg, env)})"
        if isinstance(g, And):
            return "(" + " & ".join(go(a, env) for a in g.args) + ")"
        if isinstance(g, Or):
            return "(" + " | ".join(go(a, env) for a in g.args) + ")"
        if isinstance(g, Implies):
            return f"({go(g.lhs, env)} => {go(g.rhs, env)})"
        if isinstance(g, Iff):
            return f"({go(g.lhs, env)} <=> {go(g.rhs, env)})"
        if isinstance(g, (ForAll, Exists)):
            q = "!" if isinstance(g, ForAll) else "?"
            env2 = dict(env)
            names = []
            for v in g.vars:
                env2[v] = varname(v, env)
                names.append(env2[v])
            return f"({q} [{','.join(names)}] : {go(g.body, env2)})"
        raise EmitError("second-order content cannot be emitted as TPTP FOF")

    return f"fof({name}, {role}, {go(f, {})}).\n"


# ---------------------------------------------------------------------------
# DIMACS / QDIMACS

def _propositional_atoms(cf):
    """Atom-to-integer map over a propositional clausal form, in first
    occurrence order."""
    mapping = {}
    for clause in cf.clauses:
        for sign, atom in clause.literals:
            if isinstance(atom, Eq) or atom.args:
                raise EmitError(
                    f"non-propositional literal {atom!r} in DIMACS output")
            if atom.pred not in mapping:
                mapping[atom.pred] = len(mapping) + 1
    return mapping


def emit_dimacs(cf):
    """Returns (text, atom-to-integer map)."""
    mapping = _propositional_atoms(cf)
    lines = [f"p cnf {len(mapping)} {len(cf.clauses)}"]
    for clause in cf.clauses:
        nums = [(mapping[a.pred] if s else -mapping[a.pred])
                for s, a in clause.literals]
        lines.append(" ".join(str(x) for x in nums + [0]))
    return "\n".join(lines) + "\n", mapping


def emit_qdimacs(prefix, cf):
    """prefix: list of (quantifier, atom-name list) with quantifier in
    {'e', 'a'}.  Returns (text, atom-to-integer map)."""
    mapping = _propositional_atoms(cf)
    for _, atoms in prefix:
        for a in atoms:
            if a not in mapping:
                mapping[a] = len(mapping) + 1
    lines = [f"p cnf {len(mapping)} {len(cf.clauses)}"]
    for q, atoms in prefix:
        if q not in ("e", "a"):
            raise EmitError(f"bad QDIMACS quantifier {q!r}")
        lines.append(f"{q} " + " ".join(str(mapping[a]) for a in atoms)
                     + " 0")
    for clause in cf.clauses:
        nums = [(mapping[a.pred] if s else -mapping[a.pred])
                for s, a in clause.literals]
        lines.append(" ".join(str(x) for x in nums + [0]))
    return "\n".join(lines) + "\n", mapping
