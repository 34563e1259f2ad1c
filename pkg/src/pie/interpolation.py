"""Craig-Lyndon interpolation over side-labeled clausal tableaux.

Interpolants are extracted bottom-up from a closed tableau whose
clauses carry left/right labels, then ground symbols private to one
side are generalized to quantified variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .formula import (
    And, Atom, Context, Eq, Exists, FALSE, Falsity, Fn, ForAll, Formula,
    Implies, Not, Or, TRUE, Truth, Var, conj, disj, free_symbols, neg,
)
from .preprocess import PROTECT_ALL, ProtectedVocabulary, simplify_clausal
from .prover import (
    GROUND_PREFIX, Model, ProofResult, ProverConfig, TableauNode,
    check_tableau, find_countermodel, prove_implication,
)


class InterpolationError(Exception):
    pass


@dataclass
class InterpolationTask:
    left: Formula
    right: Formula
    simp_sides: bool = True
    dot_path: str | None = None


@dataclass
class Interpolant:
    formula: Formula
    proof: ProofResult | None = None
    model: Model | None = None
    status: str = "interpolant"   # 'interpolant' | 'not_valid' | 'failed'


# ---------------------------------------------------------------------------
# Extraction

def _lit_formula(lit) -> Formula:
    s, a = lit
    return a if s else Not(a)


def extract_from_tableau(root: TableauNode) -> Formula:
    """Ground interpolant of the clause-level task from a closed,
    side-labeled tableau."""

    def go(node):
        if not node.children:
            anc = node.closed_by
            if anc is None:
                raise InterpolationError("open leaf in tableau")
            ls, ps = node.side, anc.side
            if ls == "left" and ps == "left":
                return FALSE
            if ls == "right" and ps == "right":
                return TRUE
            if ls == "left" and ps == "right":
                return _lit_formula(node.literal)
            return _lit_formula((not node.literal[0], node.literal[1]))
        side = node.children[0].side
        parts = [go(c) for c in node.children]
        return disj(parts) if side == "left" else conj(parts)

    return go(root)


# ---------------------------------------------------------------------------
# Constant generalization

def _constants(f: Formula):
    """Zero-ary function symbols of f in first-occurrence order."""
    out = []
    seen = set()

    def wt(t):
        if isinstance(t, Var):
            return
        if not t.args and t.functor not in seen:
            seen.add(t.functor)
            out.append(t.functor)
        for a in t.args:
            wt(a)

    def wf(g):
        if isinstance(g, Atom):
            for a in g.args:
                wt(a)
        elif isinstance(g, Eq):
            wt(g.lhs)
            wt(g.rhs)
        elif isinstance(g, Not):
            wf(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                wf(a)
        elif isinstance(g, (Implies,)):
            wf(g.lhs)
            wf(g.rhs)
        elif isinstance(g, (ForAll, Exists)):
            wf(g.body)

    wf(f)
    return out


def _vocab(f: Formula):
    return {(o.kind, o.name, o.arity) for o in free_symbols(f)}


def generalize_constants(h: Formula, left_vocab, right_vocab,
                         ctx: Context | None = None) -> Formula:
    """Replace side-private constants of a ground interpolant by
    quantified variables: left-only constants become existential,
    right-only (including proof-grounding constants private to both
    sides) universal; the existential block is outermost."""
    if ctx is None:
        ctx = Context()
    ctx.reserve_formula(h)
    ex_names, all_names_ = [], []
    for c in _constants(h):
        key = ("function", c, 0)
        in_l = key in left_vocab
        in_r = key in right_vocab
        if in_l and in_r:
            continue
        if in_l:
            ex_names.append(c)
        else:
            # right-only, or private to the proof (grounded variable)
            all_names_.append(c)
    if not ex_names and not all_names_:
        return h
    mapping = {}
    ex_vars, all_vars = [], []
    for c in ex_names:
        v = ctx.fresh_var("x")
        mapping[c] = Var(v)
        ex_vars.append(v)
    for c in all_names_:
        v = ctx.fresh_var("y" if ex_vars else "x")
        mapping[c] = Var(v)
        all_vars.append(v)
    g = _replace_constants(h, mapping)
    if all_vars:
        g = ForAll(tuple(all_vars), g)
    if ex_vars:
        g = Exists(tuple(ex_vars), g)
    return g


def _replace_constants(f, mapping):
    def rt(t):
        if isinstance(t, Var):
            return t
        if not t.args and t.functor in mapping:
            return mapping[t.functor]
        return Fn(t.functor, tuple(rt(a) for a in t.args))

    if isinstance(f, Atom):
        return Atom(f.pred, tuple(rt(a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(rt(f.lhs), rt(f.rhs))
    if isinstance(f, (Truth, Falsity)):
        return f
    if isinstance(f, Not):
        return Not(_replace_constants(f.arg, mapping))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_replace_constants(a, mapping)
                             for a in f.args))
    if isinstance(f, Implies):
        return Implies(_replace_constants(f.lhs, mapping),
                       _replace_constants(f.rhs, mapping))
    if isinstance(f, (ForAll, Exists)):
        return type(f)(f.vars, _replace_constants(f.body, mapping))
    raise InterpolationError(f"cannot generalize inside {f!r}")


# ---------------------------------------------------------------------------
# Driver

def _clause_functions(clauses):
    """All function symbols (with arity) in a clause list."""
    out = set()
    for c in clauses:
        for _, a in c.literals:
            terms = (a.lhs, a.rhs) if isinstance(a, Eq) else a.args
            stack = list(terms)
            while stack:
                t = stack.pop()
                if isinstance(t, Fn):
                    out.add(("function", t.functor, len(t.args)))
                    stack.extend(t.args)
    return out


def interpolate(task: InterpolationTask,
                config: ProverConfig | None = None) -> Interpolant:
    """Compute a Craig-Lyndon interpolant for task.left -> task.right."""
    from .formula import is_first_order
    from .preprocess import ClausalForm, clausify
    from .prover import equality_axioms, prove_clausal

    if config is None:
        config = ProverConfig()
    left, right = task.left, task.right
    if not (is_first_order(left) and is_first_order(right)):
        # validity-preserving second-order reduction of the implication
        from .prover import reduce_so_universal
        red = reduce_so_universal(Implies(left, right))
        if not isinstance(red, Implies):
            raise InterpolationError(
                "interpolation requires first-order input")
        left, right = red.lhs, red.rhs
    ctx = Context()
    ctx.reserve_formula(left)
    ctx.reserve_formula(right)
    left_cf = clausify(left, "equivalence", ctx)
    right_cf = clausify(neg(right), "equivalence", ctx)
    if task.simp_sides:
        left_cf = simplify_clausal(left_cf, PROTECT_ALL)
        right_cf = simplify_clausal(right_cf, PROTECT_ALL)
    clauses = [(c, "left") for c in left_cf.clauses]
    clauses += [(c, "right") for c in right_cf.clauses]
    eqax = equality_axioms(clauses)
    if eqax:
        left_eq = any(isinstance(a, Eq) for c, s in clauses
                      if s == "left" for _, a in c.literals)
        clauses += [(c, "left" if left_eq else "right") for c in eqax]
    result = prove_clausal(clauses, config)
    if not result.proved:
        m = find_countermodel(Implies(left, right), max_size=3,
                              timeout_ms=min(config.timeout_ms, 2000))
        if m is not None:
            return Interpolant(FALSE, model=m, status="not_valid")
        return Interpolant(FALSE, proof=result, status="failed")
    if not check_tableau(result.tableau, result.clauses):
        raise InterpolationError("prover returned an unsound tableau")
    if result.tableau.literal is None and not result.tableau.children:
        # empty input clause: one side is contradictory on its own
        side = next(s for c, s in result.clauses if not c.literals)
        h = FALSE if side == "left" else TRUE
    else:
        h = extract_from_tableau(result.tableau)
    left_vocab = _vocab(left) | _clause_functions(left_cf.clauses)
    right_vocab = _vocab(right) | _clause_functions(right_cf.clauses)
    h = generalize_constants(h, left_vocab, right_vocab)
    if task.dot_path:
        with open(task.dot_path, "w") as fh:
            fh.write(emit_tableau_dot(result.tableau))
    return Interpolant(h, proof=result)


def symmetric_interpolate(parts, config: ProverConfig | None = None):
    """Interpolants H1..Hn for a jointly unsatisfiable list of formulas:
    parts[i] entails H[i], the H[i] are jointly unsatisfiable, and each
    H[i] uses only symbols parts[i] shares with the other parts."""
    if config is None:
        config = ProverConfig()
    parts = list(parts)
    hs = []
    for i, f in enumerate(parts):
        others = hs[:i] + parts[i + 1:]
        rest = conj(others) if others else TRUE
        task = InterpolationTask(f, neg(rest))
        out = interpolate(task, config)
        if out.status != "interpolant":
            raise InterpolationError(
                f"symmetric interpolation failed at part {i}: {out.status}")
        hs.append(out.formula)
    return hs


# ---------------------------------------------------------------------------
# DOT rendering

def emit_tableau_dot(root: TableauNode) -> str:
    """Graphviz source for a tableau: shaded by side, dashed closure
    edges annotated with the partner's side."""
    from .syntax import print_text

    ids = {}
    lines = ["digraph tableau {",
             '  node [shape=box, fontname="monospace"];']
    for i, n in enumerate(root.nodes()):
        ids[id(n)] = f"n{i}"
    for n in root.nodes():
        nid = ids[id(n)]
        if n.literal is None:
            lines.append(f'  {nid} [label="", shape=point];')
            continue
        label = print_text(_lit_formula(n.literal)).replace('"', r'\"')
        fill = "lightgrey" if n.side == "right" else "white"
        lines.append(f'  {nid} [label="{label}", style=filled, '
                     f'fillcolor={fill}];')
    for n in root.nodes():
        for c in n.children:
            lines.append(f"  {ids[id(n)]} -> {ids[id(c)]};")
        if not n.children and n.closed_by is not None:
            partner = n.closed_by
            lines.append(
                f"  {ids[id(n)]} -> {ids[id(partner)]} "
                f'[style=dashed, label="{partner.side}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
