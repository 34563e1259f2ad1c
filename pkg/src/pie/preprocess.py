"""Normal forms and predicate-respecting simplifications.

Clausal forms keep Skolem bookkeeping so that quantified formulas can be
reconstructed by un-Skolemization after clause-level simplification.
The named pipelines c6 (CNF-based) and d6 (its DNF dual) convert to
clausal form, simplify, and convert back; both preserve equivalence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .formula import (
    And, Atom, Context, Eq, Exists, FALSE, Falsity, Fn, ForAll, Formula,
    Implies, Not, Or, TRUE, Term, Truth, Var, conj, disj, exists, forall,
    free_vars, free_vars_term, is_first_order, neg, nnf, rename_bound,
    subst_in_term,
)


class PreprocessError(Exception):
    pass


class UnskolemizeError(PreprocessError):
    pass


Literal = tuple  # (sign: bool, Atom | Eq)


@dataclass(frozen=True)
class Clause:
    literals: tuple
    origin: int | None = None

    def __iter__(self):
        return iter(self.literals)

    def __len__(self):
        return len(self.literals)


@dataclass
class ClausalForm:
    clauses: list
    skolems: dict = field(default_factory=dict)
    # skolems: name -> (arity, dependency variable names at introduction)
    definition_preds: set = field(default_factory=set)


def lit_vars(lit) -> set:
    _, a = lit
    if isinstance(a, Eq):
        return free_vars_term(a.lhs) | free_vars_term(a.rhs)
    out = set()
    for t in a.args:
        out |= free_vars_term(t)
    return out


def clause_vars(c: Clause) -> set:
    out = set()
    for lit in c.literals:
        out |= lit_vars(lit)
    return out


def lit_subst(lit, mapping):
    s, a = lit
    if isinstance(a, Eq):
        return (s, Eq(subst_in_term(a.lhs, mapping),
                      subst_in_term(a.rhs, mapping)))
    return (s, Atom(a.pred, tuple(subst_in_term(t, mapping) for t in a.args)))


def clause_subst(c: Clause, mapping) -> Clause:
    return Clause(tuple(lit_subst(l, mapping) for l in c.literals), c.origin)


def lit_complement(lit):
    return (not lit[0], lit[1])


# ---------------------------------------------------------------------------
# Miniscoping

def miniscope(f: Formula) -> Formula:
    """Push quantifiers inward to reduce Skolem arity (NNF input)."""
    if isinstance(f, (Atom, Eq, Truth, Falsity, Not)):
        return f
    if isinstance(f, And):
        return conj(miniscope(a) for a in f.args)
    if isinstance(f, Or):
        return disj(miniscope(a) for a in f.args)
    if isinstance(f, (ForAll, Exists)):
        body = miniscope(f.body)
        out = body
        for v in reversed(f.vars):
            out = _push_one(type(f), v, out)
        return out
    return f


def _push_one(q, v, body):
    if v not in free_vars(body):
        return body
    if isinstance(body, And):
        inside = [a for a in body.args if v in free_vars(a)]
        outside = [a for a in body.args if v not in free_vars(a)]
        if q is ForAll:
            return conj([_push_one(q, v, a) for a in inside] + outside)
        if outside:
            return conj([_push_one(q, v, conj(inside))] + outside)
        return Exists((v,), body)
    if isinstance(body, Or):
        inside = [a for a in body.args if v in free_vars(a)]
        outside = [a for a in body.args if v not in free_vars(a)]
        if q is Exists:
            return disj([_push_one(q, v, a) for a in inside] + outside)
        if outside:
            return disj([_push_one(q, v, disj(inside))] + outside)
        return ForAll((v,), body)
    if isinstance(body, q) and q in (ForAll, Exists):
        return q((v,) + body.vars, body.body)
    return q((v,), body)


# ---------------------------------------------------------------------------
# Clausification

def clausify(f: Formula, mode: str = "equivalence",
             ctx: Context | None = None) -> ClausalForm:
    """Convert a first-order, macro-free formula to clausal form.

    equivalence mode Skolemizes existentials (recorded, invertible by
    unskolemize); definitional mode introduces definition predicates for
    shared disjunctive structure and is equisatisfiable."""
    if not is_first_order(f):
        raise PreprocessError("clausify requires a first-order formula")
    if ctx is None:
        ctx = Context()
    ctx.reserve_formula(f)
    fv = sorted(free_vars(f))
    g = forall(fv, f)
    g = miniscope(nnf(rename_bound(g)))
    cf = ClausalForm([], {}, set())
    if mode == "equivalence":
        matrix = _skolemize(g, [], cf, ctx)
        clauses = _cnf(matrix)
    elif mode == "definitional":
        clauses = _definitional(g, [], cf, ctx)
    else:
        raise PreprocessError(f"unknown clausify mode {mode!r}")
    seen = set()
    for lits in clauses:
        c = _mk_clause(lits)
        if c is None:
            continue
        key = _clause_key(c)
        if key in seen:
            continue
        seen.add(key)
        cf.clauses.append(c)
    if any(len(c) == 0 for c in cf.clauses):
        cf.clauses = [Clause(())]
    return cf


def _skolemize(g, univ, cf, ctx):
    if isinstance(g, ForAll):
        return _skolemize(g.body, univ + list(g.vars), cf, ctx)
    if isinstance(g, Exists):
        mapping = {}
        for v in g.vars:
            deps = [u for u in univ if u in free_vars(g.body)]
            name = ctx.fresh_skolem()
            cf.skolems[name] = (len(deps), tuple(deps))
            mapping[v] = Fn(name, tuple(Var(d) for d in deps))
        from .formula import subst_vars
        return _skolemize(subst_vars(g.body, mapping), univ, cf, ctx)
    if isinstance(g, And):
        return conj(_skolemize(a, univ, cf, ctx) for a in g.args)
    if isinstance(g, Or):
        return disj(_skolemize(a, univ, cf, ctx) for a in g.args)
    return g


def _cnf(g):
    """Distribute a quantifier-free NNF matrix into a list of literal
    lists."""
    if isinstance(g, Truth):
        return []
    if isinstance(g, Falsity):
        return [[]]
    if isinstance(g, And):
        out = []
        for a in g.args:
            out.extend(_cnf(a))
        return out
    if isinstance(g, Or):
        parts = [_cnf(a) for a in g.args]
        out = [[]]
        for p in parts:
            out = [c1 + c2 for c1 in out for c2 in p]
        return out
    if isinstance(g, Not):
        return [[(False, g.arg)]]
    if isinstance(g, (Atom, Eq)):
        return [[(True, g)]]
    raise PreprocessError(f"unexpected node in CNF matrix: {g!r}")


def _is_literalish(g):
    return isinstance(g, (Atom, Eq)) or (
        isinstance(g, Not) and isinstance(g.arg, (Atom, Eq)))


def _definitional(g, univ, cf, ctx):
    """Structure-preserving clausification of an NNF formula."""
    if isinstance(g, ForAll):
        return _definitional(g.body, univ + list(g.vars), cf, ctx)
    if isinstance(g, Exists):
        mapping = {}
        for v in g.vars:
            deps = [u for u in univ if u in free_vars(g.body)]
            name = ctx.fresh_skolem()
            cf.skolems[name] = (len(deps), tuple(deps))
            mapping[v] = Fn(name, tuple(Var(d) for d in deps))
        from .formula import subst_vars
        return _definitional(subst_vars(g.body, mapping), univ, cf, ctx)
    if isinstance(g, And):
        out = []
        for a in g.args:
            out.extend(_definitional(a, univ, cf, ctx))
        return out
    if isinstance(g, Or):
        lits = []
        for a in g.args:
            lits.append(_define(a, univ, cf, ctx))
        extra = []
        clause = []
        for lit, defs in lits:
            clause.append(lit)
            extra.extend(defs)
        return [clause] + extra
    if _is_literalish(g):
        if isinstance(g, Not):
            return [[(False, g.arg)]]
        return [[(True, g)]]
    raise PreprocessError(f"unexpected node in definitional CNF: {g!r}")


def _define(g, univ, cf, ctx):
    """Return (literal, definition clauses) for a disjunct."""
    if _is_literalish(g):
        if isinstance(g, Not):
            return (False, g.arg), []
        return (True, g), []
    vs = sorted(free_vars(g) & set(univ))
    name = ctx.fresh_pred("def1")
    cf.definition_preds.add(name)
    d = Atom(name, tuple(Var(v) for v in vs))
    # d -> g   (g occurs positively, one-sided definition suffices)
    sub = _definitional(g, univ, cf, ctx)
    clauses = [[(False, d)] + c for c in sub]
    return (True, d), clauses


def _mk_clause(lits):
    out = []
    seen = set()
    for s, a in lits:
        if isinstance(a, Eq) and s and a.lhs == a.rhs:
            return None  # t=t makes the clause true
        if isinstance(a, Eq) and not s and a.lhs == a.rhs:
            continue     # t!=t is false, drop the literal
        if isinstance(a, Eq):
            sides = tuple(sorted((a.lhs, a.rhs), key=repr))
            key, ckey = (s, "=", sides), (not s, "=", sides)
        else:
            key, ckey = (s, a), (not s, a)
        if ckey in seen:
            return None  # tautology
        if key in seen:
            continue
        seen.add(key)
        out.append((s, a))
    return Clause(tuple(out))


def _clause_key(c: Clause):
    ren = {}
    parts = []
    for s, a in sorted(c.literals, key=lambda l: repr(l)):
        parts.append((s, _canon(a, ren)))
    return tuple(parts)


def _canon(a, ren):
    def t(x):
        if isinstance(x, Var):
            if x.name not in ren:
                ren[x.name] = f"_v{len(ren)}"
            return ren[x.name]
        return (x.functor,) + tuple(t(y) for y in x.args)
    if isinstance(a, Eq):
        return ("=", t(a.lhs), t(a.rhs))
    return (a.pred,) + tuple(t(x) for x in a.args)


# ---------------------------------------------------------------------------
# Matching / subsumption

def match_term(pat, tgt, theta):
    if isinstance(pat, Var):
        if pat.name in theta:
            return theta[pat.name] == tgt
        theta[pat.name] = tgt
        return True
    if isinstance(tgt, Fn) and tgt.functor == pat.functor \
            and len(tgt.args) == len(pat.args):
        return all(match_term(p, t, theta)
                   for p, t in zip(pat.args, tgt.args))
    return False


def match_lit(pat, tgt, theta):
    ps, pa = pat
    ts, ta = tgt
    if ps != ts:
        return False
    if isinstance(pa, Eq) and isinstance(ta, Eq):
        saved = dict(theta)
        if match_term(pa.lhs, ta.lhs, theta) \
                and match_term(pa.rhs, ta.rhs, theta):
            return True
        theta.clear()
        theta.update(saved)
        return match_term(pa.lhs, ta.rhs, theta) \
            and match_term(pa.rhs, ta.lhs, theta)
    if isinstance(pa, Atom) and isinstance(ta, Atom) \
            and pa.pred == ta.pred and len(pa.args) == len(ta.args):
        return all(match_term(p, t, theta)
                   for p, t in zip(pa.args, ta.args))
    return False


SUBSUMPTION_SIZE_CAP = 12


def subsumes(c: Clause, d: Clause) -> bool:
    """True if some instance of c is a sub-multiset of d."""
    if len(c) > len(d):
        return False
    if len(c) > SUBSUMPTION_SIZE_CAP or len(d) > SUBSUMPTION_SIZE_CAP:
        return _clause_key(c) == _clause_key(d)

    def go(lits, theta):
        if not lits:
            return True
        first, rest = lits[0], lits[1:]
        for tgt in d.literals:
            theta2 = dict(theta)
            if match_lit(first, tgt, theta2) and go(rest, theta2):
                return True
        return False

    return go(list(c.literals), {})


# ---------------------------------------------------------------------------
# Clausal simplification

@dataclass(frozen=True)
class ProtectedVocabulary:
    predicates: frozenset = frozenset()  # of (name, arity) or name

    def covers(self, pred, arity):
        return pred in self.predicates or (pred, arity) in self.predicates


PROTECT_ALL = ProtectedVocabulary(frozenset({"*"}))


def _protected(protect, pred, arity):
    if protect is None:
        return False
    if "*" in protect.predicates:
        return True
    return protect.covers(pred, arity)


def simplify_clausal(cf: ClausalForm,
                     protect: ProtectedVocabulary = PROTECT_ALL
                     ) -> ClausalForm:
    """Fixpoint of tautology/duplicate/subsumption deletion, equality
    resolution, unit subsumption resolution, and purity deletion for
    predicates outside the protected vocabulary.

    With protect = PROTECT_ALL every step preserves plain equivalence;
    otherwise the second-order equivalence over non-protected predicates
    is preserved."""
    clauses = list(cf.clauses)
    changed = True
    while changed:
        changed = False
        # per-clause normalization incl. equality resolution
        out = []
        for c in clauses:
            c2 = _simplify_clause(c)
            if c2 is None:
                changed = True
                continue
            if c2 != c:
                changed = True
            out.append(c2)
        clauses = out
        if any(len(c) == 0 for c in clauses):
            clauses = [Clause(())]
            break
        # unit subsumption resolution
        units = [c.literals[0] for c in clauses if len(c) == 1]
        out = []
        for c in clauses:
            lits = list(c.literals)
            kept = []
            for lit in lits:
                comp = lit_complement(lit)
                if len(c) > 1 and any(
                        match_lit(u, comp, {}) for u in units):
                    changed = True
                    continue
                kept.append(lit)
            out.append(Clause(tuple(kept), c.origin) if len(kept) != len(lits)
                       else c)
        clauses = out
        # subsumption (incl. duplicates)
        kept = []
        for i, c in enumerate(clauses):
            dominated = False
            for j, d in enumerate(clauses):
                if i == j:
                    continue
                if subsumes(d, c) and not (subsumes(c, d) and j > i):
                    dominated = True
                    break
            if dominated:
                changed = True
            else:
                kept.append(c)
        clauses = kept
        # purity deletion
        pols = {}
        for c in clauses:
            for s, a in c.literals:
                if isinstance(a, Eq):
                    continue
                key = (a.pred, len(a.args))
                pols.setdefault(key, set()).add(s)
        pure = {k for k, v in pols.items()
                if len(v) == 1 and not _protected(protect, k[0], k[1])}
        if pure:
            kept = []
            for c in clauses:
                if any(not isinstance(a, Eq)
                       and (a.pred, len(a.args)) in pure
                       for _, a in c.literals):
                    changed = True
                else:
                    kept.append(c)
            clauses = kept
    return ClausalForm(clauses, dict(cf.skolems), set(cf.definition_preds))


def _simplify_clause(c: Clause):
    lits = list(c.literals)
    # equality resolution: x != t eliminates x
    changed = True
    while changed:
        changed = False
        for i, (s, a) in enumerate(lits):
            if s or not isinstance(a, Eq):
                continue
            for x, t in ((a.lhs, a.rhs), (a.rhs, a.lhs)):
                if isinstance(x, Var) and x.name not in free_vars_term(t):
                    mapping = {x.name: t}
                    lits = [lit_subst(l, mapping)
                            for j, l in enumerate(lits) if j != i]
                    changed = True
                    break
            if changed:
                break
    c2 = _mk_clause(lits)
    return c2


# ---------------------------------------------------------------------------
# Clause reformation (clauses back to connective form)

_NICE_VARS = ("x", "y", "z", "u", "v", "w")


def _nice_renaming(vs, taken):
    ren = {}
    pool = list(_NICE_VARS) + [f"x{i}" for i in range(1, 50)]
    pool = [p for p in pool if p not in taken]
    for i, v in enumerate(sorted(vs)):
        ren[v] = Var(pool[i]) if i < len(pool) else Var(v)
    return ren


def clause_to_formula(c: Clause, close=True, taken=(),
                      exclude=frozenset()) -> Formula:
    """Render a clause as an implication between positive parts."""
    negs = [a for s, a in c.literals if not s]
    poss = [a for s, a in c.literals if s]
    if negs and poss:
        f = Implies(conj(negs), disj(poss))
    elif poss:
        f = disj(poss)
    elif negs:
        f = neg(conj(negs))
    else:
        f = FALSE
    if close:
        vs = clause_vars(c) - set(exclude)
        ren = _nice_renaming(vs, set(taken) | set(exclude))
        from .formula import subst_vars
        f = subst_vars(f, ren)
        f = forall(sorted({t.name for t in ren.values()},
                          key=lambda n: (_NICE_VARS.index(n)
                                         if n in _NICE_VARS else 99, n)), f)
    return f


def clauses_to_formula(cf: ClausalForm, taken=()) -> Formula:
    if not cf.clauses:
        return TRUE
    return conj(clause_to_formula(c, taken=taken) for c in cf.clauses)


# ---------------------------------------------------------------------------
# Un-Skolemization

def _skolem_names(cf: ClausalForm):
    names = dict(cf.skolems)
    for c in cf.clauses:
        for _, a in c.literals:
            terms = (a.lhs, a.rhs) if isinstance(a, Eq) else a.args
            stack = list(terms)
            while stack:
                t = stack.pop()
                if isinstance(t, Fn):
                    if t.functor.startswith("sk") \
                            and t.functor[2:].isdigit() \
                            and t.functor not in names:
                        names[t.functor] = (len(t.args), None)
                    stack.extend(t.args)
    return names


def unskolemize(cf: ClausalForm, ctx: Context | None = None) -> Formula:
    """Reconstruct a quantified formula without Skolem symbols.

    Raises UnskolemizeError when the dependency pattern is not
    invertible into a single quantifier prefix per clause group."""
    if ctx is None:
        ctx = Context()
    for c in cf.clauses:
        for v in clause_vars(c):
            ctx.reserve([v])
    skolems = _skolem_names(cf)
    if any(len(c) == 0 for c in cf.clauses):
        return FALSE
    if not cf.clauses:
        return TRUE
    if not skolems:
        return clauses_to_formula(cf)

    # group clauses connected through shared Skolem symbols
    groups = []
    for c in cf.clauses:
        syms = _clause_skolems(c, skolems)
        merged = [c]
        rest = []
        for g_syms, g_clauses in groups:
            if syms & g_syms:
                syms |= g_syms
                merged.extend(g_clauses)
            else:
                rest.append((g_syms, g_clauses))
        groups = rest + [(syms, merged)]

    parts = []
    for syms, cs in groups:
        if not syms:
            parts.append(clauses_to_formula(ClausalForm(cs)))
        else:
            parts.append(_unskolemize_group(cs, syms, skolems, ctx))
    return conj(parts)


def _clause_skolems(c, skolems):
    out = set()
    for _, a in c.literals:
        terms = (a.lhs, a.rhs) if isinstance(a, Eq) else a.args
        stack = list(terms)
        while stack:
            t = stack.pop()
            if isinstance(t, Fn):
                if t.functor in skolems:
                    out.add(t.functor)
                stack.extend(t.args)
    return out


def _unskolemize_group(cs, syms, skolems, ctx):
    # canonical universal variables per Skolem argument position
    canon = {}  # skolem -> tuple of canonical var names
    for s in sorted(syms):
        arity = skolems[s][0]
        canon[s] = tuple(ctx.fresh_var("x") for _ in range(arity))
    exvars = {s: ctx.fresh_var("y") for s in sorted(syms)}

    new_clauses = []
    for c in cs:
        ren = {}
        ok = _canonize_clause(c, syms, canon, ren)
        if not ok:
            raise UnskolemizeError(
                f"Skolem dependency pattern not invertible in {c}")
        c2 = clause_subst(c, ren)
        c2 = _replace_skolems(c2, canon, exvars)
        new_clauses.append(c2)

    # quantifier prefix: dependency sets must form a chain
    dep_sets = {s: set(canon[s]) for s in syms}
    order = sorted(syms, key=lambda s: (len(dep_sets[s]), s))
    for a, b in itertools.combinations(order, 2):
        if not (dep_sets[a] <= dep_sets[b] or dep_sets[b] <= dep_sets[a]):
            raise UnskolemizeError(
                "incomparable Skolem dependency sets in one clause group")
    prefix = []  # (kind, var)
    emitted = set()
    for s in order:
        for v in canon[s]:
            if v not in emitted:
                prefix.append(("all", v))
                emitted.add(v)
        prefix.append(("ex", exvars[s]))

    bound = emitted | set(exvars.values())
    matrix = conj(clause_to_formula(c, close=True, taken=bound,
                                    exclude=bound) for c in new_clauses)
    for kind, v in reversed(prefix):
        if kind == "all":
            matrix = ForAll((v,) + matrix.vars, matrix.body) \
                if isinstance(matrix, ForAll) else ForAll((v,), matrix)
        else:
            matrix = Exists((v,) + matrix.vars, matrix.body) \
                if isinstance(matrix, Exists) else Exists((v,), matrix)
    return matrix


def _canonize_clause(c, syms, canon, ren):
    """Build a renaming of clause variables so each Skolem occurrence
    has exactly the canonical argument variables."""
    for _, a in c.literals:
        terms = (a.lhs, a.rhs) if isinstance(a, Eq) else a.args
        stack = list(terms)
        while stack:
            t = stack.pop()
            if isinstance(t, Fn):
                if t.functor in syms:
                    want = canon[t.functor]
                    if len(t.args) != len(want):
                        return False
                    seen_args = set()
                    for arg, cv in zip(t.args, want):
                        if not isinstance(arg, Var):
                            return False
                        if arg.name in seen_args:
                            return False
                        seen_args.add(arg.name)
                        if arg.name in ren:
                            if ren[arg.name] != Var(cv):
                                return False
                        else:
                            ren[arg.name] = Var(cv)
                stack.extend(t.args)
    return True


def _replace_skolems(c, canon, exvars):
    def rt(t):
        if isinstance(t, Var):
            return t
        if t.functor in exvars and len(t.args) == len(canon[t.functor]):
            return Var(exvars[t.functor])
        return Fn(t.functor, tuple(rt(a) for a in t.args))

    lits = []
    for s, a in c.literals:
        if isinstance(a, Eq):
            lits.append((s, Eq(rt(a.lhs), rt(a.rhs))))
        else:
            lits.append((s, Atom(a.pred, tuple(rt(x) for x in a.args))))
    return Clause(tuple(lits), c.origin)


# ---------------------------------------------------------------------------
# Named pipelines

def pipeline_c6(f: Formula) -> Formula:
    """CNF, clausal simplification, back to a quantified formula; falls
    back to the input if un-Skolemization is not invertible."""
    if not is_first_order(f):
        raise PreprocessError("pipeline c6 requires a first-order formula")
    cf = clausify(f, "equivalence")
    cf = simplify_clausal(cf, PROTECT_ALL)
    try:
        return unskolemize(cf)
    except UnskolemizeError:
        return f


def pipeline_d6(f: Formula) -> Formula:
    """DNF dual of c6 via simplification of the negation."""
    g = pipeline_c6(nnf(neg(f)))
    return nnf(neg(g))


PIPELINES = {"c6": pipeline_c6, "d6": pipeline_d6}
