"""Model-elimination prover, finite model search, and validation.

The prover searches for closed clausal tableaux by iterative deepening
over tableau depth with regularity pruning and leftmost goal selection.
Clauses carry a side label (left/right) that the interpolation module
reads off the closed tableau.  Equality is handled by adding the
standard axioms when '=' occurs in the input.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from .formula import (
    And, Atom, Context, Eq, Exists, Exists2, FALSE, Falsity, Fn, ForAll,
    ForAll2, Formula, Iff, Implies, Lambda, LambdaApp, MacroCall, Not, Or,
    PredSpec, TRUE, Term, Truth, Var, conj, free_symbols, free_vars_term,
    is_first_order, neg, predicate_arities, substitute_predicate,
)
from .preprocess import (
    Clause, ClausalForm, clausify, lit_complement, simplify_clausal,
    PROTECT_ALL,
)


class ProverError(Exception):
    pass


class _Timeout(Exception):
    pass


@dataclass
class ProverConfig:
    timeout_ms: int = 5000
    max_depth: int = 30
    max_inferences: int | None = None


@dataclass(eq=False)
class TableauNode:
    """A node of a (closed) clausal tableau.

    The root carries no literal; inner structure: each non-leaf node's
    children are the literals of one instance of an input clause."""
    literal: tuple | None      # (sign, Atom|Eq) or None for the root
    side: str | None           # 'left' | 'right' | None (root)
    children: list = field(default_factory=list)
    closed_by: object = None   # TableauNode ancestor, or None for inner
    clause_index: int | None = None  # input clause used to expand here

    def leaves(self):
        if not self.children:
            yield self
        else:
            for c in self.children:
                yield from c.leaves()

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()


@dataclass
class ProofResult:
    proved: bool
    tableau: TableauNode | None = None
    depth: int | None = None
    inferences: int = 0
    elapsed_ms: float = 0.0
    reason: str = ""
    clauses: list = field(default_factory=list)  # (Clause, side) inputs


# ---------------------------------------------------------------------------
# Unification on renamed clause variables

def _rename_clause(c: Clause, counter: list):
    counter[0] += 1
    tag = counter[0]
    cache = {}

    def rt(t):
        if isinstance(t, Var):
            if t.name not in cache:
                cache[t.name] = Var(f"_{tag}_{t.name}")
            return cache[t.name]
        return Fn(t.functor, tuple(rt(a) for a in t.args))

    lits = []
    for s, a in c.literals:
        if isinstance(a, Eq):
            lits.append((s, Eq(rt(a.lhs), rt(a.rhs))))
        else:
            lits.append((s, Atom(a.pred, tuple(rt(x) for x in a.args))))
    return lits


def _deref(t, env):
    while isinstance(t, Var) and t.name in env:
        t = env[t.name]
    return t


def _occurs(name, t, env):
    t = _deref(t, env)
    if isinstance(t, Var):
        return t.name == name
    return any(_occurs(name, a, env) for a in t.args)


def _unify(a, b, env, trail):
    a = _deref(a, env)
    b = _deref(b, env)
    if isinstance(a, Var):
        if isinstance(b, Var) and b.name == a.name:
            return True
        if _occurs(a.name, b, env):
            return False
        env[a.name] = b
        trail.append(a.name)
        return True
    if isinstance(b, Var):
        return _unify(b, a, env, trail)
    if a.functor != b.functor or len(a.args) != len(b.args):
        return False
    return all(_unify(x, y, env, trail) for x, y in zip(a.args, b.args))


def _atom_terms(a):
    return (a.lhs, a.rhs) if isinstance(a, Eq) else a.args


def _unify_atoms(a, b, env, trail):
    if isinstance(a, Eq) != isinstance(b, Eq):
        return False
    if isinstance(a, Atom) and (a.pred != b.pred
                                or len(a.args) != len(b.args)):
        return False
    return all(_unify(x, y, env, trail)
               for x, y in zip(_atom_terms(a), _atom_terms(b)))


def _resolve_term(t, env):
    t = _deref(t, env)
    if isinstance(t, Var):
        return t
    return Fn(t.functor, tuple(_resolve_term(a, env) for a in t.args))


def _resolve_lit(lit, env):
    s, a = lit
    if isinstance(a, Eq):
        return (s, Eq(_resolve_term(a.lhs, env), _resolve_term(a.rhs, env)))
    return (s, Atom(a.pred, tuple(_resolve_term(t, env) for t in a.args)))


# ---------------------------------------------------------------------------
# Equality axioms

def equality_axioms(clauses):
    """Reflexivity, symmetry, transitivity, and congruence clauses for
    the symbols occurring in the clause list."""
    preds = {}
    funs = {}
    uses_eq = False
    for c, _side in clauses:
        for s, a in c.literals:
            if isinstance(a, Eq):
                uses_eq = True
                stack = [a.lhs, a.rhs]
            else:
                preds.setdefault(a.pred, len(a.args))
                stack = list(a.args)
            while stack:
                t = stack.pop()
                if isinstance(t, Fn):
                    if t.args:
                        funs.setdefault(t.functor, len(t.args))
                    stack.extend(t.args)
    if not uses_eq:
        return []
    x, y, z = Var("x"), Var("y"), Var("z")
    out = [
        Clause(((True, Eq(x, x)),)),
        Clause(((False, Eq(x, y)), (True, Eq(y, x)))),
        Clause(((False, Eq(x, y)), (False, Eq(y, z)), (True, Eq(x, z)))),
    ]
    for p, n in sorted(preds.items()):
        if n == 0:
            continue
        xs = tuple(Var(f"x{i}") for i in range(n))
        ys = tuple(Var(f"y{i}") for i in range(n))
        lits = [(False, Atom(p, xs))]
        lits += [(False, Eq(a, b)) for a, b in zip(xs, ys)]
        lits.append((True, Atom(p, ys)))
        out.append(Clause(tuple(lits)))
    for f, n in sorted(funs.items()):
        xs = tuple(Var(f"x{i}") for i in range(n))
        ys = tuple(Var(f"y{i}") for i in range(n))
        lits = [(False, Eq(a, b)) for a, b in zip(xs, ys)]
        lits.append((True, Eq(Fn(f, xs), Fn(f, ys))))
        out.append(Clause(tuple(lits)))
    return out


# ---------------------------------------------------------------------------
# Tableau search

class _Search:
    def __init__(self, clauses, config):
        self.clauses = clauses          # list of (Clause, side)
        self.config = config
        self.env = {}
        self.trail = []
        self.counter = [0]
        self.inferences = 0
        self.deadline = time.monotonic() + config.timeout_ms / 1000.0

    def _tick(self):
        self.inferences += 1
        if self.inferences % 64 == 0 and time.monotonic() > self.deadline:
            raise _Timeout
        if self.config.max_inferences is not None \
                and self.inferences > self.config.max_inferences:
            raise _Timeout

    def _undo(self, mark):
        while len(self.trail) > mark:
            del self.env[self.trail.pop()]

    def solve(self, node, path, depth):
        """Yield once for every way to close the subtree at node."""
        self._tick()
        sign, atom = node.literal
        # regularity: an open goal equal to an ancestor literal is pruned
        for anc in path:
            if anc.literal[0] == sign and self._atoms_equal(
                    anc.literal[1], atom):
                return
        # reduction against the complement of an ancestor
        for anc in path:
            if anc.literal[0] != sign:
                mark = len(self.trail)
                if _unify_atoms(anc.literal[1], atom, self.env, self.trail):
                    node.closed_by = anc
                    node.children = []
                    yield True
                    node.closed_by = None
                self._undo(mark)
        if depth <= 0:
            return
        # extension with an input clause
        for idx, (cl, side) in enumerate(self.clauses):
            for i, (ls, la) in enumerate(cl.literals):
                if ls == sign:
                    continue
                self._tick()
                mark = len(self.trail)
                lits = _rename_clause(cl, self.counter)
                if _unify_atoms(lits[i][1], atom, self.env, self.trail):
                    children = [TableauNode(l, side, clause_index=idx)
                                for l in lits]
                    children[i].closed_by = node
                    node.children = children
                    rest = [c for j, c in enumerate(children) if j != i]
                    yield from self.solve_all(rest, path + [node],
                                              depth - 1)
                    node.children = []
                self._undo(mark)

    def solve_all(self, goals, path, depth):
        if not goals:
            yield True
            return
        first, rest = goals[0], goals[1:]
        for _ in self.solve(first, path, depth):
            yield from self.solve_all(rest, path, depth)

    def _atoms_equal(self, a, b):
        if isinstance(a, Eq) != isinstance(b, Eq):
            return False
        if isinstance(a, Atom) and (a.pred != b.pred
                                    or len(a.args) != len(b.args)):
            return False
        return all(self._teq(x, y)
                   for x, y in zip(_atom_terms(a), _atom_terms(b)))

    def _teq(self, a, b):
        a = _deref(a, self.env)
        b = _deref(b, self.env)
        if isinstance(a, Var) or isinstance(b, Var):
            return isinstance(a, Var) and isinstance(b, Var) \
                and a.name == b.name
        return a.functor == b.functor and len(a.args) == len(b.args) \
            and all(self._teq(x, y) for x, y in zip(a.args, b.args))


def _start_order(clauses):
    """Start clause preference: right-side clauses (from the negated
    goal) first, then all-negative clauses, then the rest."""
    def key(item):
        idx, (cl, side) = item
        all_neg = all(not s for s, _ in cl.literals)
        return (0 if side == "right" else 1, 0 if all_neg else 1, idx)
    return [i for i, _ in sorted(enumerate(clauses), key=key)]


def prove_clausal(clauses, config: ProverConfig | None = None
                  ) -> ProofResult:
    """Search for a closed tableau refuting the labeled clause list."""
    if config is None:
        config = ProverConfig()
    t0 = time.monotonic()
    clauses = list(clauses)
    if any(len(c) == 0 for c, _ in clauses):
        # the empty clause is already a refutation
        root = TableauNode(None, None)
        side = next(s for c, s in clauses if len(c) == 0)
        root.children = []
        res = ProofResult(True, root, 0, 0, 0.0, "empty clause", clauses)
        return res
    search = _Search(clauses, config)
    order = _start_order(clauses)
    try:
        for depth in range(1, config.max_depth + 1):
            for idx in order:
                cl, side = clauses[idx]
                lits = _rename_clause(cl, search.counter)
                root = TableauNode(None, None, clause_index=idx)
                root.children = [TableauNode(l, side, clause_index=idx)
                                 for l in lits]
                try:
                    next(search.solve_all(root.children, [], depth))
                except StopIteration:
                    continue
                _ground_tableau(root, search.env, clauses)
                ms = (time.monotonic() - t0) * 1000
                return ProofResult(True, root, depth, search.inferences,
                                   ms, "proved", clauses)
    except _Timeout:
        ms = (time.monotonic() - t0) * 1000
        return ProofResult(False, None, None, search.inferences, ms,
                           "timeout", clauses)
    ms = (time.monotonic() - t0) * 1000
    return ProofResult(False, None, None, search.inferences, ms,
                       "depth bound exhausted", clauses)


GROUND_PREFIX = "c_"


def _ground_tableau(root, env, clauses):
    """Instantiate the closed tableau with the final bindings; search
    variables left unbound become fresh constants named c_*."""
    ground = {}

    def gt(t):
        t = _deref(t, env)
        if isinstance(t, Var):
            if t.name not in ground:
                ground[t.name] = Fn(f"{GROUND_PREFIX}{len(ground) + 1}")
            return ground[t.name]
        return Fn(t.functor, tuple(gt(a) for a in t.args))

    for n in root.nodes():
        if n.literal is None:
            continue
        s, a = n.literal
        if isinstance(a, Eq):
            n.literal = (s, Eq(gt(a.lhs), gt(a.rhs)))
        else:
            n.literal = (s, Atom(a.pred, tuple(gt(t) for t in a.args)))


def check_tableau(root: TableauNode, clauses) -> bool:
    """Independent structural soundness check of a closed tableau:
    every inner node's children instantiate an input clause and every
    leaf is closed against a complementary ancestor."""
    from .preprocess import match_lit

    def check(node, ancestors):
        if node.children:
            idx = node.children[0].clause_index
            if idx is None or not 0 <= idx < len(clauses):
                return False
            cl, side = clauses[idx]
            if len(cl.literals) != len(node.children):
                return False
            theta = {}
            for pat, child in zip(cl.literals, node.children):
                if child.side != side:
                    return False
                if not match_lit(pat, child.literal, theta):
                    return False
            nxt = ancestors if node.literal is None else ancestors + [node]
            return all(check(c, nxt) for c in node.children)
        if node.literal is None:
            # childless root: sound exactly when an input clause is empty
            return not ancestors and any(not c.literals for c, _ in clauses)
        anc = node.closed_by
        if anc is None or not any(anc is x for x in ancestors):
            return False
        s, a = node.literal
        ts, ta = anc.literal
        return ts != s and ta == a

    return check(root, [])


# ---------------------------------------------------------------------------
# Formula-level proving

def reduce_so_universal(f: Formula, ctx: Context | None = None) -> Formula:
    """Eliminate second-order quantifiers that do not affect validity:
    positive universal and negative existential predicate quantifiers
    are dropped after renaming the bound predicates fresh."""
    if ctx is None:
        ctx = Context()
    ctx.reserve_formula(f)

    def walk(g, pol):
        if isinstance(g, (Atom, Eq, Truth, Falsity)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.arg, -pol))
        if isinstance(g, And):
            return And(tuple(walk(a, pol) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(walk(a, pol) for a in g.args))
        if isinstance(g, Implies):
            return Implies(walk(g.lhs, -pol), walk(g.rhs, pol))
        if isinstance(g, Iff):
            lhs, rhs = walk(g.lhs, 0), walk(g.rhs, 0)
            if not (is_first_order(lhs) and is_first_order(rhs)):
                raise ProverError(
                    "second-order quantifier under an equivalence")
            return Iff(lhs, rhs)
        if isinstance(g, (ForAll, Exists)):
            return type(g)(g.vars, walk(g.body, pol))
        if isinstance(g, (ForAll2, Exists2)):
            reducible = (isinstance(g, ForAll2) and pol == 1) or \
                        (isinstance(g, Exists2) and pol == -1)
            if not reducible or pol == 0:
                raise ProverError(
                    "irreducible second-order quantifier for validity")
            body = g.body
            arities = predicate_arities(body)
            for p in g.preds:
                fresh = ctx.fresh_pred()
                arity = p.arity
                if arity is None:
                    az = arities.get(p.name, set())
                    arity = next(iter(az)) if len(az) == 1 else None
                body = substitute_predicate(body, PredSpec(p.name, arity),
                                            fresh)
            return walk(body, pol)
        raise ProverError(f"cannot reduce {g!r}")

    return walk(f, 1)


def _prepare_clauses(f: Formula, side: str, ctx: Context):
    """Clauses of f (not negated) with a side label."""
    cf = clausify(f, "equivalence", ctx)
    return [(c, side) for c in cf.clauses]


def prove(f: Formula, config: ProverConfig | None = None) -> ProofResult:
    """Attempt to prove that f is valid by refuting its negation."""
    ctx = Context()
    ctx.reserve_formula(f)
    if not is_first_order(f):
        f = reduce_so_universal(f, ctx)
    clauses = _prepare_clauses(neg(f), "left", ctx)
    clauses += [(c, "left") for c in equality_axioms(clauses)]
    return prove_clausal(clauses, config)


def prove_implication(left: Formula, right: Formula,
                      config: ProverConfig | None = None) -> ProofResult:
    """Refute left ∧ ¬right with side labels for interpolation."""
    ctx = Context()
    ctx.reserve_formula(left)
    ctx.reserve_formula(right)
    clauses = _prepare_clauses(left, "left", ctx)
    clauses += _prepare_clauses(neg(right), "right", ctx)
    eqax = equality_axioms(clauses)
    if eqax:
        left_eq = any(isinstance(a, Eq) for c, s in clauses if s == "left"
                      for _, a in c.literals)
        clauses += [(c, "left" if left_eq else "right") for c in eqax]
    return prove_clausal(clauses, config)


# ---------------------------------------------------------------------------
# Finite model search

@dataclass
class Model:
    size: int
    functions: dict   # (name, arity) -> {args tuple: element}
    predicates: dict  # (name, arity) -> set of args tuples

    def eval_term(self, t, env):
        if isinstance(t, Var):
            return env[t.name]
        args = tuple(self.eval_term(a, env) for a in t.args)
        return self.functions[(t.functor, len(t.args))][args]

    def eval(self, f, env=None):
        env = {} if env is None else env
        return self._ev(f, env)

    def _ev(self, f, env):
        if isinstance(f, Truth):
            return True
        if isinstance(f, Falsity):
            return False
        if isinstance(f, Atom):
            args = tuple(self.eval_term(a, env) for a in f.args)
            return args in self.predicates[(f.pred, len(f.args))]
        if isinstance(f, Eq):
            return self.eval_term(f.lhs, env) == self.eval_term(f.rhs, env)
        if isinstance(f, Not):
            return not self._ev(f.arg, env)
        if isinstance(f, And):
            return all(self._ev(a, env) for a in f.args)
        if isinstance(f, Or):
            return any(self._ev(a, env) for a in f.args)
        if isinstance(f, Implies):
            return (not self._ev(f.lhs, env)) or self._ev(f.rhs, env)
        if isinstance(f, Iff):
            return self._ev(f.lhs, env) == self._ev(f.rhs, env)
        if isinstance(f, (ForAll, Exists)):
            dom = range(1, self.size + 1)
            combos = itertools.product(dom, repeat=len(f.vars))
            test = all if isinstance(f, ForAll) else any
            return test(
                self._ev(f.body, {**env, **dict(zip(f.vars, vals))})
                for vals in combos)
        raise ProverError(f"cannot evaluate {f!r} in a finite model")

    def describe(self):
        lines = [f"domain size {self.size}"]
        for (name, ar), tbl in sorted(self.functions.items()):
            if ar == 0:
                lines.append(f"  {name} = {tbl[()]}")
            else:
                ent = ", ".join(f"{name}({','.join(map(str, k))})={v}"
                                for k, v in sorted(tbl.items()))
                lines.append(f"  {ent}")
        for (name, ar), rel in sorted(self.predicates.items()):
            if ar == 0:
                lines.append(f"  {name} = {'true' if () in rel else 'false'}")
            else:
                ent = sorted(rel)
                lines.append(f"  {name} = {{"
                             + ", ".join(f"({','.join(map(str, k))})"
                                         for k in ent) + "}")
        return "\n".join(lines)


MODEL_SEARCH_CAP = 2_000_000


def find_countermodel(f: Formula, max_size: int = 4,
                      timeout_ms: int = 5000) -> Model | None:
    """Search small finite interpretations falsifying f (free variables
    are read universally)."""
    if not is_first_order(f):
        f = reduce_so_universal(f)
    from .formula import free_vars
    fv = sorted(free_vars(f))
    g = f
    for v in reversed(fv):
        g = ForAll((v,), g)
    preds = {}
    funs = {}
    for o in free_symbols(g):
        if o.kind == "predicate":
            preds[(o.name, o.arity)] = None
        else:
            funs[(o.name, o.arity)] = None
    uses_eq = _uses_eq(g)
    deadline = time.monotonic() + timeout_ms / 1000.0
    for n in range(1, max_size + 1):
        dom = list(range(1, n + 1))
        fun_spaces = []
        for (name, ar) in sorted(funs):
            keys = list(itertools.product(dom, repeat=ar))
            fun_spaces.append(((name, ar), keys))
        pred_spaces = []
        for (name, ar) in sorted(preds):
            keys = list(itertools.product(dom, repeat=ar))
            pred_spaces.append(((name, ar), keys))
        count = 1
        for _, keys in fun_spaces:
            count *= n ** len(keys)
        for _, keys in pred_spaces:
            count *= 2 ** len(keys)
        if count > MODEL_SEARCH_CAP:
            return None
        for fun_choice in itertools.product(
                *(itertools.product(dom, repeat=len(keys))
                  for _, keys in fun_spaces)):
            functions = {}
            for ((name, ar), keys), vals in zip(fun_spaces, fun_choice):
                functions[(name, ar)] = dict(zip(keys, vals))
            for pred_choice in itertools.product(
                    *(itertools.product((False, True), repeat=len(keys))
                      for _, keys in pred_spaces)):
                if time.monotonic() > deadline:
                    return None
                predicates = {}
                for ((name, ar), keys), vals in zip(pred_spaces,
                                                    pred_choice):
                    predicates[(name, ar)] = {
                        k for k, v in zip(keys, vals) if v}
                m = Model(n, functions, predicates)
                if not m.eval(g):
                    return m
    return None


def _uses_eq(f):
    if isinstance(f, Eq):
        return True
    if isinstance(f, (Atom, Truth, Falsity)):
        return False
    if isinstance(f, Not):
        return _uses_eq(f.arg)
    if isinstance(f, (And, Or)):
        return any(_uses_eq(a) for a in f.args)
    if isinstance(f, (Implies, Iff)):
        return _uses_eq(f.lhs) or _uses_eq(f.rhs)
    if isinstance(f, (ForAll, Exists, ForAll2, Exists2)):
        return _uses_eq(f.body)
    return False


@dataclass
class ValidationResult:
    status: str                 # 'valid' | 'invalid' | 'unknown'
    proof: ProofResult | None = None
    model: Model | None = None


def validate(f: Formula, config: ProverConfig | None = None,
             model_size: int = 3) -> ValidationResult:
    """Three-valued validity check: quick countermodel search, then
    proof search."""
    if config is None:
        config = ProverConfig()
    m = find_countermodel(f, max_size=model_size,
                          timeout_ms=min(max(config.timeout_ms // 2, 100),
                                         1000))
    if m is not None:
        return ValidationResult("invalid", model=m)
    r = prove(f, config)
    if r.proved:
        return ValidationResult("valid", proof=r)
    return ValidationResult("unknown", proof=r)
