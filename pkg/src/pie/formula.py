"""Core term/formula data model and pure structural operations.

Formulas and terms are immutable; every operation returns a new value.
Fresh-symbol generation goes through an explicit Context object so that
concurrent jobs can each own their own counter.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class FormulaError(Exception):
    pass


# ---------------------------------------------------------------------------
# Terms

class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __repr__(self):
        return f"Var({self.name})"


@dataclass(frozen=True)
class Fn(Term):
    """Compound term; constants are zero-arity compounds."""
    functor: str
    args: tuple = ()

    def __post_init__(self):
        if not self.functor:
            raise FormulaError("empty functor name")

    def __repr__(self):
        if not self.args:
            return f"Fn({self.functor})"
        return f"Fn({self.functor}, {list(self.args)})"


# ---------------------------------------------------------------------------
# Formulas

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    args: tuple = ()


@dataclass(frozen=True)
class Eq(Formula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Truth(Formula):
    pass


@dataclass(frozen=True)
class Falsity(Formula):
    pass


TRUE = Truth()
FALSE = Falsity()


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class PredSpec:
    name: str
    arity: int | None = None


@dataclass(frozen=True)
class ForAll(Formula):
    vars: tuple  # of str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    vars: tuple
    body: Formula


@dataclass(frozen=True)
class ForAll2(Formula):
    preds: tuple  # of PredSpec
    body: Formula


@dataclass(frozen=True)
class Exists2(Formula):
    preds: tuple
    body: Formula


@dataclass(frozen=True)
class Lambda(Formula):
    params: tuple  # of str
    body: Formula


@dataclass(frozen=True)
class MacroCall(Formula):
    name: str
    args: tuple  # of Formula | Term | tuple


@dataclass(frozen=True)
class LambdaApp(Formula):
    head: Formula  # Lambda
    args: tuple  # of Term


QUANTIFIERS = (ForAll, Exists)
SO_QUANTIFIERS = (ForAll2, Exists2)


def conj(items) -> Formula:
    """N-ary conjunction, flattened, with truth-constant absorption."""
    out = []
    for f in items:
        if isinstance(f, And):
            out.extend(f.args)
        elif isinstance(f, Falsity):
            return FALSE
        elif isinstance(f, Truth):
            continue
        else:
            out.append(f)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(items) -> Formula:
    out = []
    for f in items:
        if isinstance(f, Or):
            out.extend(f.args)
        elif isinstance(f, Truth):
            return TRUE
        elif isinstance(f, Falsity):
            continue
        else:
            out.append(f)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def neg(f: Formula) -> Formula:
    if isinstance(f, Not):
        return f.arg
    if isinstance(f, Truth):
        return FALSE
    if isinstance(f, Falsity):
        return TRUE
    return Not(f)


def forall(vars, body) -> Formula:
    vars = tuple(vars)
    return ForAll(vars, body) if vars else body


def exists(vars, body) -> Formula:
    vars = tuple(vars)
    return Exists(vars, body) if vars else body


# ---------------------------------------------------------------------------
# Fresh-symbol context

class Context:
    """Monotone fresh-name source plus the last-result slot.

    Generated names skip anything registered as in use, so fresh symbols
    never collide with the vocabulary of formulas under processing.
    """

    def __init__(self, used=()):
        self.used = set(used)
        self.last_result = None

    def reserve(self, names):
        self.used.update(names)

    def reserve_formula(self, f):
        self.used.update(all_names(f))

    def _fresh(self, base):
        if base not in self.used:
            self.used.add(base)
            return base
        i = 1
        while f"{base}{i}" in self.used:
            i += 1
        name = f"{base}{i}"
        self.used.add(name)
        return name

    def fresh_pred(self, base="q"):
        return self._fresh(base)

    def fresh_var(self, base="x"):
        return self._fresh(base)

    def fresh_skolem(self):
        i = 1
        while f"sk{i}" in self.used:
            i += 1
        name = f"sk{i}"
        self.used.add(name)
        return name


# ---------------------------------------------------------------------------
# Vocabulary

@dataclass(frozen=True)
class Occ:
    """A free symbol occurrence summary with merged polarity."""
    name: str
    kind: str    # 'predicate' | 'function'
    arity: int
    polarity: str  # 'pos' | 'neg' | 'both'


def _merge_pol(a, b):
    return a if a == b else "both"


def _pol_name(p):
    return "pos" if p > 0 else ("neg" if p < 0 else "both")


def free_symbols(f: Formula) -> frozenset:
    """Every predicate and function/constant symbol not bound by a
    quantifier or lambda in f, with predicate polarity under NNF
    conventions."""
    acc = {}

    def note(name, kind, arity, pol):
        key = (name, kind, arity)
        p = _pol_name(pol) if kind == "predicate" else "both"
        if key in acc:
            acc[key] = _merge_pol(acc[key], p)
        else:
            acc[key] = p

    def walk_term(t, bound_vars):
        if isinstance(t, Var):
            if t.name not in bound_vars:
                note(t.name, "function", 0, 0)
        else:
            if t.functor not in bound_vars or t.args:
                note(t.functor, "function", len(t.args), 0)
            for a in t.args:
                walk_term(a, bound_vars)

    def walk(g, pol, bound_vars, bound_preds):
        if isinstance(g, Atom):
            if g.pred not in bound_preds:
                note(g.pred, "predicate", len(g.args), pol)
            for a in g.args:
                walk_term(a, bound_vars)
        elif isinstance(g, Eq):
            walk_term(g.lhs, bound_vars)
            walk_term(g.rhs, bound_vars)
        elif isinstance(g, (Truth, Falsity)):
            pass
        elif isinstance(g, Not):
            walk(g.arg, -pol, bound_vars, bound_preds)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a, pol, bound_vars, bound_preds)
        elif isinstance(g, Implies):
            walk(g.lhs, -pol, bound_vars, bound_preds)
            walk(g.rhs, pol, bound_vars, bound_preds)
        elif isinstance(g, Iff):
            walk(g.lhs, 0, bound_vars, bound_preds)
            walk(g.rhs, 0, bound_vars, bound_preds)
        elif isinstance(g, (ForAll, Exists)):
            walk(g.body, pol, bound_vars | set(g.vars), bound_preds)
        elif isinstance(g, (ForAll2, Exists2)):
            walk(g.body, pol, bound_vars,
                 bound_preds | {p.name for p in g.preds})
        elif isinstance(g, Lambda):
            walk(g.body, pol, bound_vars | set(g.params), bound_preds)
        elif isinstance(g, LambdaApp):
            walk(beta_reduce(g), pol, bound_vars, bound_preds)
        elif isinstance(g, MacroCall):
            raise FormulaError("free_symbols on unexpanded macro call")
        else:
            raise FormulaError(f"unknown formula node {g!r}")

    walk(f, 1, frozenset(), frozenset())
    return frozenset(Occ(n, k, a, p) for (n, k, a), p in acc.items())


def all_names(f: Formula) -> set:
    """Every symbol name occurring anywhere in f, bound or free."""
    names = set()

    def walk_term(t):
        if isinstance(t, Var):
            names.add(t.name)
        else:
            names.add(t.functor)
            for a in t.args:
                walk_term(a)

    def walk(g):
        if isinstance(g, Atom):
            names.add(g.pred)
            for a in g.args:
                walk_term(a)
        elif isinstance(g, Eq):
            walk_term(g.lhs)
            walk_term(g.rhs)
        elif isinstance(g, (Truth, Falsity)):
            pass
        elif isinstance(g, Not):
            walk(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, (Implies, Iff)):
            walk(g.lhs)
            walk(g.rhs)
        elif isinstance(g, (ForAll, Exists)):
            names.update(g.vars)
            walk(g.body)
        elif isinstance(g, (ForAll2, Exists2)):
            names.update(p.name for p in g.preds)
            walk(g.body)
        elif isinstance(g, Lambda):
            names.update(g.params)
            walk(g.body)
        elif isinstance(g, LambdaApp):
            walk(g.head)
            for a in g.args:
                walk_term(a)
        elif isinstance(g, MacroCall):
            names.add(g.name)
            for a in g.args:
                if isinstance(a, Formula):
                    walk(a)
                elif isinstance(a, Term):
                    walk_term(a)
                elif isinstance(a, tuple):
                    for x in a:
                        if isinstance(x, Formula):
                            walk(x)
                        elif isinstance(x, Term):
                            walk_term(x)
        else:
            raise FormulaError(f"unknown formula node {g!r}")

    walk(f)
    return names


def free_vars_term(t: Term) -> set:
    if isinstance(t, Var):
        return {t.name}
    out = set()
    for a in t.args:
        out |= free_vars_term(a)
    return out


def free_vars(f: Formula) -> set:
    """Names of free first-order variables (Var nodes only)."""
    if isinstance(f, Atom):
        out = set()
        for a in f.args:
            out |= free_vars_term(a)
        return out
    if isinstance(f, Eq):
        return free_vars_term(f.lhs) | free_vars_term(f.rhs)
    if isinstance(f, (Truth, Falsity)):
        return set()
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, (Implies, Iff)):
        return free_vars(f.lhs) | free_vars(f.rhs)
    if isinstance(f, (ForAll, Exists)):
        return free_vars(f.body) - set(f.vars)
    if isinstance(f, (ForAll2, Exists2)):
        return free_vars(f.body)
    if isinstance(f, Lambda):
        return free_vars(f.body) - set(f.params)
    if isinstance(f, LambdaApp):
        out = free_vars(f.head)
        for a in f.args:
            out |= free_vars_term(a)
        return out
    raise FormulaError(f"unknown formula node {f!r}")


# ---------------------------------------------------------------------------
# Substitution

def subst_in_term(t: Term, mapping: dict) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if not t.args:
        return t
    return Fn(t.functor, tuple(subst_in_term(a, mapping) for a in t.args))


def subst_vars(f: Formula, mapping: dict) -> Formula:
    """Capture-avoiding substitution of terms for free variables."""
    mapping = {k: v for k, v in mapping.items()}
    if not mapping:
        return f
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(subst_in_term(a, mapping) for a in f.args))
    if isinstance(f, Eq):
        return Eq(subst_in_term(f.lhs, mapping), subst_in_term(f.rhs, mapping))
    if isinstance(f, (Truth, Falsity)):
        return f
    if isinstance(f, Not):
        return Not(subst_vars(f.arg, mapping))
    if isinstance(f, And):
        return And(tuple(subst_vars(a, mapping) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(subst_vars(a, mapping) for a in f.args))
    if isinstance(f, Implies):
        return Implies(subst_vars(f.lhs, mapping), subst_vars(f.rhs, mapping))
    if isinstance(f, Iff):
        return Iff(subst_vars(f.lhs, mapping), subst_vars(f.rhs, mapping))
    if isinstance(f, (ForAll, Exists, Lambda)):
        binder = type(f)
        names = f.vars if not isinstance(f, Lambda) else f.params
        inner = {k: v for k, v in mapping.items() if k not in names}
        if not inner:
            return f
        # rename bound variables that would capture free vars of the images
        img_vars = set()
        for v in inner.values():
            img_vars |= free_vars_term(v)
        ren = {}
        new_names = []
        for n in names:
            if n in img_vars:
                base, i = n, 1
                fresh = f"{base}{i}"
                taken = img_vars | set(names) | set(inner) | all_names(f.body)
                while fresh in taken:
                    i += 1
                    fresh = f"{base}{i}"
                ren[n] = Var(fresh)
                new_names.append(fresh)
            else:
                new_names.append(n)
        body = subst_vars(f.body, ren) if ren else f.body
        body = subst_vars(body, inner)
        if isinstance(f, Lambda):
            return Lambda(tuple(new_names), body)
        return binder(tuple(new_names), body)
    if isinstance(f, (ForAll2, Exists2)):
        return type(f)(f.preds, subst_vars(f.body, mapping))
    if isinstance(f, LambdaApp):
        return LambdaApp(subst_vars(f.head, mapping),
                         tuple(subst_in_term(a, mapping) for a in f.args))
    raise FormulaError(f"cannot substitute in {f!r}")


def beta_reduce(app: LambdaApp) -> Formula:
    """Capture-avoiding beta reduction of a lambda application."""
    head = app.head
    if not isinstance(head, Lambda):
        raise FormulaError(f"lambda application head is not a lambda: {head!r}")
    if len(head.params) != len(app.args):
        raise FormulaError(
            f"lambda arity mismatch: {len(head.params)} params, "
            f"{len(app.args)} args")
    return subst_vars(head.body, dict(zip(head.params, app.args)))


def apply_lambda(lam: Lambda, args) -> Formula:
    return beta_reduce(LambdaApp(lam, tuple(args)))


def substitute_predicate(f: Formula, p: PredSpec, replacement) -> Formula:
    """Replace every free occurrence of predicate p.

    replacement is a fresh symbol name (str) or a Lambda of matching
    arity; in the Lambda case each atom p(ts) becomes the beta-reduced
    body.
    """
    if isinstance(replacement, Lambda) and p.arity is not None \
            and len(replacement.params) != p.arity:
        raise FormulaError(
            f"arity mismatch replacing {p.name}/{p.arity} by lambda of "
            f"arity {len(replacement.params)}")

    def walk(g, bound_preds):
        if isinstance(g, Atom):
            if g.pred == p.name and g.pred not in bound_preds:
                if p.arity is not None and len(g.args) != p.arity:
                    raise FormulaError(
                        f"arity mismatch: {p.name} used with {len(g.args)} "
                        f"args, expected {p.arity}")
                if isinstance(replacement, Lambda):
                    return apply_lambda(replacement, g.args)
                return Atom(replacement, g.args)
            return g
        if isinstance(g, (Eq, Truth, Falsity)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.arg, bound_preds))
        if isinstance(g, And):
            return And(tuple(walk(a, bound_preds) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(walk(a, bound_preds) for a in g.args))
        if isinstance(g, (Implies, Iff)):
            return type(g)(walk(g.lhs, bound_preds), walk(g.rhs, bound_preds))
        if isinstance(g, (ForAll, Exists)):
            return type(g)(g.vars, walk(g.body, bound_preds))
        if isinstance(g, (ForAll2, Exists2)):
            names = {q.name for q in g.preds}
            if p.name in names:
                return g
            return type(g)(g.preds, walk(g.body, bound_preds | names))
        if isinstance(g, Lambda):
            return Lambda(g.params, walk(g.body, bound_preds))
        if isinstance(g, LambdaApp):
            return walk(beta_reduce(g), bound_preds)
        raise FormulaError(f"cannot substitute predicate in {f!r}")

    return walk(f, frozenset())


# ---------------------------------------------------------------------------
# Negation normal form

def nnf(f: Formula) -> Formula:
    """Negation normal form: negation only on atoms/equalities, no ->/<->.

    Lambda applications are beta-reduced on the way."""

    def pos(g):
        if isinstance(g, (Atom, Eq, Truth, Falsity)):
            return g
        if isinstance(g, Not):
            return negf(g.arg)
        if isinstance(g, And):
            return conj(pos(a) for a in g.args)
        if isinstance(g, Or):
            return disj(pos(a) for a in g.args)
        if isinstance(g, Implies):
            return disj([negf(g.lhs), pos(g.rhs)])
        if isinstance(g, Iff):
            return conj([disj([negf(g.lhs), pos(g.rhs)]),
                         disj([negf(g.rhs), pos(g.lhs)])])
        if isinstance(g, (ForAll, Exists, ForAll2, Exists2)):
            return type(g)(g.vars if hasattr(g, "vars") else g.preds,
                           pos(g.body))
        if isinstance(g, LambdaApp):
            return pos(beta_reduce(g))
        if isinstance(g, MacroCall):
            raise FormulaError("nnf on unexpanded macro call")
        raise FormulaError(f"nnf: unexpected node {g!r}")

    def negf(g):
        if isinstance(g, Atom) or isinstance(g, Eq):
            return Not(g)
        if isinstance(g, Truth):
            return FALSE
        if isinstance(g, Falsity):
            return TRUE
        if isinstance(g, Not):
            return pos(g.arg)
        if isinstance(g, And):
            return disj(negf(a) for a in g.args)
        if isinstance(g, Or):
            return conj(negf(a) for a in g.args)
        if isinstance(g, Implies):
            return conj([pos(g.lhs), negf(g.rhs)])
        if isinstance(g, Iff):
            return conj([disj([pos(g.lhs), pos(g.rhs)]),
                         disj([negf(g.lhs), negf(g.rhs)])])
        if isinstance(g, ForAll):
            return Exists(g.vars, negf(g.body))
        if isinstance(g, Exists):
            return ForAll(g.vars, negf(g.body))
        if isinstance(g, ForAll2):
            return Exists2(g.preds, negf(g.body))
        if isinstance(g, Exists2):
            return ForAll2(g.preds, negf(g.body))
        if isinstance(g, LambdaApp):
            return negf(beta_reduce(g))
        if isinstance(g, MacroCall):
            raise FormulaError("nnf on unexpanded macro call")
        raise FormulaError(f"nnf: unexpected node {g!r}")

    return pos(f)


# ---------------------------------------------------------------------------
# Bound-variable renaming

def rename_bound(f: Formula, avoid=None) -> Formula:
    """Alpha-rename so all bound variables are pairwise distinct and
    distinct from free symbols."""
    taken = set(avoid or ())
    taken |= all_names(f) - _bound_names(f)
    assigned = set()

    def pick(base):
        if base not in taken and base not in assigned:
            assigned.add(base)
            return base
        i = 1
        while f"{base}{i}" in taken or f"{base}{i}" in assigned:
            i += 1
        name = f"{base}{i}"
        assigned.add(name)
        return name

    def walk(g, env):
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(subst_in_term(a, env) for a in g.args))
        if isinstance(g, Eq):
            return Eq(subst_in_term(g.lhs, env), subst_in_term(g.rhs, env))
        if isinstance(g, (Truth, Falsity)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.arg, env))
        if isinstance(g, And):
            return And(tuple(walk(a, env) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(walk(a, env) for a in g.args))
        if isinstance(g, (Implies, Iff)):
            return type(g)(walk(g.lhs, env), walk(g.rhs, env))
        if isinstance(g, (ForAll, Exists)):
            new = [pick(v) for v in g.vars]
            env2 = dict(env)
            env2.update({v: Var(n) for v, n in zip(g.vars, new)})
            return type(g)(tuple(new), walk(g.body, env2))
        if isinstance(g, Lambda):
            new = [pick(v) for v in g.params]
            env2 = dict(env)
            env2.update({v: Var(n) for v, n in zip(g.params, new)})
            return Lambda(tuple(new), walk(g.body, env2))
        if isinstance(g, (ForAll2, Exists2)):
            return type(g)(g.preds, walk(g.body, env))
        if isinstance(g, LambdaApp):
            return LambdaApp(walk(g.head, env),
                             tuple(subst_in_term(a, env) for a in g.args))
        if isinstance(g, MacroCall):
            return g
        raise FormulaError(f"rename_bound: unexpected node {g!r}")

    return walk(f, {})


def _bound_names(f: Formula) -> set:
    out = set()

    def walk(g):
        if isinstance(g, (ForAll, Exists)):
            out.update(g.vars)
            walk(g.body)
        elif isinstance(g, Lambda):
            out.update(g.params)
            walk(g.body)
        elif isinstance(g, (ForAll2, Exists2)):
            walk(g.body)
        elif isinstance(g, Not):
            walk(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, (Implies, Iff)):
            walk(g.lhs)
            walk(g.rhs)
        elif isinstance(g, LambdaApp):
            walk(g.head)

    walk(f)
    return out


# ---------------------------------------------------------------------------
# Misc structural helpers

def is_first_order(f: Formula) -> bool:
    if isinstance(f, (ForAll2, Exists2, Lambda, LambdaApp, MacroCall)):
        return False
    if isinstance(f, (Atom, Eq, Truth, Falsity)):
        return True
    if isinstance(f, Not):
        return is_first_order(f.arg)
    if isinstance(f, (And, Or)):
        return all(is_first_order(a) for a in f.args)
    if isinstance(f, (Implies, Iff)):
        return is_first_order(f.lhs) and is_first_order(f.rhs)
    if isinstance(f, (ForAll, Exists)):
        return is_first_order(f.body)
    return False


def predicate_arities(f: Formula) -> dict:
    """Map predicate name -> set of arities used in f (free or bound)."""
    out = {}

    def walk(g):
        if isinstance(g, Atom):
            out.setdefault(g.pred, set()).add(len(g.args))
        elif isinstance(g, Not):
            walk(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, (Implies, Iff)):
            walk(g.lhs)
            walk(g.rhs)
        elif isinstance(g, (ForAll, Exists, ForAll2, Exists2, Lambda)):
            walk(g.body)
        elif isinstance(g, LambdaApp):
            walk(g.head)

    walk(f)
    return out
