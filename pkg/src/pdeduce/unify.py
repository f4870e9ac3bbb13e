"""Substitutions and most general unification.

A substitution is a plain dict mapping Var to Term, kept idempotent:
no value mentions a domain variable, and no variable maps to itself.
``apply`` therefore never needs to chase chains.
"""
from __future__ import annotations

from typing import Optional, Union, overload

from .terms import Clause, Compound, Conjunction, Expr, Literal, Term, Var, _pair_up

Subst = dict[Var, Term]


class CyclicBindingError(Exception):
    """Unification without occurs check produced a cyclic binding."""


def apply(e, s: Subst):
    """Apply a substitution to a term, literal, conjunction or clause."""
    if not s:
        return e
    if isinstance(e, Var):
        return s.get(e, e)
    if isinstance(e, Compound):
        if not e.args:
            return e
        return Compound(e.functor, tuple(apply(a, s) for a in e.args))
    if isinstance(e, Literal):
        return Literal(apply(e.atom, s), e.positive)
    if isinstance(e, Clause):
        return Clause(e.id, apply(e.head, s), tuple(apply(l, s) for l in e.body))
    return tuple(apply(l, s) for l in e)


def compose(s1: Subst, s2: Subst) -> Subst:
    """Composition: apply(e, compose(s1, s2)) == apply(apply(e, s1), s2)."""
    out: Subst = {}
    for v, t in s1.items():
        t2 = apply(t, s2)
        if t2 != v:
            out[v] = t2
    for v, t in s2.items():
        if v not in s1 and t != v:
            out[v] = t
    return out


def restrict(s: Subst, keep: list[Var]) -> Subst:
    return {v: t for v, t in s.items() if v in keep and t != v}


def unify(a: Expr, b: Expr, occurs_check: bool = False) -> Optional[Subst]:
    """Most general unifier of two expressions, or None.

    Literals unify only with equal polarity and predicate; conjunctions
    only at equal length.  The result is idempotent.  With the occurs
    check off (the default, matching common Prolog practice) a genuinely
    cyclic binding raises CyclicBindingError instead of looping.
    """
    pairs = _pair_up(a, b)
    if pairs is None:
        return None
    triangular: Subst = {}

    def walk(t: Term) -> Term:
        while isinstance(t, Var) and t in triangular:
            t = triangular[t]
        return t

    def occurs(v: Var, t: Term) -> bool:
        stack = [t]
        while stack:
            x = walk(stack.pop())
            if x == v:
                return True
            if isinstance(x, Compound):
                stack.extend(x.args)
        return False

    stack = list(pairs)
    while stack:
        s, t = stack.pop()
        s, t = walk(s), walk(t)
        if s == t:
            continue
        if isinstance(s, Var):
            if isinstance(t, Var) and (t.index, t.name) > (s.index, s.name):
                s, t = t, s  # bind the fresher variable: keeps source names
            if occurs_check and occurs(s, t):
                return None
            triangular[s] = t
        elif isinstance(t, Var):
            if occurs_check and occurs(t, s):
                return None
            triangular[t] = s
        elif s.functor == t.functor and len(s.args) == len(t.args):
            stack.extend(zip(s.args, t.args))
        else:
            return None

    # flatten the triangular form into an idempotent substitution
    cache: Subst = {}

    def resolve_var(v: Var, path: frozenset[Var]) -> Term:
        if v in cache:
            return cache[v]
        if v in path:
            raise CyclicBindingError(f"cyclic binding through {v}")
        out = resolve_term(triangular[v], path | {v})
        cache[v] = out
        return out

    def resolve_term(t: Term, path: frozenset[Var]) -> Term:
        if isinstance(t, Var):
            return resolve_var(t, path) if t in triangular else t
        if not t.args:
            return t
        return Compound(t.functor, tuple(resolve_term(a, path) for a in t.args))

    resolved: Subst = {}
    for v in triangular:
        val = resolve_var(v, frozenset())
        if val != v:
            resolved[v] = val
    return resolved


def rename_apart(e, fresh) -> tuple[Expr, Subst]:
    """Variant of e over fresh variables; returns it with the renaming."""
    from .terms import vars_of

    ren: Subst = {v: fresh.rename(v.name) for v in vars_of(e)}
    return apply(e, ren), ren
