"""Most specific generalisation (anti-unification).

The disagreement-pair memo is threaded through the whole expression, so
equal disagreement pairs map to the same fresh variable: msg(p(a,a),
p(c,c)) is p(X,X), and variable sharing survives across the conjuncts of
a conjunction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .terms import Compound, Conjunction, Expr, FreshVars, Literal, Term, Var
from .unify import Subst


class MsgFailure(Exception):
    """The two expressions have no generalisation at this level."""


@dataclass
class MsgResult:
    generalization: Expr
    theta1: Subst  # generalisation -> first input
    theta2: Subst  # generalisation -> second input


def msg(e1: Expr, e2: Expr, fresh: Optional[FreshVars] = None) -> MsgResult:
    """Least general common generalisation of two same-category expressions.

    Raises MsgFailure when the top-level shapes are incompatible: literals
    with different predicate or polarity, conjunctions of different
    length.  Terms always generalise.
    """
    fresh = fresh or FreshVars()
    memo: dict[tuple[Term, Term], Var] = {}

    def gen(a: Term, b: Term) -> Term:
        if a == b:
            return a
        if (
            isinstance(a, Compound)
            and isinstance(b, Compound)
            and a.functor == b.functor
            and len(a.args) == len(b.args)
        ):
            return Compound(a.functor, tuple(gen(x, y) for x, y in zip(a.args, b.args)))
        key = (a, b)
        if key not in memo:
            memo[key] = fresh.rename("G")
        return memo[key]

    def gen_lit(a: Literal, b: Literal) -> Literal:
        if a.positive != b.positive or a.atom.functor != b.atom.functor or a.arity != b.arity:
            raise MsgFailure(f"cannot generalise {a!r} with {b!r}")
        gen_atom = Compound(a.atom.functor, tuple(gen(x, y) for x, y in zip(a.atom.args, b.atom.args)))
        return Literal(gen_atom, a.positive)

    out: Expr
    if isinstance(e1, (Var, Compound)) and isinstance(e2, (Var, Compound)):
        out = gen(e1, e2)
    elif isinstance(e1, Literal) and isinstance(e2, Literal):
        out = gen_lit(e1, e2)
    elif isinstance(e1, tuple) and isinstance(e2, tuple):
        if len(e1) != len(e2):
            raise MsgFailure("conjunctions of different length")
        out = tuple(gen_lit(x, y) for x, y in zip(e1, e2))
    else:
        raise MsgFailure("mixed expression categories")

    theta1 = {v: a for (a, _b), v in memo.items()}
    theta2 = {v: b for (_a, b), v in memo.items()}
    return MsgResult(out, theta1, theta2)
