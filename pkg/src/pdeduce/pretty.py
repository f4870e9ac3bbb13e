"""Printer for terms, literals, clauses and programs.

Round-trips with the parser: re-parsing the output yields a variant of
the input with clause ids preserved by order.
"""
from __future__ import annotations

from .terms import Clause, Compound, Conjunction, Literal, Program, Term, Var, list_parts

_INFIX = ("=", "\\=", "=..")


def pp_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name if t.index == 0 else f"{t.name}_{t.index}"
    if t.functor == "[]" and not t.args:
        return "[]"
    if t.functor == "." and len(t.args) == 2:
        items, tail = list_parts(t)
        inner = ",".join(pp_term(x) for x in items)
        if isinstance(tail, Compound) and tail.functor == "[]" and not tail.args:
            return f"[{inner}]"
        return f"[{inner}|{pp_term(tail)}]"
    if not t.args:
        return t.functor
    return f"{t.functor}({','.join(pp_term(a) for a in t.args)})"


def pp_literal(l: Literal) -> str:
    if l.pred in _INFIX and l.arity == 2:
        body = f"{pp_term(l.atom.args[0])} {l.pred} {pp_term(l.atom.args[1])}"
    else:
        body = pp_term(l.atom)
    return body if l.positive else f"\\+ {body}"


def pp_goal(goal: Conjunction) -> str:
    return ", ".join(pp_literal(l) for l in goal)


def pp_clause(c: Clause) -> str:
    head = pp_term(c.head)
    if not c.body:
        return f"{head}."
    return f"{head} :- {pp_goal(c.body)}."


def pp_program(p: Program) -> str:
    lines = [f":- open({name}/{arity})." for name, arity in sorted(p.open_preds)]
    lines += [pp_clause(c) for c in p.clauses]
    return "\n".join(lines) + "\n"
