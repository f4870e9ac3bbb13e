"""Core syntax: terms, literals, conjunctions, clauses, programs.

Terms are variables or compounds; constants are zero-arity compounds so
structural measures (termsize, embedding) treat them uniformly.  Lists
use the standard './2' and '[]' encoding; the parser and printer supply
the ``[a,b|T]`` sugar.  Variable identity is the pair (name, index); the
index comes from a per-run freshness counter and is 0 for source
variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Iterator, Optional, Union

LIST_CONS = "."
LIST_NIL = "[]"

#: predicate names with built-in evaluation rules (reserved in the syntax)
BUILTIN_PREDS = frozenset({"=", "\\=", "=..", "call", "true", "fail"})


@dataclass(frozen=True)
class Var:
    name: str
    index: int = 0

    def __repr__(self) -> str:
        return self.name if self.index == 0 else f"{self.name}_{self.index}"


@dataclass(frozen=True)
class Compound:
    functor: str
    args: tuple["Term", ...] = ()

    def __repr__(self) -> str:
        if not self.args:
            return self.functor
        return f"{self.functor}({','.join(map(repr, self.args))})"


Term = Union[Var, Compound]


@dataclass(frozen=True)
class Literal:
    """A positive or negative call; the atom is stored as a compound."""

    atom: Compound
    positive: bool = True

    @property
    def pred(self) -> str:
        return self.atom.functor

    @property
    def arity(self) -> int:
        return len(self.atom.args)

    @property
    def indicator(self) -> tuple[str, int]:
        return (self.atom.functor, len(self.atom.args))

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __repr__(self) -> str:
        return repr(self.atom) if self.positive else f"\\+ {self.atom!r}"


#: a goal / clause body: ordered literals, () is the empty goal
Conjunction = tuple[Literal, ...]


@dataclass(frozen=True)
class Clause:
    id: int  # position in source, 1-based
    head: Compound
    body: Conjunction = ()

    def __repr__(self) -> str:
        if not self.body:
            return f"{self.head!r}."
        return f"{self.head!r} :- {', '.join(map(repr, self.body))}."


class Program:
    """An ordered set of clauses plus open-predicate annotations.

    ``static_functors`` holds every (functor, arity) pair occurring in the
    clauses, term- and predicate-level alike; functors first created at
    specialisation time (e.g. through ``=..``) fall outside this set and
    are treated as dynamic by the embedding order.
    """

    def __init__(self, clauses: list[Clause], open_preds: frozenset[tuple[str, int]] = frozenset()):
        self.clauses = list(clauses)
        self.open_preds = frozenset(open_preds)
        self._by_pred: dict[tuple[str, int], list[Clause]] = {}
        for c in self.clauses:
            self._by_pred.setdefault((c.head.functor, len(c.head.args)), []).append(c)
        self.static_functors = self._collect_static()
        self._recursive: Optional[frozenset[tuple[str, int]]] = None

    def clauses_for(self, indicator: tuple[str, int]) -> list[Clause]:
        return self._by_pred.get(indicator, [])

    def defines(self, indicator: tuple[str, int]) -> bool:
        return indicator in self._by_pred

    @property
    def predicates(self) -> set[tuple[str, int]]:
        return set(self._by_pred)

    def _collect_static(self) -> frozenset[tuple[str, int]]:
        out: set[tuple[str, int]] = set()
        for c in self.clauses:
            out.add((c.head.functor, len(c.head.args)))
            for t in c.head.args:
                out |= functors_of(t)
            for lit in c.body:
                out.add(lit.indicator)
                for t in lit.atom.args:
                    out |= functors_of(t)
        out |= {(p, n) for p, n in self.open_preds}
        out |= {(b, n) for b in BUILTIN_PREDS for n in (0, 1, 2)}
        return frozenset(out)

    def recursive_preds(self) -> frozenset[tuple[str, int]]:
        """Predicates that can reach themselves through the call graph."""
        if self._recursive is None:
            calls: dict[tuple[str, int], set[tuple[str, int]]] = {}
            for c in self.clauses:
                key = (c.head.functor, len(c.head.args))
                calls.setdefault(key, set()).update(l.indicator for l in c.body)

            def reaches_self(p: tuple[str, int]) -> bool:
                seen: set[tuple[str, int]] = set()
                stack = list(calls.get(p, ()))
                while stack:
                    q = stack.pop()
                    if q == p:
                        return True
                    if q not in seen:
                        seen.add(q)
                        stack.extend(calls.get(q, ()))
                return False

            self._recursive = frozenset(p for p in calls if reaches_self(p))
        return self._recursive

    def __repr__(self) -> str:
        return f"Program({len(self.clauses)} clauses)"


class FreshVars:
    """Monotone per-run variable freshness counter; indices never recur."""

    def __init__(self, start: int = 1):
        self._counter = count(start)

    def next_index(self) -> int:
        return next(self._counter)

    def rename(self, name: str) -> Var:
        return Var(name, next(self._counter))


# ---------------------------------------------------------------------------
# structural helpers


def subterms(t: Term) -> Iterator[Term]:
    """Yield t and all its subterms, pre-order."""
    stack = [t]
    while stack:
        x = stack.pop()
        yield x
        if isinstance(x, Compound):
            stack.extend(reversed(x.args))


def functors_of(t: Term) -> set[tuple[str, int]]:
    return {(x.functor, len(x.args)) for x in subterms(t) if isinstance(x, Compound)}


Expr = Union[Term, Literal, Conjunction, Clause]


def vars_of(e: Expr) -> list[Var]:
    """All variables of an expression, in first-occurrence order."""
    seen: dict[Var, None] = {}

    def walk(t: Term) -> None:
        if isinstance(t, Var):
            seen.setdefault(t)
        else:
            for a in t.args:
                walk(a)

    for t in _toplevel_terms(e):
        walk(t)
    return list(seen)


def _toplevel_terms(e: Expr) -> Iterator[Term]:
    if isinstance(e, (Var, Compound)):
        yield e
    elif isinstance(e, Literal):
        yield from e.atom.args
    elif isinstance(e, Clause):
        yield from e.head.args
        for lit in e.body:
            yield from lit.atom.args
    else:  # conjunction
        for lit in e:
            yield from lit.atom.args


def is_ground(e: Expr) -> bool:
    return not vars_of(e)


def termsize(e: Expr) -> int:
    """Number of function and constant symbols in argument positions.

    Predicate symbols and variables contribute 0; for a bare term the
    root functor counts (it sits in an argument position of its context).
    """

    def size(t: Term) -> int:
        if isinstance(t, Var):
            return 0
        return 1 + sum(size(a) for a in t.args)

    if isinstance(e, (Var, Compound)):
        return size(e)
    return sum(size(t) for t in _toplevel_terms(e))


# ---------------------------------------------------------------------------
# one-way matching and the instance ordering


def match(pattern: Expr, target: Expr, bindings: Optional[dict[Var, Term]] = None) -> Optional[dict[Var, Term]]:
    """One-way match: bindings th with pattern*th == target, or None.

    Only pattern variables bind; repeated pattern variables must match
    identical subterms.  Works across terms, literals and conjunctions of
    equal length.
    """
    b = dict(bindings) if bindings else {}
    pairs = _pair_up(pattern, target)
    if pairs is None:
        return None
    stack = list(pairs)
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            if p in b:
                if b[p] != t:
                    return None
            else:
                b[p] = t
        elif isinstance(t, Compound) and p.functor == t.functor and len(p.args) == len(t.args):
            stack.extend(zip(p.args, t.args))
        else:
            return None
    return b


def _pair_up(a: Expr, b: Expr) -> Optional[list[tuple[Term, Term]]]:
    """Align two expressions of the same category into term pairs."""
    if isinstance(a, (Var, Compound)) and isinstance(b, (Var, Compound)):
        return [(a, b)]
    if isinstance(a, Literal) and isinstance(b, Literal):
        if a.positive != b.positive or a.atom.functor != b.atom.functor or a.arity != b.arity:
            return None
        return list(zip(a.atom.args, b.atom.args))
    if isinstance(a, tuple) and isinstance(b, tuple):
        if len(a) != len(b):
            return None
        out: list[tuple[Term, Term]] = []
        for la, lb in zip(a, b):
            pairs = _pair_up(la, lb)
            if pairs is None:
                return None
            out.extend(pairs)
        return out
    return None


def instance_check(a: Expr, b: Expr) -> str:
    """Relate a and b in the instance ordering.

    Returns one of 'variant', 'strict_instance' (a is an instance of b),
    'strict_generalization' (b is an instance of a), 'incomparable'.
    """
    a_of_b = match(b, a) is not None
    b_of_a = match(a, b) is not None
    if a_of_b and b_of_a:
        return "variant"
    if a_of_b:
        return "strict_instance"
    if b_of_a:
        return "strict_generalization"
    return "incomparable"


# ---------------------------------------------------------------------------
# canonical variable numbering (variant keys, label normalisation)

_CANON_NAMES = [chr(c) for c in range(ord("A"), ord("Z") + 1)]


def canon_var(i: int) -> Var:
    name = _CANON_NAMES[i % 26] + ("" if i < 26 else str(i // 26))
    return Var(name, 0)


def canonical(e: Expr) -> Expr:
    """Rename variables to A, B, C, ... in first-occurrence order.

    Two expressions are variants iff their canonical forms are equal.
    """
    mapping = {v: canon_var(i) for i, v in enumerate(vars_of(e))}

    def walk(t: Term) -> Term:
        if isinstance(t, Var):
            return mapping[t]
        if not t.args:
            return t
        return Compound(t.functor, tuple(walk(a) for a in t.args))

    def walk_lit(l: Literal) -> Literal:
        return Literal(Compound(l.atom.functor, tuple(walk(a) for a in l.atom.args)), l.positive)

    if isinstance(e, (Var, Compound)):
        return walk(e)
    if isinstance(e, Literal):
        return walk_lit(e)
    if isinstance(e, Clause):
        return Clause(e.id, walk(e.head), tuple(walk_lit(l) for l in e.body))  # type: ignore[arg-type]
    return tuple(walk_lit(l) for l in e)


# list sugar helpers -------------------------------------------------------

NIL = Compound(LIST_NIL)


def mklist(items: list[Term], tail: Term = NIL) -> Term:
    out = tail
    for x in reversed(items):
        out = Compound(LIST_CONS, (x, out))
    return out


def list_parts(t: Term) -> tuple[list[Term], Term]:
    """Split a './2' chain into (elements, tail); tail is [] when proper."""
    items: list[Term] = []
    while isinstance(t, Compound) and t.functor == LIST_CONS and len(t.args) == 2:
        items.append(t.args[0])
        t = t.args[1]
    return items, t


def atom(functor: str, *args: Term) -> Compound:
    return Compound(functor, tuple(args))


def lit(functor: str, *args: Term, positive: bool = True) -> Literal:
    return Literal(Compound(functor, tuple(args)), positive)
