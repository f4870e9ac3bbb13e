"""Residual program construction: renaming, filtering, folding, interfaces.

Every specialised unit (an atom or a conjunction) may receive a fresh
predicate symbol, which makes the unit set independent by construction.
With filtering on, the fresh predicate keeps one argument per distinct
variable of the unit; constants and functors disappear into the
definition.  With filtering off, only the renaming needed for
independence is performed and heads keep their original shape.
Conjunction units are always folded to fresh atoms (a clause head cannot
be a conjunction).

Interface clauses define each renamed atomic unit's original call form
in terms of the renamed predicate, so residual programs answer the same
goals as the original without any query rewriting.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .parser import parse_goal, parse_term
from .pretty import pp_goal, pp_literal
from .sld import Resultant
from .terms import (
    BUILTIN_PREDS,
    Clause,
    Compound,
    Conjunction,
    Literal,
    Program,
    Var,
    match,
    vars_of,
)
from .unify import Subst, apply, rename_apart, unify
from .terms import FreshVars


class ClosednessError(Exception):
    """A body literal is not an instance of any specialised unit."""


@dataclass(frozen=True)
class RenameEntry:
    label: Conjunction  # canonical form
    new_pred: Optional[str]  # None: original name kept (independent already)
    params: tuple[Var, ...]  # distinct label variables, first-occurrence order
    filtered: bool

    def folded(self, theta: Subst) -> Literal:
        """The folded call for an instance label*theta of this unit."""
        if self.new_pred is None:
            return Literal(apply(self.label[0].atom, theta))
        if self.filtered:
            args = tuple(apply(v, theta) for v in self.params)
        else:
            args = tuple(apply(a, theta) for a in self.label[0].atom.args)
        return Literal(Compound(self.new_pred, args))

    @property
    def atomic(self) -> bool:
        return len(self.label) == 1


class RenameMap:
    def __init__(self, entries: list[RenameEntry]):
        self.entries = entries
        self._by_len: dict[int, list[RenameEntry]] = {}
        for e in entries:
            self._by_len.setdefault(len(e.label), []).append(e)
        self.lengths = sorted(self._by_len, reverse=True)

    def fold_window(self, window: Conjunction) -> Optional[Literal]:
        """Fold a whole window into a renamed call, if some unit covers it."""
        for e in self._by_len.get(len(window), ()):
            theta = match(e.label, window)
            if theta is not None:
                return e.folded(theta)
        return None

    def fold_conjunction(self, body: Conjunction, open_preds=frozenset(), strict: bool = True) -> Conjunction:
        """Leftmost-longest folding of a goal or clause body.

        Builtin and open-predicate literals pass through untouched;
        negative literals fold through their atoms.  With strict on, a
        remaining unmatched literal raises ClosednessError.
        """
        out: list[Literal] = []
        i = 0
        while i < len(body):
            lit = body[i]
            if lit.pred in BUILTIN_PREDS or lit.indicator in open_preds:
                out.append(lit)
                i += 1
                continue
            folded = None
            if lit.positive:
                for length in self.lengths:
                    if i + length <= len(body):
                        folded = self.fold_window(body[i : i + length])
                        if folded is not None:
                            out.append(folded)
                            i += length
                            break
            else:
                single = self.fold_window((Literal(lit.atom),))
                if single is not None:
                    folded = single
                    out.append(Literal(single.atom, positive=False))
                    i += 1
            if folded is None:
                if not strict:
                    out.append(lit)
                    i += 1
                    continue
                raise ClosednessError(
                    f"literal {pp_literal(lit)!r} is not an instance of any specialised unit"
                )
        return tuple(out)

    def to_json(self) -> str:
        entries = []
        for e in self.entries:
            entries.append(
                {
                    "filtered": e.filtered,
                    "head": pp_literal(e.folded({})),
                    "label": pp_goal(e.label),
                }
            )
        return json.dumps({"entries": entries, "v": 1}, sort_keys=True, indent=1)

    @staticmethod
    def from_json(text: str) -> "RenameMap":
        data = json.loads(text)
        entries = []
        for item in data["entries"]:
            label = parse_goal(item["label"])
            head = parse_goal(item["head"])[0]
            same = head.atom == label[0].atom if len(label) == 1 else False
            params = tuple(vars_of(label)) if item["filtered"] else ()
            entries.append(
                RenameEntry(
                    label,
                    None if same else head.pred,
                    params if item["filtered"] else tuple(),
                    item["filtered"],
                )
            )
        return RenameMap(entries)


def _dependent(a: Conjunction, b: Conjunction, fresh: FreshVars) -> bool:
    """Do two atomic units have a common instance?"""
    if len(a) != 1 or len(b) != 1:
        return False
    b_renamed, _ = rename_apart(b[0], fresh)
    return unify(a[0], b_renamed) is not None


def filter_and_rename(
    units: list[tuple[Conjunction, list[Resultant]]],
    filtering: bool = True,
    open_preds: frozenset = frozenset(),
) -> tuple[Program, "RenameMap"]:
    """Turn specialised units and their resultants into a residual program."""
    fresh = FreshVars()
    per_pred: dict[str, int] = {}
    conj_counter = 0
    entries: list[RenameEntry] = []
    kept_original: list[Conjunction] = []

    for label, _res in units:
        params = tuple(vars_of(label))
        if len(label) > 1:
            conj_counter += 1
            entries.append(RenameEntry(label, f"conj__{conj_counter}", params, True))
            continue
        pred = label[0].pred
        if not filtering and not any(_dependent(label, k, fresh) for k in kept_original):
            kept_original.append(label)
            entries.append(RenameEntry(label, None, params, False))
            continue
        per_pred[pred] = per_pred.get(pred, 0) + 1
        entries.append(RenameEntry(label, f"{pred}__{per_pred[pred]}", params, filtering))

    rename_map = RenameMap(entries)
    clauses: list[Clause] = []
    for (label, res), entry in zip(units, entries):
        for r in res:
            theta = match(label, r.head)
            if theta is None:
                raise AssertionError(f"resultant head {pp_goal(r.head)} does not match its unit")
            head_lit = entry.folded(theta)
            body = rename_map.fold_conjunction(r.body, open_preds)
            clauses.append(Clause(len(clauses) + 1, head_lit.atom, body))

    interface = build_interface(rename_map, start_id=len(clauses) + 1)
    return Program(clauses + interface, open_preds), rename_map


def build_interface(rename_map: RenameMap, start_id: int = 1) -> list[Clause]:
    """One `original <- renamed` clause per renamed atomic unit."""
    out: list[Clause] = []
    for e in rename_map.entries:
        if not e.atomic or e.new_pred is None:
            continue
        out.append(Clause(start_id + len(out), e.label[0].atom, (e.folded({}),)))
    return out


def emit_program(residual: Program, rename_map: RenameMap) -> str:
    """Render the residual program; the rename map rides along as comments."""
    from .pretty import pp_program

    lines = []
    for e in rename_map.entries:
        if e.new_pred is not None:
            lines.append(f"% {pp_literal(e.folded({}))} == {pp_goal(e.label)}")
    text = pp_program(residual)
    return ("\n".join(lines) + "\n" + text) if lines else text
