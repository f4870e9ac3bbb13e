"""Conjunctive specialisation support: splitting and window generalisation.

When a whole conjunction at the global level grows past an ancestor
conjunction, it is split into contiguous slices: the slice best matching
the ancestor (most positions with the same predicate, ties leftmost) is
generalised against it, the rest become independent specialisation
units.  Only contiguous windows are considered; reordering conjuncts
can change termination behaviour and is never done.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .msg import MsgFailure, msg
from .terms import Conjunction, FreshVars, Literal


@dataclass(frozen=True)
class SplitPlan:
    parts: tuple[Conjunction, ...]
    matched_index: int  # which part aligns with the ancestor

    def __post_init__(self) -> None:
        assert self.parts and 0 <= self.matched_index < len(self.parts)


def _signature(l: Literal) -> tuple[str, int, bool]:
    return (l.pred, l.arity, l.positive)


def split_conjunction(conj: Conjunction, ancestor: Conjunction) -> SplitPlan:
    """Slice `conj` into prefix / matched window / suffix around `ancestor`.

    The window has the ancestor's conjunct count and maximises
    per-position predicate matches.  When no window matches on every
    position, falls back to one part per conjunct with the match index
    on the best single conjunct.
    """
    n, k = len(conj), len(ancestor)
    if k == 0 or n < k:
        return _per_atom_fallback(conj, ancestor)
    best_start, best_score = 0, -1
    for start in range(n - k + 1):
        score = sum(
            1 for a, b in zip(conj[start : start + k], ancestor) if _signature(a) == _signature(b)
        )
        if score > best_score:
            best_start, best_score = start, score
    if best_score < k:
        return _per_atom_fallback(conj, ancestor)
    parts: list[Conjunction] = []
    if best_start > 0:
        parts.append(conj[:best_start])
    matched_index = len(parts)
    parts.append(conj[best_start : best_start + k])
    if best_start + k < n:
        parts.append(conj[best_start + k :])
    return SplitPlan(tuple(parts), matched_index)


def _per_atom_fallback(conj: Conjunction, ancestor: Conjunction) -> SplitPlan:
    parts = tuple((l,) for l in conj)
    anc_sigs = {_signature(l) for l in ancestor}
    matched = next((i for i, l in enumerate(conj) if _signature(l) in anc_sigs), 0)
    return SplitPlan(parts, matched)


def best_match_msg(window: Conjunction, ancestor: Conjunction, fresh: Optional[FreshVars] = None) -> Conjunction:
    """Positionwise msg of two aligned conjunctions.

    The disagreement memo is shared across conjuncts, so variable
    sharing between atoms survives generalisation.
    """
    if len(window) != len(ancestor):
        raise MsgFailure("windows must have equal length")
    return msg(window, ancestor, fresh).generalization  # type: ignore[return-value]
