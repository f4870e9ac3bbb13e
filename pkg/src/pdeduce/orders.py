"""Well-founded and well-quasi orders for local and global control.

Two termination instruments live here:

* the homeomorphic embedding relation on terms and atoms, extended with
  the dynamic-functor rule (two terms whose root functors were both
  created at specialisation time embed each other), and

* termsize-based well-founded orders over selected argument positions,
  with the refinement step that drops a minimal number of positions to
  keep a covering-ancestor sequence strictly decreasing.

Conjunctions are compared by encoding them as right-nested terms over a
reserved conjunction functor, which makes the embedding behave
associatively on conjunctions: a subconjunction spread out inside a
longer one is detected by the ordinary diving rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

from .terms import Compound, Conjunction, Literal, Term, Var, termsize

#: reserved functors used by encodings; always treated as static
CONJ_FUNCTOR = "$and"
NEG_FUNCTOR = "$naf"
_RESERVED = frozenset({(CONJ_FUNCTOR, 2), (NEG_FUNCTOR, 1)})

StaticSet = Optional[frozenset]  # None disables the dynamic-functor rule


def _dynamic(t: Compound, static: StaticSet) -> bool:
    if static is None:
        return False
    key = (t.functor, len(t.args))
    return key not in static and key not in _RESERVED


def embedded(s, t, static: StaticSet = None) -> bool:
    """Homeomorphic embedding s <| t on terms, atoms or conjunctions.

    Rules: variables embed variables; s embeds f(t1..tn) when it embeds
    some ti (diving); f(s1..sn) embeds f(t1..tn) argument-wise
    (coupling, also used for atoms with equal predicate); and two
    compounds with dynamic root functors always embed.
    """
    s, t = _encode(s), _encode(t)
    return _emb(s, t, static)


def _emb(s: Term, t: Term, static: StaticSet) -> bool:
    if isinstance(s, Var) and isinstance(t, Var):
        return True
    if isinstance(t, Compound):
        if isinstance(s, Compound):
            if s.functor == t.functor and len(s.args) == len(t.args):
                if all(_emb(a, b, static) for a, b in zip(s.args, t.args)):
                    return True
            if _dynamic(s, static) and _dynamic(t, static):
                return True
        return any(_emb(s, sub, static) for sub in t.args)
    return False


def strictly_embedded(s, t, static: StaticSet = None) -> bool:
    """s <| t but not t <| s."""
    return embedded(s, t, static) and not embedded(t, s, static)


def _encode(e) -> Term:
    """Terms pass through; literals and conjunctions become plain terms."""
    if isinstance(e, (Var, Compound)):
        return e
    if isinstance(e, Literal):
        return e.atom if e.positive else Compound(NEG_FUNCTOR, (e.atom,))
    if isinstance(e, tuple):
        if not e:
            raise ValueError("cannot encode an empty conjunction")
        out = _encode(e[-1])
        for l in reversed(e[:-1]):
            out = Compound(CONJ_FUNCTOR, (_encode(l), out))
        return out
    raise TypeError(f"cannot encode {e!r}")


# ---------------------------------------------------------------------------
# termsize well-founded orders


@dataclass(frozen=True)
class WfoConfig:
    """Argument positions (1-based) whose termsizes are summed, per predicate."""

    positions: frozenset[int]

    @staticmethod
    def full(arity: int) -> "WfoConfig":
        return WfoConfig(frozenset(range(1, arity + 1)))


def measured_size(atom: Compound, config: WfoConfig) -> int:
    return sum(termsize(atom.args[i - 1]) for i in sorted(config.positions) if i <= len(atom.args))


def _decreasing(atoms: Sequence[Compound], positions: frozenset[int]) -> bool:
    cfg = WfoConfig(positions)
    sizes = [measured_size(a, cfg) for a in atoms]
    return all(x > y for x, y in zip(sizes, sizes[1:]))


def refine_wfo(sequence: Sequence[Union[Literal, Compound]], config: WfoConfig) -> Optional[WfoConfig]:
    """Shrink the position set until the whole sequence strictly decreases.

    Keeps a maximal-cardinality subset of the current positions; among
    equal-size subsets the one retaining the lowest indices wins.  A
    one-element sequence never forces a change.  Returns None when no
    nonempty subset works.
    """
    atoms = [l.atom if isinstance(l, Literal) else l for l in sequence]
    if len(atoms) <= 1:
        return config
    if _decreasing(atoms, config.positions):
        return config
    ordered = sorted(config.positions)
    for size in range(len(ordered) - 1, 0, -1):
        for subset in combinations(ordered, size):
            if _decreasing(atoms, frozenset(subset)):
                return WfoConfig(frozenset(subset))
    return None


# ---------------------------------------------------------------------------
# order kinds and admissibility


@dataclass(frozen=True)
class Wfo:
    config: WfoConfig


@dataclass(frozen=True)
class WqoEmbedding:
    pass


OrderKind = Union[Wfo, WqoEmbedding]


def admissible_extension(
    sequence: Sequence[Union[Literal, Compound]],
    candidate: Union[Literal, Compound],
    kind: OrderKind,
    static: StaticSet = None,
) -> bool:
    """May `candidate` extend an already admissible sequence?

    Under a wfo the candidate must be strictly smaller than the last
    element (transitivity covers the rest); under the embedding wqo no
    earlier element may embed into the candidate.
    """
    if not sequence:
        return True
    cand_atom = candidate.atom if isinstance(candidate, Literal) else candidate
    atoms = [l.atom if isinstance(l, Literal) else l for l in sequence]
    if isinstance(kind, Wfo):
        return measured_size(atoms[-1], kind.config) > measured_size(cand_atom, kind.config)
    return not any(embedded(a, cand_atom, static) for a in atoms)


class WfoStore:
    """Per-run refinable position sets, one per predicate.

    Position sets start at the full argument list and may only shrink,
    so the succession of orders is itself well-founded.
    """

    def __init__(self) -> None:
        self._configs: dict[tuple[str, int], WfoConfig] = {}

    def config_for(self, indicator: tuple[str, int]) -> WfoConfig:
        if indicator not in self._configs:
            self._configs[indicator] = WfoConfig.full(indicator[1])
        return self._configs[indicator]

    def admit(self, sequence: Sequence[Compound], candidate: Compound) -> bool:
        """Check (refining if needed) that sequence + candidate decreases."""
        if not sequence:
            return True
        indicator = (candidate.functor, len(candidate.args))
        config = self.config_for(indicator)
        refined = refine_wfo(list(sequence) + [candidate], config)
        if refined is None:
            return False
        if refined != config:
            self._configs[indicator] = refined
        return True
