"""Global control: the specialisation tree and its processing loop.

Specialisation keeps a tree of nodes labelled with atoms (or, in
conjunctive mode, whole conjunctions).  Unmarked leaves are picked FIFO;
a leaf already subsumed by a processed node is marked covered, a leaf
whose label signals potential non-termination against an ancestor (the
whistle) is generalised in place and revisited, and anything else is
unfolded, marked processed, and its tree's leaf goals become fresh
children.  On termination every unit is extracted into residual clauses
and handed to code generation.

Whistle modes:

* ``embedding``            label of an ancestor embeds into the leaf's
                           (and the leaf is not strictly more general,
                           which would be harmless);
* ``embedding_plus_chtree`` additionally the ancestor's characteristic
                           tree must embed into the leaf's: syntactic
                           growth with a shrinking computation does not
                           whistle;
* ``termsize_wfo``         same-predicate ancestor chains must keep a
                           strictly decreasing refinable termsize;
* ``none_with_depth(k)``   no order at all, just a cap of k
                           same-predicate versions per branch.

Covered modes: ``variant``, ``instance``, and ``instance_plus_chtree``
(instance of a processed label with the identical characteristic tree).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Optional

from .chtree import CharTree, characteristic_tree, chtree_embedded
from .codegen import RenameMap, filter_and_rename
from .conj import best_match_msg, split_conjunction
from .msg import msg
from .orders import WfoStore, embedded
from .pretty import pp_goal
from .sld import (
    Budget,
    BudgetExceeded,
    LocalConfig,
    Resultant,
    SldTree,
    leaves,
    resultants,
    unfold,
)
from .terms import (
    BUILTIN_PREDS,
    Compound,
    Conjunction,
    FreshVars,
    Literal,
    Program,
    canonical,
    functors_of,
    instance_check,
    match,
)

COVERED_MODES = ("variant", "instance", "instance_plus_chtree")
WHISTLE_MODES = ("embedding", "embedding_plus_chtree", "termsize_wfo", "none_with_depth")


@dataclass(frozen=True)
class GlobalConfig:
    covered_mode: str = "variant"
    whistle_mode: str = "embedding"
    depth_k: int = 10  # for none_with_depth
    conjunctive: bool = False
    local: LocalConfig = field(default_factory=LocalConfig)
    relabel_ancestor: bool = False  # alternative regime: regrow from the ancestor
    max_nodes: int = 10_000
    max_steps: int = 1_000_000
    max_conj_len: int = 8

    def __post_init__(self) -> None:
        if self.covered_mode not in COVERED_MODES:
            raise ValueError(f"unknown covered mode {self.covered_mode!r}")
        if self.whistle_mode not in WHISTLE_MODES:
            raise ValueError(f"unknown whistle mode {self.whistle_mode!r}")
        if self.whistle_mode == "none_with_depth" and self.depth_k < 1:
            raise ValueError("depth cap must be at least 1")


class GNode:
    __slots__ = ("id", "label", "chtree", "tree", "mark", "covered_by", "parent", "children", "removed")

    def __init__(self, nid: int, label: Conjunction, parent: Optional["GNode"]):
        self.id = nid
        self.label = label  # canonical form
        self.chtree: Optional[CharTree] = None
        self.tree: Optional[SldTree] = None
        self.mark = "unmarked"  # unmarked | processed | covered
        self.covered_by: Optional[int] = None
        self.parent = parent
        self.children: list[GNode] = []
        self.removed = False

    def ancestors(self):
        node = self.parent
        while node is not None:
            if node.label is not None:
                yield node
            node = node.parent


@dataclass
class SpecResult:
    a_set: list[tuple[Conjunction, CharTree, SldTree]]
    residual: Program
    rename_map: RenameMap
    trace: dict


class SpecializationError(Exception):
    def __init__(self, message: str, trace: Optional[dict] = None):
        super().__init__(message)
        self.trace = trace


def specialize(program: Program, goals: list[Conjunction], config: GlobalConfig = GlobalConfig(), filtering: bool = True) -> SpecResult:
    """Run the full specialisation loop and build the residual program."""
    return _Run(program, goals, config, filtering).run()


class _Run:
    def __init__(self, program: Program, goals: list[Conjunction], config: GlobalConfig, filtering: bool):
        if not goals or any(not g for g in goals):
            raise ValueError("at least one nonempty goal is required")
        self.program = program
        self.config = config
        self.filtering = filtering
        static = set(program.static_functors)
        for g in goals:
            for lit in g:
                static.add(lit.indicator)
                for t in lit.atom.args:
                    static |= functors_of(t)
        self.static = frozenset(static)
        self.budget = Budget(config.max_steps)
        self.fresh = FreshVars()
        self.root = GNode(0, None, None)  # type: ignore[arg-type]
        self.nodes: list[GNode] = [self.root]
        self.queue: deque[GNode] = deque()
        self.wfo_store = WfoStore()
        self.whistle_events: list[dict] = []
        self._tree_cache: dict[Conjunction, tuple[SldTree, CharTree]] = {}
        for g in goals:
            for part in self._label_parts(g):
                self._new_node(part, self.root)

    # node plumbing -----------------------------------------------------

    def _new_node(self, label: Conjunction, parent: GNode) -> GNode:
        if len(self.nodes) > self.config.max_nodes:
            raise SpecializationError(
                f"node budget of {self.config.max_nodes} exceeded", self._trace()
            )
        node = GNode(len(self.nodes), canonical(label), parent)
        self.nodes.append(node)
        parent.children.append(node)
        self.queue.append(node)
        return node

    def _label_parts(self, conj: Conjunction) -> list[Conjunction]:
        """Split a goal or leaf into specialisation units.

        Builtin and open-predicate literals are residual and never become
        units.  In atomic mode every remaining literal stands alone (a
        negative literal contributes its atom); in conjunctive mode
        maximal runs between residual literals are kept whole, up to the
        length cap, and all-negative runs fall back to their atoms.
        """
        runs: list[list[Literal]] = [[]]
        for lit in conj:
            if lit.pred in BUILTIN_PREDS or lit.indicator in self.program.open_preds:
                runs.append([])
            else:
                runs[-1].append(lit)
        parts: list[Conjunction] = []
        for run in runs:
            if not run:
                continue
            if not self.config.conjunctive or len(run) > self.config.max_conj_len:
                parts.extend((Literal(l.atom),) for l in run)
            elif all(not l.positive for l in run):
                parts.extend((Literal(l.atom),) for l in run)
            else:
                parts.append(tuple(run))
        return parts

    def _unfold_label(self, label: Conjunction) -> tuple[SldTree, CharTree]:
        if label not in self._tree_cache:
            tree = unfold(
                self.program, label, self.config.local, self.static, self.fresh, self.budget
            )
            self._tree_cache[label] = (tree, characteristic_tree(tree))
        return self._tree_cache[label]

    # the loop ------------------------------------------------------------

    def run(self) -> SpecResult:
        try:
            while self.queue:
                node = self.queue.popleft()
                if node.removed or node.mark != "unmarked":
                    continue
                witness = self._covered(node)
                if witness is not None:
                    node.mark = "covered"
                    node.covered_by = witness.id
                    continue
                ancestor = self._whistle(node)
                if ancestor is not None:
                    self._generalize(node, ancestor)
                    continue
                node.tree, node.chtree = self._unfold_label(node.label)
                node.mark = "processed"
                for leaf in leaves(node.tree):
                    for part in self._label_parts(leaf):
                        self._new_node(part, node)
        except BudgetExceeded as exc:
            raise SpecializationError(str(exc), self._trace()) from exc

        units: list[tuple[Conjunction, list[Resultant]]] = []
        a_set: list[tuple[Conjunction, CharTree, SldTree]] = []
        for node in self.nodes:
            if node.removed or node.mark != "processed":
                continue
            assert node.tree is not None and node.chtree is not None
            units.append((node.label, resultants(node.tree)))
            a_set.append((node.label, node.chtree, node.tree))
        residual, rename_map = filter_and_rename(units, self.filtering, self.program.open_preds)
        return SpecResult(a_set, residual, rename_map, self._trace())

    # covering ------------------------------------------------------------

    def _covered(self, node: GNode) -> Optional[GNode]:
        mode = self.config.covered_mode
        for other in self.nodes:
            if other.removed or other.mark != "processed" or other.label is None:
                continue
            if len(other.label) != len(node.label):
                continue
            if mode == "variant":
                if other.label == node.label:  # canonical forms: variant test
                    return other
                continue
            if match(other.label, node.label) is None:
                continue
            if mode == "instance":
                return other
            # instance_plus_chtree: identical computational shape required
            _tree, cht = self._unfold_label(node.label)
            if other.chtree == cht:
                return other
        return None

    # whistling -----------------------------------------------------------

    def _qualifies(self, node: GNode, anc: GNode) -> bool:
        if len(node.label) == 1 and len(anc.label) == 1:
            if node.label[0].indicator != anc.label[0].indicator:
                return False
        elif len(anc.label) > len(node.label):
            return False
        # a leaf strictly more general than the ancestor is no threat
        rel = instance_check(node.label, anc.label)
        return rel != "strict_generalization" and rel != "variant"

    def _whistle(self, node: GNode) -> Optional[GNode]:
        mode = self.config.whistle_mode
        if mode == "none_with_depth":
            qualifying = [a for a in node.ancestors() if self._qualifies(node, a)]
            if len(qualifying) >= self.config.depth_k - 1 and qualifying:
                return qualifying[0]  # the closest
            return None
        if mode == "termsize_wfo":
            return self._whistle_wfo(node)
        for anc in node.ancestors():
            if not self._qualifies(node, anc):
                continue
            if not embedded(anc.label, node.label, self.static):
                continue
            if mode == "embedding_plus_chtree":
                _tree, cht = self._unfold_label(node.label)
                anc_cht = anc.chtree
                if anc_cht is None:
                    anc_cht = self._unfold_label(anc.label)[1]
                if not chtree_embedded(anc_cht, cht):
                    continue
            return anc
        return None

    def _whistle_wfo(self, node: GNode) -> Optional[GNode]:
        if len(node.label) != 1:
            # conjunction labels fall back to the embedding check
            for anc in node.ancestors():
                if self._qualifies(node, anc) and embedded(anc.label, node.label, self.static):
                    return anc
            return None
        chain = [a for a in node.ancestors() if self._qualifies(node, a)]
        if not chain:
            return None
        atoms = [a.label[0].atom for a in reversed(chain)]
        if self.wfo_store.admit(atoms, node.label[0].atom):
            return None
        return chain[0]

    # generalisation --------------------------------------------------------

    def _generalize(self, node: GNode, ancestor: GNode) -> None:
        new_labels = self._generalized_labels(node.label, ancestor.label)
        self.whistle_events.append(
            {
                "ancestor": ancestor.id,
                "node": node.id,
                "was": pp_goal(node.label),
                "now": [pp_goal(l) for l in new_labels],
            }
        )
        if self.config.relabel_ancestor:
            # alternative regime: drop the ancestor's subtree and regrow
            self._remove_descendants(ancestor)
            ancestor.label = canonical(new_labels[0])
            for extra in new_labels[1:]:
                self._new_node(extra, ancestor.parent or self.root)
            ancestor.mark = "unmarked"
            ancestor.tree = ancestor.chtree = None
            self.queue.append(ancestor)
            return
        node.label = canonical(new_labels[0])
        node.chtree = node.tree = None
        for extra in new_labels[1:]:
            self._new_node(extra, node.parent or self.root)
        self.queue.append(node)

    def _generalized_labels(self, label: Conjunction, anc: Conjunction) -> list[Conjunction]:
        if len(label) == 1 and len(anc) == 1:
            return [canonical(msg(label, anc, self.fresh).generalization)]
        plan = split_conjunction(label, anc)
        out: list[Conjunction] = []
        for i, part in enumerate(plan.parts):
            if i == plan.matched_index and len(part) == len(anc):
                sigs_match = all(
                    a.pred == b.pred and a.arity == b.arity and a.positive == b.positive
                    for a, b in zip(part, anc)
                )
                if sigs_match:
                    part = best_match_msg(part, anc, self.fresh)
            out.append(canonical(part))
        # the matched part leads: it is re-examined first
        matched = out.pop(plan.matched_index)
        return [matched] + out

    def _remove_descendants(self, node: GNode) -> None:
        stack = list(node.children)
        node.children = []
        while stack:
            child = stack.pop()
            child.removed = True
            stack.extend(child.children)

    # trace -----------------------------------------------------------------

    def _trace(self) -> dict:
        nodes = []
        for n in self.nodes:
            if n.label is None:
                continue
            nodes.append(
                {
                    "chtree": None
                    if n.chtree is None
                    else [[[p, str(c)] for p, c in branch] for branch in n.chtree],
                    "covered_by": n.covered_by,
                    "id": n.id,
                    "label": pp_goal(n.label),
                    "mark": n.mark,
                    "parent": n.parent.id if n.parent is not None else None,
                    "removed": n.removed,
                }
            )
        return {
            "nodes": nodes,
            "steps": self.budget.steps,
            "v": 1,
            "whistles": self.whistle_events,
        }
