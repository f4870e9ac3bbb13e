"""Characteristic trees: the computational shape of an SLDNF-tree.

A characteristic tree keeps, for every non-failing branch, the sequence
of (selected-literal position, clause identifier) steps; builtin and
negation steps carry reserved tags in the clause slot so trees that use
builtins stay comparable.  Branches are stored sorted, so equal trees
compare equal structurally.

For global control the trees are also compared by homeomorphic
embedding: each tree is encoded as a ground term over reserved static
functors (the dynamic-functor rule can never fire on these) and the
ordinary term embedding is applied.  A tree embedding an earlier one
signals computational growth.
"""
from __future__ import annotations

from typing import Union

from .orders import embedded
from .sld import SldNode, SldTree
from .terms import Compound

#: one derivation step: 1-based selected position, clause id or builtin tag
CharStep = tuple[int, Union[int, str]]
CharBranch = tuple[CharStep, ...]
CharTree = tuple[CharBranch, ...]  # sorted; set semantics


def characteristic_tree(tree: SldTree) -> CharTree:
    """Abstract an SLDNF-tree to its non-failing branch step sequences."""
    branches: list[CharBranch] = []

    def walk(node: SldNode, prefix: list[CharStep]) -> None:
        if node.status in ("success", "incomplete"):
            branches.append(tuple(prefix))
            return
        if node.status == "fail":
            return
        pos = (node.selected or 0) + 1
        for tag, _mgu, child in node.children:
            prefix.append((pos, tag))
            walk(child, prefix)
            prefix.pop()

    walk(tree.root, [])
    return tuple(sorted(set(branches)))


def _encode_step(step: CharStep) -> Compound:
    pos, tag = step
    clause = Compound(f"c{tag}" if isinstance(tag, int) else f"b_{tag}")
    return Compound("$chstep", (Compound(f"p{pos}"), clause))


def _encode_branch(branch: CharBranch) -> Compound:
    out = Compound("$chend")
    for step in reversed(branch):
        out = Compound("$chseq", (_encode_step(step), out))
    return out


def encode_chtree(tree: CharTree) -> Compound:
    out = Compound("$chnil")
    for branch in reversed(tree):
        out = Compound("$chbr", (_encode_branch(branch), out))
    return out


def chtree_embedded(t1: CharTree, t2: CharTree) -> bool:
    """True when t1's computational structure reappears inside t2."""
    return embedded(encode_chtree(t1), encode_chtree(t2), static=None)
