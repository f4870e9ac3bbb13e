"""Finite SLDNF-tree construction and plain execution.

``unfold`` builds a finite, possibly incomplete SLDNF-tree for a goal
under a configured unfolding strategy; ``resultants`` and ``leaves``
extract the residual clauses and the open leaf goals.  ``run_query`` is
the plain depth-first interpreter used both as the execution oracle for
correctness checks (with resolution-step counting) and for deciding
ground negative literals through subsidiary trees.

Unfolding strategies
--------------------

* ``depth:k``   unfold the leftmost selectable literal; determinate
                steps are free, nondeterminate steps are capped at k
                levels per branch.
* ``det``       determinate steps only (lookahead 0), after a mandatory
                first step on the root goal.
* ``det1``      the same with lookahead 1: a literal counts as
                determinate when all but one of its resolvents fail at
                the next step.
* ``shower`` / ``fork`` / ``beam``
                almost-determinate trees: one nondeterminate step per
                branch, allowed only at the root (shower), only as the
                final step of a branch (fork), or anywhere (beam).
* ``ecce``      determinate steps wherever safe; a nondeterminate step
                is taken on the root goal (a tree must not be trivial)
                and, further down, only for calls to non-recursive
                predicates, whose expansion is structurally bounded.
                Everything else stops the branch.

Except under ``depth:k``, whose cap is itself the termination argument,
every selection must keep the selected literal's covering ancestor
sequence admissible under the configured order (embedding by default,
refinable termsize orders as the alternative).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Union

from .orders import StaticSet, WfoStore, embedded
from .terms import (
    BUILTIN_PREDS,
    Clause,
    Compound,
    Conjunction,
    FreshVars,
    Literal,
    Program,
    Term,
    Var,
    functors_of,
    is_ground,
    list_parts,
    mklist,
    vars_of,
)
from .unify import Subst, apply, compose, rename_apart, restrict, unify

STRATEGIES = ("depth", "det", "det1", "shower", "fork", "beam", "ecce")

#: step tags for non-clause derivation steps
TAG_UNIFY = "="
TAG_NOUNIFY = "\\="
TAG_UNIV = "=.."
TAG_CALL = "call"
TAG_TRUE = "true"
TAG_NOT = "not"

StepTag = Union[int, str]


class BudgetExceeded(Exception):
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class FlounderError(Exception):
    """A nonground negative literal was selected at runtime."""


class EvaluationError(Exception):
    """A builtin or open predicate was called with unusable arguments."""


@dataclass(frozen=True)
class LocalConfig:
    strategy: str = "ecce"
    depth: int = 1  # nondeterminate levels for depth:k; must be >= 1
    lookahead: int = 1  # 0 or 1
    order: str = "embed"  # safety order for covering ancestors: embed | termsize
    leftmost_only: bool = False
    neg_budget: int = 1000  # step cap for subsidiary trees

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "depth" and self.depth < 1:
            raise ValueError("depth bound must be at least 1 (trivial trees are forbidden)")
        if self.lookahead not in (0, 1):
            raise ValueError("lookahead must be 0 or 1")
        if self.order not in ("embed", "termsize"):
            raise ValueError(f"unknown safety order {self.order!r}")


class Budget:
    """Shared resolution-step budget across a specialisation run."""

    def __init__(self, max_steps: int = 1_000_000):
        self.max_steps = max_steps
        self.steps = 0

    def spend(self, n: int = 1) -> None:
        self.steps += n
        if self.steps > self.max_steps:
            raise BudgetExceeded(f"resolution step budget of {self.max_steps} exceeded")


@dataclass(frozen=True)
class TrackedLit:
    """A goal literal with the selected-atom chain it descends from."""

    lit: Literal
    ancestors: tuple[Compound, ...] = ()


TrackedGoal = tuple[TrackedLit, ...]


class SldNode:
    __slots__ = ("goal", "selected", "children", "status")

    def __init__(self, goal: TrackedGoal):
        self.goal = goal
        self.selected: Optional[int] = None
        self.children: list[tuple[StepTag, Subst, "SldNode"]] = []
        self.status = "inner"

    def plain_goal(self) -> Conjunction:
        return tuple(tl.lit for tl in self.goal)


@dataclass
class SldTree:
    root_goal: Conjunction
    root: SldNode
    config: LocalConfig


@dataclass(frozen=True)
class Resultant:
    head: Conjunction  # root goal instantiated by the branch substitution
    body: Conjunction
    theta: Subst  # the composed branch substitution itself


@dataclass
class RunResult:
    answers: list[Subst]
    resolution_steps: int
    exhausted: bool  # True when the step budget cut the search short


# ---------------------------------------------------------------------------
# the interpreter (execution oracle and subsidiary-tree machinery)


class _Steps:
    __slots__ = ("count", "limit")

    def __init__(self, limit: int):
        self.count = 0
        self.limit = limit

    def tick(self) -> bool:
        if self.count >= self.limit:
            return False
        self.count += 1
        return True


class _OutOfSteps(Exception):
    pass


def run_query(
    program: Program,
    goal: Conjunction,
    max_steps: int = 1_000_000,
    occurs_check: bool = False,
) -> RunResult:
    """Depth-first, leftmost-selection, clause-order execution.

    Every derivation step (clause resolution, builtin evaluation,
    negation resolution, and the steps of subsidiary trees) counts once.
    Selecting a nonground negative literal raises FlounderError.
    """
    steps = _Steps(max_steps)
    query_vars = vars_of(goal)
    answers: list[Subst] = []
    fresh = FreshVars()
    exhausted = False
    try:
        for theta in _solve(program, goal, steps, fresh, occurs_check):
            answers.append(restrict(theta, query_vars))
    except _OutOfSteps:
        exhausted = True
    return RunResult(answers, steps.count, exhausted)


def _solve(
    program: Program, goal: Conjunction, steps: _Steps, fresh: FreshVars, occ: bool
) -> Iterator[Subst]:
    if not goal:
        yield {}
        return
    lit, rest = goal[0], goal[1:]
    indicator = lit.indicator

    if not lit.positive:
        if not is_ground(lit.atom):
            raise FlounderError(f"nonground negative literal selected: {lit!r}")
        sub = _Steps(steps.limit - steps.count)
        refuted = False
        try:
            for _ in _solve(program, (Literal(lit.atom),), sub, fresh, occ):
                refuted = True
                break
        except _OutOfSteps:
            steps.count += sub.count
            raise
        steps.count += sub.count
        if refuted:
            return  # the subsidiary tree holds a refutation: this branch fails
        if not steps.tick():
            raise _OutOfSteps
        yield from _solve(program, rest, steps, fresh, occ)
        return

    if lit.pred in BUILTIN_PREDS:
        for mgu, extra in _eval_builtin(lit, occ):
            if not steps.tick():
                raise _OutOfSteps
            newgoal = tuple(apply(l, mgu) for l in extra + rest)
            for theta in _solve(program, newgoal, steps, fresh, occ):
                yield compose(mgu, theta)
        return

    if indicator in program.open_preds:
        raise EvaluationError(f"open predicate {indicator[0]}/{indicator[1]} called at runtime")

    for clause in program.clauses_for(indicator):
        renamed, _ = rename_apart(clause, fresh)
        mgu = unify(lit.atom, renamed.head, occ)
        if mgu is None:
            continue
        if not steps.tick():
            raise _OutOfSteps
        newgoal = tuple(apply(l, mgu) for l in renamed.body + rest)
        for theta in _solve(program, newgoal, steps, fresh, occ):
            yield compose(mgu, theta)


def _eval_builtin(lit: Literal, occ: bool = False) -> list[tuple[Subst, Conjunction]]:
    """Children of a builtin evaluation: (mgu, literals to prepend).

    Returns [] for definite failure.  Raises EvaluationError when the
    call is not sufficiently instantiated at runtime; at specialisation
    time callers test evaluability first.
    """
    pred, args = lit.pred, lit.atom.args
    if pred == "true":
        return [({}, ())]
    if pred == "fail":
        return []
    if pred == "=" and len(args) == 2:
        mgu = unify(args[0], args[1], occ)
        return [] if mgu is None else [(mgu, ())]
    if pred == "\\=" and len(args) == 2:
        # succeeds iff the arguments do not unify; at specialisation time
        # callers only evaluate this with both sides ground
        return [({}, ())] if unify(args[0], args[1], occ) is None else []
    if pred == "=.." and len(args) == 2:
        lhs, rhs = args
        if isinstance(lhs, Compound):
            listed = mklist([Compound(lhs.functor)] + list(lhs.args))
            mgu = unify(rhs, listed, occ)
            return [] if mgu is None else [(mgu, ())]
        items, tail = list_parts(rhs)
        if items and isinstance(items[0], Compound) and not items[0].args and tail == Compound("[]"):
            built = Compound(items[0].functor, tuple(items[1:]))
            mgu = unify(lhs, built, occ)
            return [] if mgu is None else [(mgu, ())]
        raise EvaluationError(f"=.. insufficiently instantiated: {lit!r}")
    if pred == "call" and len(args) == 1:
        inner = args[0]
        if isinstance(inner, Compound):
            return [({}, (Literal(inner),))]
        raise EvaluationError(f"call/1 needs a callable argument: {lit!r}")
    raise EvaluationError(f"unknown builtin {pred}/{len(args)}")


# ---------------------------------------------------------------------------
# unfolding


class UnfoldSession:
    """One unfolding run: owns freshness, the refinable wfo store and
    the subsidiary-tree cache.  Sessions are independent of each other."""

    def __init__(
        self,
        program: Program,
        config: LocalConfig,
        static: StaticSet = None,
        fresh: Optional[FreshVars] = None,
        budget: Optional[Budget] = None,
    ):
        self.program = program
        self.config = config
        self.static = static if static is not None else program.static_functors
        self.fresh = fresh or FreshVars()
        self.budget = budget or Budget()
        self.wfo_store = WfoStore()
        self._neg_cache: dict[Compound, str] = {}
        self._recursive = program.recursive_preds()

    # negation ---------------------------------------------------------

    def negation_verdict(self, atom: Compound) -> str:
        """'refuted', 'failed' or 'inconclusive' for a ground atom."""
        if atom not in self._neg_cache:
            res = run_query(self.program, (Literal(atom),), self.config.neg_budget)
            self.budget.spend(res.resolution_steps)
            if res.answers:
                verdict = "refuted"
            elif res.exhausted:
                verdict = "inconclusive"
            else:
                verdict = "failed"
            self._neg_cache[atom] = verdict
        return self._neg_cache[atom]

    # literal classification --------------------------------------------

    def selectable(self, lit: Literal) -> bool:
        if not lit.positive:
            return is_ground(lit.atom) and self.negation_verdict(lit.atom) != "inconclusive"
        if lit.pred in BUILTIN_PREDS:
            return self._builtin_evaluable(lit)
        return lit.indicator not in self.program.open_preds

    def _builtin_evaluable(self, lit: Literal) -> bool:
        pred, args = lit.pred, lit.atom.args
        if pred in ("true", "fail"):
            return True
        if pred == "=" and len(args) == 2:
            return True
        if pred == "\\=" and len(args) == 2:
            return is_ground(args[0]) and is_ground(args[1])
        if pred == "=.." and len(args) == 2:
            lhs, rhs = args
            if isinstance(lhs, Compound):
                return True
            items, tail = list_parts(rhs)
            return bool(items) and isinstance(items[0], Compound) and not items[0].args and tail == Compound("[]")
        if pred == "call" and len(args) == 1:
            return isinstance(args[0], Compound)
        return False

    def blocking(self, lit: Literal) -> bool:
        """Residual literal that halts leftward selection under leftmost_only."""
        return not self.selectable(lit)

    def definitely_fails(self, lit: Literal) -> bool:
        if not lit.positive:
            return is_ground(lit.atom) and self.negation_verdict(lit.atom) == "refuted"
        if lit.pred in BUILTIN_PREDS:
            return self._builtin_evaluable(lit) and not _eval_builtin(lit)
        if lit.indicator in self.program.open_preds:
            return False
        return not any(
            unify(lit.atom, rename_apart(c, self.fresh)[0].head) is not None
            for c in self.program.clauses_for(lit.indicator)
        )

    # resolution ---------------------------------------------------------

    def resolve(self, goal: TrackedGoal, pos: int) -> list[tuple[StepTag, Subst, TrackedGoal]]:
        sel = goal[pos]
        pre, post = goal[:pos], goal[pos + 1 :]
        lit = sel.lit
        child_chain = sel.ancestors + (lit.atom,)

        def rebuild(mgu: Subst, new_lits: tuple[TrackedLit, ...]) -> TrackedGoal:
            out = []
            for tl in pre + new_lits + post:
                out.append(TrackedLit(apply(tl.lit, mgu), tl.ancestors))
            return tuple(out)

        if not lit.positive:
            verdict = self.negation_verdict(lit.atom)
            if verdict == "refuted":
                return []
            if verdict == "failed":
                return [(TAG_NOT, {}, rebuild({}, ()))]
            raise AssertionError("unselectable negation selected")

        if lit.pred in BUILTIN_PREDS:
            tag = lit.pred if lit.pred != "true" else TAG_TRUE
            out = []
            for mgu, extra in _eval_builtin(lit):
                tracked_extra = tuple(TrackedLit(l, child_chain) for l in extra)
                out.append((tag, mgu, rebuild(mgu, tracked_extra)))
            return out

        out = []
        for clause in self.program.clauses_for(lit.indicator):
            renamed, _ = rename_apart(clause, self.fresh)
            mgu = unify(lit.atom, renamed.head)
            if mgu is None:
                continue
            body = tuple(TrackedLit(l, child_chain) for l in renamed.body)
            out.append((clause.id, mgu, rebuild(mgu, body)))
        return out

    def is_determinate(self, goal: TrackedGoal, pos: int) -> bool:
        children = self.resolve(goal, pos)
        if len(children) <= 1:
            return True
        if self.config.lookahead < 1:
            return False
        alive = 0
        for _tag, _mgu, child in children:
            if not any(self.definitely_fails(tl.lit) for tl in child):
                alive += 1
                if alive > 1:
                    return False
        return True

    def csa_admissible(self, goal: TrackedGoal, pos: int) -> bool:
        sel = goal[pos]
        lit = sel.lit
        if not lit.positive or lit.pred in BUILTIN_PREDS:
            return True
        chain = [a for a in sel.ancestors if (a.functor, len(a.args)) == lit.indicator]
        if not chain:
            return True
        if self.config.order == "termsize":
            return self.wfo_store.admit(chain, lit.atom)
        return not any(embedded(a, lit.atom, self.static) for a in chain)


@dataclass
class _Ctx:
    is_root: bool = True
    nondet_used: bool = False
    stopped: bool = False
    depth_levels: int = 0


@dataclass(frozen=True)
class _Decision:
    pos: int
    nondet: bool
    stop_after: bool = False


def _select(session: UnfoldSession, goal: TrackedGoal, ctx: _Ctx) -> Optional[_Decision]:
    cfg = session.config

    # (a) failure detection: a literal no clause head covers fails the goal
    for i, tl in enumerate(goal):
        if session.definitely_fails(tl.lit):
            return _Decision(i, nondet=False)

    if cfg.leftmost_only:
        cands: list[int] = []
        for i, tl in enumerate(goal):
            if session.selectable(tl.lit):
                cands.append(i)
                break
            if session.blocking(tl.lit):
                break
    else:
        cands = [i for i, tl in enumerate(goal) if session.selectable(tl.lit)]
    if not cands:
        return None

    if ctx.stopped:
        return None

    # (b) the leftmost determinate, safe literal
    for i in cands:
        if session.is_determinate(goal, i) and session.csa_admissible(goal, i):
            return _Decision(i, nondet=False)

    # (c) one nondeterminate step, strategy-dependent
    i = cands[0]
    if cfg.strategy == "depth":
        if ctx.depth_levels < cfg.depth:
            return _Decision(i, nondet=True)
        return None
    if cfg.strategy in ("det", "det1", "shower"):
        if ctx.is_root:
            return _Decision(i, nondet=True)
        return None
    if cfg.strategy == "fork":
        if session.csa_admissible(goal, i):
            return _Decision(i, nondet=True, stop_after=True)
        return None
    if cfg.strategy == "beam":
        if not ctx.nondet_used and session.csa_admissible(goal, i):
            return _Decision(i, nondet=True)
        return None
    # ecce: the root goal must be unfolded; further nondeterminate steps
    # only for non-recursive predicates (bounded expansions, e.g. tables)
    sel = goal[i].lit
    nonrecursive = (
        sel.positive
        and sel.pred not in BUILTIN_PREDS
        and sel.indicator not in session._recursive
    )
    if (ctx.is_root or nonrecursive) and session.csa_admissible(goal, i):
        return _Decision(i, nondet=True)
    return None


def unfold(
    program: Program,
    root: Conjunction,
    config: LocalConfig,
    static: StaticSet = None,
    fresh: Optional[FreshVars] = None,
    budget: Optional[Budget] = None,
) -> SldTree:
    """Build a finite non-trivial SLDNF-tree for the goal under config."""
    if not root:
        raise ValueError("cannot unfold the empty goal")
    session = UnfoldSession(program, config, static, fresh, budget)
    tracked = tuple(TrackedLit(l) for l in root)
    root_node = _build(session, tracked, _Ctx())
    if root_node.selected is None and root_node.status == "incomplete":
        raise EvaluationError(f"no literal of the root goal is selectable: {root!r}")
    return SldTree(root, root_node, config)


def _build(session: UnfoldSession, goal: TrackedGoal, ctx: _Ctx) -> SldNode:
    node = SldNode(goal)
    if not goal:
        node.status = "success"
        return node
    decision = _select(session, goal, ctx)
    if decision is None:
        node.status = "incomplete"
        return node
    node.selected = decision.pos
    children = session.resolve(goal, decision.pos)
    session.budget.spend(max(len(children), 1))
    if not children:
        node.status = "fail"
        return node
    nondet = decision.nondet
    child_ctx = _Ctx(
        is_root=False,
        nondet_used=ctx.nondet_used or nondet,
        stopped=ctx.stopped or decision.stop_after,
        depth_levels=ctx.depth_levels + (1 if nondet else 0),
    )
    for tag, mgu, child_goal in children:
        node.children.append((tag, mgu, _build(session, child_goal, child_ctx)))
    return node


# ---------------------------------------------------------------------------
# extraction


def _branches(node: SldNode, theta: Subst) -> Iterator[tuple[Subst, Conjunction, str]]:
    if node.status == "success":
        yield theta, (), "success"
    elif node.status == "incomplete":
        yield theta, node.plain_goal(), "incomplete"
    elif node.status == "fail":
        return
    else:
        for _tag, mgu, child in node.children:
            yield from _branches(child, compose(theta, mgu))


def resultants(tree: SldTree) -> list[Resultant]:
    """One resultant per non-failing branch, in left-to-right order."""
    out = []
    for theta, body, _status in _branches(tree.root, {}):
        head = tuple(apply(l, theta) for l in tree.root_goal)
        out.append(Resultant(head, body, theta))
    return out


def leaves(tree: SldTree) -> list[Conjunction]:
    """Final goals of the non-failing incomplete branches."""
    return [body for _theta, body, status in _branches(tree.root, {}) if status == "incomplete"]
