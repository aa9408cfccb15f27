"""Nested-beliefs solving of epistemic Monte-Carlo tree games.

The operational route is :class:`Solver` (solution path, current best move,
nested best actions and best-branch composition).  Two independent routes
classify the same objects: :func:`nbs_outcomes` enumerates every profile of
a believed game and keeps those meeting the solution conditions, and
:func:`nbs_outcome_set` is a polynomial set recursion used by
:func:`is_sces` on larger games.

Reading used throughout: a profile of the believed game at ``q`` is a nested
beliefs solution when, at every interior ``h'`` other than the root, it plays
an action some deeper solution at ``(q, h')`` plays, and no other root action
does strictly better for the root mover given the profile's own
continuations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .beliefs import EMTG, Seq
from .errors import BlindSight, CapExceeded
from .game import Profile, outcome
from .sight import View
from .trace import Candidate, SolveTrace, Step

ContinuationTable = dict[int, str]


@dataclass
class Branch:
    action: str | None
    candidates: list[Candidate]


class Solver:
    """Runs the nested best-move computation on one EMTG.

    With ``memo`` on, nested actions are cached under the belief oracle's key;
    switching it off must not change any answer.
    """

    def __init__(self, emtg: EMTG, memo: bool = True):
        self.emtg = emtg
        self.tree = emtg.tree
        self.memo = memo
        self._cache: dict = {}
        self.memo_hits = 0

    def nbs_action(self, q: Sequence[int]) -> str | None:
        """Believed move at the end of ``q``; ``None`` when nothing is left to play."""
        q = tuple(q)
        key = self.emtg.beliefs.key(q) if self.memo else None
        if key is not None and key in self._cache:
            self.memo_hits += 1
            return self._cache[key]
        view = self.emtg.view(q)
        if view.is_frontier(q[-1]):
            action = None
        else:
            action = self.best_branch(q, self.continuations(q, view)).action
        if key is not None:
            self._cache[key] = action
        return action

    def continuations(self, q: Seq, view: View) -> ContinuationTable:
        table: ContinuationTable = {}
        for g in sorted(view.nodes):
            if g == q[-1] or view.is_frontier(g):
                # a frontier extension believes only in itself: no move
                continue
            action = self.nbs_action(q + (g,))
            if action is not None:
                table[g] = action
        return table

    def best_branch(self, q: Sequence[int], table: Mapping[int, str]) -> Branch:
        """Compose each root action with the stored continuations and keep the best.

        Only a strict improvement replaces the incumbent, so among equally
        valued paths the earliest action wins.
        """
        view = self.emtg.view(q)
        root = q[-1]
        mover = self.tree.player[root]
        best_action, best_value = None, None
        candidates = []
        for label, child in view.moves(root):
            end = follow(self.tree, table, child)
            if not view.is_frontier(end):
                raise ValueError(f"continuation table has no move at {self.tree.ids[end]!r}")
            value = view.payoff(end)
            candidates.append(Candidate(label, end, value))
            if best_value is None or value[mover] > best_value:
                best_action, best_value = label, value[mover]
        return Branch(best_action, candidates)

    def bsbi(self, h: int) -> str:
        return self._step(h).chosen

    def _step(self, h: int) -> Step:
        q = (h,)
        view = self.emtg.view(q)
        if view.is_frontier(h):
            raise BlindSight(self.tree.ids[h])
        table = self.continuations(q, view)
        branch = self.best_branch(q, table)
        return Step(h, branch.action, table, branch.candidates)

    def sol(self) -> tuple[int, SolveTrace]:
        trace = SolveTrace("sces")
        h = self.tree.root
        while self.tree.children[h]:
            step = self._step(h)
            trace.steps.append(step)
            h = self.tree.child(h, step.chosen)
        trace.outcome = h
        b = self.emtg.beliefs
        trace.stats = {"oracle_queries": b.queries, "oracle_hits": b.hits, "memo_hits": self.memo_hits}
        return h, trace


def follow(tree, table: Mapping[int, str], start: int) -> int:
    h = start
    while h in table:
        h = tree.child(h, table[h])
    return h


def nbs_action(emtg: EMTG, q: Sequence[int]) -> str | None:
    return Solver(emtg).nbs_action(q)


def best_branch(emtg: EMTG, q: Sequence[int], table: Mapping[int, str]) -> str:
    return Solver(emtg).best_branch(q, table).action


def bsbi(emtg: EMTG, h: int) -> str:
    return Solver(emtg).bsbi(h)


def sol(emtg: EMTG, memo: bool = True) -> tuple[int, SolveTrace]:
    return Solver(emtg, memo).sol()


def sces_profile(emtg: EMTG, solver: Solver | None = None) -> Profile:
    """The nested best move at every internal history of the real game."""
    solver = solver or Solver(emtg)
    tree = emtg.tree
    return {h: solver.bsbi(h) for h in range(len(tree)) if tree.children[h]}


# -- brute-force and set routes ----------------------------------------------


def _firsts(tree, root: int, zs) -> set[str]:
    return {tree.first_action(root, z) for z in zs if z != root}


def nbs_outcomes(emtg: EMTG, q: Sequence[int], cap: int = 12,
                 _memo: dict | None = None) -> set[int]:
    """Outcomes of all nested beliefs solutions at ``q``, by brute force.

    Every profile of the believed game is enumerated and classified; deeper
    sequences are solved the same way.  Raises :class:`CapExceeded` when a
    believed game has more than ``cap`` nodes.
    """
    memo = {} if _memo is None else _memo
    q = tuple(q)
    if q in memo:
        return memo[q]
    tree = emtg.tree
    view = emtg.view(q)
    if len(view) > cap:
        raise CapExceeded(f"believed game at {[tree.ids[h] for h in q]} has {len(view)} nodes > {cap}")
    root = q[-1]
    if view.is_frontier(root):
        memo[q] = {root}
        return memo[q]
    interior = sorted(g for g in view.nodes if not view.is_frontier(g))
    allowed = {g: _firsts(tree, g, nbs_outcomes(emtg, q + (g,), cap, memo))
               for g in interior if g != root}
    mover = tree.player[root]
    found: set[int] = set()
    choices = [[a for a, _ in view.moves(g)] for g in interior]
    for combo in itertools.product(*choices):
        sigma = dict(zip(interior, combo))
        if any(sigma[g] not in acts for g, acts in allowed.items()):
            continue
        z = outcome(view, sigma)
        v = view.payoff(z)[mover]
        deviations = (outcome(view, {**sigma, root: a}) for a, _ in view.moves(root))
        if all(view.payoff(y)[mover] <= v for y in deviations):
            found.add(z)
    memo[q] = found
    return found


def nbs_outcome_set(emtg: EMTG, q: Sequence[int], _memo: dict | None = None) -> set[int]:
    """Same set as :func:`nbs_outcomes`, computed without enumerating profiles.

    An endpoint reached through root action ``a`` along deeper-admissible
    moves qualifies when the root mover values it at least as much as the
    worst admissible endpoint of every other root action.
    """
    memo = {} if _memo is None else _memo
    q = tuple(q)
    if q in memo:
        return memo[q]
    tree = emtg.tree
    view = emtg.view(q)
    root = q[-1]
    if view.is_frontier(root):
        memo[q] = {root}
        return memo[q]
    reach: dict[int, set[int]] = {}
    for g in sorted(view.nodes, reverse=True):
        if view.is_frontier(g):
            reach[g] = {g}
        elif g != root:
            acts = _firsts(tree, g, nbs_outcome_set(emtg, q + (g,), memo))
            reach[g] = set().union(*(reach[c] for a, c in view.moves(g) if a in acts))
    mover = tree.player[root]
    branches = [reach[c] for _, c in view.moves(root)]
    floors = [min(view.payoff(z)[mover] for z in b) for b in branches]
    found = set()
    for k, b in enumerate(branches):
        bar = max((f for j, f in enumerate(floors) if j != k), default=None)
        found.update(z for z in b if bar is None or view.payoff(z)[mover] >= bar)
    memo[q] = found
    return found


@dataclass
class SCESCheck:
    ok: bool
    failing: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_sces(emtg: EMTG, profile: Mapping[int, str], brute_force: bool = False,
            cap: int = 12) -> SCESCheck:
    """Whether every move of ``profile`` starts a nested beliefs solution outcome."""
    tree = emtg.tree
    memo: dict = {}
    for h in range(len(tree)):
        if not tree.children[h]:
            continue
        zs = nbs_outcomes(emtg, (h,), cap, memo) if brute_force else nbs_outcome_set(emtg, (h,), memo)
        if profile.get(h) not in _firsts(tree, h, zs):
            return SCESCheck(False, h)
    return SCESCheck(True)


def enumerate_sces(emtg: EMTG, cap: int = 10, max_profiles: int = 100_000) -> set[tuple[tuple[int, str], ...]]:
    """Every profile some execution of the solver can return.

    Executions differ only in how value ties are broken inside best-branch;
    this explores all of them.  Profiles are returned as sorted item tuples.
    """
    tree = emtg.tree
    if len(tree) > cap:
        raise CapExceeded(f"game has {len(tree)} nodes > {cap}")
    memo: dict[Seq, set[str]] = {}

    def actions(q: Seq) -> set[str]:
        if q in memo:
            return memo[q]
        view = emtg.view(q)
        root = q[-1]
        if view.is_frontier(root):
            memo[q] = set()
            return memo[q]
        interior = [g for g in sorted(view.nodes) if g != root and not view.is_frontier(g)]
        options = [sorted(actions(q + (g,))) for g in interior]
        mover = tree.player[root]
        found: set[str] = set()
        for combo in itertools.product(*options):
            table = dict(zip(interior, combo))
            values = [(a, view.payoff(follow(tree, table, c))[mover]) for a, c in view.moves(root)]
            top = max(v for _, v in values)
            found.update(a for a, v in values if v == top)
        memo[q] = found
        return found

    internal = [h for h in range(len(tree)) if tree.children[h]]
    per_node = [sorted(actions((h,))) for h in internal]
    total = 1
    for acts in per_node:
        total *= max(len(acts), 1)
    if total > max_profiles:
        raise CapExceeded(f"{total} profiles > {max_profiles}")
    return {tuple(zip(internal, combo)) for combo in itertools.product(*per_node)}


def all_profiles(tree) -> list[Profile]:
    internal = [h for h in range(len(tree)) if tree.children[h]]
    return [dict(zip(internal, combo))
            for combo in itertools.product(*([a for a, _ in tree.moves(h)] for h in internal))]
