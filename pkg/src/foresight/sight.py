"""Sight functions, forked extensions and Monte-Carlo tree games.

A player moving at ``h`` sees ``s(h)``, a finite prefix-closed region rooted at
``h``.  The forked extension ``s*(h)`` prolongs every frontier node of that
region down to true terminals; those terminals are the explorations whose
utilities are aggregated into frontier values.
"""

from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import BlindSight, ForkCoverageError, Violation
from .game import GameTree, Node, Profile, backwards_induction
from .trace import Candidate, SolveTrace, Step

Aggregator = Callable[[Sequence[Fraction]], Fraction]


def _avg(values: Sequence[Fraction]) -> Fraction:
    return sum(values, Fraction(0)) / len(values)


AGGREGATORS: dict[str, Aggregator] = {"avg": _avg, "min": min, "max": max}


def frontier(tree: GameTree, region: frozenset[int]) -> list[int]:
    """Members of ``region`` with no child inside it, in canonical order."""
    return sorted(g for g in region if not any(c in region for c in tree.children[g]))


class View:
    """A region of the tree played as a game of its own.

    Frontier nodes are valued by aggregating, per player, the utilities of the
    explorations that extend them (a true terminal is its own exploration).
    The same rule gives a value to any node of the region, which is what the
    solvers compare.
    """

    def __init__(self, tree: GameTree, root: int, nodes: frozenset[int],
                 explorations: frozenset[int], aggregator: str = "avg"):
        self.tree = tree
        self.root = root
        self.nodes = nodes
        self.explorations = explorations
        self.aggregator = aggregator
        self._agg = AGGREGATORS[aggregator]
        self._sorted = sorted(explorations)
        self._values: dict[int, tuple[Fraction, ...]] = {}
        self._moves: dict[int, list[tuple[str, int]]] = {}

    def __contains__(self, h: int) -> bool:
        return h in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def moves(self, h: int) -> list[tuple[str, int]]:
        got = self._moves.get(h)
        if got is None:
            got = self._moves[h] = [(a, c) for a, c in self.tree.moves(h) if c in self.nodes]
        return got

    def is_frontier(self, h: int) -> bool:
        return not self.moves(h)

    def frontier(self) -> list[int]:
        return frontier(self.tree, self.nodes)

    def mover(self, h: int) -> int:
        return self.tree.player[h]

    def explorations_of(self, h: int) -> list[int]:
        lo = bisect.bisect_left(self._sorted, h)
        hi = bisect.bisect_left(self._sorted, self.tree.end[h])
        return self._sorted[lo:hi]

    def payoff(self, h: int) -> tuple[Fraction, ...]:
        got = self._values.get(h)
        if got is None:
            zs = self.explorations_of(h)
            if not zs:
                raise ForkCoverageError(self.tree.ids[h])
            us = [self.tree.utilities[z] for z in zs]
            got = tuple(self._agg([u[i] for u in us]) for i in range(len(self.tree.players)))
            self._values[h] = got
        return got

    def check_coverage(self) -> None:
        for g in self.frontier():
            self.payoff(g)

    def to_game(self) -> GameTree:
        """The region as a standalone :class:`GameTree` (original node ids)."""
        self.check_coverage()
        tree = self.tree
        nodes = []
        for h in sorted(self.nodes):
            moves = self.moves(h)
            if moves:
                nodes.append(Node(tree.ids[h], player=tree.players[tree.player[h]],
                                  children=tuple((a, tree.ids[c]) for a, c in moves)))
            else:
                nodes.append(Node(tree.ids[h], utilities=self.payoff(h)))
        return GameTree(tree.players, nodes, tree.ids[self.root])


class SightFunction:
    """Maps each internal history to the region its mover sees."""

    def at(self, h: int) -> frozenset[int]:
        raise NotImplementedError


class TableSight(SightFunction):
    def __init__(self, table: Mapping[int, frozenset[int]]):
        self.table = {h: frozenset(v) for h, v in table.items()}

    def at(self, h: int) -> frozenset[int]:
        return self.table[h]


def depth_region(tree: GameTree, h: int, plies: int) -> frozenset[int]:
    seen = [h]
    queue = deque([h])
    limit = tree.depth[h] + plies
    while queue:
        g = queue.popleft()
        if tree.depth[g] < limit:
            seen.extend(tree.children[g])
            queue.extend(tree.children[g])
    return frozenset(seen)


class DepthSight(SightFunction):
    """Everything within ``plies`` moves of the current history."""

    def __init__(self, tree: GameTree, plies: int):
        if plies < 1:
            raise ValueError("plies must be positive")
        self.tree = tree
        self.plies = plies
        self._cache: dict[int, frozenset[int]] = {}

    def at(self, h: int) -> frozenset[int]:
        got = self._cache.get(h)
        if got is None:
            got = self._cache[h] = depth_region(self.tree, h, self.plies)
        return got


def generate_depth_sight(tree: GameTree, plies: int) -> DepthSight:
    return DepthSight(tree, plies)


class ForkedExtension:
    """Maps each internal history to its sight plus explorations."""

    def at(self, h: int) -> frozenset[int]:
        raise NotImplementedError


class TableFork(ForkedExtension):
    def __init__(self, table: Mapping[int, frozenset[int]]):
        self.table = {h: frozenset(v) for h, v in table.items()}

    def at(self, h: int) -> frozenset[int]:
        return self.table[h]


def _rng(*words: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(words))))


def random_walk(tree: GameTree, start: int, rng: np.random.Generator,
                allowed: Callable[[int], bool] | None = None) -> list[int]:
    """Uniform action walk from ``start`` to a terminal; returns visited nodes."""
    walk = [start]
    g = start
    while tree.children[g]:
        options = tree.children[g] if allowed is None else [c for c in tree.children[g] if allowed(c)]
        g = options[int(rng.integers(len(options)))]
        walk.append(g)
    return walk


class RolloutFork(ForkedExtension):
    """Seeded uniform rollouts from every non-terminal frontier node.

    Each frontier node ``g`` of ``s(h)`` gets ``rollouts`` independent walks
    from a PCG64 stream seeded by ``(seed, h, g)``.  When the subtree under
    ``g`` has no more leaves than ``rollouts`` it is taken whole instead.
    Computed lazily per history; identical inputs give identical sets.
    """

    def __init__(self, tree: GameTree, sight: SightFunction, rollouts: int, seed: int):
        if rollouts < 1:
            raise ValueError("rollouts must be positive")
        self.tree = tree
        self.sight = sight
        self.rollouts = rollouts
        self.seed = seed
        self._cache: dict[int, frozenset[int]] = {}

    def at(self, h: int) -> frozenset[int]:
        got = self._cache.get(h)
        if got is not None:
            return got
        tree = self.tree
        region = self.sight.at(h)
        out = set(region)
        for g in frontier(tree, region):
            if tree.is_terminal(g):
                continue
            if tree.leaf_count[g] <= self.rollouts:
                out.update(tree.subtree(g))
                continue
            rng = _rng(self.seed, h, g)
            for _ in range(self.rollouts):
                out.update(random_walk(tree, g, rng))
        got = self._cache[h] = frozenset(out)
        return got


def generate_rollout_fork(tree: GameTree, sight: SightFunction, rollouts: int, seed: int) -> RolloutFork:
    return RolloutFork(tree, sight, rollouts, seed)


def full_sight(tree: GameTree) -> TableSight:
    return TableSight({h: frozenset(tree.subtree(h)) for h in range(len(tree)) if tree.children[h]})


@dataclass
class MTG:
    """Monte-Carlo tree game: a game with a sight and a forked extension."""

    tree: GameTree
    sight: SightFunction
    fork: ForkedExtension
    aggregator: str = "avg"
    _views: dict[int, View] = field(default_factory=dict, repr=False)

    def explorations(self, h: int) -> frozenset[int]:
        return frozenset(g for g in self.fork.at(h) if not self.tree.children[g])

    def view(self, h: int) -> View:
        got = self._views.get(h)
        if got is None:
            got = self._views[h] = View(self.tree, h, self.sight.at(h), self.explorations(h), self.aggregator)
        return got


def restrict(game: MTG, h: int) -> GameTree:
    """The sight-restricted game at ``h`` with aggregated frontier utilities."""
    return game.view(h).to_game()


def _region_violations(tree: GameTree, h: int, region: frozenset[int], what: str) -> list[Violation]:
    where = tree.ids[h]
    out = []
    if not region:
        return [Violation(f"empty {what}", where)]
    if h not in region:
        out.append(Violation(f"{what} misses its history", where))
    for g in sorted(region):
        if not (0 <= g < len(tree)) or not tree.is_prefix(h, g):
            out.append(Violation(f"{what} outside subtree", where, tree.ids[g] if 0 <= g < len(tree) else str(g)))
        elif g != h and tree.parent[g] not in region:
            out.append(Violation(f"{what} not prefix-closed", where, tree.ids[g]))
    return out


def validate_sight(tree: GameTree, sight: SightFunction) -> list[Violation]:
    out = []
    for h in range(len(tree)):
        if not tree.children[h]:
            continue
        region = sight.at(h)
        bad = _region_violations(tree, h, region, "sight")
        out.extend(bad)
        if not bad and not any(c in region for c in tree.children[h]):
            out.append(Violation("blind sight", tree.ids[h], "no move is visible"))
    return out


def validate_fork(tree: GameTree, sight: SightFunction, fork: ForkedExtension,
                  monotone: bool = False) -> list[Violation]:
    out: list[Violation] = []
    for h in range(len(tree)):
        if not tree.children[h]:
            continue
        where = tree.ids[h]
        region, ext = sight.at(h), fork.at(h)
        bad = _region_violations(tree, h, ext, "fork")
        if bad:
            out.extend(bad)
            continue
        if not region <= ext:
            out.append(Violation("fork drops sight", where))
            continue
        front = frontier(tree, region)
        for g in front:
            if tree.children[g] and not any(c in ext for c in tree.children[g]):
                out.append(Violation("fork coverage", where, f"frontier {tree.ids[g]} has no exploration"))
        for g in sorted(ext - region):
            if tree.children[g] and not any(c in ext for c in tree.children[g]):
                out.append(Violation("truncated exploration", where, tree.ids[g]))
            if not any(tree.is_prefix(f, g) for f in front):
                out.append(Violation("stray exploration", where, tree.ids[g]))
    if monotone and not out:
        out.extend(monotone_violations(tree, fork))
    return out


def monotone_violations(tree: GameTree, fork: ForkedExtension) -> list[Violation]:
    """Players do not forget: ``s*(h)|h' ⊆ s*(h')`` for same-mover ``h ⊲ h'``."""
    out = []
    for h in range(len(tree)):
        if not tree.children[h]:
            continue
        ext = fork.at(h)
        for g in sorted(ext):
            if g != h and tree.children[g] and tree.player[g] == tree.player[h]:
                missing = {x for x in ext if tree.is_prefix(g, x)} - fork.at(g)
                if missing:
                    out.append(Violation("non-monotone sight", tree.ids[h],
                                         f"forgets {tree.ids[min(missing)]} by {tree.ids[g]}"))
    return out


def validate_mtg(game: MTG, monotone: bool = False) -> list[Violation]:
    out = validate_sight(game.tree, game.sight)
    if not out:
        out = validate_fork(game.tree, game.sight, game.fork, monotone)
    return out


def scbi(game: MTG) -> tuple[int, Profile, SolveTrace]:
    """Sight-compatible backwards induction.

    At every internal history the mover plays the witness action of
    backwards induction on their own restricted game (earliest action among
    value ties).  Returns the reached terminal, the full profile and a trace
    of the visited steps.
    """
    tree = game.tree
    profile: Profile = {}
    for h in range(len(tree)):
        if tree.children[h]:
            profile[h] = _scbi_move(game.view(h))[0]

    trace = SolveTrace("scbi")
    h = 0
    while tree.children[h]:
        label, candidates = _scbi_move(game.view(h))
        trace.steps.append(Step(h, label, candidates=candidates))
        h = tree.child(h, label)
    trace.outcome = h
    return h, profile, trace


def _scbi_move(view: View) -> tuple[str, list[Candidate]]:
    if view.is_frontier(view.root):
        raise BlindSight(view.tree.ids[view.root])
    _, witness = backwards_induction(view)
    candidates = []
    for label, c in view.moves(view.root):
        z = c
        while z in witness:
            z = view.tree.child(z, witness[z])
        candidates.append(Candidate(label, z, view.payoff(z)))
    return witness[view.root], candidates
