"""Nested beliefs about sight and evaluation.

A history-sequence ``q = (h0, ..., hk)`` reads "the mover at h0 believes that
the mover at h1 believes ... what the mover at hk sees and how it evaluates
it".  A belief structure answers each such ``q`` with a believed region
``B_H(q)`` rooted at ``hk`` and a set ``B_P(q)`` of believed exploration
terminals.
"""

from __future__ import annotations

import bisect
import random
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterator, Mapping, Sequence

from .errors import CapExceeded, UnspecifiedSequence, Violation
from .game import GameTree
from .sight import MTG, View, _rng, frontier, random_walk

Seq = tuple[int, ...]


def is_history_sequence(game: MTG, q: Sequence[int]) -> bool:
    tree = game.tree
    if not q or not tree.children[q[0]]:
        return False
    if any(not tree.is_prefix(a, b) or a == b for a, b in zip(q, q[1:])):
        return False
    region = game.sight.at(q[0])
    return all(h in region for h in q[1:])


class BeliefStructure:
    """Oracle from history-sequences to believed views.

    Answers are cached under :meth:`key`; subclasses whose answers depend on
    less than the whole sequence declare a coarser key so that solvers can
    share work.  Concurrent callers may both compute a missing entry, which
    is harmless because answers are deterministic.
    """

    kind = "abstract"

    def __init__(self, game: MTG):
        self.game = game
        self.tree = game.tree
        self._cache: dict[Hashable, View] = {}
        self.queries = 0
        self.hits = 0

    def key(self, q: Seq) -> Hashable:
        return q

    def view(self, q: Sequence[int]) -> View:
        q = tuple(q)
        self.queries += 1
        k = self.key(q)
        got = self._cache.get(k)
        if got is not None:
            self.hits += 1
            return got
        nodes, explorations = self._answer(q)
        got = View(self.tree, q[-1], frozenset(nodes), frozenset(explorations), self.game.aggregator)
        self._cache[k] = got
        return got

    def _answer(self, q: Seq) -> tuple[frozenset[int], frozenset[int]]:
        raise NotImplementedError

    def _own(self, h0: int) -> tuple[frozenset[int], frozenset[int]]:
        return self.game.sight.at(h0), self.game.explorations(h0)


def query(beliefs: BeliefStructure, q: Sequence[int]) -> tuple[frozenset[int], frozenset[int]]:
    v = beliefs.view(q)
    return v.nodes, v.explorations


class TableBeliefs(BeliefStructure):
    """Explicit entries; a sequence ending at a true terminal needs none."""

    kind = "table"

    def __init__(self, game: MTG, entries: Mapping[Seq, tuple[frozenset[int], frozenset[int]]]):
        super().__init__(game)
        self.entries = {tuple(k): (frozenset(a), frozenset(b)) for k, (a, b) in entries.items()}

    def _answer(self, q: Seq):
        got = self.entries.get(q)
        if got is not None:
            return got
        if self.tree.is_terminal(q[-1]):
            return frozenset(q[-1:]), frozenset(q[-1:])
        raise UnspecifiedSequence(tuple(self.tree.ids[h] for h in q))


class ProjectiveBeliefs(BeliefStructure):
    """Everyone is believed to see and evaluate exactly as the mover at h0."""

    kind = "projective"

    def key(self, q: Seq) -> Hashable:
        return (q[0], q[-1])

    def _answer(self, q: Seq):
        nodes, expl = self._own(q[0])
        hk, end = q[-1], self.tree.end[q[-1]]
        return (frozenset(g for g in nodes if hk <= g < end),
                frozenset(z for z in expl if hk <= z < end))


class OmniscientBeliefs(BeliefStructure):
    """Everyone is believed to see the whole remaining game."""

    kind = "omniscient"

    def key(self, q: Seq) -> Hashable:
        return (q[-1],)

    def _answer(self, q: Seq):
        hk = q[-1]
        sub = self.tree.subtree(hk)
        return frozenset(sub), frozenset(g for g in sub if not self.tree.children[g])


class DepthModelBeliefs(BeliefStructure):
    """Opponents modelled by a believed search depth and rollout width.

    ``B_H(q, h')`` is the part of ``B_H(q)`` within ``depths[t(h')]`` moves of
    ``h'``.  Each non-terminal frontier node of it gets ``widths[t(h')]``
    seeded walks that only step into subtrees still holding a member of
    ``B_P(q)``, so every believed exploration is one the outer believer
    already had.  When no more such members lie below than the width, all
    of them are taken.  Both monotonicity conditions hold by construction.
    """

    kind = "depth-model"

    def __init__(self, game: MTG, depths: Mapping[int, int], widths: Mapping[int, int], seed: int):
        super().__init__(game)
        players = range(len(game.tree.players))
        if any(depths.get(i, 0) < 1 or widths.get(i, 0) < 1 for i in players):
            raise ValueError("depth-model needs a positive depth and width for every player")
        self.depths = dict(depths)
        self.widths = dict(widths)
        self.seed = seed

    def _answer(self, q: Seq):
        if len(q) == 1:
            return self._own(q[0])
        tree = self.tree
        parent = self.view(q[:-1])
        hk = q[-1]
        if tree.is_terminal(hk):
            return frozenset([hk]), frozenset([hk])
        mover = tree.player[hk]
        limit = tree.depth[hk] + self.depths[mover]
        nodes = [hk]
        queue = deque([hk])
        while queue:
            g = queue.popleft()
            if tree.depth[g] < limit:
                for c in tree.children[g]:
                    if c in parent.nodes:
                        nodes.append(c)
                        queue.append(c)
        region = frozenset(nodes)
        pool = sorted(parent.explorations)
        end = tree.end

        def stocked(c: int) -> bool:
            i = bisect.bisect_left(pool, c)
            return i < len(pool) and pool[i] < end[c]

        explorations = set()
        for g in frontier(tree, region):
            if tree.is_terminal(g):
                explorations.add(g)
                continue
            lo, hi = bisect.bisect_left(pool, g), bisect.bisect_left(pool, end[g])
            if hi - lo <= self.widths[mover]:
                explorations.update(pool[lo:hi])
                continue
            rng = _rng(self.seed, len(q), *q, g)
            for _ in range(self.widths[mover]):
                explorations.add(random_walk(tree, g, rng, stocked)[-1])
        return region, frozenset(explorations)


@dataclass
class EMTG:
    """Epistemic Monte-Carlo tree game: an MTG with a belief structure."""

    game: MTG
    beliefs: BeliefStructure

    @property
    def tree(self) -> GameTree:
        return self.game.tree

    def view(self, q: Sequence[int]) -> View:
        return self.beliefs.view(q)


@dataclass
class BelievedGame:
    tree: GameTree
    sequence: Seq


def believed_game(emtg: EMTG, q: Sequence[int]) -> BelievedGame:
    """The game the chain ``q`` believes is played from its last history."""
    return BelievedGame(emtg.view(q).to_game(), tuple(q))


def chains(emtg: EMTG, h0: int) -> Iterator[Seq]:
    """History-sequences rooted at ``h0`` that a solve can reach.

    Extensions go only to interior nodes of the believed region; a frontier
    extension ``h'`` is implicitly answered by ``({h'}, B_P(q)|h')``.
    """
    stack: list[Seq] = [(h0,)]
    while stack:
        q = stack.pop()
        yield q
        view = emtg.view(q)
        for g in sorted(view.nodes, reverse=True):
            if g != q[-1] and not view.is_frontier(g):
                stack.append(q + (g,))


def _structure(tree: GameTree, own_sight: frozenset[int], q: Seq, view: View) -> list[Violation]:
    where = "(" + ", ".join(tree.ids[h] for h in q) + ")"
    hk, nodes = q[-1], view.nodes
    out = []
    if hk not in nodes:
        out.append(Violation("believed sight misses its history", where))
    for g in sorted(nodes):
        if not tree.is_prefix(hk, g):
            out.append(Violation("believed sight outside subtree", where, tree.ids[g]))
        elif g != hk and tree.parent[g] not in nodes:
            out.append(Violation("believed sight not prefix-closed", where, tree.ids[g]))
        if g not in own_sight:
            out.append(Violation("believed sight exceeds own sight", where, tree.ids[g]))
    if out:
        return out
    if not view.moves(hk):
        out.append(Violation("stalled belief", where, "no move is believed visible"))
    front = view.frontier()
    for z in sorted(view.explorations):
        if tree.children[z]:
            out.append(Violation("believed exploration not terminal", where, tree.ids[z]))
        elif not any(tree.is_prefix(f, z) for f in front):
            out.append(Violation("stray believed exploration", where, tree.ids[z]))
    for f in front:
        if not view.explorations_of(f):
            out.append(Violation("believed coverage", where, f"frontier {tree.ids[f]} unexplored"))
    return out


def _check(emtg: EMTG, q: Seq, strong_corr: bool) -> tuple[list[Violation], bool]:
    """Violations at ``q`` and whether its answer is sound enough to descend."""
    tree, game = emtg.tree, emtg.game
    where = "(" + ", ".join(tree.ids[h] for h in q) + ")"
    try:
        view = emtg.view(q)
    except UnspecifiedSequence as exc:
        return [Violation("unspecified sequence", where, str(exc))], False
    out = _structure(tree, game.sight.at(q[0]), q, view)
    if out:
        return out, False
    if len(q) == 1:
        if view.nodes != game.sight.at(q[0]):
            out.append(Violation("Corr", where, "believed own sight differs from actual sight"))
        if view.explorations != game.explorations(q[0]):
            out.append(Violation("Corr", where, "believed own explorations differ from actual ones"))
    else:
        parent = emtg.view(q[:-1])
        hk, end = q[-1], tree.end[q[-1]]
        if not all(hk <= g < end and g in parent.nodes for g in view.nodes):
            out.append(Violation("Mon of B_H", where, "believed sight exceeds believer's"))
        if not view.explorations <= {z for z in parent.explorations if hk <= z < end}:
            out.append(Violation("Mon of B_P", where, "believed explorations exceed believer's"))
    if strong_corr:
        out.extend(_strong_corr(emtg, q, view, where))
    return out, True


def _strong_corr(emtg: EMTG, q: Seq, view: View, where: str) -> list[Violation]:
    tree = emtg.tree
    out = []
    if len(q) >= 2 and tree.player[q[0]] == tree.player[q[1]] and is_history_sequence(emtg.game, q[1:]):
        try:
            later = emtg.view(q[1:])
            if not view.nodes <= later.nodes:
                out.append(Violation("strong Corr (self)", where,
                                     "a later self is believed to see less"))
        except UnspecifiedSequence as exc:
            out.append(Violation("unspecified sequence", where, str(exc)))
    for i in range(1, len(q)):
        if tree.player[q[i - 1]] != tree.player[q[i]]:
            continue
        shorter = q[:i] + q[i + 1:]
        try:
            other = emtg.view(shorter)
        except UnspecifiedSequence as exc:
            out.append(Violation("unspecified sequence", where, str(exc)))
            continue
        if i < len(q) - 1:
            ok = other.nodes == view.nodes
        else:
            ok = view.nodes == frozenset(g for g in other.nodes if tree.is_prefix(q[i], g))
        if not ok:
            out.append(Violation("strong Corr (common knowledge)", where,
                                 f"dropping {tree.ids[q[i]]} changes the belief"))
    return out


def validate_beliefs(emtg: EMTG, mode: str = "exhaustive", *, samples: int = 200, seed: int = 0,
                     cap: int = 100_000, strong_corr: bool = False) -> list[Violation]:
    """Check Corr and both monotonicity conditions on reachable sequences.

    ``mode="exhaustive"`` visits every reachable chain and raises
    :class:`CapExceeded` beyond ``cap`` chains; ``mode="sampled"`` checks the
    chains along ``samples`` random descents.
    """
    tree = emtg.tree
    internal = [h for h in range(len(tree)) if tree.children[h]]
    out: list[Violation] = []
    if mode == "exhaustive":
        count = 0
        for h0 in internal:
            stack: list[Seq] = [(h0,)]
            while stack:
                q = stack.pop()
                count += 1
                if count > cap:
                    raise CapExceeded(f"more than {cap} history-sequences")
                found, sound = _check(emtg, q, strong_corr)
                out.extend(found)
                if sound:
                    view = emtg.view(q)
                    stack.extend(q + (g,) for g in sorted(view.nodes, reverse=True)
                                 if g != q[-1] and not view.is_frontier(g))
    elif mode == "sampled":
        rng = random.Random(seed)
        seen: set[Seq] = set()
        for _ in range(samples):
            q: Seq = (rng.choice(internal),)
            while q not in seen:
                seen.add(q)
                found, sound = _check(emtg, q, strong_corr)
                out.extend(found)
                if not sound:
                    break
                view = emtg.view(q)
                options = [g for g in sorted(view.nodes) if g != q[-1] and not view.is_frontier(g)]
                if not options or rng.random() < 0.5:
                    break
                q = q + (rng.choice(options),)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    # stable, duplicate-free report
    return list(dict.fromkeys(out))


def materialize(emtg: EMTG, cap: int = 100_000) -> TableBeliefs:
    """Freeze any belief structure into explicit table entries."""
    tree = emtg.tree
    entries = {}
    for h0 in range(len(tree)):
        if not tree.children[h0]:
            continue
        for q in chains(emtg, h0):
            if len(entries) >= cap:
                raise CapExceeded(f"more than {cap} history-sequences")
            v = emtg.view(q)
            entries[q] = (v.nodes, v.explorations)
    return TableBeliefs(emtg.game, entries)
