"""Finite extensive game forms with exact rational utilities.

Histories are node indices in canonical preorder (root is 0, children follow
their declaration order).  With that numbering ``g`` extends ``h`` exactly when
``h <= g < end[h]``, so prefix tests are O(1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Protocol, Sequence

from .errors import InvalidGame, UndefinedChoice, Violation

Profile = dict[int, str]


@dataclass(frozen=True)
class Node:
    """Declarative node record, the input form of a game tree.

    Internal nodes carry ``player`` and ``children``; leaves carry
    ``utilities`` (one exact rational per player, in player order).
    """

    id: str
    player: str | None = None
    utilities: tuple[Fraction, ...] | None = None
    children: tuple[tuple[str, str], ...] = ()  # (action label, child id)


def validate_game(players: Sequence[str], nodes: Iterable[Node], root: str) -> list[Violation]:
    """Check the tree invariants of a candidate game; never raises."""
    nodes = list(nodes)
    out: list[Violation] = []
    if not players:
        out.append(Violation("no players", "<game>"))
    if len(set(players)) != len(players):
        out.append(Violation("duplicate player", "<game>"))
    by_id: dict[str, Node] = {}
    for node in nodes:
        if node.id in by_id:
            out.append(Violation("duplicate node id", node.id))
        by_id[node.id] = node
    if root not in by_id:
        out.append(Violation("missing root", root))
        return out

    parents: dict[str, list[str]] = {}
    for node in nodes:
        internal = node.player is not None
        if internal and node.utilities is not None:
            out.append(Violation("node is both internal and leaf", node.id))
        if internal:
            if node.player not in players:
                out.append(Violation("unknown turn player", node.id, repr(node.player)))
            if not node.children:
                out.append(Violation("childless internal node", node.id))
        else:
            if node.children:
                out.append(Violation("leaf with children", node.id))
            if node.utilities is None:
                out.append(Violation("leaf without utilities", node.id))
            elif len(node.utilities) != len(players):
                out.append(Violation("utility arity", node.id,
                                     f"expected {len(players)}, got {len(node.utilities)}"))
        labels = [a for a, _ in node.children]
        if len(set(labels)) != len(labels):
            out.append(Violation("ambiguous action", node.id))
        for _, child in node.children:
            if child not in by_id:
                out.append(Violation("dangling child", node.id, repr(child)))
            else:
                parents.setdefault(child, []).append(node.id)

    if parents.get(root):
        out.append(Violation("root has a parent", root))
    for nid, ps in parents.items():
        if len(ps) > 1:
            out.append(Violation("multiple parents", nid, ", ".join(ps)))

    # reachability (also rules out cycles once single-parenthood holds)
    seen = {root}
    stack = [root]
    while stack:
        for _, child in by_id[stack.pop()].children:
            if child in by_id and child not in seen:
                seen.add(child)
                stack.append(child)
    for node in nodes:
        if node.id not in seen:
            out.append(Violation("unreachable node", node.id))
    return out


class Arena(Protocol):
    """Anything backwards induction can run on: a tree or a sight view."""

    root: int

    def moves(self, h: int) -> list[tuple[str, int]]: ...

    def payoff(self, h: int) -> tuple[Fraction, ...]: ...

    def mover(self, h: int) -> int: ...


class GameTree:
    """Immutable finite extensive game.

    Raises :class:`InvalidGame` if the records break any tree invariant.
    """

    def __init__(self, players: Sequence[str], nodes: Iterable[Node], root: str):
        nodes = list(nodes)
        violations = validate_game(players, nodes, root)
        if violations:
            raise InvalidGame(violations)
        self.players: tuple[str, ...] = tuple(players)
        self.records: tuple[Node, ...] = tuple(nodes)
        by_id = {n.id: n for n in nodes}
        pidx = {p: i for i, p in enumerate(self.players)}

        self.ids: list[str] = []
        self.parent: list[int] = []
        self.action: list[str | None] = []
        self.depth: list[int] = []
        self.player: list[int] = []
        self.utilities: list[tuple[Fraction, ...] | None] = []
        self.children: list[list[int]] = []
        self._labels: list[list[str]] = []
        stack: list[tuple[str, int, str | None]] = [(root, -1, None)]
        while stack:
            nid, par, act = stack.pop()
            i = len(self.ids)
            rec = by_id[nid]
            self.ids.append(nid)
            self.parent.append(par)
            self.action.append(act)
            self.depth.append(0 if par < 0 else self.depth[par] + 1)
            self.player.append(-1 if rec.player is None else pidx[rec.player])
            self.utilities.append(None if rec.utilities is None else tuple(Fraction(u) for u in rec.utilities))
            self.children.append([])
            self._labels.append([])
            if par >= 0:
                self.children[par].append(i)
                self._labels[par].append(act)
            for label, child in reversed(rec.children):
                stack.append((child, i, label))

        n = len(self.ids)
        self.index: dict[str, int] = {nid: i for i, nid in enumerate(self.ids)}
        self.end = list(range(1, n + 1))
        self.leaf_count = [1 if not c else 0 for c in self.children]
        for i in range(n - 1, 0, -1):
            p = self.parent[i]
            self.end[p] = max(self.end[p], self.end[i])
            self.leaf_count[p] += self.leaf_count[i]
        self._by_label = [dict(zip(self._labels[i], self.children[i])) for i in range(n)]
        self.height = max(self.depth)
        self.terminals: tuple[int, ...] = tuple(i for i in range(n) if not self.children[i])

    root = 0

    def __len__(self) -> int:
        return len(self.ids)

    def __repr__(self) -> str:
        return f"GameTree({len(self)} nodes, players={list(self.players)})"

    def node(self, nid: str) -> int:
        return self.index[nid]

    def is_terminal(self, h: int) -> bool:
        return not self.children[h]

    def is_quasi_terminal(self, h: int) -> bool:
        return bool(self.children[h]) and all(not self.children[c] for c in self.children[h])

    def is_prefix(self, h: int, g: int) -> bool:
        """``h`` is a (non-strict) prefix of ``g``."""
        return h <= g < self.end[h]

    def subtree(self, h: int) -> range:
        return range(h, self.end[h])

    def moves(self, h: int) -> list[tuple[str, int]]:
        return list(zip(self._labels[h], self.children[h]))

    def child(self, h: int, label: str) -> int:
        return self._by_label[h][label]

    def has_action(self, h: int, label: str) -> bool:
        return label in self._by_label[h]

    def payoff(self, h: int) -> tuple[Fraction, ...]:
        u = self.utilities[h]
        if u is None:
            raise ValueError(f"{self.ids[h]!r} is not terminal")
        return u

    def mover(self, h: int) -> int:
        return self.player[h]

    def ancestor(self, g: int, depth: int) -> int:
        while self.depth[g] > depth:
            g = self.parent[g]
        return g

    def first_action(self, h: int, g: int) -> str:
        """Label of the move out of ``h`` on the way to its strict extension ``g``."""
        return self.action[self.ancestor(g, self.depth[h] + 1)]

    def path(self, h: int) -> tuple[str, ...]:
        labels = []
        while h > 0:
            labels.append(self.action[h])
            h = self.parent[h]
        return tuple(reversed(labels))

    def from_path(self, labels: Iterable[str]) -> int:
        h = 0
        for a in labels:
            h = self._by_label[h][a]
        return h


def outcome(arena: Arena, profile: Mapping[int, str], start: int | None = None) -> int:
    """Follow ``profile`` from ``start`` (default: the root) to a terminal."""
    h = arena.root if start is None else start
    while True:
        moves = arena.moves(h)
        if not moves:
            return h
        label = profile.get(h)
        target = next((c for a, c in moves if a == label), None)
        if target is None:
            ids = getattr(arena, "ids", None) or arena.tree.ids
            raise UndefinedChoice(ids[h])
        h = target


def _interior(arena: Arena) -> list[int]:
    """Interior nodes of ``arena`` in reverse preorder (children before parents)."""
    order = []
    stack = [arena.root]
    while stack:
        h = stack.pop()
        moves = arena.moves(h)
        if moves:
            order.append(h)
            stack.extend(c for _, c in moves)
    order.sort(reverse=True)
    return order


def backwards_induction(arena: Arena) -> tuple[set[int], Profile]:
    """All subgame-perfect outcomes plus the earliest-action witness profile.

    The outcome set follows the usual characterisation for pure strategies:
    an outcome ``z`` reached through action ``a`` survives at ``h`` when the
    mover weakly prefers it to the worst surviving outcome of every other
    action (the other subgames may always settle on that worst one).
    """
    outcomes: dict[int, set[int]] = {}
    best: dict[int, int] = {}
    profile: Profile = {}

    def leafset(h: int) -> set[int]:
        return outcomes[h] if h in outcomes else {h}

    def witness(h: int) -> int:
        return best.get(h, h)

    for h in _interior(arena):
        i = arena.mover(h)
        moves = arena.moves(h)
        floors = [min(arena.payoff(z)[i] for z in leafset(c)) for _, c in moves]
        surviving: set[int] = set()
        for k, (_, c) in enumerate(moves):
            bar = max((f for j, f in enumerate(floors) if j != k), default=None)
            surviving.update(z for z in leafset(c) if bar is None or arena.payoff(z)[i] >= bar)
        outcomes[h] = surviving

        chosen_label, chosen_val, chosen_z = None, None, None
        for label, c in moves:
            z = witness(c)
            v = arena.payoff(z)[i]
            if chosen_val is None or v > chosen_val:
                chosen_label, chosen_val, chosen_z = label, v, z
        profile[h] = chosen_label
        best[h] = chosen_z
    return leafset(arena.root), profile


def is_subgame_perfect(arena: Arena, profile: Mapping[int, str]) -> int | None:
    """One-deviation check; returns the first failing history or ``None``."""
    for h in sorted(_interior(arena)):
        i = arena.mover(h)
        here = arena.payoff(outcome(arena, profile, h))[i]
        for _, c in arena.moves(h):
            if arena.payoff(outcome(arena, profile, c))[i] > here:
                return h
    return None


def affine(tree: GameTree, player: int, scale: Fraction, shift: Fraction) -> GameTree:
    """Copy of ``tree`` with ``scale * u + shift`` applied to one player's utilities."""
    nodes = []
    for rec in tree.records:
        if rec.utilities is None:
            nodes.append(rec)
        else:
            u = list(rec.utilities)
            u[player] = scale * Fraction(u[player]) + shift
            nodes.append(Node(rec.id, utilities=tuple(u)))
    return GameTree(tree.players, nodes, tree.ids[0])
