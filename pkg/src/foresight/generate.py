"""Seeded scenario generation, the three-player fixture and solver comparison."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .beliefs import EMTG
from .errors import InfeasibleSpec
from .game import Node, backwards_induction
from .scenario import ScenarioDocument, materialized_document
from .sight import scbi
from .solver import Solver, nbs_outcomes

BELIEF_CHOICES = ("projective", "omniscient", "depth-model", "table")


@dataclass(frozen=True)
class GenSpec:
    """Parameters of a random scenario.  Equal specs give equal scenarios.

    ``depth`` bounds the height: every root-to-leaf path is at least
    ``depth[0]`` moves and at most ``depth[1]``.  With ``balanced`` the tree
    is the complete ``branching[1]``-ary tree of height ``depth[1]``.
    Utilities are ``k / den`` with ``den`` drawn from ``denominators`` and
    ``k / den`` inside ``utility_range``.  ``sight_plies=None`` means full
    sight.
    """

    seed: int = 0
    players: int = 2
    branching: tuple[int, int] = (2, 2)
    depth: tuple[int, int] = (1, 3)
    max_nodes: int | None = None
    utility_range: tuple[int, int] = (0, 9)
    denominators: tuple[int, ...] = (1,)
    balanced: bool = False
    sight_plies: int | None = 2
    rollouts: int = 2
    beliefs: str = "depth-model"
    belief_depths: tuple[int, int] = (1, 2)
    belief_widths: tuple[int, int] = (1, 2)
    aggregator: str = "avg"

    def check(self) -> None:
        (bmin, bmax), (dmin, dmax), (lo, hi) = self.branching, self.depth, self.utility_range
        problems = []
        if self.players < 1:
            problems.append("players must be >= 1")
        if not 1 <= bmin <= bmax:
            problems.append("branching bounds must satisfy 1 <= min <= max")
        if not 0 <= dmin <= dmax:
            problems.append("depth bounds must satisfy 0 <= min <= max")
        if lo > hi:
            problems.append("utility range is empty")
        if not self.denominators or min(self.denominators) < 1:
            problems.append("denominators must be positive")
        if self.sight_plies is not None and self.sight_plies < 1:
            problems.append("sight plies must be positive")
        if self.rollouts < 1:
            problems.append("rollouts must be positive")
        if self.beliefs not in BELIEF_CHOICES:
            problems.append(f"unknown beliefs {self.beliefs!r}")
        if not 1 <= self.belief_depths[0] <= self.belief_depths[1]:
            problems.append("belief depth bounds must satisfy 1 <= min <= max")
        if not 1 <= self.belief_widths[0] <= self.belief_widths[1]:
            problems.append("belief width bounds must satisfy 1 <= min <= max")
        if self.max_nodes is not None and self.max_nodes < _subtree_floor(bmin, dmin, 0):
            problems.append(f"{self.max_nodes} nodes cannot reach depth {dmin} with branching {bmin}")
        if problems:
            raise InfeasibleSpec("; ".join(problems))


def _subtree_floor(bmin: int, dmin: int, depth: int) -> int:
    return sum(bmin ** j for j in range(max(0, dmin - depth) + 1))


def _shape(spec: GenSpec, rng: np.random.Generator) -> tuple[list[int], list[int]]:
    """Parent and depth arrays of a random tree, in breadth-first order."""
    (bmin, bmax), (dmin, dmax) = spec.branching, spec.depth
    parent, depth = [-1], [0]
    if spec.balanced:
        frontier = [0]
        for d in range(dmax):
            nxt = []
            for p in frontier:
                for _ in range(bmax):
                    parent.append(p)
                    depth.append(d + 1)
                    nxt.append(len(parent) - 1)
            frontier = nxt
        return parent, depth

    budget = spec.max_nodes
    extra = lambda d: _subtree_floor(bmin, dmin, d) - 1  # noqa: E731
    reserved = extra(0)
    i = 0
    while i < len(parent):
        d = depth[i]
        reserved -= extra(d)
        if d >= dmax:
            k = 0
        elif d < dmin or rng.random() < 0.5:
            k = int(rng.integers(bmin, bmax + 1))
        else:
            k = 0
        if budget is not None and k:
            room = (budget - len(parent) - reserved) // (1 + extra(d + 1))
            k = min(k, room)
            if k < bmin:
                k = bmin if d < dmin else 0
        for _ in range(k):
            parent.append(i)
            depth.append(d + 1)
            reserved += extra(d + 1)
        i += 1
    return parent, depth


def random_scenario(spec: GenSpec) -> ScenarioDocument:
    spec.check()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, 0x5CE7])))
    parent, depth = _shape(spec, rng)
    n = len(parent)
    players = [f"P{i + 1}" for i in range(spec.players)]
    ids = [f"n{i}" for i in range(n)]
    kids: list[list[int]] = [[] for _ in range(n)]
    for i in range(1, n):
        kids[parent[i]].append(i)
    lo, hi = spec.utility_range
    nodes = []
    for i in range(n):
        if kids[i]:
            nodes.append(Node(ids[i], player=players[int(rng.integers(spec.players))],
                              children=tuple((f"a{j}", ids[c]) for j, c in enumerate(kids[i]))))
        else:
            utils = []
            for _ in players:
                den = spec.denominators[int(rng.integers(len(spec.denominators)))]
                utils.append(Fraction(int(rng.integers(lo * den, hi * den + 1)), den))
            nodes.append(Node(ids[i], utilities=tuple(utils)))

    height = max(depth)
    plies = spec.sight_plies
    if spec.beliefs == "omniscient" or plies is None:
        plies = max(1, height)
    sight = {"type": "depth", "plies": plies}
    fork = {"type": "rollout", "rollouts": spec.rollouts, "seed": int(rng.integers(2**63))}
    kind = spec.beliefs
    if kind in ("depth-model", "table"):
        (d0, d1), (w0, w1) = spec.belief_depths, spec.belief_widths
        beliefs = {"type": "depth-model",
                   "depths": {p: int(rng.integers(d0, d1 + 1)) for p in players},
                   "widths": {p: int(rng.integers(w0, w1 + 1)) for p in players},
                   "seed": int(rng.integers(2**63))}
    else:
        beliefs = {"type": kind}
    doc = ScenarioDocument(players, ids[0], nodes, sight, fork, beliefs, spec.aggregator)
    if kind == "table":
        doc = materialized_document(doc)
    return doc


def figure1_fixture() -> ScenarioDocument:
    """Three-player belief chain: Ann at A, Bob at B, Charles at C.

    Ann sees everything and believes Bob overlooks d and Charles sees only d.
    Bob's real beliefs match Ann's model of him; Charles sees both d and e
    and prefers d.
    """
    F = Fraction
    players = ["Ann", "Bob", "Charles"]
    nodes = [
        Node("A", player="Ann", children=(("g", "g"), ("B", "B"))),
        Node("g", utilities=(F(2), F(0), F(0))),
        Node("B", player="Bob", children=(("f", "f"), ("C", "C"))),
        Node("f", utilities=(F(1), F(2), F(0))),
        Node("C", player="Charles", children=(("d", "d"), ("e", "e"))),
        Node("d", utilities=(F(3), F(1), F(1))),
        Node("e", utilities=(F(1), F(3), F(0))),
    ]
    sights = {"A": ["A", "g", "B", "f", "C", "d", "e"], "B": ["B", "f", "C", "e"], "C": ["C", "d", "e"]}
    entries = [
        (["A"], sights["A"], ["g", "f", "d", "e"]),
        (["A", "B"], ["B", "f", "C", "e"], ["f", "e"]),
        (["A", "B", "C"], ["C", "e"], ["e"]),
        (["A", "C"], ["C", "d"], ["d"]),
        (["B"], sights["B"], ["f", "e"]),
        (["B", "C"], ["C", "e"], ["e"]),
        (["C"], sights["C"], ["d", "e"]),
    ]
    return ScenarioDocument(
        players, "A", nodes,
        {"type": "table", "entries": sights},
        {"type": "table", "entries": {k: list(v) for k, v in sights.items()}},
        {"type": "table", "entries": [{"sequence": s, "sight": b, "explorations": p} for s, b, p in entries]},
    )


def _result(emtg: EMTG, z: int) -> dict:
    tree = emtg.tree
    return {"outcome": tree.ids[z], "path": list(tree.path(z)),
            "utilities": {p: str(u) for p, u in zip(tree.players, tree.utilities[z])}}


def compare(emtg: EMTG, solvers: Iterable[str] = ("bi", "scbi", "sces")) -> dict:
    """Run the requested solvers on one scenario and report agreement."""
    solvers = list(dict.fromkeys(solvers))
    unknown = set(solvers) - {"bi", "scbi", "sces"}
    if unknown:
        raise ValueError(f"unknown solvers: {sorted(unknown)}")
    tree = emtg.tree
    report: dict = {"solvers": {}, "agreement": {}}
    got: dict[str, int] = {}
    bi_set: set[int] = set()
    if "bi" in solvers:
        bi_set, profile = backwards_induction(tree)
        z = 0
        while tree.children[z]:
            z = tree.child(z, profile[z])
        got["bi"] = z
        report["solvers"]["bi"] = {**_result(emtg, z), "bi_outcomes": [tree.ids[x] for x in sorted(bi_set)]}
    if "scbi" in solvers:
        got["scbi"] = scbi(emtg.game)[0]
        report["solvers"]["scbi"] = _result(emtg, got["scbi"])
    if "sces" in solvers:
        got["sces"] = Solver(emtg).sol()[0]
        report["solvers"]["sces"] = _result(emtg, got["sces"])
    if "sces" in got and "scbi" in got:
        report["agreement"]["sces=scbi"] = got["sces"] == got["scbi"]
    if "bi" in got:
        for name in ("scbi", "sces"):
            if name in got:
                report["agreement"][f"{name} in bi"] = got[name] in bi_set
    return report


def oracle_disagreements(emtg: EMTG, cap: int = 12) -> list[tuple[int, str, set[str]]]:
    """Steps of the solution path whose move starts no enumerated solution outcome.

    Each entry is ``(history, chosen action, actions the enumeration allows)``.
    """
    tree = emtg.tree
    solver = Solver(emtg)
    z, trace = solver.sol()
    memo: dict = {}
    bad = []
    for step in trace.steps:
        h = step.history
        allowed = {tree.first_action(h, y) for y in nbs_outcomes(emtg, (h,), cap, memo) if y != h}
        if step.chosen not in allowed:
            bad.append((h, step.chosen, allowed))
    return bad
