"""Scenario documents, solve traces and DOT export.

A scenario is a JSON object (schema ``foresight-scenario/1``)::

    {
      "format": "foresight-scenario/1",
      "players": ["Ann", "Bob"],
      "root": "A",
      "nodes": [
        {"id": "A", "player": "Ann",
         "children": [{"action": "l", "node": "x"}, {"action": "r", "node": "y"}]},
        {"id": "x", "utilities": {"Ann": "1", "Bob": "-1/2"}},
        {"id": "y", "utilities": {"Ann": "0.25", "Bob": "3"}}
      ],
      "sight":    {"type": "depth", "plies": 2}
                | {"type": "table", "entries": {"A": ["A", "x", "y"]}},
      "fork":     {"type": "rollout", "rollouts": 2, "seed": 7}
                | {"type": "table", "entries": {"A": ["A", "x", "y"]}},
      "beliefs":  {"type": "projective"} | {"type": "omniscient"}
                | {"type": "depth-model", "depths": {"Ann": 1, "Bob": 2},
                   "widths": {"Ann": 1, "Bob": 1}, "seed": 3}
                | {"type": "table", "entries": [
                    {"sequence": ["A"], "sight": ["A", "x", "y"], "explorations": ["x", "y"]}]},
      "aggregator": "avg"
    }

Utilities are strings holding exact rationals (``"3"``, ``"-1/2"``,
``"0.25"``).  Child order is the canonical tie-break order.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .beliefs import (EMTG, DepthModelBeliefs, OmniscientBeliefs, ProjectiveBeliefs,
                      TableBeliefs, validate_beliefs)
from .errors import CapExceeded, ForesightError, InvalidGame, Violation
from .game import GameTree, Node, validate_game
from .sight import AGGREGATORS, MTG, DepthSight, RolloutFork, TableFork, TableSight, validate_mtg
from .trace import SolveTrace

SCENARIO_FORMAT = "foresight-scenario/1"
TRACE_FORMAT = "foresight-trace/1"
BELIEF_TYPES = ("projective", "omniscient", "depth-model", "table")


@dataclass(frozen=True)
class Issue:
    location: str
    key: str
    expected: str

    def __str__(self) -> str:
        return f"{self.location}: {self.key}: {self.expected}"


class ScenarioError(ForesightError):
    def __init__(self, issues: Sequence[Issue]):
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


@dataclass
class ScenarioDocument:
    players: list[str]
    root: str
    nodes: list[Node]
    sight: dict[str, Any]
    fork: dict[str, Any]
    beliefs: dict[str, Any]
    aggregator: str = "avg"
    _built: EMTG | None = field(default=None, compare=False, repr=False)

    def build(self) -> EMTG:
        """Construct the game objects (no belief validation)."""
        if self._built is None:
            self._built = _build(self)
        return self._built

    def fresh(self) -> EMTG:
        """A newly built game, with empty oracle caches and counters."""
        return _build(self)


_RATIONAL = re.compile(r"-?\d{1,60}(?:/\d{1,60}|\.\d{1,60})?")


def parse_rational(text: str) -> Fraction:
    """Exact rational from ``"3"``, ``"-1/2"`` or ``"0.25"``; no exponents."""
    if not isinstance(text, str) or not _RATIONAL.fullmatch(text):
        raise ValueError(text)
    return Fraction(text)


# -- parsing ----------------------------------------------------------------


class _Reader:
    def __init__(self):
        self.issues: list[Issue] = []

    def fail(self, where: str, key: str, expected: str) -> None:
        self.issues.append(Issue(where, key, expected))

    def obj(self, value, where, key) -> dict | None:
        if not isinstance(value, dict):
            self.fail(where, key, "an object")
            return None
        return value

    def string(self, value, where, key) -> str | None:
        if not isinstance(value, str) or not value:
            self.fail(where, key, "a non-empty string")
            return None
        return value

    def count(self, value, where, key, lo: int = 1, hi: int | None = None) -> int | None:
        if isinstance(value, bool) or not isinstance(value, int) or value < lo or (hi is not None and value > hi):
            self.fail(where, key, f"an integer >= {lo}" + (f" and <= {hi}" if hi is not None else ""))
            return None
        return value

    def id_list(self, value, where, key, known: set[str]) -> list[str] | None:
        if not isinstance(value, list) or not value:
            self.fail(where, key, "a non-empty list of node ids")
            return None
        out = []
        for i, item in enumerate(value):
            if not isinstance(item, str) or item not in known:
                self.fail(f"{where}/{i}", key, "a known node id")
                return None
            out.append(item)
        return out


def _keys(r: _Reader, d: dict, where: str, required: Iterable[str], optional: Iterable[str] = ()) -> bool:
    ok = True
    allowed = set(required) | set(optional)
    for k in required:
        if k not in d:
            r.fail(where, k, "a required key")
            ok = False
    for k in d:
        if k not in allowed:
            r.fail(f"{where}/{k}", k, "no such key (allowed: " + ", ".join(sorted(allowed)) + ")")
            ok = False
    return ok


def _read_nodes(r: _Reader, raw, players: list[str]) -> list[Node] | None:
    if not isinstance(raw, list) or not raw:
        r.fail("/nodes", "nodes", "a non-empty list of node objects")
        return None
    nodes = []
    for i, item in enumerate(raw):
        where = f"/nodes/{i}"
        d = r.obj(item, where, "node")
        if d is None:
            continue
        if "utilities" in d:
            if not _keys(r, d, where, ["id", "utilities"]):
                continue
            nid = r.string(d["id"], where + "/id", "id")
            utils = r.obj(d["utilities"], where + "/utilities", "utilities")
            if nid is None or utils is None:
                continue
            if set(utils) != set(players):
                r.fail(where + "/utilities", "utilities", "one entry per player: " + ", ".join(players))
                continue
            values = []
            for p in players:
                try:
                    values.append(parse_rational(utils[p]))
                except (ValueError, ZeroDivisionError, TypeError):
                    r.fail(f"{where}/utilities/{p}", p, 'a rational string such as "3", "-1/2" or "0.25"')
            if len(values) == len(players):
                nodes.append(Node(nid, utilities=tuple(values)))
        else:
            if not _keys(r, d, where, ["id", "player", "children"]):
                continue
            nid = r.string(d["id"], where + "/id", "id")
            player = r.string(d["player"], where + "/player", "player")
            kids = d["children"]
            if not isinstance(kids, list):
                r.fail(where + "/children", "children", "a list of {action, node} objects")
                continue
            children = []
            for j, kid in enumerate(kids):
                kw = f"{where}/children/{j}"
                k = r.obj(kid, kw, "child")
                if k is None or not _keys(r, k, kw, ["action", "node"]):
                    continue
                a = r.string(k["action"], kw + "/action", "action")
                c = r.string(k["node"], kw + "/node", "node")
                if a is not None and c is not None:
                    children.append((a, c))
            if nid is not None and player is not None and len(children) == len(kids):
                nodes.append(Node(nid, player=player, children=tuple(children)))
    return nodes


def _read_region_table(r: _Reader, d: dict, where: str, known: set[str]) -> dict[str, list[str]] | None:
    entries = r.obj(d.get("entries"), where + "/entries", "entries")
    if entries is None:
        return None
    out = {}
    for k, v in entries.items():
        if k not in known:
            r.fail(f"{where}/entries/{k}", k, "a known node id")
            continue
        ids = r.id_list(v, f"{where}/entries/{k}", k, known)
        if ids is not None:
            out[k] = ids
    return out


def _read_sight(r: _Reader, raw, known: set[str]) -> dict | None:
    d = r.obj(raw, "/sight", "sight")
    if d is None:
        return None
    kind = d.get("type")
    if kind == "depth":
        if _keys(r, d, "/sight", ["type", "plies"]):
            plies = r.count(d["plies"], "/sight/plies", "plies")
            return None if plies is None else {"type": "depth", "plies": plies}
    elif kind == "table":
        if _keys(r, d, "/sight", ["type", "entries"]):
            t = _read_region_table(r, d, "/sight", known)
            return None if t is None else {"type": "table", "entries": t}
    else:
        r.fail("/sight/type", "type", 'one of "depth", "table"')
    return None


def _read_fork(r: _Reader, raw, known: set[str]) -> dict | None:
    d = r.obj(raw, "/fork", "fork")
    if d is None:
        return None
    kind = d.get("type")
    if kind == "rollout":
        if _keys(r, d, "/fork", ["type", "rollouts", "seed"]):
            n = r.count(d["rollouts"], "/fork/rollouts", "rollouts")
            seed = r.count(d["seed"], "/fork/seed", "seed", 0, 2**64 - 1)
            if n is not None and seed is not None:
                return {"type": "rollout", "rollouts": n, "seed": seed}
    elif kind == "table":
        if _keys(r, d, "/fork", ["type", "entries"]):
            t = _read_region_table(r, d, "/fork", known)
            return None if t is None else {"type": "table", "entries": t}
    else:
        r.fail("/fork/type", "type", 'one of "rollout", "table"')
    return None


def _per_player(r: _Reader, raw, where: str, players: list[str]) -> dict[str, int] | None:
    d = r.obj(raw, where, where.rsplit("/", 1)[-1])
    if d is None:
        return None
    if set(d) != set(players):
        r.fail(where, where.rsplit("/", 1)[-1], "one positive integer per player")
        return None
    out = {}
    for p in players:
        v = r.count(d[p], f"{where}/{p}", p)
        if v is None:
            return None
        out[p] = v
    return out


def _read_beliefs(r: _Reader, raw, players: list[str], known: set[str]) -> dict | None:
    d = r.obj(raw, "/beliefs", "beliefs")
    if d is None:
        return None
    kind = d.get("type")
    if kind in ("projective", "omniscient"):
        if _keys(r, d, "/beliefs", ["type"]):
            return {"type": kind}
    elif kind == "depth-model":
        if _keys(r, d, "/beliefs", ["type", "depths", "widths", "seed"]):
            depths = _per_player(r, d["depths"], "/beliefs/depths", players)
            widths = _per_player(r, d["widths"], "/beliefs/widths", players)
            seed = r.count(d["seed"], "/beliefs/seed", "seed", 0, 2**64 - 1)
            if depths is not None and widths is not None and seed is not None:
                return {"type": kind, "depths": depths, "widths": widths, "seed": seed}
    elif kind == "table":
        if not _keys(r, d, "/beliefs", ["type", "entries"]):
            return None
        raw_entries = d["entries"]
        if not isinstance(raw_entries, list):
            r.fail("/beliefs/entries", "entries", "a list of {sequence, sight, explorations} objects")
            return None
        entries = []
        seen = set()
        for i, e in enumerate(raw_entries):
            where = f"/beliefs/entries/{i}"
            e = r.obj(e, where, "entry")
            if e is None or not _keys(r, e, where, ["sequence", "sight", "explorations"]):
                continue
            seq = r.id_list(e["sequence"], where + "/sequence", "sequence", known)
            sight = r.id_list(e["sight"], where + "/sight", "sight", known)
            expl = r.id_list(e["explorations"], where + "/explorations", "explorations", known)
            if seq is None or sight is None or expl is None:
                continue
            if tuple(seq) in seen:
                r.fail(where + "/sequence", "sequence", "a sequence not listed before")
                continue
            seen.add(tuple(seq))
            entries.append({"sequence": seq, "sight": sight, "explorations": expl})
        return {"type": "table", "entries": entries}
    else:
        r.fail("/beliefs/type", "type", "one of " + ", ".join(f'"{t}"' for t in BELIEF_TYPES))
    return None


def parse_scenario(text: str | bytes, validate: bool = True, *, monotone: bool = False,
                   strong_corr: bool = False, belief_cap: int = 20_000) -> ScenarioDocument:
    """Parse and validate a scenario; raises :class:`ScenarioError` listing every issue.

    Validation runs game, then sight/fork, then beliefs; belief checking is
    exhaustive up to ``belief_cap`` sequences and sampled beyond it.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ScenarioError([Issue(f"byte {exc.start}", "encoding", "UTF-8 text")]) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([Issue(f"line {exc.lineno} column {exc.colno}", "syntax", exc.msg)]) from None
    except ValueError as exc:
        raise ScenarioError([Issue("/", "syntax", str(exc))]) from None
    except RecursionError:
        raise ScenarioError([Issue("/", "syntax", "nesting too deep")]) from None

    r = _Reader()
    if not isinstance(raw, dict):
        raise ScenarioError([Issue("/", "document", "a JSON object")])
    if not _keys(r, raw, "", ["format", "players", "root", "nodes", "sight", "fork", "beliefs"], ["aggregator"]):
        raise ScenarioError(r.issues)
    if raw["format"] != SCENARIO_FORMAT:
        r.fail("/format", "format", f'"{SCENARIO_FORMAT}"')
    players = raw["players"]
    if (not isinstance(players, list) or not players
            or not all(isinstance(p, str) and p for p in players) or len(set(players)) != len(players)):
        r.fail("/players", "players", "a non-empty list of distinct player names")
        raise ScenarioError(r.issues)
    root = r.string(raw["root"], "/root", "root")
    nodes = _read_nodes(r, raw["nodes"], players)
    # ids of malformed nodes still count, so one bad node yields one issue
    declared = raw["nodes"] if isinstance(raw["nodes"], list) else []
    known = {d["id"] for d in declared if isinstance(d, dict) and isinstance(d.get("id"), str)}
    sight = _read_sight(r, raw["sight"], known)
    fork = _read_fork(r, raw["fork"], known)
    beliefs = _read_beliefs(r, raw["beliefs"], players, known)
    aggregator = raw.get("aggregator", "avg")
    if not isinstance(aggregator, str) or aggregator not in AGGREGATORS:
        r.fail("/aggregator", "aggregator", "one of " + ", ".join(f'"{a}"' for a in AGGREGATORS))
    if r.issues:
        raise ScenarioError(r.issues)

    doc = ScenarioDocument(players, root, nodes, sight, fork, beliefs, aggregator)
    if validate:
        issues = validate_document(doc, monotone=monotone, strong_corr=strong_corr, belief_cap=belief_cap)
        if issues:
            raise ScenarioError(issues)
    return doc


def _issues(violations: Iterable[Violation], location: str) -> list[Issue]:
    return [Issue(f"{location} {v.where}", v.kind, v.detail or "invariant to hold") for v in violations]


def validate_document(doc: ScenarioDocument, *, monotone: bool = False, strong_corr: bool = False,
                      belief_cap: int = 20_000) -> list[Issue]:
    game_issues = validate_game(doc.players, doc.nodes, doc.root)
    if game_issues:
        return _issues(game_issues, "/nodes")
    tree = GameTree(doc.players, doc.nodes, doc.root)
    internal = {tree.ids[h] for h in range(len(tree)) if tree.children[h]}
    out = []
    for name, spec in (("sight", doc.sight), ("fork", doc.fork)):
        if spec["type"] == "table":
            missing = sorted(internal - set(spec["entries"]))
            extra = sorted(set(spec["entries"]) - internal)
            out += [Issue(f"/{name}/entries", h, "an entry for every internal node") for h in missing]
            out += [Issue(f"/{name}/entries/{h}", h, "internal node ids only") for h in extra]
    if out:
        return out
    try:
        emtg = doc.fresh()
    except (ValueError, InvalidGame) as exc:
        return [Issue("/", "build", str(exc))]
    mtg_issues = validate_mtg(emtg.game, monotone=monotone)
    if mtg_issues:
        return _issues(mtg_issues, "/sight" if doc.fork["type"] != "table" else "/fork")
    try:
        found = validate_beliefs(emtg, "exhaustive", cap=belief_cap, strong_corr=strong_corr)
    except CapExceeded:
        found = validate_beliefs(doc.fresh(), "sampled", samples=500, seed=0, strong_corr=strong_corr)
    return _issues(found, "/beliefs")


def _build(doc: ScenarioDocument) -> EMTG:
    tree = GameTree(doc.players, doc.nodes, doc.root)
    ix = tree.index

    def region_table(entries: dict[str, list[str]]) -> dict[int, frozenset[int]]:
        return {ix[k]: frozenset(ix[g] for g in v) for k, v in entries.items()}

    s = doc.sight
    sight = DepthSight(tree, s["plies"]) if s["type"] == "depth" else TableSight(region_table(s["entries"]))
    f = doc.fork
    if f["type"] == "rollout":
        fork = RolloutFork(tree, sight, f["rollouts"], f["seed"])
    else:
        fork = TableFork(region_table(f["entries"]))
    mtg = MTG(tree, sight, fork, doc.aggregator)
    b = doc.beliefs
    pidx = {p: i for i, p in enumerate(tree.players)}
    if b["type"] == "projective":
        beliefs = ProjectiveBeliefs(mtg)
    elif b["type"] == "omniscient":
        beliefs = OmniscientBeliefs(mtg)
    elif b["type"] == "depth-model":
        beliefs = DepthModelBeliefs(mtg, {pidx[p]: v for p, v in b["depths"].items()},
                                    {pidx[p]: v for p, v in b["widths"].items()}, b["seed"])
    else:
        beliefs = TableBeliefs(mtg, {
            tuple(ix[h] for h in e["sequence"]):
                (frozenset(ix[h] for h in e["sight"]), frozenset(ix[h] for h in e["explorations"]))
            for e in b["entries"]})
    return EMTG(mtg, beliefs)


# -- serialization ----------------------------------------------------------


def document_to_dict(doc: ScenarioDocument) -> dict:
    nodes = []
    for n in doc.nodes:
        if n.utilities is not None:
            nodes.append({"id": n.id, "utilities": {p: str(Fraction(u)) for p, u in zip(doc.players, n.utilities)}})
        else:
            nodes.append({"id": n.id, "player": n.player,
                          "children": [{"action": a, "node": c} for a, c in n.children]})
    return {
        "format": SCENARIO_FORMAT,
        "players": list(doc.players),
        "root": doc.root,
        "nodes": nodes,
        "sight": doc.sight,
        "fork": doc.fork,
        "beliefs": doc.beliefs,
        "aggregator": doc.aggregator,
    }


def serialize_scenario(doc: ScenarioDocument) -> str:
    return json.dumps(document_to_dict(doc), indent=2, ensure_ascii=False) + "\n"


def load_scenario(path, **kwargs) -> ScenarioDocument:
    with open(path, "rb") as fh:
        return parse_scenario(fh.read(), **kwargs)


def save_scenario(doc: ScenarioDocument, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_scenario(doc))


def materialized_document(doc: ScenarioDocument) -> ScenarioDocument:
    """Same scenario with sight, fork and beliefs written out as tables."""
    from .beliefs import materialize

    emtg = doc.fresh()
    tree = emtg.tree
    ids = tree.ids

    def listing(region) -> list[str]:
        return [ids[g] for g in sorted(region)]

    internal = [h for h in range(len(tree)) if tree.children[h]]
    sight = {"type": "table", "entries": {ids[h]: listing(emtg.game.sight.at(h)) for h in internal}}
    fork = {"type": "table", "entries": {ids[h]: listing(emtg.game.fork.at(h)) for h in internal}}
    table = materialize(emtg)
    entries = [{"sequence": [ids[h] for h in q], "sight": listing(a), "explorations": listing(b)}
               for q, (a, b) in sorted(table.entries.items())]
    return ScenarioDocument(list(doc.players), doc.root, list(doc.nodes), sight, fork,
                            {"type": "table", "entries": entries}, doc.aggregator)


# -- traces -----------------------------------------------------------------


def _values(tree: GameTree, value) -> dict[str, str]:
    return {p: str(v) for p, v in zip(tree.players, value)}


def trace_to_dict(trace: SolveTrace, tree: GameTree) -> dict:
    ids = tree.ids
    z = trace.outcome
    steps = []
    for s in trace.steps:
        steps.append({
            "history": ids[s.history],
            "path": list(tree.path(s.history)),
            "chosen": s.chosen,
            "continuations": {ids[h]: a for h, a in sorted(s.table.items())},
            "candidates": [{"action": c.action, "endpoint": ids[c.endpoint], "value": _values(tree, c.value)}
                           for c in s.candidates],
        })
    return {
        "format": TRACE_FORMAT,
        "solver": trace.solver,
        "outcome": {"node": ids[z], "path": list(tree.path(z)), "utilities": _values(tree, tree.utilities[z])},
        "steps": steps,
        "stats": dict(sorted(trace.stats.items())),
    }


def write_trace(trace: SolveTrace, tree: GameTree) -> str:
    """Trace as stable-ordered JSON (schema ``foresight-trace/1``)."""
    return json.dumps(trace_to_dict(trace, tree), indent=2, ensure_ascii=False) + "\n"


# -- DOT --------------------------------------------------------------------


def _esc(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _q(text: str) -> str:
    return f'"{_esc(text)}"'


def export_dot(game, *, sight: Iterable[int] = (), believed: Iterable[int] = (),
               path: Iterable[int] = (), name: str = "game") -> str:
    """Graphviz description of a game tree with optional overlays.

    ``game`` is a :class:`GameTree` or anything with a ``tree`` attribute
    (a believed game).  Overlays are node sets of that tree: ``sight`` is
    shaded, ``believed`` is outlined dashed and ``path`` (the nodes of a
    play, root first) is drawn in red.
    """
    tree: GameTree = getattr(game, "tree", game)
    sight, believed, on_path = set(sight), set(believed), set(path)
    lines = [f"digraph {_q(name)} {{", '  node [fontname="Helvetica"];', '  edge [fontname="Helvetica"];']
    for h in range(len(tree)):
        nid = tree.ids[h]
        if tree.children[h]:
            label = f"{_esc(nid)}\\n{_esc(tree.players[tree.player[h]])}"
            attrs = ["shape=circle"]
        else:
            vals = ", ".join(str(u) for u in tree.utilities[h])
            label = f"{_esc(nid)}\\n({vals})"
            attrs = ["shape=box"]
        if h in sight:
            attrs += ["style=filled", 'fillcolor="lightblue"']
        if h in believed:
            attrs += ['color="darkgreen"', "penwidth=2", 'style="dashed' + (',filled"' if h in sight else '"')]
            if h in sight:
                attrs.remove("style=filled")
        if h in on_path:
            attrs += ['fontcolor="red"'] + ([] if h in believed else ['color="red"'])
        lines.append(f"  {_q(nid)} [label=\"{label}\", {', '.join(attrs)}];")
    for h in range(len(tree)):
        for a, c in tree.moves(h):
            attrs = [f"label={_q(a)}"]
            if h in on_path and c in on_path:
                attrs += ['color="red"', "penwidth=2.5"]
            lines.append(f"  {_q(tree.ids[h])} -> {_q(tree.ids[c])} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
