"""Command-line entry point.

Exit codes: 0 ok, 1 validation failure, 2 solver error, 3 oracle
disagreement, 4 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .beliefs import is_history_sequence
from .errors import ForesightError, InfeasibleSpec
from .game import backwards_induction
from .generate import BELIEF_CHOICES, GenSpec, compare, oracle_disagreements, random_scenario
from .scenario import (ScenarioDocument, ScenarioError, export_dot, parse_scenario, serialize_scenario,
                       validate_document, write_trace)
from .sight import AGGREGATORS, scbi
from .solver import Solver

OK, INVALID, SOLVER_ERROR, DISAGREEMENT, USAGE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _note(text: str) -> None:
    print(text, file=sys.stderr)


def _seed_of(doc: ScenarioDocument) -> int | None:
    for part in (doc.fork, doc.beliefs):
        if "seed" in part:
            return part["seed"]
    return None


def _load(args) -> ScenarioDocument:
    """Read, reseed and validate the input scenario."""
    try:
        data = Path(args.input).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    doc = parse_scenario(data, validate=False)
    if args.seed is not None:
        if "seed" in doc.fork:
            doc.fork = {**doc.fork, "seed": args.seed}
        if "seed" in doc.beliefs:
            doc.beliefs = {**doc.beliefs, "seed": args.seed}
    seed = _seed_of(doc)
    _note(f"effective seed: {seed if seed is not None else 'none (scenario has no random parts)'}")
    issues = validate_document(doc, monotone=args.monotone_sight, strong_corr=args.strong_corr)
    if issues:
        raise ScenarioError(issues)
    return doc


def _nodes_to(tree, z: int) -> list[int]:
    out = [z]
    while tree.parent[out[-1]] >= 0:
        out.append(tree.parent[out[-1]])
    return out[::-1]


def _outcome_lines(tree, z: int) -> str:
    utils = ", ".join(f"{p}={u}" for p, u in zip(tree.players, tree.utilities[z]))
    path = " ".join(tree.ids[h] for h in _nodes_to(tree, z))
    return f"outcome: {tree.ids[z]}\npath: {path}\nutilities: {utils}\n"


def cmd_solve(args) -> int:
    emtg = _load(args).build()
    z, trace = Solver(emtg).sol()
    sys.stdout.write(_outcome_lines(emtg.tree, z))
    if args.trace:
        _emit(write_trace(trace, emtg.tree), args.output)
    return OK


def cmd_scbi(args) -> int:
    emtg = _load(args).build()
    z, _, trace = scbi(emtg.game)
    sys.stdout.write(_outcome_lines(emtg.tree, z))
    if args.trace:
        _emit(write_trace(trace, emtg.tree), args.output)
    return OK


def cmd_bi(args) -> int:
    tree = _load(args).build().tree
    outcomes, profile = backwards_induction(tree)
    z = 0
    while tree.children[z]:
        z = tree.child(z, profile[z])
    text = _outcome_lines(tree, z) + "bi outcomes: " + " ".join(tree.ids[x] for x in sorted(outcomes)) + "\n"
    _emit(text, args.output)
    return OK


def cmd_check(args) -> int:
    try:
        _load(args)
    except ScenarioError as exc:
        text = "".join(f"violation: {i}\n" for i in exc.issues)
        _emit(text, args.output)
        return INVALID
    _emit("ok\n", args.output)
    return OK


def cmd_compare(args) -> int:
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    bad = set(solvers) - {"bi", "scbi", "sces"}
    if bad or not solvers:
        raise UsageError(f"--solvers takes a comma list of bi, scbi, sces (got {args.solvers!r})")
    report = compare(_load(args).build(), solvers)
    _emit(json.dumps(report, indent=2) + "\n", args.output)
    return OK


def cmd_oracle(args) -> int:
    emtg = _load(args).build()
    tree = emtg.tree
    bad = oracle_disagreements(emtg, args.cap)
    report = {
        "agree": not bad,
        "disagreements": [{"history": tree.ids[h], "chosen": a, "allowed": sorted(ok)} for h, a, ok in bad],
    }
    _emit(json.dumps(report, indent=2) + "\n", args.output)
    return DISAGREEMENT if bad else OK


def cmd_gen(args) -> int:
    spec = GenSpec(seed=args.seed if args.seed is not None else 0, players=args.players,
                   branching=tuple(args.branching), depth=tuple(args.depth), max_nodes=args.max_nodes,
                   utility_range=tuple(args.utility_range), denominators=tuple(args.denominators),
                   balanced=args.balanced, sight_plies=None if args.full_sight else args.plies,
                   rollouts=args.rollouts, beliefs=args.beliefs, belief_depths=tuple(args.belief_depths),
                   belief_widths=tuple(args.belief_widths), aggregator=args.aggregator)
    _note(f"effective seed: {spec.seed}")
    try:
        doc = random_scenario(spec)
    except InfeasibleSpec as exc:
        raise UsageError(f"infeasible generator bounds: {exc}") from None
    _emit(serialize_scenario(doc), args.output)
    return OK


def cmd_bench(args) -> int:
    from .bench import DEFAULT_TEMPLATE, scaling_sweep, write_report

    seed = args.seed if args.seed is not None else DEFAULT_TEMPLATE.seed
    _note(f"effective seed: {seed}")
    template = replace(DEFAULT_TEMPLATE, seed=seed, beliefs=args.beliefs)
    result = scaling_sweep(args.sizes, args.seeds, template, sight_scale=args.sight_scale,
                           budget=args.budget, oracle_cap=args.cap, workers=args.workers)
    paths = write_report(result, args.output or "bench-out")
    sys.stdout.write(paths["table"].read_text())
    summary = result.summary()
    print(f"slope: {summary['slope']:.3f}")
    print(f"max doubling ratio: {summary['max_doubling_ratio']:.3f}")
    for kind, p in paths.items():
        print(f"{kind}: {p}")
    return OK


def cmd_export_dot(args) -> int:
    doc = _load(args)
    emtg = doc.build()
    tree = emtg.tree
    ix = tree.index

    def node(name: str) -> int:
        if name not in ix:
            raise UsageError(f"unknown node {name!r}")
        return ix[name]

    sight = emtg.game.sight.at(node(args.sight)) if args.sight else ()
    believed = ()
    if args.believed:
        chain = [node(n) for n in args.believed]
        if not is_history_sequence(emtg.game, chain):
            raise UsageError(f"{' '.join(args.believed)} is not a chain inside the first node's sight")
        believed = emtg.view(chain).nodes
    path = _nodes_to(tree, Solver(emtg).sol()[0]) if args.solution else ()
    _emit(export_dot(tree, sight=sight, believed=believed, path=path), args.output)
    return OK


def _scenario_command(sub, name: str, func, help_text: str, *, trace: bool = False):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("input", help="scenario file")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--seed", type=int, help="override the fork and belief seeds")
    p.add_argument("--monotone-sight", action="store_true", help="also require monotone explorations")
    p.add_argument("--strong-corr", action="store_true", help="also require the strong self-belief conditions")
    if trace:
        p.add_argument("--trace", action=argparse.BooleanOptionalAction, default=True,
                       help="write the solve trace (default: on)")
    p.set_defaults(func=func)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="foresight", description="Solve games played under limited foresight.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _scenario_command(sub, "solve", cmd_solve, "nested-beliefs solution path", trace=True)
    _scenario_command(sub, "bi", cmd_bi, "backwards induction on the full game")
    _scenario_command(sub, "scbi", cmd_scbi, "sight-compatible backwards induction", trace=True)
    _scenario_command(sub, "check", cmd_check, "validate a scenario")
    p = _scenario_command(sub, "compare", cmd_compare, "run several solvers and report agreement")
    p.add_argument("--solvers", default="bi,scbi,sces", help="comma list from bi, scbi, sces")
    p = _scenario_command(sub, "oracle", cmd_oracle, "cross-check the solver against brute force")
    p.add_argument("--cap", type=int, default=12, help="largest believed game to enumerate")
    p = _scenario_command(sub, "export-dot", cmd_export_dot, "Graphviz drawing of the game")
    p.add_argument("--sight", metavar="NODE", help="shade the sight of NODE")
    p.add_argument("--believed", nargs="+", metavar="NODE", help="outline the region believed by this chain")
    p.add_argument("--solution", action="store_true", help="draw the solution path")

    g = sub.add_parser("gen", help="generate a random scenario")
    g.add_argument("-o", "--output")
    g.add_argument("--seed", type=int)
    g.add_argument("--players", type=int, default=2)
    g.add_argument("--branching", type=int, nargs=2, default=(2, 2), metavar=("MIN", "MAX"))
    g.add_argument("--depth", type=int, nargs=2, default=(1, 3), metavar=("MIN", "MAX"))
    g.add_argument("--max-nodes", type=int)
    g.add_argument("--utility-range", type=int, nargs=2, default=(0, 9), metavar=("LO", "HI"))
    g.add_argument("--denominators", type=int, nargs="+", default=(1,))
    g.add_argument("--balanced", action="store_true")
    g.add_argument("--plies", type=int, default=2)
    g.add_argument("--full-sight", action="store_true")
    g.add_argument("--rollouts", type=int, default=2)
    g.add_argument("--beliefs", choices=BELIEF_CHOICES, default="depth-model")
    g.add_argument("--belief-depths", type=int, nargs=2, default=(1, 2), metavar=("MIN", "MAX"))
    g.add_argument("--belief-widths", type=int, nargs=2, default=(1, 2), metavar=("MIN", "MAX"))
    g.add_argument("--aggregator", choices=sorted(AGGREGATORS), default="avg")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="time the solver on growing balanced trees")
    b.add_argument("-o", "--output", help="report directory (default: bench-out)")
    b.add_argument("--seed", type=int)
    b.add_argument("--sizes", type=int, nargs="+", default=[2 ** k for k in range(6, 15)])
    b.add_argument("--seeds", type=int, default=3, help="scenarios per size")
    b.add_argument("--sight-scale", type=float, default=1.5, help="sight plies = ceil(log2(n+1) / scale)")
    b.add_argument("--beliefs", choices=BELIEF_CHOICES, default="depth-model")
    b.add_argument("--budget", type=float, default=300.0, help="seconds before giving up")
    b.add_argument("--cap", type=int, default=12, help="cross-check sizes up to this against brute force")
    b.add_argument("--workers", type=int, default=1)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _note(str(exc))
        return USAGE
    except ScenarioError as exc:
        _note("invalid scenario:")
        for issue in exc.issues:
            _note(f"  {issue}")
        return INVALID
    except (ForesightError, ValueError) as exc:
        _note(f"error: {exc}")
        return SOLVER_ERROR


if __name__ == "__main__":
    sys.exit(main())
