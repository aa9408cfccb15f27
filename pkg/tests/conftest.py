import itertools
from fractions import Fraction
from pathlib import Path

import pytest

from foresight.game import GameTree, Node
from foresight.generate import BELIEF_CHOICES, GenSpec, figure1_fixture, random_scenario

ROOT = Path(__file__).resolve().parent.parent
CORPUS = sorted((ROOT / "scenarios").glob("*.scenario"))


def leaf(nid, *utils):
    return Node(nid, utilities=tuple(Fraction(u) for u in utils))


def internal(nid, player, *children):
    return Node(nid, player=player, children=tuple(children))


def small_spec(seed, kind, *, max_nodes=12, players=2, utility_range=(0, 3), plies=2):
    return GenSpec(seed=seed, players=players, branching=(1, 3), depth=(1, 4), max_nodes=max_nodes,
                   utility_range=utility_range, beliefs=kind, sight_plies=plies)


def mixed_specs(count, **kwargs):
    """Seeded specs cycling through every belief oracle."""
    return [small_spec(seed, BELIEF_CHOICES[seed % len(BELIEF_CHOICES)], **kwargs) for seed in range(count)]


def brute_spe_outcomes(tree: GameTree) -> set[int]:
    """Outcomes of all pure subgame-perfect profiles, by enumeration."""
    interior = [h for h in range(len(tree)) if tree.children[h]]
    found = set()
    for combo in itertools.product(*([a for a, _ in tree.moves(h)] for h in interior)):
        sigma = dict(zip(interior, combo))

        def play(h):
            while tree.children[h]:
                h = tree.child(h, sigma[h])
            return h

        if all(tree.utilities[play(h)][tree.player[h]] >= tree.utilities[play(c)][tree.player[h]]
               for h in interior for c in tree.children[h]):
            found.add(play(0))
    return found


@pytest.fixture
def fixture_doc():
    return figure1_fixture()


@pytest.fixture
def fixture_emtg(fixture_doc):
    return fixture_doc.fresh()


@pytest.fixture
def ix(fixture_emtg):
    index = fixture_emtg.tree.index
    return lambda *names: tuple(index[n] for n in names)


def random_emtg(seed, kind="depth-model", **kwargs):
    return random_scenario(small_spec(seed, kind, **kwargs)).fresh()


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
