from fractions import Fraction

import pytest
from conftest import brute_spe_outcomes, internal, leaf, random_emtg

from foresight.errors import InvalidGame, UndefinedChoice
from foresight.game import (GameTree, Node, affine, backwards_induction, is_subgame_perfect, outcome,
                            validate_game)


def centipede():
    return GameTree(["A", "B"], [
        internal("r", "A", ("stop", "s1"), ("go", "x")),
        leaf("s1", 1, 0),
        internal("x", "B", ("stop", "s2"), ("go", "y")),
        leaf("s2", 0, 2),
        leaf("y", 3, 1),
    ], "r")


def test_preorder_indexing_and_prefix():
    t = centipede()
    assert t.ids == ["r", "s1", "x", "s2", "y"]
    assert t.is_prefix(0, 4) and t.is_prefix(2, 3) and not t.is_prefix(1, 2)
    assert t.is_prefix(2, 2)
    assert t.path(t.node("y")) == ("go", "go")
    assert t.from_path(["go", "stop"]) == t.node("s2")
    assert t.first_action(0, t.node("y")) == "go"
    assert t.is_quasi_terminal(t.node("x")) and not t.is_quasi_terminal(0)
    assert t.leaf_count[0] == 3 and t.height == 2


def test_children_in_declaration_order():
    t = GameTree(["A"], [internal("r", "A", ("z", "b"), ("a", "c")), leaf("b", 0), leaf("c", 1)], "r")
    assert [a for a, _ in t.moves(0)] == ["z", "a"]


@pytest.mark.parametrize("nodes, kind", [
    ([internal("r", "A", ("a", "x"), ("a", "y")), leaf("x", 0), leaf("y", 0)], "ambiguous action"),
    ([internal("r", "A", ("a", "x"), ("b", "x")), leaf("x", 0)], "multiple parents"),
    ([internal("r", "A", ("a", "q"))], "dangling child"),
    ([internal("r", "A", ("a", "x")), leaf("x", 0), leaf("lost", 1)], "unreachable node"),
    ([internal("r", "A")], "childless internal node"),
    ([internal("r", "Z", ("a", "x")), leaf("x", 0)], "unknown turn player"),
    ([internal("r", "A", ("a", "x")), leaf("x", 0, 1)], "utility arity"),
    ([Node("r", player="A", utilities=(Fraction(1),), children=(("a", "x"),)), leaf("x", 0)],
     "node is both internal and leaf"),
])
def test_invalid_games_are_reported(nodes, kind):
    found = validate_game(["A"], nodes, "r")
    assert kind in {v.kind for v in found}
    with pytest.raises(InvalidGame):
        GameTree(["A"], nodes, "r")


def test_cycle_is_rejected():
    nodes = [internal("r", "A", ("a", "x")), internal("x", "A", ("b", "r"))]
    kinds = {v.kind for v in validate_game(["A"], nodes, "r")}
    assert "root has a parent" in kinds


def test_backwards_induction_centipede():
    t = centipede()
    outcomes, profile = backwards_induction(t)
    assert outcomes == {t.node("s1")}
    assert profile == {0: "stop", 2: "stop"}
    assert is_subgame_perfect(t, profile) is None
    assert is_subgame_perfect(t, {0: "go", 2: "go"}) == 2


def test_backwards_induction_with_ties_keeps_every_spe_outcome():
    t = GameTree(["A", "B"], [
        internal("r", "A", ("l", "x"), ("r", "y")),
        internal("x", "B", ("a", "x1"), ("b", "x2")),
        leaf("x1", 2, 0), leaf("x2", 0, 0),
        leaf("y", 1, 0),
    ], "r")
    outcomes, profile = backwards_induction(t)
    assert outcomes == {t.node("x1"), t.node("y")} == brute_spe_outcomes(t)
    assert profile[t.node("x")] == "a"  # earliest action among ties
    assert profile[0] == "l"


@pytest.mark.parametrize("seed", range(60))
def test_backwards_induction_matches_enumeration(seed):
    tree = random_emtg(seed, "omniscient", max_nodes=10, utility_range=(0, 2)).tree
    outcomes, profile = backwards_induction(tree)
    assert outcomes == brute_spe_outcomes(tree)
    assert is_subgame_perfect(tree, profile) is None
    assert outcome(tree, profile) in outcomes


def test_outcome_requires_choices():
    with pytest.raises(UndefinedChoice):
        outcome(centipede(), {0: "go"})


def test_affine_map_changes_one_player():
    t = affine(centipede(), 1, Fraction(2), Fraction(-1))
    assert t.utilities[t.node("s2")] == (0, 3)
    assert t.utilities[t.node("y")] == (3, 1)
