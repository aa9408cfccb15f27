import pytest
from conftest import internal, leaf, random_emtg

from foresight.beliefs import EMTG, ProjectiveBeliefs
from foresight.errors import CapExceeded
from foresight.game import GameTree, backwards_induction
from foresight.generate import GenSpec, random_scenario
from foresight.sight import MTG, TableFork, full_sight
from foresight.solver import (Solver, all_profiles, best_branch, bsbi, enumerate_sces, follow, is_sces,
                              nbs_action, nbs_outcome_set, nbs_outcomes, sces_profile, sol)


def named(tree, profile):
    return {tree.ids[h]: a for h, a in profile.items()}


def test_fixture_nested_actions(fixture_emtg, ix):
    assert nbs_action(fixture_emtg, ix("A", "C")) == "d"
    assert nbs_action(fixture_emtg, ix("A", "B", "C")) == "e"
    assert nbs_action(fixture_emtg, ix("A", "B")) == "C"
    assert nbs_action(fixture_emtg, ix("A", "d")) is None


def test_fixture_root_step(fixture_emtg, ix):
    solver = Solver(fixture_emtg)
    step = solver._step(ix("A")[0])
    t = fixture_emtg.tree
    assert step.chosen == "B"
    assert named(t, step.table) == {"B": "C", "C": "d"}
    assert [(c.action, t.ids[c.endpoint], c.value[0]) for c in step.candidates] == [("g", "g", 2), ("B", "d", 3)]
    assert bsbi(fixture_emtg, ix("A")[0]) == "B"


def test_fixture_solution(fixture_emtg):
    z, trace = sol(fixture_emtg)
    t = fixture_emtg.tree
    assert t.ids[z] == "d"
    assert [s.chosen for s in trace.steps] == ["B", "C", "d"]
    assert named(t, sces_profile(fixture_emtg)) == {"A": "B", "B": "C", "C": "d"}


def test_best_branch_composes_given_table(fixture_emtg, ix):
    A, B, C = ix("A", "B", "C")
    # with Charles believed to play e, Ann's B branch is worth 1 < 2
    assert best_branch(fixture_emtg, (A,), {B: "C", C: "e"}) == "g"
    assert best_branch(fixture_emtg, (A,), {B: "C", C: "d"}) == "B"
    with pytest.raises(ValueError):
        best_branch(fixture_emtg, (A,), {C: "d"})


def test_follow_stops_outside_table(fixture_emtg, ix):
    A, B, C, d = ix("A", "B", "C", "d")
    assert follow(fixture_emtg.tree, {B: "C", C: "d"}, B) == d
    assert follow(fixture_emtg.tree, {}, B) == B


def test_is_sces_on_fixture(fixture_emtg, ix):
    A, B, C = ix("A", "B", "C")
    bad = is_sces(fixture_emtg, {A: "g", B: "C", C: "d"})
    assert not bad and bad.failing == A
    assert is_sces(fixture_emtg, {A: "B", B: "C", C: "d"})
    assert is_sces(fixture_emtg, {A: "B", B: "C", C: "d"}, brute_force=True)
    assert is_sces(fixture_emtg, {A: "B", B: "f", C: "d"}).failing == B


def test_fixture_enumeration(fixture_emtg, ix):
    A, B, C = ix("A", "B", "C")
    assert enumerate_sces(fixture_emtg) == {((A, "B"), (B, "C"), (C, "d"))}


def test_nbs_outcomes_on_fixture(fixture_emtg, ix):
    t = fixture_emtg.tree
    assert {t.ids[z] for z in nbs_outcomes(fixture_emtg, ix("A"))} == {"d"}
    assert {t.ids[z] for z in nbs_outcomes(fixture_emtg, ix("A", "B"))} == {"e"}


@pytest.mark.parametrize("kind", ["projective", "omniscient", "depth-model", "table"])
def test_set_recursion_matches_brute_force(kind):
    for seed in range(40):
        e = random_emtg(seed, kind, utility_range=(0, 2))
        memo_a, memo_b = {}, {}
        for h in range(len(e.tree)):
            if e.tree.children[h]:
                assert nbs_outcome_set(e, (h,), memo_a) == nbs_outcomes(e, (h,), 12, memo_b), (seed, h)


@pytest.mark.parametrize("kind", ["projective", "depth-model", "table"])
def test_memo_does_not_change_answers(kind):
    for seed in range(40):
        a = sol(random_emtg(seed, kind, max_nodes=30), memo=True)
        b = sol(random_emtg(seed, kind, max_nodes=30), memo=False)
        assert a[0] == b[0]
        assert [s.chosen for s in a[1].steps] == [s.chosen for s in b[1].steps]
        assert b[1].stats["memo_hits"] == 0


def balanced(kind, height=4, seed=0):
    return random_scenario(GenSpec(seed=seed, balanced=True, depth=(height, height), sight_plies=3,
                                   beliefs=kind)).fresh()


def test_memo_is_used():
    _, trace = sol(balanced("projective"))
    assert trace.stats["memo_hits"] > 0


def test_brute_force_cap():
    with pytest.raises(CapExceeded):
        nbs_outcomes(balanced("omniscient"), (0,), cap=5)
    with pytest.raises(CapExceeded):
        enumerate_sces(balanced("omniscient"), cap=5)


def test_ties_are_enumerated():
    """A game where two moves tie produces two profiles."""
    t = GameTree(["P"], [internal("r", "P", ("a", "x"), ("b", "y")), leaf("x", 1), leaf("y", 1)], "r")
    sight = full_sight(t)
    game = MTG(t, sight, TableFork(sight.table))
    e = EMTG(game, ProjectiveBeliefs(game))
    assert enumerate_sces(e) == {((0, "a"),), ((0, "b"),)}
    assert Solver(e).bsbi(0) == "a"
    assert all(is_sces(e, p) for p in all_profiles(t))


def test_full_sight_projective_is_backwards_induction():
    for seed in range(30):
        e = random_emtg(seed, "omniscient", max_nodes=20)
        t = e.tree
        game = e.game
        proj = EMTG(game, ProjectiveBeliefs(game))
        outcomes, profile = backwards_induction(t)
        z = 0
        while t.children[z]:
            z = t.child(z, profile[z])
        assert sol(proj)[0] == z
