import pytest
from conftest import random_emtg
from tables import broken_tables, build, kinds, ladder, with_entry

from foresight.beliefs import (EMTG, OmniscientBeliefs, ProjectiveBeliefs, believed_game, chains,
                               is_history_sequence, materialize, query, validate_beliefs)
from foresight.errors import CapExceeded, UnspecifiedSequence
from foresight.generate import figure1_fixture
from foresight.scenario import document_to_dict
from foresight.solver import Solver


def names(tree, nodes):
    return {tree.ids[h] for h in nodes}


def test_fixture_table_answers(fixture_emtg, ix):
    t = fixture_emtg.tree
    nodes, expl = query(fixture_emtg.beliefs, ix("A", "B"))
    assert names(t, nodes) == {"B", "f", "C", "e"}
    assert names(t, expl) == {"f", "e"}
    assert names(t, fixture_emtg.view(ix("A", "C")).nodes) == {"C", "d"}


def test_terminal_sequences_need_no_entry(fixture_emtg, ix):
    v = fixture_emtg.view(ix("A", "d"))
    assert v.nodes == frozenset(ix("d")) and v.is_frontier(v.root)


def test_missing_entry_is_reported(fixture_emtg, ix):
    fixture_emtg.view(ix("A", "f"))  # terminal: answered implicitly
    with pytest.raises(UnspecifiedSequence):
        fixture_emtg.view(ix("B", "A"))


def test_missing_entry_found_by_validator(fixture_doc):
    d = document_to_dict(fixture_doc)
    d["beliefs"]["entries"] = [e for e in d["beliefs"]["entries"] if e["sequence"] != ["A", "B", "C"]]
    assert "unspecified sequence" in kinds(build(d))


def test_fixture_beliefs_are_valid(fixture_emtg):
    assert validate_beliefs(fixture_emtg) == []
    assert validate_beliefs(fixture_emtg, "sampled", samples=50, seed=1) == []


def test_ladder_is_valid():
    assert validate_beliefs(build(ladder())) == []


def test_corr_violation_is_caught():
    found = validate_beliefs(build(broken_tables()["Corr"]))
    assert {v.kind for v in found} == {"Corr"}
    assert found[0].where == "(B)"


def test_mon_sight_violation_is_caught():
    found = validate_beliefs(build(broken_tables()["Mon of B_H"]))
    assert "Mon of B_H" in {v.kind for v in found}
    assert {v.where for v in found} == {"(A, B, C)"}


def test_mon_evaluation_violation_is_caught():
    found = validate_beliefs(build(broken_tables()["Mon of B_P"]))
    assert {v.kind for v in found} == {"Mon of B_P"}
    assert found[0].where == "(r, x)"


@pytest.mark.parametrize("sequence, sight, explorations, kind", [
    (["r", "x"], ["x", "w2"], ["w2"], "believed sight not prefix-closed"),
    (["r", "x"], ["x", "x2", "w", "w1"], ["w1", "x2"], "believed sight exceeds own sight"),
    (["r", "x"], ["x"], ["x2"], "stalled belief"),
    (["r", "x"], ["x", "w", "x2"], ["x2"], "believed coverage"),
    (["r", "x"], ["x", "w", "x2"], ["w1", "x2", "y"], "stray believed exploration"),
    (["r", "x"], ["x", "w", "x2"], ["w", "w1", "x2"], "believed exploration not terminal"),
])
def test_structural_violations(sequence, sight, explorations, kind):
    assert kind in kinds(build(with_entry(ladder(), sequence, sight, explorations)))


def test_projective_and_omniscient_keys():
    e = random_emtg(4, "projective", max_nodes=20)
    b = e.beliefs
    assert isinstance(b, ProjectiveBeliefs)
    q = next(q for q in chains(e, 0) if len(q) >= 2)
    assert b.key(q) == (q[0], q[-1])
    o = random_emtg(4, "omniscient", max_nodes=20)
    assert isinstance(o.beliefs, OmniscientBeliefs)
    nodes, expl = query(o.beliefs, (0,))
    assert nodes == frozenset(range(len(o.tree)))
    assert expl == frozenset(o.tree.terminals)


@pytest.mark.parametrize("kind", ["projective", "omniscient", "depth-model", "table"])
def test_generated_beliefs_validate(kind):
    for seed in range(25):
        e = random_emtg(seed, kind, max_nodes=25)
        assert validate_beliefs(e) == [], seed


def test_depth_model_is_deterministic():
    a = random_emtg(9, "depth-model", max_nodes=40, plies=3)
    b = random_emtg(9, "depth-model", max_nodes=40, plies=3)
    for q in chains(a, 0):
        assert query(a.beliefs, q) == query(b.beliefs, q)


def test_materialized_table_gives_same_solution():
    for seed in range(15):
        e = random_emtg(seed, "depth-model", max_nodes=25)
        t = EMTG(e.game, materialize(e))
        assert Solver(t).sol()[0] == Solver(random_emtg(seed, "depth-model", max_nodes=25)).sol()[0]


def test_materialize_cap():
    with pytest.raises(CapExceeded):
        materialize(random_emtg(2, "omniscient", max_nodes=30), cap=3)


def test_exhaustive_cap_is_raised():
    with pytest.raises(CapExceeded):
        validate_beliefs(random_emtg(2, "omniscient", max_nodes=30), cap=3)


def test_history_sequences(fixture_emtg, ix):
    game = fixture_emtg.game
    assert is_history_sequence(game, ix("A", "B", "C"))
    assert not is_history_sequence(game, ix("B", "A"))
    assert not is_history_sequence(game, ix("B", "d"))  # d is outside Bob's sight
    assert not is_history_sequence(game, ix("d"))


def test_chains_follow_interior_nodes(fixture_emtg, ix):
    got = set(chains(fixture_emtg, ix("A")[0]))
    assert got == {ix("A"), ix("A", "B"), ix("A", "C"), ix("A", "B", "C")}


def test_believed_game(fixture_emtg, ix):
    g = believed_game(fixture_emtg, ix("A", "B"))
    assert sorted(g.tree.ids) == sorted(["B", "f", "C", "e"])
    assert g.tree.utilities[g.tree.index["e"]] == (1, 3, 0)


def test_strong_corr_is_opt_in():
    # hand C to Ann: at A she believes her later self sees only d, but at C she sees d and e
    fig = figure1_fixture()
    d = document_to_dict(fig)
    d["nodes"][4]["player"] = "Ann"
    e = build(d)
    assert validate_beliefs(e) == []
    found = {v.kind for v in validate_beliefs(e, strong_corr=True)}
    assert found & {"strong Corr (self)", "strong Corr (common knowledge)"}
