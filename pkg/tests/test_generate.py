from fractions import Fraction

import pytest
from conftest import mixed_specs

from foresight.errors import InfeasibleSpec
from foresight.generate import GenSpec, compare, figure1_fixture, oracle_disagreements, random_scenario
from foresight.scenario import serialize_scenario, validate_document


def test_same_spec_same_document():
    spec = GenSpec(seed=1, players=2, depth=(3, 3), branching=(2, 2))
    assert serialize_scenario(random_scenario(spec)) == serialize_scenario(random_scenario(spec))
    other = GenSpec(seed=2, players=2, depth=(3, 3), branching=(2, 2))
    assert serialize_scenario(random_scenario(spec)) != serialize_scenario(random_scenario(other))


@pytest.mark.parametrize("budget", [1, 5, 12, 33])
def test_node_budget_is_respected(budget):
    for seed in range(20):
        doc = random_scenario(GenSpec(seed=seed, branching=(1, 4), depth=(0, 6), max_nodes=budget))
        assert len(doc.nodes) <= budget


def test_depth_bounds():
    for seed in range(20):
        tree = random_scenario(GenSpec(seed=seed, branching=(2, 3), depth=(2, 4), max_nodes=60)).build().tree
        leaf_depths = {tree.depth[z] for z in tree.terminals}
        assert min(leaf_depths) >= 2 and max(leaf_depths) <= 4


def test_balanced_shape():
    tree = random_scenario(GenSpec(seed=0, branching=(3, 3), depth=(3, 3), balanced=True)).build().tree
    assert len(tree) == 1 + 3 + 9 + 27


def test_utilities_in_range():
    spec = GenSpec(seed=3, utility_range=(-2, 2), denominators=(1, 3), depth=(2, 3))
    for n in random_scenario(spec).nodes:
        if n.utilities is not None:
            assert all(-2 <= u <= 2 and Fraction(u).denominator in (1, 3) for u in n.utilities)


@pytest.mark.parametrize("spec", [
    GenSpec(players=0),
    GenSpec(branching=(3, 2)),
    GenSpec(depth=(4, 2)),
    GenSpec(utility_range=(1, 0)),
    GenSpec(beliefs="psychic"),
    GenSpec(depth=(3, 3), branching=(2, 2), max_nodes=10),
    GenSpec(rollouts=0),
])
def test_infeasible_specs(spec):
    with pytest.raises(InfeasibleSpec):
        random_scenario(spec)


def test_generated_scenarios_pass_every_validator():
    for spec in mixed_specs(200, max_nodes=20):
        assert validate_document(random_scenario(spec)) == [], spec


def test_fixture_preferences():
    tree = figure1_fixture().build().tree
    u = {tree.ids[z]: tree.utilities[z] for z in tree.terminals}
    ann = lambda n: u[n][0]  # noqa: E731
    bob = lambda n: u[n][1]  # noqa: E731
    assert ann("d") > ann("g") > ann("e") == ann("f")
    assert bob("e") > bob("f") > bob("d")


def test_fixture_sights():
    doc = figure1_fixture()
    assert {k: set(v) for k, v in doc.sight["entries"].items()} == {
        "A": {"A", "g", "B", "f", "C", "d", "e"}, "B": {"B", "f", "C", "e"}, "C": {"C", "d", "e"}}


def test_compare_fixture():
    report = compare(figure1_fixture().fresh())
    assert report["solvers"]["bi"]["outcome"] == "g"
    assert report["solvers"]["sces"]["outcome"] == "d"
    assert report["solvers"]["sces"]["utilities"] == {"Ann": "3", "Bob": "1", "Charles": "1"}
    assert report["agreement"] == {"sces=scbi": False, "scbi in bi": True, "sces in bi": False}


def test_compare_subset():
    report = compare(figure1_fixture().fresh(), ["sces"])
    assert set(report["solvers"]) == {"sces"} and report["agreement"] == {}
    with pytest.raises(ValueError):
        compare(figure1_fixture().fresh(), ["minimax"])


def test_oracle_agreement_on_fixture():
    assert oracle_disagreements(figure1_fixture().fresh()) == []
