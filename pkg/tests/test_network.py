import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from majorbn import QUAD_STATES, QuadScale, build_network, joint_probability, topological_order
from majorbn.errors import (
    CptShapeMismatch,
    CycleDetected,
    DuplicateName,
    InvalidProbability,
    UnknownState,
    UnknownVariable,
    UnnormalizedRow,
)
from majorbn.reference import load_reference

from netgen import all_assignments, chain, point_mass, random_network

BIN = ["t", "f"]


def test_minimal_valid_network():
    net = chain()
    assert len(net.variables) == 2
    assert net.edges == {("A", "B")}
    assert net.parents("B") == ("A",)
    assert net.children("A") == ("B",)


def test_two_node_cycle():
    with pytest.raises(CycleDetected):
        build_network([("A", BIN), ("B", BIN)], [("A", "B"), ("B", "A")],
                      {"A": [[0.5, 0.5], [0.5, 0.5]], "B": [[0.5, 0.5], [0.5, 0.5]]})


def test_longer_cycle_and_self_loop():
    with pytest.raises(CycleDetected):
        build_network([(n, BIN) for n in "ABC"], [("A", "B"), ("B", "C"), ("C", "A")],
                      {n: [[0.5, 0.5]] * 2 for n in "ABC"})
    with pytest.raises(CycleDetected):
        build_network([("A", BIN)], [("A", "A")], {"A": [[0.5, 0.5]] * 2})


def test_row_summing_to_1_1():
    with pytest.raises(UnnormalizedRow):
        build_network([("A", BIN)], [], {"A": [0.5, 0.6]})


def test_round_off_is_absorbed():
    net = build_network([("A", ["a", "b", "c"])], [], {"A": [0.1, 0.2, 0.7 + 5e-10]})
    assert math.fsum(net.cpts["A"].table[0]) == 1.0


@pytest.mark.parametrize(
    "variables, edges, cpts, error",
    [
        ([("A", BIN), ("A", BIN)], [], {"A": [0.5, 0.5]}, DuplicateName),
        ([("A", ["t", "t"])], [], {"A": [0.5, 0.5]}, DuplicateName),
        ([("A", ["t"])], [], {"A": [1.0]}, CptShapeMismatch),
        ([("A", BIN)], [], {"A": [0.2, 0.3, 0.5]}, CptShapeMismatch),
        ([("A", BIN), ("B", BIN)], [("A", "B")], {"A": [0.5, 0.5], "B": [0.5, 0.5]}, CptShapeMismatch),
        ([("A", BIN)], [], {}, CptShapeMismatch),
        ([("A", BIN)], [("A", "Z")], {"A": [0.5, 0.5]}, UnknownVariable),
        ([("A", BIN)], [], {"A": [1.5, -0.5]}, InvalidProbability),
        ([("A", BIN)], [], {"A": [float("nan"), 0.5]}, InvalidProbability),
        ([("A", BIN), ("B", BIN)], [("A", "B")],
         {"A": [0.5, 0.5], "B": ((), [0.5, 0.5])}, CptShapeMismatch),
    ],
)
def test_build_errors(variables, edges, cpts, error):
    with pytest.raises(error):
        build_network(variables, edges, cpts)


def test_parent_order_defines_row_layout():
    # P(C | A, B) with rows in (a, b) row-major order, B fastest
    rows = [[0.1, 0.9], [0.2, 0.8], [0.3, 0.7], [0.4, 0.6]]
    net = build_network(
        [("A", BIN), ("B", BIN), ("C", BIN)],
        [("A", "C"), ("B", "C")],
        {"A": [0.5, 0.5], "B": [0.5, 0.5], "C": (("A", "B"), rows)},
    )
    arr = net.cpt_array("C")
    assert arr.shape == (2, 2, 2)
    assert arr[0, 1, 0] == 0.2  # A=t, B=f
    assert arr[1, 0, 0] == 0.3  # A=f, B=t


def test_network_is_immutable():
    net = chain()
    with pytest.raises(ValueError):
        net.cpts["A"].table[0, 0] = 0.1


def test_topological_order_chain():
    net = build_network([(n, BIN) for n in "CAB"], [("A", "B"), ("B", "C")],
                        {"A": [0.5, 0.5], "B": [[0.5, 0.5]] * 2, "C": [[0.5, 0.5]] * 2})
    assert [v.name for v in topological_order(net)] == ["A", "B", "C"]


def test_topological_order_diamond_tie_break():
    net = build_network([(n, BIN) for n in "ABCD"], [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")],
                        {"A": [0.5, 0.5], "B": [[0.5, 0.5]] * 2, "C": [[0.5, 0.5]] * 2,
                         "D": [[0.5, 0.5]] * 4})
    assert [v.name for v in topological_order(net)] == ["A", "B", "C", "D"]


def test_topological_order_star_root_first():
    order = topological_order(load_reference())
    assert order[0].name == "major"
    assert len(order) == 19


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 10))
def test_topological_order_respects_edges(seed, n):
    net = random_network(np.random.default_rng(seed), n)
    order = [v.name for v in topological_order(net)]
    assert sorted(order) == sorted(net.names)
    pos = {name: i for i, name in enumerate(order)}
    assert all(pos[p] < pos[c] for p, c in net.edges)


def test_joint_probability_chain():
    # 0.6 * 0.9 by the chain rule; enumeration oracle agrees
    net = chain()
    assert joint_probability(net, {"A": "t", "B": "t"}) == pytest.approx(0.54, abs=1e-15)
    table = {(a["A"], a["B"]): joint_probability(net, a) for a in all_assignments(net)}
    assert table[("t", "t")] / sum(table.values()) == pytest.approx(0.54, abs=1e-15)


def test_joint_probability_point_mass_and_zero():
    net = point_mass()
    assert joint_probability(net, {"A": "t", "B": "f", "C": "z"}) == 1.0
    assert joint_probability(net, {"A": "t", "B": "t", "C": "x"}) == 0.0


def test_joint_probability_needs_total_assignment():
    with pytest.raises(Exception):
        joint_probability(chain(), {"A": "t"})
    with pytest.raises(UnknownState):
        joint_probability(chain(), {"A": "t", "B": "maybe"})


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_joint_sums_to_one(seed, n):
    # at most 4**7 = 16384 assignments; comfortably above 12 binary nodes' worth
    net = random_network(np.random.default_rng(seed), n)
    total = math.fsum(joint_probability(net, a) for a in all_assignments(net))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_joint_sums_to_one_twelve_binary_nodes():
    net = random_network(np.random.default_rng(12), 12, max_states=2)
    total = math.fsum(joint_probability(net, a) for a in all_assignments(net))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_quad_scale_weights():
    assert [QuadScale.weight(s) for s in QUAD_STATES] == [1, 2, 3, 4]
    assert QUAD_STATES == ("very_low", "low", "much", "very_much")
    with pytest.raises(UnknownState):
        QuadScale.weight("Very much")


def test_variable_state_index():
    net = chain()
    assert net.variable("A").index("f") == 1
    with pytest.raises(UnknownState):
        net.variable("A").index("T")  # case-sensitive
    with pytest.raises(UnknownVariable):
        net.variable("Z")
