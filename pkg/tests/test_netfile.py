from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from majorbn import build_network
from majorbn.errors import (
    BayesNetError,
    CptShapeMismatch,
    CycleDetected,
    InputFileError,
    MalformedXml,
    NetSyntaxError,
    PositionedError,
    UnknownVariable,
    UnnormalizedRow,
    UnsupportedElement,
)
from majorbn.inference import variable_elimination
from majorbn.netfile import import_xdsl_subset, parse_network, read_network, serialize_network, write_network
from majorbn.reference import reference_network, reference_text

from netgen import chain, diamond, polytree, random_network

FIXTURES = Path(__file__).parent / "fixtures"

CHAIN_TEXT = """bayesnet 1
network chain

variable A t f
variable B t f

cpt A
  0.6 0.4

cpt B | A
  0.9 0.1
  0.2 0.8
"""

CHAIN_XDSL = """<?xml version="1.0" encoding="UTF-8"?>
<smile version="1.0" id="chain">
  <nodes>
    <cpt id="A">
      <state id="t" /><state id="f" />
      <probabilities>0.6 0.4</probabilities>
    </cpt>
    <cpt id="B">
      <state id="t" /><state id="f" />
      <parents>A</parents>
      <probabilities>0.9 0.1 0.2 0.8</probabilities>
    </cpt>
  </nodes>
  <extensions>
    <genie version="1.0" app="GeNIe" name="chain">
      <node id="A"><name>A</name><position>10 10 50 40</position></node>
    </genie>
  </extensions>
</smile>
"""


def same_network(a, b):
    assert a.names == b.names
    assert [v.states for v in a.variables] == [v.states for v in b.variables]
    assert a.edges == b.edges
    for name in a.names:
        assert a.parents(name) == b.parents(name)
        np.testing.assert_array_equal(a.cpts[name].table, b.cpts[name].table)


def all_posteriors(net, evidence=None):
    evidence = evidence or {}
    return {n: variable_elimination(net, evidence, n).probabilities for n in net.names if n not in evidence}


class TestNative:
    def test_parse_chain(self):
        net = parse_network(CHAIN_TEXT)
        same_network(net, chain())
        assert net.name == "chain"

    def test_reference_counts(self):
        net = parse_network(reference_text())
        assert len(net.variables) == 19
        assert len(net.edges) == 18

    def test_reference_file_is_canonical(self):
        text = reference_text()
        assert serialize_network(parse_network(text)) == text
        assert serialize_network(reference_network()) == text

    def test_serialize_chain_is_documented_example(self):
        assert serialize_network(chain()) == CHAIN_TEXT

    def test_equal_networks_give_identical_text(self):
        assert serialize_network(diamond()) == serialize_network(diamond())

    def test_single_node_minimal_document(self):
        net = build_network([("A", ["x", "y"])], [], {"A": [0.25, 0.75]}, name="one")
        assert serialize_network(net) == "bayesnet 1\nnetwork one\n\nvariable A x y\n\ncpt A\n  0.25 0.75\n"

    def test_comments_blank_lines_and_scientific_notation(self):
        text = "# model\nbayesnet 1\n\nvariable A t f  # binary\ncpt A\n 6e-1 4.0E-1\n"
        assert parse_network(text).cpts["A"].table[0].tolist() == [0.6, 0.4]

    @pytest.mark.parametrize(
        "text, position",
        [
            ("bayesnet 1\nvariable A t f\ncpt A\n", (3, 6)),  # truncated: no rows
            ("bayesnet 1\nvariable A t f\ncpt B | A\n", (3, 5)),
            ("", (1, 1)),
            ("bayesnet 2\n", (1, 10)),
            ("variable A t f\n", (1, 1)),
            ("bayesnet 1\nvariable A t\ncpt A\n1\n", (2, 13)),
            ("bayesnet 1\nvariable A t f\ncpt A\n0.5 zero\n", (4, 5)),
            ("bayesnet 1\nvariable A t f\ncpt A\n1.5 -0.5\n", (4, 1)),
            ("bayesnet 1\nvariable A t f\ncpt A\n0.5 0.5 0.0\n", (4, 1)),
            ("bayesnet 1\nvariable 9A t f\n", (2, 10)),
            ("bayesnet 1\nvariable A t f\ncpt A\n0.5 0.5\nvariable B t f\n", (5, 1)),
        ],
    )
    def test_syntax_errors_carry_position(self, text, position):
        with pytest.raises(NetSyntaxError) as info:
            parse_network(text)
        assert info.value.position == position
        assert str(info.value).startswith(f"line {position[0]}, column {position[1]}:")

    def test_row_summing_to_1_1(self):
        with pytest.raises(UnnormalizedRow):
            parse_network("bayesnet 1\nvariable A t f\ncpt A\n0.5 0.6\n")

    def test_cycle(self):
        text = ("bayesnet 1\nvariable A t f\nvariable B t f\n"
                "cpt A | B\n0.5 0.5\n0.5 0.5\ncpt B | A\n0.5 0.5\n0.5 0.5\n")
        with pytest.raises(CycleDetected):
            parse_network(text)

    def test_missing_cpt(self):
        with pytest.raises(CptShapeMismatch):
            parse_network("bayesnet 1\nvariable A t f\nvariable B t f\ncpt A\n0.5 0.5\n")

    def test_unknown_parent(self):
        with pytest.raises((UnknownVariable, NetSyntaxError)):
            parse_network("bayesnet 1\nvariable A t f\ncpt A | Z\n0.5 0.5\n")

    @pytest.mark.parametrize("seed", range(40))
    def test_round_trip_preserves_posteriors(self, seed):
        rng = np.random.default_rng(1000 + seed)
        net = random_network(rng, int(rng.integers(1, 9)))
        back = parse_network(serialize_network(net))
        same_network(net, back)
        first = net.names[0]
        evidence = {first: net.variable(first).states[0]} if len(net.names) > 1 else {}
        before, after = all_posteriors(net, evidence), all_posteriors(back, evidence)
        for name in before:
            assert np.max(np.abs(before[name] - after[name])) <= 1e-12

    def test_file_helpers(self, tmp_path):
        path = tmp_path / "poly.bn"
        write_network(polytree(), path)
        same_network(read_network(path), polytree())
        with pytest.raises(InputFileError):
            read_network(tmp_path / "absent.bn")


class TestXdsl:
    def test_two_node_twin(self):
        imported = import_xdsl_subset(CHAIN_XDSL)
        native = parse_network(CHAIN_TEXT)
        same_network(imported, native)
        for ev in ({}, {"B": "t"}, {"B": "f"}):
            a, b = all_posteriors(imported, ev), all_posteriors(native, ev)
            for name in a:
                np.testing.assert_allclose(a[name], b[name], atol=1e-15)

    def test_parent_order_maps_to_row_major(self):
        xml = """<smile id="v"><nodes>
          <cpt id="A"><state id="a0"/><state id="a1"/><probabilities>0.5 0.5</probabilities></cpt>
          <cpt id="B"><state id="b0"/><state id="b1"/><state id="b2"/><probabilities>0.2 0.3 0.5</probabilities></cpt>
          <cpt id="C"><state id="y"/><state id="n"/><parents>A B</parents>
            <probabilities>0.1 0.9 0.2 0.8 0.3 0.7 0.4 0.6 0.5 0.5 0.6 0.4</probabilities></cpt>
        </nodes></smile>"""
        arr = import_xdsl_subset(xml).cpt_array("C")
        # (a1, b0) is the fourth parent configuration: last parent fastest
        assert arr[1, 0, 0] == 0.4
        assert arr[0, 2, 0] == 0.3

    def test_parents_may_follow_children(self):
        xml = """<smile id="late"><nodes>
          <cpt id="B"><state id="t"/><state id="f"/><parents>A</parents>
            <probabilities>0.9 0.1 0.2 0.8</probabilities></cpt>
          <cpt id="A"><state id="t"/><state id="f"/><probabilities>0.6 0.4</probabilities></cpt>
        </nodes></smile>"""
        net = import_xdsl_subset(xml)
        assert net.names == ("B", "A")
        assert variable_elimination(net, {"B": "t"}, "A")["t"] == pytest.approx(0.54 / 0.62, abs=1e-15)

    def test_decision_node(self):
        xml = CHAIN_XDSL.replace('<cpt id="B">', '<decision id="D"><state id="go"/><state id="stop"/></decision>\n<cpt id="B">')
        with pytest.raises(UnsupportedElement) as info:
            import_xdsl_subset(xml)
        assert info.value.line > 1

    def test_utility_node(self):
        xml = "<smile><nodes><utility id='U'><parents>A</parents></utility></nodes></smile>"
        with pytest.raises(UnsupportedElement):
            import_xdsl_subset(xml)

    @pytest.mark.parametrize(
        "xml",
        [
            "<smile><nodes><cpt id='A'><state id='t'/></nodes></smile>",
            "<smile><nodes>",
            "",
            "<smile><nodes><cpt><state id='t'/><state id='f'/><probabilities>0.5 0.5</probabilities></cpt></nodes></smile>",
            "<smile><nodes><cpt id='A'><state id='t'/><state id='f'/><probabilities>0.5</probabilities></cpt></nodes></smile>",
            "<smile><nodes><cpt id='A'><state id='t'/><state id='f'/><probabilities>x y</probabilities></cpt></nodes></smile>",
            "<smile><nodes><cpt id='B'><state id='t'/><state id='f'/><parents>A</parents>"
            "<probabilities>0.5 0.5 0.5 0.5</probabilities></cpt></nodes></smile>",
        ],
    )
    def test_malformed(self, xml):
        with pytest.raises(MalformedXml) as info:
            import_xdsl_subset(xml)
        assert info.value.line >= 1

    def test_unnormalized_row_from_xdsl(self):
        xml = CHAIN_XDSL.replace("0.6 0.4", "0.6 0.5")
        with pytest.raises(UnnormalizedRow):
            import_xdsl_subset(xml)

    def test_genie_naive_bayes_fixture(self):
        net = import_xdsl_subset((FIXTURES / "naive_bayes_19.xdsl").read_text(encoding="utf-8"))
        assert len(net.variables) == 19
        assert len(net.edges) == 18
        assert all(p == "major" for p, _ in net.edges)
        assert read_network(FIXTURES / "naive_bayes_19.xdsl").names == net.names

    @pytest.mark.parametrize("source", ["naive_bayes_19.xdsl", None])
    def test_import_serialize_parse_equals_import(self, source):
        xml = CHAIN_XDSL if source is None else (FIXTURES / source).read_text(encoding="utf-8")
        direct = import_xdsl_subset(xml)
        same_network(parse_network(serialize_network(direct)), direct)


# -- fuzzing: every failure is a library error, and parse errors are positioned

_REFERENCE = reference_text()


@st.composite
def mutated_native(draw):
    base = draw(st.sampled_from([CHAIN_TEXT, _REFERENCE[:2000], serialize_network(polytree())]))
    ops = draw(st.lists(st.tuples(st.sampled_from(["del", "ins", "dup", "cut"]),
                                  st.integers(0, len(base)), st.text(max_size=6)), max_size=4))
    text = base
    for op, pos, s in ops:
        pos = min(pos, len(text))
        if op == "del":
            text = text[:pos] + text[pos + len(s) + 1:]
        elif op == "ins":
            text = text[:pos] + s + text[pos:]
        elif op == "dup":
            line_start = text.rfind("\n", 0, pos) + 1
            line_end = text.find("\n", pos) + 1 or len(text)
            text = text[:line_end] + text[line_start:line_end] + text[line_end:]
        else:
            text = text[:pos]
    return text


@settings(max_examples=400, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(mutated_native())
def test_fuzz_native_parser(text):
    try:
        net = parse_network(text)
    except PositionedError as exc:
        assert exc.line >= 1 and exc.column >= 1
    except BayesNetError:
        pass
    else:
        assert serialize_network(parse_network(serialize_network(net))) == serialize_network(net)


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=200))
def test_fuzz_native_parser_arbitrary_text(text):
    try:
        parse_network(text)
    except BayesNetError:
        pass


@settings(max_examples=300, deadline=None)
@given(st.integers(0, len(CHAIN_XDSL)), st.integers(0, 20), st.text(max_size=8))
def test_fuzz_xdsl(pos, cut, insert):
    xml = CHAIN_XDSL[:pos] + insert + CHAIN_XDSL[pos + cut:]
    try:
        import_xdsl_subset(xml)
    except PositionedError as exc:
        assert exc.line >= 1
    except BayesNetError:
        pass
