"""Reading and writing networks.

Two formats are supported:

* the native line-oriented ``.bn`` format (read and write), whose grammar is
  documented in ``docs/netfile.md``;
* the chance-node subset of GeNIe's XDSL format (read only).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from xml.parsers import expat

from .errors import InputFileError, MalformedXml, NetSyntaxError, UnsupportedElement
from .network import Network, Variable, build_network

FORMAT_VERSION = 1
HEADER = "bayesnet"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_NUMBER = re.compile(r"[+]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")


# -- native format ------------------------------------------------------------


class _Lines:
    """Tokenized, comment-stripped lines with 1-based positions."""

    def __init__(self, text: str):
        self.items = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            body = raw.split("#", 1)[0]
            tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", body)]
            if tokens:
                self.items.append((lineno, tokens))
        self.pos = 0
        self.last_line = max(1, len(text.splitlines()))
        last = text.splitlines()[-1] if text.splitlines() else ""
        self.eof_column = len(last) + 1

    def peek(self):
        return self.items[self.pos] if self.pos < len(self.items) else None

    def take(self, what: str):
        item = self.peek()
        if item is None:
            raise NetSyntaxError(f"unexpected end of input, expected {what}", self.last_line, self.eof_column)
        self.pos += 1
        return item


def _ident(token: tuple[str, int], line: int, what: str) -> str:
    text, col = token
    if not _IDENT.match(text):
        raise NetSyntaxError(f"invalid {what} {text!r}", line, col)
    return text


def _probability(token: tuple[str, int], line: int) -> float:
    text, col = token
    if not _NUMBER.match(text):
        raise NetSyntaxError(f"expected a probability, found {text!r}", line, col)
    value = float(text)
    if not (math.isfinite(value) and 0.0 <= value <= 1.0):
        raise NetSyntaxError(f"probability {text} outside [0, 1]", line, col)
    return value


def parse_network(text: str) -> Network:
    """Parse the native format.

    Raises:
        NetSyntaxError: malformed input, with line and column.
        NetworkError subclasses: the document parses but is not a valid network.
    """
    lines = _Lines(text)
    line, tokens = lines.take(f"'{HEADER} {FORMAT_VERSION}' header")
    if len(tokens) != 2 or tokens[0][0] != HEADER:
        raise NetSyntaxError(f"expected '{HEADER} <version>' header", line, tokens[0][1])
    if tokens[1][0] != str(FORMAT_VERSION):
        raise NetSyntaxError(f"unsupported format version {tokens[1][0]!r}", line, tokens[1][1])

    name = "network"
    item = lines.peek()
    if item is not None and item[1][0][0] == "network":
        line, tokens = lines.take("network name")
        if len(tokens) != 2:
            raise NetSyntaxError("expected 'network <name>'", line, tokens[0][1])
        name = _ident(tokens[1], line, "network name")

    variables: dict[str, Variable] = {}
    while (item := lines.peek()) is not None and item[1][0][0] == "variable":
        line, tokens = lines.take("variable")
        if len(tokens) < 4:
            col = tokens[-1][1] + len(tokens[-1][0])
            raise NetSyntaxError("a variable needs a name and at least two states", line, col)
        vname = _ident(tokens[1], line, "variable name")
        if vname in variables:
            raise NetSyntaxError(f"variable {vname!r} declared twice", line, tokens[1][1])
        states = tuple(_ident(t, line, "state label") for t in tokens[2:])
        if len(set(states)) != len(states):
            raise NetSyntaxError(f"repeated state label in {vname!r}", line, tokens[2][1])
        variables[vname] = Variable(vname, states)

    cpts: dict[str, tuple[tuple[str, ...], list[list[float]]]] = {}
    raw: dict[str, tuple[tuple[str, ...], list[float], _Element]] = {}
    parent_refs: dict[str, _Element] = {}
    while lines.peek() is not None:
        line, tokens = lines.take("cpt")
        keyword, col = tokens[0]
        if keyword != "cpt":
            raise NetSyntaxError(f"expected 'cpt', found {keyword!r}", line, col)
        if len(tokens) < 2:
            raise NetSyntaxError("expected 'cpt <variable>'", line, col + 3)
        child = _ident(tokens[1], line, "variable name")
        if child not in variables:
            raise NetSyntaxError(f"cpt for undeclared variable {child!r}", line, tokens[1][1])
        if child in cpts:
            raise NetSyntaxError(f"second cpt for {child!r}", line, tokens[1][1])
        parents: list[str] = []
        if len(tokens) > 2:
            if tokens[2][0] != "|" or len(tokens) == 3:
                raise NetSyntaxError("expected '| <parent> ...'", line, tokens[2][1])
            for tok in tokens[3:]:
                parent = _ident(tok, line, "parent name")
                if parent not in variables:
                    raise NetSyntaxError(f"undeclared parent {parent!r}", line, tok[1])
                if parent in parents:
                    raise NetSyntaxError(f"parent {parent!r} repeated", line, tok[1])
                parents.append(parent)
        n_rows = math.prod(variables[p].cardinality for p in parents)
        width = variables[child].cardinality
        rows = []
        for _ in range(n_rows):
            rline, rtokens = lines.take(f"probability row for {child!r}")
            if not _NUMBER.match(rtokens[0][0]):
                raise NetSyntaxError(
                    f"cpt {child!r} expects {n_rows} rows, found {len(rows)}", rline, rtokens[0][1]
                )
            if len(rtokens) != width:
                raise NetSyntaxError(
                    f"row has {len(rtokens)} entries, {child!r} has {width} states", rline, rtokens[0][1]
                )
            rows.append([_probability(t, rline) for t in rtokens])
        cpts[child] = (tuple(parents), rows)

    edges = [(p, c) for c, (ps, _) in cpts.items() for p in ps]
    return build_network(variables.values(), edges, cpts, name=name)


def serialize_network(network: Network) -> str:
    """Canonical native text: declaration order, shortest round-trip decimals."""
    out = [f"{HEADER} {FORMAT_VERSION}", f"network {network.name}", ""]
    for v in network.variables:
        out.append(" ".join(["variable", v.name, *v.states]))
    for v in network.variables:
        cpt = network.cpts[v.name]
        out.append("")
        out.append(f"cpt {v.name}" + (" | " + " ".join(cpt.parents) if cpt.parents else ""))
        for row in cpt.table:
            out.append("  " + " ".join(repr(float(p)) for p in row))
    return "\n".join(out) + "\n"


def read_network(path: str | Path) -> Network:
    """Load a network, choosing the format by extension (``.xdsl`` or native)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputFileError(f"cannot read {path}: {exc}") from None
    if path.suffix.lower() == ".xdsl":
        return import_xdsl_subset(text)
    return parse_network(text)


def write_network(network: Network, path: str | Path) -> None:
    Path(path).write_text(serialize_network(network), encoding="utf-8")


# -- XDSL ---------------------------------------------------------------------

# Elements GeNIe writes that carry only presentation data.
_IGNORED = {"extensions", "property"}
_UNSUPPORTED_NODES = {
    "decision", "utility", "mau", "noisymax", "noisyadder", "deterministic",
    "equation", "submodel", "demorgan", "tnode", "list", "cast",
}


@dataclass
class _Element:
    tag: str
    attrib: dict[str, str]
    line: int
    column: int
    children: list["_Element"] = field(default_factory=list)
    text: str = ""


def _parse_xml(xml_text: str) -> _Element:
    parser = expat.ParserCreate()
    stack: list[_Element] = []
    root: list[_Element] = []

    def start(tag, attrib):
        el = _Element(tag, dict(attrib), parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].children.append(el)
        else:
            root.append(el)
        stack.append(el)

    def end(tag):
        stack.pop()

    def chars(data):
        if stack:
            stack[-1].text += data

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(xml_text, True)
    except expat.ExpatError as exc:
        raise MalformedXml(expat.ErrorString(exc.code), exc.lineno, exc.offset + 1) from None
    return root[0]


def _attr(el: _Element, key: str) -> str:
    if key not in el.attrib:
        raise MalformedXml(f"<{el.tag}> lacks the {key!r} attribute", el.line, el.column)
    value = el.attrib[key]
    if not _IDENT.match(value):
        raise MalformedXml(f"<{el.tag}> {key}={value!r} is not an identifier", el.line, el.column)
    return value


def import_xdsl_subset(xml_text: str) -> Network:
    """Import a GeNIe XDSL model made only of ``<cpt>`` chance nodes.

    GeNIe lists probabilities with the child's states varying fastest and,
    across parent configurations, the last listed parent varying fastest,
    which is exactly the native row-major layout; rows are taken verbatim.

    Raises:
        MalformedXml: not well-formed, or a required attribute/element is wrong.
        UnsupportedElement: decision, utility, or any other non-chance construct.
    """
    root = _parse_xml(xml_text)
    if root.tag != "smile":
        raise UnsupportedElement(f"root element <{root.tag}> is not <smile>", root.line, root.column)
    name = root.attrib.get("id", "network")
    if not _IDENT.match(name):
        name = "network"

    nodes_el = None
    for child in root.children:
        if child.tag == "nodes" and nodes_el is None:
            nodes_el = child
        elif child.tag not in _IGNORED:
            raise UnsupportedElement(f"<{child.tag}> is not supported", child.line, child.column)
    if nodes_el is None:
        raise MalformedXml("no <nodes> element", root.line, root.column)

    variables: dict[str, Variable] = {}
    cpts: dict[str, tuple[tuple[str, ...], list[list[float]]]] = {}
    raw: dict[str, tuple[tuple[str, ...], list[float], _Element]] = {}
    parent_refs: dict[str, _Element] = {}
    for node in nodes_el.children:
        if node.tag != "cpt":
            raise UnsupportedElement(f"<{node.tag}> nodes are not supported", node.line, node.column)
        vid = _attr(node, "id")
        if vid in variables:
            raise MalformedXml(f"node {vid!r} defined twice", node.line, node.column)
        states: list[str] = []
        parents: list[str] = []
        probs_el = None
        for part in node.children:
            if part.tag == "state":
                states.append(_attr(part, "id"))
            elif part.tag == "parents":
                parents = part.text.split()
                parent_refs[vid] = part
            elif part.tag == "probabilities":
                probs_el = part
            elif part.tag not in _IGNORED:
                raise UnsupportedElement(f"<{part.tag}> inside <cpt> is not supported", part.line, part.column)
        if len(states) < 2 or len(set(states)) != len(states):
            raise MalformedXml(f"node {vid!r} needs at least two distinct states", node.line, node.column)
        if probs_el is None:
            raise MalformedXml(f"node {vid!r} has no <probabilities>", node.line, node.column)
        values = []
        for tok in probs_el.text.split():
            if not _NUMBER.match(tok) or not 0.0 <= float(tok) <= 1.0:
                raise MalformedXml(f"bad probability {tok!r}", probs_el.line, probs_el.column)
            values.append(float(tok))
        variables[vid] = Variable(vid, tuple(states))
        raw[vid] = (tuple(parents), values, probs_el)

    # parents may be listed after their children, so shapes are checked last
    for vid, (parents, values, probs_el) in raw.items():
        for p in parents:
            if p not in variables:
                el = parent_refs[vid]
                raise MalformedXml(f"parent {p!r} of {vid!r} is not a defined node", el.line, el.column)
        width = variables[vid].cardinality
        n_rows = math.prod(variables[p].cardinality for p in parents)
        if len(values) != n_rows * width:
            raise MalformedXml(
                f"node {vid!r} lists {len(values)} probabilities, expected {n_rows * width}",
                probs_el.line, probs_el.column,
            )
        cpts[vid] = (parents, [values[i : i + width] for i in range(0, len(values), width)])

    edges = [(p, c) for c, (ps, _) in cpts.items() for p in ps]
    return build_network(variables.values(), edges, cpts, name=name)
