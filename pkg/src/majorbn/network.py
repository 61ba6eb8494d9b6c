"""Discrete Bayesian network representation.

A :class:`Network` is an immutable DAG of categorical :class:`Variable` objects,
each carrying a :class:`Cpt`.  CPT rows are laid out in row-major order over
the parents' state indices, so the last parent varies fastest; reshaping a
table to ``parent_cards + (child_card,)`` in C order recovers the full array.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import (
    CptShapeMismatch,
    CycleDetected,
    DuplicateName,
    InvalidArgument,
    InvalidProbability,
    UnknownState,
    UnknownVariable,
    UnnormalizedRow,
)

NORMALIZATION_TOLERANCE = 1e-9

QUAD_STATES: tuple[str, ...] = ("very_low", "low", "much", "very_much")


class QuadScale:
    """The four-level response scale used by the questionnaire.

    States are ordered ``very_low < low < much < very_much`` and weighted by
    their 1-based position.
    """

    states = QUAD_STATES

    @staticmethod
    def weight(state: str) -> int:
        try:
            return QUAD_STATES.index(state) + 1
        except ValueError:
            raise UnknownState(f"{state!r} is not a quad-scale state") from None

    @staticmethod
    def is_quad(states: Sequence[str]) -> bool:
        return tuple(states) == QUAD_STATES


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise UnknownState(
                f"state {state!r} not in domain of {self.name!r} {list(self.states)}"
            ) from None


@dataclass(frozen=True, eq=False)
class Cpt:
    """Conditional probability table of ``child`` given ``parents``.

    ``table`` has one row per parent configuration (row-major, last parent
    fastest) and one column per child state.
    """

    child: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        table = np.array(self.table, dtype=float)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cpt):
            return NotImplemented
        return (
            self.child == other.child
            and self.parents == other.parents
            and self.table.shape == other.table.shape
            and bool(np.array_equal(self.table, other.table))
        )

    __hash__ = None  # type: ignore[assignment]


def _normalize_row(row: np.ndarray) -> np.ndarray:
    """Absorb float round-off so the row sums to exactly 1.0 when possible.

    The residual goes into the largest entry, which leaves rows that already
    sum to 1.0 untouched and keeps parse/serialize round trips stable.
    """
    if math.fsum(row) == 1.0:
        return row
    row = row.copy()
    k = int(np.argmax(row))
    rest = math.fsum(np.delete(row, k))
    row[k] = max(0.0, 1.0 - rest)
    return row


class Network:
    """Validated, immutable discrete Bayesian network.

    Build instances with :func:`build_network`; the constructor trusts its
    arguments.
    """

    def __init__(self, variables: tuple[Variable, ...], cpts: dict[str, Cpt], name: str = "network"):
        self.name = name
        self.variables = variables
        self._by_name = {v.name: v for v in variables}
        self._position = {v.name: i for i, v in enumerate(variables)}
        self.cpts = dict(cpts)
        self.edges = frozenset((p, c.child) for c in cpts.values() for p in c.parents)
        children: dict[str, list[str]] = {v.name: [] for v in variables}
        for v in variables:
            for p in cpts[v.name].parents:
                children[p].append(v.name)
        self._children = {k: tuple(v) for k, v in children.items()}

    def __repr__(self) -> str:
        return f"Network({self.name!r}, {len(self.variables)} nodes, {len(self.edges)} edges)"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.variables == other.variables
            and all(self.cpts[v.name] == other.cpts[v.name] for v in self.variables)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    def position(self, name: str) -> int:
        self.variable(name)
        return self._position[name]

    def parents(self, name: str) -> tuple[str, ...]:
        self.variable(name)
        return self.cpts[name].parents

    def children(self, name: str) -> tuple[str, ...]:
        self.variable(name)
        return self._children[name]

    def cardinality(self, name: str) -> int:
        return self.variable(name).cardinality

    def cpt_array(self, name: str) -> np.ndarray:
        """The CPT as a dense array with axes ``parents + (child,)``."""
        cpt = self.cpts[name]
        shape = tuple(self.cardinality(p) for p in cpt.parents) + (self.cardinality(name),)
        return cpt.table.reshape(shape)

    def row_index(self, name: str, parent_states: Mapping[str, int]) -> int:
        cpt = self.cpts[name]
        if not cpt.parents:
            return 0
        idx = tuple(parent_states[p] for p in cpt.parents)
        dims = tuple(self.cardinality(p) for p in cpt.parents)
        return int(np.ravel_multi_index(idx, dims))

    def with_tables(self, tables: Mapping[str, np.ndarray], name: str | None = None) -> "Network":
        """Copy of this network with some CPT tables replaced (validated)."""
        cpts = {}
        for v in self.variables:
            cpt = self.cpts[v.name]
            table = tables.get(v.name, cpt.table)
            cpts[v.name] = (cpt.parents, table)
        edges = [(p, c) for c, (ps, _) in cpts.items() for p in ps]
        return build_network(self.variables, edges, cpts, name=name or self.name)


def _coerce_variable(item: Any) -> Variable:
    if isinstance(item, Variable):
        return item
    name, states = item
    return Variable(name, tuple(states))


def build_network(
    variables: Iterable[Variable | tuple[str, Sequence[str]]],
    edges: Iterable[tuple[str, str]],
    cpts: Mapping[str, Any],
    name: str = "network",
) -> Network:
    """Validate the pieces of a network and assemble it.

    ``cpts`` maps each child to either a :class:`Cpt`, a ``(parents, rows)``
    pair, or bare rows.  Bare rows take their parent order from the order in
    which the child's in-edges appear in ``edges``.

    Raises:
        DuplicateName, CycleDetected, CptShapeMismatch, UnnormalizedRow,
        InvalidProbability, UnknownVariable.
    """
    variables = tuple(_coerce_variable(v) for v in variables)
    edges = [tuple(e) for e in edges]

    seen: set[str] = set()
    for v in variables:
        if not isinstance(v.name, str) or not v.name:
            raise InvalidArgument("variable names must be non-empty strings")
        if v.name in seen:
            raise DuplicateName(f"variable {v.name!r} declared twice")
        seen.add(v.name)
        if len(v.states) < 2:
            raise CptShapeMismatch(f"variable {v.name!r} needs at least 2 states")
        if len(set(v.states)) != len(v.states):
            raise DuplicateName(f"variable {v.name!r} has repeated state labels")

    in_edges: dict[str, list[str]] = {v.name: [] for v in variables}
    for parent, child in edges:
        for end in (parent, child):
            if end not in seen:
                raise UnknownVariable(f"edge {parent}->{child} names unknown variable {end!r}")
        if parent == child:
            raise CycleDetected(f"self loop on {parent!r}")
        if parent in in_edges[child]:
            raise DuplicateName(f"edge {parent}->{child} listed twice")
        in_edges[child].append(parent)
    _check_acyclic(variables, in_edges)

    by_name = {v.name: v for v in variables}
    built: dict[str, Cpt] = {}
    for child in cpts:
        if child not in by_name:
            raise UnknownVariable(f"CPT given for unknown variable {child!r}")
    for v in variables:
        if v.name not in cpts:
            raise CptShapeMismatch(f"no CPT for variable {v.name!r}")
        entry = cpts[v.name]
        if isinstance(entry, Cpt):
            parents, rows = entry.parents, entry.table
        elif _is_parent_entry(entry):
            parents, rows = tuple(entry[0]), entry[1]
        else:
            parents, rows = tuple(in_edges[v.name]), entry
        if sorted(parents) != sorted(in_edges[v.name]) or len(set(parents)) != len(parents):
            raise CptShapeMismatch(
                f"CPT parents of {v.name!r} {list(parents)} do not match its in-edges "
                f"{in_edges[v.name]}"
            )
        built[v.name] = Cpt(v.name, parents, _check_table(v, parents, rows, by_name))
    return Network(variables, built, name=name)


def _is_parent_entry(entry: Any) -> bool:
    return (
        isinstance(entry, tuple)
        and len(entry) == 2
        and isinstance(entry[0], (tuple, list))
        and all(isinstance(p, str) for p in entry[0])
    )


def _check_table(v: Variable, parents: tuple[str, ...], rows: Any, by_name: dict[str, Variable]) -> np.ndarray:
    n_rows = math.prod(by_name[p].cardinality for p in parents)
    try:
        table = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise CptShapeMismatch(f"CPT of {v.name!r} is not a rectangular numeric table") from None
    if table.ndim == 1 and n_rows == 1:
        table = table[None, :]
    if table.ndim != 2 or table.shape != (n_rows, v.cardinality):
        raise CptShapeMismatch(
            f"CPT of {v.name!r} has shape {table.shape}, expected ({n_rows}, {v.cardinality})"
        )
    if not np.all(np.isfinite(table)) or np.any(table < 0) or np.any(table > 1):
        raise InvalidProbability(f"CPT of {v.name!r} has entries outside [0, 1]")
    for i, row in enumerate(table):
        total = math.fsum(row)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise UnnormalizedRow(f"CPT of {v.name!r}, row {i} sums to {total!r}")
        table[i] = _normalize_row(row)
    return table


def _check_acyclic(variables: tuple[Variable, ...], in_edges: dict[str, list[str]]) -> None:
    state = {v.name: 0 for v in variables}  # 0 new, 1 on stack, 2 done
    for root in state:
        if state[root]:
            continue
        stack = [(root, iter(in_edges[root]))]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
            elif state[nxt] == 1:
                cycle = [n for n, _ in stack]
                cycle = cycle[cycle.index(nxt):]
                raise CycleDetected("cycle through " + " <- ".join(cycle + [nxt]))
            elif state[nxt] == 0:
                state[nxt] = 1
                stack.append((nxt, iter(in_edges[nxt])))


def topological_order(network: Network) -> list[Variable]:
    """Parents before children; ties go to the earlier-declared variable."""
    indegree = {v.name: len(network.parents(v.name)) for v in network.variables}
    heap = [network.position(n) for n, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = network.variables[heapq.heappop(heap)]
        order.append(v)
        for child in network.children(v.name):
            indegree[child] -= 1
            if indegree[child] == 0:
                heapq.heappush(heap, network.position(child))
    return order


def check_evidence(network: Network, evidence: Mapping[str, str] | None) -> dict[str, int]:
    """Validate evidence and convert it to ``name -> state index``."""
    out = {}
    for name, state in (evidence or {}).items():
        out[name] = network.variable(name).index(state)
    return out


def joint_probability(network: Network, assignment: Mapping[str, str]) -> float:
    """Chain-rule product of the CPT entries selected by a complete assignment."""
    missing = set(network.names) - set(assignment)
    if missing:
        raise InvalidArgument(f"assignment does not cover {sorted(missing)}")
    idx = check_evidence(network, assignment)
    if len(idx) != len(network.variables):
        extra = set(assignment) - set(network.names)
        raise UnknownVariable(f"assignment names unknown variables {sorted(extra)}")
    p = 1.0
    for v in network.variables:
        row = network.row_index(v.name, idx)
        p *= float(network.cpts[v.name].table[row, idx[v.name]])
    return p
