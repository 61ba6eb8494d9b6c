"""Exact posterior computation.

Two independent engines: :func:`enumerate_posterior` materialises the joint
table over all unobserved variables and is meant as a ground-truth oracle for
small networks; :func:`variable_elimination` is the engine used everywhere
else.
"""

from __future__ import annotations

import math
import string
from collections.abc import Mapping

import numpy as np

from ..errors import InvalidArgument, StateSpaceTooLarge, ZeroProbabilityEvidence
from ..network import Network, check_evidence
from .posterior import Posterior

MAX_ENUMERATION_STATES = 2**24

Factor = tuple[tuple[str, ...], np.ndarray]


def _prepare(network: Network, evidence: Mapping[str, str] | None, query: str) -> dict[str, int]:
    network.variable(query)
    ev = check_evidence(network, evidence)
    if query in ev:
        raise InvalidArgument(f"query variable {query!r} is also observed")
    return ev


def _restricted_cpts(network: Network, ev: dict[str, int]) -> list[Factor]:
    factors = []
    for v in network.variables:
        scope = network.parents(v.name) + (v.name,)
        arr = network.cpt_array(v.name)[tuple(ev.get(s, slice(None)) for s in scope)]
        factors.append((tuple(s for s in scope if s not in ev), arr))
    return factors


def _finish(network: Network, query: str, unnormalized: np.ndarray) -> Posterior:
    total = float(unnormalized.sum())
    if not total > 0.0:
        raise ZeroProbabilityEvidence("the evidence has probability zero under the network")
    return Posterior(network.variable(query), unnormalized / total)


def enumerate_posterior(network: Network, evidence: Mapping[str, str] | None, query: str) -> Posterior:
    """Brute-force posterior: build the full joint over unobserved variables and sum.

    Raises:
        StateSpaceTooLarge: more than 2**24 completions of the evidence.
        ZeroProbabilityEvidence: every completion has probability zero.
    """
    ev = _prepare(network, evidence, query)
    free = [v.name for v in network.variables if v.name not in ev]
    size = math.prod(network.cardinality(n) for n in free)
    if size > MAX_ENUMERATION_STATES:
        raise StateSpaceTooLarge(f"{size} completions exceed the enumeration limit")
    if len(free) > len(string.ascii_letters):
        raise StateSpaceTooLarge("too many unobserved variables to enumerate")
    letter = dict(zip(free, string.ascii_letters))
    operands, subscripts = [], []
    for scope, arr in _restricted_cpts(network, ev):
        operands.append(arr)
        subscripts.append("".join(letter[s] for s in scope))
    out = "".join(letter[n] for n in free)
    joint = np.einsum(",".join(subscripts) + "->" + out, *operands)
    axis = free.index(query)
    marginal = joint.sum(axis=tuple(i for i in range(len(free)) if i != axis))
    return _finish(network, query, marginal)


def _multiply(factors: list[Factor]) -> Factor:
    union: list[str] = []
    for scope, _ in factors:
        union.extend(s for s in scope if s not in union)
    result = np.ones([1] * len(union))
    for scope, arr in factors:
        order = [scope.index(u) for u in union if u in scope]
        shape = [arr.shape[scope.index(u)] if u in scope else 1 for u in union]
        result = result * np.transpose(arr, order).reshape(shape)
    return tuple(union), result


def elimination_order(network: Network, factors: list[Factor], hidden: list[str]) -> list[str]:
    """Greedy min-degree order over the factors' interaction graph.

    Ties go to the earlier-declared variable.
    """
    neighbours = {h: set() for h in hidden}
    for scope, _ in factors:
        for s in scope:
            if s in neighbours:
                neighbours[s].update(x for x in scope if x != s)
    remaining = set(hidden)
    order = []
    while remaining:
        pick = min(remaining, key=lambda h: (len(neighbours[h]), network.position(h)))
        order.append(pick)
        remaining.discard(pick)
        nbrs = neighbours.pop(pick)
        for n in nbrs:
            if n in neighbours:
                neighbours[n].discard(pick)
                neighbours[n].update(x for x in nbrs if x != n)
    return order


def variable_elimination(network: Network, evidence: Mapping[str, str] | None, query: str) -> Posterior:
    """Sum-product variable elimination with a min-degree elimination order.

    Raises:
        ZeroProbabilityEvidence: the evidence cannot occur.
    """
    ev = _prepare(network, evidence, query)
    factors = _restricted_cpts(network, ev)
    hidden = [v.name for v in network.variables if v.name not in ev and v.name != query]
    for var in elimination_order(network, factors, hidden):
        touching = [f for f in factors if var in f[0]]
        if not touching:
            continue
        factors = [f for f in factors if var not in f[0]]
        scope, table = _multiply(touching)
        axis = scope.index(var)
        factors.append((scope[:axis] + scope[axis + 1 :], table.sum(axis=axis)))
    scope, table = _multiply(factors)
    if scope != (query,):
        # query had no factor left in scope; cannot happen for a valid network
        raise AssertionError(f"unexpected final scope {scope}")
    return _finish(network, query, table)
