"""Loopy belief propagation on the CPT factor graph.

Every CPT is one factor whose scope is ``parents + (child,)``.  Evidence enters
as a 0/1 indicator on the observed variable.  Messages are updated with a
flooding schedule; exact on polytrees once the schedule has swept the diameter.
"""

from __future__ import annotations

import string
from collections.abc import Mapping

import numpy as np

from ..errors import InvalidArgument
from ..network import Network, check_evidence
from .posterior import LbpResult, Posterior


def _normalize(vec: np.ndarray) -> np.ndarray:
    total = vec.sum()
    if total > 0:
        return vec / total
    # contradictory evidence zeroes a message; fall back to uninformative
    return np.full_like(vec, 1.0 / vec.size)


def loopy_belief_propagation(
    network: Network,
    evidence: Mapping[str, str] | None = None,
    max_iterations: int = 100,
    damping: float = 0.0,
    tolerance: float = 1e-10,
) -> LbpResult:
    """Sum-product message passing; reports (does not raise on) non-convergence.

    Args:
        max_iterations: upper bound on flooding sweeps, at least 1.
        damping: weight of the previous factor-to-variable message, in [0, 1).
        tolerance: convergence threshold on the largest message change.
    """
    if max_iterations < 1:
        raise InvalidArgument("max_iterations must be >= 1")
    if not 0.0 <= damping < 1.0:
        raise InvalidArgument("damping must lie in [0, 1)")
    if not tolerance > 0:
        raise InvalidArgument("tolerance must be positive")
    ev = check_evidence(network, evidence)

    local = {}
    for v in network.variables:
        vec = np.ones(v.cardinality)
        if v.name in ev:
            vec = np.zeros(v.cardinality)
            vec[ev[v.name]] = 1.0
        local[v.name] = vec / vec.sum()

    factors = {}
    for v in network.variables:
        scope = network.parents(v.name) + (v.name,)
        letters = string.ascii_letters[: len(scope)]
        factors[v.name] = (scope, network.cpt_array(v.name), letters)
    touching: dict[str, list[str]] = {v.name: [] for v in network.variables}
    for f, (scope, _, _) in factors.items():
        for s in scope:
            touching[s].append(f)

    def factor_messages(v2f):
        out = {}
        for f, (scope, table, letters) in factors.items():
            for i, target in enumerate(scope):
                others = [j for j in range(len(scope)) if j != i]
                subscripts = ",".join([letters] + [letters[j] for j in others]) + "->" + letters[i]
                msg = np.einsum(subscripts, table, *[v2f[(f, scope[j])] for j in others])
                out[(f, target)] = _normalize(msg)
        return out

    def variable_messages(f2v):
        out = {}
        for x, fs in touching.items():
            for f in fs:
                msg = local[x].copy()
                for g in fs:
                    if g != f:
                        msg = msg * f2v[(g, x)]
                out[(f, x)] = _normalize(msg)
        return out

    v2f = {(f, x): local[x] for x, fs in touching.items() for f in fs}
    f2v = factor_messages(v2f)
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        new_v2f = variable_messages(f2v)
        fresh = factor_messages(new_v2f)
        new_f2v = {k: _normalize((1.0 - damping) * m + damping * f2v[k]) for k, m in fresh.items()}
        delta = max(
            max((np.abs(new_v2f[k] - v2f[k]).max() for k in v2f), default=0.0),
            max((np.abs(new_f2v[k] - f2v[k]).max() for k in f2v), default=0.0),
        )
        v2f, f2v = new_v2f, new_f2v
        if delta < tolerance:
            converged = True
            break

    marginals = {}
    for v in network.variables:
        belief = local[v.name].copy()
        for f in touching[v.name]:
            belief = belief * f2v[(f, v.name)]
        marginals[v.name] = Posterior(v, _normalize(belief))
    child_messages = {
        (child, parent): f2v[(child, parent)]
        for child in network.names
        for parent in network.parents(child)
    }
    return LbpResult(marginals, converged, iterations, child_messages)
