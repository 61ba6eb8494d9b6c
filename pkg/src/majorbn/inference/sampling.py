"""Stochastic inference: logic sampling, likelihood weighting and EPIS.

Random numbers
--------------
All samplers draw from NumPy's PCG64 bit generator, whose output stream is
fixed across platforms.  A run of ``n`` samples is cut into consecutive blocks
of :data:`BLOCK_SIZE` samples (the last block may be shorter).  Block ``b`` of
a run with root seed ``s`` uses ``PCG64(SeedSequence(s, spawn_key=(b,)))``.
Inside a block, variables are visited in :func:`~majorbn.network.topological_order`;
each variable that is not clamped to evidence consumes one ``Generator.random``
call covering the block's live samples, and a state is chosen by inverse CDF
over the state index.  In logic sampling a sample stops being live the moment
it contradicts an observed value, so later draws only cover the survivors.

Per-block tallies are reduced in block order, so the result depends only on
the root seed: executing blocks on several worker threads (``workers > 1``)
gives bit-identical reports to a serial run.
"""

from __future__ import annotations

from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import AllZeroWeights, InvalidArgument, NoAcceptedSamples
from ..network import Network, check_evidence, topological_order
from .lbp import loopy_belief_propagation
from .posterior import Posterior, SamplerReport

BLOCK_SIZE = 16384
MAX_SEED = 2**64 - 1
DEFAULT_EPSILON = 0.006


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed <= MAX_SEED:
        raise InvalidArgument(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def blocks(n: int) -> list[tuple[int, int]]:
    """``(block_index, block_length)`` pairs covering ``n`` samples."""
    return [(b, min(BLOCK_SIZE, n - start)) for b, start in enumerate(range(0, n, BLOCK_SIZE))]


def derive_seed(root: int, *keys: int) -> int:
    """A 64-bit seed that is a pure function of ``root`` and ``keys``."""
    seq = np.random.SeedSequence(check_seed(root), spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass
class _Node:
    column: int
    parent_columns: tuple[int, ...]
    strides: tuple[int, ...]
    cardinality: int
    flat_cdf: np.ndarray | None  # row r's CDF shifted by r; None when clamped
    clamp: int | None
    weight_table: np.ndarray | None  # per (row, state) weight factor, or None


class _Plan:
    """Precomputed per-variable lookup tables for a forward sampler."""

    def __init__(self, network: Network, proposals: Mapping[str, np.ndarray], clamps: Mapping[str, int],
                 weight_tables: Mapping[str, np.ndarray]):
        columns = {name: i for i, name in enumerate(network.names)}
        self.width = len(columns)
        self.nodes = []
        for v in topological_order(network):
            parents = network.parents(v.name)
            cards = [network.cardinality(p) for p in parents]
            strides = [1] * len(parents)
            for i in range(len(parents) - 2, -1, -1):
                strides[i] = strides[i + 1] * cards[i + 1]
            flat_cdf = None
            if v.name not in clamps:
                cdf = np.cumsum(proposals[v.name], axis=1)
                cdf[:, -1] = 1.0
                flat_cdf = (cdf + np.arange(cdf.shape[0])[:, None]).ravel()
            self.nodes.append(_Node(
                columns[v.name],
                tuple(columns[p] for p in parents),
                tuple(strides),
                v.cardinality,
                flat_cdf,
                clamps.get(v.name),
                weight_tables.get(v.name),
            ))

    def run_block(self, m: int, rng: np.random.Generator, weighted: bool,
                  reject: Mapping[int, int] | None = None):
        """Sample one block.

        Returns per-column state arrays (declaration order) and the weights.
        With ``reject`` (column -> required state), a sample is dropped as
        soon as it contradicts a required state, and later variables are
        drawn only for the survivors.
        """
        cols: list[np.ndarray | None] = [None] * self.width
        weights = np.ones(m) if weighted else None
        for node in self.nodes:
            if node.parent_columns:
                rows = cols[node.parent_columns[0]] * node.strides[0]
                for c, stride in zip(node.parent_columns[1:], node.strides[1:]):
                    rows = rows + cols[c] * stride
            else:
                rows = np.zeros(m, dtype=np.int64)
            if node.clamp is not None:
                x = np.full(m, node.clamp, dtype=np.int64)
            else:
                u = rng.random(m)
                x = np.searchsorted(node.flat_cdf, rows + u, side="right") - rows * node.cardinality
                np.minimum(x, node.cardinality - 1, out=x)
            if weighted and node.weight_table is not None:
                weights *= node.weight_table[rows, x]
            cols[node.column] = x
            if reject is not None and node.column in reject:
                keep = x == reject[node.column]
                cols = [c if c is None else c[keep] for c in cols]
                if weights is not None:
                    weights = weights[keep]
                m = int(np.count_nonzero(keep))
        return cols, weights


def _map_blocks(fn, n: int, workers: int):
    if workers < 1:
        raise InvalidArgument("workers must be >= 1")
    work = blocks(n)
    if workers == 1 or len(work) == 1:
        return [fn(b, m) for b, m in work]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda bm: fn(*bm), work))


def _check_common(network: Network, evidence, query: str, n: int, seed: int) -> dict[str, int]:
    network.variable(query)
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument(f"sample count must be >= 1, got {n!r}")
    check_seed(seed)
    ev = check_evidence(network, evidence)
    if query in ev:
        raise InvalidArgument(f"query variable {query!r} is also observed")
    return ev


def forward_sample(network: Network, n: int, seed: int, workers: int = 1) -> np.ndarray:
    """``n`` joint samples as an ``(n, len(variables))`` array of state indices.

    Columns follow the network's declaration order.
    """
    check_seed(seed)
    if n < 0:
        raise InvalidArgument("sample count must be >= 0")
    if n == 0:
        return np.empty((0, len(network.variables)), dtype=np.int64)
    plan = _Plan(network, {v.name: network.cpts[v.name].table for v in network.variables}, {}, {})
    parts = _map_blocks(
        lambda b, m: np.column_stack(plan.run_block(m, block_generator(seed, b), False)[0]), n, workers
    )
    return np.concatenate(parts)


def logic_sampling(
    network: Network,
    evidence: Mapping[str, str] | None,
    query: str,
    n: int,
    seed: int,
    workers: int = 1,
) -> SamplerReport:
    """Forward sampling with rejection of samples that contradict the evidence.

    Raises:
        NoAcceptedSamples: no sample matched the evidence.
    """
    ev = _check_common(network, evidence, query, n, seed)
    plan = _Plan(network, {v.name: network.cpts[v.name].table for v in network.variables}, {}, {})
    qcol = network.position(query)
    reject = {network.position(name): state for name, state in ev.items()}
    k = network.cardinality(query)

    def run(b, m):
        cols, _ = plan.run_block(m, block_generator(seed, b), False, reject)
        return np.bincount(cols[qcol], minlength=k)

    counts = np.zeros(k, dtype=np.int64)
    for part in _map_blocks(run, n, workers):
        counts += part
    accepted = int(counts.sum())
    if accepted == 0:
        raise NoAcceptedSamples(f"none of {n} samples matched the evidence")
    posterior = Posterior(network.variable(query), counts / accepted)
    return SamplerReport(posterior, n, accepted, float(accepted), seed)


def _weighted_run(network, ev, query, n, seed, proposals, weight_tables, workers) -> SamplerReport:
    plan = _Plan(network, proposals, ev, weight_tables)
    qcol = network.position(query)
    k = network.cardinality(query)

    def run(b, m):
        cols, w = plan.run_block(m, block_generator(seed, b), True)
        return (
            np.bincount(cols[qcol], weights=w, minlength=k),
            float(w.sum()),
            float(np.dot(w, w)),
            int(np.count_nonzero(w)),
        )

    totals = np.zeros(k)
    sw = sw2 = 0.0
    nonzero = 0
    for part_totals, part_sw, part_sw2, part_nz in _map_blocks(run, n, workers):
        totals += part_totals
        sw += part_sw
        sw2 += part_sw2
        nonzero += part_nz
    if not sw > 0.0:
        raise AllZeroWeights(f"all {n} sample weights are zero")
    posterior = Posterior(network.variable(query), totals / totals.sum())
    # (sum w)^2 / sum w^2 can overshoot n by an ulp when weights are equal
    return SamplerReport(posterior, n, nonzero, min(float(n), sw * sw / sw2), seed)


def likelihood_weighting(
    network: Network,
    evidence: Mapping[str, str] | None,
    query: str,
    n: int,
    seed: int,
    workers: int = 1,
) -> SamplerReport:
    """Forward sampling with evidence clamped, weighting each sample by the
    probability of the evidence given its sampled parents.

    Raises:
        AllZeroWeights: every sample has weight zero.
    """
    ev = _check_common(network, evidence, query, n, seed)
    proposals = {v.name: network.cpts[v.name].table for v in network.variables if v.name not in ev}
    weight_tables = {name: network.cpts[name].table for name in ev}
    return _weighted_run(network, ev, query, n, seed, proposals, weight_tables, workers)


def importance_tables(
    network: Network,
    evidence: Mapping[str, str] | None,
    epsilon: float = DEFAULT_EPSILON,
    max_iterations: int = 100,
    damping: float = 0.0,
    tolerance: float = 1e-10,
) -> dict[str, np.ndarray]:
    """Importance CPTs for every unobserved variable.

    Each CPT row is multiplied by the product of the belief-propagation
    messages the variable receives from its children's factors (the evidence
    support from below) and renormalized; entries under ``epsilon`` are then
    raised to ``epsilon`` and the row renormalized again.
    """
    if not 0.0 < epsilon < 0.5:
        raise InvalidArgument("epsilon must lie in (0, 0.5)")
    ev = check_evidence(network, evidence)
    lbp = loopy_belief_propagation(network, evidence, max_iterations, damping, tolerance)
    tables = {}
    for v in network.variables:
        if v.name in ev:
            continue
        support = np.ones(v.cardinality)
        for child in network.children(v.name):
            support = support * lbp.child_messages[(child, v.name)]
        table = network.cpts[v.name].table * support
        sums = table.sum(axis=1, keepdims=True)
        table = np.where(sums > 0, table / np.where(sums > 0, sums, 1.0), 1.0 / v.cardinality)
        table = np.maximum(table, epsilon)
        tables[v.name] = table / table.sum(axis=1, keepdims=True)
    return tables


def epis_sampling(
    network: Network,
    evidence: Mapping[str, str] | None,
    query: str,
    n: int,
    seed: int,
    epsilon: float = DEFAULT_EPSILON,
    workers: int = 1,
) -> SamplerReport:
    """Evidence pre-propagation importance sampling.

    Proposals come from :func:`importance_tables`; a sample's weight is the
    product of prior/proposal ratios over sampled variables times the
    evidence likelihoods of the clamped ones.

    Raises:
        AllZeroWeights: every sample has weight zero.
    """
    ev = _check_common(network, evidence, query, n, seed)
    proposals = importance_tables(network, evidence, epsilon)
    weight_tables = {name: network.cpts[name].table / proposals[name] for name in proposals}
    weight_tables.update({name: network.cpts[name].table for name in ev})
    return _weighted_run(network, ev, query, n, seed, proposals, weight_tables, workers)
