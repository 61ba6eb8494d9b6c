from __future__ import annotations

from collections.abc import Mapping

from ..errors import InvalidArgument
from ..network import Network
from .exact import enumerate_posterior, variable_elimination
from .lbp import loopy_belief_propagation
from .posterior import LbpResult, Posterior, SamplerReport, map_state
from .sampling import (
    DEFAULT_EPSILON,
    derive_seed,
    epis_sampling,
    forward_sample,
    importance_tables,
    likelihood_weighting,
    logic_sampling,
)

ALGORITHMS = ("exact", "logic", "likelihood", "epis")
SAMPLERS = ("logic", "likelihood", "epis")


def posterior(
    network: Network,
    evidence: Mapping[str, str] | None,
    query: str,
    algorithm: str = "exact",
    samples: int = 50000,
    seed: int = 1,
    epsilon: float = DEFAULT_EPSILON,
) -> tuple[Posterior, SamplerReport | None]:
    """Dispatch to one engine by name; the report is ``None`` for ``exact``."""
    if algorithm == "exact":
        return variable_elimination(network, evidence, query), None
    if algorithm == "logic":
        report = logic_sampling(network, evidence, query, samples, seed)
    elif algorithm == "likelihood":
        report = likelihood_weighting(network, evidence, query, samples, seed)
    elif algorithm == "epis":
        report = epis_sampling(network, evidence, query, samples, seed, epsilon)
    else:
        raise InvalidArgument(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    return report.posterior, report


__all__ = [
    "ALGORITHMS",
    "SAMPLERS",
    "DEFAULT_EPSILON",
    "LbpResult",
    "Posterior",
    "SamplerReport",
    "derive_seed",
    "enumerate_posterior",
    "epis_sampling",
    "forward_sample",
    "importance_tables",
    "likelihood_weighting",
    "logic_sampling",
    "loopy_belief_propagation",
    "map_state",
    "posterior",
    "variable_elimination",
]
