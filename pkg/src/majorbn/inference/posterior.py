from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..network import Variable


@dataclass(frozen=True, eq=False)
class Posterior:
    """Normalized distribution over one variable's states, in state order."""

    variable: Variable
    probabilities: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probabilities, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)

    def __getitem__(self, state: str) -> float:
        return float(self.probabilities[self.variable.index(state)])

    def as_dict(self) -> dict[str, float]:
        return {s: float(p) for s, p in zip(self.variable.states, self.probabilities)}

    def l1(self, other: "Posterior") -> float:
        return float(np.abs(self.probabilities - other.probabilities).sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Posterior):
            return NotImplemented
        return self.variable == other.variable and bool(
            np.array_equal(self.probabilities, other.probabilities)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class SamplerReport:
    posterior: Posterior
    requested_samples: int
    accepted_samples: int
    effective_sample_size: float
    seed: int


@dataclass(frozen=True)
class LbpResult:
    marginals: dict[str, Posterior]
    converged: bool
    iterations: int
    # factor-to-variable messages into each variable from its children's CPTs,
    # keyed by (child, parent); used to build importance functions.
    child_messages: dict[tuple[str, str], np.ndarray] = field(default_factory=dict, repr=False)


def map_state(posterior: Posterior) -> str:
    """Most probable state; ties resolve to the lowest state index."""
    return posterior.variable.states[int(np.argmax(posterior.probabilities))]
