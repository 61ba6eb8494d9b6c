"""Discrete Bayesian networks for predicting a student's academic major."""

from .network import (
    QUAD_STATES,
    Cpt,
    Network,
    QuadScale,
    Variable,
    build_network,
    joint_probability,
    topological_order,
)

__version__ = "0.1.0"

__all__ = [
    "QUAD_STATES",
    "Cpt",
    "Network",
    "QuadScale",
    "Variable",
    "build_network",
    "joint_probability",
    "topological_order",
]
