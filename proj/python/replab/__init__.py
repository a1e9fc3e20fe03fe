"""Desk-scale laboratory for actor-critic representation analysis."""

from ._core import (
    Agent,
    Environment,
    compression_efficiency,
    exact_mi_discrete,
    ksg_mi_cc,
    measure_agent,
    mi_cd,
    train_agent,
    verify_theory,
    welch_t_test,
    __version__,
)

__all__ = [
    "Agent",
    "Environment",
    "compression_efficiency",
    "exact_mi_discrete",
    "ksg_mi_cc",
    "measure_agent",
    "mi_cd",
    "train_agent",
    "verify_theory",
    "welch_t_test",
    "__version__",
]
