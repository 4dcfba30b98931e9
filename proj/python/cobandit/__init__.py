"""Cooperative bandit wireless network selection.

Thin wrapper over the C++ core: congestion-game oracles, closed-form
theory quantities, and the deterministic seeded simulator.
"""

try:
    from ._cobandit import *  # noqa: F401,F403  (installed wheel layout)
    from ._cobandit import __doc__ as _core_doc
except ImportError:  # development layout: module on PYTHONPATH next to sources
    from _cobandit import *  # noqa: F401,F403
    from _cobandit import __doc__ as _core_doc

__all__ = [
    "raw_gain",
    "scaled_gain",
    "perceived_loss",
    "nash_allocation",
    "is_nash",
    "distance_to_ne",
    "regret_bound",
    "hear_probability",
    "replicator_field",
    "validate_scenario",
    "baseline_scenario_json",
    "run_scenario",
    "run_experiment",
]
