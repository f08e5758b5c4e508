"""Sequential resource allocation for SIS epidemics on networks."""

import json

from ._seqdra import (
    ConfigError,
    Graph,
    barabasi_albert,
    ccm,
    community,
    erdos_renyi,
    hiring_above_mean,
    hiring_above_median,
    integrate_moments,
    load_edge_list,
    offline_select,
    simulate,
    watts_strogatz,
)
from . import _seqdra


def run(config):
    """Run every arm of an experiment config given as a dict or JSON text."""
    return _seqdra.run(config if isinstance(config, str) else json.dumps(config))


def regress(config):
    """Per-alpha error regressions for a config given as a dict or JSON text."""
    return _seqdra.regress(config if isinstance(config, str) else json.dumps(config))


def sweep_alpha(config):
    """CCM* AUC per (network type, mean degree, alpha) for a dict or JSON config."""
    return _seqdra.sweep_alpha(config if isinstance(config, str) else json.dumps(config))


__all__ = [
    "ConfigError",
    "Graph",
    "barabasi_albert",
    "ccm",
    "community",
    "erdos_renyi",
    "hiring_above_mean",
    "hiring_above_median",
    "integrate_moments",
    "load_edge_list",
    "offline_select",
    "regress",
    "run",
    "simulate",
    "sweep_alpha",
    "watts_strogatz",
]
