"""Action-gradient MCTS planners and benchmark domains."""

import json

from . import _core
from ._core import ConfigError, Error, Model, Rng, domain_names, make_domain

__all__ = [
    "ConfigError",
    "Error",
    "Model",
    "Rng",
    "default_solver_config",
    "domain_names",
    "make_domain",
    "plan",
    "run_episode",
    "run_sweep",
    "summarize_csv",
]


def default_solver_config(domain, solver="agmcts"):
    return json.loads(_core.default_solver_config(domain, solver))


def plan(domain, particles, depth=None, solver="agmcts", **overrides):
    """Plan from a uniform belief over `particles` (list of states)."""
    if depth is None:
        depth = make_domain(domain).horizon
    action, stats = _core.plan(domain, solver, json.dumps(overrides),
                               [list(p) for p in particles], depth)
    return action, json.loads(stats)


def run_episode(domain, seed, solver="agmcts", inference_particles=0,
                record_actions=False, **overrides):
    return json.loads(_core.run_episode(domain, solver, json.dumps(overrides), seed,
                                        inference_particles, record_actions))


def run_sweep(config):
    """Runs an experiment config (dict) and returns the result CSV text."""
    return _core.run_sweep(json.dumps(config))


summarize_csv = _core.summarize_csv
