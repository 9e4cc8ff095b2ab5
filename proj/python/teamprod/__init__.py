"""Team production estimators for partially observed collaboration networks."""

import json

from . import _core
from ._core import (
    ConfigError,
    InvalidInput,
    NetworkView,
    NumericalError,
    SimulatedNetworks,
    TeamNetwork,
    chi2_upper_tail,
    collaboration_premium,
    moment_mk,
    naive_lambda,
    preset_names,
    read_network,
    triplets,
    trunc_normal_moment,
    write_network,
)

__version__ = _core.__version__


def simulate(config=None, **overrides):
    """Simulate latent and observed networks.

    `config` is a mapping with the same keys as a simulate config file
    (nodes, links, lambda, sigma, seed, error, alpha, ...); keyword arguments
    override it.
    """
    cfg = dict(config or {})
    cfg.update(overrides)
    return _core._simulate(json.dumps(cfg))


def default_config():
    """The default data-generating configuration as a dict."""
    return json.loads(_core._dgp_defaults())


def gmm(triplet_array, moments=(1, 2), weighting="identity", bootstrap=0, level=0.90,
        seed=0, threads=1):
    """Fit (lambda, sigma) on an n x 3 array of (y_i, y_j, y_ij)."""
    return json.loads(_core._gmm(triplet_array, list(moments), weighting, bootstrap, level,
                                 seed, threads))


def jtest(network, statistics=("degree", "closeness")):
    """J-test for missing links on an observed network."""
    return json.loads(_core._jtest(network, list(statistics)))


def montecarlo(preset=None, seed=0, threads=1, **cell):
    """Run a Monte Carlo cell; `cell` keys override the preset (reps, dgp, gmm, ...)."""
    return json.loads(_core._montecarlo(preset or "", json.dumps(cell) if cell else "", seed,
                                        threads))


__all__ = [
    "ConfigError", "InvalidInput", "NetworkView", "NumericalError", "SimulatedNetworks",
    "TeamNetwork", "chi2_upper_tail", "collaboration_premium", "default_config", "gmm",
    "jtest", "moment_mk", "montecarlo", "naive_lambda", "preset_names", "read_network",
    "simulate", "triplets", "trunc_normal_moment", "write_network",
]
