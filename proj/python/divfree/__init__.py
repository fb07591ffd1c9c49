"""Q1 finite element solver and estimate checks for elliptic problems with rough zero-order terms."""

import json
import os

from . import _core
from ._core import ConfigError, NumericalError, exponent_set, list_suites, sobolev_factor

__all__ = [
    "ConfigError",
    "NumericalError",
    "compute_rho",
    "exponent_set",
    "list_suites",
    "load_config",
    "run",
    "sobolev_factor",
    "solve",
]


def load_config(config):
    """Return (json_text, base_dir) for a path to a .toml/.json file or a dict."""
    if isinstance(config, dict):
        return json.dumps(config), "."
    path = os.fspath(config)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    base = os.path.dirname(os.path.abspath(path))
    if path.endswith(".json"):
        return text, base
    return _core.toml_to_json(text), base


def solve(config, method="direct", cells=None):
    """Solve the configured problem.

    ``nodal`` covers every grid node with axis 0 fastest, so
    ``out["nodal"].reshape(out["shape"], order="F")`` indexes it as u[i0, i1, ...].
    """
    text, base = load_config(config)
    return _core.solve(text, base, method, cells)


def compute_rho(config, cells=None):
    """Invariant density of the configured (A, H), normalized at the node nearest the center."""
    text, base = load_config(config)
    return _core.compute_rho(text, base, cells)


def run(config, out, parallel=None, tol=None):
    """Run the configured suites, writing report.json, tables/*.csv and summary.txt under `out`."""
    text, base = load_config(config)
    return _core.run(text, base, os.fspath(out), parallel, tol)
