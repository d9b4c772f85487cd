"""Convex bodies of revolution whose maximal hyperplane sections all have equal volume."""

import json

from ._core import (
    Body,
    KleeError,
    ball,
    load,
    sphere_measure,
    unit_ball_volume,
)
from . import _core

__all__ = [
    "Body",
    "KleeError",
    "ball",
    "build",
    "from_json",
    "load",
    "plot_tables",
    "sphere_measure",
    "unit_ball_volume",
    "verify",
]


def build(**config):
    """Build a body. Keywords use the command-line names with '-' -> '_':
    dim, delta, h_scale, h_coeffs, k, seed, count, fill."""
    keys = {k.replace("_", "-"): v for k, v in config.items()}
    return _core.build(json.dumps(keys))


def from_json(text):
    return _core.from_json(text if isinstance(text, str) else json.dumps(text))


def verify(body, directions=200, tol=1e-5):
    """Maximal-section scan; returns the report as a dict."""
    return json.loads(_core.verify_json(body, directions, tol))


def plot_tables(body, directions=200, samples=401):
    """CSV text for the profile, chords, radial functions and M_K scan."""
    return dict(_core.plot_tables(body, directions, samples))
