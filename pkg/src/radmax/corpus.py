"""Fixed test-profile corpus, declared in data/corpus.json.

Profiles are smooth or mollified (quintic-smoothstep ramps, so C^2) to keep
grid quadrature honest at the tolerances the verification suite asserts.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .profiles import PolarProfile, RadialProfile, radial_grid, theta_grid


def smoothstep(x):
    """Quintic smoothstep: 0 below 0, 1 above 1, C^2 across both joins."""
    x = np.clip(x, 0.0, 1.0)
    return x ** 3 * (10.0 - 15.0 * x + 6.0 * x ** 2)


def ramp_down(r, edge: float, width: float):
    """1 well inside edge, 0 beyond edge + width, smooth in between."""
    return 1.0 - smoothstep((np.asarray(r, dtype=float) - edge) / width)


_RADIAL_SHAPES = {
    "gaussian": lambda r: np.exp(-r ** 2),
    "annulus": lambda r: smoothstep((r - 0.8) / 0.5) * (1.0 - smoothstep((r - 2.2) / 0.5)),
    "two_bump": lambda r: np.exp(-4.0 * (r - 1.0) ** 2) + 0.6 * np.exp(-6.0 * (r - 3.0) ** 2),
    "cap": lambda r: ramp_down(r, 1.0, 0.6),
}

_POLAR_SHAPES = {
    "cap": lambda th: ramp_down(th, np.pi / 2 - 0.25, 0.5),
    "cos2": lambda th: np.cos(th) ** 2,
    "two_bump": lambda th: np.exp(-8.0 * (th - 1.0) ** 2) + 0.5 * np.exp(-10.0 * (th - 2.2) ** 2),
    "polar_bump": lambda th: np.exp(-((th - 0.05) / 0.018) ** 2),
}


def load_manifest() -> dict:
    with resources.files("radmax").joinpath("data/corpus.json").open("r") as fh:
        return json.load(fh)


def corpus_names(geometry: str) -> list[str]:
    return [entry["name"] for entry in load_manifest()[geometry]]


def build_profile(geometry: str, name: str, d: int, n: int | None = None):
    """Instantiate a corpus profile on the standard grid for dimension d."""
    manifest = load_manifest()
    entry = next((e for e in manifest[geometry] if e["name"] == name), None)
    if entry is None:
        raise KeyError(f"no corpus profile {name!r} for geometry {geometry!r}")
    if n is None:
        n = entry.get("n", 384)
    if geometry == "rd":
        shape = _RADIAL_SHAPES[entry["shape"]]
        return RadialProfile.from_function(shape, d=d, nodes=radial_grid(n=n, r_max=entry.get("r_max", 8.0)))
    if geometry == "sphere":
        shape = _POLAR_SHAPES[entry["shape"]]
        nodes = theta_grid(entry.get("n_override", n))
        return PolarProfile.from_function(shape, d=d, nodes=nodes)
    raise ValueError(f"unknown geometry {geometry!r}")


def corpus_profiles(geometry: str, d: int, n: int | None = None):
    """All corpus profiles for one geometry and dimension, as (name, profile) pairs."""
    return [(name, build_profile(geometry, name, d, n)) for name in corpus_names(geometry)]
