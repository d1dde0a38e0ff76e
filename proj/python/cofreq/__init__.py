"""Python access to the cofreq core."""

import json

import numpy as np

from ._core import (
    AmbientConfig,
    D_beta,
    Field,
    FlatteningMap,
    GraphDomain,
    HomogeneousSolution,
    SolutionMix,
    annulus_coefficients,
    c_beta,
    c_beta_quadrature,
    closed_form_frequency,
    distance_solution,
    gallery,
    gallery_names,
    geometric_radii,
    pde_residual,
    pure_mode,
    random_mix,
    random_solution,
)
from . import _core

__all__ = [
    "AmbientConfig", "D_beta", "Field", "FlatteningMap", "GraphDomain", "HomogeneousSolution", "SolutionMix",
    "annulus_coefficients", "c_beta", "c_beta_quadrature", "closed_form_frequency", "distance_solution", "gallery",
    "gallery_names", "geometric_radii", "pde_residual", "pure_mode", "random_mix", "random_solution",
    "frequency_profile", "sample_singular_set", "minkowski_content", "run_criterion",
]


def _origin(cfg, center):
    return np.zeros(cfg.n) if center is None else np.asarray(center, dtype=float)


def frequency_profile(u, radii, cfg, center=None, route="auto"):
    """H, D and N at each radius, as a dict of lists."""
    return json.loads(_core._frequency_profile(u, _origin(cfg, center), list(radii), cfg, route))


def sample_singular_set(u, r0, pitch, cfg, center=None):
    """(off-boundary points, boundary points, summary dict); points are rows."""
    pts, bdry, summary = _core._sample_singular_set(u, _origin(cfg, center), r0, pitch, cfg)
    return pts, bdry, json.loads(summary)


def minkowski_content(points, pitch, s, r0, cfg, center=None, seed=7):
    pts = np.asarray(points, dtype=float).reshape(-1, cfg.n)
    return json.loads(_core._minkowski_content(pts, pitch, list(s), _origin(cfg, center), r0, cfg, seed))


def run_criterion(k, seed=1):
    """One acceptance criterion, 1 to 10, as a dict."""
    return json.loads(_core._run_criterion(k, seed))
