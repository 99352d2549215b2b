"""Simulation of the one-dimensional Brownian snake driven by a normalized
excursion, its re-rooting at the minimum, and checks of the resulting
small-barrier asymptotics."""
from __future__ import annotations

from .batch import RefineConfig, basic_batch, conditioned_batch
from .pathgen import ExcursionGrid, PathGrid, brownian_bridge, normalized_excursion
from .report import EstimateReport
from .reroot import RerootedSample, exact_conditioned_sample, reroot_head, reroot_lifetimes
from .rng import RandomStream
from .snake import SnakeSample, min_and_argmin, sample_snake, simulate_head

__all__ = [
    "RefineConfig",
    "basic_batch",
    "conditioned_batch",
    "ExcursionGrid",
    "PathGrid",
    "brownian_bridge",
    "normalized_excursion",
    "EstimateReport",
    "RerootedSample",
    "exact_conditioned_sample",
    "reroot_head",
    "reroot_lifetimes",
    "RandomStream",
    "SnakeSample",
    "min_and_argmin",
    "sample_snake",
    "simulate_head",
]

__version__ = "0.1.0"
