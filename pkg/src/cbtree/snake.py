"""Head process of the one-dimensional Brownian snake.

Two engines produce a :class:`SnakeSample`:

* ``simulate_head`` runs the knot-stack scheme on a given lifetime grid using
  the grid minimum ``min(z_i, z_{i+1})`` as the branch height of each step.
* ``sample_snake(engine="exact")`` draws the lifetime and head jointly with
  the in-step infima of the lifetime inserted, so head values at grid times are
  exact, and then refines the minimum of the head down to ``tau_min``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import _engine as E
from .batch import RefineConfig
from .pathgen import ExcursionGrid, PathGrid, normalized_excursion
from .rng import RandomStream, as_generator

__all__ = [
    "SnakeSample",
    "IseHistogram",
    "MinResult",
    "simulate_head",
    "sample_snake",
    "min_and_argmin",
    "ise_histogram",
    "scale_snake",
]


@dataclass(frozen=True)
class SnakeSample:
    """Lifetime and head of one snake excursion on a common grid.

    ``w_min``/``s_star`` are the grid minimum of the head and its earliest
    time. When the sample comes from the exact engine, ``w_min_cont`` and
    ``s_star_cont`` hold the refined (continuum) minimum, and
    ``interval_min[i]`` is the infimum of the lifetime over grid step i.
    """

    zeta: ExcursionGrid
    head: PathGrid
    w_min: float = field(default=None)
    s_star: float = field(default=None)
    seed: Optional[tuple] = None
    w_min_cont: Optional[float] = None
    s_star_cont: Optional[float] = None
    interval_min: Optional[np.ndarray] = None
    interval_argmin: Optional[np.ndarray] = None
    min_converged: Optional[bool] = None

    def __post_init__(self):
        z, h = self.zeta, self.head
        if z.values.size != h.values.size or not math.isclose(z.dt, h.dt, rel_tol=1e-12):
            raise ValueError("zeta and head must share the grid")
        if h.values[0] != 0.0 or h.values[-1] != 0.0:
            raise ValueError("head must vanish at both endpoints")
        k = int(np.argmin(h.values))
        if self.w_min is None:
            object.__setattr__(self, "w_min", float(h.values[k]))
        if self.s_star is None:
            object.__setattr__(self, "s_star", h.t0 + k * h.dt)
        if self.w_min != h.values.min():
            raise ValueError("w_min must equal the grid minimum of head")

    @property
    def sigma(self) -> float:
        return self.zeta.duration()

    @property
    def dt(self) -> float:
        return self.zeta.dt

    @property
    def n(self) -> int:
        return self.zeta.n

    @property
    def star_index(self) -> int:
        return int(round((self.s_star - self.head.t0) / self.head.dt))


@dataclass(frozen=True)
class IseHistogram:
    bin_edges: np.ndarray
    masses: np.ndarray

    @property
    def total(self) -> float:
        return math.fsum(self.masses)


class MinResult(NamedTuple):
    w_min: float
    s_star: float
    gap: float  # distance between the two smallest strict local minima


def simulate_head(zeta: ExcursionGrid, dh: float | None = None, rng=None) -> SnakeSample:
    """Head process for a given lifetime using the knot stack at spacing ``dh``.

    Conditionally on ``zeta`` the output is Gaussian with covariance
    ``min(zeta[i..j])`` over grid indices, which approximates the continuum
    covariance (the infimum over the interval) from above.
    """
    if dh is None:
        dh = math.sqrt(zeta.dt)
    if not dh > 0:
        raise ValueError("dh must be positive")
    z = np.ascontiguousarray(zeta.values, dtype=float)
    size = z.size + 4 + int(np.ceil(z.max() / dh))
    kh = np.empty(size)
    kv = np.empty(size)
    g = as_generator(rng)
    head = E.head_knot_stack(g, z, float(dh), kh, kv)
    head[0] = 0.0
    head[-1] = 0.0
    return SnakeSample(zeta, PathGrid(zeta.t0, zeta.dt, head))


def sample_snake(n: int, rng=None, *, engine: str = "exact", dh: float | None = None,
                 refine: RefineConfig = RefineConfig(), refine_min: bool = True,
                 stop: float = -math.inf) -> SnakeSample:
    """Normalized snake excursion (duration 1) on a grid of ``n`` steps.

    ``engine="exact"`` uses the joint lifetime/head construction with exact
    in-step infima; ``engine="grid"`` draws a Vervaat excursion and runs
    :func:`simulate_head`. With a finite ``stop`` the refinement of the
    minimum ends as soon as it is known to lie below ``stop``; ``w_min_cont``
    is then only an upper bound and ``min_converged`` is False.
    """
    if isinstance(rng, RandomStream):
        seed = (rng.seed, rng.stream_id) + tuple(rng.path)
    else:
        seed = None
    g = as_generator(rng)
    if engine == "grid":
        s = simulate_head(normalized_excursion(n, g), dh, g)
        return SnakeSample(s.zeta, s.head, seed=seed)
    if engine != "exact":
        raise ValueError(f"unknown engine {engine!r}")
    if n < 4:
        raise ValueError("exact engine needs n >= 4")
    ws = E.make_workspace(n, refine.extra_nodes)
    stop = float(np.clip(stop, -1e300, 1e300))
    cnt, wmin, amin, _, _, status = E.single_snake(g, n, refine.K, refine.tau_min, refine_min,
                                                  False, stop, ws)
    t, z, lab = ws[0], ws[1], ws[2]
    zeta = z[: n + 1].copy()
    zeta[0] = zeta[n] = 0.0
    head = lab[: n + 1].copy()
    imin = np.zeros(n)
    iarg = np.zeros(n)
    imin[1 : n - 1] = z[n + 1 : 2 * n - 1]
    iarg[1 : n - 1] = t[n + 1 : 2 * n - 1]
    iarg[n - 1] = 1.0
    return SnakeSample(
        ExcursionGrid(0.0, 1.0 / n, zeta),
        PathGrid(0.0, 1.0 / n, head),
        seed=seed,
        w_min_cont=float(wmin) if refine_min else None,
        s_star_cont=float(t[amin]) if refine_min else None,
        interval_min=imin,
        interval_argmin=iarg,
        min_converged=bool(status == 1) if refine_min else None,
    )


def min_and_argmin(sample: SnakeSample) -> MinResult:
    """Grid minimum, earliest time attaining it and the local-minimum gap."""
    h = sample.head.values
    k = int(np.argmin(h))
    inner = h[1:-1]
    loc = (inner < h[:-2]) & (inner < h[2:])
    vals = np.sort(inner[loc])
    gap = float(vals[1] - vals[0]) if vals.size >= 2 else math.inf
    return MinResult(float(h[k]), sample.head.t0 + k * sample.head.dt, gap)


def ise_histogram(sample: SnakeSample, bin_edges) -> IseHistogram:
    """Occupation masses ``dt * #{i < n : head_i in bin}`` (last bin closed)."""
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin_edges must be strictly increasing with at least two entries")
    h = sample.head.values[:-1]
    bad = []
    if h.min() < edges[0]:
        bad.append(f"lower edge {edges[0]} above head minimum {h.min()}")
    if h.max() > edges[-1]:
        bad.append(f"upper edge {edges[-1]} below head maximum {h.max()}")
    if bad:
        raise ValueError("bin edges do not cover the head range: " + "; ".join(bad))
    counts, _ = np.histogram(h, bins=edges)
    return IseHistogram(edges, counts * sample.dt)


def scale_snake(sample: SnakeSample, lam: float) -> SnakeSample:
    """Scaling by ``lam``: time times lam, lifetime times lam^{1/2}, head times lam^{1/4}."""
    a, b = math.sqrt(lam), lam ** 0.25
    z = sample.zeta
    h = sample.head
    opt = lambda v, c: None if v is None else v * c
    return SnakeSample(
        ExcursionGrid(z.t0 * lam, z.dt * lam, z.values * a),
        PathGrid(h.t0 * lam, h.dt * lam, h.values * b),
        seed=sample.seed,
        w_min_cont=opt(sample.w_min_cont, b),
        s_star_cont=opt(sample.s_star_cont, lam),
        interval_min=opt(sample.interval_min, a),
        interval_argmin=opt(sample.interval_argmin, lam),
        min_converged=sample.min_converged,
    )
