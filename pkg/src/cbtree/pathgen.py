"""Exact-at-grid generators for the driving processes.

All paths live on uniform grids. Brownian bridges and Bessel processes of
integer dimension are sampled exactly at the grid points; the normalized
excursion comes from the Vervaat transform of a bridge or, with
``method="bessel"``, from the norm of a three-dimensional bridge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import as_generator

__all__ = [
    "PathGrid",
    "ExcursionGrid",
    "brownian_bridge",
    "brownian_motion",
    "normalized_excursion",
    "bessel_exact",
    "bessel3_bridge_excursion",
    "excursion_height_h",
    "sample_sigma_tail",
    "sigma_tail_mass",
    "scale_excursion",
]


@dataclass(frozen=True)
class PathGrid:
    """Real path sampled at ``t0 + i * dt`` for ``i = 0..n``."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not (self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if v.ndim != 1 or v.size == 0:
            raise ValueError("values must be a nonempty 1-d array")

    @property
    def n(self) -> int:
        return self.values.size - 1

    def duration(self) -> float:
        return (self.values.size - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)


@dataclass(frozen=True)
class ExcursionGrid(PathGrid):
    """A :class:`PathGrid` that is zero at both ends and positive inside."""

    def __post_init__(self):
        super().__post_init__()
        v = self.values
        if v.size < 2:
            raise ValueError("an excursion needs at least two grid points")
        if v[0] != 0.0 or v[-1] != 0.0:
            raise ValueError("excursion must vanish at both endpoints")
        if np.any(v[1:-1] <= 0.0):
            raise ValueError("excursion must be positive at interior grid points")


def _check_n(n, lo=1):
    if int(n) != n or n < lo:
        raise ValueError(f"grid size must be an integer >= {lo}, got {n}")
    return int(n)


def brownian_motion(n: int, T: float, rng=None, x0: float = 0.0, dim: int = 1) -> np.ndarray:
    """Brownian motion at ``n + 1`` grid points; shape (n+1,) or (n+1, dim)."""
    n = _check_n(n)
    g = as_generator(rng)
    inc = g.standard_normal((n, dim)) * math.sqrt(T / n)
    w = np.vstack([np.zeros((1, dim)), np.cumsum(inc, axis=0)])
    w[:, 0] += x0
    return w[:, 0] if dim == 1 else w


def brownian_bridge(n: int, T: float = 1.0, a: float = 0.0, b: float = 0.0, rng=None) -> PathGrid:
    """Brownian bridge from ``a`` to ``b`` on ``[0, T]`` with exact grid law.

    Built as ``W_t - (t/T) W_T`` plus the linear interpolant, which has the
    same joint law at the grid points as sequential conditional sampling.
    """
    n = _check_n(n)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    g = as_generator(rng)
    w = brownian_motion(n, T, g)
    s = np.linspace(0.0, 1.0, n + 1)
    v = a + (b - a) * s + (w - s * w[-1])
    v[0] = a
    v[-1] = b
    return PathGrid(0.0, T / n, v)


def normalized_excursion(n: int, rng=None, method: str = "vervaat") -> ExcursionGrid:
    """Normalized Brownian excursion of duration 1 on a grid of ``n`` steps.

    ``method="vervaat"`` cyclically shifts a standard bridge so that its
    earliest argmin sits at time 0 and subtracts the minimum.
    ``method="bessel"`` takes the norm of a 3-d Brownian bridge; it is exact at
    every grid time and is what the snake engine uses.
    """
    n = _check_n(n, 2)
    g = as_generator(rng)
    if method == "vervaat":
        while True:
            b = brownian_bridge(n, 1.0, 0.0, 0.0, g).values[:-1]
            k = int(np.argmin(b))
            e = np.roll(b, -k) - b[k]
            e = np.append(e, 0.0)
            if np.all(e[1:-1] > 0.0):
                return ExcursionGrid(0.0, 1.0 / n, e)
    if method == "bessel":
        return bessel3_bridge_excursion(n, 1.0, g)
    raise ValueError(f"unknown method {method!r}")


def bessel3_bridge_excursion(n: int, T: float = 1.0, rng=None) -> ExcursionGrid:
    """Excursion of duration T as the norm of a 3-d bridge from 0 to 0."""
    n = _check_n(n, 2)
    g = as_generator(rng)
    w = brownian_motion(n, T, g, dim=3)
    s = np.linspace(0.0, 1.0, n + 1)[:, None]
    e = np.sqrt(np.sum((w - s * w[-1]) ** 2, axis=1))
    e[0] = 0.0
    e[-1] = 0.0
    return ExcursionGrid(0.0, T / n, e)


def bessel_exact(dim: int, x0: float, n: int, T: float, rng=None) -> PathGrid:
    """Bessel process of integer dimension as the norm of a ``dim``-d Brownian motion."""
    if isinstance(dim, bool) or int(dim) != dim:
        raise NotImplementedError(f"only integer dimensions are exact, got {dim}")
    dim = int(dim)
    if not 1 <= dim <= 16:
        raise NotImplementedError(f"dimension must lie in 1..16, got {dim}")
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    if not T > 0:
        raise ValueError("T must be positive")
    n = _check_n(n)
    w = brownian_motion(n, T, as_generator(rng), x0=x0, dim=dim)
    r = np.sqrt(np.sum(w * w, axis=1)) if dim > 1 else np.abs(np.asarray(w).ravel())
    return PathGrid(0.0, T / n, r)


def _bes3_until(h, dt, g, chunk=4096):
    """Grid Bessel(3) path from 0 up to its first grid value >= h (clamped to h)."""
    sd = math.sqrt(dt)
    pos = np.zeros(3)
    out = [np.zeros(1)]
    while True:
        w = pos + np.cumsum(g.standard_normal((chunk, 3)) * sd, axis=0)
        r = np.sqrt(np.sum(w * w, axis=1))
        hit = np.flatnonzero(r >= h)
        if hit.size:
            k = hit[0]
            seg = r[: k + 1].copy()
            seg[k] = h
            out.append(seg)
            return np.concatenate(out)
        out.append(r)
        pos = w[-1]


def excursion_height_h(h: float, n: int, rng=None) -> ExcursionGrid:
    """Excursion of height ``h``: two Bessel(3) paths glued at their passage of h.

    Both halves use the common step ``dt = (2 h^2 / 3) / n``, so ``n`` is the
    expected number of steps. The total duration is random and the grid is
    kept as simulated; the junction value is clamped to ``h``.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    n = _check_n(n, 4)
    g = as_generator(rng)
    dt = (2.0 * h * h / 3.0) / n
    while True:
        up = _bes3_until(h, dt, g)
        down = _bes3_until(h, dt, g)
        v = np.concatenate([up, down[-2::-1]])
        if v.size >= 3 and np.all(v[1:-1] > 0.0):
            return ExcursionGrid(0.0, dt, v)


def sigma_tail_mass(s_min: float) -> float:
    """Mass of the duration measure above ``s_min``: (2 pi s_min)^{-1/2}."""
    if not s_min > 0:
        raise ValueError("s_min must be positive")
    return 1.0 / math.sqrt(2.0 * math.pi * s_min)


def sample_sigma_tail(s_min: float, rng=None, size=None):
    """Durations with density proportional to s^{-3/2} on [s_min, inf).

    Returns ``(draws, mass)`` where ``mass`` is the total weight of the
    restricted measure, so that ``mass * mean(f(draws))`` estimates the
    integral of f against it.
    """
    mass = sigma_tail_mass(s_min)
    g = as_generator(rng)
    u = 1.0 - g.random(size)  # in (0, 1]
    return s_min / u ** 2, mass


def scale_excursion(e: PathGrid, lam: float) -> PathGrid:
    """Brownian scaling: time by ``lam`` and values by ``sqrt(lam)``."""
    cls = type(e)
    return cls(e.t0 * lam, e.dt * lam, e.values * math.sqrt(lam))
