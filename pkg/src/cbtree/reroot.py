"""Re-rooting of the coding functions and path reconstruction from the tour.

For a grid time ``s`` and ``r`` in ``[0, sigma]`` with ``s + r`` taken modulo
sigma, the re-rooted lifetime is

    zeta_s + zeta_{s+r} - 2 inf{zeta_u : u between s and s+r}

and the re-rooted head is ``head_{s+r} - head_s``. All index arithmetic is on
integers; interval infima come from a sparse table.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .batch import RefineConfig
from .pathgen import ExcursionGrid, PathGrid
from .snake import SnakeSample, sample_snake

__all__ = [
    "SparseTableMin",
    "RerootedSample",
    "grid_index",
    "reroot_lifetimes",
    "reroot_head",
    "reconstruct_path",
    "exact_conditioned_sample",
]


class SparseTableMin:
    """O(1) range-minimum queries after an O(n log n) build."""

    def __init__(self, values):
        v = np.asarray(values, dtype=float)
        levels = [v]
        k = 1
        while 2 * k <= v.size:
            prev = levels[-1]
            levels.append(np.minimum(prev[:-k], prev[k:]))
            k *= 2
        self._levels = levels
        self.size = v.size

    def query(self, i, j):
        """Minimum over ``values[i..j]`` inclusive; vectorized over arrays."""
        i = np.asarray(i)
        j = np.asarray(j)
        lo = np.minimum(i, j)
        hi = np.maximum(i, j)
        length = hi - lo + 1
        lev = np.floor(np.log2(length)).astype(int)
        out = np.empty(np.broadcast(lo, hi).shape)
        for L in np.unique(lev):
            m = lev == L
            a = self._levels[L]
            out[m] = np.minimum(a[lo[m]], a[hi[m] - (1 << L) + 1])
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class RerootedSample(SnakeSample):
    """A snake re-rooted at ``origin_s`` of its source sample.

    ``floor_offset`` is the head value at the re-rooting point minus the
    continuum minimum of the source when that is known, so that
    ``head - floor_offset`` is the head shifted by the true minimum.
    """

    origin_s: float = 0.0
    floor_offset: Optional[float] = None


def grid_index(grid: PathGrid, s: float):
    """Index of grid time ``s``; returns ``(index, snapped)``."""
    x = (s - grid.t0) / grid.dt
    k = int(round(x))
    snapped = not math.isclose(x, k, rel_tol=0.0, abs_tol=1e-9)
    if snapped:
        warnings.warn(f"time {s} is not on the grid; snapped to index {k}", stacklevel=3)
    return k % grid.n, snapped


def _shifted_indices(n, k):
    return (k + np.arange(n + 1)) % n


def reroot_lifetimes(zeta: ExcursionGrid, s: float, interval_min=None) -> ExcursionGrid:
    """Lifetime of the tree re-rooted at grid time ``s``.

    With ``interval_min`` (infimum of the lifetime over each grid step) the
    interval infima include what happens between grid points; otherwise only
    grid values are used.
    """
    n = zeta.n
    k, _ = grid_index(zeta, s)
    z = zeta.values
    idx = _shifted_indices(n, k)
    if interval_min is None:
        rmq = SparseTableMin(z)
        m = rmq.query(np.full(n + 1, k), idx)
    else:
        im = np.asarray(interval_min, dtype=float)
        rmq = SparseTableMin(im)
        lo = np.minimum(idx, k)
        hi = np.maximum(idx, k)
        m = np.minimum(z[lo], z[hi])
        inner = hi > lo
        m[inner] = np.minimum(m[inner], rmq.query(lo[inner], hi[inner] - 1))
    v = z[k] + z[idx] - 2.0 * m
    v[0] = 0.0
    v[-1] = 0.0
    v = np.maximum(v, 0.0)
    return ExcursionGrid(0.0, zeta.dt, v)


def reroot_head(sample: SnakeSample, s: float) -> RerootedSample:
    """Re-root lifetime and head at grid time ``s``."""
    n = sample.n
    k, _ = grid_index(sample.head, s)
    idx = _shifted_indices(n, k)
    h = sample.head.values
    head = h[idx] - h[k]
    head[0] = 0.0
    head[-1] = 0.0
    zeta = reroot_lifetimes(sample.zeta, sample.zeta.t0 + k * sample.dt, sample.interval_min)
    off = None
    if sample.w_min_cont is not None:
        off = float(h[k] - sample.w_min_cont)
    return RerootedSample(
        zeta,
        PathGrid(0.0, sample.dt, head),
        seed=sample.seed,
        w_min_cont=None if off is None else -off,
        origin_s=sample.head.t0 + k * sample.dt,
        floor_offset=off,
    )


def reconstruct_path(sample: SnakeSample, r: float, dh: float | None = None):
    """Spatial path of the snake at grid time ``r`` read off the tour.

    For each height ``t`` on the ``dh`` grid below ``zeta_r`` (plus ``zeta_r``
    itself) the value is the head at the last time ``u <= r`` where the
    linearly interpolated lifetime equals ``t``. Returns ``(heights, values)``.
    """
    if dh is None:
        dh = math.sqrt(sample.dt)
    z = sample.zeta.values
    h = sample.head.values
    k = int(round((r - sample.head.t0) / sample.dt))
    if not 0 <= k <= sample.n:
        raise ValueError("r outside the sample")
    top = z[k]
    heights = np.arange(0.0, top, dh)
    heights = np.append(heights, top) if (heights.size == 0 or heights[-1] < top) else heights
    # backward running minimum from k: last index i <= k with z_i <= t
    back = np.minimum.accumulate(z[k::-1])
    vals = np.empty(heights.size)
    for q, t in enumerate(heights):
        j = int(np.searchsorted(-back, -t, side="left"))  # first position with back <= t
        i = k - j
        if i >= k or z[i] >= t:
            vals[q] = h[i]
            continue
        f = (t - z[i]) / (z[i + 1] - z[i])
        vals[q] = h[i] + f * (h[i + 1] - h[i])
    return heights, vals


def exact_conditioned_sample(n: int, dh: float | None = None, rng=None, *,
                             refine: RefineConfig = RefineConfig()) -> RerootedSample:
    """Snake re-rooted at the minimum of its head.

    The source comes from the exact engine; re-rooting is done at the grid
    argmin, so the returned head has grid minimum 0, and ``floor_offset``
    records how far the grid argmin sits above the continuum minimum.
    ``dh`` is accepted for interface symmetry and unused by the exact engine.
    """
    s = sample_snake(n, rng, engine="exact", refine=refine, refine_min=True)
    return reroot_head(s, s.s_star)
