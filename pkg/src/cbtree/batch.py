"""Chunked Monte Carlo batches over the numba engine.

A batch of ``n_mc`` samples is cut into fixed-size chunks; chunk ``c`` draws
from ``stream.child(c)``. Per-sample rows are concatenated in chunk order, so
the result does not depend on how many worker processes ran the chunks.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _engine as E
from .rng import RandomStream

__all__ = [
    "RefineConfig",
    "BASIC_COLUMNS",
    "COND_COLUMNS",
    "run_chunks",
    "basic_batch",
    "conditioned_batch",
]

BASIC_COLUMNS = (
    "grid_min", "w_min", "status", "height", "head_mid", "grid_max", "ise_0_02",
    "pos1", "pos2", "pos3", "max_u", "mid_u", "left0_u", "height_u", "left0",
    "ise_moment", "n_refine", "n_nodes", "grid_height", "s_min", "pos4",
)

COND_COLUMNS = (
    "w_min", "grid_min", "max", "height", "int_zeta", "head_mid", "ise_0_02",
    "window_tip", "floor_offset", "s_star", "status", "n_refine", "left0",
    "window_const", "grid_max",
)


@dataclass(frozen=True)
class RefineConfig:
    """Adaptive refinement of extrema.

    K : envelope multiplier on the piece scale
    tau_min : smallest piece duration that is still split
    extra_nodes : node budget per sample beyond the base grid
    """

    K: float = 3.5
    tau_min: float = 2.0 ** -40
    extra_nodes: int = 200_000


def _as_stream(rng) -> RandomStream:
    if isinstance(rng, RandomStream):
        return rng
    if rng is None:
        return RandomStream(0)
    return RandomStream(int(rng))


def run_chunks(fn, n_mc: int, stream, chunk: int = 2000, workers: int = 1, **kw) -> np.ndarray:
    """Evaluate ``fn(generator, m, **kw)`` over chunks and stack the rows."""
    stream = _as_stream(stream)
    n_mc = int(n_mc)
    sizes = [min(chunk, n_mc - i) for i in range(0, n_mc, chunk)]
    jobs = [(fn, stream.child(c), m, kw) for c, m in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_job, jobs))
    else:
        parts = [_run_job(j) for j in jobs]
    return np.concatenate(parts, axis=0) if parts else np.empty((0, 0))


def _run_job(job):
    fn, stream, m, kw = job
    return fn(stream.generator(), m, **kw)


def _basic_chunk(g, m, n, K, tau_min, extra, stop, stop_h, height_mode):
    ws = E.make_workspace(n, extra)
    out = np.empty((m, E.N_BASIC))
    E.batch_basic(g, n, m, K, tau_min, stop, stop_h, height_mode, ws, out)
    return out


def _cond_chunk(g, m, n, K, tau_min, extra, delta, M, level):
    ws = E.make_workspace(n, extra)
    out = np.empty((m, E.N_COND))
    E.batch_conditioned(g, n, m, K, tau_min, delta, M, level, ws, out)
    return out


def _columns(arr, names):
    return {k: arr[:, i] for i, k in enumerate(names)}


def basic_batch(n_mc, n, rng=None, *, refine=RefineConfig(), stop=-math.inf, stop_h=0.0,
                height_mode=0, chunk=2000, workers=1) -> dict:
    """Per-sample statistics of unconditioned normalized snakes.

    ``stop`` ends min refinement early once the minimum is certainly below it
    (``stop=inf`` skips refinement). Returns a dict of columns, see
    :data:`BASIC_COLUMNS`.
    """
    stop = float(np.clip(stop, -1e300, 1e300))
    arr = run_chunks(_basic_chunk, n_mc, rng, chunk, workers, n=int(n), K=refine.K,
                     tau_min=refine.tau_min, extra=refine.extra_nodes, stop=stop,
                     stop_h=float(stop_h), height_mode=int(height_mode))
    return _columns(arr, BASIC_COLUMNS)


def conditioned_batch(n_mc, n, rng=None, *, refine=RefineConfig(), delta=0.5, M=1.5,
                      level=1.0, chunk=1000, workers=1) -> dict:
    """Statistics of snakes re-rooted at their minimum, see :data:`COND_COLUMNS`."""
    arr = run_chunks(_cond_chunk, n_mc, rng, chunk, workers, n=int(n), K=refine.K,
                     tau_min=refine.tau_min, extra=refine.extra_nodes, delta=float(delta),
                     M=float(M), level=float(level))
    return _columns(arr, COND_COLUMNS)
