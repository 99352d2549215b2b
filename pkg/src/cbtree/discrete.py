"""Uniform plane trees with uniform {-1, 0, 1} label increments.

Trees come from the cycle lemma: a uniform arrangement of n up-steps and
n + 1 down-steps has exactly one cyclic rotation whose partial sums stay
nonnegative until the final step; dropping that step leaves a uniform Dyck
path. Contour heights of a Dyck path of length 2n scale like ``sqrt(2n)``
times a normalized excursion and labels like ``sqrt(2/3) (2n)^{1/4}`` times the
head process.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numba as nb
import numpy as np

from .batch import RefineConfig, basic_batch, conditioned_batch
from .report import FAIL, PASS, EstimateReport
from .rng import RandomStream, as_generator

__all__ = [
    "PlaneTree",
    "DiscreteSnake",
    "sample_plane_tree",
    "sample_discrete_snake",
    "label_scale",
    "discrete_stats",
    "fit_label_scale",
    "compare_scaling_limit",
]


@dataclass(frozen=True)
class PlaneTree:
    """Plane tree encoded by its Dyck path (+1 up, -1 down)."""

    dyck: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dyck, dtype=np.int8)
        object.__setattr__(self, "dyck", d)
        s = np.cumsum(d)
        if d.size % 2 or np.any((d != 1) & (d != -1)):
            raise ValueError("Dyck path must be an even-length +-1 sequence")
        if d.size and (s.min() < 0 or s[-1] != 0):
            raise ValueError("Dyck path partial sums must be nonnegative and end at 0")

    @property
    def n(self) -> int:
        return self.dyck.size // 2

    def contour(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.dyck)])

    def parents(self) -> np.ndarray:
        """Parent of each vertex in depth-first order (root has -1)."""
        par = np.full(self.n + 1, -1, dtype=np.int64)
        stack = [0]
        nxt = 1
        for step in self.dyck:
            if step == 1:
                par[nxt] = stack[-1]
                stack.append(nxt)
                nxt += 1
            else:
                stack.pop()
        return par

    def contour_vertices(self) -> np.ndarray:
        """Vertex visited at each of the ``2n + 1`` contour times."""
        out = np.empty(2 * self.n + 1, dtype=np.int64)
        stack = [0]
        nxt = 1
        out[0] = 0
        for i, step in enumerate(self.dyck):
            if step == 1:
                stack.append(nxt)
                nxt += 1
            else:
                stack.pop()
            out[i + 1] = stack[-1]
        return out


@dataclass(frozen=True)
class DiscreteSnake:
    tree: PlaneTree
    labels: np.ndarray  # per vertex, depth-first order

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", lab)
        if lab.size != self.tree.n + 1 or lab[0] != 0:
            raise ValueError("labels must cover every vertex with root label 0")
        par = self.tree.parents()
        if lab.size > 1 and np.any(np.abs(lab[1:] - lab[par[1:]]) > 1):
            raise ValueError("labels must change by at most 1 along edges")

    def contour_labels(self) -> np.ndarray:
        return self.labels[self.tree.contour_vertices()]


def _cycle_lemma(steps):
    s = np.cumsum(steps)
    k = int(np.argmin(s))
    rot = np.roll(steps, -(k + 1))
    return rot[:-1]


def sample_plane_tree(n_edges: int, rng=None) -> PlaneTree:
    """Uniform plane tree with ``n_edges`` edges."""
    if n_edges < 1:
        raise ValueError("n_edges must be >= 1")
    g = as_generator(rng)
    steps = np.array([1] * n_edges + [-1] * (n_edges + 1), dtype=np.int8)
    g.shuffle(steps)
    return PlaneTree(_cycle_lemma(steps))


def sample_discrete_snake(n_edges: int, rng=None) -> DiscreteSnake:
    g = as_generator(rng)
    t = sample_plane_tree(n_edges, g)
    par = t.parents()
    inc = g.integers(-1, 2, size=t.n + 1)
    lab = np.zeros(t.n + 1, dtype=np.int64)
    for v in range(1, t.n + 1):  # parents precede children in depth-first order
        lab[v] = lab[par[v]] + inc[v]
    return DiscreteSnake(t, lab)


def label_scale(n_edges: int) -> float:
    """Theoretical label scale ``sqrt(2/3) (2n)^{1/4}``."""
    return math.sqrt(2.0 / 3.0) * (2.0 * n_edges) ** 0.25


N_DSTATS = 7


@nb.njit(cache=True, nogil=True)
def _discrete_kernel(rng, n, m, positive, scale, out):
    """Statistics of m discrete snakes, optionally conditioned on labels >= 0.

    Columns: 0 max label / scale, 1 label at contour time n / scale,
    2 occupation of [0, 0.2] in rescaled labels (fraction of contour times,
    each integer label spread over its unit cell),
    3 fraction of contour times with negative label, 4 trials used,
    5 contour height at time n / sqrt(2n), 6 label variance proxy (raw mid label).
    """
    L = 2 * n + 1
    steps = np.empty(L, np.int64)
    rot = np.empty(L, np.int64)
    lab = np.empty(L, np.int64)
    stack = np.empty(n + 2, np.int64)
    for s in range(m):
        trials = 0
        while True:
            trials += 1
            for i in range(L):
                steps[i] = 1 if i < n else -1
            for i in range(L - 1, 0, -1):
                j = int(rng.random() * (i + 1))
                steps[i], steps[j] = steps[j], steps[i]
            run = 0
            best = 1
            k = 0
            for i in range(L):
                run += steps[i]
                if run < best:
                    best = run
                    k = i
            for i in range(L):
                rot[i] = steps[(k + 1 + i) % L]
            # labels along the contour of the Dyck path rot[0 : 2n]
            top = 0
            stack[0] = 0
            lab[0] = 0
            lmin = 0
            h = 0
            hmid = 0
            for i in range(2 * n):
                if rot[i] == 1:
                    v = stack[top] + int(rng.random() * 3.0) - 1
                    top += 1
                    stack[top] = v
                    h += 1
                else:
                    top -= 1
                    h -= 1
                lab[i + 1] = stack[top]
                if stack[top] < lmin:
                    lmin = stack[top]
                if i + 1 == n:
                    hmid = h
            if not positive or lmin >= 0:
                break
        lmax = 0
        occ = 0.0
        neg = 0
        for i in range(2 * n):
            if lab[i] > lmax:
                lmax = lab[i]
            # lattice correction: label k stands for the cell [k - 1/2, k + 1/2]
            lo = max((lab[i] - 0.5) / scale, 0.0)
            hi = min((lab[i] + 0.5) / scale, 0.2)
            if hi > lo:
                occ += (hi - lo) * scale
            if lab[i] < 0:
                neg += 1
        out[s, 0] = lmax / scale
        out[s, 1] = lab[n] / scale
        out[s, 2] = occ / (2.0 * n)
        out[s, 3] = neg / (2.0 * n)
        out[s, 4] = trials
        out[s, 5] = hmid / math.sqrt(2.0 * n)
        out[s, 6] = lab[n]


DSTAT_COLUMNS = ("max", "head_mid", "ise_0_02", "left0", "trials", "height_mid", "raw_mid")


def discrete_stats(n_edges: int, m: int, rng=None, *, positive: bool = False, scale: float | None = None) -> dict:
    """Per-sample statistics of ``m`` discrete snakes (see the kernel columns)."""
    g = as_generator(rng)
    sc = label_scale(n_edges) if scale is None else scale
    out = np.empty((int(m), N_DSTATS))
    _discrete_kernel(g, int(n_edges), int(m), bool(positive), float(sc), out)
    return {k: out[:, i] for i, k in enumerate(DSTAT_COLUMNS)}


def fit_label_scale(n_edges: int, m: int, rng=None) -> tuple:
    """Fit the label scale by matching ``Var(label at contour mid-time)`` to
    ``Var(head at 1/2) = E[e_{1/2}] = sqrt(2/pi)``. Returns ``(fitted, theory)``."""
    raw = discrete_stats(n_edges, m, rng, scale=1.0)["raw_mid"]
    fitted = math.sqrt(np.var(raw) / math.sqrt(2.0 / math.pi))
    return fitted, label_scale(n_edges)


def compare_scaling_limit(n_edges_list=(50, 200), n_samples: int = 2000, rng=None, *, n_cont: int = 256,
                          n_ref: int = 20_000, n_uncond: int = 500, n_boot: int = 200, reference=None,
                          refine: RefineConfig = RefineConfig(), fit_samples: int = 20_000) -> EstimateReport:
    """Rescaled positive discrete snakes against the snake re-rooted at its minimum.

    The label scale is fitted per size by second-moment matching on
    unconditioned trees; the max label is then compared out of sample. KS
    distances for max, mid-time label and occupation of ``[0, 0.2]`` are
    reported for each size; pass requires the max distance at the largest
    size not to exceed the smallest size's distance by more than 2 combined
    bootstrap SE, and the unconditioned mean occupation of ``[0, 0.2]`` at
    ``n_uncond`` edges to match the continuum within 10%.
    """
    from .verify import ks_bootstrap

    t0 = time.perf_counter()
    st = rng if isinstance(rng, RandomStream) else RandomStream(0 if rng is None else int(rng))
    if reference is None:
        reference = conditioned_batch(n_ref, n_cont, st.child(0), refine=refine)
    ref = {"max": reference["max"], "head_mid": reference["head_mid"], "ise_0_02": reference["ise_0_02"]}
    ks, ks_se, acc, scales = {}, {}, {}, {}
    for i, ne in enumerate(n_edges_list):
        fitted, theory = fit_label_scale(ne, fit_samples, st.child(10 + i).generator())
        scales[ne] = (fitted, theory)
        d = discrete_stats(ne, n_samples, st.child(20 + i).generator(), positive=True, scale=fitted)
        acc[ne] = float(1.0 / d["trials"].mean())
        for k in ref:
            val, se = ks_bootstrap(d[k], ref[k], n_boot, rng=100 * i + len(k))
            ks.setdefault(k, []).append(val)
            ks_se.setdefault(k, []).append(se)
    m = ks["max"]
    s = ks_se["max"]
    trend_ok = m[-1] <= m[0] + 2 * math.hypot(s[0], s[-1])
    # unconditioned sanity: mean occupation of [0, 0.2]
    fitted, _ = fit_label_scale(n_uncond, fit_samples, st.child(30).generator())
    du = discrete_stats(n_uncond, n_samples, st.child(31).generator(), scale=fitted)
    cu = basic_batch(n_samples, n_cont, st.child(32), stop=math.inf)
    a, b = float(du["ise_0_02"].mean()), float(cu["ise_0_02"].mean())
    uncond_ok = abs(a - b) <= 0.10 * b
    return EstimateReport(
        "discrete_compare", "scaling limit of positive labelled plane trees",
        float(m[-1]), float(s[-1]), int(n_samples), None, PASS if (trend_ok and uncond_ok) else FAIL,
        time.perf_counter() - t0, "KS(max) not increasing beyond 2 SE; unconditioned occupation within 10%",
        {"n_edges": list(n_edges_list), "ks": ks, "ks_se": ks_se, "acceptance": acc,
         "acceptance_exact": {ne: 2.0 / (ne + 2) for ne in n_edges_list},
         "scales": {ne: list(v) for ne, v in scales.items()},
         "uncond_occupation": {"discrete": a, "continuum": b},
         "uncond_max": {"discrete": float(du["max"].mean()), "continuum": float(cu["grid_max"].mean())}}, st.seed)
