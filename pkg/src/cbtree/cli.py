"""Command-line experiment runner.

``python -m cbtree list`` prints the catalog; ``python -m cbtree run NAME``
(or ``--experiment NAME``) runs one experiment, or ``all``. Reports go out as
JSON lines, one per check, each carrying the seed and the hash of the fully
resolved configuration. Extra ``--key value`` pairs and ``key=value`` lines of
a ``--config`` file override experiment parameters.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .report import EstimateReport, config_hash
from .rng import RandomStream

__all__ = ["ExperimentConfig", "Experiment", "CATALOG", "resolve_config", "run", "list_experiments", "main"]


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    n_mc: int | None = None
    grid_n: int | None = None
    dh: float | None = None
    eps: tuple | None = None
    workers: int = 1
    out: str | None = None
    params: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Defaults of the experiment overlaid with every explicit setting."""
        exp = CATALOG[self.experiment]
        cfg = dict(exp.defaults)
        for k in ("n_mc", "grid_n", "dh", "eps"):
            v = getattr(self, k)
            if v is not None:
                cfg[k] = v
        cfg.update(self.params)
        cfg["experiment"] = self.experiment
        cfg["seed"] = self.seed
        return cfg


@dataclass(frozen=True)
class Experiment:
    name: str
    op: str
    anchor: str
    defaults: dict
    fn: object


def _int(x):
    return int(float(x))


def _floats(x):
    if isinstance(x, (list, tuple)):
        return tuple(float(v) for v in x)
    return tuple(float(v) for v in str(x).replace(";", ",").split(",") if v.strip())


def _coerce(value: str):
    """Parse a config value: int, float, comma list or string."""
    s = str(value).strip()
    if "," in s:
        return _floats(s)
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    if s.lower() in ("none", "null"):
        return None
    return s


# ---------------------------------------------------------------------------
# experiments: each takes (cfg, stream, workers) and yields reports
# ---------------------------------------------------------------------------

def _g0(cfg, st, workers):
    from .verify import check_g0
    yield check_g0()


def _positivity(cfg, st, workers):
    from .batch import basic_batch
    from .verify import check_uniform_positivity
    ps = cfg["p"] if isinstance(cfg["p"], tuple) else (cfg["p"],)
    b = basic_batch(_int(cfg["n_mc"]), _int(cfg["grid_n"]), st, stop=math.inf, workers=workers)
    for p in ps:
        yield check_uniform_positivity(int(p), _int(cfg["n_mc"]), _int(cfg["grid_n"]), rng=st, batch=b)


def _depth(cfg, st, workers):
    from .batch import basic_batch
    return -basic_batch(_int(cfg["n_mc"]), _int(cfg["grid_n"]), st, workers=workers)["w_min"]


def _hitting(cfg, st, workers):
    from .verify import check_hitting_constant
    d = _depth(cfg, st, workers)
    for x in _floats(cfg["x"]):
        yield check_hitting_constant(x, st, depth=d)


def _laplace(cfg, st, workers):
    from .verify import check_laplace_coth, check_laplace_small_lambda
    d = _depth(cfg, st, workers)
    pts = _floats(cfg["x_lam"])
    for x, lam in zip(pts[::2], pts[1::2]):
        yield check_laplace_coth(x, lam, st, depth=d)
    for x in _floats(cfg["x_small"]):
        yield check_laplace_small_lambda(x)


def _girsanov(cfg, st, workers):
    from .verify import check_bessel_girsanov
    for i, trip in enumerate(str(cfg["triples"]).split(";")):
        x, t, fn = trip.split(":")
        yield check_bessel_girsanov(float(x), float(t), fn, _int(cfg["n_mc"]), st.child(i),
                                    n_steps=_int(cfg["n_steps"]), workers=workers)


def _theorem1(cfg, st, workers):
    from .verify import check_theorem1_constant
    nf = cfg.get("n_fine")
    yield check_theorem1_constant(_floats(cfg["eps"]), _int(cfg["n_mc"]), _int(cfg["grid_n"]), rng=st,
                                  n_fine=None if nf is None else _int(nf), n_mc_fine=_int(cfg["n_mc_fine"]),
                                  workers=workers)


def _verwaat(cfg, st, workers):
    from .verify import check_verwaat_equivalence
    yield check_verwaat_equivalence(_floats(cfg["eps"]), _int(cfg["n_mc"]), st, n=_int(cfg["grid_n"]),
                                    n_cond=_int(cfg["n_cond"]), workers=workers)


def _reroot(cfg, st, workers):
    from .verify import check_reroot_invariance
    yield check_reroot_invariance(_int(cfg["n_mc"]), _int(cfg["grid_n"]), st, workers=workers)


def _tables(cfg, st, workers, cache_dir=None):
    """f and G tables, reused from ``cache_dir`` only when the hash matches."""
    from .conditional import FTable, GTable, build_f_table, build_G_table
    spec = {"eps_grid": _floats(cfg["f_eps"]), "n_mc": _int(cfg["f_n_mc"]), "n": _int(cfg["f_grid_n"]),
            "seed": st.seed, "path": st.path}
    h = config_hash(spec)
    if cache_dir:
        fp, gp = Path(cache_dir) / f"f_{h}.csv", Path(cache_dir) / f"G_{h}.csv"
        if fp.exists() and gp.exists():
            return FTable.from_csv(fp, expect_hash=h), GTable.from_csv(gp, expect_hash=h)
    f = build_f_table(spec["eps_grid"], spec["n_mc"], spec["n"], rng=st, workers=workers)
    f = type(f)(f.eps_grid, f.f_values, f.se, f.n_mc, {**f.meta, "config_hash": h})
    G = build_G_table(f)
    G = GTable(G.x_grid, G.G_values, {**G.meta, "config_hash": h})
    if cache_dir:
        f.to_csv(fp)
        G.to_csv(gp)
    return f, G


def _spine(cfg, st, workers):
    from .verify import check_spine_h
    _, G = _tables(cfg, st.child(0), workers, cfg.get("cache"))
    yield check_spine_h(G, float(cfg["h"]), tuple(int(v) for v in _floats(cfg["n_list"])),
                        _int(cfg["n_mc"]), st.child(1))


def _c0(cfg, st, workers):
    from .conditional import check_c0
    f, G = _tables(cfg, st.child(0), workers, cfg.get("cache"))
    r = check_c0(_int(cfg["n_mc"]), _int(cfg["grid_n"]), G, st.child(1), f=f, eps_fit=_floats(cfg["eps_fit"]))
    r.seed = st.seed
    yield r


def _infinite(cfg, st, workers):
    import time

    from scipy import special

    from .conditional import sample_infinite_snake
    from .report import mc_verdict

    t0 = time.perf_counter()
    T = float(cfg["T_height"])
    m = _int(cfg["n_mc"])
    mids, kept, cand = np.empty(m), 0, 0
    for i in range(m):
        s = sample_infinite_snake(T, float(cfg["sigma_min"]), _int(cfg["grid_n"]), st.child(i),
                                  atom_n=_int(cfg["atom_n"]))
        s.check()
        mids[i] = s.spine_at(T / 2)
        kept += len(s.atoms)
        cand += s.n_candidates
    # E|N(0, t I_9)| = sqrt(2 t) Gamma(5) / Gamma(9/2), at t = T / 2
    target = math.sqrt(T) * math.exp(special.gammaln(5.0) - special.gammaln(4.5))
    est, se = float(mids.mean()), float(mids.std(ddof=1) / math.sqrt(m))
    yield EstimateReport(
        "infinite_snake", "spine with a thinned Poisson forest", est, se, m, target,
        mc_verdict(est, se, target, rel=0.0), time.perf_counter() - t0,
        "spine mean at half height within 4 SE; range condition on every atom",
        {"kept_fraction": kept / max(cand, 1), "atoms_per_sample": kept / m}, st.seed)


def _marginal(cfg, st, workers):
    from .batch import conditioned_batch
    from .verify import check_marginal_p1
    lvl = float(cfg["level"])
    cond = conditioned_batch(_int(cfg["n_mc"]), _int(cfg["grid_n"]), st.child(0), delta=float(cfg["delta"]),
                             M=float(cfg["M"]), level=lvl, workers=workers)
    for level in (None, lvl):
        yield check_marginal_p1(float(cfg["delta"]), float(cfg["M"]), level, rng=st, n=_int(cfg["grid_n"]),
                                cond=cond)


def _discrete(cfg, st, workers):
    from .discrete import compare_scaling_limit
    yield compare_scaling_limit(tuple(int(v) for v in _floats(cfg["n_edges"])), _int(cfg["n_mc"]), st,
                                n_cont=_int(cfg["grid_n"]), n_ref=_int(cfg["n_ref"]))


def _mixture(cfg, st, workers):
    from .verify import check_mixture_tail
    yield check_mixture_tail(_int(cfg["n_mc"]), _int(cfg["grid_n"]), st, s_min=float(cfg["s_min"]),
                             workers=workers)


_TABLE_DEFAULTS = {"f_eps": "0.25,0.3,0.35,0.4,0.45,0.5,0.6,0.8,1,1.5,2,3,4,6", "f_n_mc": 50_000, "f_grid_n": 256}

CATALOG = {e.name: e for e in [
    Experiment("g0", "verify.check_g0", "value of the Bessel(9) resolvent function at the origin",
               {}, _g0),
    Experiment("uniform-positivity", "verify.check_uniform_positivity",
               "head positive at p uniform times with probability 1/(p+1)",
               {"p": (1, 2, 3), "n_mc": 100_000, "grid_n": 4096}, _positivity),
    Experiment("hitting", "verify.check_hitting_constant", "hitting measure 3/(2x^2) of the negative half-line",
               {"x": (1.0, 2.0), "n_mc": 200_000, "grid_n": 256}, _hitting),
    Experiment("laplace", "verify.check_laplace_coth", "Laplace functional of the duration on no-hit paths",
               {"x_lam": (1.0, 1.0, 5.0, 1.0), "x_small": (1.0, 2.0), "n_mc": 200_000, "grid_n": 256}, _laplace),
    Experiment("girsanov", "verify.check_bessel_girsanov", "killed Brownian motion versus Bessel(9)",
               {"triples": "1:1:one;3:0.1:one;1:0.5:indicator", "n_mc": 100_000, "n_steps": 2000}, _girsanov),
    Experiment("theorem1", "verify.check_theorem1_constant", "eps^-4 P(min > -eps) tends to 2/21",
               {"eps": (0.6, 0.45, 0.3), "n_mc": 200_000, "grid_n": 1024, "n_fine": 4096,
                "n_mc_fine": 50_000}, _theorem1),
    Experiment("verwaat", "verify.check_verwaat_equivalence",
               "conditioning on a small barrier versus re-rooting at the minimum",
               {"eps": (0.6, 0.45, 0.3), "n_mc": 200_000, "grid_n": 1024, "n_cond": 10_000}, _verwaat),
    Experiment("reroot", "verify.check_reroot_invariance", "re-rooting at a uniform time preserves the law",
               {"n_mc": 20_000, "grid_n": 256}, _reroot),
    Experiment("spine-h", "verify.check_spine_h", "weighted Bessel(9) spine of the height-conditioned law",
               {"h": 1.0, "n_list": (128, 512), "n_mc": 20_000, **_TABLE_DEFAULTS}, _spine),
    Experiment("infinite-snake", "conditional.sample_infinite_snake",
               "Bessel(9) spine dressed with a thinned Poisson forest",
               {"T_height": 1.0, "sigma_min": 0.01, "n_mc": 200, "grid_n": 256, "atom_n": 32}, _infinite),
    Experiment("marginal-p1", "verify.check_marginal_p1", "one-point marginal of the conditioned measure",
               {"delta": 0.5, "M": 1.5, "level": 1.0, "n_mc": 20_000, "grid_n": 256}, _marginal),
    Experiment("discrete-compare", "discrete.compare_scaling_limit",
               "positive labelled plane trees against the re-rooted snake",
               {"n_edges": (50, 200), "n_mc": 2000, "grid_n": 256, "n_ref": 20_000}, _discrete),
    Experiment("c0", "conditional.check_c0", "two characterizations of the height-conditioned constant",
               {"n_mc": 20_000, "grid_n": 512, "eps_fit": (0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6),
                **_TABLE_DEFAULTS}, _c0),
    Experiment("mixture-tail", "verify.check_mixture_tail", "height survival of the conditioned measure ~ h^-3",
               {"n_mc": 20_000, "grid_n": 256, "s_min": 0.01}, _mixture),
]}


def list_experiments() -> list:
    return [{"name": e.name, "op": e.op, "paper_ref": e.anchor, "defaults": e.defaults} for e in CATALOG.values()]


def _dump_paths(path, n_paths, grid_n, stream):
    from .snake import sample_snake
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample", "s", "zeta", "head"])
        for k in range(n_paths):
            smp = sample_snake(grid_n, stream.child(k))
            for s, z, h in zip(smp.zeta.times(), smp.zeta.values, smp.head.values):
                w.writerow([k, repr(float(s)), repr(float(z)), repr(float(h))])


def resolve_config(cfg: ExperimentConfig) -> dict:
    if cfg.experiment not in CATALOG:
        raise KeyError(f"unknown experiment {cfg.experiment!r}; see `list`")
    return cfg.resolved()


def run(cfg: ExperimentConfig, stream=None, *, timing: bool = False, dump=None) -> int:
    """Run ``cfg`` and write JSON lines to ``cfg.out`` (or stdout).

    Returns 0 iff every verdict is pass or asymptotic-only.
    """
    names = list(CATALOG) if cfg.experiment == "all" else [cfg.experiment]
    for nm in names:  # validate before any compute
        if nm not in CATALOG:
            raise KeyError(f"unknown experiment {nm!r}; see `list`")
    fh = open(cfg.out, "w") if cfg.out else sys.stdout
    ok = True
    try:
        for i, nm in enumerate(names):
            sub = ExperimentConfig(nm, cfg.seed, cfg.n_mc, cfg.grid_n, cfg.dh, cfg.eps, cfg.workers, cfg.out,
                                   dict(cfg.params))
            resolved = sub.resolved()
            h = config_hash(resolved)
            st = RandomStream(cfg.seed, CATALOG_INDEX[nm])
            for rep in CATALOG[nm].fn(resolved, st, cfg.workers):
                rep.seed = cfg.seed
                rep.config_hash = h
                row = json.loads(rep.to_json(include_runtime=timing))
                row["config"] = {k: _jsonable(v) for k, v in sorted(resolved.items())}
                fh.write(json.dumps(row) + "\n")
                fh.flush()
                ok = ok and rep.passed
                print(rep.summary(), file=sys.stderr)
            if dump:
                _dump_paths(dump if len(names) == 1 else f"{dump}.{nm}.csv", int(resolved.get("dump_n", 1)),
                            int(resolved.get("grid_n", 256)), st.child(999))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0 if ok else 1


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    return v


CATALOG_INDEX = {nm: i for i, nm in enumerate(CATALOG)}


def _read_config_file(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SystemExit(f"cannot read config file {path}: {exc}")
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        k, sep, v = ln.partition("=")
        if not sep:
            raise SystemExit(f"{path}: expected key=value, got {ln!r}")
        out[k.strip().replace("-", "_")] = _coerce(v)
    return out


def _parser():
    p = argparse.ArgumentParser(allow_abbrev=False, prog="cbtree", description=__doc__.splitlines()[0])
    p.add_argument("command", nargs="?", choices=("run", "list"), default="run")
    p.add_argument("name", nargs="?", help="experiment name (same as --experiment)")
    p.add_argument("--experiment")
    p.add_argument("--config", help="flat key=value file")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-mc", type=_int)
    p.add_argument("--grid-n", type=_int)
    p.add_argument("--dh", type=float)
    p.add_argument("--eps", type=_floats)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true", help="JSON output for list, JSON lines on stdout for run")
    p.add_argument("--workers", type=int)
    p.add_argument("--paths", help="also dump sample paths (s, zeta, head) to this CSV")
    p.add_argument("--timing", action="store_true", help="include runtime_s in the rows")
    return p


def _extra_params(tokens) -> dict:
    out, i = {}, 0
    while i < len(tokens):
        t = tokens[i]
        if not t.startswith("--"):
            raise SystemExit(f"unexpected argument {t!r}")
        key = t[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        elif i + 1 < len(tokens) and not tokens[i + 1].startswith("--"):
            val = tokens[i + 1]
            i += 2
        else:
            raise SystemExit(f"missing value for {t}")
        out[key.replace("-", "_")] = _coerce(val)
    return out


def _split_argv(parser, argv):
    """Separate free-form ``--key value`` pairs from the parser's own options."""
    known = {o for a in parser._actions for o in a.option_strings}
    ours, rest, i = [], [], 0
    while i < len(argv):
        t = argv[i]
        flag = t.split("=", 1)[0]
        if t.startswith("--") and flag not in known:
            rest.append(t)
            if "=" not in t and i + 1 < len(argv) and not argv[i + 1].startswith("--"):
                rest.append(argv[i + 1])
                i += 1
        else:
            ours.append(t)
        i += 1
    return ours, rest


def main(argv=None) -> int:
    parser = _parser()
    ours, rest = _split_argv(parser, list(sys.argv[1:] if argv is None else argv))
    args = parser.parse_args(ours)
    if args.command == "list":
        cat = list_experiments()
        if args.json:
            print(json.dumps([{**e, "defaults": {k: _jsonable(v) for k, v in e["defaults"].items()}} for e in cat]))
        else:
            for e in cat:
                print(f"{e['name']:<20} {e['op']:<36} {e['paper_ref']}")
        return 0
    file_cfg = _read_config_file(args.config) if args.config else {}
    file_cfg.update(_extra_params(rest))
    name = args.name or args.experiment or file_cfg.pop("experiment", None)
    file_cfg.pop("experiment", None)
    if name is None:
        raise SystemExit("no experiment given; see `cbtree list`")
    if name != "all" and name not in CATALOG:
        print(f"unknown experiment {name!r}; known: {', '.join(CATALOG)}, all", file=sys.stderr)
        return 2

    def pick(flag, key, default=None, cast=lambda v: v):
        if flag is not None:
            return flag
        v = file_cfg.pop(key, None)
        return default if v is None else cast(v)

    cfg = ExperimentConfig(
        experiment=name,
        seed=pick(args.seed, "seed", 0, int),
        n_mc=pick(args.n_mc, "n_mc", None, _int),
        grid_n=pick(args.grid_n, "grid_n", None, _int),
        dh=pick(args.dh, "dh", None, float),
        eps=pick(args.eps, "eps", None, _floats),
        workers=pick(args.workers, "workers", 1, int),
        out=pick(args.out, "out", None, str),
        params=file_cfg,
    )
    try:
        return run(cfg, timing=args.timing, dump=args.paths)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
