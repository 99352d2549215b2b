"""eps^-4 P(min > -eps) on a ladder of eps for several grid sizes.

    python3 scripts/barrier_sweep.py --n-mc 200000 --grids 1024,4096
"""
from __future__ import annotations

import argparse

from cbtree.batch import basic_batch
from cbtree.rng import RandomStream


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-mc", type=int, default=200_000)
    p.add_argument("--grids", default="1024,4096")
    p.add_argument("--eps", default="0.8,0.6,0.45,0.3")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    a = p.parse_args(argv)
    eps = [float(v) for v in a.eps.split(",")]
    print(f"{'n':>6} {'eps':>5} {'refined':>9} {'se':>8} {'grid':>9}")
    for i, n in enumerate(int(v) for v in a.grids.split(",")):
        b = basic_batch(a.n_mc, n, RandomStream(a.seed, i), stop=-max(eps), workers=a.workers)
        ok = b["status"] == 1
        for e in eps:
            ev = ok & (b["w_min"] > -e)
            m = ev.mean()
            se = (m * (1 - m) / ev.size) ** 0.5
            gm = (b["grid_min"] > -e).mean()
            print(f"{n:>6} {e:>5g} {m / e ** 4:>9.5f} {se / e ** 4:>8.5f} {gm / e ** 4:>9.5f}")
    print(f"limit 2/21 = {2 / 21:.5f}")


if __name__ == "__main__":
    main()
