"""Positive labelled plane trees against the snake re-rooted at its minimum.

    python3 scripts/discrete_compare.py --sizes 50,200,800 --n-mc 2000
"""
from __future__ import annotations

import argparse
import json

from cbtree.discrete import compare_scaling_limit
from cbtree.rng import RandomStream


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="50,200")
    p.add_argument("--n-mc", type=int, default=2000)
    p.add_argument("--grid-n", type=int, default=256)
    p.add_argument("--n-ref", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args(argv)
    r = compare_scaling_limit(tuple(int(v) for v in a.sizes.split(",")), a.n_mc, RandomStream(a.seed),
                              n_cont=a.grid_n, n_ref=a.n_ref)
    print(r.summary())
    print(json.dumps(json.loads(r.to_json())["details"], indent=1))


if __name__ == "__main__":
    main()
