"""Write a few sampled snakes (lifetime and head) to CSV for plotting.

    python3 scripts/plot_snake.py --n 1024 --count 3 --out snakes.csv [--reroot]
"""
from __future__ import annotations

import argparse
import csv

from cbtree.reroot import exact_conditioned_sample
from cbtree.rng import RandomStream
from cbtree.snake import sample_snake


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reroot", action="store_true", help="re-root each snake at its minimum")
    p.add_argument("--out", default="snakes.csv")
    a = p.parse_args(argv)
    st = RandomStream(a.seed)
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample", "s", "zeta", "head"])
        for k in range(a.count):
            g = st.child(k).generator()
            s = exact_conditioned_sample(a.n, rng=g) if a.reroot else sample_snake(a.n, g)
            for t, z, h in zip(s.zeta.times(), s.zeta.values, s.head.values):
                w.writerow([k, t, z, h])
    print(f"wrote {a.count} samples to {a.out}")


if __name__ == "__main__":
    main()
