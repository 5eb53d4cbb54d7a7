"""Tabulate capacity and per-d communication cost against the cut-set bounds.

    python scripts/sweep_costs.py --max-n 7 --mode lk
"""
import argparse
import itertools

from rcess import flowgraph as fg
from rcess import scheme as sm
from rcess.field import next_prime


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--mode", default="lk", choices=["lk", "omniscient"])
    ap.add_argument("--v", type=int, default=1)
    a = ap.parse_args(argv)

    print("n k z_ro z_wo z_rw | alpha capacity converse | d:cost/bound ...")
    mismatches = 0
    for n in range(1, a.max_n + 1):
        q = next_prime(n + 1)
        for k in range(1, n + 1):
            for z in itertools.product(range(k), repeat=3):
                if z[0] + z[2] >= k:
                    continue
                p = sm.SchemeParams(n, k, *z, q=q, v=a.v, mode=a.mode)
                if not p.feasible:
                    continue
                storage = p.staircase.alpha * p.v
                conv = fg.converse_bound(n, k, z, storage, a.mode)
                cells = []
                for d in range(k, n + 1):
                    cost, bound = sm.comm_cost(p, d), fg.download_bound(n, k, z, storage, d, a.mode)
                    mismatches += cost != bound
                    cells.append(f"{d}:{cost}/{bound}")
                mismatches += conv != sm.capacity(p)
                print(f"{n} {k} {z[0]} {z[1]} {z[2]} | {p.staircase.alpha} "
                      f"{sm.capacity(p)} {conv} | {' '.join(cells)}")
    print(f"mismatches: {mismatches}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
