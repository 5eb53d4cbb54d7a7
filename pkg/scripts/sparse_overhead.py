"""Edge counts, first-try connectivity and hash overhead of sparse vs complete graphs.

    python scripts/sparse_overhead.py --n 16 32 64 --seeds 1000 --v 64
"""
import argparse
from statistics import mean

from rcess import hashing as hs


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--seeds", type=int, default=1000)
    ap.add_argument("--v", type=int, default=64)
    a = ap.parse_args(argv)

    print("n  p        first-try  mean-edges  complete-edges  sparse-ovh  complete-ovh")
    for n in a.n:
        graphs = [hs.build_sparse_graph(n, s) for s in range(a.seeds)]
        first = sum(g.attempts == 1 for g in graphs)
        edges = mean(len(g.edges) for g in graphs)
        full = n * (n - 1) // 2
        print(f"{n:<3}{hs.sparse_edge_probability(n):.6f} {first:>5}/{a.seeds}  {edges:>10.1f}"
              f"  {full:>14}  {edges / a.v:>10.4f}  {full / a.v:>12.4f}")


if __name__ == "__main__":
    main()
