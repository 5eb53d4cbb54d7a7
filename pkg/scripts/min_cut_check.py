"""Print min cuts of the two-user and single-user information-flow networks.

    python scripts/min_cut_check.py --storage 2 --n 4 --k 3
"""
import argparse

from rcess import flowgraph as fg


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--storage", type=int, default=2)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--k", type=int, default=3)
    a = ap.parse_args(argv)

    two = fg.two_user_network(a.storage)
    print(f"two-user network: {len(two.vertices)} vertices, {len(two.edges)} edges")
    for sink in ("U1", "U2"):
        value, side = fg.max_flow(two, "D", sink)
        print(f"  min cut D->{sink} = {value}; sink side {sorted(set(two.vertices) - side)}")
    single = fg.single_user_network(a.n, a.k, a.storage)
    print(f"single user (n={a.n}, k={a.k}): min cut = {fg.min_cut(single)} "
          f"(k * storage = {a.k * a.storage})")


if __name__ == "__main__":
    main()
