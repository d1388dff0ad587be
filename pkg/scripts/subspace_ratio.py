"""Exhaustive proportion of ordered pairs of quadratic lines in the plane
that satisfy the subspace inequality for some line with Q1 <= |q| <= Q2."""
import argparse
import csv
import sys
import time

from effroth.intervalsets import parse_psi
from effroth.subspace import empirical_ratio


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--psi", default="power:3")
    ap.add_argument("--q1", type=int, default=2)
    ap.add_argument("--q2", type=int, default=10)
    ap.add_argument("--heights", default="4,6,8,10,15,20")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    psi = parse_psi(args.psi)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(out)
    w.writerow(["H", "hits", "total", "ratio", "undecided", "seconds"])
    for H in (int(h) for h in args.heights.split(",")):
        t = time.perf_counter()
        r = empirical_ratio((2,), 1, psi, args.q1, args.q2, (H,))
        w.writerow([H, r.hits, r.total, f"{r.ratio:.6f}", r.undecided, f"{time.perf_counter() - t:.1f}"])
        out.flush()


if __name__ == "__main__":
    main()
