"""Proportion of the census inside J_Psi(Q1, Q2) along schedules of Q1 and
Q2, for a convergent and a divergent approximation function."""
import argparse
import csv
import sys

from effroth.intervalsets import parse_psi
from effroth.rothbounds import density_limit_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--H", type=int, default=60)
    ap.add_argument("--convergent", default="power:3")
    ap.add_argument("--divergent", default="power:1:1/20")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    schedules = {
        args.convergent: [(q1, 200, args.H) for q1 in (2, 3, 5, 7, 10, 20)],
        args.divergent: [(1, q2, args.H) for q2 in (2, 3, 5, 10, 50, 200)],
    }
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(out)
    w.writerow(["psi", "Q1", "Q2", "H", "ratio", "ratio_exact", "J_measure", "integral_J"])
    for text, schedule in schedules.items():
        for row in density_limit_table(parse_psi(text), schedule, 2, "Restricted"):
            w.writerow([text, row["Q1"], row["Q2"], row["H"], f"{row['ratio']:.6g}", row["ratio_exact"],
                        f"{row['J_measure']:.6g}", f"{row['integral_J']:.6g}"])


if __name__ == "__main__":
    main()
