"""Census counts in [0, 1] against the limit density, and the interval
discrepancy, for a range of heights.  Writes CSV."""
import argparse
import csv
import sys

from effroth import constants as K
from effroth.census import CensusSpec, discrepancy, enumerate_census
from effroth.koleda import DensityModel, mass_unit_interval


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--heights", default="5,10,15,20,30,40,60")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    limit = mass_unit_interval(args.d).value / (2 * float(K.zeta(args.d + 1).value()))
    model = DensityModel(args.d, "ChiRestricted")
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(out)
    w.writerow(["d", "H", "count", "normalised", "limit", "rel_dev", "discrepancy"])
    for H in (int(h) for h in args.heights.split(",")):
        c = enumerate_census(CensusSpec(args.d, H, "Restricted"))
        norm = c.total / H ** (args.d + 1)
        disc, _ = discrepancy(c, model.cdf)
        w.writerow([args.d, H, c.total, f"{norm:.6f}", f"{limit:.6f}", f"{abs(norm - limit) / limit:.5f}", f"{disc:.5f}"])
        out.flush()


if __name__ == "__main__":
    main()
