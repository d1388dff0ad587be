"""Run the independent oracles in tests/oracles.py once and freeze their
outputs into tests/data/oracle_values.json.

    python3 scripts/freeze_oracles.py [--skip-slow]
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import mpmath
import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))
import oracles  # noqa: E402

OUT = ROOT / "tests" / "data" / "oracle_values.json"


def _ln_2K1_3() -> str:
    with mpmath.workdps(60):
        return mpmath.nstr(oracles.ln_K1(3) + mpmath.log(2), 30)


def regression() -> dict:
    return {
        "E1": {str(d): mpmath.nstr(oracles.E1_value(d), 30) for d in range(2, 6)},
        "davenport_C": {f"{p},{s},{n}": oracles.davenport_constant(p, s, n)
                        for p in range(1, 5) for s in range(0, 4) for n in range(1, 4)},
        "omega": {str(k): mpmath.nstr(oracles.ball_volume(k), 30) for k in range(0, 7)},
        "v": {str(k): mpmath.nstr(oracles.sphere_measure(k), 30) for k in range(0, 7)},
        "ln_2K1_3": _ln_2K1_3(),
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--skip-slow", action="store_true")
    ap.add_argument("--regression-only", action="store_true", help="refresh only the small constant snapshot")
    args = ap.parse_args()
    t0 = time.time()
    if args.regression_only:
        data = json.loads(OUT.read_text())
        data["regression"] = regression()
        OUT.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
        print(f"refreshed regression snapshot in {OUT}")
        return
    data: dict = {"regression": regression()}

    census = {}
    for d in (2, 3):
        for H in range(1, 11):
            if args.skip_slow and d == 3 and H > 5:
                continue
            census[f"{d},{H}"] = oracles.census_summary(d, H)
            print(f"census d={d} H={H}: {census[f'{d},{H}']}  [{time.time() - t0:.0f}s]", flush=True)
    data["census"] = census

    data["constants"] = {
        "s2_digits": len(str(oracles.s_roth(2))),
        "p2_digits": len(str(oracles.p_roth(2))),
        "ln_K1_2": mpmath.nstr(oracles.ln_K1(2), 30),
        "ln_K1_3": mpmath.nstr(oracles.ln_K1(3), 30),
        "ln_M1_roth_2": mpmath.nstr(oracles.ln_M1_roth(2), 30),
    }
    print(data["constants"], flush=True)

    data["reducible_quadratics"] = {str(H): oracles.reducible_quadratics(H) for H in (10, 30, 60)}
    print(data["reducible_quadratics"], flush=True)

    # golden-ratio line pair against Psi(q) = q^(-1/2), |q| <= 50
    with mpmath.workdps(60):
        phi = (1 + mpmath.sqrt(5)) / 2
        sols = oracles.brute_solutions([[1, phi], [0, 1]], lambda h: 1 / mpmath.sqrt(h), 50)
    data["golden_solutions"] = [list(q) for q in sols]
    print("golden", data["golden_solutions"], flush=True)

    # exhaustive pair ratio for the unit-ball census at small heights
    ratios = {}
    for H in (4, 6, 8):
        xs = np.array([float(x) for x in oracles.naive_census(2, H) if abs(x) < 1])
        hits, total = oracles.brute_ratio_n2(xs, lambda h: h ** -3.0, 2.0, 10.0)
        ratios[str(H)] = {"hits": hits, "total": total}
        print("ratio", H, hits, total, flush=True)
    data["pair_ratio_psi_cube"] = ratios

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT} in {time.time() - t0:.0f}s")


if __name__ == "__main__":
    main()
