"""Acceptance run: one status line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline, or
plainly to get them in the terminal summary.  Known failures are strict
xfails; see the decisions ledger for the analysis behind each.
"""
import math
import time
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
import sympy

import effroth.census as C
import effroth.constants as K
import oracles
from effroth.census import CensusSpec, discrepancy, enumerate_census
from effroth.davenport import davenport_verify, random_fiber, reducible_bound, reducible_count
from effroth.intervalsets import ApproximationFunction as Psi
from effroth.intervalsets import build_J, farey, len_star_farey, sieve_check
from effroth.koleda import DensityModel, c_d, lower_bound_rho, mass_unit_interval, rho, upper_bound_rho
from effroth.rothbounds import BoundParams, density_limit_table, illustration_audit, verify_empirical
from effroth.subspace import FiberSpec, fiber_bound, fiber_volume_mc, subspace_illustration_audit


def restricted(d, H):
    return enumerate_census(CensusSpec(d, H, "Restricted"))


def random_nonincreasing_psi(rng, Q2, top_max=200):
    top = F(int(rng.integers(1, top_max)), 1000)
    if rng.random() < 0.3:
        return Psi.power(int(rng.integers(0, 4)), top)
    vals = sorted((F(int(rng.integers(0, 1000)), 1000) * top for _ in range(Q2)), reverse=True)
    return Psi.table(vals)


# -- census ----------------------------------------------------------------------------

def test_census_exactness(criterion, frozen):
    start = time.perf_counter()
    C._enumerate_cached.cache_clear()
    small = (enumerate_census(CensusSpec(2, 1, "ModOne")).total, restricted(2, 1).total)
    mismatches = []
    for d in (2, 3):
        for H in range(1, 11):
            ref = frozen["census"][f"{d},{H}"]
            full = enumerate_census(CensusSpec(d, H, "ModOne"))
            got = (full.total, len(full), restricted(d, H).total)
            if got != (ref["total"], ref["residues"], ref["restricted"]):
                mismatches.append((d, H, got))
    elapsed = time.perf_counter() - start
    # the naive oracle runs live at the smallest heights
    live = all(len([x for x in oracles.naive_census(2, H) if 0 <= x < 1]) == restricted(2, H).total for H in (1, 2, 3))
    ok = small == (4, 1) and not mismatches and live and elapsed < 5
    criterion("1", ok, f"A2(1)={small[0]} A'2(1)={small[1]} mismatches={len(mismatches)} time={elapsed:.2f}s")


# -- limit densities -------------------------------------------------------------------------

def test_koleda_convergence(criterion):
    start = time.perf_counter()
    rel = {}
    for d, H in ((2, 60), (3, 15)):
        emp = restricted(d, H).total / H ** (d + 1)
        lim = mass_unit_interval(d).value / (2 * float(K.zeta(d + 1).value()))
        rel[d] = abs(emp - lim) / lim
    elapsed = time.perf_counter() - start
    ok = rel[2] <= 0.10 and rel[3] <= 0.20 and elapsed < 120
    criterion("2", ok, f"rel_dev d=2 {rel[2]:.4f} (<=0.10), d=3 {rel[3]:.4f} (<=0.20), time={elapsed:.1f}s")


def test_functional_equation(criterion):
    rng = np.random.default_rng(2024)
    worst, bad = 0.0, 0
    for d, cap in ((2, 1e-3), (3, 1e-2)):
        for x in rng.uniform(0.1, 10, 200):
            a, b = rho(d, float(x)), rho(d, float(1 / x))
            err = x * x * a.err + b.err
            gap = abs(x * x * a.value - b.value)
            worst = max(worst, gap)
            if gap > 2 * err or a.err > cap or b.err > cap:
                bad += 1
    criterion("3", bad == 0, f"400 points, violations={bad}, max gap={worst:.2e}")


def _rho_samples(d):
    rng = np.random.default_rng(40 + d)
    xs = np.concatenate([np.linspace(-1, 1, 81), rng.uniform(-1, 1, 40)])
    return [(float(x), rho(d, float(x))) for x in xs]


def test_density_lower_bound_and_value_at_zero(criterion):
    bad = []
    for d in (2, 3):
        floor = float(lower_bound_rho(d))
        bad += [(d, x) for x, e in _rho_samples(d) if e.value < floor - e.err]
        z = rho(d, 0.0)
        if abs(z.value - 2 ** (d - 1)) > max(z.err, 1e-12):
            bad.append((d, 0.0))
    criterion("4", not bad, f"lower bound and rho_d(0)=2^(d-1), violations={len(bad)}")


@pytest.mark.xfail(strict=True, reason="rho_2 peaks at 3.07 > 3; the stated maximum misses a factor 2^(d-1)")
def test_density_upper_bound_as_stated(criterion):
    peaks = {}
    for d in (2, 3):
        cap = float(upper_bound_rho(d))
        peaks[d] = max(e.value - e.err - cap for _, e in _rho_samples(d))
    ok = all(v <= 0 for v in peaks.values())
    criterion("4-upper", ok, f"max excess over d(d+1)/2: d=2 {peaks[2]:.4f}, d=3 {peaks[3]:.4f}", known_failure=True)


@pytest.mark.xfail(strict=True, reason="c_d zeta(d+1) is about 0.48 for d=2; the normalisation identity fails")
def test_normalising_constant_identity(criterion):
    vals = {d: c_d(d).value * float(K.zeta(d + 1).value()) for d in (2, 3)}
    ok = all(abs(v - 2) <= 1e-3 for v in vals.values())
    criterion("5a", ok, f"c_d zeta(d+1): d=2 {vals[2]:.5f}, d=3 {vals[3]:.5f} (target 2)", known_failure=True)


def test_periodised_density_normalised(criterion):
    vals = {d: DensityModel(d, "XiPeriodised").integral(0, 1).value for d in (2, 3)}
    ok = all(abs(v - 1) <= 1e-3 for v in vals.values())
    criterion("5b", ok, f"int_0^1 xi_d: d=2 {vals[2]:.6f}, d=3 {vals[3]:.6f}")


def _discrepancies():
    model = DensityModel(2, "ChiRestricted")
    return {H: discrepancy(restricted(2, H), model.cdf) for H in (15, 30, 60)}


def test_discrepancy_decay(criterion):
    disc = _discrepancies()
    v = [disc[H][0] for H in (15, 30, 60)]
    ok = v[0] >= v[1] >= v[2] and v[2] + disc[60][1] <= 0.05
    criterion("6", ok, "discrepancy H=15,30,60: " + ", ".join(f"{x:.4f}" for x in v))


# -- interval sets -------------------------------------------------------------------------------

def test_len_star_cross_check(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    agree = 0
    for _ in range(200):
        Q2 = int(rng.integers(2, 26))
        Q1 = int(rng.integers(1, Q2))
        psi = random_nonincreasing_psi(rng, Q2, top_max=500)
        if len_star_farey(psi, Q1, Q2) == build_J(psi, Q1, Q2).complement_closure().len_star():
            agree += 1
    elapsed = time.perf_counter() - start
    criterion("7", agree == 200 and elapsed < 60, f"{agree}/200 exact agreements, time={elapsed:.1f}s")


def test_farey_recursion(criterion):
    bad = []
    for order in range(1, 201):
        seq = [f.value for f in farey(order)]
        if seq != oracles.brute_farey(order):
            bad.append(order)
        if len(seq) != 1 + sum(int(sympy.totient(k)) for k in range(1, order + 1)):
            bad.append(order)
    criterion("8", not bad, f"orders 1..200, mismatches={len(bad)}")


def _sieve_cases():
    rng = np.random.default_rng(11)
    for _ in range(100):
        Q2 = int(rng.integers(2, 51))
        Q1 = int(rng.integers(1, Q2))
        yield sieve_check(random_nonincreasing_psi(rng, Q2), Q1, Q2)


def test_sieve_inequality_upper(criterion):
    bad = sum(not r.measure <= r.sigma for r in _sieve_cases())
    criterion("9", bad == 0, f"|J| <= Sigma on 100 cases, violations={bad}")


@pytest.mark.xfail(strict=True, reason="non-reduced centres p/q repeat shorter intervals, a loss of first order in Sigma")
def test_sieve_inequality_lower(criterion):
    bad = sum(not r.lower <= r.measure for r in _sieve_cases())
    criterion("9-lower", bad == 0, f"Sigma - 25 Sigma^2 <= |J| on 100 cases, violations={bad}", known_failure=True)


# -- Roth-type bounds --------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def regression_bounds():
    p = BoundParams(2, "Restricted", Psi.power(3), 5, 40, 60, F(1, 2))
    return verify_empirical(p, restricted(2, 60))


def test_bounds_consistency(criterion, regression_bounds):
    out = regression_bounds
    parts, ok = [], True
    for form, entry in out["reports"].items():
        up, lo = entry["upper"]["flags"], entry["lower"]["flags"]
        ok &= "applicable" in up and "applicable" in lo
        if up["applicable"]:
            ok &= entry["upper_holds"]
        if lo["applicable"]:
            ok &= entry["lower_holds"]
        parts.append(f"{form}: upper {'applies' if up['applicable'] else 'n/a'}, lower {'applies' if lo['applicable'] else 'n/a'}")
    criterion("10", bool(ok), f"ratio {out['ratio']['value']}; " + "; ".join(parts))


@pytest.mark.xfail(strict=True, reason="census under-fills J near small-denominator rationals; deviation 0.0229 > 0.0214")
def test_bounds_density_deviation_within_discrepancy(criterion, regression_bounds):
    out = regression_bounds
    disc, disc_err = _discrepancies()[60]
    integral = out["integral_J"]
    ok = out["deviation"] <= disc + disc_err + integral["err"]
    criterion("10-sharp", ok, f"|ratio - int_J chi_2| = {out['deviation']:.5f} vs discrepancy {disc:.5f}",
              known_failure=True)


def test_density_limit_trends(criterion):
    conv = [r["ratio"] for r in density_limit_table(Psi.power(3), [(q, 200, 60) for q in (2, 5, 10)], 2, "Restricted")]
    div = [r["ratio"] for r in density_limit_table(Psi.power(1), [(1, q, 60) for q in (10, 50, 200)], 2, "Restricted")]
    ok = conv[-1] < 0.1 and all(a >= b for a, b in zip(conv, conv[1:])) and div[-1] > 0.9 and all(
        a <= b for a, b in zip(div, div[1:]))
    criterion("11", ok, "convergent " + ", ".join(f"{x:.5f}" for x in conv) + "; divergent " + ", ".join(f"{x:.3f}" for x in div))


# -- lattice points and fibers ----------------------------------------------------------------------------

def test_davenport_corpus(criterion):
    rng = np.random.default_rng(12)
    slack, bad = [], 0
    for i in range(25):
        rep = davenport_verify(random_fiber(rng, "conic" if i % 2 == 0 else "quartic", bound=20))
        slack.append(rep.slack_ratio)
        bad += not (rep.passes and rep.contained)
    criterion("12", bad == 0, f"25 fibers, failures={bad}, median |count-vol|/rhs={np.median(slack):.2e}")


def test_fiber_volume_bound(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(13)
    bad, worst = 0, 0.0
    for n in (2, 3):
        for eta in (1e-1, 1e-2, 1e-3):
            for i in range(20):
                while True:
                    base = rng.uniform(-1, 1, n - 1)
                    if base @ base < 0.9:
                        break
                est = fiber_volume_mc(FiberSpec(tuple(base), eta, n), samples=10**6, seed=1000 * n + i)
                b = fiber_bound(n, eta)
                worst = max(worst, (est.estimate - 3 * est.stderr) / b)
                bad += est.estimate - 3 * est.stderr > b
    elapsed = time.perf_counter() - start
    criterion("13", bad == 0 and elapsed < 300, f"120 runs, violations={bad}, max (est-3sd)/bound={worst:.3f}, time={elapsed:.0f}s")


# -- constants --------------------------------------------------------------------------------------------

def test_constants_regression(criterion, frozen):
    checks = {
        "E1(2)=72": K.E1(2).exact == 72,
        "C(2,1,2)=18": K.davenport_C(2, 1, 2).exact == 18,
        "s(2) digits": K.s_deg(2).digits == len(str(oracles.s_roth(2))) == frozen["constants"]["s2_digits"],
    }
    with mpmath.workdps(40):
        for d in (2, 3):
            ref = oracles.ln_K1(d)
            checks[f"ln K1({d})"] = abs(K.K1(d).ln_value - ref) <= mpmath.mpf(10) ** -20 * abs(ref)
        c = K.C_prime_n(2)
        checks["C'_2"] = abs(mpmath.exp(c.ln_value) - (4 * mpmath.pi + 648)) <= 1e-9
    failed = [k for k, v in checks.items() if not v]
    criterion("14", not failed, f"{len(checks) - len(failed)}/{len(checks)} checks" + (f", failed {failed}" if failed else ""))


def test_illustration_audits(criterion):
    import json

    dump = lambda x: json.dumps(x, sort_keys=True, default=str)
    roth_a, roth_b = illustration_audit(), illustration_audit()
    sub_a, sub_b = subspace_illustration_audit(), subspace_illustration_audit()
    items = roth_a["items"] + sub_a["items"]
    allowed = {"pass", "fail", "indeterminate"}
    ok = dump(roth_a) == dump(roth_b) and dump(sub_a) == dump(sub_b)
    ok &= all(item["status"].split(" ")[0] in allowed for item in items)
    ok &= all(len(set(item) - {"name", "status", "note"}) >= 1 for item in items)  # intermediates present
    tally = {s: sum(item["status"].startswith(s) for item in items) for s in sorted(allowed)}
    criterion("15", ok, f"{len(items)} audited inequalities, " + ", ".join(f"{k}={v}" for k, v in tally.items()))


def test_reducible_bound(criterion, frozen):
    rows = []
    ok = True
    for H in (10, 30, 60):
        n = reducible_count(2, H)
        b = reducible_bound(2, H)
        ok &= n == frozen["reducible_quadratics"][str(H)] and n <= 72 * H * H * math.log(H) and b == pytest.approx(72 * H * H * math.log(H))
        rows.append(f"H={H}: {n} <= {b:.0f}")
    criterion("16", bool(ok), "; ".join(rows))
