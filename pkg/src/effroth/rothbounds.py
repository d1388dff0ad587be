"""Probability bounds for approximation sets, and their empirical checks.

Two bound forms are evaluated:

* ``closed`` -- the closed form C2 |J| (1 + Theta) (1/(1 - delta) + E(H)/Theta)
  with the explicit constants of the degree-d setting;
* ``general`` -- the general form 4 int_J rho + S + 4 |J| eta(Theta) built from
  the density, its modulus of continuity and the uniform error term.

All bound values are :class:`BigConstant` upper bounds, since E(H) is
astronomically large at desk-scale heights.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from . import constants as K
from .census import Census, CensusSpec, discrepancy, enumerate_census
from .constants import BigConstant, compare
from .intervalsets import (
    ApproximationFunction,
    RationalIntervalSet,
    build_J,
    len_star_farey,
    theta,
)
from .koleda import DensityModel, Estimate

FORMS = ("closed", "general")
MODES = ("ModOne", "Restricted")


def density_kind(mode: str) -> str:
    return "XiPeriodised" if mode == "ModOne" else "ChiRestricted"


@dataclass(frozen=True)
class BoundParams:
    d: int
    mode: str
    psi: ApproximationFunction
    Q1: int
    Q2: int
    H: int
    delta: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 1 <= self.Q1 < self.Q2:
            raise ValueError("need 1 <= Q1 < Q2")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.H < 1 or self.d < 2:
            raise ValueError("need H >= 1 and d >= 2")

    @property
    def census_spec(self) -> CensusSpec:
        return CensusSpec(self.d, self.H, self.mode)

    def to_dict(self) -> dict:
        return {"d": self.d, "mode": self.mode, "psi": str(self.psi), "Q1": self.Q1,
                "Q2": self.Q2, "H": self.H, "delta": str(self.delta)}


def _tag(value, provenance: str) -> dict:
    if isinstance(value, BigConstant):
        out = value.to_dict(max_exact_digits=80)
        out["float"] = float(value)
        out["provenance"] = provenance
        return out
    if isinstance(value, Fraction):
        return {"value": f"{value.numerator}/{value.denominator}", "float": float(value), "provenance": provenance}
    if isinstance(value, Estimate):
        return {"value": value.value, "err": value.err, "provenance": provenance}
    return {"value": value, "provenance": provenance}


@dataclass
class BoundReport:
    params: BoundParams
    form: str
    kind: str  # "upper" or "lower"
    intermediates: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    bound: BigConstant | None = None
    empirical: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def applicable(self) -> bool:
        return bool(self.flags.get("applicable"))

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "form": self.form,
            "kind": self.kind,
            "intermediates": self.intermediates,
            "flags": self.flags,
            "bound": None if self.bound is None else _tag(self.bound, "log-space"),
            "empirical": self.empirical,
            "notes": list(self.notes),
        }


# -- shared ingredients ------------------------------------------------------

def _rounding(psi: ApproximationFunction, side: str) -> str:
    return "exact" if psi.is_exact else side


def _bc(x) -> BigConstant:
    x = Fraction(x)
    return BigConstant.of(max(x, Fraction(0)))


def _upper_integral(model: DensityModel, S: RationalIntervalSet) -> tuple[Estimate, BigConstant]:
    est = model.integral_over(S)
    if not S.components:
        return est, BigConstant.of(0)
    return est, _bc(Fraction(est.value) + Fraction(est.err))


def _error_term(p: BoundParams) -> tuple[BigConstant, str]:
    """E(H) and whether H lies in the range where it is proven."""
    E = K.E_of(p.mode, p.d, p.H)
    threshold = K.solve_H_threshold(p.d, "H" if p.mode == "ModOne" else "H'")
    state = compare(BigConstant.of(p.H), threshold)
    regime = {"less": "below-threshold", "indeterminate": "indeterminate"}.get(state, "proven")
    return E, regime


def _gate(lhs: Fraction, rhs: BigConstant) -> str:
    """'holds', 'fails' or 'indeterminate' for lhs < rhs."""
    if lhs == 0:
        return "holds" if not rhs.is_zero else "fails"
    c = compare(_bc(lhs), rhs)
    return {"less": "holds", "indeterminate": "indeterminate"}.get(c, "fails")


def _closed_form(C2: BigConstant, measure: Fraction, scale_values: Sequence[Fraction], delta: Fraction, E: BigConstant) -> BigConstant:
    """C2 |S| (1 + t)(1/(1 - delta) + E/t), maximised over the endpoint values of t.

    The expression is convex in t, so endpoints bound it on the interval.
    """
    outs = []
    for t in scale_values:
        inner = _bc(1 / (1 - delta)) + E / _bc(t)
        outs.append(C2 * _bc(measure) * _bc(1 + t) * inner)
    return K.hull_max(*outs)


def _general_form(measure: Fraction, integral: BigConstant, scale_values: Sequence[Fraction],
                  delta: Fraction, E: BigConstant, eta_slope: BigConstant, min_rho: BigConstant) -> BigConstant:
    """4 int rho + (8d/(1-d) + E/(t min rho)) (|S| eta(t) + int rho) + 4 |S| eta(t).

    Convex in t as well, so the endpoints suffice.
    """
    outs = []
    for t in scale_values:
        eta_t = eta_slope * _bc(t)
        spread = _bc(measure) * eta_t
        S = (_bc(8 * delta / (1 - delta)) + E / (_bc(t) * min_rho)) * (spread + integral)
        outs.append(BigConstant.of(4) * integral + S + BigConstant.of(4) * spread)
    return K.hull_max(*outs)


def _certified_density(p: BoundParams) -> tuple[BigConstant, BigConstant, BigConstant]:
    return K.density_extremes(p.d, p.mode, "certified")


# -- bounds ------------------------------------------------------------------

def upper_bound(p: BoundParams, form: str = "closed", model: DensityModel | None = None) -> BoundReport:
    """Upper bound for the proportion of points in J."""
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    rep = BoundReport(p, form, "upper")
    r_out, r_in = _rounding(p.psi, "outer"), _rounding(p.psi, "inner")
    J = build_J(p.psi, p.Q1, p.Q2, r_out)
    thetas = sorted({theta(p.psi, p.Q1, p.Q2, r_in), theta(p.psi, p.Q1, p.Q2, r_out)})
    measure = J.measure()
    exact = "exact" if p.psi.is_exact else "rounded"
    rep.intermediates["J_measure"] = _tag(measure, exact)
    rep.intermediates["J_components"] = len(J.components)
    rep.intermediates["theta"] = [_tag(t, exact) for t in thetas]
    E, regime = _error_term(p)
    rep.intermediates["E_H"] = _tag(E, "log-space")
    rep.flags["error_term_regime"] = regime

    if measure == 0:
        rep.flags["applicable"] = True
        rep.flags["theta_condition"] = "holds"
        rep.bound = BigConstant.of(0, "zero-measure target")
        rep.notes.append("J has measure zero; every point of degree >= 2 misses it")
        return rep

    if form == "closed":
        C1 = K.C1(p.d, p.mode)
        gate = _gate(thetas[-1], C1 * _bc(p.delta))
        C2 = K.C2(p.d, p.mode)
        rep.intermediates["C1"] = _tag(C1, "log-space")
        rep.intermediates["C2"] = _tag(C2, "log-space")
        rep.flags["theta_condition"] = gate
        rep.flags["applicable"] = gate == "holds"
        if gate == "holds":
            rep.bound = _closed_form(C2, measure, thetas, p.delta, E)
        return rep

    model = model or DensityModel(p.d, density_kind(p.mode))
    top, eta_slope, min_rho = _certified_density(p)
    nu = K.nu_slope(p.d, p.mode) * _bc(p.delta)
    est, integral = _upper_integral(model, J)
    rep.intermediates["integral_J"] = _tag(est, "quadrature")
    rep.intermediates["eta_slope"] = _tag(eta_slope, "log-space")
    rep.intermediates["nu_bound"] = _tag(nu, "log-space")
    rep.intermediates["min_density"] = _tag(min_rho, "log-space")
    gate = _gate(thetas[-1], nu)
    rep.flags["theta_condition"] = gate
    rep.flags["applicable"] = gate == "holds"
    if gate == "holds":
        rep.bound = _general_form(measure, integral, thetas, p.delta, E, eta_slope, min_rho)
    return rep


def lower_bound(p: BoundParams, form: str = "closed", model: DensityModel | None = None) -> BoundReport:
    """Upper bound for one minus the proportion of points in J."""
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    rep = BoundReport(p, form, "lower")
    rounding = _rounding(p.psi, "inner")
    J = build_J(p.psi, p.Q1, p.Q2, rounding)
    Jt = J.complement_closure()
    exact = "exact" if p.psi.is_exact else "rounded"
    ls = len_star_farey(p.psi, p.Q1, p.Q2) if p.psi.is_exact else Jt.len_star()
    rep.intermediates["Jtilde_measure"] = _tag(Jt.measure(), exact)
    rep.intermediates["Jtilde_components"] = len(Jt.components)
    rep.intermediates["len_star"] = _tag(ls, exact)
    if ls == 0:
        rep.flags["applicable"] = True
        rep.flags["full_interval"] = True
        rep.bound = BigConstant.of(0, "J is the full interval")
        rep.notes.append("len* vanishes: J covers [0, 1] and the ratio is exactly 1")
        return rep
    rep.flags["full_interval"] = False
    E, regime = _error_term(p)
    rep.intermediates["E_H"] = _tag(E, "log-space")
    rep.flags["error_term_regime"] = regime
    measure = Jt.measure()

    if form == "closed":
        C1 = K.C1(p.d, p.mode)
        gate = _gate(ls, C1 * _bc(p.delta))
        rep.flags["len_star_condition"] = gate
        rep.flags["applicable"] = gate == "holds"
        if gate == "holds":
            rep.bound = _closed_form(K.C2(p.d, p.mode), measure, [ls], p.delta, E)
        return rep

    model = model or DensityModel(p.d, density_kind(p.mode))
    _, eta_slope, min_rho = _certified_density(p)
    nu = K.nu_slope(p.d, p.mode) * _bc(p.delta)
    est, integral = _upper_integral(model, Jt)
    rep.intermediates["integral_Jtilde"] = _tag(est, "quadrature")
    rep.intermediates["nu_bound"] = _tag(nu, "log-space")
    gate = _gate(ls, nu)
    rep.flags["len_star_condition"] = gate
    rep.flags["applicable"] = gate == "holds"
    rep.notes.append("the spread term uses the complement of J for Psi itself, not Psi/2")
    if gate == "holds":
        rep.bound = _general_form(measure, integral, [ls], p.delta, E, eta_slope, min_rho)
    return rep


# -- empirical side ----------------------------------------------------------

def empirical_ratio(census: Census, J: RationalIntervalSet) -> Fraction:
    if census.total == 0:
        raise ValueError("empty census")
    return Fraction(census.count_in(J), census.total)


def verify_empirical(p: BoundParams, census: Census | None = None, model: DensityModel | None = None,
                     forms: Iterable[str] = FORMS) -> dict:
    """Exact ratio from the census, compared with every bound form and the
    limit density."""
    census = census or enumerate_census(p.census_spec)
    if census.spec != p.census_spec:
        raise ValueError(f"census {census.spec} does not match {p.census_spec}")
    model = model or DensityModel(p.d, density_kind(p.mode))
    J = build_J(p.psi, p.Q1, p.Q2, _rounding(p.psi, "outer"))
    ratio = empirical_ratio(census, J)
    integral = model.integral_over(J)
    disc, disc_err = discrepancy(census, model.cdf)
    deviation = abs(float(ratio) - integral.value)
    out = {
        "params": p.to_dict(),
        "ratio": _tag(ratio, "exact"),
        "measure_H": _tag(census.measure(J), "exact"),
        "integral_J": _tag(integral, "quadrature"),
        "deviation": deviation,
        "discrepancy": {"value": disc, "err": disc_err},
        # one interval at a time is what the discrepancy controls
        "within_discrepancy": deviation <= disc + disc_err + integral.err,
        "within_component_discrepancy": deviation <= len(J.components) * (disc + disc_err) + integral.err,
        "reports": {},
    }
    for form in forms:
        up, lo = upper_bound(p, form, model), lower_bound(p, form, model)
        entry = {"upper": up.to_dict(), "lower": lo.to_dict()}
        if up.applicable and up.bound is not None:
            entry["upper_holds"] = compare(_bc(ratio), up.bound) in ("less", "equal")
        if lo.applicable and lo.bound is not None:
            entry["lower_holds"] = compare(_bc(1 - ratio), lo.bound) in ("less", "equal")
        out["reports"][form] = entry
    return out


def density_weighted_mean(points: np.ndarray, weights: np.ndarray, density, interval: tuple[float, float], total: float | None = None) -> float:
    """(1/|I|) * sum over points in I of weight / density(point), per unit mass."""
    a, b = interval
    if not b > a:
        raise ValueError("interval must have positive length")
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    total = float(weights.sum()) if total is None else total
    inside = (points >= a) & (points <= b)
    vals = np.array([density(x) for x in points[inside]], dtype=float)
    return float(np.sum(weights[inside] / vals) / ((b - a) * total))


def local_density_check(census: Census, model: DensityModel, interval: tuple[float, float],
                       delta: Fraction = Fraction(1, 2)) -> dict:
    a, b = interval
    f = lambda x: model(float(x)).value
    value = density_weighted_mean(census.points(), census.mult, f, interval, census.total)
    mode = census.spec.mode
    _, _, min_rho = K.density_extremes(census.spec.d, mode, "certified")
    E = K.E_of(mode, census.spec.d, census.spec.H)
    length = Fraction(b - a)
    bound = _bc(2 * delta / (1 - delta)) + E / (_bc(length) * min_rho)
    nu = K.nu_slope(census.spec.d, mode) * _bc(delta)
    return {
        "interval": [a, b],
        "value": value,
        "deviation": abs(value - 1),
        "bound": _tag(bound, "log-space"),
        "applicable": _gate(length, nu) == "holds",
        "bound_holds": compare(_bc(Fraction(abs(value - 1))), bound) in ("less", "equal"),
    }


def density_limit_table(psi: ApproximationFunction, schedule: Sequence[tuple[int, int, int]], d: int, mode: str) -> list[dict]:
    """Empirical ratios along a schedule of (Q1, Q2, H) triples."""
    rows = []
    model = DensityModel(d, density_kind(mode))
    for Q1, Q2, H in schedule:
        census = enumerate_census(CensusSpec(d, H, mode))
        J = build_J(psi, Q1, Q2, _rounding(psi, "outer"))
        ratio = empirical_ratio(census, J)
        rows.append({
            "Q1": Q1, "Q2": Q2, "H": H,
            "ratio": float(ratio), "ratio_exact": f"{ratio.numerator}/{ratio.denominator}",
            "J_measure": float(J.measure()),
            "integral_J": model.integral_over(J).value,
        })
    return rows


# -- audit of the numerical illustrations --------------------------------------

def _status(lhs: BigConstant, threshold: BigConstant) -> str:
    c = compare(lhs, threshold)
    if c == "indeterminate":
        return "indeterminate - raise precision"
    return "pass" if c in ("less", "equal") else "fail"


def _status_ge(lhs: BigConstant, threshold: BigConstant) -> str:
    c = compare(lhs, threshold)
    if c == "indeterminate":
        return "indeterminate - raise precision"
    return "pass" if c in ("greater", "equal") else "fail"


def _loglog_tail(Qlo: BigConstant, Qhi: BigConstant, power: int) -> BigConstant:
    """Upper bound for sum over Qlo <= q < Qhi of 2/(q (log q)^power).

    Integral comparison for a decreasing summand: the sum is at most
    2/(Qlo (log Qlo)^p) + 2 int_{Qlo}^{Qhi} dq/(q (log q)^p).
    """
    with K._prec():
        La, Lb = Qlo.ln, Qhi.ln
        if power == 1:
            integral = iv_log(Lb) - iv_log(La)
        else:
            integral = (1 / La ** (power - 1) - 1 / Lb ** (power - 1)) / (power - 1)
        head = 2 / (Qlo.interval() * La**power)
        total = head + 2 * integral
    return BigConstant.from_iv(mpmath.iv.mpf([total.a, total.b]), f"tail sum, log power {power}")


def iv_log(x):
    return mpmath.iv.log(x)


def _float_union(psi_vals: np.ndarray, Q1: int, Q2: int) -> tuple[float, float, float]:
    """|J|, len* of the complement, and an absolute error bound, in float64.

    Used for the divergence illustration where exact sets would hold
    millions of rational endpoints.
    """
    lo_parts, hi_parts = [], []
    for q in range(Q1, Q2):
        r = psi_vals[q - Q1] / q
        c = np.arange(q + 1) / q
        lo_parts.append(c - r)
        hi_parts.append(c + r)
    lo = np.clip(np.concatenate(lo_parts), 0, 1)
    hi = np.clip(np.concatenate(hi_parts), 0, 1)
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    gap_lo, gap_hi = reach[:-1], lo[1:]
    gaps = gap_hi - gap_lo
    gaps = gaps[gaps > 0]
    lead = lo[0] if lo[0] > 0 else 0.0
    tail = 1 - reach[-1] if reach[-1] < 1 else 0.0
    comp = float(gaps.sum() + lead + tail)
    pieces = list(gaps) + [g for g in (lead, tail) if g > 0]
    lstar = float(min(pieces)) if pieces else 0.0
    err = 8 * len(lo) * np.finfo(float).eps
    return 1 - comp, lstar, float(err)


def illustration_audit() -> dict:
    """Recompute the inequalities behind the degree-3 illustrations."""
    d, mode, delta = 3, "ModOne", Fraction(1, 2)
    C2 = K.C2(d, mode)
    C2_simple = K.C2(d, mode, "simplified")
    C = K.C_of(d)
    C1 = K.C1(d, mode)
    H3 = K.solve_H_threshold(d, "H")
    items = []

    # convergent case, Psi(q) = 1/(q log^2 q), Q in [40 C2, 50 C2)
    for label, c2 in (("certified C2", C2), ("closed-form C2", C2_simple)):
        Q1 = BigConstant.of(40) * c2
        Q2 = BigConstant.of(50) * c2
        measure = _loglog_tail(Q1, Q2, 2)
        theta_hi = BigConstant.of(2) / (Q1 * Q1)  # 2 Psi(q)/q <= 2/q^2 once log q >= 1
        limit_bound = c2 * measure * (BigConstant.of(1) + theta_hi) * _bc(1 / (1 - delta))
        items.append({
            "name": f"convergent limit bound <= 5% ({label})",
            "ln_C2": str(mpmath.nstr(c2.ln_value, 30)),
            "ln_Q1": str(mpmath.nstr(Q1.ln_value, 30)),
            "measure_bound": measure.to_dict(80),
            "theta_condition": _status(theta_hi, C1 * _bc(delta)),
            "bound": limit_bound.to_dict(80),
            "status": _status(limit_bound, _bc(Fraction(5, 100))),
        })
        H = BigConstant.of(2500) * c2 * c2 / C
        E = C / H.sqrt()
        with K._prec():
            L2 = Q2.ln
            th = 2 / (Q2.interval() ** 2 * L2**2)
        theta_lo = BigConstant.from_iv(mpmath.iv.mpf([th.a, th.b]), "2/(Q2 log Q2)^2")
        finite = c2 * measure * (BigConstant.of(1) + theta_hi) * (_bc(1 / (1 - delta)) + E / theta_lo)
        items.append({
            "name": f"convergent finite-H bound <= 7% at H = 2500 C2^2 / C(3) ({label})",
            "ln_H": str(mpmath.nstr(H.ln_value, 30)),
            "H_at_least_threshold": _status_ge(H, H3),
            "bound": finite.to_dict(80),
            "status": _status(finite, _bc(Fraction(7, 100))),
        })

    # divergent case, Psi(q) = 1/(q log q), Q1 = 1000, Q2 = 5000
    Q1, Q2 = 1000, 5000
    qs = np.arange(Q1, Q2, dtype=float)
    J_measure, lstar, err = _float_union(1 / (qs * np.log(qs)), Q1, Q2)
    comp_hi = Fraction(1 - J_measure + err)
    lstar_hi = Fraction(lstar + err)
    lstar_lo = Fraction(max(lstar - err, 0))
    gate = _gate(lstar_hi, C1 * _bc(delta))
    entry = {
        "name": "divergent limit bound: 1 - ratio <= 5%",
        "J_measure_float": J_measure,
        "len_star_float": lstar,
        "float_error_bound": err,
        "len_star_condition": gate,
    }
    if gate == "holds" and lstar_lo > 0:
        limit = C2 * _bc(comp_hi) * _bc(1 + lstar_hi) * _bc(1 / (1 - delta))
        entry["bound"] = limit.to_dict(80)
        entry["status"] = _status(limit, _bc(Fraction(5, 100)))
    else:
        entry["status"] = "fail (precondition)"
    items.append(entry)
    H = BigConstant.of(7 * 10**6)
    items.append({
        "name": "divergent finite-H bound at H = 7e6 needs H >= H(3)",
        "ln_H3": str(mpmath.nstr(H3.ln_value, 30)),
        "status": _status_ge(H, H3),
    })
    return {
        "degree": d,
        "mode": mode,
        "delta": str(delta),
        "C2_certified": C2.to_dict(80),
        "C2_closed_form": C2_simple.to_dict(80),
        "C1": C1.to_dict(80),
        "C": C.to_dict(80),
        "items": items,
    }
