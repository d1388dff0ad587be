"""Koleda's limit density of real algebraic numbers and its derived densities.

rho_d(x) integrates |sum k p_k x^(k-1)| over the box points p in [-1,1]^d
with |sum p_k x^k| <= 1.  The p_1 integral has a closed form, leaving an
integrand in (p_2, ..., p_d) that is piecewise quadratic on a polygonal
subdivision.  For d <= 3 every piece is integrated with Gauss-Legendre
rules that are exact on it; for d >= 4 the outer variables are sampled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate, interpolate, optimize
from scipy.special import zeta as hurwitz_zeta

from .intervalsets import RationalIntervalSet

KINDS = ("Rho", "XiPeriodised", "ChiRestricted")
_GL3 = np.polynomial.legendre.leggauss(3)
_GL4 = np.polynomial.legendre.leggauss(4)
FLOAT_FLOOR = 1e-12  # rounding allowance for the piecewise-exact rules


class Estimate(NamedTuple):
    value: float
    err: float
    tol_met: bool = True


def _inner(x: float, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Closed-form integral over p_1 of |p_1 + t| subject to |p_1 x + s| <= 1."""
    sg = 1.0 if x > 0 else -1.0
    lo = np.maximum(-1.0, (-sg - s) / x)
    hi = np.minimum(1.0, (sg - s) / x)
    a, b = lo + t, hi + t
    return np.where(hi > lo, 0.5 * (b * np.abs(b) - a * np.abs(a)), 0.0)


def _kink_lines(x: float) -> np.ndarray:
    """Affine forms c0 + c2 p2 + c3 p3 whose zero sets bound the pieces (d = 3)."""
    sg = 1.0 if x > 0 else -1.0
    a, b = -x, -x * x  # coefficients of the p_1 limits
    u, v = 2 * x, 3 * x * x  # coefficients of t
    rows = [
        (-sg / x + 1, a, b), (-sg / x - 1, a, b),
        (sg / x + 1, a, b), (sg / x - 1, a, b),
        (-1.0, u, v), (1.0, u, v),
        (-sg / x, a + u, b + v), (sg / x, a + u, b + v),
    ]
    return np.array(rows)


def _gl_pieces(edges: np.ndarray, rule) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite rule on the pieces of sorted edges (..., m)."""
    nodes, weights = rule
    a, b = edges[..., :-1, None], edges[..., 1:, None]
    half = (b - a) / 2
    return (a + b) / 2 + half * nodes, half * weights


def _rho2(x: float) -> tuple[float, float]:
    L = _kink_lines(x)[:, :2]
    breaks = -L[:, 0] / L[:, 1]
    edges = np.unique(np.clip(np.concatenate([[-1.0, 1.0], breaks]), -1, 1))
    out = []
    for rule in (_GL3, _GL4):
        p2, w = _gl_pieces(edges, rule)
        out.append(float(np.sum(w * _inner(x, p2 * x * x, 2 * p2 * x))))
    return out[0], abs(out[0] - out[1]) + FLOAT_FLOOR


def _rho3(x: float) -> tuple[float, float]:
    L = _kink_lines(x)
    c0, c2, c3 = L[:, 0], L[:, 1], L[:, 2]
    knots = [-1.0, 1.0]
    for i in range(len(L)):
        for j in range(i + 1, len(L)):
            det = c3[j] * c2[i] - c2[j] * c3[i]
            if det != 0:
                knots.append((c2[j] * c0[i] - c0[j] * c2[i]) / det)
        for side in (-1.0, 1.0):
            knots.append(-(c0[i] + c2[i] * side) / c3[i])
    knots = np.unique(np.clip(knots, -1, 1))
    out = []
    for rule in (_GL3, _GL4):
        p3, w3 = _gl_pieces(knots, rule)
        p3, w3 = p3.ravel(), w3.ravel()
        br = -(c0[None, :] + c3[None, :] * p3[:, None]) / c2[None, :]
        edges = np.sort(np.clip(np.hstack([br, -np.ones((len(p3), 1)), np.ones((len(p3), 1))]), -1, 1), axis=1)
        p2, w2 = _gl_pieces(edges, rule)
        P3 = p3[:, None, None]
        s = p2 * x**2 + P3 * x**3
        t = 2 * p2 * x + 3 * P3 * x**2
        g = np.sum(w2 * _inner(x, s, t), axis=(1, 2))
        out.append(float(np.sum(w3 * g)))
    return out[0], abs(out[0] - out[1]) + FLOAT_FLOOR


def _rho_mc(d: int, x: float, samples: int, seed: int) -> tuple[float, float]:
    """Stratified over p_2, plain sampling over p_3..p_d, exact in p_1."""
    rng = np.random.default_rng([seed, d, int(np.float64(x).view(np.int64)) & 0x7FFFFFFF])
    strata = 64
    per = max(2, samples // strata)
    u = (np.arange(strata)[:, None] + rng.random((strata, per))) / strata
    p2 = 2 * u - 1
    rest = rng.uniform(-1, 1, size=(strata, per, d - 2))
    ks = np.arange(3, d + 1)
    s = p2 * x**2 + np.sum(rest * x**ks, axis=-1)
    t = 2 * p2 * x + np.sum(rest * ks * x ** (ks - 1), axis=-1)
    f = _inner(x, s, t) * 2 ** (d - 1)
    means = f.mean(axis=1)
    var = f.var(axis=1, ddof=1) / per
    return float(means.mean()), float(3 * math.sqrt(var.sum()) / strata)


def rho(d: int, x: float, tol: float = 1e-9, samples: int = 200_000, seed: int = 0) -> Estimate:
    if d < 2:
        raise ValueError("degree must be at least 2")
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = float(x)
    if x == 0:
        # full cube, integrand |p_1|
        return Estimate(float(2 ** (d - 1)), 0.0, True)
    if d == 2:
        v, e = _rho2(x)
    elif d == 3:
        v, e = _rho3(x)
    else:
        v, e = _rho_mc(d, x, samples, seed)
    return Estimate(v, e, e <= tol)


@lru_cache(maxsize=None)
def full_cube_radius(d: int) -> float:
    """Largest u with sum_{k>=2} k u^(k-1) <= 1; there rho_d has a closed form."""
    return optimize.brentq(lambda u: sum(k * u ** (k - 1) for k in range(2, d + 1)) - 1, 0, 1, xtol=1e-15)


def rho_near_zero(d: int, u: float) -> float:
    """2^(d-1) (1 + sum_k k^2 u^(2k-2) / 3), valid for |u| <= full_cube_radius(d)."""
    return 2 ** (d - 1) * (1 + sum(k * k * u ** (2 * k - 2) for k in range(2, d + 1)) / 3)


def periodised_sum(d: int, x: float, tol: float = 1e-9, samples: int = 200_000, seed: int = 0) -> Estimate:
    """sum over n in Z of rho_d(x + n); the far terms are summed in closed form."""
    N = math.ceil(1 / full_cube_radius(d)) + 1
    total, err, ok = 0.0, 0.0, True
    for n in range(-N, N + 1):
        e = rho(d, x + n, tol, samples, seed)
        total += e.value
        err += e.err
        ok &= e.tol_met
    # for |y| > N, rho(y) = 2^(d-1) (y^-2 + sum_k (k^2/3) y^(-2k)) by the inversion identity
    tail = 0.0
    for q in (x + N + 1, N + 1 - x):
        tail += hurwitz_zeta(2, q) + sum(k * k / 3 * hurwitz_zeta(2 * k, q) for k in range(2, d + 1))
    total += 2 ** (d - 1) * tail
    return Estimate(total, err + 1e-14, ok)


@lru_cache(maxsize=None)
def mass_unit_interval(d: int) -> Estimate:
    """Integral of rho_d over [0, 1]."""
    f = lambda x: rho(d, x).value
    pts = [full_cube_radius(d), (math.sqrt(5) - 1) / 2]
    v, e = integrate.quad(f, 0, 1, points=pts, epsabs=1e-12, epsrel=1e-12, limit=400)
    return Estimate(v, e + 1e-11)


def c_d(d: int) -> Estimate:
    m = mass_unit_interval(d)
    return Estimate(1 / m.value, m.err / m.value**2 * 1.01)


def total_mass(d: int) -> Estimate:
    """Integral of rho_d over R, equal to four times the mass of [0, 1]
    (evenness plus the inversion identity)."""
    m = mass_unit_interval(d)
    return Estimate(4 * m.value, 4 * m.err)


def xi(d: int, x: float, tol: float = 1e-9) -> Estimate:
    """Periodised density on [0, 1], normalised to a probability density."""
    s = periodised_sum(d, x, tol)
    Z = total_mass(d)
    v = s.value / Z.value
    return Estimate(v, s.err / Z.value + v * Z.err / Z.value, s.tol_met)


def chi(d: int, x: float, tol: float = 1e-9) -> Estimate:
    r = rho(d, x, tol)
    c = c_d(d)
    return Estimate(c.value * r.value, c.value * r.err + r.value * c.err, r.tol_met)


# -- models ------------------------------------------------------------------

@dataclass(frozen=True)
class DensityModel:
    d: int
    kind: str = "ChiRestricted"
    tol: float = 1e-9
    samples: int = 200_000
    seed: int = 0
    table_nodes: int = 257

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")

    def __call__(self, x: float) -> Estimate:
        if self.kind == "Rho":
            return rho(self.d, x, self.tol, self.samples, self.seed)
        if self.kind == "XiPeriodised":
            return xi(self.d, x, self.tol)
        return chi(self.d, x, self.tol)

    def integral(self, a: float, b: float) -> Estimate:
        if b <= a:
            return Estimate(0.0, 0.0)
        f = lambda x: self(x).value
        v, e = integrate.quad(f, a, b, epsabs=1e-11, epsrel=1e-11, limit=200)
        return Estimate(v, e + self._scale_err() * (b - a))

    def _scale_err(self) -> float:
        if self.kind == "ChiRestricted":
            c = c_d(self.d)
            return c.err / c.value * 3
        if self.kind == "XiPeriodised":
            Z = total_mass(self.d)
            return Z.err / Z.value * 3 + 1e-12
        return 0.0

    @cached_property
    def _table(self):
        if self.kind == "Rho":
            raise ValueError("cdf tables are for the densities on [0, 1]")
        xs = np.linspace(0, 1, self.table_nodes)
        dens = np.array([self(x).value for x in xs])
        pieces = [0.0]
        perr = 0.0
        for a, b in zip(xs[:-1], xs[1:]):
            v, e = integrate.quad(lambda x: self(x).value, a, b, epsabs=1e-13, epsrel=1e-12)
            pieces.append(v)
            perr += e
        F = np.cumsum(pieces)
        fine = interpolate.CubicHermiteSpline(xs, F, dens)
        coarse = interpolate.CubicHermiteSpline(xs[::2], F[::2], dens[::2])
        # the coarse table's error at the skipped nodes bounds the fine one's
        val_err = float(np.max(np.abs(coarse(xs[1::2]) - F[1::2]))) + perr + self._scale_err()
        der_err = float(np.max(np.abs(coarse(xs[1::2], 1) - dens[1::2]))) + self._scale_err()
        return fine, val_err, der_err

    def cdf(self, xs) -> tuple[np.ndarray, float]:
        spline, err, _ = self._table
        return spline(np.clip(np.asarray(xs, dtype=float), 0, 1)), err

    def integral_over(self, S: RationalIntervalSet) -> Estimate:
        return integral_over(self, S)


def integral_over(model: DensityModel, S: RationalIntervalSet) -> Estimate:
    """Sum over components of the density's integral."""
    if not S.components:
        return Estimate(0.0, 0.0)
    if len(S.components) > 20:
        spline, val_err, der_err = model._table
        lo = np.array([float(a) for a, _ in S.components])
        hi = np.array([float(b) for _, b in S.components])
        v = float(np.sum(spline(hi) - spline(lo)))
        # sum of differences of a smooth error: bounded through its derivative
        return Estimate(v, 2 * val_err + float(np.sum(hi - lo)) * der_err)
    total, err = 0.0, 0.0
    for a, b in S.components:
        e = model.integral(float(a), float(b))
        total += e.value
        err += e.err
    return Estimate(total, err)


# -- moduli of continuity ----------------------------------------------------

def lower_bound_rho(d: int) -> Fraction:
    """(1/3d) (2/3d)^d, a lower bound for rho_d on [-1, 1]."""
    return Fraction(1, 3 * d) * Fraction(2, 3 * d) ** d


def upper_bound_rho(d: int) -> Fraction:
    return Fraction(d * (d + 1), 2)


def eta_bound(kind: str, d: int, eps: float) -> float:
    """Upper bound for the modulus of continuity at eps."""
    from . import constants

    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if kind == "XiPeriodised":
        # K3 bounds the unnormalised sum; the normalisation divides it out
        return float(constants.K3(d).value()) * eps / total_mass(d).value
    if kind == "ChiRestricted":
        return c_d(d).value * float(constants.K2(d).value()) * eps
    raise ValueError("eta_bound is defined for XiPeriodised and ChiRestricted")


def nu_bound(kind: str, d: int, delta: float) -> float:
    """Lower bound for the level-set function at delta."""
    from . import constants

    if delta <= 0:
        raise ValueError("delta must be positive")
    if kind == "XiPeriodised":
        return float(constants.K4(d).value()) * delta
    if kind == "ChiRestricted":
        return float(constants.nu_slope(d, "Restricted").value()) * delta
    raise ValueError("nu_bound is defined for XiPeriodised and ChiRestricted")
