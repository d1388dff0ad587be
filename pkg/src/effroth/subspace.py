"""Generalised subspace inequality for tuples of algebraic lines.

Lines are given by stereographic coordinates in the open unit ball (or, for
hand-built instances, by direction vectors).  A rational line Lambda with
primitive vector q is a solution when

    prod_i delta(L_i, Lambda^perp) <= xi(L_1, ..., L_n) * Psi(H(Lambda)) / H(Lambda)^n,

where delta is the sine distance to the hyperplane q^perp and xi the
orthogonality defect.  Everything here is specialised to the stereographic
chart.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import mpmath
import numpy as np
from mpmath import iv

from . import constants as K
from .algebra import AlgebraicNumber, IntPolynomial, RootInterval
from .census import BudgetExceeded, CensusSpec, enumerate_census
from .constants import BigConstant, compare
from .intervalsets import ApproximationFunction
from .projgeom import RationalLine, RationalSubspace, _rank, enumerate_rational_lines

SATISFIED, VIOLATED, INDETERMINATE = "satisfied", "violated", "indeterminate"
REFINE_BITS = (64, 128, 256)
FLOAT_TOL = 1e-9
COMBO_BUDGET = 10**6

Entry = AlgebraicNumber | Fraction


# -- line tuples ---------------------------------------------------------------

def _entry(x) -> Entry:
    if isinstance(x, AlgebraicNumber):
        return x
    if isinstance(x, float):
        raise TypeError("line coordinates must be exact (Fraction, int or AlgebraicNumber)")
    return Fraction(x)


def _entry_degree(x: Entry) -> int:
    return x.degree if isinstance(x, AlgebraicNumber) else 1


def _entry_height(x: Entry) -> int:
    if isinstance(x, AlgebraicNumber):
        return x.height
    return max(abs(x.numerator), x.denominator)


def _entry_iv(x: Entry, width: Fraction):
    if isinstance(x, Fraction):
        return iv.mpf(x.numerator) / x.denominator
    iso = x.refine(width).isolation
    if iso.exact_point is not None:
        p = iso.exact_point
        return iv.mpf(p.numerator) / p.denominator
    lo = iv.mpf(iso.lo.numerator) / iso.lo.denominator
    hi = iv.mpf(iso.hi.numerator) / iso.hi.denominator
    return iv.mpf([lo.a, hi.b])


@dataclass(frozen=True)
class AlgebraicLineTuple:
    """n lines in R^n.

    chart "stereo": each row is the stereographic coordinate vector in R^(n-1);
    chart "direction": each row is a spanning vector in R^n.
    """

    rows: tuple[tuple[Entry, ...], ...]
    chart: str = "stereo"
    _floats: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.chart not in ("stereo", "direction"):
            raise ValueError("chart must be 'stereo' or 'direction'")
        rows = tuple(tuple(_entry(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        width = n - 1 if self.chart == "stereo" else n
        if n < 2 or any(len(r) != width for r in rows):
            raise ValueError(f"need {n} rows of length {width}")
        if self.chart == "stereo":
            for r in rows:
                with mpmath.workprec(200):
                    sq = iv.mpf(0)
                    for x in r:
                        sq += _entry_iv(x, Fraction(1, 2**80)) ** 2
                if not sq.a < 1:
                    raise ValueError("stereographic coordinates must lie in the open unit ball")
        object.__setattr__(self, "_floats", self._float_directions())

    @classmethod
    def from_stereo(cls, rows) -> "AlgebraicLineTuple":
        return cls(tuple(tuple(r) for r in rows), "stereo")

    @classmethod
    def from_directions(cls, rows) -> "AlgebraicLineTuple":
        return cls(tuple(tuple(r) for r in rows), "direction")

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def multi_degree(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(_entry_degree(x) for x in r) for r in self.rows)

    @property
    def multi_height(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(_entry_height(x) for x in r) for r in self.rows)

    @property
    def is_rational(self) -> bool:
        return all(isinstance(x, Fraction) for r in self.rows for x in r)

    def _direction_of(self, row, one, two):
        if self.chart == "direction":
            return list(row)
        sq = sum((x * x for x in row), 0 * one)
        return [one - sq] + [two * x for x in row]

    def directions_iv(self, width: Fraction) -> list[list]:
        return [self._direction_of([_entry_iv(x, width) for x in r], iv.mpf(1), iv.mpf(2)) for r in self.rows]

    def directions_exact(self) -> list[list[Fraction]]:
        if not self.is_rational:
            raise ValueError("tuple has irrational coordinates")
        return [self._direction_of(list(r), Fraction(1), Fraction(2)) for r in self.rows]

    def _float_directions(self) -> np.ndarray:
        rows = [[float(x) for x in r] for r in self.rows]
        return np.array([self._direction_of(r, 1.0, 2.0) for r in rows], dtype=float)

    def directions_float(self) -> np.ndarray:
        return self._floats.copy()


# -- exact zero detection for delta -------------------------------------------

def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_add(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    m = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(m)]


def _poly_rem(f: list[Fraction], g: Sequence[int]) -> list[Fraction]:
    f = list(f)
    dg = len(g) - 1
    while len(f) - 1 >= dg and any(f):
        c = f[-1] / g[-1]
        shift = len(f) - 1 - dg
        for j in range(dg + 1):
            f[shift + j] -= c * g[j]
        f.pop()
    return f


def _dot_is_zero(lines: AlgebraicLineTuple, i: int, q: Sequence[int]) -> bool | None:
    """Whether direction_i . q is exactly zero; None when undecidable here
    (more than one distinct irrational coordinate)."""
    row = lines.rows[i]
    algs = [x for x in row if isinstance(x, AlgebraicNumber)]
    if any(not (a == algs[0]) for a in algs[1:]):
        return None
    polys = [[x] if isinstance(x, Fraction) else [Fraction(0), Fraction(1)] for x in row]
    if lines.chart == "direction":
        comps = polys
    else:
        sq = [Fraction(0)]
        for p in polys:
            sq = _poly_add(sq, _poly_mul(p, p))
        comps = [_poly_add([Fraction(1)], [-c for c in sq])] + [[2 * c for c in p] for p in polys]
    dot = [Fraction(0)]
    for c, p in zip(q, comps):
        dot = _poly_add(dot, [c * x for x in p])
    if not algs:
        return not any(dot)
    return not any(_poly_rem(dot, algs[0].minpoly.coeffs))


# -- Psi at a real height ------------------------------------------------------

def _psi_iv(psi: ApproximationFunction, height_sq: int):
    """Interval for Psi(sqrt(height_sq)); None encodes +infinity."""
    f, p = psi.family, psi.params
    if f == "constant":
        return iv.mpf(p[0].numerator) / p[0].denominator
    if f == "table":
        q = math.isqrt(height_sq)
        v = p[q - 1] if q - 1 < len(p) else Fraction(0)
        return iv.mpf(v.numerator) / v.denominator
    h = iv.sqrt(iv.mpf(height_sq))
    if f == "power":
        e, s = p
        return iv.mpf(s.numerator) / s.denominator * iv.exp(-(iv.mpf(e.numerator) / e.denominator) * iv.log(h))
    a, b = p
    if height_sq == 1 and a > 0:
        return None
    lg = iv.log(h)
    return 1 / (iv.exp(iv.mpf(b.numerator) / b.denominator * lg) * iv.exp(iv.mpf(a.numerator) / a.denominator * iv.log(lg)))


def _psi_exact_sq(psi: ApproximationFunction, height_sq: int) -> Fraction | None:
    """Psi(h)^2 as a rational when that is possible."""
    f, p = psi.family, psi.params
    if f == "constant":
        return p[0] ** 2
    if f == "power" and p[0].denominator == 1:
        return p[1] ** 2 * Fraction(height_sq) ** -int(p[0])
    if f == "table":
        q = math.isqrt(height_sq)
        v = p[q - 1] if q - 1 < len(p) else Fraction(0)
        return v * v
    return None


def psi_float(psi: ApproximationFunction, height_sq: np.ndarray) -> np.ndarray:
    """Vectorised Psi(sqrt(height_sq)) in double precision."""
    hs = np.asarray(height_sq, dtype=np.int64)
    f, p = psi.family, psi.params
    if f == "constant":
        return np.full(hs.shape, float(p[0]))
    if f == "table":
        q = np.array([math.isqrt(int(x)) for x in hs.ravel()]).reshape(hs.shape)
        vals = np.array([float(v) for v in p] + [0.0])
        return vals[np.minimum(q - 1, len(p))]
    h = np.sqrt(hs.astype(float))
    if f == "power":
        return float(p[1]) * h ** -float(p[0])
    a, b = float(p[0]), float(p[1])
    with np.errstate(divide="ignore"):
        return np.where(hs == 1, np.inf if a > 0 else 1.0, 1.0 / (h**b * np.log(h) ** a))


# -- the certified test --------------------------------------------------------

def _leibniz_det(M):
    n = len(M)
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = M[0][perm[0]]
        for r in range(1, n):
            term = term * M[r][perm[r]]
        total = total - term if inv % 2 else total + term
    return total


def _as_vector(lam) -> tuple[int, ...]:
    if isinstance(lam, RationalLine):
        return lam.q
    v = tuple(int(c) for c in lam)
    if not any(v):
        raise ValueError("zero vector")
    return v


def _exact_test(lines: AlgebraicLineTuple, q: tuple[int, ...], psi: ApproximationFunction) -> str | None:
    """Squared comparison in rational arithmetic for rational tuples."""
    X = lines.directions_exact()
    det = _leibniz_det(X)
    if det == 0:
        raise ValueError("lines are linearly dependent")
    psi2 = _psi_exact_sq(psi, sum(c * c for c in q))
    if psi2 is None:
        return None
    hs = sum(c * c for c in q)
    norms = [sum(x * x for x in row) for row in X]
    lhs = Fraction(1)
    for row, nr in zip(X, norms):
        dot = sum(x * c for x, c in zip(row, q))
        lhs *= Fraction(dot * dot) / (nr * hs)
    xi2 = Fraction(det * det)
    for nr in norms:
        xi2 /= nr
    rhs = xi2 * psi2 / Fraction(hs) ** len(q)
    return SATISFIED if lhs <= rhs else VIOLATED


def subspace_test(lines: AlgebraicLineTuple, lam, psi: ApproximationFunction) -> str:
    """Certified decision of the generalised subspace inequality for one
    rational line.  Returns 'satisfied', 'violated' or 'indeterminate'."""
    q = _as_vector(lam)
    if len(q) != lines.n:
        raise ValueError("dimension mismatch between lines and Lambda")
    if lines.is_rational:
        out = _exact_test(lines, q, psi)
        if out is not None:
            return out
    zero_delta = any(_dot_is_zero(lines, i, q) for i in range(lines.n))
    hs = sum(c * c for c in q)
    for bits in REFINE_BITS:
        old = iv.prec
        iv.prec = bits + 64
        try:
            X = lines.directions_iv(Fraction(1, 2**bits))
            det = _leibniz_det(X)
            norms = [iv.sqrt(sum((x * x for x in row), iv.mpf(0))) for row in X]
            xi = abs(det)
            for nr in norms:
                xi = xi / nr
            if bits == REFINE_BITS[-1] and xi.a <= 0:
                raise ValueError("lines are numerically dependent at the refinement limit")
            if xi.a <= 0:
                continue
            if zero_delta:
                return SATISFIED
            psi_v = _psi_iv(psi, hs)
            if psi_v is None:
                return SATISFIED
            qn = iv.sqrt(iv.mpf(hs))
            lhs = iv.mpf(1)
            for row, nr in zip(X, norms):
                dot = sum((x * c for x, c in zip(row, q)), iv.mpf(0))
                lhs = lhs * abs(dot) / (nr * qn)
            rhs = xi * psi_v / qn ** lines.n
            if lhs.b <= rhs.a:
                return SATISFIED
            if lhs.a > rhs.b:
                return VIOLATED
        finally:
            iv.prec = old
    return INDETERMINATE


def _float_sides(dirs: np.ndarray, Q: np.ndarray, psi_vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """LHS and RHS of the inequality for one tuple against many lines."""
    U = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    qn = np.sqrt(np.sum(Q * Q, axis=1))
    delta = np.abs(Q @ U.T) / qn[:, None]
    lhs = np.prod(delta, axis=1)
    xi = abs(np.linalg.det(U))
    n = dirs.shape[0]
    rhs = xi * psi_vals / qn**n
    return lhs, rhs


def _float_verdict(lhs: np.ndarray, rhs: np.ndarray, small_delta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(clearly satisfied, undecided in double precision)."""
    gap = FLOAT_TOL * (lhs + np.where(np.isfinite(rhs), rhs, 0)) + 1e-300
    sat = (lhs < rhs - gap) | np.isinf(rhs)
    viol = lhs > rhs + gap
    border = ~(sat | viol) | (small_delta & ~sat)
    return sat, border


# -- solution search -----------------------------------------------------------

def _height_sq_limit(Q) -> int:
    Q = Fraction(Q)
    return math.floor(Q * Q)


def find_solutions(lines: AlgebraicLineTuple, psi: ApproximationFunction, Qmax, budget: int | None = None) -> list[tuple[RationalLine, float]]:
    """All rational lines of height <= Qmax satisfying the inequality,
    sorted by height.  Undecidable cases are left out."""
    kw = {} if budget is None else {"budget": budget}
    cands = enumerate_rational_lines(lines.n, _height_sq_limit(Qmax), **kw)
    if not cands:
        return []
    Q = np.array([c.q for c in cands], dtype=float)
    hs = np.array([c.height_sq for c in cands])
    lhs, rhs = _float_sides(lines.directions_float(), Q, psi_float(psi, hs))
    U = lines.directions_float()
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    small = (np.abs(Q @ U.T) / np.sqrt(hs)[:, None]).min(axis=1) < 1e-9
    sat, border = _float_verdict(lhs, rhs, small)
    out = []
    for idx, L in enumerate(cands):
        if border[idx]:
            if subspace_test(lines, L, psi) == SATISFIED:
                out.append(L)
        elif sat[idx]:
            out.append(L)
    return [(L, L.height) for L in out]


def find_witness(lines: AlgebraicLineTuple, psi: ApproximationFunction, k: int, Q1, Q2,
                 solutions: list[tuple[RationalLine, float]] | None = None):
    """A subspace of dimension k with height >= Q1 spanned by k independent
    solutions of height <= Q2, with those solutions; None if there is none."""
    n = lines.n
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    if solutions is None:
        solutions = find_solutions(lines, psi, Q2)
    q1_sq = Fraction(Q1) ** 2
    sols = [L for L, _ in solutions]
    if k == 1:
        for L in sols:
            if L.height_sq >= q1_sq:
                return RationalSubspace.span([L.q]), [L]
        return None
    total = math.comb(len(sols), k)
    if total > COMBO_BUDGET:
        raise BudgetExceeded(f"{total} {k}-subsets of solutions exceed budget {COMBO_BUDGET}")
    for combo in itertools.combinations(sols, k):
        vecs = [L.q for L in combo]
        if _rank(vecs) < k:
            continue
        sub = RationalSubspace.span(vecs)
        if sub.height_sq >= q1_sq:
            return sub, list(combo)
    return None


def membership_J(lines: AlgebraicLineTuple, psi: ApproximationFunction, k: int, Q1, Q2) -> bool:
    """Finite membership condition: some k-dimensional rational subspace of
    height >= Q1 contains k independent solutions of height <= Q2."""
    return find_witness(lines, psi, k, Q1, Q2) is not None


# -- fiber volumes -------------------------------------------------------------

@dataclass(frozen=True)
class FiberSpec:
    base: tuple[float, ...]
    eta: float
    n: int

    def __post_init__(self):
        if not 0 < self.eta < 0.5:
            raise ValueError("eta must lie in (0, 1/2)")
        if self.n < 2 or len(self.base) != self.n - 1:
            raise ValueError("base must be a stereographic vector in R^(n-1)")
        if sum(x * x for x in self.base) >= 1:
            raise ValueError("base must lie in the open unit ball")


class FiberEstimate(NamedTuple):
    estimate: float
    stderr: float


def ball_volume(m: int) -> float:
    return math.pi ** (m / 2) / math.gamma(m / 2 + 1)


def fiber_bound(n: int, eta: float) -> float:
    """M2(sigma, n) * eta * |log eta|^(n-1)."""
    return float(K.M2(n)) * eta * abs(math.log(eta)) ** (n - 1)


def _ball_samples(rng: np.random.Generator, size: int, n: int, m: int) -> np.ndarray:
    if m == 1:
        return rng.uniform(-1.0, 1.0, size=(size, n, 1))
    g = rng.standard_normal((size, n, m))
    g /= np.linalg.norm(g, axis=2, keepdims=True)
    return g * rng.random((size, n, 1)) ** (1.0 / m)


def _stereo_dirs(s: np.ndarray) -> np.ndarray:
    sq = np.sum(s * s, axis=-1, keepdims=True)
    return np.concatenate([1.0 - sq, 2.0 * s], axis=-1)


def fiber_volume_mc(spec: FiberSpec, samples: int = 10**6, seed: int = 0, chunk: int = 1 << 17) -> FiberEstimate:
    """Monte-Carlo volume of the set of n-tuples in the ball whose
    hyperplane-distance product to the base line is <= xi * eta.

    Chunk c draws from Philox keyed by (seed, c), so runs with the same seed
    share samples and the estimate is monotone in eta.
    """
    n, m = spec.n, spec.n - 1
    y = _stereo_dirs(np.array(spec.base, dtype=float))
    y /= np.linalg.norm(y)
    hits = 0
    done = 0
    c = 0
    while done < samples:
        size = min(chunk, samples - done)
        rng = np.random.Generator(np.random.Philox(key=(c << 64) | seed))
        X = _stereo_dirs(_ball_samples(rng, size, n, m))
        X /= np.linalg.norm(X, axis=2, keepdims=True)
        lhs = np.prod(np.abs(X @ y), axis=1)
        xi = np.abs(np.linalg.det(X))
        hits += int(np.count_nonzero(lhs <= xi * spec.eta))
        done += size
        c += 1
    vol = ball_volume(m) ** n
    p = hits / samples
    var = p * (1 - p) if hits else 1.0 / samples
    return FiberEstimate(vol * p, vol * math.sqrt(var / samples))


# -- the effective bound ---------------------------------------------------------

def _family_shape(psi: ApproximationFunction, n: int) -> tuple[Fraction, Fraction, Fraction] | None:
    """Summand Psi(Q) (log Q)^(n-1) / Q as scale * Q^(-beta-1) (log Q)^mu."""
    f, p = psi.family, psi.params
    if f == "power":
        return p[1], p[0], Fraction(n - 1)
    if f == "constant":
        return p[0], Fraction(0), Fraction(n - 1)
    if f == "logpower":
        return Fraction(1), p[1], Fraction(n - 1) - p[0]
    return None


def is_convergent(psi: ApproximationFunction, n: int) -> bool:
    """Whether sum Psi(Q)/Q (log Q)^(n-1) converges."""
    shape = _family_shape(psi, n)
    if shape is None:
        return True
    scale, beta, mu = shape
    return scale == 0 or beta > 0 or mu < -1


def _integral(beta: Fraction, mu: Fraction, u_lo, u_hi):
    """int_{u_lo}^{u_hi} e^(-beta u) u^mu du, u_hi = None meaning infinity."""
    b, m = mpmath.mpf(beta.numerator) / beta.denominator, mpmath.mpf(mu.numerator) / mu.denominator
    if beta == 0:
        if mu == -1:
            if u_hi is None:
                return mpmath.inf
            return mpmath.log(u_hi / u_lo)
        if u_hi is None:
            if mu > -1:
                return mpmath.inf
            return -u_lo ** (m + 1) / (m + 1)
        return (u_hi ** (m + 1) - u_lo ** (m + 1)) / (m + 1)
    top = 0 if u_hi is None else b * u_hi
    if u_lo * b > mpmath.mpf(2) ** 64:
        # far tail: e^(-beta u) underflows any representable scale
        return mpmath.mpf(0)
    return mpmath.gammainc(m + 1, b * u_lo, mpmath.inf if u_hi is None else top) / b ** (m + 1)


def _summand(scale, beta, mu, u):
    """scale * e^(-(beta+1) u) u^mu with u = log Q."""
    s = mpmath.mpf(scale.numerator) / scale.denominator
    if u > 10**6:
        return mpmath.mpf(2) ** -(10**6) * s
    return s * mpmath.exp(-(mpmath.mpf(beta.numerator) / beta.denominator + 1) * u) * u ** (mpmath.mpf(mu.numerator) / mu.denominator)


def _tail_bounds(psi: ApproximationFunction, n: int, lnA, lnB) -> tuple:
    """Enclosure of sum_{A <= Q <= B} of the summand when it is decreasing
    from A on; lnA, lnB are iv intervals, lnB None for an infinite range."""
    scale, beta, mu = _family_shape(psi, n)
    if scale == 0:
        return mpmath.mpf(0), mpmath.mpf(0)
    s = mpmath.mpf(scale.numerator) / scale.denominator
    ua_lo, ua_hi = mpmath.mpf(lnA.a), mpmath.mpf(lnA.b)
    # log(A + 1) - log(A) <= 1/A
    bump = mpmath.exp(-ua_lo) if ua_lo < 10**6 else mpmath.mpf(2) ** -(10**6)
    ub_lo = None if lnB is None else mpmath.mpf(lnB.a)
    ub_hi = None if lnB is None else mpmath.mpf(lnB.b)
    lo = s * _integral(beta, mu, ua_hi + bump, ub_lo)
    hi = _summand(scale, beta, mu, ua_lo) + s * _integral(beta, mu, ua_lo, ub_hi)
    return max(lo, mpmath.mpf(0)), hi


def _decreasing_from(beta: Fraction, mu: Fraction) -> int:
    """An integer Q0 with the summand decreasing on [Q0, infinity)."""
    if mu <= 0:
        return 2
    return math.floor(math.exp(float(mu / (beta + 1)))) + 2


def _series_bounds(psi: ApproximationFunction, n: int, start: int, end: int | None, explicit: int = 2000) -> tuple:
    """Enclosure of sum_{start <= Q <= end} Psi(Q)/Q (log Q)^(n-1)."""
    if end is not None and end < start:
        return mpmath.mpf(0), mpmath.mpf(0)
    shape = _family_shape(psi, n)
    if shape is None:
        end = min(end if end is not None else len(psi.params), len(psi.params))
        t = end + 1
    else:
        scale, beta, mu = shape
        t = max(start, _decreasing_from(beta, mu)) + explicit
        if end is not None:
            t = min(t, end + 1)
    if psi.family == "logpower" and start < 2:
        raise ValueError("log-power Psi is undefined at Q = 1")
    lo = hi = mpmath.mpf(0)
    with K._prec():
        for Q in range(start, t):
            term = _psi_iv(psi, Q * Q) * iv.log(Q) ** (n - 1) / Q
            lo += mpmath.mpf(term.a)
            hi += mpmath.mpf(term.b)
    if end is None or t <= end:
        lnA = iv.log(iv.mpf(t))
        lnB = None if end is None else iv.log(iv.mpf(end))
        a, b = _tail_bounds(psi, n, lnA, lnB)
        lo, hi = lo + a, hi + b
    return lo, hi


def _to_constant(lo, hi, expr: str) -> BigConstant:
    if hi == 0:
        return BigConstant.of(0, expr)
    if lo <= 0:
        # only an upper bound is available
        return BigConstant.from_interval(hi, hi, expr + " (upper)")
    return BigConstant.from_interval(lo, hi, expr)


def _height_term(degrees: Sequence[int], H: Sequence[int]) -> BigConstant:
    """max_j (log H_j)^l(d_j) / H_j."""
    terms = []
    for d, h in zip(degrees, H):
        if h < 1:
            raise ValueError("heights must be positive")
        lv = 1 if d == 2 else 0
        if lv == 0:
            terms.append(BigConstant.of(Fraction(1, h)))
        elif h == 1:
            terms.append(BigConstant.of(0))
        else:
            with K._prec():
                terms.append(BigConstant.from_iv(iv.log(h) / h, f"log({h})/{h}"))
    return K.hull_max(*terms)


def summation_start(Q1, k: int, omega_factor: bool = True):
    """Lower end 2 (Q1/(k! omega_k))^(1/k) as an iv interval (omega_k dropped
    when omega_factor is False)."""
    with K._prec():
        den = iv.mpf(math.factorial(k))
        if omega_factor:
            den = den * K.omega(k).interval()
        return 2 * iv.exp(iv.log(iv.mpf(Q1) / den) / k)


@dataclass
class LimitSumReport:
    degrees: tuple[int, ...]
    k: int
    n: int
    psi: str
    Q1: int
    Q2: int | None
    H: tuple[int, ...] | None
    C: BigConstant
    start: int
    sum_term: BigConstant
    height_term: BigConstant
    bound: BigConstant
    flags: dict

    def to_dict(self) -> dict:
        return {
            "degrees": list(self.degrees), "k": self.k, "n": self.n, "psi": self.psi,
            "Q1": self.Q1, "Q2": self.Q2, "H": None if self.H is None else list(self.H),
            "C": self.C.to_dict(80), "summation_start": self.start,
            "sum_term": self.sum_term.to_dict(80), "height_term": self.height_term.to_dict(80),
            "bound": self.bound.to_dict(80), "flags": dict(self.flags),
        }


def limit_sum_bound(d: Sequence[int], k: int, n: int, psi: ApproximationFunction, Q1: int, Q2: int | None,
              H: Sequence[int] | None, C: BigConstant | None = None) -> LimitSumReport:
    """Certified value of C_n(d, sigma) * (series + Q2^n max_j (log H_j)^l(d_j) / H_j).

    Q2 = None sums the series to infinity; H = None is the limit of large
    heights (the second term vanishes).  The degree vector may have n - 1 or
    n entries.
    """
    d = tuple(int(x) for x in d)
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    if Q1 < 1:
        raise ValueError("Q1 >= 1")
    if H is not None and Q2 is None:
        raise ValueError("a finite height term needs a finite Q2")
    C = K.C_n(d, n) if C is None else C
    a = summation_start(Q1, k)
    start = Q1 if k == 1 else int(mpmath.ceil(a.a))
    if k != 1 and int(mpmath.ceil(a.b)) != start:
        raise ValueError("summation start is not certified; raise precision")
    flags = {
        "convergent": is_convergent(psi, n),
        "Q2_admissible": None if Q2 is None else True if Q2 >= a.b else False if Q2 < a.a else None,
    }
    hi_sample = start + 1000 if Q2 is None else min(Q2, start + 1000)
    if start <= hi_sample:
        qs = np.arange(max(start, 2), hi_sample + 1)
        flags["psi_at_least_Q^-n"] = bool(np.all(psi_float(psi, qs * qs) >= qs.astype(float) ** -n * (1 - 1e-12)))
    lo, hi = _series_bounds(psi, n, start, Q2)
    if hi == mpmath.inf:
        raise ValueError("the series diverges on an infinite range")
    series = _to_constant(lo, hi, "series")
    if H is None:
        height = BigConstant.of(0, "0")
    else:
        H = tuple(int(h) for h in H)
        height = BigConstant.of(Q2**n) * _height_term(d, H)
    bound = C * (series + height)
    return LimitSumReport(d, k, n, str(psi), Q1, Q2, H, C, start, series, height, bound.with_expr("limit-sum bound"), flags)


# -- audit of the numerical illustration ---------------------------------------

def _status(lhs: BigConstant, threshold: BigConstant) -> str:
    c = compare(lhs, threshold)
    if c == "indeterminate":
        return "indeterminate - raise precision"
    return "pass" if c in ("less", "equal") else "fail"


def _nstr(x) -> str:
    return mpmath.nstr(mpmath.mpf(x.a) if hasattr(x, "a") else x, 30)


def subspace_illustration_audit() -> dict:
    """Recompute the n = 3, degrees (3,3,3), Psi = 1/(log Q)^4 illustration.

    Here ln C3 itself is about 10^(5e18), so Q1 = c e^{C3} only exists through
    ln ln Q1.  For this Psi the series tail from A is squeezed between
    1/log(A+1) and 1/log A + 1/(A log^2 A), and log A = (C3 + c0)/k for an
    explicit small c0, so C3 times the tail equals k / (1 + c0/C3) up to
    terms below 2^-10000.  Both the dimension k = 2 (the largest allowed for
    n = 3) and the literal k = 3 are evaluated.
    """
    n, degrees = 3, (3, 3, 3)
    psi = ApproximationFunction.logpower(4, 0)
    C3 = K.C_n(degrees, n)
    lnC3 = C3.ln
    if not lnC3.a > 10**4:
        raise RuntimeError("the asymptotic evaluation assumes ln C3 > 10^4")
    items = []
    with K._prec():
        # |c0| / C3 and the head term are both below this
        eps = iv.mpf(2) ** -10000

        def c0(factor: int, k: int, with_omega: bool):
            den = iv.log(math.factorial(k))
            if with_omega:
                den = den + iv.log(K.omega(k).interval())
            return iv.log(factor) - den + k * iv.log(2)

        for factor, pct in ((60, Fraction(5, 100)), (51, Fraction(6, 100))):
            for k in (2, 3):
                c = c0(factor, k, False)
                rel = abs(c) * eps
                # C3 / log(A) = k / (1 + c0/C3); the lower tail uses log(A+1)
                lo = k / (1 + rel) * (1 - eps)
                hi = k / (1 - rel) + eps
                bound = BigConstant.from_interval(lo.a, hi.b, f"C3 * tail, k = {k}")
                items.append({
                    "name": f"large-H, large-Q2 limit bound <= {int(pct * 100)}% at Q1 = {factor} e^C3 (k = {k})",
                    "ln_ln_Q1": _nstr(lnC3),
                    "c0": _nstr(c),
                    "bound": bound.to_dict(80),
                    "note": "C3 times the tail tends to k for every Q1 = c e^C3; pushing it below p needs log Q1 of order k C3 / p",
                    "status": _status(bound, BigConstant.of(pct)),
                })
        for k in (2, 3):
            c = c0(60, k, True)
            # ln ln Q2 for the smallest admissible Q2 = 2 (Q1/(k! omega_k))^(1/k)
            lnlnQ2 = lnC3 - iv.log(k) + iv.log(1 + iv.mpf([-1, 1]) * abs(c) * eps)
            # with H = 150 C3 Q2^2 and l(3) = 0 the height term is Q2/150; bound >= Q2/150
            # and Q2/150 > 8/100 iff ln ln Q2 > ln ln 12
            threshold = iv.log(iv.log(iv.mpf(150) * 8 / 100))
            status = "fail" if lnlnQ2.a > threshold.b else "pass" if lnlnQ2.b < threshold.a else "indeterminate - raise precision"
            items.append({
                "name": f"finite-H bound <= 8% at H = 150 C3 Q2^2, Q1 = 60 e^C3, smallest admissible Q2 (k = {k})",
                "ln_ln_Q2": _nstr(lnlnQ2),
                "lower_bound": "C3 * Q2^3 / H = Q2 / 150",
                "ln_ln_threshold": _nstr(threshold),
                "note": "the height term grows with Q2, so the smallest admissible Q2 is the most favourable",
                "status": status,
            })
    return {"n": n, "degrees": list(degrees), "psi": str(psi), "C3": C3.to_dict(80), "items": items}


# -- empirical proportions -------------------------------------------------------

def _negate(a: AlgebraicNumber) -> AlgebraicNumber:
    cs = [c if i % 2 == 0 else -c for i, c in enumerate(a.minpoly.coeffs)]
    if cs[-1] < 0:
        cs = [-c for c in cs]
    iso = a.isolation
    return AlgebraicNumber(IntPolynomial(cs), RootInterval(-iso.hi, -iso.lo))


class BallCensus(NamedTuple):
    values: np.ndarray  # polished float positions
    census: object
    sign: np.ndarray  # +1 / -1 per value
    index: np.ndarray  # census index per value

    def number(self, i: int) -> AlgebraicNumber:
        a = self.census.number(int(self.index[i]))
        return a if self.sign[i] > 0 else _negate(a)


def _polish(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    P = coeffs[:, ::-1].astype(float)
    dP = P[:, :-1] * np.arange(P.shape[1] - 1, 0, -1)
    for _ in range(3):
        f = np.zeros_like(x)
        g = np.zeros_like(x)
        for j in range(P.shape[1]):
            f = f * x + P[:, j]
        for j in range(dP.shape[1]):
            g = g * x + dP[:, j]
        x = x - f / g
    return x


def ball_census(d: int, H: int) -> BallCensus:
    """Algebraic numbers of degree d and height <= H in (-1, 1)."""
    c = enumerate_census(CensusSpec(d, H, "Restricted"))
    x = _polish(c.coeffs, c.points())
    idx = np.arange(len(x))
    keep = np.abs(x) < 1
    x, idx = x[keep], idx[keep]
    vals = np.concatenate([x, -x])
    sign = np.concatenate([np.ones(len(x), int), -np.ones(len(x), int)])
    return BallCensus(vals, c, sign, np.concatenate([idx, idx]))


@dataclass
class RatioEstimate:
    ratio: float
    lo: float
    hi: float
    hits: int
    total: int
    exact: bool
    undecided: int = 0
    exact_ratio: Fraction | None = None

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("ratio", "lo", "hi", "hits", "total", "exact", "undecided")}
        out["exact_ratio"] = None if self.exact_ratio is None else str(self.exact_ratio)
        return out


def _wilson(h: int, t: int, z: float = 1.96) -> tuple[float, float]:
    if t == 0:
        return 0.0, 1.0
    p = h / t
    den = 1 + z * z / t
    mid = (p + z * z / (2 * t)) / den
    half = z * math.sqrt(p * (1 - p) / t + z * z / (4 * t * t)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


def _lines_in_range(n: int, Q1, Q2) -> list[RationalLine]:
    q1 = Fraction(Q1) ** 2
    return [L for L in enumerate_rational_lines(n, _height_sq_limit(Q2)) if L.height_sq >= q1]


def _ratio_n2(P: BallCensus, psi: ApproximationFunction, Q1, Q2, row_budget: int = 1 << 22) -> RatioEstimate:
    """Exhaustive count over ordered pairs of distinct lines (k = 1)."""
    N = len(P.values)
    total = N * (N - 1)
    if N < 2:
        return RatioEstimate(0.0, 0.0, 0.0, 0, total, True, 0, Fraction(0))
    s = P.values
    U = np.stack([1 - s * s, 2 * s], axis=1)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    bits = np.zeros((N * N + 7) // 8, dtype=np.uint8)

    def mark(i: np.ndarray, j: np.ndarray) -> None:
        a, b = np.minimum(i, j), np.maximum(i, j)
        code = a.astype(np.int64) * N + b
        np.bitwise_or.at(bits, code >> 3, (1 << (code & 7)).astype(np.uint8))

    border: list[tuple[int, int, RationalLine]] = []
    everything = np.arange(N)
    for L in _lines_in_range(2, Q1, Q2):
        q = np.array(L.q, dtype=float) / math.sqrt(L.height_sq)
        a = np.abs(U @ q)
        c = float(psi_float(psi, np.array([L.height_sq]))[0]) / L.height_sq
        tiny = np.nonzero(a < 1e-9)[0]
        for i in tiny:
            lines = AlgebraicLineTuple.from_stereo([[P.number(int(i))], [Fraction(0)]])
            others = everything[everything != i]
            if _dot_is_zero(lines, 0, L.q):
                mark(np.full(len(others), i), others)
            else:
                border.extend((int(i), int(j), L) for j in others)
        if c == 0:
            continue
        order = np.argsort(a, kind="stable")
        a_sorted = a[order]
        rows = order[(a_sorted <= math.sqrt(c) * (1 + FLOAT_TOL)) & (a_sorted >= 1e-9)]
        if math.isinf(c):
            rows = everything
        pos = 0
        while pos < len(rows):
            lim = np.searchsorted(a_sorted, c * (1 + FLOAT_TOL) / a[rows[pos]], "right") if not math.isinf(c) else N
            step = max(1, row_budget // max(lim, 1))
            chunk = rows[pos:pos + step]
            J = order[:lim]
            J = J[a[J] >= 1e-9]
            lhs = a[chunk][:, None] * a[J][None, :]
            xi = np.abs(U[chunk, 0][:, None] * U[J, 1][None, :] - U[chunk, 1][:, None] * U[J, 0][None, :])
            rhs = c * xi
            gap = FLOAT_TOL * (lhs + rhs) + 1e-300
            ok = (lhs < rhs - gap) | math.isinf(c)
            unsure = ~ok & (lhs <= rhs + gap)
            diff = chunk[:, None] != J[None, :]
            ii, jj = np.nonzero(ok & diff)
            mark(chunk[ii], J[jj])
            ii, jj = np.nonzero(unsure & diff)
            border.extend((int(chunk[x]), int(J[y]), L) for x, y in zip(ii, jj))
            pos += step
    undecided = 0
    seen = set()
    for i, j, L in border:
        a_, b_ = min(i, j), max(i, j)
        code = a_ * N + b_
        if bits[code >> 3] >> (code & 7) & 1 or (a_, b_, L) in seen:
            continue
        seen.add((a_, b_, L))
        lines = AlgebraicLineTuple.from_stereo([[P.number(a_)], [P.number(b_)]])
        verdict = subspace_test(lines, L, psi)
        if verdict == SATISFIED:
            bits[code >> 3] |= np.uint8(1 << (code & 7))
        elif verdict == INDETERMINATE:
            undecided += 1
    hits = 2 * int(np.bitwise_count(bits).sum())
    r = Fraction(hits, total)
    return RatioEstimate(float(r), float(r), float(r), hits, total, True, undecided, r)


def _member_sampled(lines: AlgebraicLineTuple, dirs: np.ndarray, cand: list[RationalLine], Qarr: np.ndarray,
                    psi_vals: np.ndarray, hs: np.ndarray, psi: ApproximationFunction, k: int, Q1) -> bool:
    lhs, rhs = _float_sides(dirs, Qarr, psi_vals)
    U = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    small = (np.abs(Qarr @ U.T) / np.sqrt(hs)[:, None]).min(axis=1) < 1e-9
    sat, border = _float_verdict(lhs, rhs, small)
    for idx in np.nonzero(border)[0]:
        sat[idx] = subspace_test(lines, cand[idx], psi) == SATISFIED
    sols = [(cand[i], cand[i].height) for i in np.nonzero(sat)[0]]
    return find_witness(lines, psi, k, Q1, None, solutions=sols) is not None


def empirical_ratio(d: Sequence[int], k: int, psi: ApproximationFunction, Q1, Q2, H: Sequence[int],
                    n: int | None = None, samples: int = 2000, seed: int = 0) -> RatioEstimate:
    """Proportion of n-tuples of distinct lines with stereographic coordinates
    in the census product (restricted to the unit ball) that lie in the
    approximation set.  Exhaustive for n = 2, sampled otherwise."""
    d = tuple(int(x) for x in d)
    H = tuple(int(h) for h in H)
    n = len(d) + 1 if n is None else n
    if len(d) != n - 1 or len(H) != n - 1:
        raise ValueError("need n - 1 degrees and heights")
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    if n == 2:
        return _ratio_n2(ball_census(d[0], H[0]), psi, Q1, Q2)
    parts = [ball_census(dj, hj) for dj, hj in zip(d, H)]
    grids = np.meshgrid(*[np.arange(len(p.values)) for p in parts], indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)
    coords = np.stack([p.values[idx[:, j]] for j, p in enumerate(parts)], axis=1)
    inside = np.sum(coords * coords, axis=1) < 1 - 1e-12
    idx, coords = idx[inside], coords[inside]
    M = len(idx)
    if M < n:
        return RatioEstimate(0.0, 0.0, 0.0, 0, 0, True)
    cand = _lines_in_range(n, 1, Q2)
    Qarr = np.array([c.q for c in cand], dtype=float).reshape(-1, n)
    hs = np.array([c.height_sq for c in cand], dtype=np.int64)
    pv = psi_float(psi, hs)
    rng = np.random.Generator(np.random.Philox(key=seed))
    hits = done = 0
    while done < samples:
        pick = rng.integers(0, M, size=n)
        if len(set(pick.tolist())) < n:
            continue
        rows = []
        for r in pick:
            rows.append([parts[j].number(int(x)) for j, x in enumerate(idx[r])])
        dirs = _stereo_dirs(coords[pick])
        if abs(np.linalg.det(dirs / np.linalg.norm(dirs, axis=1, keepdims=True))) < 1e-12:
            continue
        lines = AlgebraicLineTuple.from_stereo(rows)
        if cand and _member_sampled(lines, dirs, cand, Qarr, pv, hs, psi, k, Q1):
            hits += 1
        done += 1
    lo, hi = _wilson(hits, samples)
    return RatioEstimate(hits / samples, lo, hi, hits, samples, False)
