"""Lattice points in bounded semialgebraic fibers, Davenport's bound, and
small-scale checks of the algebraic-point count asymptotics."""
from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from . import constants as K
from .algebra import IntPolynomial, is_irreducible, normalize
from .census import BudgetExceeded
from .koleda import DensityModel
from .subspace import ball_census

GRID_BUDGET = 4 * 10**6
RELATIONS = ("<", "<=", ">", ">=", "==", "!=")


# -- predicates ------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    """poly REL 0; terms are (coefficient, exponent vector)."""

    terms: tuple[tuple[Fraction, tuple[int, ...]], ...]
    rel: str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")

    @property
    def degree(self) -> int:
        return max((sum(e) for c, e in self.terms if c), default=0)

    def integer_terms(self) -> list[tuple[int, tuple[int, ...]]]:
        """Same sign pattern, integer coefficients."""
        den = reduce(math.lcm, (c.denominator for c, _ in self.terms), 1)
        return [(int(c * den), e) for c, e in self.terms if c]

    def _compare(self, v):
        r = self.rel
        if r == "<":
            return v < 0
        if r == "<=":
            return v <= 0
        if r == ">":
            return v > 0
        if r == ">=":
            return v >= 0
        if r == "==":
            return v == 0
        return v != 0

    def evaluate(self, pts: np.ndarray, exact: bool) -> np.ndarray:
        if exact:
            terms = self.integer_terms()
            big = max((abs(c) * int(np.max(np.abs(pts), initial=1)) ** sum(e) for c, e in terms), default=0)
            dtype = np.int64 if big * max(len(terms), 1) < 2**62 else object
            P = pts.astype(dtype)
            v = np.zeros(len(pts), dtype=dtype)
            for c, e in terms:
                t = np.full(len(pts), c, dtype=dtype)
                for k, ek in enumerate(e):
                    if ek:
                        t = t * P[:, k] ** ek
                v = v + t
        else:
            v = np.zeros(len(pts))
            for c, e in self.terms:
                t = np.full(len(pts), float(c))
                for k, ek in enumerate(e):
                    if ek:
                        t = t * pts[:, k] ** ek
                v = v + t
        return np.asarray(self._compare(v), dtype=bool)


@dataclass(frozen=True)
class Node:
    op: str  # "and", "or", "not", "atom", "const"
    children: tuple = ()
    atom: Atom | None = None
    value: bool = False

    def atoms(self) -> list[Atom]:
        if self.op == "atom":
            return [self.atom]
        return [a for c in self.children for a in c.atoms()]

    def evaluate(self, pts: np.ndarray, exact: bool) -> np.ndarray:
        if self.op == "const":
            return np.full(len(pts), self.value, dtype=bool)
        if self.op == "atom":
            return self.atom.evaluate(pts, exact)
        if self.op == "not":
            return ~self.children[0].evaluate(pts, exact)
        vals = [c.evaluate(pts, exact) for c in self.children]
        if self.op == "and":
            return np.logical_and.reduce(vals) if vals else np.ones(len(pts), dtype=bool)
        return np.logical_or.reduce(vals) if vals else np.zeros(len(pts), dtype=bool)

    def is_const(self) -> bool:
        return self.op == "const" or (self.op != "atom" and all(c.is_const() for c in self.children))


def parse_predicate(obj) -> Node:
    if isinstance(obj, bool):
        return Node("const", value=obj)
    if not isinstance(obj, dict) or len(obj) == 0:
        raise ValueError(f"bad predicate node {obj!r}")
    key = {k.lower(): k for k in obj}
    if "const" in key:
        return Node("const", value=bool(obj[key["const"]]))
    if "and" in key or "or" in key:
        op = "and" if "and" in key else "or"
        return Node(op, tuple(parse_predicate(c) for c in obj[key[op]]))
    if "not" in key:
        return Node("not", (parse_predicate(obj[key["not"]]),))
    if "poly" in key:
        terms = []
        for t in obj[key["poly"]]:
            if len(t) == 3:
                num, den, e = t
            else:
                (num, e), den = t, 1
            terms.append((Fraction(num, den), tuple(int(x) for x in e)))
        return Node("atom", atom=Atom(tuple(terms), obj.get("rel", "<=")))
    raise ValueError(f"bad predicate node {obj!r}")


def _dump_predicate(node: Node):
    if node.op == "const":
        return {"const": node.value}
    if node.op == "atom":
        return {"poly": [[c.numerator, c.denominator, list(e)] for c, e in node.atom.terms], "rel": node.atom.rel}
    if node.op == "not":
        return {"not": _dump_predicate(node.children[0])}
    return {node.op: [_dump_predicate(c) for c in node.children]}


@dataclass(frozen=True)
class SemialgebraicFiber:
    """A bounded set {x in box : predicate(x)}.

    s counts the polynomial relations of the description and p their maximal
    degree.  When box_constraint is set, the 2n box inequalities are part of
    the description; otherwise the predicate alone is assumed to cut out a
    subset of the box.
    """

    n: int
    box: tuple[tuple[int, ...], tuple[int, ...]]
    predicate: Node
    box_constraint: bool = False
    s: int = field(default=-1)
    p: int = field(default=-1)

    def __post_init__(self):
        lo, hi = (tuple(int(x) for x in c) for c in self.box)
        if len(lo) != self.n or len(hi) != self.n or any(a > b for a, b in zip(lo, hi)):
            raise ValueError("box corners must be n-vectors with lo <= hi")
        object.__setattr__(self, "box", (lo, hi))
        atoms = self.predicate.atoms()
        if any(len(e) != self.n for a in atoms for _, e in a.terms):
            raise ValueError("exponent vectors must have length n")
        if self.predicate.is_const() and self.predicate.evaluate(np.zeros((1, self.n)), False)[0] and not self.box_constraint:
            raise ValueError("a constant-true predicate needs the box as part of the description")
        s = len(atoms) + (2 * self.n if self.box_constraint else 0)
        p = max([a.degree for a in atoms] + [1 if self.box_constraint else 0, 1])
        for name, val in (("s", s), ("p", p)):
            declared = getattr(self, name)
            if declared == -1:
                object.__setattr__(self, name, val)
            elif declared != val:
                raise ValueError(f"declared {name} = {declared} does not match the predicate ({val})")

    # -- construction ----------------------------------------------------------
    @classmethod
    def from_dict(cls, obj: dict) -> "SemialgebraicFiber":
        return cls(int(obj["n"]), (tuple(obj["box"][0]), tuple(obj["box"][1])), parse_predicate(obj["predicate"]),
                   bool(obj.get("box_constraint", False)), int(obj.get("s", -1)), int(obj.get("p", -1)))

    @classmethod
    def from_json(cls, text: str) -> "SemialgebraicFiber":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"n": self.n, "box": [list(self.box[0]), list(self.box[1])], "predicate": _dump_predicate(self.predicate),
                "box_constraint": self.box_constraint, "s": self.s, "p": self.p}

    @classmethod
    def disk(cls, r: int, center=(0, 0)) -> "SemialgebraicFiber":
        a, b = center
        terms = [(1, (2, 0)), (1, (0, 2)), (-2 * a, (1, 0)), (-2 * b, (0, 1)), (a * a + b * b - r * r, (0, 0))]
        node = Node("atom", atom=Atom(tuple((Fraction(c), e) for c, e in terms if c), "<="))
        return cls(2, ((a - r, b - r), (a + r, b + r)), node)

    @classmethod
    def box_fiber(cls, lo: Sequence[int], hi: Sequence[int]) -> "SemialgebraicFiber":
        return cls(len(lo), (tuple(lo), tuple(hi)), Node("const", value=True), box_constraint=True)

    @classmethod
    def empty(cls, n: int = 2) -> "SemialgebraicFiber":
        return cls(n, ((0,) * n, (1,) * n), Node("const", value=False))

    # -- views -------------------------------------------------------------------
    @property
    def is_box(self) -> bool:
        return self.predicate.is_const() and bool(self.predicate.evaluate(np.zeros((1, self.n)), False)[0])

    @property
    def is_empty_predicate(self) -> bool:
        return self.predicate.is_const() and not self.is_box

    @property
    def box_volume(self) -> int:
        return math.prod(b - a for a, b in zip(*self.box))

    def contains(self, pts: np.ndarray, exact: bool = False) -> np.ndarray:
        pts = np.atleast_2d(pts)
        lo, hi = (np.array(c) for c in self.box)
        inside = np.all((pts >= lo) & (pts <= hi), axis=1)
        return inside & self.predicate.evaluate(pts, exact)


# -- counting and measuring -------------------------------------------------------

def lattice_count(f: SemialgebraicFiber, budget: int = GRID_BUDGET) -> int:
    """Exact number of integer points, by a full scan of the box."""
    lo, hi = f.box
    size = math.prod(b - a + 1 for a, b in zip(lo, hi))
    if size > budget:
        raise BudgetExceeded(f"{size} grid points exceed budget {budget}")
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.n)
    return int(np.count_nonzero(f.predicate.evaluate(grid, exact=True)))


def volume(f: SemialgebraicFiber, tol: float = 0.05, seed: int = 0, max_samples: int = 4 * 10**6) -> tuple[float, float]:
    """Monte-Carlo volume with its standard error; exact for boxes and empty
    predicates."""
    if f.is_empty_predicate:
        return 0.0, 0.0
    if f.is_box:
        return float(f.box_volume), 0.0
    V = f.box_volume
    if V == 0:
        return 0.0, 0.0
    N = int(min(max_samples, max(10_000, math.ceil(V * V / (4 * tol * tol)))))
    rng = np.random.Generator(np.random.Philox(key=seed))
    lo, hi = (np.array(c, dtype=float) for c in f.box)
    hits = 0
    done = 0
    while done < N:
        m = min(1 << 18, N - done)
        pts = lo + (hi - lo) * rng.random((m, f.n))
        hits += int(np.count_nonzero(f.predicate.evaluate(pts, exact=False)))
        done += m
    p = hits / N
    return V * p, V * math.sqrt(max(p * (1 - p), 1.0 / N) / N)


def _occupancy(f: SemialgebraicFiber, budget: int) -> tuple[np.ndarray, np.ndarray]:
    res = max(8, int(budget ** (1.0 / f.n)))
    lo, hi = (np.array(c, dtype=float) for c in f.box)
    width = (hi - lo) / res
    axes = [lo[k] + width[k] * (np.arange(res) + 0.5) for k in range(f.n)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.n)
    occ = f.predicate.evaluate(grid, exact=False).reshape((res,) * f.n)
    return occ, width


def _boundary_cells(mask: np.ndarray) -> int:
    """Cells of a boolean array with a 4-neighbour of the other value."""
    edge = np.zeros_like(mask)
    for ax in range(mask.ndim):
        diff = np.diff(mask.astype(np.int8), axis=ax) != 0
        pad_lo = [(0, 0)] * mask.ndim
        pad_hi = [(0, 0)] * mask.ndim
        pad_lo[ax] = (1, 0)
        pad_hi[ax] = (0, 1)
        edge |= np.pad(diff, pad_lo) | np.pad(diff, pad_hi)
    # cells on the outer face may also border the complement
    for ax in range(mask.ndim):
        idx = [slice(None)] * mask.ndim
        for end in (0, -1):
            idx[ax] = end
            edge[tuple(idx)] |= mask[tuple(idx)]
    return int(np.count_nonzero(edge))


def proj_measure(f: SemialgebraicFiber, j: int, budget: int = GRID_BUDGET) -> tuple[float, float]:
    """Sum over j-subsets of coordinates of the j-volume of the projection.

    V_0 is 1 for a nonempty fiber.  For boxes the value is exact; otherwise a
    cell-centre grid is projected and the boundary layer of each projection
    is returned as the error.
    """
    if not 0 <= j <= f.n:
        raise ValueError("need 0 <= j <= n")
    lo, hi = f.box
    sides = [b - a for a, b in zip(lo, hi)]
    if f.is_empty_predicate:
        return 0.0, 0.0
    if f.is_box:
        return float(sum(math.prod(sides[k] for k in S) for S in itertools.combinations(range(f.n), j))), 0.0
    occ, width = _occupancy(f, budget)
    if j == 0:
        nonempty = bool(occ.any()) or lattice_count(f) > 0
        return (1.0 if nonempty else 0.0), 0.0
    total = err = 0.0
    for S in itertools.combinations(range(f.n), j):
        other = tuple(k for k in range(f.n) if k not in S)
        proj = occ.any(axis=other) if other else occ
        cell = math.prod(width[k] for k in S)
        total += int(np.count_nonzero(proj)) * cell
        err += _boundary_cells(proj) * cell
    return float(total), float(err)


@dataclass
class DavenportReport:
    count: int
    volume: float
    volume_err: float
    V: list[float]
    V_err: list[float]
    C: int
    rhs: float
    rhs_lower: float
    lhs: float
    lhs_upper: float
    passes: bool
    slack_ratio: float
    contained: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _contained(f: SemialgebraicFiber, samples: int = 400) -> bool:
    """Sampled check that the predicate fails just outside the box."""
    if f.box_constraint or f.is_empty_predicate:
        return True
    lo, hi = (np.array(c, dtype=float) for c in f.box)
    rng = np.random.default_rng(0)
    faces = []
    for ax in range(f.n):
        for end in (lo[ax], hi[ax]):
            pts = lo + (hi - lo) * rng.random((samples, f.n))
            pts[:, ax] = end + (1e-6 * (hi[ax] - lo[ax]) + 1e-9) * (1 if end == hi[ax] else -1)
            faces.append(pts)
    return not bool(np.any(f.predicate.evaluate(np.concatenate(faces), exact=False)))


def davenport_verify(f: SemialgebraicFiber, tol: float = 0.05, seed: int = 0) -> DavenportReport:
    """|count - volume| <= sum_j C^(n-j) V_j with C = p (2p-1)^(n+s-1).

    Estimation error is charged against the inequality: three standard
    errors are added to the left side and the projection errors removed
    from the right side.
    """
    n = f.n
    count = lattice_count(f)
    vol, verr = volume(f, tol, seed)
    V, Ve = zip(*(proj_measure(f, j) for j in range(n)))
    C = int(K.davenport_C(f.p, f.s, n).exact)
    rhs = sum(C ** (n - j) * V[j] for j in range(n))
    rhs_lower = sum(C ** (n - j) * max(V[j] - Ve[j], 0.0) for j in range(n))
    lhs = abs(count - vol)
    lhs_upper = lhs + 3 * verr
    return DavenportReport(count, float(vol), float(verr), [float(v) for v in V], [float(e) for e in Ve], C,
                           float(rhs), float(rhs_lower), float(lhs), float(lhs_upper), bool(lhs_upper <= rhs_lower),
                           float(lhs / rhs) if rhs else math.inf, _contained(f))


def random_fiber(rng: np.random.Generator, kind: str = "conic", bound: int = 20) -> SemialgebraicFiber:
    """A random ellipse ("conic") or quartic oval inside [-bound, bound]^2,
    with integer coefficients."""
    if kind == "conic":
        # a (x-x0)^2 + b (x-x0)(y-y0) + c (y-y0)^2 <= r, positive definite
        while True:
            a, c = (int(v) for v in rng.integers(1, 6, size=2))
            b = int(rng.integers(-3, 4))
            if 4 * a * c - b * b > 0:
                break
        det = 4 * a * c - b * b
        # x-extent^2 = 4 c r / det, y-extent^2 = 4 a r / det
        rmax = min(det * (bound // 2) ** 2 // (4 * max(a, c)), 400)
        r = int(rng.integers(max(1, rmax // 8), max(2, rmax + 1)))
        ex = math.isqrt(4 * c * r // det) + 1
        ey = math.isqrt(4 * a * r // det) + 1
        x0 = int(rng.integers(-bound + ex, bound - ex + 1))
        y0 = int(rng.integers(-bound + ey, bound - ey + 1))
        terms = Counter()
        # expand a(x-x0)^2 + b(x-x0)(y-y0) + c(y-y0)^2 - r
        terms[(2, 0)] += a
        terms[(1, 0)] += -2 * a * x0 - b * y0
        terms[(0, 2)] += c
        terms[(0, 1)] += -2 * c * y0 - b * x0
        terms[(1, 1)] += b
        terms[(0, 0)] += a * x0 * x0 + b * x0 * y0 + c * y0 * y0 - r
        box = ((x0 - ex, y0 - ey), (x0 + ex, y0 + ey))
    elif kind == "quartic":
        # (x-x0)^4 / A + (y-y0)^4 / B + k (x-x0)^2 (y-y0)^2 <= 1 scaled by A B, k >= 0
        ra, rb = (int(v) for v in rng.integers(2, bound // 2, size=2))
        k = int(rng.integers(0, 3))
        A, B = ra**4, rb**4
        x0 = int(rng.integers(-bound + ra, bound - ra + 1))
        y0 = int(rng.integers(-bound + rb, bound - rb + 1))
        terms = Counter()
        for i in range(5):
            terms[(i, 0)] += B * math.comb(4, i) * (-x0) ** (4 - i)
            terms[(0, i)] += A * math.comb(4, i) * (-y0) ** (4 - i)
        for i in range(3):
            for jj in range(3):
                terms[(i, jj)] += k * A * B // (ra * ra * rb * rb) * math.comb(2, i) * (-x0) ** (2 - i) * math.comb(2, jj) * (-y0) ** (2 - jj)
        terms[(0, 0)] -= A * B
        box = ((x0 - ra, y0 - rb), (x0 + ra, y0 + rb))
    else:
        raise ValueError("kind must be 'conic' or 'quartic'")
    atom = Atom(tuple((Fraction(v), e) for e, v in sorted(terms.items()) if v), "<=")
    return SemialgebraicFiber(2, box, Node("atom", atom=atom))


# -- algebraic points in fibers --------------------------------------------------

@dataclass
class MultiplicityCount:
    """nu -> number of minimal polynomials with exactly nu roots in the fiber."""

    counts: dict[int, int]
    total_points: int

    @property
    def weighted_sum(self) -> int:
        return sum(nu * c for nu, c in self.counts.items())

    @property
    def consistent(self) -> bool:
        return self.weighted_sum == self.total_points

    def to_dict(self) -> dict:
        return {"counts": {str(k): v for k, v in sorted(self.counts.items())}, "total_points": self.total_points,
                "weighted_sum": self.weighted_sum, "consistent": self.consistent}


def reducible_count(d: int, H: int) -> int:
    """Integer polynomials of degree exactly d, height <= H, reducible over Q."""
    if d < 2 or H < 1:
        raise ValueError("need d >= 2 and H >= 1")
    r = np.arange(-H, H + 1, dtype=np.int64)
    if d == 2:
        a0, a1, a2 = np.meshgrid(r, r, r[r != 0], indexing="ij")
        disc = a1 * a1 - 4 * a0 * a2
        ok = disc >= 0
        root = np.zeros_like(disc)
        root[ok] = np.round(np.sqrt(disc[ok].astype(float))).astype(np.int64)
        # correct the float square root
        for _ in range(2):
            root = np.where(root * root > disc, root - 1, root)
            root = np.where((root + 1) ** 2 <= disc, root + 1, root)
        return int(np.count_nonzero(ok & (root * root == disc)))
    n = 0
    for cs in itertools.product(range(-H, H + 1), repeat=d + 1):
        if cs[-1] == 0:
            continue
        # content is a unit over Q
        if cs[0] == 0 or not is_irreducible(normalize(IntPolynomial(list(cs)))):
            n += 1
    return n


def reducible_bound(d: int, H: int) -> float:
    """E1(d) H^d (log H)^l(d)."""
    lv = 1 if d == 2 else 0
    return float(K.E1(d).exact) * H**d * math.log(H) ** lv


def _algebraic_points(d: int, H: int, lo: float, hi: float):
    """Polished values and minimal polynomials of A_d(H) within [lo, hi] subset of [-1, 1]."""
    if lo < -1 or hi > 1:
        raise ValueError("fibers for the algebraic-point check must lie in [-1, 1]^n")
    P = ball_census(d, H)
    keep = (P.values >= lo) & (P.values <= hi)
    coeffs = P.census.coeffs[P.index]
    neg = P.sign < 0
    coeffs = coeffs.copy()
    coeffs[neg] = coeffs[neg] * np.where(np.arange(coeffs.shape[1]) % 2 == 1, -1, 1)
    flip = coeffs[:, -1] < 0
    coeffs[flip] = -coeffs[flip]
    return P.values[keep], coeffs[keep]


@dataclass
class AlgebraicPointsReport:
    d: int
    n: int
    H: int
    count: int
    normalised: float
    integral: float
    integral_err: float
    deviation: float
    relative_deviation: float
    multiplicity: MultiplicityCount | None
    reducible: int | None
    reducible_bound: float | None

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("d", "n", "H", "count", "normalised", "integral", "integral_err", "deviation",
                                             "relative_deviation", "reducible", "reducible_bound")}
        out["multiplicity"] = None if self.multiplicity is None else self.multiplicity.to_dict()
        return out


def _fiber_intervals(f: SemialgebraicFiber) -> list[tuple[float, float]]:
    """Components of a one-dimensional fiber, from the roots of its atoms."""
    lo, hi = float(f.box[0][0]), float(f.box[1][0])
    cuts = {lo, hi}
    for a in f.predicate.atoms():
        deg = a.degree
        coeffs = [0.0] * (deg + 1)
        for c, e in a.terms:
            coeffs[e[0]] += float(c)
        if deg >= 1:
            for z in np.roots(coeffs[::-1]):
                if abs(z.imag) < 1e-12 and lo < z.real < hi:
                    cuts.add(float(z.real))
    cuts = sorted(cuts)
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if f.predicate.evaluate(np.array([[0.5 * (a + b)]]), exact=False)[0]:
            if out and out[-1][1] == a:
                out[-1] = (out[-1][0], b)
            else:
                out.append((a, b))
    return out


def algebraic_points_check(d: int, n: int, fiber: SemialgebraicFiber, H: int, reducible: bool = True, grid: int = 256) -> AlgebraicPointsReport:
    """Compare #(A_d(H)^n in the fiber) / H^(n(d+1)) with the integral of the
    product density over the fiber divided by (2 zeta(d+1))^n.

    n = 1 takes a fiber in [-1, 1]; n = 2 a planar fiber in [-1, 1]^2 whose
    points are pairs of algebraic numbers of degree d.
    """
    if n not in (1, 2) or fiber.n != n:
        raise ValueError("n must be 1 or 2 and match the fiber")
    zeta = float(K.zeta(d + 1))
    model = DensityModel(d, "Rho")
    lo = [float(x) for x in fiber.box[0]]
    hi = [float(x) for x in fiber.box[1]]
    mult = None
    if fiber.is_empty_predicate:
        count, integral, ierr = 0, 0.0, 0.0
    elif n == 1:
        vals, coeffs = _algebraic_points(d, H, lo[0], hi[0])
        inside = fiber.predicate.evaluate(vals[:, None], exact=False)
        count = int(np.count_nonzero(inside))
        groups = Counter(map(tuple, coeffs[inside].tolist()))
        mult = MultiplicityCount(dict(Counter(groups.values())), count)
        integral = ierr = 0.0
        for a, b in _fiber_intervals(fiber):
            e = model.integral(a, b)
            integral += e.value
            ierr += e.err
        integral /= 2 * zeta
        ierr /= 2 * zeta
    else:
        xs, _ = _algebraic_points(d, H, lo[0], hi[0])
        ys, _ = _algebraic_points(d, H, lo[1], hi[1])
        count = 0
        for start in range(0, len(xs), 512):
            X = xs[start:start + 512]
            pts = np.stack(np.meshgrid(X, ys, indexing="ij"), axis=-1).reshape(-1, 2)
            count += int(np.count_nonzero(fiber.predicate.evaluate(pts, exact=False)))
        estimates = []
        for m in (grid // 2, grid):
            gx, gw = np.polynomial.legendre.leggauss(m)
            px = 0.5 * (hi[0] - lo[0]) * (gx + 1) + lo[0]
            py = 0.5 * (hi[1] - lo[1]) * (gx + 1) + lo[1]
            wx = 0.5 * (hi[0] - lo[0]) * gw
            wy = 0.5 * (hi[1] - lo[1]) * gw
            rx = np.array([model(x).value for x in px])
            ry = np.array([model(y).value for y in py])
            pts = np.stack(np.meshgrid(px, py, indexing="ij"), axis=-1).reshape(-1, 2)
            ind = fiber.predicate.evaluate(pts, exact=False).reshape(m, m)
            estimates.append(float(np.sum((wx * rx)[:, None] * (wy * ry)[None, :] * ind)))
        integral = estimates[1] / (2 * zeta) ** 2
        ierr = abs(estimates[1] - estimates[0]) / (2 * zeta) ** 2
    normalised = count / H ** (n * (d + 1))
    dev = abs(normalised - integral)
    rel = dev / integral if integral else (0.0 if dev == 0 else math.inf)
    red = red_b = None
    if reducible and H >= 3:
        red, red_b = reducible_count(d, H), reducible_bound(d, H)
    return AlgebraicPointsReport(d, n, H, count, normalised, integral, ierr, dev, rel, mult, red, red_b)
