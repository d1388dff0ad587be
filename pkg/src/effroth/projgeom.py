"""Projective distances, orthogonality defect, stereographic coordinates,
heights of rational lines and subspaces."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .census import BudgetExceeded

DEFAULT_BUDGET = 5 * 10**7
PREC_DPS = 50


def _vec(x) -> list:
    return [mpmath.mpf(v) if not isinstance(v, Fraction) else mpmath.mpf(v.numerator) / v.denominator for v in x]


def _norm(x) -> mpmath.mpf:
    return mpmath.sqrt(mpmath.fsum(v * v for v in x))


def wedge_norm(x, y) -> mpmath.mpf:
    """||x ^ y||_2 via Lagrange's identity."""
    with mpmath.workdps(PREC_DPS):
        x, y = _vec(x), _vec(y)
        sq = mpmath.fsum((a * d - b * c) ** 2 for (a, b), (c, d) in itertools.combinations(zip(x, y), 2))
        return mpmath.sqrt(sq)


def proj_distance(x, y) -> mpmath.mpf:
    """Sine of the angle between the lines spanned by x and y."""
    with mpmath.workdps(PREC_DPS):
        nx, ny = _norm(_vec(x)), _norm(_vec(y))
        if nx == 0 or ny == 0:
            raise ValueError("vectors must be nonzero")
        return min(mpmath.mpf(1), wedge_norm(x, y) / (nx * ny))


def dist_to_hyperplane(x, y) -> mpmath.mpf:
    """Sine of the angle between the line of x and the hyperplane orthogonal to y."""
    with mpmath.workdps(PREC_DPS):
        xv, yv = _vec(x), _vec(y)
        nx, ny = _norm(xv), _norm(yv)
        if nx == 0 or ny == 0:
            raise ValueError("vectors must be nonzero")
        return min(mpmath.mpf(1), abs(mpmath.fsum(a * b for a, b in zip(xv, yv))) / (nx * ny))


def orth_defect(vectors: Sequence[Sequence]) -> mpmath.mpf:
    """|det| divided by the product of the norms."""
    n = len(vectors)
    if any(len(v) != n for v in vectors):
        raise ValueError("need n vectors in R^n")
    with mpmath.workdps(PREC_DPS):
        M = mpmath.matrix([_vec(v) for v in vectors])
        norms = [_norm(_vec(v)) for v in vectors]
        if any(v == 0 for v in norms):
            return mpmath.mpf(0)
        return min(mpmath.mpf(1), abs(mpmath.det(M)) / reduce(lambda a, b: a * b, norms))


# -- stereographic coordinates -----------------------------------------------

def stereo(x) -> list:
    """Upper-hemisphere point (x0 > 0) to its coordinate in the open unit ball."""
    x = list(x)
    if not x[0] > 0:
        raise ValueError("point must lie on the open upper hemisphere")
    if all(isinstance(v, (int, Fraction)) for v in x):
        x0 = Fraction(x[0])
        return [Fraction(v) / (1 + x0) for v in x[1:]]
    with mpmath.workdps(PREC_DPS):
        xv = _vec(x)
        return [v / (1 + xv[0]) for v in xv[1:]]


def stereo_inv(s) -> list:
    """Inverse of :func:`stereo`; rational input gives a rational point."""
    s = list(s)
    if all(isinstance(v, (int, Fraction)) for v in s):
        sq = sum((Fraction(v) ** 2 for v in s), Fraction(0))
        if sq >= 1:
            raise ValueError("coordinate must lie in the open unit ball")
        return [(1 - sq) / (1 + sq)] + [2 * Fraction(v) / (1 + sq) for v in s]
    with mpmath.workdps(PREC_DPS):
        sv = _vec(s)
        sq = mpmath.fsum(v * v for v in sv)
        if sq >= 1:
            raise ValueError("coordinate must lie in the open unit ball")
        return [(1 - sq) / (1 + sq)] + [2 * v / (1 + sq) for v in sv]


# -- rational lines and subspaces --------------------------------------------

def _canonical(v: Sequence[int]) -> tuple[int, ...]:
    g = reduce(math.gcd, (abs(c) for c in v))
    if g == 0:
        raise ValueError("zero vector")
    v = [c // g for c in v]
    first = next(c for c in v if c)
    return tuple(v) if first > 0 else tuple(-c for c in v)


@dataclass(frozen=True, order=True)
class RationalLine:
    """Primitive integer vector up to sign (first nonzero entry positive)."""

    height_sq: int
    q: tuple[int, ...]

    @classmethod
    def from_vector(cls, v: Sequence[int]) -> "RationalLine":
        c = _canonical(v)
        return cls(sum(x * x for x in c), c)

    @property
    def height(self) -> float:
        return math.sqrt(self.height_sq)

    @property
    def n(self) -> int:
        return len(self.q)


def is_primitive(v: Sequence[int]) -> bool:
    return reduce(math.gcd, (abs(int(c)) for c in v)) == 1


def _rank(rows: Sequence[Sequence[int]]) -> int:
    M = [[Fraction(c) for c in r] for r in rows]
    rank, cols = 0, len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(len(M)):
            if i != rank and M[i][c] != 0:
                f = M[i][c] / M[rank][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def _det(M: Sequence[Sequence[int]]) -> int:
    n = len(M)
    if n == 0:
        return 1
    A = [[Fraction(c) for c in r] for r in M]
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] / A[c][c]
            A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return int(det)


def plucker(basis: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """k x k minors of the basis, columns in lexicographic order."""
    k, n = len(basis), len(basis[0])
    return tuple(_det([[row[j] for j in cols] for row in basis]) for cols in itertools.combinations(range(n), k))


@dataclass(frozen=True)
class RationalSubspace:
    basis: tuple[tuple[int, ...], ...]
    plucker: tuple[int, ...]

    @classmethod
    def span(cls, vectors: Sequence[Sequence[int]]) -> "RationalSubspace":
        vs = tuple(tuple(int(c) for c in v) for v in vectors)
        if _rank(vs) != len(vs):
            raise ValueError("basis vectors are linearly dependent")
        return cls(vs, _canonical(plucker(vs)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def n(self) -> int:
        return len(self.basis[0])

    @property
    def height_sq(self) -> int:
        return sum(c * c for c in self.plucker)

    @property
    def height(self) -> float:
        return math.sqrt(self.height_sq)


def _integer_kernel(rows: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    """Integer basis (not necessarily reduced) of the rational kernel."""
    M = [[Fraction(c) for c in r] for r in rows]
    pivots, r = [], 0
    for c in range(n):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        M[r] = [a / M[r][c] for a in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    out = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -M[i][f]
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (x.denominator for x in v))
        out.append(tuple(int(x * den) for x in v))
    return out


def orthogonal_complement(q: Sequence[int]) -> RationalSubspace:
    return RationalSubspace.span(_integer_kernel([q], len(q)))


def hyperplane_height(q: RationalLine | Sequence[int]) -> int:
    """Squared height of q-perp, computed from its own Plücker vector.

    The Plücker vector of the hyperplane comes out proportional to the
    signed-permuted q, and primitivity makes it equal up to sign.
    """
    v = q.q if isinstance(q, RationalLine) else tuple(int(c) for c in q)
    if not is_primitive(v):
        raise ValueError("hyperplane_height expects a primitive vector")
    return orthogonal_complement(v).height_sq


def enumerate_rational_lines(n: int, Q_sq: int, budget: int = DEFAULT_BUDGET) -> list[RationalLine]:
    """All canonical primitive integer vectors with squared norm <= Q_sq,
    sorted by height then coordinates."""
    if n < 2 or Q_sq < 1:
        raise ValueError("need n >= 2 and Q^2 >= 1")
    R = math.isqrt(Q_sq)
    if (2 * R + 1) ** n > budget:
        raise BudgetExceeded(f"{(2 * R + 1) ** n} candidate vectors exceed budget {budget}")
    axis = np.arange(-R, R + 1)
    grid = np.stack(np.meshgrid(*[axis] * n, indexing="ij"), axis=-1).reshape(-1, n)
    sq = np.sum(grid * grid, axis=1)
    grid = grid[(sq <= Q_sq) & (sq > 0)]
    first = np.array([row[np.nonzero(row)[0][0]] for row in grid]) if len(grid) else np.array([])
    grid = grid[first > 0]
    g = np.gcd.reduce(np.abs(grid), axis=1)
    grid = grid[g == 1]
    lines = [RationalLine(int(np.dot(r, r)), tuple(int(c) for c in r)) for r in grid]
    lines.sort()
    return lines


def shell_counts(lines: Sequence[RationalLine]) -> dict[int, int]:
    out: dict[int, int] = {}
    for L in lines:
        out[L.height_sq] = out.get(L.height_sq, 0) + 1
    return dict(sorted(out.items()))


def iter_lines_by_height(n: int, Q_sq: int) -> Iterator[RationalLine]:
    yield from enumerate_rational_lines(n, Q_sq)


# -- successive minima -------------------------------------------------------

def successive_minima(sub: RationalSubspace, radius_sq: int | None = None) -> list[float]:
    """Exact successive minima of the lattice of integer points in the
    subspace, by exhaustive search.

    The spanning vectors are k independent lattice points, so every minimum
    is at most the longest of them; that norm is the search radius.
    """
    k, n = sub.dim, sub.n
    if radius_sq is None:
        radius_sq = max(sum(c * c for c in b) for b in sub.basis)
    R = math.isqrt(radius_sq)
    perp = _integer_kernel(sub.basis, n)
    cands = []
    for v in itertools.product(range(-R, R + 1), repeat=n):
        s = sum(c * c for c in v)
        if s == 0 or s > radius_sq:
            continue
        if any(sum(a * b for a, b in zip(v, p)) for p in perp):
            continue
        cands.append((s, v))
    cands.sort()
    chosen: list[tuple[int, ...]] = []
    mins: list[int] = []
    for s, v in cands:
        if _rank(chosen + [v]) > len(chosen):
            chosen.append(v)
            mins.append(s)
            if len(chosen) == k:
                break
    return [math.sqrt(s) for s in mins]


def minkowski_check(sub: RationalSubspace) -> dict:
    """(2^k / k!) det <= omega_k prod lambda_i <= 2^k det, where det is the
    covolume of the integer lattice in the subspace (its Plücker height)."""
    lam = successive_minima(sub)
    k = sub.dim
    det = math.sqrt(sub.height_sq)
    omega_k = math.pi ** (k / 2) / math.gamma(k / 2 + 1)
    prod = math.prod(lam)
    lower = 2**k / math.factorial(k) * det
    upper = 2**k * det
    tol = 1e-12 * upper
    return {"minima": lam, "det": det, "lower": lower, "value": omega_k * prod, "upper": upper,
            "holds": lower <= omega_k * prod + tol and omega_k * prod <= upper + tol}
