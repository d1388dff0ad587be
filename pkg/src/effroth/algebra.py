"""Exact integer polynomials and real algebraic numbers.

Algebraic reals are stored as a primitive irreducible minimal polynomial
plus a rational interval that isolates one of its real roots.  All
decisions (irreducibility, root counts, comparisons) are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from math import comb, gcd, isqrt
from typing import Sequence

Rational = Fraction


@dataclass(frozen=True)
class IntPolynomial:
    """Polynomial a0 + a1 x + ... + ad x^d with integer coefficients."""

    coeffs: tuple[int, ...]

    def __init__(self, coeffs: Sequence[int]):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            raise ValueError("zero polynomial")
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def height(self) -> int:
        return max(abs(c) for c in self.coeffs)

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def sign_at(self, r: Fraction) -> int:
        """Sign of p(r), evaluated with integers only."""
        return _sign_poly(self.coeffs, Fraction(r))

    def derivative(self) -> "IntPolynomial":
        if self.degree == 0:
            raise ValueError("derivative of a constant")
        return IntPolynomial([k * c for k, c in enumerate(self.coeffs)][1:])

    def taylor_shift(self, n: int) -> "IntPolynomial":
        """Return q with q(x) = p(x + n)."""
        d = self.degree
        out = [0] * (d + 1)
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            for j in range(k + 1):
                out[j] += c * comb(k, j) * n ** (k - j)
        return IntPolynomial(out)

    def __str__(self) -> str:
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if k == 0 else f"{c}*x^{k}")
        return " + ".join(reversed(terms))


def content(p: IntPolynomial) -> int:
    return reduce(gcd, (abs(c) for c in p.coeffs))


def normalize(p: IntPolynomial) -> IntPolynomial:
    """Primitive part with positive leading coefficient."""
    g = content(p)
    if p.leading < 0:
        g = -g
    return IntPolynomial([c // g for c in p.coeffs])


def is_primitive_normalized(p: IntPolynomial) -> bool:
    return p.leading > 0 and content(p) == 1


# -- division over Z ---------------------------------------------------------

def exact_divide(f: Sequence[int], g: Sequence[int]) -> list[int] | None:
    """Quotient f/g if g divides f in Z[x] exactly, else None."""
    f = list(f)
    dg = len(g) - 1
    lg = g[-1]
    if len(f) - 1 < dg:
        return None
    q = [0] * (len(f) - dg)
    for i in range(len(f) - 1 - dg, -1, -1):
        c = f[i + dg]
        if c % lg:
            return None
        qi = c // lg
        q[i] = qi
        if qi:
            for j in range(dg + 1):
                f[i + j] -= qi * g[j]
    if any(f[:dg]):
        return None
    return q


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small = [k for k in range(1, isqrt(n) + 1) if n % k == 0]
    return sorted(set(small + [n // k for k in small]))


def _has_rational_root(p: IntPolynomial) -> bool:
    a0, ad = p.coeffs[0], p.leading
    if a0 == 0:
        return True
    for s in _divisors(ad):
        for r in _divisors(a0):
            for num in (r, -r):
                if gcd(num, s) == 1 and p.sign_at(Fraction(num, s)) == 0:
                    return True
    return False


def _mignotte_bounds(p: IntPolynomial, k: int) -> list[int]:
    norm_sq = sum(c * c for c in p.coeffs)
    # |b_j| <= C(k, j) * ||p||_2 for any factor of degree k
    return [isqrt(comb(k, j) ** 2 * norm_sq) + 1 for j in range(k + 1)]


def _has_factor_of_degree(p: IntPolynomial, k: int) -> bool:
    bounds = _mignotte_bounds(p, k)
    leads = _divisors(p.leading)
    consts = [c for r in _divisors(p.coeffs[0]) for c in (r, -r)]
    middle = [range(-bounds[j], bounds[j] + 1) for j in range(1, k)]
    for lead in leads:
        for c0 in consts:
            for mid in product(*middle):
                if exact_divide(p.coeffs, [c0, *mid, lead]) is not None:
                    return True
    return False


def is_irreducible(p: IntPolynomial) -> bool:
    """Irreducibility over Q of a primitive normalized polynomial."""
    if not is_primitive_normalized(p):
        raise ValueError("is_irreducible expects a primitive normalized polynomial")
    d = p.degree
    if d == 0:
        return False
    if d == 1:
        return True
    if _has_rational_root(p):
        return False
    if d <= 3:
        return True
    return not any(_has_factor_of_degree(p, k) for k in range(2, d // 2 + 1))


# -- Sturm sequences ---------------------------------------------------------

def _prem(a: list[int], b: list[int]) -> list[int]:
    """Remainder of a by b after scaling a by a positive integer, over Z."""
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    scale = abs(lb)
    while r and len(r) - 1 >= db:
        f = r[-1] * scale // lb  # exact: scale = |lb|
        shift = len(r) - 1 - db
        r = [c * scale for c in r]
        for j in range(db + 1):
            r[shift + j] -= f * b[j]
        while r and r[-1] == 0:
            r.pop()
    return r


def sturm_sequence(p: IntPolynomial) -> list[list[int]]:
    """Sturm chain with each member scaled by a positive constant."""
    seq = [list(p.coeffs), list(p.derivative().coeffs)]
    while len(seq[-1]) > 1:
        r = _prem(seq[-2], seq[-1])
        if not r:
            break
        g = reduce(gcd, (abs(c) for c in r))
        seq.append([-c // g for c in r])
    return seq


def _sign_poly(cs: list[int], r: Fraction) -> int:
    num, den = r.numerator, r.denominator
    acc, pw = 0, 1
    for c in reversed(cs):
        acc = acc * num + c * pw
        pw *= den
    return (acc > 0) - (acc < 0)


def _variations(signs: list[int]) -> int:
    s = [x for x in signs if x]
    return sum(1 for a, b in zip(s, s[1:]) if a != b)


def _var_at(seq: list[list[int]], r: Fraction | None, side: int = 0) -> int:
    if r is None:  # +/- infinity
        return _variations([(1 if c[-1] > 0 else -1) * (side if (len(c) - 1) % 2 else 1) for c in seq])
    return _variations([_sign_poly(c, r) for c in seq])


def sturm_count(p: IntPolynomial, a: Fraction | None, b: Fraction | None) -> int:
    """Distinct real roots in (a, b]; None stands for -inf / +inf."""
    seq = sturm_sequence(p)
    return _var_at(seq, a, -1) - _var_at(seq, b, 1)


@dataclass(frozen=True)
class RootInterval:
    lo: Fraction
    hi: Fraction
    exact_point: Fraction | None = None

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty root interval")
        if self.exact_point is not None and not (self.lo == self.hi == self.exact_point):
            raise ValueError("exact point must equal both endpoints")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def overlaps(self, other: "RootInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


def cauchy_bound(p: IntPolynomial) -> int:
    return 1 + -(-max(abs(c) for c in p.coeffs[:-1]) // abs(p.leading)) if p.degree else 1


def _bisect_to_width(p: IntPolynomial, lo: Fraction, hi: Fraction, width: Fraction) -> RootInterval:
    s_lo = p.sign_at(lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = p.sign_at(mid)
        if s == 0:
            return RootInterval(mid, mid, mid)
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return RootInterval(lo, hi)


def real_roots(p: IntPolynomial, width: Fraction = Fraction(1, 2**20)) -> list[RootInterval]:
    """Disjoint isolating intervals for the real roots of a squarefree p."""
    if p.degree < 1:
        return []
    seq = sturm_sequence(p)

    def count(a: Fraction, b: Fraction) -> int:
        return _var_at(seq, a) - _var_at(seq, b)

    B = Fraction(cauchy_bound(p))
    out: list[RootInterval] = []
    # every interval endpoint is kept off the roots, so (a, b] counts are clean
    stack = [(-B, B)]
    while stack:
        a, b = stack.pop()
        n = count(a, b)
        if n == 0:
            continue
        if n == 1:
            out.append(_bisect_to_width(p, a, b, width))
            continue
        m = (a + b) / 2
        while p.sign_at(m) == 0:
            m = (a + m) / 2
        stack.append((a, m))
        stack.append((m, b))
    out.sort(key=lambda r: r.lo)
    return out


# -- algebraic numbers -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AlgebraicNumber:
    minpoly: IntPolynomial
    isolation: RootInterval

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraicNumber):
            return NotImplemented
        return self.minpoly == other.minpoly and self.isolation.overlaps(other.isolation)

    def __hash__(self) -> int:
        return hash(self.minpoly)

    @property
    def degree(self) -> int:
        return self.minpoly.degree

    @property
    def height(self) -> int:
        return self.minpoly.height

    def refine(self, width: Fraction) -> "AlgebraicNumber":
        iso = self.isolation
        if iso.exact_point is not None or iso.width <= width:
            return self
        return AlgebraicNumber(self.minpoly, _bisect_to_width(self.minpoly, iso.lo, iso.hi, width))

    def __float__(self) -> float:
        return float(self.refine(Fraction(1, 2**60)).isolation.lo)

    def __lt__(self, other: "AlgebraicNumber") -> bool:
        return compare_algebraic(self, other) < 0


def compare_to_rational(alpha: AlgebraicNumber, r: Fraction) -> int:
    """-1, 0, 1 as alpha <, =, > r."""
    r = Fraction(r)
    iso = alpha.isolation
    if iso.exact_point is not None:
        return (iso.exact_point > r) - (iso.exact_point < r)
    if r < iso.lo:
        return 1
    if r > iso.hi:
        return -1
    p = alpha.minpoly
    s = p.sign_at(r)
    if s == 0:
        return 0
    # the root sits on the side of r where p changes sign
    return -1 if s == p.sign_at(iso.hi) else 1


def compare_algebraic(a: AlgebraicNumber, b: AlgebraicNumber) -> int:
    if a == b:
        return 0
    w = max(a.isolation.width, b.isolation.width)
    while a.isolation.overlaps(b.isolation):
        w /= 2**8
        a, b = a.refine(w), b.refine(w)
        if a.minpoly == b.minpoly and a.isolation.overlaps(b.isolation):
            return 0
    return -1 if a.isolation.hi < b.isolation.lo else 1


def shift_by_integer(alpha: AlgebraicNumber, n: int) -> AlgebraicNumber:
    """alpha + n, with minimal polynomial p(x - n)."""
    q = normalize(alpha.minpoly.taylor_shift(-n))
    iso = alpha.isolation
    ep = None if iso.exact_point is None else iso.exact_point + n
    return AlgebraicNumber(q, RootInterval(iso.lo + n, iso.hi + n, ep))


def algebraic_roots(p: IntPolynomial, width: Fraction = Fraction(1, 2**20)) -> list[AlgebraicNumber]:
    p = normalize(p)
    return [AlgebraicNumber(p, r) for r in real_roots(p, width)]
