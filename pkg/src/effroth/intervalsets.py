"""Exact rational interval sets on [0, 1], approximation sets, Farey sequences."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

ZERO, ONE = Fraction(0), Fraction(1)
ROUNDINGS = ("inner", "outer", "exact")


# -- approximation functions -------------------------------------------------

@dataclass(frozen=True)
class ApproximationFunction:
    """Psi(q) for integers q >= 1.

    family is one of "power" (scale * q^-exponent), "logpower"
    (1 / (q^b (log q)^a)), "constant" and "table" (explicit values, zero past
    the end of the table).
    """

    family: str
    params: tuple = ()
    monotone_nonincreasing: bool = field(init=False, default=False)

    def __post_init__(self):
        if self.family not in ("power", "logpower", "constant", "table"):
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "monotone_nonincreasing", self._check_monotone())

    # constructors
    @classmethod
    def power(cls, exponent, scale=1) -> "ApproximationFunction":
        return cls("power", (Fraction(exponent), Fraction(scale)))

    @classmethod
    def logpower(cls, a, b) -> "ApproximationFunction":
        return cls("logpower", (Fraction(a), Fraction(b)))

    @classmethod
    def constant(cls, c) -> "ApproximationFunction":
        return cls("constant", (Fraction(c),))

    @classmethod
    def table(cls, values: Sequence) -> "ApproximationFunction":
        """values[i] is Psi(i + 1)."""
        return cls("table", tuple(Fraction(v) for v in values))

    @classmethod
    def zero(cls) -> "ApproximationFunction":
        return cls.constant(0)

    def _check_monotone(self) -> bool:
        f, p = self.family, self.params
        if f == "power":
            return p[0] >= 0 and p[1] >= 0
        if f == "constant":
            return p[0] >= 0
        if f == "logpower":
            # nonincreasing on q >= 2; q = 1 is a pole when a > 0
            return p[0] >= 0 and p[1] >= 0
        vals = list(p) + [ZERO]
        return all(v >= 0 for v in vals) and all(a >= b for a, b in zip(vals, vals[1:]))

    @property
    def is_exact(self) -> bool:
        if self.family == "power":
            return self.params[0].denominator == 1
        return self.family in ("constant", "table")

    def exact(self, q: int) -> Fraction:
        if not self.is_exact:
            raise ValueError(f"{self} has no exact rational values")
        f, p = self.family, self.params
        if f == "power":
            return p[1] * Fraction(q) ** -int(p[0])
        if f == "constant":
            return p[0]
        return p[q - 1] if q - 1 < len(p) else ZERO

    def as_float(self, q: float) -> float:
        if self.is_exact and float(q).is_integer():
            return float(self.exact(int(q)))
        f, p = self.family, self.params
        if f == "power":
            return float(p[1]) * q ** -float(p[0])
        a, b = float(p[0]), float(p[1])
        if q <= 1 and a > 0:
            return math.inf
        return 1.0 / (q**b * math.log(q) ** a)

    def bounds(self, q: int) -> tuple[Fraction, Fraction]:
        """Rational lower and upper bounds on Psi(q)."""
        if self.is_exact:
            v = self.exact(q)
            return v, v
        f, p = self.family, self.params
        with mpmath.workprec(120):
            if f == "power":
                v = mpmath.mpf(p[1].numerator) / p[1].denominator * mpmath.power(q, -mpmath.mpf(p[0].numerator) / p[0].denominator)
            else:
                if q <= 1:
                    raise ValueError("logpower is undefined at q = 1")
                v = 1 / (mpmath.power(q, mpmath.mpf(p[1].numerator) / p[1].denominator) * mpmath.power(mpmath.log(q), mpmath.mpf(p[0].numerator) / p[0].denominator))
            c = Fraction(*_mpf_ratio(v))
        slack = c * Fraction(1, 10**30)
        return max(ZERO, c - slack), c + slack

    def value(self, q: int, rounding: str = "exact") -> Fraction:
        if rounding not in ROUNDINGS:
            raise ValueError(f"rounding must be one of {ROUNDINGS}")
        if rounding == "exact":
            return self.exact(q)
        lo, hi = self.bounds(q)
        return lo if rounding == "inner" else hi

    def __str__(self) -> str:
        f, p = self.family, self.params
        if f == "power":
            return f"power:{p[0]}" + ("" if p[1] == 1 else f":{p[1]}")
        if f == "logpower":
            return f"logpower:{p[0]}:{p[1]}"
        if f == "constant":
            return f"const:{p[0]}"
        return "table:" + ",".join(map(str, p))


def _mpf_ratio(v) -> tuple[int, int]:
    man, exp = mpmath.mpf(v).man_exp
    return (man << exp, 1) if exp >= 0 else (man, 1 << -exp)


def parse_psi(text: str) -> ApproximationFunction:
    """Parse "power:3", "power:1:1/10", "logpower:2:1", "const:1/100",
    "zero" or "table:1/2,1/3,1/4"."""
    name, _, rest = text.strip().partition(":")
    args = rest.split(":") if rest else []
    name = name.lower()
    if name == "zero":
        return ApproximationFunction.zero()
    if name == "power" and len(args) in (1, 2):
        return ApproximationFunction.power(*args)
    if name == "logpower" and len(args) == 2:
        return ApproximationFunction.logpower(*args)
    if name in ("const", "constant") and len(args) == 1:
        return ApproximationFunction.constant(args[0])
    if name == "table" and len(args) == 1:
        return ApproximationFunction.table(args[0].split(","))
    raise ValueError(f"cannot parse approximation function {text!r}")


# -- interval sets -----------------------------------------------------------

Interval = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class RationalIntervalSet:
    """Normalized finite union of closed intervals inside [0, 1]."""

    components: tuple[Interval, ...] = ()

    def __init__(self, intervals: Iterable[Sequence] = ()):
        object.__setattr__(self, "components", _normalize(intervals))

    @classmethod
    def full(cls) -> "RationalIntervalSet":
        return cls([(ZERO, ONE)])

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.components), ZERO)

    def complement_closure(self) -> "RationalIntervalSet":
        gaps, prev = [], ZERO
        for lo, hi in self.components:
            if lo > prev:
                gaps.append((prev, lo))
            prev = hi
        if prev < ONE or not self.components:
            gaps.append((prev, ONE))
        return RationalIntervalSet(gaps)

    def len_star(self) -> Fraction:
        if not self.components:
            return ZERO
        return min(hi - lo for lo, hi in self.components)

    def union(self, other: "RationalIntervalSet") -> "RationalIntervalSet":
        return RationalIntervalSet(self.components + other.components)

    def intersection(self, other: "RationalIntervalSet") -> "RationalIntervalSet":
        out, i, j = [], 0, 0
        a, b = self.components, other.components
        while i < len(a) and j < len(b):
            lo, hi = max(a[i][0], b[j][0]), min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return RationalIntervalSet(out)

    def contains(self, x: Fraction) -> bool:
        return any(lo <= x <= hi for lo, hi in self.components)

    def __contains__(self, x) -> bool:
        return self.contains(Fraction(x))

    def is_subset(self, other: "RationalIntervalSet") -> bool:
        return all(any(olo <= lo and hi <= ohi for olo, ohi in other.components) for lo, hi in self.components)


def _normalize(intervals: Iterable[Sequence]) -> tuple[Interval, ...]:
    cleaned = []
    for lo, hi in intervals:
        lo, hi = max(ZERO, Fraction(lo)), min(ONE, Fraction(hi))
        if lo <= hi:
            cleaned.append((lo, hi))
    cleaned.sort()
    out: list[list[Fraction]] = []
    for lo, hi in cleaned:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def _check_range(Q1: int, Q2: int) -> None:
    if not 1 <= Q1 < Q2:
        raise ValueError(f"need 1 <= Q1 < Q2, got Q1={Q1}, Q2={Q2}")


def ball_radii(psi: ApproximationFunction, Q1: int, Q2: int, rounding: str = "exact") -> dict[Fraction, Fraction]:
    """Largest radius Psi(q)/q attached to each (reduced) center p/q."""
    _check_range(Q1, Q2)
    radii: dict[Fraction, Fraction] = {}
    for q in range(Q1, Q2):
        r = psi.value(q, rounding) / q
        for p in range(q + 1):
            c = Fraction(p, q)
            if r > radii.get(c, -ONE):
                radii[c] = r
    return radii


def build_J(psi: ApproximationFunction, Q1: int, Q2: int, rounding: str = "exact") -> RationalIntervalSet:
    """Union of the clipped balls B*(p/q, Psi(q)/q), Q1 <= q < Q2, 0 <= p <= q."""
    _check_range(Q1, Q2)
    if rounding == "exact" and not psi.is_exact:
        raise ValueError("exact rounding needs a rational-valued approximation function")
    # once some q has radius >= 1/(2q) its balls alone cover [0, 1]
    for q in range(Q1, Q2):
        if 2 * psi.value(q, rounding) >= 1:
            return RationalIntervalSet.full()
    radii = ball_radii(psi, Q1, Q2, rounding)
    return RationalIntervalSet((c - r, c + r) for c, r in radii.items())


def jtilde(psi: ApproximationFunction, Q1: int, Q2: int, rounding: str = "exact") -> RationalIntervalSet:
    return build_J(psi, Q1, Q2, rounding).complement_closure()


def theta(psi: ApproximationFunction, Q1: int, Q2: int, rounding: str = "exact") -> Fraction:
    """min over Q1 <= q < Q2 of 2 Psi(q) / q."""
    _check_range(Q1, Q2)
    if psi.monotone_nonincreasing and (psi.family != "logpower" or Q1 >= 2):
        return 2 * psi.value(Q2 - 1, rounding) / (Q2 - 1)
    return min(2 * psi.value(q, rounding) / q for q in range(Q1, Q2))


def sigma_sum(psi: ApproximationFunction, Q1: int, Q2: int, rounding: str = "exact") -> Fraction:
    """Sum over Q1 <= q < Q2 of 2 Psi(q), the total clipped ball length per q."""
    _check_range(Q1, Q2)
    return sum((2 * psi.value(q, rounding) for q in range(Q1, Q2)), ZERO)


@dataclass(frozen=True)
class SieveReport:
    sigma: Fraction
    measure: Fraction
    lower: Fraction
    lower_ok: bool
    upper_ok: bool


def sieve_check(psi: ApproximationFunction, Q1: int, Q2: int) -> SieveReport:
    s = sigma_sum(psi, Q1, Q2)
    m = build_J(psi, Q1, Q2).measure()
    lower = s - 25 * s * s
    return SieveReport(s, m, lower, lower <= m, m <= s)


# -- Farey machinery ---------------------------------------------------------

@dataclass(frozen=True, order=True)
class FareyFraction:
    p: int
    q: int

    def __post_init__(self):
        if self.q < 1 or not 0 <= self.p <= self.q or math.gcd(self.p, self.q) != 1:
            raise ValueError(f"invalid Farey fraction {self.p}/{self.q}")

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


def farey(order: int) -> list[FareyFraction]:
    """Farey sequence via the denominator recursion
    q_k = floor((order + q_{k-2}) / q_{k-1}) q_{k-1} - q_{k-2}."""
    if order < 1:
        raise ValueError("order must be >= 1")
    out = [FareyFraction(0, 1)]
    if order == 1:
        return out + [FareyFraction(1, 1)]
    qp = 1
    p, q = 1, order
    out.append(FareyFraction(p, q))
    while q != 1:
        qn = (order + qp) // q * q - qp
        # consecutive terms satisfy p_n q - p q_n = 1
        pn = (1 + p * qn) // q
        qp, p, q = q, pn, qn
        out.append(FareyFraction(p, q))
    return out


def tau(f: FareyFraction, psi: ApproximationFunction, Q2: int, Q1: int = 1) -> Fraction | None:
    """max of Psi(s)/s over multiples s of f.q with Q1 <= s < Q2 (None if none)."""
    best = None
    start = max(1, -(-Q1 // f.q))
    for m in range(start, (Q2 - 1) // f.q + 1):
        s = f.q * m
        v = psi.exact(s) / s
        if best is None or v > best:
            best = v
    return best


def len_star_farey(psi: ApproximationFunction, Q1: int, Q2: int) -> Fraction:
    """len* of the closed complement of J, computed from consecutive Farey
    gaps of order Q2 - 1 instead of building J."""
    _check_range(Q1, Q2)
    xs, rs = [], []
    for f in farey(Q2 - 1):
        t = tau(f, psi, Q2, Q1)
        if t is not None:
            xs.append(f.value)
            rs.append(t)
    n = len(xs)
    reach = []  # furthest right point covered by balls centered at x_0..x_i
    cur = -ONE
    for x, r in zip(xs, rs):
        cur = max(cur, x + r)
        reach.append(cur)
    start = [ONE * 2] * n  # leftmost point covered by balls centered at x_i..
    cur = ONE * 2
    for i in range(n - 1, -1, -1):
        cur = min(cur, xs[i] - rs[i])
        start[i] = cur
    gaps = [(reach[i], start[i + 1]) for i in range(n - 1) if start[i + 1] > reach[i]]
    if not gaps:
        return ZERO
    merged = [list(gaps[0])]
    for lo, hi in gaps[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return min(hi - lo for lo, hi in merged)


def farey_length(order: int) -> int:
    return 1 + sum(_phi(k) for k in range(1, order + 1))


def _phi(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result
