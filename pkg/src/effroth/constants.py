"""Explicit constants, exact when small and in certified log-space otherwise.

Every constant is a :class:`BigConstant`: an outward-rounded interval for
its natural logarithm, plus the exact integer or rational when that has at
most a million decimal digits.  Interval arithmetic runs in mpmath's
``iv`` context at ``PREC`` bits.
"""
from __future__ import annotations

import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

import mpmath
from mpmath import iv

if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

PREC = 256
EXACT_DIGITS = 10**6
_LN10 = math.log(10)
# beyond this the value itself cannot be materialised as an interval
_MAX_LN_FOR_VALUE = mpmath.mpf(2) ** 200


@contextmanager
def _prec(bits: int = PREC):
    old = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = old


def _ivq(x) -> "iv.mpf":
    """Tight interval around an int, Fraction or interval."""
    if isinstance(x, Fraction):
        return iv.mpf(x.numerator) / iv.mpf(x.denominator)
    if isinstance(x, float):
        return iv.mpf(mpmath.mpf(x))
    return iv.mpf(x)


def _ilog10_upper(ln_hi) -> float:
    try:
        return float(ln_hi) / _LN10
    except OverflowError:
        return math.inf


def _iroot(n: int, k: int) -> int | None:
    """Exact k-th root of a nonnegative integer, or None."""
    if n < 2:
        return n
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo if lo**k == n else None


def _exact_rational_power(base: Fraction, e: Fraction) -> Fraction | None:
    base = Fraction(base)
    if base <= 0:
        return None
    num = _iroot(base.numerator, e.denominator)
    den = _iroot(base.denominator, e.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den) ** e.numerator


@dataclass(frozen=True, eq=False)
class BigConstant:
    """A positive (or zero) real known by an interval for its logarithm."""

    ln: object  # iv.mpf interval; None encodes the value 0
    exact: int | Fraction | None = None
    expr: str = ""

    # -- construction -------------------------------------------------------
    @classmethod
    def of(cls, x: int | Fraction, expr: str | None = None) -> "BigConstant":
        x = Fraction(x)
        if x < 0:
            raise ValueError("constants are nonnegative")
        exact = x.numerator if x.denominator == 1 else x
        if x == 0:
            return cls(None, 0, expr or "0")
        with _prec():
            ln = iv.log(_ivq(x))
        return cls(ln, exact, expr or str(exact))

    @classmethod
    def from_interval(cls, lo, hi, expr: str) -> "BigConstant":
        """Constant known only to lie in [lo, hi] with lo > 0."""
        with _prec():
            a, b = _ivq(lo), _ivq(hi)
            if not a.a > 0:
                raise ValueError("interval must be positive")
            ln = iv.log(iv.mpf([a.a, b.b]))
        return cls(ln, None, expr)

    @classmethod
    def from_iv(cls, x, expr: str) -> "BigConstant":
        with _prec():
            if not x.a > 0:
                raise ValueError("interval must be positive")
            return cls(iv.log(x), None, expr)

    # -- views --------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.ln is None

    @property
    def ln_lo(self):
        return -mpmath.inf if self.is_zero else mpmath.mpf(self.ln.a)

    @property
    def ln_hi(self):
        return -mpmath.inf if self.is_zero else mpmath.mpf(self.ln.b)

    @property
    def ln_value(self):
        if self.is_zero:
            return -mpmath.inf
        # iv.mid rounds at the ambient iv precision, not the stored one
        with _prec():
            return mpmath.mpf(self.ln.mid)

    @property
    def width(self):
        if self.is_zero:
            return 0
        with _prec():
            return mpmath.mpf(self.ln.delta)

    def value(self):
        """Midpoint of the value as an mpf (may carry a huge exponent)."""
        if self.exact is not None:
            with mpmath.workprec(PREC):
                return mpmath.mpf(self.exact.numerator) / self.exact.denominator if isinstance(self.exact, Fraction) else mpmath.mpf(self.exact)
        if self.ln_hi > _MAX_LN_FOR_VALUE:
            raise OverflowError(f"{self.expr}: value is not representable, use ln_value")
        with mpmath.workprec(PREC):
            return mpmath.exp(self.ln_value)

    def interval(self):
        """Outward-rounded interval for the value itself."""
        if self.is_zero:
            return iv.mpf(0)
        if self.ln.b > _MAX_LN_FOR_VALUE:
            raise OverflowError(f"{self.expr}: value is not representable")
        with _prec():
            if self.exact is not None:
                return _ivq(self.exact)
            return iv.exp(self.ln)

    def __float__(self) -> float:
        try:
            return float(self.value())
        except OverflowError:
            return math.inf

    @property
    def digits(self) -> int | None:
        """Decimal digits of the integer part (None for values below 1, or
        when the digit count itself is astronomically large)."""
        if self.exact is not None:
            n = int(self.exact)
            return len(str(n)) if n else None
        if self.ln_lo < 0:
            return None
        with mpmath.workprec(PREC):
            lg = self.ln_value / mpmath.log(10)
            if lg > 10**15:
                return None
            return int(mpmath.floor(lg)) + 1

    def _exact_ok(self, ln_hi) -> bool:
        return _ilog10_upper(ln_hi) <= EXACT_DIGITS

    # -- arithmetic ---------------------------------------------------------
    def _lift(self, other) -> "BigConstant":
        return other if isinstance(other, BigConstant) else BigConstant.of(other)

    def __mul__(self, other) -> "BigConstant":
        other = self._lift(other)
        expr = f"({self.expr})*({other.expr})"
        if self.is_zero or other.is_zero:
            return BigConstant(None, 0, expr)
        with _prec():
            ln = self.ln + other.ln
        exact = None
        if self.exact is not None and other.exact is not None and self._exact_ok(ln.b):
            exact = _norm(Fraction(self.exact) * Fraction(other.exact))
        return BigConstant(ln, exact, expr)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "BigConstant":
        other = self._lift(other)
        if other.is_zero:
            raise ZeroDivisionError(other.expr)
        expr = f"({self.expr})/({other.expr})"
        if self.is_zero:
            return BigConstant(None, 0, expr)
        with _prec():
            ln = self.ln - other.ln
        exact = None
        if self.exact is not None and other.exact is not None and self._exact_ok(abs(ln).b):
            exact = _norm(Fraction(self.exact) / Fraction(other.exact))
        return BigConstant(ln, exact, expr)

    def __rtruediv__(self, other) -> "BigConstant":
        return self._lift(other) / self

    def __pow__(self, e) -> "BigConstant":
        """Power with an int, Fraction or BigConstant exponent."""
        if isinstance(e, BigConstant):
            return self._pow_big(e)
        e = Fraction(e)
        expr = f"({self.expr})^({e})"
        if self.is_zero:
            if e <= 0:
                raise ValueError("0 to a nonpositive power")
            return BigConstant(None, 0, expr)
        with _prec():
            ln = self.ln * _ivq(e)
        exact = None
        if self.exact is not None and self._exact_ok(abs(ln).b):
            if e.denominator == 1:
                exact = _norm(Fraction(self.exact) ** e.numerator)
            else:
                r = _exact_rational_power(Fraction(self.exact), e)
                exact = None if r is None else _norm(r)
        return BigConstant(ln, exact, expr)

    def _pow_big(self, e: "BigConstant") -> "BigConstant":
        if e.exact is not None and Fraction(e.exact).denominator == 1 and _ilog10_upper(e.ln_hi) < 40:
            return self.__pow__(int(e.exact))
        expr = f"({self.expr})^({e.expr})"
        if self.is_zero:
            return BigConstant(None, 0, expr)
        with _prec():
            ln = self.ln * e.interval()
        exact = None
        if self.exact is not None and e.exact is not None and Fraction(e.exact).denominator == 1 and self._exact_ok(abs(ln).b):
            exact = _norm(Fraction(self.exact) ** int(e.exact))
        return BigConstant(ln, exact, expr)

    def sqrt(self) -> "BigConstant":
        return self ** Fraction(1, 2)

    def __add__(self, other) -> "BigConstant":
        other = self._lift(other)
        expr = f"{self.expr} + {other.expr}"
        if self.is_zero:
            return BigConstant(other.ln, other.exact, expr)
        if other.is_zero:
            return BigConstant(self.ln, self.exact, expr)
        with _prec():
            lo = _logaddexp(iv.mpf(self.ln.a), iv.mpf(other.ln.a))
            hi = _logaddexp(iv.mpf(self.ln.b), iv.mpf(other.ln.b))
            ln = iv.mpf([lo.a, hi.b])
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = _norm(Fraction(self.exact) + Fraction(other.exact))
        return BigConstant(ln, exact, expr)

    __radd__ = __add__

    def with_expr(self, expr: str) -> "BigConstant":
        return BigConstant(self.ln, self.exact, expr)

    def to_dict(self, max_exact_digits: int = EXACT_DIGITS) -> dict:
        exact = None
        if self.exact is not None:
            s = str(self.exact)
            exact = s if len(s) <= max_exact_digits else None
        return {
            "expr": self.expr,
            "exact": exact,
            "ln_lo": "-inf" if self.is_zero else mpmath.nstr(self.ln_lo, 45, strip_zeros=False),
            "ln_hi": "-inf" if self.is_zero else mpmath.nstr(self.ln_hi, 45, strip_zeros=False),
            "digits": self.digits,
            "log10": "-inf" if self.is_zero else mpmath.nstr(self.ln_value / mpmath.log(10), 20),
        }

    def __repr__(self) -> str:
        if self.exact is not None and len(str(self.exact)) < 60:
            return f"BigConstant({self.exact})"
        return f"BigConstant(ln~{mpmath.nstr(self.ln_value, 20)})"


def _norm(x: Fraction) -> int | Fraction:
    return x.numerator if x.denominator == 1 else x


def _logaddexp(a, b):
    """ln(e^a + e^b) for point intervals, outward rounded."""
    if a.a < b.a:
        a, b = b, a
    diff = b - a
    if diff.b < -2000:
        # log1p(e^diff) lies in [0, e^diff] and e^diff is negligible
        return a + iv.mpf([0, mpmath.mpf(2) ** -2800])
    return a + iv.log(1 + iv.exp(diff))


def compare(a: BigConstant, b: BigConstant) -> str:
    """'less', 'greater', 'equal' (exact only) or 'indeterminate'."""
    if a.exact is not None and b.exact is not None:
        x, y = Fraction(a.exact), Fraction(b.exact)
        return "less" if x < y else "greater" if x > y else "equal"
    if a.is_zero or b.is_zero:
        if a.is_zero and b.is_zero:
            return "equal"
        return "less" if a.is_zero else "greater"
    if a.ln.b < b.ln.a:
        return "less"
    if a.ln.a > b.ln.b:
        return "greater"
    return "indeterminate"


def hull_max(*cs: BigConstant) -> BigConstant:
    """Enclosure of the maximum of several constants."""
    cs = [c for c in cs if not c.is_zero] or list(cs[:1])
    expr = "max{" + ", ".join(c.expr for c in cs) + "}"
    if len(cs) == 1:
        return cs[0].with_expr(expr)
    with _prec():
        lo = max((c.ln.a for c in cs), key=lambda z: mpmath.mpf(z))
        hi = max((c.ln.b for c in cs), key=lambda z: mpmath.mpf(z))
        ln = iv.mpf([lo, hi])
    exact = None
    if all(c.exact is not None for c in cs):
        exact = max(cs, key=lambda c: Fraction(c.exact)).exact
    return BigConstant(ln, exact, expr)


def _product(factors: Iterable[tuple[int | Fraction, int]], expr: str) -> BigConstant:
    """prod base^exponent over positive bases and integer exponents."""
    factors = list(factors)
    with _prec():
        ln = iv.mpf(0)
        for base, e in factors:
            ln = ln + _ivq(e) * iv.log(_ivq(Fraction(base)))
    exact = None
    if _ilog10_upper(abs(ln).b) <= EXACT_DIGITS:
        acc = Fraction(1)
        for base, e in factors:
            acc *= Fraction(base) ** e
        exact = _norm(acc)
    return BigConstant(ln, exact, expr)


def _two_p_minus_one(p: BigConstant) -> BigConstant:
    if p.exact is not None:
        return BigConstant.of(2 * p.exact - 1, f"2*({p.expr})-1")
    # ln(2p - 1) = ln 2 + ln p + log1p(-1/(2p)), with -1/p <= log1p(-1/(2p)) < 0
    with _prec():
        slack = iv.mpf([-iv.exp(-p.ln).b, 0])
        ln = iv.log(iv.mpf(2)) + p.ln + slack
    return BigConstant(ln, None, f"2*({p.expr})-1")


def _ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


# -- elementary constants ----------------------------------------------------

@lru_cache(maxsize=None)
def zeta(s: int) -> BigConstant:
    """Riemann zeta at an integer s >= 2 via Euler-Maclaurin summation."""
    if s < 2:
        raise ValueError("zeta needs s >= 2")
    N, m = 40, 30
    with _prec(PREC + 32):
        S = iv.mpf(0)
        sv = iv.mpf(s)
        for n in range(1, N):
            S += iv.mpf(n) ** (-sv)
        NN = iv.mpf(N)
        S += NN ** (1 - sv) / (sv - 1) + NN ** (-sv) / 2
        rising = sv  # s(s+1)...(s+2j-2)
        term = None
        for j in range(1, m + 2):
            num, den = mpmath.bernfrac(2 * j)
            B = iv.mpf(int(num)) / iv.mpf(int(den))
            term = B / iv.mpf(math.factorial(2 * j)) * rising * NN ** (-sv - 2 * j + 1)
            if j == m + 1:
                break
            S += term
            rising = rising * (sv + 2 * j - 1) * (sv + 2 * j)
        # the remainder is bounded by the first omitted term for real s
        r = abs(term).b
        S = S + iv.mpf([-r, r])
    return BigConstant.from_iv(S, f"zeta({s})")


@lru_cache(maxsize=None)
def omega(k: int) -> BigConstant:
    """Volume of the unit ball in R^k."""
    if k < 0:
        raise ValueError("k >= 0")
    if k == 0:
        return BigConstant.of(1, "omega_0")
    if k == 1:
        return BigConstant.of(2, "omega_1")
    with _prec():
        w = omega(k - 2).interval() * 2 * iv.pi / k
    return BigConstant.from_iv(w, f"omega_{k}")


@lru_cache(maxsize=None)
def sphere_area(k: int) -> BigConstant:
    """Surface measure of the unit k-sphere, with the convention value 1 at k = 0."""
    if k == 0:
        return BigConstant.of(1, "v_0")
    with _prec():
        v = omega(k + 1).interval() * (k + 1)
    return BigConstant.from_iv(v, f"v_{k}")


def l(d: int) -> BigConstant:
    _check_d(d)
    return BigConstant.of(1 if d == 2 else 0, f"l({d})")


def _check_d(d: int) -> None:
    if int(d) != d or d < 2:
        raise ValueError("degree must be an integer >= 2")


@lru_cache(maxsize=None)
def p_deg(d: int) -> BigConstant:
    _check_d(d)
    t = 4 ** (d + 1)
    return _product([(4, (t - 1) // 3), (d, t)], f"p({d})")


@lru_cache(maxsize=None)
def s_deg(d: int) -> BigConstant:
    _check_d(d)
    return _product(
        [(3, 1), (2 * d + 3, 2 ** (d + 1)), (d, (16 ** (d + 1) - 1) * _ceil_log2(d))],
        f"s({d})",
    )


@lru_cache(maxsize=None)
def E1(d: int) -> BigConstant:
    """Coefficient of the reducible-polynomial count."""
    _check_d(d)
    base = _product([(6, 1), (d, 2), (2, d * (d - 2))], f"6*{d}^2*2^{d * (d - 2)}")
    return (base * BigConstant.of(d + 1) ** Fraction(d, 2)).with_expr(f"E1({d})")


@lru_cache(maxsize=None)
def K1(d: int) -> BigConstant:
    p = p_deg(d)
    big = BigConstant.of(2 ** (d + 2)) * p * _two_p_minus_one(p) ** s_deg(d)
    return (BigConstant.of(d) * (BigConstant.of(2) * E1(d) + big)).with_expr(f"K1({d})")


@lru_cache(maxsize=None)
def K2(d: int) -> BigConstant:
    _check_d(d)
    two_sqrt_d = BigConstant.of(4 * d) ** Fraction(1, 2)
    inner = BigConstant.of(4**d) + two_sqrt_d ** (d + 3) * omega(d - 1)
    return (BigConstant.of(Fraction(d * (d + 1), 2)) * inner).with_expr(f"K2({d})")


@lru_cache(maxsize=None)
def K3(d: int) -> BigConstant:
    a = K2(d) * (BigConstant.of(1) + BigConstant.of(2) * zeta(4))
    return (a + BigConstant.of(3 * d * (d + 1)) * zeta(3)).with_expr(f"K3({d})")


def density_floor(d: int) -> BigConstant:
    """(1/3d)(2/3d)^d, a lower bound for the density on [-1, 1]."""
    _check_d(d)
    return BigConstant.of(Fraction(1, 3 * d) * Fraction(2, 3 * d) ** d, f"m({d})")


@lru_cache(maxsize=None)
def K4(d: int) -> BigConstant:
    return (density_floor(d) / K3(d)).with_expr(f"K4({d})")


@lru_cache(maxsize=None)
def c_d_const(d: int) -> BigConstant:
    """Normalising constant of the restricted density, with its quadrature error."""
    from .koleda import c_d

    c = c_d(d)
    lo, hi = Fraction(c.value - c.err), Fraction(c.value + c.err)
    return BigConstant.from_interval(lo, hi, f"c_{d}")


@lru_cache(maxsize=None)
def total_mass_const(d: int) -> BigConstant:
    from .koleda import total_mass

    z = total_mass(d)
    return BigConstant.from_interval(Fraction(z.value - z.err), Fraction(z.value + z.err), f"Z_{d}")


@lru_cache(maxsize=None)
def K6(d: int) -> BigConstant:
    return (density_floor(d) / (c_d_const(d) * K2(d))).with_expr(f"K6({d})")


def nu_slope(d: int, mode: str) -> BigConstant:
    """Certified slope of the level-set bound: nu(delta) >= slope * delta.

    For the restricted density the normalising constant cancels between
    the Lipschitz bound and the minimum, leaving m(d) / K2(d).
    """
    if mode == "ModOne":
        return K4(d)
    return (density_floor(d) / K2(d)).with_expr(f"m({d})/K2({d})")


# -- error terms and thresholds ----------------------------------------------

def _log_factor(d: int, H) -> BigConstant:
    if l(d).exact == 0:
        return BigConstant.of(1)
    with _prec():
        return BigConstant.from_iv(iv.log(_ivq(Fraction(H))), f"log({H})")


def _H(H) -> BigConstant:
    H = Fraction(H)
    if H < 2:
        raise ValueError("H must be >= 2")
    return BigConstant.of(H, str(H))


def y_d(d: int, H) -> BigConstant:
    k = BigConstant.of(2) * c_d_const(d) * K1(d) * zeta(d + 1)
    return (k * _log_factor(d, H) / _H(H)).with_expr(f"y_{d}({H})")


def z_d(d: int, H) -> BigConstant:
    return (K1(d) * _log_factor(d, H) / _H(H)).with_expr(f"z_{d}({H})")


def E_restricted(d: int, H) -> BigConstant:
    return (BigConstant.of(5) * y_d(d, H)).with_expr(f"E_restricted({d},{H})")


def E_modone(d: int, H) -> BigConstant:
    return (BigConstant.of(24 * d) * z_d(d, H).sqrt()).with_expr(f"E_modone({d},{H})")


def E_of(mode: str, d: int, H) -> BigConstant:
    return E_modone(d, H) if mode == "ModOne" else E_restricted(d, H)


def C_of(d: int) -> BigConstant:
    return (BigConstant.of(24 * d) * K1(d).sqrt()).with_expr(f"C({d})")


def C_prime(d: int) -> BigConstant:
    return (BigConstant.of(10) * c_d_const(d) * K1(d) * zeta(d + 1)).with_expr(f"C'({d})")


def solve_H_threshold(d: int, which: str = "H", K: BigConstant | None = None, log_power: int | None = None) -> BigConstant:
    """Least H >= 2 with 2*K*(log H)^l / H <= 1.

    ``which`` selects K = K1(d) ("H") or K = c_d*K1(d)*zeta(d+1) ("H'");
    ``K`` and ``log_power`` override for experiments.
    """
    if K is None:
        if which == "H":
            K = K1(d)
        elif which in ("H'", "Hprime"):
            K = c_d_const(d) * K1(d) * zeta(d + 1)
        else:
            raise ValueError("which must be 'H' or \"H'\"")
    lp = int(l(d).exact) if log_power is None else log_power
    tag = f"{which}({d})"
    twoK = BigConstant.of(2) * K
    if twoK.ln.b < 30:
        return _threshold_small(twoK, lp, tag)
    if lp == 0:
        with _prec():
            # H = ceil(2K) lies in [2K, 2K + 1)
            hi = iv.log(iv.exp(twoK.ln) + 1) if twoK.ln.b < 1e6 else twoK.ln + iv.mpf([0, iv.exp(-twoK.ln).b])
            ln = iv.mpf([twoK.ln.a, hi.b])
        exact = None
        if twoK.exact is not None:
            exact = max(2, math.ceil(Fraction(twoK.exact)))
        return BigConstant(ln, exact, tag)
    # H / log H >= 2K: solve L - ln L = ln(2K) for L = ln H
    with _prec():
        lo = _solve_l_minus_ln(iv.mpf(twoK.ln.a), lp, upper=False)
        hi = _solve_l_minus_ln(iv.mpf(twoK.ln.b), lp, upper=True)
        # rounding H* up to an integer moves ln H by less than 1/H*
        hi = hi + iv.exp(-lo)
        ln = iv.mpf([lo.a, hi.b])
    return BigConstant(ln, None, tag)


def _solve_l_minus_ln(A, lp: int, upper: bool):
    """Enclosing endpoint for the root of L - lp*ln L = A (A large)."""
    L = A
    for _ in range(60):
        L = A + lp * iv.log(L)
    step = abs(L).b * iv.mpf(2) ** (-(iv.prec - 16)) + iv.mpf(2) ** (-(iv.prec - 16))
    for _ in range(20):
        cand = iv.mpf((L + step).b) if upper else iv.mpf((L - step).a)
        g = cand - lp * iv.log(cand) - A
        if (upper and g.a > 0) or (not upper and g.b < 0):
            return cand
        step *= 16
    raise ArithmeticError("threshold bracket did not certify")


def _threshold_small(twoK: BigConstant, lp: int, tag: str) -> BigConstant:
    H = 2
    with _prec():
        k = twoK.interval()
        while True:
            lhs = k * (iv.log(iv.mpf(H)) ** lp if lp else 1)
            if lhs.b <= H:
                break
            if lhs.a <= H:
                raise ArithmeticError("threshold undecided at working precision")
            H += 1
    return BigConstant.of(H, tag)


# -- constants of the probability bounds ----------------------------------------

MODES = ("ModOne", "Restricted")


def C1(d: int, mode: str) -> BigConstant:
    return K4(d) if mode == "ModOne" else K6(d)


def C2(d: int, mode: str, variant: str = "certified") -> BigConstant:
    """8*max{max rho, eta, max{max rho, eta}/min rho} for the target density.

    ``certified`` uses provable density bounds with the measured
    normalising constants; ``simplified`` uses the closed-form bounds
    as quoted; ``quadrature`` samples the density.
    """
    top, eta, bottom = density_extremes(d, mode, variant)
    inner = hull_max(top, eta)
    return (BigConstant.of(8) * hull_max(top, eta, inner / bottom)).with_expr(f"C2({d},{mode},{variant})")


def density_ceiling(d: int) -> BigConstant:
    """2^(d-1) d(d+1)/2, the integral of sum k|p_k| over [-1, 1]^d.

    This is what the cube argument actually bounds rho_d by; the sharper
    d(d+1)/2 sometimes quoted is exceeded (rho_2 reaches about 3.07).
    """
    _check_d(d)
    return BigConstant.of(Fraction(2 ** (d - 1) * d * (d + 1), 2), f"M({d})")


def density_extremes(d: int, mode: str, variant: str = "certified") -> tuple[BigConstant, BigConstant, BigConstant]:
    """(upper bound of max, Lipschitz constant, lower bound of min) on [0, 1].

    ``simplified`` keeps the quoted maximum d(d+1)/2; ``certified`` uses
    density_ceiling, which is a true bound.
    """
    m = density_floor(d)
    half = BigConstant.of(Fraction(d * (d + 1), 2))
    ceiling = density_ceiling(d)
    if variant == "quadrature":
        return _sampled_extremes(d, mode)
    if mode == "ModOne":
        # rho(y) <= M / y^2 off [-1, 1], so the periodised sum is at most 2M(1 + zeta(2))
        one_plus = BigConstant.of(1) + zeta(2)
        eta = K3(d)
        if variant == "certified":
            Z = total_mass_const(d)
            return BigConstant.of(2) * ceiling * one_plus / Z, eta / Z, m / Z
        if variant == "simplified":
            return BigConstant.of(2) * half * one_plus, eta, m
    else:
        if variant == "certified":
            c = c_d_const(d)
            return c * ceiling, c * K2(d), c * m
        if variant == "simplified":
            c_hi = BigConstant.of(3 * d * Fraction(3 * d, 2) ** d)
            low = BigConstant.of(Fraction(d + 1, 6) * Fraction(2, 3 * d) ** d)
            return c_hi * half, c_hi * K2(d), low
    raise ValueError(f"unknown variant {variant!r} or mode {mode!r}")


def _sampled_extremes(d: int, mode: str):
    import numpy as np

    from .koleda import DensityModel

    model = DensityModel(d, "XiPeriodised" if mode == "ModOne" else "ChiRestricted")
    vals = [model(float(x)).value for x in np.linspace(0, 1, 201)]
    eta = K3(d) / total_mass_const(d) if mode == "ModOne" else c_d_const(d) * K2(d)
    return (BigConstant.of(Fraction(max(vals)), "sampled max"), eta,
            BigConstant.of(Fraction(min(vals)), "sampled min"))


# -- semialgebraic counting constants -------------------------------------------

def _check_family(degrees: tuple[int, ...], n: int) -> None:
    if n < 1 or not degrees or any(d < 1 for d in degrees):
        raise ValueError("need n >= 1 and positive degrees")


def family_D(degrees: tuple[int, ...]) -> int:
    return sum(d + 1 for d in degrees)


def family_S(degrees: tuple[int, ...], n: int, sZ: int) -> int:
    return sZ + n * (family_D(degrees) + math.prod(degrees) ** n + 1)


def family_P(degrees: tuple[int, ...], pZ: int) -> int:
    return max(pZ, max(degrees))


@lru_cache(maxsize=None)
def s_family(degrees: tuple[int, ...], n: int, pZ: int, sZ: int) -> BigConstant:
    _check_family(degrees, n)
    t = family_D(degrees) + n
    S, P = family_S(degrees, n, sZ), family_P(degrees, pZ)
    e2 = (16**t - 1) * _ceil_log2(P)
    if t <= 8:
        return _product([(3, 1), (S, 2**t), (P, e2)], f"s(Z,{degrees})")
    # exponents too large for exact big-integer products
    with _prec():
        ln = iv.log(iv.mpf(3)) + iv.mpf(2**t) * iv.log(iv.mpf(S)) + iv.mpf(e2) * iv.log(iv.mpf(P))
    return BigConstant(ln, None, f"s(Z,{degrees})")


@lru_cache(maxsize=None)
def p_family(degrees: tuple[int, ...], n: int, pZ: int) -> BigConstant:
    _check_family(degrees, n)
    t = family_D(degrees) + n
    P = family_P(degrees, pZ)
    if t <= 8:
        return _product([(4, (4**t - 1) // 3), (P, 4**t)], f"p(Z,{degrees})")
    with _prec():
        ln = iv.mpf((4**t - 1) // 3) * iv.log(iv.mpf(4)) + iv.mpf(4**t) * iv.log(iv.mpf(P))
    return BigConstant(ln, None, f"p(Z,{degrees})")


@lru_cache(maxsize=None)
def M1(degrees: tuple[int, ...], n: int, pZ: int, sZ: int) -> BigConstant:
    degrees = tuple(degrees)
    _check_family(degrees, n)
    D = family_D(degrees)
    p = p_family(degrees, n, pZ)
    s = s_family(degrees, n, pZ, sZ)
    e1max = hull_max(*[_E1_any(d) for d in degrees])
    first = BigConstant.of(2 ** (n * n)) * e1max
    expo = s + (n - 1) if n > 1 else s
    second = BigConstant.of(2 ** (n * (2 * D + 1) + 1)) * p * _two_p_minus_one(p) ** expo
    lead = BigConstant.of(math.prod(degrees) ** n)
    return (lead * (first + second)).with_expr(f"M1(pZ={pZ},sZ={sZ},d={degrees},n={n})")


def _E1_any(d: int) -> BigConstant:
    # degree-1 entries can appear in families; the formula extends verbatim
    base = BigConstant.of(Fraction(6 * d * d) * Fraction(2) ** (d * (d - 2)))
    return base * BigConstant.of(d + 1) ** Fraction(d, 2)


def M1_roth(d: int) -> BigConstant:
    """The counting constant for real intervals: one relation pair, linear."""
    return M1((d,), 1, 1, 2)


def davenport_C(p: int, s: int, n: int) -> BigConstant:
    if p < 1 or s < 0 or n < 1:
        raise ValueError("need p >= 1, s >= 0, n >= 1")
    return BigConstant.of(p * (2 * p - 1) ** (n + s - 1), f"C(Y)[p={p},s={s},n={n}]")


@lru_cache(maxsize=None)
def C_prime_n(n: int) -> BigConstant:
    if n < 2:
        raise ValueError("n >= 2")
    terms = [BigConstant.of((2 * 3**n) ** (n - k)) * omega(k) for k in range(n)]
    head = BigConstant.of(2**n) * omega(n)
    return (head + BigConstant.of(n) * hull_max(*terms)).with_expr(f"C'_{n}")


def C_tilde_n(degrees: tuple[int, ...], n: int) -> BigConstant:
    acc = BigConstant.of(1)
    for d in degrees:
        acc = acc * (BigConstant.of(d * (d + 1)) / (BigConstant.of(2 ** (n + 1)) * zeta(d + 1)))
    return (acc ** n).with_expr(f"C~_{n}({tuple(degrees)})")


def M2(n: int) -> BigConstant:
    if n < 2:
        raise ValueError("n >= 2")
    return (BigConstant.of(2 ** (n + 1)) * sphere_area(n - 2)).with_expr(f"M2(sigma,{n})")


def C_hat_n(degrees: tuple[int, ...], n: int) -> BigConstant:
    return M1(tuple(degrees), n, 4 * n + 1, n + 1).with_expr(f"C^_{n}({tuple(degrees)})")


@lru_cache(maxsize=None)
def C_n(degrees: tuple[int, ...], n: int) -> BigConstant:
    degrees = tuple(degrees)
    inner = BigConstant.of(4 * (4 * n) ** (n - 1)) * C_tilde_n(degrees, n) * sphere_area(n - 2)
    return (C_prime_n(n) * (inner + C_hat_n(degrees, n))).with_expr(f"C_{n}({degrees},sigma)")


# -- ledger --------------------------------------------------------------------

def _deg_tuple(v) -> tuple[int, ...]:
    if isinstance(v, int):
        return (v,)
    if isinstance(v, str):
        return tuple(int(x) for x in v.replace("(", "").replace(")", "").split(",") if x.strip())
    return tuple(int(x) for x in v)


_REGISTRY: dict[str, tuple[Callable[..., BigConstant], tuple[str, ...]]] = {
    "l": (l, ("d",)),
    "p": (p_deg, ("d",)),
    "s": (s_deg, ("d",)),
    "K1": (K1, ("d",)),
    "K2": (K2, ("d",)),
    "K3": (K3, ("d",)),
    "K4": (K4, ("d",)),
    "K6": (K6, ("d",)),
    "c_d": (c_d_const, ("d",)),
    "E1": (E1, ("d",)),
    "y": (y_d, ("d", "H")),
    "z": (z_d, ("d", "H")),
    "E_restricted": (E_restricted, ("d", "H")),
    "E_modone": (E_modone, ("d", "H")),
    "C": (C_of, ("d",)),
    "C_prime": (C_prime, ("d",)),
    "H_threshold": (lambda d: solve_H_threshold(d, "H"), ("d",)),
    "H_prime_threshold": (lambda d: solve_H_threshold(d, "H'"), ("d",)),
    "nu_slope": (nu_slope, ("d", "mode")),
    "C1": (C1, ("d", "mode")),
    "C2": (C2, ("d", "mode", "variant")),
    "D": (lambda degrees: BigConstant.of(family_D(degrees), "D"), ("degrees",)),
    "S": (lambda degrees, n, sZ: BigConstant.of(family_S(degrees, n, sZ), "S"), ("degrees", "n", "sZ")),
    "P": (lambda degrees, pZ: BigConstant.of(family_P(degrees, pZ), "P"), ("degrees", "pZ")),
    "s_Z": (s_family, ("degrees", "n", "pZ", "sZ")),
    "p_Z": (p_family, ("degrees", "n", "pZ")),
    "M1": (M1, ("degrees", "n", "pZ", "sZ")),
    "M1_roth": (M1_roth, ("d",)),
    "davenport_C": (davenport_C, ("p", "s", "n")),
    "C_prime_n": (C_prime_n, ("n",)),
    "C_tilde_n": (C_tilde_n, ("degrees", "n")),
    "M2": (M2, ("n",)),
    "C_hat_n": (C_hat_n, ("degrees", "n")),
    "C_n": (C_n, ("degrees", "n")),
    "omega": (omega, ("k",)),
    "v": (sphere_area, ("k",)),
    "zeta": (zeta, ("s",)),
}

NAMES = tuple(_REGISTRY)


def _coerce(key: str, v):
    if key == "degrees":
        return _deg_tuple(v)
    if key in ("mode", "variant"):
        return str(v)
    if key == "H":
        f = Fraction(v)
        return f.numerator if f.denominator == 1 else f
    return int(v)


class ConstantsLedger:
    """Memo table from (name, parameters) to constants."""

    def __init__(self):
        self._table: dict[tuple, BigConstant] = {}

    def get(self, name: str, params: dict | None = None, **kw) -> BigConstant:
        params = {**(params or {}), **kw}
        if name not in _REGISTRY:
            raise KeyError(f"unknown constant {name!r}; known: {', '.join(NAMES)}")
        fn, keys = _REGISTRY[name]
        if name == "C2":
            params.setdefault("variant", "certified")
        missing = [k for k in keys if k not in params]
        if missing:
            raise ValueError(f"{name} needs parameters {missing}")
        extra = set(params) - set(keys)
        if extra:
            raise ValueError(f"{name} does not take {sorted(extra)}")
        args = tuple(_coerce(k, params[k]) for k in keys)
        key = (name, args)
        if key not in self._table:
            self._table[key] = fn(*args)
        return self._table[key]

    def entries(self) -> list[tuple[str, tuple, BigConstant]]:
        return [(n, a, c) for (n, a), c in self._table.items()]

    @staticmethod
    def parameters(name: str) -> tuple[str, ...]:
        return _REGISTRY[name][1]


LEDGER = ConstantsLedger()


def get(name: str, params: dict | None = None, **kw) -> BigConstant:
    return LEDGER.get(name, params, **kw)
