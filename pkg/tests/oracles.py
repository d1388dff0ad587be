"""Independent reference implementations.

Nothing here imports effroth: each oracle re-derives its quantity from the
definitions with plain integers, mpmath or numpy, so agreement with the
library is evidence rather than tautology.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np

# -- algebraic numbers of bounded height ----------------------------------------


def _has_rational_root(coeffs: tuple[int, ...]) -> bool:
    """coeffs a0..ad; brute rational-root test (d <= 3 means irreducible iff none)."""
    a0, ad = coeffs[0], coeffs[-1]
    if a0 == 0:
        return True
    for p in range(1, abs(a0) + 1):
        if a0 % p:
            continue
        for q in range(1, abs(ad) + 1):
            if ad % q:
                continue
            for s in (p, -p):
                # evaluate q^d f(s/q) exactly
                if sum(c * s**k * q ** (len(coeffs) - 1 - k) for k, c in enumerate(coeffs)) == 0:
                    return True
    return False


def naive_census(d: int, H: int, dps: int = 30) -> list[mpmath.mpf]:
    """All real algebraic numbers of degree d (<= 3) and height <= H.

    Runs over every coefficient vector with nonzero leading term, keeps
    those without rational roots, takes numeric roots and deduplicates by
    their dps-digit value; primitive or not, either sign.
    """
    if d > 3:
        raise ValueError("the rational-root criterion only decides d <= 3")
    seen: dict[str, mpmath.mpf] = {}
    with mpmath.workdps(dps + 10):
        for cs in itertools.product(range(-H, H + 1), repeat=d + 1):
            if cs[-1] <= 0:  # -f has the same roots
                continue
            if _has_rational_root(cs):
                continue
            for r in mpmath.polyroots(list(reversed(cs)), maxsteps=200, extraprec=60):
                if abs(mpmath.im(r)) < mpmath.mpf(10) ** (-dps):
                    x = mpmath.re(r)
                    seen.setdefault(mpmath.nstr(x, dps), x)
    return sorted(seen.values())


def census_summary(d: int, H: int) -> dict:
    xs = naive_census(d, H)
    restricted = [x for x in xs if 0 <= x <= 1]
    residues = {mpmath.nstr(x - mpmath.floor(x), 25) for x in xs}
    return {"total": len(xs), "restricted": len(restricted), "residues": len(residues)}


# -- Farey sequences and interval sets -------------------------------------------


def brute_farey(order: int) -> list[Fraction]:
    return sorted({Fraction(p, q) for q in range(1, order + 1) for p in range(q + 1)})


def brute_J(psi_values: dict[int, Fraction], Q1: int, Q2: int) -> list[tuple[Fraction, Fraction]]:
    """Union of clipped balls around every p/q, merged by a plain sweep."""
    balls = []
    for q in range(Q1, Q2):
        r = psi_values[q] / q
        for p in range(q + 1):
            c = Fraction(p, q)
            balls.append((max(Fraction(0), c - r), min(Fraction(1), c + r)))
    balls.sort()
    merged: list[list[Fraction]] = []
    for a, b in balls:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def brute_len_star(psi_values: dict[int, Fraction], Q1: int, Q2: int) -> Fraction:
    """Shortest component of the closure of [0, 1] minus the balls (0 if
    empty).  Gaps separated by a single covered point fuse in the closure."""
    J = brute_J(psi_values, Q1, Q2)
    gaps: list[list[Fraction]] = []
    prev = Fraction(0)
    for a, b in J + [(Fraction(2), Fraction(2))]:
        lo, hi = prev, min(a, Fraction(1))
        if hi > lo:
            if gaps and gaps[-1][1] == lo:
                gaps[-1][1] = hi
            else:
                gaps.append([lo, hi])
        prev = max(prev, b)
    return min((b - a for a, b in gaps), default=Fraction(0))


# -- reducible quadratics -------------------------------------------------------------


def reducible_quadratics(H: int) -> int:
    """#{(a0, a1, a2) : |ai| <= H, a2 != 0, a2 x^2 + a1 x + a0 = (b1 x + b0)(c1 x + c0)}.

    Builds every product of two integer linear factors whose coefficients can
    occur and keeps the distinct ones of height <= H.
    """
    r = np.arange(-H, H + 1, dtype=np.int64)
    c1, c0 = np.meshgrid(r[r != 0], r, indexing="ij")
    c1, c0 = c1.ravel(), c0.ravel()
    found = set()
    base = 2 * H + 1
    for b1 in range(1, H + 1):
        for b0 in range(-H, H + 1):
            a2, a1, a0 = b1 * c1, b1 * c0 + b0 * c1, b0 * c0
            ok = (np.abs(a2) <= H) & (np.abs(a1) <= H) & (np.abs(a0) <= H)
            code = ((a2[ok] + H) * base + (a1[ok] + H)) * base + (a0[ok] + H)
            found.update(code.tolist())
    return len(found)


# -- lattice points ---------------------------------------------------------------------


def brute_lattice_count(pred, lo, hi) -> int:
    return sum(1 for p in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))) if pred(*p))


# -- constants -----------------------------------------------------------------------------


def s_roth(d: int) -> int:
    return 3 * (2 * d + 3) ** (2 ** (d + 1)) * d ** ((16 ** (d + 1) - 1) * math.ceil(math.log2(d)))


def p_roth(d: int) -> int:
    return 4 ** ((4 ** (d + 1) - 1) // 3) * d ** (4 ** (d + 1))


def ln_K1(d: int, dps: int = 60) -> mpmath.mpf:
    """ln of d (12 d^2 2^(d(d-2)) (d+1)^(d/2) + 2^(d+2) p (2p-1)^s)."""
    with mpmath.workdps(dps):
        p, s = p_roth(d), s_roth(d)
        ln_big = (d + 2) * mpmath.log(2) + mpmath.log(p) + mpmath.mpf(s) * mpmath.log(2 * p - 1)
        small = 12 * d * d * mpmath.mpf(2) ** (d * (d - 2)) * mpmath.mpf(d + 1) ** (mpmath.mpf(d) / 2)
        return mpmath.log(d) + ln_big + mpmath.log1p(mpmath.exp(mpmath.log(small) - ln_big))


def ln_M1_roth(d: int, dps: int = 60) -> mpmath.mpf:
    """Counting constant for intervals: n = 1, s(Z) = 2, p(Z) = 1."""
    n, sZ, pZ = 1, 2, 1
    D = d + 1
    S = sZ + n * (D + d**n + 1)
    P = max(pZ, d)
    s = 3 * S ** (2 ** (D + n)) * P ** ((16 ** (D + n) - 1) * math.ceil(math.log2(P)))
    p = 4 ** ((4 ** (D + n) - 1) // 3) * P ** (4 ** (D + n))
    with mpmath.workdps(dps):
        ln_big = (n * (2 * D + 1) + 1) * mpmath.log(2) + mpmath.log(p) + mpmath.mpf(s + n - 1) * mpmath.log(2 * p - 1)
        return n * mpmath.log(d) + ln_big


# -- projective distances and the subspace inequality ------------------------------------


def primitive_lines(n: int, Qmax: int) -> list[tuple[int, ...]]:
    out = []
    for v in itertools.product(range(-Qmax, Qmax + 1), repeat=n):
        if not any(v) or sum(x * x for x in v) > Qmax * Qmax:
            continue
        if math.gcd(*v) != 1:
            continue
        first = next(x for x in v if x)
        if first > 0:
            out.append(v)
    return out


def subspace_sides(directions, q, psi, dps: int = 50):
    """(product of hyperplane distances, defect * Psi(H) / H^n) in mpmath."""
    with mpmath.workdps(dps):
        X = [[mpmath.mpf(x) for x in row] for row in directions]
        n = len(X)
        qn = mpmath.sqrt(sum(mpmath.mpf(c) ** 2 for c in q))
        lhs = mpmath.mpf(1)
        for row in X:
            norm = mpmath.sqrt(sum(x * x for x in row))
            lhs *= abs(sum(x * c for x, c in zip(row, q))) / (norm * qn)
        norms = mpmath.fprod(mpmath.sqrt(sum(x * x for x in row)) for row in X)
        defect = abs(mpmath.det(mpmath.matrix(X))) / norms
        return lhs, defect * psi(qn) / qn**n


def brute_solutions(directions, psi, Qmax: int, dps: int = 50) -> list[tuple[int, ...]]:
    n = len(directions)
    out = []
    for q in primitive_lines(n, Qmax):
        lhs, rhs = subspace_sides(directions, q, psi, dps)
        if lhs <= rhs:
            out.append(q)
    return sorted(out, key=lambda v: (sum(x * x for x in v), v))


def stereo_direction(s: float) -> tuple[float, float]:
    """Direction of the line with one stereographic coordinate s."""
    return (1 - s * s, 2 * s)


def brute_ratio_n2(points: np.ndarray, psi_float, Q1: float, Q2: float) -> tuple[int, int]:
    """Ordered pairs of distinct census points, k = 1: some primitive q with
    Q1 <= |q| <= Q2 satisfies the inequality.  Plain numpy, no shortcuts."""
    lines = np.array([q for q in primitive_lines(2, int(math.floor(Q2))) if Q1**2 <= q[0] ** 2 + q[1] ** 2 <= Q2**2],
                     dtype=float)
    qn = np.hypot(lines[:, 0], lines[:, 1])
    rhs_q = psi_float(qn) / qn**2
    D = np.stack([1 - points**2, 2 * points], axis=1)
    D /= np.linalg.norm(D, axis=1)[:, None]
    dist = np.abs(D @ lines.T) / qn[None, :]  # point x line
    hits = total = 0
    for i in range(len(points)):
        others = np.arange(len(points)) != i
        defect = np.abs(D[i, 0] * D[others, 1] - D[i, 1] * D[others, 0])
        lhs = dist[i][None, :] * dist[others]
        ok = np.any(lhs <= defect[:, None] * rhs_q[None, :], axis=1)
        hits += int(np.count_nonzero(ok))
        total += int(np.count_nonzero(others))
    return hits, total


def golden_sides(Q_line, psi_value, dps: int = 60):
    """Golden-ratio pair [(1, phi), (0, 1)] against Lambda."""
    with mpmath.workdps(dps):
        phi = (1 + mpmath.sqrt(5)) / 2
        v = mpmath.mpf(Fraction(psi_value).numerator) / Fraction(psi_value).denominator
        return subspace_sides([[1, phi], [0, 1]], Q_line, lambda h: v, dps)


def E1_value(d: int, dps: int = 40) -> mpmath.mpf:
    with mpmath.workdps(dps):
        return 6 * d * d * mpmath.mpf(2) ** (d * (d - 2)) * mpmath.mpf(d + 1) ** (mpmath.mpf(d) / 2)


def ball_volume(k: int, dps: int = 40) -> mpmath.mpf:
    with mpmath.workdps(dps):
        return mpmath.pi ** (mpmath.mpf(k) / 2) / mpmath.gamma(mpmath.mpf(k) / 2 + 1)


def sphere_measure(k: int, dps: int = 40) -> mpmath.mpf:
    """Surface measure of the unit k-sphere; 1 at k = 0 by convention."""
    if k == 0:
        return mpmath.mpf(1)
    with mpmath.workdps(dps):
        return 2 * mpmath.pi ** (mpmath.mpf(k + 1) / 2) / mpmath.gamma(mpmath.mpf(k + 1) / 2)


def davenport_constant(p: int, s: int, n: int) -> int:
    return p * (2 * p - 1) ** (n + s - 1)
