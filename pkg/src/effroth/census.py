"""Censuses of real algebraic numbers of fixed degree and bounded height.

Every algebraic number is stored as its minimal polynomial plus the dyadic
cell (c / 2^CELL_BITS, (c+1) / 2^CELL_BITS) containing it.  The cell is
canonical (a root of an irreducible polynomial of degree >= 2 is never a
dyadic rational), so equal numbers always produce identical records and
deduplication needs no tolerance.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from math import comb, isqrt
from pathlib import Path
from typing import Iterable

import numpy as np

from .algebra import (
    AlgebraicNumber,
    IntPolynomial,
    RootInterval,
    compare_algebraic,
    compare_to_rational,
    is_irreducible,
    real_roots,
)
from .intervalsets import RationalIntervalSet

CELL_BITS = 40
ONE = 1 << CELL_BITS
DEFAULT_BUDGET = 10**8
MODES = ("ModOne", "Restricted")


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class CensusSpec:
    d: int
    H: int
    mode: str = "Restricted"

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("degree must be at least 2")
        if self.H < 0:
            raise ValueError("height must be nonnegative")
        mode = parse_mode(self.mode)
        object.__setattr__(self, "mode", mode)


def parse_mode(mode: str) -> str:
    for m in MODES:
        if m.lower() == str(mode).lower():
            return m
    raise ValueError(f"unknown census mode {mode!r}")


@dataclass(frozen=True, eq=False)
class Census:
    spec: CensusSpec
    coeffs: np.ndarray  # (m, d+1) minimal polynomials, a0..ad
    cells: np.ndarray  # (m,) dyadic cells, sorted
    mult: np.ndarray  # (m,) multiplicities
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_cum", np.concatenate([[0], np.cumsum(self.mult)]))

    @property
    def total(self) -> int:
        return int(self._cum[-1])

    def __len__(self) -> int:
        return len(self.cells)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Census):
            return NotImplemented
        return (
            self.spec == other.spec
            and np.array_equal(self.coeffs, other.coeffs)
            and np.array_equal(self.cells, other.cells)
            and np.array_equal(self.mult, other.mult)
        )

    def number(self, i: int) -> AlgebraicNumber:
        c = int(self.cells[i])
        iso = RootInterval(Fraction(c, ONE), Fraction(c + 1, ONE))
        return AlgebraicNumber(IntPolynomial(self.coeffs[i].tolist()), iso)

    @property
    def samples(self) -> list[tuple[AlgebraicNumber, int]]:
        return [(self.number(i), int(self.mult[i])) for i in range(len(self))]

    def points(self) -> np.ndarray:
        """Float positions (cell midpoints, accurate to 2^-41)."""
        return (self.cells.astype(np.float64) + 0.5) / ONE

    def _first_at_least(self, r: Fraction, strict: bool) -> int:
        """Index of the first sample >= r (or > r when strict)."""
        scaled = r * ONE
        c = scaled.numerator // scaled.denominator
        left = int(np.searchsorted(self.cells, c, "left"))
        right = int(np.searchsorted(self.cells, c, "right"))
        if scaled.denominator == 1:
            # r is the left edge of cell c, every sample there exceeds r
            return left
        i = left
        while i < right:
            cmp = compare_to_rational(self.number(i), r)
            if cmp > 0 or (cmp == 0 and not strict):
                break
            i += 1
        return i

    def count_in(self, S: RationalIntervalSet) -> int:
        total = 0
        for lo, hi in S.components:
            i = self._first_at_least(lo, strict=False)
            j = self._first_at_least(hi, strict=True)
            if j > i:
                total += int(self._cum[j] - self._cum[i])
        return total

    def measure(self, S: RationalIntervalSet) -> Fraction:
        if self.total == 0:
            return Fraction(0)
        return Fraction(self.count_in(S), self.total)


# -- enumeration -------------------------------------------------------------

def _coefficient_grid(d: int, H: int, lead: int) -> np.ndarray:
    axes = [np.arange(-H, H + 1, dtype=np.int64)] * d
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    lead_col = np.full((mesh.shape[0], 1), lead, dtype=np.int64)
    return np.hstack([mesh, lead_col])


def _primitive_rows(P: np.ndarray) -> np.ndarray:
    g = np.gcd.reduce(np.abs(P), axis=1)
    return P[g == 1]


def _quadratic_cells(P: np.ndarray) -> tuple[np.ndarray, list[int]]:
    c, b, a = P[:, 0], P[:, 1], P[:, 2]
    D = b * b - 4 * a * c
    keep = D > 0
    r = np.floor(np.sqrt(D.clip(0).astype(np.float64))).astype(np.int64)
    r -= (r * r > D).astype(np.int64)
    r += ((r + 1) * (r + 1) <= D).astype(np.int64)
    keep &= r * r != D
    P = P[keep]
    owners: list[int] = []
    cells: list[int] = []
    for i, (c_, b_, a_) in enumerate(P.tolist()):
        disc = b_ * b_ - 4 * a_ * c_
        s = isqrt(disc << (2 * CELL_BITS))
        top = -b_ << CELL_BITS
        # sqrt(disc) * 2^K lies strictly inside (s, s+1); see notes on floors
        cells.append((top - s - 1) // (2 * a_))
        cells.append((top + s) // (2 * a_))
        owners += [i, i]
    return P, list(zip(owners, cells))


def _sign_at_cell_edge(cs: list[int], n: int) -> int:
    # sign of p(n / 2^K) scaled by 2^(K d)
    acc = 0
    pw = 1
    for c in reversed(cs):
        acc = acc * n + c * pw
        pw <<= CELL_BITS
    return (acc > 0) - (acc < 0)


def _cell_of(p: IntPolynomial, iso: RootInterval) -> int:
    lo, hi = iso.lo, iso.hi
    s_hi = p.sign_at(hi)
    while hi - lo >= Fraction(1, ONE):
        mid = (lo + hi) / 2
        if p.sign_at(mid) == s_hi:
            hi = mid
        else:
            lo = mid
    g = -((-lo.numerator * ONE) // lo.denominator)  # ceil(lo * 2^K)
    if Fraction(g, ONE) < hi:
        return g - 1 if _sign_at_cell_edge(list(p.coeffs), g) == s_hi else g
    return (lo.numerator * ONE) // lo.denominator


def _exact_cells(cs: list[int]) -> list[int] | None:
    p = IntPolynomial(cs)
    if not is_irreducible(p):
        return None
    return [_cell_of(p, iso) for iso in real_roots(p, Fraction(1, ONE))]


def _cubic_discriminant(P: np.ndarray) -> np.ndarray:
    d_, c, b, a = (P[:, k] for k in range(4))
    return b * b * c * c - 4 * a * c**3 - 4 * b**3 * d_ - 27 * a * a * d_ * d_ + 18 * a * b * c * d_


def _certified_signs(P: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Sign of p(n / 2^K) per row; float Horner with a rigorous error bound,
    exact integers where the bound is inconclusive."""
    x = n.astype(np.float64) / ONE  # exact: |n| < 2^53
    d = P.shape[1] - 1
    val = np.zeros(len(P))
    mag = np.zeros(len(P))
    ax = np.abs(x)
    for k in range(d, -1, -1):
        val = val * x + P[:, k]
        mag = mag * ax + np.abs(P[:, k])
    err = 4 * (d + 1) * 2.0**-53 * mag
    out = np.where(np.abs(val) > err, np.sign(val), 0).astype(np.int64)
    for i in np.flatnonzero(out == 0):
        out[i] = _sign_at_cell_edge(P[i].tolist(), int(n[i]))
    return out


def _cubic_cells(P: np.ndarray, lead: int):
    """Vectorized degree-3 path; returns kept rows, (row, cell) pairs and
    the rows that need the exact fallback."""
    disc = _cubic_discriminant(P)
    P = P[disc != 0]  # a repeated root means a rational factor
    disc = disc[disc != 0]
    expected = np.where(disc > 0, 3, 1)
    comp = np.zeros((len(P), 3, 3))
    comp[:, 1:, :-1] = np.eye(2)
    comp[:, :, -1] = -P[:, :3] / P[:, 3:4]
    roots = np.linalg.eigvals(comp)
    real = np.abs(roots.imag) <= 1e-7 * (1 + np.abs(roots.real))
    good = real.sum(axis=1) == expected
    r = np.sort(np.where(real, roots.real, np.nan), axis=1)
    # rational roots u/s (s | lead) are found from the float estimates;
    # a miss only sends the row to the exact fallback below
    reducible = np.zeros(len(P), dtype=bool)
    for s in (t for t in range(1, lead + 1) if lead % t == 0):
        for j in range(3):
            u = np.rint(np.nan_to_num(r[:, j]) * s).astype(np.int64)
            val = P[:, 3] * u**3 + P[:, 2] * u**2 * s + P[:, 1] * u * s**2 + P[:, 0] * s**3
            reducible |= ~np.isnan(r[:, j]) & (val == 0)
    P, r, good = P[~reducible], r[~reducible], good[~reducible]
    none = np.iinfo(np.int64).min
    cells = np.full(r.shape, none)
    ok = good.copy()
    for j in range(3):
        active = good & ~np.isnan(r[:, j])
        n0 = np.floor(np.nan_to_num(r[:, j]) * ONE).astype(np.int64)
        found = np.zeros(len(P), dtype=bool)
        for off in (0, -1, 1):
            n = n0 + off
            a, b = _certified_signs(P, n), _certified_signs(P, n + 1)
            hit = active & ~found & (a * b == -1)
            cells[hit, j] = n[hit]
            found |= hit
        ok &= found | ~active
    # distinct roots must sit in distinct cells
    for j in (1, 2):
        both = ok & ~np.isnan(r[:, j])
        ok &= ~(both & (cells[:, j] == cells[:, j - 1]))
    # with every real root certified, a rational root u/s would have been
    # caught above since the estimates are accurate to far below 1/(2s)
    rows = np.flatnonzero(ok)
    sub = cells[rows]
    owner, slot = np.nonzero(sub != none)
    pairs = list(zip(owner.tolist(), sub[owner, slot].tolist()))
    return P[rows], pairs, P[~ok]


def _general_cells(P: np.ndarray) -> tuple[np.ndarray, list[tuple[int, int]]]:
    d = P.shape[1] - 1
    P = P[P[:, 0] != 0]  # x divides p otherwise
    if len(P) == 0:
        return P, []
    kept_rows: list[np.ndarray] = []
    pairs: list[tuple[int, int]] = []
    if d == 3:
        fast, pairs, P = _cubic_cells(P, int(P[0, 3]))
        kept_rows.append(fast)
    slow = []
    for cs in P.tolist():
        cells = _exact_cells(cs)
        if cells:
            row = len(slow) + (len(kept_rows[0]) if kept_rows else 0)
            slow.append(cs)
            pairs += [(row, c) for c in cells]
    if slow:
        kept_rows.append(np.array(slow, dtype=np.int64))
    rows = np.vstack(kept_rows) if kept_rows else np.zeros((0, d + 1), np.int64)
    return rows, pairs


def _taylor_shift_rows(P: np.ndarray, m: np.ndarray) -> np.ndarray:
    d = P.shape[1] - 1
    out = np.zeros_like(P)
    for k in range(d + 1):
        for j in range(k + 1):
            out[:, j] += P[:, k] * comb(k, j) * m ** (k - j)
    return out


@lru_cache(maxsize=8)
def _roots_table(d: int, H: int) -> tuple[np.ndarray, np.ndarray]:
    """Minimal polynomial and cell of every element of A_d(H)."""
    polys, cells = [], []
    for lead in range(1, H + 1):
        P = _primitive_rows(_coefficient_grid(d, H, lead))
        P, pairs = _quadratic_cells(P) if d == 2 else _general_cells(P)
        if not pairs:
            continue
        owners = np.array([o for o, _ in pairs], dtype=np.int64)
        polys.append(P[owners])
        cells.append(np.array([c for _, c in pairs], dtype=np.int64))
    if not polys:
        return np.zeros((0, d + 1), dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.vstack(polys), np.concatenate(cells)


def _sort_exact(coeffs: np.ndarray, cells: np.ndarray, mult: np.ndarray):
    order = np.lexsort(tuple(coeffs.T[::-1]) + (cells,))
    coeffs, cells, mult = coeffs[order], cells[order], mult[order]
    ties = np.flatnonzero(cells[1:] == cells[:-1])
    if len(ties) == 0:
        return coeffs, cells, mult
    idx = np.arange(len(cells))
    start = 0
    runs = []
    for t in ties:
        if runs and runs[-1][1] == t:
            runs[-1][1] = t + 1
        else:
            runs.append([t, t + 1])
    for a, b in runs:
        block = list(range(a, b + 1))

        def num(i):
            c = int(cells[i])
            return AlgebraicNumber(IntPolynomial(coeffs[i].tolist()), RootInterval(Fraction(c, ONE), Fraction(c + 1, ONE)))

        block.sort(key=cmp_to_key(lambda i, j: compare_algebraic(num(i), num(j))))
        idx[a : b + 1] = block
    del start
    return coeffs[idx], cells[idx], mult[idx]


def candidate_count(d: int, H: int) -> int:
    return (2 * H + 1) ** (d + 1)


def enumerate_census(spec: CensusSpec, budget: int = DEFAULT_BUDGET) -> Census:
    if candidate_count(spec.d, spec.H) > budget:
        raise BudgetExceeded(f"(2H+1)^(d+1) = {candidate_count(spec.d, spec.H)} exceeds budget {budget}")
    return _enumerate_cached(spec)


@lru_cache(maxsize=16)
def _enumerate_cached(spec: CensusSpec) -> Census:
    d = spec.d
    coeffs, cells = _roots_table(d, spec.H) if spec.H > 0 else (np.zeros((0, d + 1), np.int64), np.zeros(0, np.int64))
    if spec.mode == "Restricted":
        keep = (cells >= 0) & (cells < ONE)
        coeffs, cells = coeffs[keep], cells[keep]
        mult = np.ones(len(cells), dtype=np.int64)
    else:
        shift = cells >> CELL_BITS
        coeffs = _taylor_shift_rows(coeffs, shift)
        cells = cells & (ONE - 1)
        keys = np.hstack([coeffs, cells[:, None]])
        keys, mult = np.unique(keys, axis=0, return_counts=True)
        coeffs, cells = keys[:, :-1], keys[:, -1]
        mult = mult.astype(np.int64)
    coeffs, cells, mult = _sort_exact(coeffs, cells, mult)
    return Census(spec, coeffs, cells, mult)


# -- discrepancy -------------------------------------------------------------

def discrepancy(census: Census, cdf) -> tuple[float, float]:
    """Sup over subintervals of |mu(I) - F(I)|, with F's uncertainty.

    ``cdf(xs)`` returns (values, error bound) for a distribution on [0, 1].
    """
    if census.total == 0:
        return 1.0, 0.0
    x = census.points()
    F, err = cdf(x)
    w = census.mult / census.total
    C = np.cumsum(w)
    upper = max(0.0, float(np.max(C - F)))
    lower = min(0.0, float(np.min(C - w - F)))
    # points are known only to within one dyadic cell
    return upper - lower, 2 * float(err) + 4.0 / ONE


# -- persistence -------------------------------------------------------------

HEADER = "EFFROTH-CENSUS v1"


class CensusFormatError(ValueError):
    pass


def _frac(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def _fmt(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def save(census: Census, path: str | os.PathLike) -> None:
    s = census.spec
    lines = [f"{HEADER} d={s.d} H={s.H} mode={s.mode}"]
    for cs, c, m in zip(census.coeffs.tolist(), census.cells.tolist(), census.mult.tolist()):
        lo, hi = Fraction(c, ONE), Fraction(c + 1, ONE)
        lines.append(" ".join(map(str, cs)) + f" {_fmt(lo)} {_fmt(hi)} {m}")
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    Path(path).write_text(body + f"SHA256 {digest}\n")


def load(path: str | os.PathLike, expect: CensusSpec | None = None) -> Census:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("EFFROTH-CENSUS"):
        raise CensusFormatError("not a census file")
    if not lines[0].startswith(HEADER + " "):
        raise CensusFormatError(f"unsupported version: {lines[0]}")
    if not lines[-1].startswith("SHA256 "):
        raise CensusFormatError("checksum line missing (truncated file?)")
    body = text[: text.rindex("SHA256 ")]
    if hashlib.sha256(body.encode()).hexdigest() != lines[-1].split()[1]:
        raise CensusFormatError("checksum mismatch")
    fields = dict(kv.split("=") for kv in lines[0][len(HEADER) :].split())
    spec = CensusSpec(int(fields["d"]), int(fields["H"]), fields["mode"])
    if expect is not None and expect != spec:
        raise CensusFormatError(f"spec mismatch: file has {spec}, expected {expect}")
    d = spec.d
    rows = [ln.split() for ln in lines[1:-1]]
    coeffs = np.array([[int(v) for v in r[: d + 1]] for r in rows], dtype=np.int64).reshape(-1, d + 1)
    cells = []
    for r in rows:
        lo, hi = _frac(r[d + 1]), _frac(r[d + 2])
        c = lo * ONE
        if c.denominator != 1 or hi - lo != Fraction(1, ONE):
            raise CensusFormatError("isolation interval is not a canonical dyadic cell")
        cells.append(int(c))
    mult = np.array([int(r[d + 3]) for r in rows], dtype=np.int64)
    return Census(spec, coeffs, np.array(cells, dtype=np.int64), mult)


def cache_path(spec: CensusSpec, cache_dir: str | os.PathLike) -> Path:
    return Path(cache_dir) / f"census_d{spec.d}_H{spec.H}_{spec.mode}.txt"


def cached_census(spec: CensusSpec, cache_dir: str | os.PathLike | None = None, budget: int = DEFAULT_BUDGET) -> Census:
    if cache_dir is None:
        return enumerate_census(spec, budget)
    path = cache_path(spec, cache_dir)
    if path.exists():
        return load(path, spec)
    c = enumerate_census(spec, budget)
    path.parent.mkdir(parents=True, exist_ok=True)
    save(c, path)
    return c


def count_total(d: int, H: int) -> int:
    """#A_d(H)."""
    return enumerate_census(CensusSpec(d, H, "ModOne")).total


def iter_counts(c: Census) -> Iterable[tuple[AlgebraicNumber, int]]:
    for i in range(len(c)):
        yield c.number(i), int(c.mult[i])
