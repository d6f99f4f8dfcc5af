"""Exact rational linear algebra and a small simplex solver.

Everything here works over :class:`fractions.Fraction`; no floating point is
ever involved.  The sizes handled by the rest of the package are tiny (a few
variables, a few dozen constraints), so a dense tableau is the right tool.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

__all__ = [
    "LPResult",
    "as_fraction",
    "maximize",
    "nullspace",
    "primitive_integer_vector",
    "rank",
    "solve",
]


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; refuse floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}: {x!r}")


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    ncols = len(rows[0])
    _, piv = _rref([[as_fraction(v) for v in r] for r in rows], ncols)
    return len(piv)


def solve(a: Sequence[Sequence], b: Sequence) -> tuple[Fraction, ...] | None:
    """Unique solution of the square system ``a x = b``, or None if singular."""
    n = len(a)
    aug = [[as_fraction(v) for v in row] + [as_fraction(bi)] for row, bi in zip(a, b)]
    m, piv = _rref(aug, n)
    if piv != list(range(n)):
        return None
    return tuple(m[i][n] for i in range(n))


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[tuple[Fraction, ...]]:
    """A basis of ``{x : rows x = 0}``."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    m, piv = _rref([[as_fraction(v) for v in r] for r in rows], ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i, p in enumerate(piv):
            x[p] = -m[i][f]
        basis.append(tuple(x))
    return basis


def primitive_integer_vector(v: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    fr = [as_fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return tuple(x // g for x in ints)


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "unbounded" | "infeasible"
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None


def _pivot(t: list[list[Fraction]], z: list[Fraction], basis: list[int], r: int, c: int) -> None:
    inv = 1 / t[r][c]
    t[r] = [v * inv for v in t[r]]
    row = t[r]
    for i in range(len(t)):
        if i != r:
            f = t[i][c]
            if f != 0:
                t[i] = [a - f * b for a, b in zip(t[i], row)]
    f = z[c]
    if f != 0:
        for k in range(len(z)):
            z[k] -= f * row[k]
    basis[r] = c


def _run(t, z, basis, allowed: int) -> bool:
    """Bland's-rule simplex on a max tableau; False means unbounded."""
    while True:
        enter = next((j for j in range(allowed) if z[j] > 0), None)
        if enter is None:
            return True
        best = None
        for i, row in enumerate(t):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        _pivot(t, z, basis, best[1], enter)


def maximize(c: Sequence, a: Sequence[Sequence], b: Sequence) -> LPResult:
    """Maximise ``c.x`` subject to ``a x <= b`` over free rational ``x``.

    Two-phase dense simplex with Bland's rule, so it terminates on degenerate
    problems.  Returns the optimal value together with an optimal basic point.
    """
    m = len(c)
    k = len(a)
    c = [as_fraction(v) for v in c]
    a = [[as_fraction(v) for v in row] for row in a]
    b = [as_fraction(v) for v in b]
    if k == 0:
        if any(v != 0 for v in c):
            return LPResult("unbounded")
        return LPResult("optimal", Fraction(0), tuple(Fraction(0) for _ in range(m)))

    # columns: u (m) | w (m) | slack (k) | artificial (one per negative rhs) | rhs
    neg = [i for i in range(k) if b[i] < 0]
    nart = len(neg)
    width = 2 * m + k + nart
    t: list[list[Fraction]] = []
    basis: list[int] = []
    for i in range(k):
        row = [Fraction(0)] * (width + 1)
        sign = -1 if b[i] < 0 else 1
        for j in range(m):
            row[j] = sign * a[i][j]
            row[m + j] = -sign * a[i][j]
        row[2 * m + i] = Fraction(sign)
        row[-1] = sign * b[i]
        if sign < 0:
            col = 2 * m + k + neg.index(i)
            row[col] = Fraction(1)
            basis.append(col)
        else:
            basis.append(2 * m + i)
        t.append(row)

    if nart:
        # phase 1: maximise -sum(artificials)
        z = [Fraction(0)] * (width + 1)
        for i in neg:
            for j in range(width + 1):
                z[j] += t[i][j]
        for j in range(2 * m + k, width):
            z[j] = Fraction(0)
        _run(t, z, basis, width)
        if z[-1] != 0:
            return LPResult("infeasible")
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(t):
            if basis[i] >= 2 * m + k:
                col = next((j for j in range(2 * m + k) if t[i][j] != 0), None)
                if col is None:
                    del t[i]
                    del basis[i]
                    continue
                _pivot(t, [Fraction(0)] * (width + 1), basis, i, col)
            i += 1
        t = [row[: 2 * m + k] + [row[-1]] for row in t]
        width = 2 * m + k

    cost = c + [-v for v in c] + [Fraction(0)] * k
    z = cost + [Fraction(0)]
    for i, bi in enumerate(basis):
        cb = cost[bi]
        if cb != 0:
            for j in range(width + 1):
                z[j] -= cb * t[i][j]
    if not _run(t, z, basis, width):
        return LPResult("unbounded")
    vals = [Fraction(0)] * width
    for i, bi in enumerate(basis):
        vals[bi] = t[i][-1]
    x = tuple(vals[j] - vals[m + j] for j in range(m))
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult("optimal", value, x)
