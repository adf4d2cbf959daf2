"""Integral lattices with symmetric bilinear forms.

Wedge powers of a Gram matrix are taken entrywise as minor
determinants, which keeps self-dual lattices self dual.  Short-vector
counts come from exhaustive bounded enumeration over an exact rational
Cholesky decomposition, so acceptance of a vector never depends on
floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, isqrt
from typing import Dict, List, Sequence, Tuple

WEDGE_BASIS_CAP = 5000


@dataclass(frozen=True)
class GramLattice:
    """A free abelian group with an integer symmetric bilinear form."""

    gram: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.gram)
        for row in self.gram:
            if len(row) != n:
                raise ValueError("Gram matrix must be square")
            if not all(isinstance(v, int) for v in row):
                raise ValueError("Gram entries must be integers")
        for i in range(n):
            for j in range(i):
                if self.gram[i][j] != self.gram[j][i]:
                    raise ValueError("Gram matrix must be symmetric")

    @property
    def rank(self) -> int:
        return len(self.gram)

    def det(self) -> int:
        return _int_det(self.gram)

    def is_self_dual(self) -> bool:
        """Self dual means the form identifies the lattice with its
        dual; for an integral form that is exactly |det| = 1."""
        return abs(self.det()) == 1

    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def transformed(self, basis: Sequence[Sequence[int]]) -> "GramLattice":
        """The same form written in the basis given by the columns of
        an integer matrix."""
        n = self.rank
        if len(basis) != n or any(len(row) != n for row in basis):
            raise ValueError("basis matrix must match the rank")
        g = self.gram
        gb = [[sum(g[i][k] * basis[k][j] for k in range(n)) for j in range(n)]
              for i in range(n)]
        out = [[sum(basis[k][i] * gb[k][j] for k in range(n)) for j in range(n)]
               for i in range(n)]
        return GramLattice(tuple(tuple(row) for row in out))


def from_rows(rows: Sequence[Sequence[int]]) -> GramLattice:
    return GramLattice(tuple(tuple(int(v) for v in row) for row in rows))


def identity_lattice(n: int) -> GramLattice:
    return from_rows([[1 if i == j else 0 for j in range(n)]
                      for i in range(n)])


def e8() -> GramLattice:
    """The even self-dual rank-8 lattice, as the Gram matrix of a root
    basis: a chain of eight norm-2 vectors with one branch."""
    edges = {(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)}
    g = [[0] * 8 for _ in range(8)]
    for i in range(8):
        g[i][i] = 2
    for i, j in edges:
        g[i][j] = g[j][i] = -1
    return from_rows(g)


def exterior_power_lattice(lattice: GramLattice, n: int) -> GramLattice:
    """The n-th wedge power: basis indexed by sorted n-subsets of the
    original basis, with pairings given by n x n minors of the Gram
    matrix."""
    r = lattice.rank
    if not 0 <= n <= r:
        raise ValueError(f"wedge degree {n} out of range for rank {r}")
    size = comb(r, n)
    if size > WEDGE_BASIS_CAP:
        raise ValueError(
            f"wedge basis would have {size} elements "
            f"(cap {WEDGE_BASIS_CAP})")
    subsets = list(combinations(range(r), n))
    g = lattice.gram
    out = []
    for rows in subsets:
        line = []
        for cols in subsets:
            minor = [[g[i][j] for j in cols] for i in rows]
            line.append(_int_det(minor))
        out.append(line)
    return from_rows(out)


def theta_counts(lattice: GramLattice, max_norm: int, *,
                 workers: int = 1) -> Dict[int, int]:
    """Exact counts of lattice vectors at each norm 1..max_norm.

    Requires a positive definite form.  Enumeration walks an exact
    rational Cholesky decomposition, rescaled once to clear all
    denominators so the inner loop is integer arithmetic, and counts
    each +-pair once, so only half the vectors are visited.
    """
    if max_norm < 0:
        raise ValueError("max_norm must be nonnegative")
    counts = {m: 0 for m in range(1, max_norm + 1)}
    if lattice.rank == 0 or max_norm == 0:
        return counts
    scaled = _scaled_form(lattice)
    top_values = [x for x in _top_range(scaled, max_norm) if x >= 0]
    if workers > 1 and len(top_values) > 1:
        from multiprocessing import Pool
        args = [(lattice, max_norm, x) for x in top_values]
        with Pool(workers) as pool:
            for partial in pool.map(_theta_worker, args):
                for m, c in partial.items():
                    counts[m] += c
        return counts
    for x in top_values:
        _count_subtree(scaled, max_norm, x, counts)
    return counts


def _theta_worker(args):
    lattice, max_norm, x = args
    scaled = _scaled_form(lattice)
    counts = {m: 0 for m in range(1, max_norm + 1)}
    _count_subtree(scaled, max_norm, x, counts)
    return counts


# ---------------------------------------------------------------------------
# Exact linear algebra helpers.


def _int_det(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free elimination; exact integer determinant."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[-1][-1]


def _cholesky(lattice: GramLattice):
    """Decompose the form as sum_i d_i (x_i + sum_{j>i} u_ij x_j)^2
    with exact rational d_i > 0 and u_ij.

    Returns the diagonal and, per level i, the list of (j, u_ji) with
    j < i, which is the update a choice of x_i applies to the offsets
    of the remaining levels.  Raises on a form that is not positive
    definite.
    """
    n = lattice.rank
    a = [[Fraction(v) for v in row] for row in lattice.gram]
    diag: List[Fraction] = [Fraction(0)] * n
    u = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        d = a[i][i]
        if d <= 0:
            raise ValueError("lattice is not positive definite")
        diag[i] = d
        for j in range(i + 1, n):
            u[i][j] = a[i][j] / d
        for j in range(i + 1, n):
            for k in range(j, n):
                a[j][k] -= u[i][j] * u[i][k] * d
            for k in range(i + 1, j):
                a[j][k] = a[k][j]
    cols = []
    for i in range(n):
        cols.append([(j, u[j][i]) for j in range(i) if u[j][i] != 0])
    return diag, cols


def _lcm(a: int, b: int) -> int:
    from math import gcd
    return a // gcd(a, b) * b


def _scaled_form(lattice: GramLattice):
    """Clear all Cholesky denominators.

    Returns (scale, lam, ks, vcols): summing ks[i] * w_i^2 over levels,
    with w_i = x_i * lam + O_i and O_i the integer offset accumulated
    from higher levels via vcols, gives the norm times scale.
    """
    diag, cols = _cholesky(lattice)
    n = len(diag)
    lam = 1
    for col in cols:
        for _, u in col:
            lam = _lcm(lam, u.denominator)
    dden = 1
    for d in diag:
        dden = _lcm(dden, d.denominator)
    scale = lam * lam * dden
    ks = [d.numerator * (dden // d.denominator) for d in diag]
    vcols = []
    for col in cols:
        vcols.append([(j, int(u * lam)) for j, u in col])
    return scale, lam, ks, vcols


def _scaled_range(k: int, lam: int, o: int, budget: int):
    """All integers x with k * (x * lam + o)^2 <= budget (budget and the
    rest integers, k > 0)."""
    if budget < 0:
        return range(0)
    isq = isqrt(budget * k) + 1
    den = lam * k
    lo = -((o * k + isq) // den)
    while k * (lo * lam + o) ** 2 > budget:
        if lo * lam > -o:
            return range(0)
        lo += 1
    hi = (isq - o * k) // den
    while k * (hi * lam + o) ** 2 > budget:
        if hi * lam < -o:
            return range(0)
        hi -= 1
    if hi < lo:
        return range(0)
    return range(lo, hi + 1)


def _top_range(scaled, max_norm: int):
    scale, lam, ks, _ = scaled
    return _scaled_range(ks[-1], lam, 0, max_norm * scale)


def _count_subtree(scaled, max_norm: int, top_x: int, counts) -> None:
    """Count vectors with the top coordinate fixed; the rest of the
    sign symmetry is handled by requiring the first nonzero coordinate
    (scanning from the top) to be positive and counting twice."""
    scale, lam, ks, vcols = scaled
    n = len(ks)
    top = n - 1
    budget = max_norm * scale
    off = [0] * n
    w = top_x * lam
    used_top = ks[top] * w * w
    if used_top > budget:
        return
    for j, v in vcols[top]:
        off[j] = v * top_x

    def descend(level: int, acc: int, nonzero: bool) -> None:
        if level < 0:
            if nonzero:
                norm, rem = divmod(acc, scale)
                if rem == 0 and 1 <= norm <= max_norm:
                    counts[norm] += 2
            return
        k = ks[level]
        o = off[level]
        col = vcols[level]
        room = budget - acc
        rng = _scaled_range(k, lam, o, room)
        if not nonzero and rng and rng.start < 0:
            rng = range(0, rng.stop)
        nxt = level - 1
        for x in rng:
            for j, v in col:
                off[j] += v * x
            wx = x * lam + o
            descend(nxt, acc + k * wx * wx, nonzero or x != 0)
            for j, v in col:
                off[j] -= v * x

    descend(top - 1, used_top, top_x != 0)
