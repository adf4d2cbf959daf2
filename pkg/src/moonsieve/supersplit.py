"""Cohomology series of free superalgebras and the ordinary/super split.

A symmetry of prime order p acting on a graded algebra leaves, in each
degree, a Tate cohomology pair (degree-0 part, degree-1 part); the
involution that negates the degree-1 part makes these "ordinary" and
"super" dimensions.  Two routes compute them here: closed-form
generating functions for the four algebras of interest, and a brute
force that builds each graded piece as an explicit module and reads
the cohomology off its structure.  The split operation at the end
separates a pair of character series into ordinary and super halves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Dict, Iterable, List, Tuple

import numpy as np

from .modrep import ConcreteModule, _rank_mod_p, tate_cohomology
from .series import QSeries

BRUTE_P_CAP = 7
BRUTE_DEGREE_CAP = 8
_DENSE_DIM_CAP = 2000
_TORSION_CHECK_PRIME = 46337

KINDS = ("h_regular", "h_I", "h_omega_regular", "h_omega_I")


@dataclass(frozen=True)
class BigradedSeries:
    """Per-degree (ordinary, super) dimension pairs, degrees 0..bound."""

    pairs: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        for o, s in self.pairs:
            if o < 0 or s < 0:
                raise ValueError("dimensions must be nonnegative")

    @property
    def bound(self) -> int:
        return len(self.pairs) - 1

    def pair(self, degree: int) -> Tuple[int, int]:
        return self.pairs[degree]

    def ordinary_dims(self) -> List[int]:
        return [o for o, _ in self.pairs]

    def super_dims(self) -> List[int]:
        return [s for _, s in self.pairs]

    def super_product(self, other: "BigradedSeries") -> "BigradedSeries":
        """Degreewise product with the sign rule folded into bookkeeping:
        super times super lands in ordinary."""
        bound = min(self.bound, other.bound)
        out = []
        for d in range(bound + 1):
            o_acc = s_acc = 0
            for e in range(d + 1):
                o1, s1 = self.pairs[e]
                o2, s2 = other.pairs[d - e]
                o_acc += o1 * o2 + s1 * s2
                s_acc += o1 * s2 + s1 * o2
            out.append((o_acc, s_acc))
        return BigradedSeries(tuple(out))


def _expand_generators(ordinary_degrees: Iterable[int],
                       super_degrees: Iterable[int],
                       bound: int) -> BigradedSeries:
    """Free graded-commutative algebra on the given generators:
    polynomial in the ordinary ones, exterior in the super ones."""
    ords = [0] * (bound + 1)
    sups = [0] * (bound + 1)
    ords[0] = 1
    for d in ordinary_degrees:
        for e in range(d, bound + 1):
            ords[e] += ords[e - d]
            sups[e] += sups[e - d]
    for d in super_degrees:
        # a super generator multiplies at most once and flips parity
        for e in range(bound, d - 1, -1):
            ords[e] += sups[e - d]
            sups[e] += ords[e - d]
    return BigradedSeries(tuple(zip(ords, sups)))


def cohomology_series(kind: str, p: int, bound: int) -> BigradedSeries:
    """Closed-form cohomology dimensions for one of the four algebras.

    The generator inventory: the regular-module algebra has one ordinary
    polynomial generator per degree np (the multiplicative norm of the
    degree-n family); its norm-ideal quotient trades them for one super
    exterior generator per degree prime to p; restricting to the
    sign-fixed quotient ring keeps only the odd-degree families, so the
    degrees np run over odd n, and the super degrees become the odd ones
    prime to p.
    """
    _check_p(p)
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    if kind == "h_regular":
        ordinary = range(p, bound + 1, p)
        sup: Iterable[int] = ()
    elif kind == "h_I":
        ordinary = ()
        sup = [n for n in range(1, bound + 1) if n % p]
    elif kind == "h_omega_regular":
        ordinary = range(p, bound + 1, 2 * p)
        sup = ()
    elif kind == "h_omega_I":
        ordinary = ()
        sup = [n for n in range(1, bound + 1, 2) if n % p]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return _expand_generators(ordinary, sup, bound)


# ---------------------------------------------------------------------------
# Brute force: the graded algebra built monomial by monomial.
#
# Generators are pairs (n, i): the degree-n symbol attached to the i-th
# basis vector of the free rank-p module, permuted cyclically in i by
# the group.  A monomial is a sorted tuple of such pairs.  The algebra
# itself is polynomial on these; the variants are quotients by explicit
# homogeneous ideals, realized degree by degree with linear algebra
# mod p.


@lru_cache(maxsize=None)
def _monomials(p: int, degree: int) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
    def build(remaining, max_gen):
        if remaining == 0:
            yield ()
            return
        for n in range(min(remaining, max_gen[0]), 0, -1):
            top_i = max_gen[1] if n == max_gen[0] else p - 1
            for i in range(top_i, -1, -1):
                for rest in build(remaining - n, (n, i)):
                    yield ((n, i),) + rest

    return tuple(sorted(tuple(sorted(m)) for m in
                        build(degree, (degree, p - 1))))


@lru_cache(maxsize=None)
def _neg_coeffs(n: int) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    """Coefficients of the degree-n symbol of a negated argument, as
    integer combinations of partitions of n (single family): the
    inverse of the generating series 1 + h_1 t + h_2 t^2 + ..."""
    if n == 0:
        return (((), 1),)
    acc: Dict[Tuple[int, ...], int] = {}
    for k in range(1, n + 1):
        for parts, c in _neg_coeffs(n - k):
            key = tuple(sorted(parts + (k,)))
            acc[key] = acc.get(key, 0) - c
    return tuple(sorted(acc.items()))


def _omega_relation(n: int, i: int) -> Dict[tuple, int]:
    """h_n(g_i) minus its image under the sign involution."""
    rel: Dict[tuple, int] = {((n, i),): 1}
    sign = 1 if n % 2 == 0 else -1
    for parts, c in _neg_coeffs(n):
        mono = tuple(sorted((k, i) for k in parts))
        rel[mono] = rel.get(mono, 0) - sign * c
    return {m: c for m, c in rel.items() if c}


def _norm_relation(n: int, p: int) -> Dict[tuple, int]:
    """The degree-n symbol of the sum of all p basis vectors, expanded
    by the addition rule: one term per composition of n into p parts."""
    rel: Dict[tuple, int] = {}
    for bars in combinations(range(n + p - 1), p - 1):
        parts = []
        prev = -1
        for b in bars + (n + p - 1,):
            parts.append(b - prev - 1)
            prev = b
        mono = tuple(sorted((parts[i], i) for i in range(p) if parts[i]))
        rel[mono] = rel.get(mono, 0) + 1
    return rel


def _shift_monomial(mono: tuple, p: int) -> tuple:
    return tuple(sorted((n, (i + 1) % p) for n, i in mono))


def _relation_rows(p: int, degree: int, relations) -> np.ndarray:
    cols = {m: j for j, m in enumerate(_monomials(p, degree))}
    rows = []
    for rel_degree, rel in relations:
        for m in _monomials(p, degree - rel_degree):
            row = np.zeros(len(cols), dtype=np.int64)
            for term, c in rel.items():
                row[cols[tuple(sorted(m + term))]] += c
            rows.append(row)
    if not rows:
        return np.zeros((0, len(cols)), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def _rref_mod(mat: np.ndarray, q: int):
    a = mat % q
    nrows, ncols = a.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), -1, q)
        a[r] = (a[r] * inv) % q
        other = np.nonzero(a[:, c])[0]
        other = other[other != r]
        if other.size:
            a[other] = (a[other] - np.outer(a[other, c], a[r])) % q
        pivots.append(c)
        r += 1
    return a[:r], pivots


def _quotient_action(p: int, degree: int, relations):
    """Action of the permuting generator on the degree piece of the
    quotient by the ideal the relations generate, over the field with p
    elements.  Returns a square matrix on a complement basis.

    The reduction is only faithful to the underlying free module when
    the quotient has no p-torsion; a rank comparison against a second,
    unrelated prime guards that.
    """
    monos = _monomials(p, degree)
    rows = _relation_rows(p, degree, relations)
    rref, pivots = _rref_mod(rows, p)
    _, pivots_check = _rref_mod(rows, _TORSION_CHECK_PRIME)
    if len(pivots) != len(pivots_check):
        raise ArithmeticError(
            f"quotient in degree {degree} looks p-torsioned: "
            f"rank {len(pivots)} mod {p} vs {len(pivots_check)}")
    pivot_set = set(pivots)
    free = [j for j in range(len(monos)) if j not in pivot_set]
    free_pos = {j: k for k, j in enumerate(free)}
    # column j of rref restricted to free columns expresses the pivot
    # monomial: pivot = -sum(row[free] * free basis)
    reduce_pivot = {}
    for r_idx, c in enumerate(pivots):
        vec = (-rref[r_idx][free]) % p
        reduce_pivot[c] = vec
    col_index = {m: j for j, m in enumerate(monos)}
    dim = len(free)
    action = np.zeros((dim, dim), dtype=np.int64)
    for k, j in enumerate(free):
        target = col_index[_shift_monomial(monos[j], p)]
        if target in free_pos:
            action[free_pos[target], k] = 1
        else:
            action[:, k] = reduce_pivot[target]
    return action


def _lattice_cohomology_from_action(action: np.ndarray, p: int):
    """(h0, h1) for the free module whose reduction mod p this is.

    Over the p-adic integers a lattice for the cyclic group of order p
    splits into trivial, norm-kernel, and free summands; these reduce
    to Jordan blocks of sizes 1, p-1, p, so block counts of the
    reduction recover the cohomology.
    """
    dim = action.shape[0]
    ranks = [dim]
    a = (action - np.eye(dim, dtype=np.int64)) % p
    power = np.eye(dim, dtype=np.int64)
    for _ in range(p):
        power = (power @ a) % p
        ranks.append(_rank_mod_p(power, p))
    ranks.append(0)
    h0 = ranks[0] - 2 * ranks[1] + ranks[2]
    h1 = ranks[p - 2] - 2 * ranks[p - 1] + ranks[p]
    return h0, h1


def brute_force_h(p: int, module: str = "regular", omega: bool = False,
                  max_degree: int = 6) -> BigradedSeries:
    """Build the graded algebra piece by piece and read off cohomology.

    The plain regular-module algebra needs no relations: each degree is
    a permutation module handed to modrep.tate_cohomology.  The norm
    ideal (module="I") and the sign-involution relations (omega=True)
    are imposed degreewise by row reduction mod p.
    """
    _check_p(p)
    if p > BRUTE_P_CAP:
        raise ValueError(f"cap exceeded: p <= {BRUTE_P_CAP}")
    if not 0 <= max_degree <= BRUTE_DEGREE_CAP:
        raise ValueError(f"cap exceeded: max_degree <= {BRUTE_DEGREE_CAP}")
    if module not in ("regular", "I"):
        raise ValueError(f"unknown module {module!r}")
    relations = []
    for n in range(1, max_degree + 1):
        if module == "I":
            relations.append((n, _norm_relation(n, p)))
        if omega and n >= 2:
            # one involution relation per family index
            for i in range(p):
                relations.append((n, _omega_relation(n, i)))
    pairs = []
    for d in range(max_degree + 1):
        if d == 0:
            pairs.append((1, 0))
            continue
        if not relations:
            monos = _monomials(p, d)
            if len(monos) > _DENSE_DIM_CAP:
                fixed = sum(1 for m in monos if _shift_monomial(m, p) == m)
                pairs.append((fixed, 0))
                continue
            col_index = {m: j for j, m in enumerate(monos)}
            mat = np.zeros((len(monos), len(monos)), dtype=object)
            for j, m in enumerate(monos):
                mat[col_index[_shift_monomial(m, p)], j] = 1
            pairs.append(tate_cohomology(ConcreteModule(p, mat)))
            continue
        usable = [(e, rel) for e, rel in relations if e <= d]
        action = _quotient_action(p, d, usable)
        pairs.append(_lattice_cohomology_from_action(action, p))
    return BigradedSeries(tuple(pairs))


# ---------------------------------------------------------------------------
# The ordinary/super split of a pair of character series.


def split(t_g: QSeries, t_sigma_g: QSeries) -> Tuple[QSeries, QSeries]:
    """Average and half-difference of two character series.

    The ordinary part carries the trace on the degree-0 cohomology, the
    super part the trace on degree 1; both must come out integral, and
    an odd coefficient sum is a data error in the inputs.
    """
    if t_g.trunc != t_sigma_g.trunc:
        raise ValueError(
            f"truncation mismatch: {t_g.trunc} vs {t_sigma_g.trunc}")
    ordinary: Dict[int, int] = {}
    sup: Dict[int, int] = {}
    exponents = set(t_g.coeff_dict()) | set(t_sigma_g.coeff_dict())
    for n in sorted(exponents):
        a = _as_int(t_g.coeff(n), n)
        b = _as_int(t_sigma_g.coeff(n), n)
        if (a + b) % 2:
            raise ValueError(
                f"coefficient sum at q^{n} is odd: series do not split")
        ordinary[n] = (a + b) // 2
        sup[n] = (b - a) // 2
    trunc = t_g.trunc
    return (QSeries.from_dict(ordinary, trunc, t_g.ring),
            QSeries.from_dict(sup, trunc, t_g.ring))


def _as_int(value, n: int) -> int:
    frac = Fraction(value)
    if frac.denominator != 1:
        raise ValueError(f"non-integer coefficient at q^{n}")
    return int(frac)


# ---------------------------------------------------------------------------
# The extraspecial congruence.


@dataclass(frozen=True)
class ExtraspecialReport:
    """Outcome of the dimension congruence for the 2**12-dimensional
    module: both checks hold, and the cohomology is pinned to a single
    ordinary line without building the module."""

    p: int
    dimension: int
    exponent_divides_twelve: bool
    dimension_is_one_mod_p: bool
    h0_dim: int
    h1_dim: int


def extraspecial_check(p: int) -> ExtraspecialReport:
    _check_p(p)
    if 12 % (p - 1) != 0:
        raise ValueError(f"rejected: {p - 1} does not divide 12")
    dimension = 2 ** 12
    if dimension % p != 1:
        raise ArithmeticError("dimension congruence failed")
    return ExtraspecialReport(
        p=p,
        dimension=dimension,
        exponent_divides_twelve=True,
        dimension_is_one_mod_p=True,
        h0_dim=1,
        h1_dim=0,
    )


def _check_p(p: int) -> None:
    if p < 3 or p % 2 == 0:
        raise ValueError(f"p must be an odd prime, got {p}")
    if any(p % d == 0 for d in range(3, int(p ** 0.5) + 1, 2)):
        raise ValueError(f"p must be an odd prime, got {p}")
