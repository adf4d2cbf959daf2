"""Representation ring of a cyclic group of odd prime order over the
p-adic integers.

Every finitely generated Z_p-free module with an action of a group G of
prime order p is a direct sum of three indecomposables: the trivial module
of rank 1, the free module of rank p, and the kernel of the augmentation
map on the free module, of rank p-1.  The ring they span (with tensor
product as multiplication) is commutative of rank 3, and carries exterior
power, symmetric power, and Adams operations.

Elements here are virtual: coordinates are arbitrary rationals.  The
closed-form exterior and symmetric powers are only meaningful on honest
modules, but the lambda-series machinery extends them to any element by
``lambda_t(r*u) = lambda_t(u)**r`` with binomial-series powers over Q.
That extension is formal; nothing in the vanishing arguments depends on
it, but it makes the operation total, which the series identities below
want.

Two warnings about what this ring is NOT.  It is the free abelian group
on iso classes of lattices under direct sum, not a Grothendieck group of
exact sequences: the non-split sequence relating the three
indecomposables means [free] differs from [trivial] + [kernel], and the
Koszul identity S_t(x) * lambda_{-t}(x) = 1 fails (symmetric powers are
extended by their own product formula instead).  Relatedly the lambda
structure is not special: Adams operations are ring homomorphisms for n
coprime to p but not at p | n.

Basis order throughout: (trivial, free, augmentation-kernel).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .series import QSeries


def _is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def _check_p(p: int) -> None:
    if not _is_odd_prime(p):
        raise ValueError(f"group order must be an odd prime, got {p}")


@dataclass(frozen=True)
class KElement:
    """Virtual module a*[trivial] + b*[free] + c*[kernel] for prime p."""

    p: int
    a: Fraction
    b: Fraction
    c: Fraction

    def __post_init__(self):
        _check_p(self.p)
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        object.__setattr__(self, "c", Fraction(self.c))

    def _cc(self, other: "KElement") -> None:
        if self.p != other.p:
            raise ValueError("mixed primes")

    def __add__(self, other: "KElement") -> "KElement":
        self._cc(other)
        return KElement(self.p, self.a + other.a, self.b + other.b,
                        self.c + other.c)

    def __neg__(self) -> "KElement":
        return KElement(self.p, -self.a, -self.b, -self.c)

    def __sub__(self, other: "KElement") -> "KElement":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return KElement(self.p, self.a * other, self.b * other,
                            self.c * other)
        self._cc(other)
        p = self.p
        a1, b1, c1 = self.a, self.b, self.c
        a2, b2, c2 = other.a, other.b, other.c
        # [free] is an ideal annihilating nothing: free*free = p*free,
        # free*kernel = (p-1)*free; kernel*kernel = trivial + (p-2)*free.
        a = a1 * a2 + c1 * c2
        b = (a1 * b2 + b1 * a2 + p * b1 * b2
             + (p - 1) * (b1 * c2 + c1 * b2) + (p - 2) * c1 * c2)
        c = a1 * c2 + c1 * a2
        return KElement(p, a, b, c)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0 and self.c == 0

    def is_effective(self) -> bool:
        """Nonnegative integer multiplicities: an honest module."""
        return all(x >= 0 and x.denominator == 1
                   for x in (self.a, self.b, self.c))

    def dim(self) -> Fraction:
        return self.a + self.p * self.b + (self.p - 1) * self.c

    def trace_quotient(self) -> Fraction:
        """Image under the hom sending a module to rank minus p times the
        rank of coinvariants... concretely (1, 0, -1) on the basis."""
        return self.a - self.c

    def hom_f(self) -> Fraction:
        """The third ring hom, (1, 0, 1) on the basis."""
        return self.a + self.c

    def tate_dims(self) -> tuple:
        """(dim H^0, dim H^1) of Tate cohomology as F_p-vector spaces.

        The free summand is invisible; the trivial one contributes to H^0
        and the kernel one to H^1.  Only defined for honest modules.
        """
        if not self.is_effective():
            raise ValueError("Tate dimensions need an effective element")
        return (int(self.a), int(self.c))


def triv(p: int) -> KElement:
    return KElement(p, 1, 0, 0)


def free(p: int) -> KElement:
    return KElement(p, 0, 1, 0)


def kernel(p: int) -> KElement:
    return KElement(p, 0, 0, 1)


def zero(p: int) -> KElement:
    return KElement(p, 0, 0, 0)


# ---------------------------------------------------------------------------
# Closed-form exterior and symmetric powers on the basis.


def lambda_triv(p: int, n: int) -> KElement:
    if n in (0, 1):
        return triv(p)
    return zero(p)


def lambda_free(p: int, n: int) -> KElement:
    """Lambda^n of the free module.

    For 0 < n < p the result is free of multiplicity C(p,n)/p (an integer
    by Fermat); the top power n = p is the determinant, trivial because a
    p-cycle on p letters is even for odd p.
    """
    if n == 0:
        return triv(p)
    if n == p:
        return triv(p)
    if n > p:
        return zero(p)
    return free(p) * Fraction(comb(p, n), p)


def lambda_kernel(p: int, n: int) -> KElement:
    """Lambda^n of the rank p-1 augmentation kernel.

    C(p-1,n) is congruent to (-1)^n mod p, which is exactly what makes the
    free multiplicities below integral.
    """
    if n == 0:
        return triv(p)
    if n >= p:
        return zero(p)
    if n % 2 == 0:
        return triv(p) + free(p) * Fraction(comb(p - 1, n) - 1, p)
    return kernel(p) + free(p) * Fraction(comb(p - 1, n) + 1 - p, p)


def sym_triv(p: int, n: int) -> KElement:
    return triv(p)


def sym_free(p: int, n: int) -> KElement:
    if n % p == 0:
        return triv(p) + free(p) * Fraction(comb(p + n - 1, n) - 1, p)
    return free(p) * Fraction(comb(p + n - 1, n), p)


def sym_kernel(p: int, n: int) -> KElement:
    if n % p == 0:
        return triv(p) + free(p) * Fraction(comb(p + n - 2, n) - 1, p)
    if n % p == 1:
        return kernel(p) + free(p) * Fraction(comb(p + n - 2, n) + 1 - p, p)
    return free(p) * Fraction(comb(p + n - 2, n), p)


# ---------------------------------------------------------------------------
# Series machinery: total lambda/symmetric/Adams operations.


class RingK:
    """Coefficient-ring adapter exposing a KElement ground ring to QSeries."""

    def __init__(self, p: int):
        _check_p(p)
        self.p = p
        self.zero = zero(p)
        self.one = triv(p)

    def from_int(self, n):
        return triv(self.p) * n

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def div_int(a, d):
        return a * Fraction(1, d)

    def pow(self, a, e):
        out = self.one
        for _ in range(e):
            out = out * a
        return out

    @staticmethod
    def is_zero(a):
        return a.is_zero()


def _basis_lambda_series(p: int, which: str, trunc: int) -> QSeries:
    ring = RingK(p)
    table = {"triv": lambda_triv, "free": lambda_free, "kernel": lambda_kernel}
    fn = table[which]
    d = {}
    for n in range(0, trunc + 1):
        v = fn(p, n)
        if not v.is_zero():
            d[n] = v
    return QSeries.from_dict(d, trunc, ring)


def _series_rational_power(f: QSeries, r: Fraction) -> QSeries:
    """f**r for constant term 1, any rational r, via exp(r * log f)."""
    r = Fraction(r)
    if r.denominator == 1:
        return f.pow_int(r.numerator)
    lg = f.log1()
    scaled = QSeries(lg.lead, [c * r for c in lg.coeffs], lg.trunc, lg.ring)
    return scaled.exp0()


def lambda_series(x: KElement, trunc: int) -> QSeries:
    """Sum of lambda^n(x) t^n through t**trunc, a QSeries over RingK.

    Additivity in exterior powers becomes multiplicativity of the series,
    so a virtual element's series is a product of rational powers of the
    three basis series.
    """
    p = x.p
    out = QSeries.one(trunc, RingK(p))
    for r, which in ((x.a, "triv"), (x.b, "free"), (x.c, "kernel")):
        if r == 0:
            continue
        out = out.mul(_series_rational_power(
            _basis_lambda_series(p, which, trunc), Fraction(r)))
    return out


def _alternate(f: QSeries) -> QSeries:
    """t -> -t."""
    coeffs = [c if (f.lead + i) % 2 == 0 else f.ring.neg(c)
              for i, c in enumerate(f.coeffs)]
    return QSeries(f.lead, coeffs, f.trunc, f.ring)


def _basis_sym_series(p: int, which: str, trunc: int) -> QSeries:
    ring = RingK(p)
    table = {"triv": sym_triv, "free": sym_free, "kernel": sym_kernel}
    fn = table[which]
    return QSeries.from_dict(
        {n: fn(p, n) for n in range(0, trunc + 1)}, trunc, ring)


def sym_series(x: KElement, trunc: int) -> QSeries:
    """Sum of sym^n(x) t^n through t**trunc.

    Extended from the closed forms by the product formula, NOT by
    inverting the alternating lambda series: the Koszul complex of the
    kernel module is exact but not split, so 1/lambda_{-t} disagrees with
    the honest symmetric powers starting at t**p.
    """
    p = x.p
    out = QSeries.one(trunc, RingK(p))
    for r, which in ((x.a, "triv"), (x.b, "free"), (x.c, "kernel")):
        if r == 0:
            continue
        out = out.mul(_series_rational_power(
            _basis_sym_series(p, which, trunc), Fraction(r)))
    return out


def lambda_n(x: KElement, n: int) -> KElement:
    """Exterior power; closed forms on basis elements, series otherwise."""
    if n < 0:
        raise ValueError("negative exterior power")
    if x == triv(x.p):
        return lambda_triv(x.p, n)
    if x == free(x.p):
        return lambda_free(x.p, n)
    if x == kernel(x.p):
        return lambda_kernel(x.p, n)
    return lambda_series(x, n).coeff(n)


def sym_n(x: KElement, n: int) -> KElement:
    if n < 0:
        raise ValueError("negative symmetric power")
    if x == triv(x.p):
        return sym_triv(x.p, n)
    if x == free(x.p):
        return sym_free(x.p, n)
    if x == kernel(x.p):
        return sym_kernel(x.p, n)
    return sym_series(x, n).coeff(n)


def adams(x: KElement, n: int) -> KElement:
    """Adams operation psi^n, read off from the logarithm of the
    alternating lambda series: sum_n (-1)^n lambda^n t^n =
    exp(-sum_n psi^n t^n / n)."""
    if n < 1:
        raise ValueError("Adams operations are indexed from 1")
    lg = _alternate(lambda_series(x, n)).log1()
    return lg.coeff(n) * Fraction(-n)


def f_lambda_series(x: KElement, trunc: int) -> QSeries:
    """Image of the alternating lambda series under the hom (1, 0, 1).

    On the basis this gives 1 - t, 1 - t**p, and (1 + t**p)/(1 + t): the
    free part dies, so the series sees only the cohomology."""
    ls = _alternate(lambda_series(x, trunc))
    d = {}
    for i, cval in enumerate(ls.coeffs):
        v = cval.hom_f()
        if v:
            d[ls.lead + i] = v
    return QSeries.from_dict({k: Fraction(v) for k, v in d.items()}, trunc)


def tate_dims_product(x: KElement, y: KElement) -> tuple:
    """Cohomology of a tensor product by the rank-1 Kuenneth rule:
    h0(xy) = h0 h0 + h1 h1 and h1(xy) = h0 h1 + h1 h0."""
    h0x, h1x = x.tate_dims()
    h0y, h1y = y.tate_dims()
    return (h0x * h0y + h1x * h1y, h0x * h1y + h1x * h0y)
