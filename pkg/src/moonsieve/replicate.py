"""Constraint propagation for coefficient pairs of bivariate product identities.

The objects handled here are pairs of integer sequences ``cplus`` and
``cminus`` (trace-like and dimension-like coefficient data for a fixed
prime ``p``), both with a simple pole coefficient ``c(-1) = 1`` and no
constant term.  Two identities drive everything:

* the paired product: the coefficient of ``r^m q^n`` in::

      r^-1 * prod_{m>0, n in Z} (1 - r^m q^n)^((cminus(mn)+cplus(mn))/2)
                               * (1 + r^m q^n)^((cplus(mn)-cminus(mn))/2)

  vanishes whenever ``p`` does not divide ``mn`` and ``m < p``;

* the self product, which extends a single sequence ``c`` from its first
  five coefficients::

      sum_n c(n) r^n - sum_n c(n) q^n =
          r^-1 * prod (1 - r^m q^n)^c(mn) * (1 - r^pm q^pn)^c(pmn).

Taking logarithms turns either product into an exponential of a divisor
weighted sum ``S``, so both reduce to the same mechanical shape: the cell
table ``Q = exp(-S)`` satisfies ladder equations ``Q[m+1,n] = Q[m,n+1]``
on a prescribed set of positions.  The engine walks positions in order of
total degree ``m + n``, materialises cells as affine expressions in the
not-yet-determined coefficients, and feeds each ladder equation to an
exact elimination store.  Solving is eager: as soon as a coefficient is
pinned its value is folded back into every cached cell and row.

The engine is generic over a scalar "lane".  The exact lane works in
``Fraction`` and is used to extend sequences.  The 3-adic lane works in
:class:`Padic3Frac` (a :class:`~moonsieve.series.PadicApprox` numerator
over an explicit power-of-3 denominator) and is what the digit sieve
runs on; there, an unsatisfiable equation or a visibly non-integral
coefficient is a pruning event.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, gcd
from typing import Callable, Dict, List, Optional, Tuple

from .series import (
    CAP_DEFAULT,
    PadicApprox,
    PadicDivisionError,
    QSeries,
    RING_Q,
    pow3,
    val3,
)


# ---------------------------------------------------------------------------
# Errors.


class ReplicateError(Exception):
    """Base class for engine failures."""


class MissingCoefficientError(ReplicateError, KeyError):
    """A required coefficient was not supplied by the caller."""

    def __init__(self, family: str, index: int):
        super().__init__(f"{family}({index}) is required but not available")
        self.family = family
        self.index = index


class InconsistentError(ReplicateError):
    """The constraint system provably has no solution over the given data.

    ``where`` names the offending constraint ``(kind, m, n)`` or the
    coefficient index whose forced value was not an integer.
    """

    def __init__(self, message: str, where=None, value=None):
        super().__init__(message)
        self.where = where
        self.value = value


class UnderdeterminedError(ReplicateError):
    """Propagation stalled before reaching the requested index."""

    def __init__(self, index: int):
        super().__init__(f"coefficient {index} is not determined by the "
                         f"available relations")
        self.index = index


class NonlinearFault(ReplicateError):
    """Two symbolic unknowns met in a product.

    The graded schedule is supposed to make this impossible; hitting it
    means the evaluation order is broken, not the input data.
    """


class _PivotUnusable(ReplicateError):
    """Internal: a candidate pivot coefficient cannot be divided by."""


# ---------------------------------------------------------------------------
# 3-adic scalars with an explicit power-of-3 denominator.


class Padic3Frac:
    """A 3-adic number ``num / 3**shift`` with ``num`` a PadicApprox.

    Divisor weights ``1/d`` and factorials introduce powers of 3 in
    denominators.  Keeping the denominator as an explicit ``shift``
    defers the precision cost: digits are only spent when values with
    different denominators are added, which matches the true absolute
    precision of the sum.
    """

    __slots__ = ("num", "shift")

    def __init__(self, num: PadicApprox, shift: int = 0):
        if shift < 0:
            num = num.mul_int(pow3(-shift))
            shift = 0
        self.num = num
        self.shift = shift

    # -- constructors

    @classmethod
    def from_int(cls, n: int, cap: int = CAP_DEFAULT) -> "Padic3Frac":
        return cls(PadicApprox.from_int(n, cap), 0)

    @classmethod
    def from_fraction(cls, fr: Fraction, cap: int = CAP_DEFAULT) -> "Padic3Frac":
        den = fr.denominator
        v = val3(den)
        unit = den // pow3(v)
        num = PadicApprox.from_int(fr.numerator, cap).div_unit(unit)
        return cls(num, v)

    # -- queries

    def known_digits(self) -> int:
        """Absolute precision: the value is known modulo 3**known_digits."""
        return max(self.num.prec - self.shift, 0)

    def is_surely_nonzero(self) -> bool:
        return self.num.val_is_exact()

    def reduced(self) -> "Padic3Frac":
        """Cancel visible factors of 3 between numerator and denominator."""
        num, shift = self.num, self.shift
        while shift > 0 and num.prec > 0 and num.residue % 3 == 0:
            num = num.div3()
            shift -= 1
        return Padic3Frac(num, shift)

    def to_padic(self) -> PadicApprox:
        """Clear the denominator, asserting 3-adic integrality.

        Raises :class:`PadicDivisionError` when the numerator is visibly
        not divisible by ``3**shift``; for the sieve that is a pruning
        signal, not a crash.
        """
        num = self.num
        for _ in range(self.shift):
            num = num.div3()
        return num

    # -- arithmetic

    def _aligned(self, s: int) -> PadicApprox:
        d = s - self.shift
        return self.num if d == 0 else self.num.mul_int(pow3(d))

    def add(self, other: "Padic3Frac") -> "Padic3Frac":
        s = max(self.shift, other.shift)
        return Padic3Frac(self._aligned(s).add(other._aligned(s)), s)

    def neg(self) -> "Padic3Frac":
        return Padic3Frac(self.num.neg(), self.shift)

    def sub(self, other: "Padic3Frac") -> "Padic3Frac":
        return self.add(other.neg())

    def mul(self, other: "Padic3Frac") -> "Padic3Frac":
        return Padic3Frac(self.num.mul(other.num), self.shift + other.shift)

    def pow_sharp(self, e: int) -> "Padic3Frac":
        return Padic3Frac(self.num.pow_sharp(e), self.shift * e)

    def div_exact_int(self, d: int) -> "Padic3Frac":
        """Divide by a nonzero integer without spending digits."""
        if d == 0:
            raise ZeroDivisionError
        sign = -1 if d < 0 else 1
        d = abs(d)
        v = val3(d)
        return Padic3Frac(self.num.div_unit(sign * (d // pow3(v))),
                          self.shift + v)

    def div(self, other: "Padic3Frac") -> "Padic3Frac":
        """General division; the divisor must be visibly nonzero."""
        onum = other.num
        if onum.prec == 0 or onum.residue % pow3(onum.prec) == 0:
            raise _PivotUnusable("divisor has no visible unit part")
        v = val3(onum.residue % pow3(onum.prec))
        unit = onum.residue // pow3(v)
        uprec = onum.prec - v
        inv = PadicApprox(pow(unit, -1, pow3(onum.cap)), uprec, onum.cap)
        return Padic3Frac(self.num.mul(inv),
                          self.shift + v - other.shift)

    def __eq__(self, other):
        if not isinstance(other, Padic3Frac):
            return NotImplemented
        a, b = self.reduced(), other.reduced()
        return a.shift == b.shift and a.num == b.num

    __hash__ = None

    def __repr__(self):
        r = self.reduced()
        if r.shift == 0:
            return repr(r.num)
        return f"({r.num!r})/3^{r.shift}"


# ---------------------------------------------------------------------------
# Scalar lanes.


class _UnknownScalar:
    """Absorbing element for exact computations over partial data.

    Anything touched by it becomes unknown, except multiplication by
    an exact zero.  It never enters solving; it only lets checks skip
    the cells a missing coefficient would influence.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "<unknown>"


UNKNOWN = _UnknownScalar()


class RationalLane:
    """Exact arithmetic in Fraction, with an absorbing unknown."""

    name = "exact"
    is_exact = True

    zero = Fraction(0)
    one = Fraction(1)

    @staticmethod
    def embed_int(n: int) -> Fraction:
        return Fraction(n)

    @staticmethod
    def embed_fraction(fr: Fraction) -> Fraction:
        return fr

    @staticmethod
    def coerce(v) -> Fraction:
        if isinstance(v, (int, Fraction)):
            return Fraction(v)
        raise TypeError(f"cannot use {type(v).__name__} in the exact lane")

    @staticmethod
    def add(a, b):
        if a is UNKNOWN or b is UNKNOWN:
            return UNKNOWN
        return a + b

    @staticmethod
    def sub(a, b):
        if a is UNKNOWN or b is UNKNOWN:
            return UNKNOWN
        return a - b

    @staticmethod
    def neg(a):
        if a is UNKNOWN:
            return UNKNOWN
        return -a

    @staticmethod
    def mul(a, b):
        if a is UNKNOWN or b is UNKNOWN:
            if a == 0 or b == 0:
                return Fraction(0)
            return UNKNOWN
        return a * b

    @staticmethod
    def pow(a, e):
        if a is UNKNOWN:
            return Fraction(1) if e == 0 else UNKNOWN
        return a ** e

    @staticmethod
    def div_exact_int(a, d):
        if a is UNKNOWN:
            return UNKNOWN
        return a / d

    @staticmethod
    def div(a, b):
        if b is UNKNOWN or b == 0:
            raise _PivotUnusable("pivot is zero or unknown")
        if a is UNKNOWN:
            return UNKNOWN
        return a / b

    @staticmethod
    def is_surely_nonzero(a) -> bool:
        if a is UNKNOWN:
            return False
        return a != 0

    @staticmethod
    def is_exact_zero(a) -> bool:
        if a is UNKNOWN:
            return False
        return a == 0

    @staticmethod
    def is_informative(a) -> bool:
        return a is not UNKNOWN

    @staticmethod
    def unknown_scalar():
        return UNKNOWN

    @staticmethod
    def assign_value(a, index: int):
        if a.denominator != 1:
            raise InconsistentError(
                f"coefficient {index} would be the non-integer {a}",
                where=index, value=a)
        return a

    @staticmethod
    def pivot_quality(a) -> tuple:
        return (0,)


class Padic3Lane:
    """Arithmetic in Padic3Frac at a fixed precision cap."""

    name = "padic"
    is_exact = False

    def __init__(self, cap: int = CAP_DEFAULT):
        self.cap = cap
        self.zero = Padic3Frac.from_int(0, cap)
        self.one = Padic3Frac.from_int(1, cap)

    def embed_int(self, n: int) -> Padic3Frac:
        return Padic3Frac.from_int(n, self.cap)

    def embed_fraction(self, fr: Fraction) -> Padic3Frac:
        return Padic3Frac.from_fraction(fr, self.cap)

    def coerce(self, v) -> Padic3Frac:
        if isinstance(v, Padic3Frac):
            return v
        if isinstance(v, PadicApprox):
            return Padic3Frac(v, 0)
        if isinstance(v, int):
            return self.embed_int(v)
        if isinstance(v, Fraction):
            return self.embed_fraction(v)
        raise TypeError(f"cannot use {type(v).__name__} in the 3-adic lane")

    @staticmethod
    def add(a, b):
        return a.add(b)

    @staticmethod
    def sub(a, b):
        return a.sub(b)

    @staticmethod
    def neg(a):
        return a.neg()

    @staticmethod
    def mul(a, b):
        return a.mul(b)

    @staticmethod
    def pow(a, e):
        return a.pow_sharp(e)

    @staticmethod
    def div_exact_int(a, d):
        return a.div_exact_int(d)

    @staticmethod
    def div(a, b):
        return a.div(b)

    @staticmethod
    def is_surely_nonzero(a) -> bool:
        return a.is_surely_nonzero()

    @staticmethod
    def is_exact_zero(a) -> bool:
        num = a.num
        return num.prec == num.cap and num.residue == 0

    @staticmethod
    def is_informative(a) -> bool:
        return a.known_digits() >= 1

    def unknown_scalar(self):
        return Padic3Frac(PadicApprox.unknown(self.cap), 0)

    @staticmethod
    def assign_value(a, index: int):
        try:
            return Padic3Frac(a.to_padic(), 0)
        except PadicDivisionError as exc:
            raise InconsistentError(
                f"coefficient {index} is visibly not a 3-adic integer",
                where=index) from exc

    @staticmethod
    def pivot_quality(a) -> tuple:
        num = a.num
        r = num.residue % pow3(num.prec) if num.prec else 0
        if r == 0:
            return (10 ** 9,)
        # prefer unit pivots, then better known ones
        return (val3(r), -num.prec)


# ---------------------------------------------------------------------------
# Affine expressions in the undetermined coefficients.


class AffineValue:
    """``constant + sum(linear[i] * c(i))`` over the active scalar ring.

    ``linear`` maps a coefficient index to its scalar coefficient.  The
    engine never forms a product of two expressions that both carry a
    linear part; :class:`NonlinearFault` guards that invariant.
    """

    __slots__ = ("constant", "linear")

    def __init__(self, constant, linear: Optional[dict] = None):
        self.constant = constant
        self.linear = linear or {}

    def is_constant(self) -> bool:
        return not self.linear

    def scalar(self):
        if self.linear:
            raise ValueError(f"value still depends on {sorted(self.linear)}")
        return self.constant

    def __eq__(self, other):
        if not isinstance(other, AffineValue):
            return NotImplemented
        return (self.constant == other.constant
                and set(self.linear) == set(other.linear)
                and all(self.linear[k] == other.linear[k] for k in self.linear))

    __hash__ = None

    def __repr__(self):
        parts = [repr(self.constant)]
        for uid in sorted(self.linear):
            parts.append(f"({self.linear[uid]!r})*c({uid})")
        return " + ".join(parts)


def aff_const(lane, s) -> AffineValue:
    return AffineValue(s)


def aff_add(lane, a: AffineValue, b: AffineValue) -> AffineValue:
    lin = dict(a.linear)
    for uid, cf in b.linear.items():
        if uid in lin:
            s = lane.add(lin[uid], cf)
            if lane.is_exact and s == 0:
                del lin[uid]
            else:
                lin[uid] = s
        else:
            lin[uid] = cf
    return AffineValue(lane.add(a.constant, b.constant), lin)


def aff_neg(lane, a: AffineValue) -> AffineValue:
    return AffineValue(lane.neg(a.constant),
                       {u: lane.neg(c) for u, c in a.linear.items()})


def aff_sub(lane, a: AffineValue, b: AffineValue) -> AffineValue:
    return aff_add(lane, a, aff_neg(lane, b))


def aff_scale(lane, a: AffineValue, s) -> AffineValue:
    if lane.is_exact and s == 0:
        return AffineValue(lane.zero)
    return AffineValue(lane.mul(a.constant, s),
                       {u: lane.mul(c, s) for u, c in a.linear.items()})


def aff_mul(lane, a: AffineValue, b: AffineValue) -> AffineValue:
    if a.linear and b.linear:
        raise NonlinearFault(
            f"product of two symbolic values (unknowns {sorted(a.linear)} "
            f"and {sorted(b.linear)})")
    if b.linear:
        a, b = b, a
    return aff_scale(lane, a, b.constant)


def aff_fold(lane, a: AffineValue, env: dict) -> AffineValue:
    """Substitute every solved coefficient appearing in ``a``."""
    hits = [u for u in a.linear if u in env]
    if not hits:
        return a
    const = a.constant
    lin = {}
    for uid, cf in a.linear.items():
        if uid in env:
            const = lane.add(const, lane.mul(cf, env[uid]))
        else:
            lin[uid] = cf
    return AffineValue(const, lin)


# ---------------------------------------------------------------------------
# Coefficient pairs and divisor sums.


def _divisors(n: int) -> List[int]:
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass
class CoeffPair:
    """A trace-like sequence ``cplus`` paired with a dimension-like
    sequence ``cminus`` for a fixed prime ``p``.

    Both maps must send -1 to 1 (the simple pole) and omit 0 or send it
    to 0.  ``cminus`` entries may be exact integers, 3-adic values, or
    ``None`` for "not yet determined".  Where both entries are exact
    integers they must agree modulo 2.
    """

    p: int
    cplus: Dict[int, int]
    cminus: Dict[int, object]

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        for name, table in (("cplus", self.cplus), ("cminus", self.cminus)):
            if table.get(-1) != 1:
                raise ValueError(f"{name}(-1) must be 1")
            if table.get(0) not in (None, 0):
                raise ValueError(f"{name}(0) must be absent or 0")
        for n, v in self.cminus.items():
            if n < 1 or not isinstance(v, int):
                continue
            w = self.cplus.get(n)
            if isinstance(w, int) and (v - w) % 2 != 0:
                raise ValueError(
                    f"parity violation at {n}: cminus={v}, cplus={w}")


def _pm_terms(m: int, n: int) -> List[Tuple[str, int, Fraction]]:
    """Divisor sum structure of the paired product at position (m, n).

    Odd divisors weight ``cminus``, even divisors weight ``cplus``; the
    index shrinks quadratically with the divisor.
    """
    out = []
    for d in _divisors(gcd(m, n)):
        idx = (m * n) // (d * d)
        fam = "env" if d % 2 == 1 else "fixed"
        out.append((fam, idx, Fraction(1, d)))
    return out


def _self_terms_fn(p: Optional[int]) -> Callable[[int, int], list]:
    """Divisor sum structure of the self product of one sequence.

    All terms weight the sequence itself.  When both reduced
    coordinates are divisible by ``p`` a second, level-folded term
    appears with index shrunk by ``p``.
    """

    def terms(m: int, n: int) -> List[Tuple[str, int, Fraction]]:
        out = []
        for d in _divisors(gcd(m, n)):
            idx = (m * n) // (d * d)
            out.append(("env", idx, Fraction(1, d)))
            if p is not None and (m // d) % p == 0 and (n // d) % p == 0:
                out.append(("env", idx // p, Fraction(1, d)))
        return out

    return terms


def divisor_sum(pair: CoeffPair, m: int, n: int, lane=None) -> AffineValue:
    """The divisor weighted sum whose exponential generates the cell
    table of the paired product.

    Known coefficients contribute to the constant part; missing
    ``cminus`` entries appear symbolically.  Missing ``cplus`` entries
    raise :class:`MissingCoefficientError`.
    """
    if lane is None:
        lane = _lane_for_values(pair.cminus.values())
    const = lane.zero
    lin: dict = {}
    for fam, idx, w in _pm_terms(m, n):
        if fam == "fixed":
            if idx not in pair.cplus:
                raise MissingCoefficientError("cplus", idx)
            const = lane.add(const, lane.embed_fraction(w * pair.cplus[idx]))
        else:
            v = pair.cminus.get(idx)
            if v is None:
                w_s = lane.embed_fraction(w)
                lin[idx] = lane.add(lin[idx], w_s) if idx in lin else w_s
            else:
                const = lane.add(const, lane.mul(lane.embed_fraction(w),
                                                 lane.coerce(v)))
    return AffineValue(const, lin)


def _lane_for_values(values) -> object:
    for v in values:
        if isinstance(v, Padic3Frac):
            return Padic3Lane(v.num.cap)
        if isinstance(v, PadicApprox):
            return Padic3Lane(v.cap)
    return RationalLane


# ---------------------------------------------------------------------------
# Constraints.


@dataclass(frozen=True)
class Constraint:
    """One equation of the paired product.

    ``vanish`` states that the product coefficient at ``(m, n)``
    vanishes; ``ladder`` states ``c[m+1, n] = c[m, n+1]`` for the cell
    table.  The two describe the same equation from the two sides of
    the prefactor ``r^-1 - q^-1``.
    """

    kind: str
    m: int
    n: int


def build_constraints(p: int, M: int, N: int) -> List[Constraint]:
    """All constraints of the paired product in the window
    ``1 <= m <= M``, ``1 <= n <= N``, in graded order.

    No constraint is emitted at positions with ``p | mn``, and no
    constraint ever touches a column at or beyond ``p``.
    """
    if M >= p:
        raise ValueError(f"column bound {M} must stay below p = {p}")
    out = []
    for total in range(2, M + N + 1):
        for m in range(1, M + 1):
            n = total - m
            if not 1 <= n <= N:
                continue
            if (m * n) % p == 0:
                continue
            out.append(Constraint("vanish", m, n))
            if m + 1 < p:
                out.append(Constraint("ladder", m, n))
    return out


# ---------------------------------------------------------------------------
# Cell strategies.


class _RecurrenceCells:
    """Cells of exp(-S) via the q-derivative convolution recurrence.

    Exact lane only: the recurrence divides by the q-degree, which is
    harmless over Fraction but would waste 3-adic digits.
    """

    def __init__(self, eng):
        self.eng = eng
        self.values: Dict[Tuple[int, int], AffineValue] = {}

    def advance(self, total: int) -> None:
        eng = self.eng
        lane = eng.lane
        for m in range(0, min(eng.Mq, total) + 1):
            n = total - m
            if n < 0 or n > eng.Nq:
                continue
            if m == 0 or n == 0:
                continue
            acc = AffineValue(lane.zero)
            for a in range(1, m + 1):
                for b in range(1, n + 1):
                    if (a, b) == (m, n):
                        prev = AffineValue(lane.one)
                    else:
                        prev = self.values.get((m - a, n - b))
                        if prev is None:
                            continue
                    s = eng.s_value(a, b)
                    acc = aff_add(lane, acc,
                                  aff_scale(lane, aff_mul(lane, s, prev),
                                            lane.embed_int(b)))
            self.values[(m, n)] = aff_scale(lane, acc,
                                            lane.embed_fraction(Fraction(-1, n)))

    def read(self, m: int, n: int) -> AffineValue:
        if (m, n) == (0, 0):
            return AffineValue(self.eng.lane.one)
        v = self.values.get((m, n))
        if v is None:
            return AffineValue(self.eng.lane.zero)
        return v

    def on_assigned(self, uid: int) -> None:
        lane, env = self.eng.lane, self.eng.env
        for key, v in self.values.items():
            if uid in v.linear:
                self.values[key] = aff_fold(lane, v, env)


class _ProductCells:
    """Cells of exp(-S) as an incremental product of per-position
    exponential factors.

    Repeated factors go through the sharp power rule, which is what
    lets a cube survive the following division by 3! undamaged; that
    exactness is the engine of the digit sieve.  Factors whose S value
    is still symbolic are kept pending and contribute linear
    corrections at read time; products of two pending factors must fall
    outside the window, anything else is a scheduling fault.
    """

    def __init__(self, eng):
        self.eng = eng
        self.T: Dict[Tuple[int, int], object] = {(0, 0): eng.lane.one}
        self.pending: Dict[Tuple[int, int], AffineValue] = {}

    def advance(self, total: int) -> None:
        eng = self.eng
        for a in range(1, min(eng.Mq, total - 1) + 1):
            b = total - a
            if not 1 <= b <= eng.Nq:
                continue
            s = eng.s_value(a, b)
            if s.linear:
                self.pending[(a, b)] = s
            else:
                self._mul_in(a, b, s.constant)

    def _mul_in(self, a: int, b: int, s) -> None:
        lane = self.eng.lane
        kmax = min(self.eng.Mq // a, self.eng.Nq // b)
        terms = []
        for k in range(1, kmax + 1):
            tk = lane.div_exact_int(lane.pow(lane.neg(s), k), factorial(k))
            terms.append(tk)
        updates: Dict[Tuple[int, int], object] = {}
        for (x, y), v in self.T.items():
            for k in range(1, kmax + 1):
                tx, ty = x + k * a, y + k * b
                if tx > self.eng.Mq or ty > self.eng.Nq:
                    break
                add = lane.mul(v, terms[k - 1])
                if (tx, ty) in updates:
                    updates[(tx, ty)] = lane.add(updates[(tx, ty)], add)
                else:
                    updates[(tx, ty)] = add
        for key, add in updates.items():
            if key in self.T:
                self.T[key] = lane.add(self.T[key], add)
            else:
                self.T[key] = add

    def read(self, m: int, n: int) -> AffineValue:
        lane = self.eng.lane
        base = self.T.get((m, n))
        aff = AffineValue(base if base is not None else lane.zero)
        pend = sorted(self.pending.items())
        for (a, b), s in pend:
            if a <= m and b <= n:
                cof = self.T.get((m - a, n - b))
                if cof is not None:
                    aff = aff_add(lane, aff,
                                  aff_scale(lane, aff_neg(lane, s), cof))
                k = 2
                while m - k * a >= 0 and n - k * b >= 0:
                    if self.T.get((m - k * a, n - k * b)) is not None:
                        raise NonlinearFault(
                            f"pending factor at {(a, b)} squared inside the "
                            f"window at cell {(m, n)}")
                    k += 1
        for i in range(len(pend)):
            (a1, b1), _ = pend[i]
            for j in range(i + 1, len(pend)):
                (a2, b2), _ = pend[j]
                if (a1 + a2 <= m and b1 + b2 <= n
                        and self.T.get((m - a1 - a2, n - b1 - b2)) is not None):
                    raise NonlinearFault(
                        f"pending factors at {(a1, b1)} and {(a2, b2)} meet "
                        f"inside the window at cell {(m, n)}")
        return aff

    def on_assigned(self, uid: int) -> None:
        lane, env = self.eng.lane, self.eng.env
        for pos in sorted(self.pending):
            s = self.pending[pos]
            if uid not in s.linear:
                continue
            s = aff_fold(lane, s, env)
            if s.linear:
                self.pending[pos] = s
            else:
                del self.pending[pos]
                self._mul_in(pos[0], pos[1], s.constant)


# ---------------------------------------------------------------------------
# The elimination store.


class _Store:
    """Incremental exact Gaussian elimination over the active lane.

    Rows are affine expressions required to vanish.  Each multi-unknown
    row is kept pivoted on one unknown; rows never contain another
    row's pivot.  Assignments cascade through a worklist.
    """

    def __init__(self, eng):
        self.eng = eng
        self.pivots: Dict[int, Tuple[AffineValue, tuple]] = {}

    def add_row(self, aff: AffineValue, origin: tuple) -> None:
        work = [(aff, origin)]
        while work:
            row, org = work.pop()
            row = self._normalize(row)
            if not row.linear:
                self.eng.note_residual(org, row.constant)
                if self.eng.lane.is_surely_nonzero(row.constant):
                    raise InconsistentError(
                        f"constraint {org} is violated", where=org,
                        value=row.constant)
                continue
            if len(row.linear) == 1:
                (uid, cf), = row.linear.items()
                try:
                    value = self.eng.lane.div(
                        self.eng.lane.neg(row.constant), cf)
                except _PivotUnusable:
                    self._install(uid, row, org, work)
                    continue
                self._assign(uid, value, work)
                continue
            uid = min(row.linear,
                      key=lambda u: (self.eng.lane.pivot_quality(row.linear[u]), u))
            self._install(uid, row, org, work)

    def _eliminate_uid(self, row: AffineValue, uid: int,
                       prow: AffineValue) -> AffineValue:
        """Cancel ``uid`` from ``row`` against a pivot row.

        In the 3-adic lane the cancellation is only as exact as the
        coefficient ratio; whatever trace survives is folded into the
        constant as bounded noise, never silently discarded.
        """
        lane = self.eng.lane
        ratio = lane.div(row.linear[uid], prow.linear[uid])
        row = aff_sub(lane, row, aff_scale(lane, prow, ratio))
        if uid in row.linear:
            c = row.linear.pop(uid)
            noise = Padic3Frac(PadicApprox(0, c.num.prec, c.num.cap), c.shift)
            row = AffineValue(lane.add(row.constant, noise), row.linear)
        return row

    def _normalize(self, row: AffineValue) -> AffineValue:
        lane = self.eng.lane
        row = aff_fold(lane, row, self.eng.env)
        seen = set()
        while True:
            hit = None
            for uid in row.linear:
                if uid in self.pivots and uid not in seen:
                    hit = uid
                    break
            if hit is None:
                break
            seen.add(hit)
            try:
                row = self._eliminate_uid(row, hit, self.pivots[hit][0])
            except _PivotUnusable:
                pass
        if not lane.is_exact:
            row = self._drop_invisible(row)
        return row

    def _drop_invisible(self, row: AffineValue) -> AffineValue:
        """Fold linear terms with no visible coefficient into the
        constant as bounded noise.

        The unknowns are 3-adic integers, so a term whose coefficient
        is only known to vanish modulo ``3**t`` contributes at most
        ``3**t`` worth of uncertainty; adding a zero known to that
        precision models it soundly and lets the row residual stay
        testable.
        """
        lane = self.eng.lane
        bad = [u for u, c in row.linear.items() if not lane.is_surely_nonzero(c)]
        if not bad:
            return row
        const = row.constant
        lin = dict(row.linear)
        for uid in bad:
            c = lin.pop(uid)
            noise = Padic3Frac(PadicApprox(0, c.num.prec, c.num.cap), c.shift)
            const = lane.add(const, noise)
        return AffineValue(const, lin)

    def _install(self, uid: int, row: AffineValue, org: tuple, work: list) -> None:
        lane = self.eng.lane
        self.pivots[uid] = (row, org)
        for other in list(self.pivots):
            if other == uid or other not in self.pivots:
                continue
            orow, oorg = self.pivots[other]
            if uid not in orow.linear:
                continue
            try:
                orow = self._eliminate_uid(orow, uid, row)
            except _PivotUnusable:
                continue
            if not lane.is_exact:
                orow = self._drop_invisible(orow)
            if not orow.linear:
                del self.pivots[other]
                self.eng.note_residual(oorg, orow.constant)
                if lane.is_surely_nonzero(orow.constant):
                    raise InconsistentError(
                        f"constraint {oorg} is violated", where=oorg,
                        value=orow.constant)
            elif other in orow.linear and len(orow.linear) > 1:
                self.pivots[other] = (orow, oorg)
            else:
                del self.pivots[other]
                work.append((orow, oorg))

    def _assign(self, uid: int, value, work: list) -> None:
        eng = self.eng
        value = eng.lane.assign_value(value, uid)
        eng.env[uid] = value
        eng.on_assigned(uid)
        for other in list(self.pivots):
            if other not in self.pivots:
                continue
            orow, oorg = self.pivots[other]
            if uid not in orow.linear:
                continue
            orow = aff_fold(eng.lane, orow, eng.env)
            del self.pivots[other]
            if not orow.linear:
                eng.note_residual(oorg, orow.constant)
                if eng.lane.is_surely_nonzero(orow.constant):
                    raise InconsistentError(
                        f"constraint {oorg} is violated", where=oorg,
                        value=orow.constant)
            else:
                work.append((orow, oorg))


# ---------------------------------------------------------------------------
# The propagation engine.


class _Propagation:
    """Graded sweep over the constraint window with eager solving."""

    def __init__(self, *, lane, m_cols: int, n_max: int,
                 term_fn: Callable[[int, int], list],
                 fixed: Optional[Dict[int, int]],
                 env: Dict[int, object],
                 emit: Callable[[int, int], bool],
                 cells: str,
                 emit_order: str = "forward",
                 lenient_fixed: bool = False):
        self.lane = lane
        self.Mq = m_cols + 1
        self.Nq = n_max + 1
        self.m_cols = m_cols
        self.n_max = n_max
        self.term_fn = term_fn
        self.fixed = fixed
        self.env = dict(env)
        self.emit = emit
        self.emit_order = emit_order
        self.lenient_fixed = lenient_fixed
        self.residuals: Dict[tuple, object] = {}
        self._s_cache: Dict[Tuple[int, int], AffineValue] = {}
        self.store = _Store(self)
        if cells == "product":
            self.cells = _ProductCells(self)
        elif cells == "recurrence":
            self.cells = _RecurrenceCells(self)
        else:
            raise ValueError(f"unknown cell strategy {cells!r}")

    def s_value(self, a: int, b: int) -> AffineValue:
        cached = self._s_cache.get((a, b))
        if cached is not None:
            return cached
        lane = self.lane
        const = lane.zero
        lin: dict = {}
        for fam, idx, w in self.term_fn(a, b):
            if fam == "fixed":
                if idx not in self.fixed:
                    if self.lenient_fixed:
                        const = lane.add(const, lane.unknown_scalar())
                        continue
                    raise MissingCoefficientError("cplus", idx)
                const = lane.add(const,
                                 lane.embed_fraction(w * self.fixed[idx]))
            else:
                if idx in self.env:
                    const = lane.add(const, lane.mul(lane.embed_fraction(w),
                                                     self.env[idx]))
                else:
                    w_s = lane.embed_fraction(w)
                    lin[idx] = lane.add(lin[idx], w_s) if idx in lin else w_s
        value = AffineValue(const, lin)
        self._s_cache[(a, b)] = value
        return value

    def on_assigned(self, uid: int) -> None:
        lane, env = self.lane, self.env
        for key, v in self._s_cache.items():
            if uid in v.linear:
                self._s_cache[key] = aff_fold(lane, v, env)
        self.cells.on_assigned(uid)

    def note_residual(self, origin: tuple, value) -> None:
        self.residuals[origin] = value

    def run(self) -> None:
        for total in range(2, self.Mq + self.Nq + 1):
            self.cells.advance(total)
            ms = range(1, self.m_cols + 1)
            if self.emit_order == "reversed":
                ms = reversed(ms)
            for m in ms:
                n = total - 1 - m
                if not 1 <= n <= self.n_max:
                    continue
                if not self.emit(m, n):
                    continue
                row = aff_sub(self.lane,
                              self.cells.read(m + 1, n),
                              self.cells.read(m, n + 1))
                self.store.add_row(row, ("vanish", m, n))


# ---------------------------------------------------------------------------
# Public operations.


def _numeric_engine(cminus: Dict[int, object], cplus: Dict[int, int],
                    m_top: int, n_top: int, *, strict: bool):
    """A propagation engine with purely numeric cells over the window
    with corner cell ``(m_top, n_top)``.

    Exact data must cover the window when ``strict``; in the 3-adic
    lane missing entries become values of precision zero instead, so
    everything they touch is simply marked unknown.
    """
    lane = _lane_for_values(cminus.values())
    env = {}
    for idx, v in cminus.items():
        if idx >= 1 and v is not None:
            env[idx] = lane.coerce(v)
    needed = set()
    for a in range(1, m_top + 1):
        for b in range(1, n_top + 1):
            for fam, idx, _ in _pm_terms(a, b):
                if fam == "env":
                    needed.add(idx)
    missing = needed - set(env)
    if lane is RationalLane:
        if missing and strict:
            raise MissingCoefficientError("cminus", min(missing))
        cells = "recurrence"
    else:
        cells = "product"
    unknown = lane.unknown_scalar()
    for idx in missing:
        env[idx] = unknown
    eng = _Propagation(lane=lane, m_cols=m_top - 1, n_max=n_top - 1,
                       term_fn=lambda a, b: _pm_terms(a, b),
                       fixed=cplus, env=env,
                       emit=lambda m, n: False, cells=cells,
                       lenient_fixed=not strict)
    eng.run()
    return eng


def log_coeffs(pair: CoeffPair, bounds: Tuple[int, int]) -> Dict[Tuple[int, int], object]:
    """The cell table ``c[m, n]`` with
    ``1 + sum c[m, n] r^m q^n = exp(-S)`` over the window ``bounds``.

    All ``cminus`` values inside the window must be known in the exact
    lane; in the 3-adic lane missing entries flow through as values of
    precision zero.
    """
    M, N = bounds
    eng = _numeric_engine(pair.cminus, pair.cplus, M, N, strict=True)
    out = {}
    for m in range(1, M + 1):
        for n in range(1, N + 1):
            out[(m, n)] = eng.cells.read(m, n).scalar()
    return out


@dataclass
class SolutionReport:
    """Outcome of checking a fully determined pair against every
    constraint in a window."""

    p: int
    bounds: Tuple[int, int]
    violations: List[Tuple[str, int, int, object]]
    pdiv_values: Dict[Tuple[int, int], object]
    tested: int
    skipped: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_solution(cminus: Dict[int, object], cplus: Dict[int, int], p: int,
                   bounds: Tuple[int, int] = (5, 45)) -> SolutionReport:
    """Evaluate every constraint of ``build_constraints(p, *bounds)``
    against candidate data, reporting all violations.

    Values the tables do not reach stay symbolic, and constraints
    touching them are skipped rather than guessed.  The product
    coefficients at ``p | mn`` positions carry no constraint but are
    reported for inspection.
    """
    M, N = bounds
    if M >= p:
        raise ValueError(f"column bound {M} must stay below p = {p}")
    eng = _numeric_engine(cminus, cplus, M + 1, N + 1, strict=False)
    lane = eng.lane
    violations = []
    skipped = []
    tested = 0
    pdiv = {}
    for m in range(1, M + 1):
        for n in range(1, N + 1):
            row = aff_sub(lane,
                          eng.cells.read(m + 1, n),
                          eng.cells.read(m, n + 1))
            row = aff_fold(lane, row, eng.env)
            testable = (row.is_constant()
                        and lane.is_informative(row.constant))
            if (m * n) % p == 0:
                if testable:
                    pdiv[(m, n)] = row.constant
                continue
            if not testable:
                skipped.append((m, n))
                continue
            tested += 1
            if lane.is_surely_nonzero(row.constant):
                violations.append(("vanish", m, n, row.constant))
    return SolutionReport(p=p, bounds=bounds, violations=violations,
                          pdiv_values=pdiv, tested=tested, skipped=skipped)


_EXTEND_SLACKS = (8, 16, 32)


def _run_or_stall(eng: _Propagation, terms: int) -> list:
    """Run an extension engine, returning the indices up to ``terms``
    it failed to determine.

    A window too narrow to resolve its own unknowns eventually squares
    one of them; that fault counts as a stall when target coefficients
    are indeed still open, and stays fatal otherwise.
    """
    try:
        eng.run()
    except NonlinearFault:
        missing = [n for n in range(1, terms + 1) if n not in eng.env]
        if not missing:
            raise
        return missing
    return [n for n in range(1, terms + 1) if n not in eng.env]


def extend_cminus(seeds: Tuple[int, int, int, int], cplus: Dict[int, int],
                  p: int, terms: int, *, columns: int = 4) -> QSeries:
    """Determine ``cminus(n)`` for ``n <= terms`` from the seed values
    at 1, 2, 4 and 5, against a known ``cplus`` table.

    Returns the extended series with its ``q^-1`` pole.  Raises
    :class:`InconsistentError` when the constraints are unsatisfiable
    and :class:`UnderdeterminedError` when they stall.
    """
    if not _is_prime(p) or p < 13:
        raise ValueError(f"p must be a prime >= 13, got {p}")
    if terms < 5:
        raise ValueError("terms must be at least 5")
    if columns >= p:
        raise ValueError("column bound must stay below p")
    s1, s2, s4, s5 = seeds
    base_env = {1: Fraction(s1), 2: Fraction(s2),
                4: Fraction(s4), 5: Fraction(s5)}
    missing = [3]
    for slack in _EXTEND_SLACKS:
        n_max = terms + slack
        eng = _Propagation(lane=RationalLane, m_cols=columns, n_max=n_max,
                           term_fn=lambda a, b: _pm_terms(a, b),
                           fixed=cplus, env=base_env,
                           emit=lambda m, n: (m * n) % p != 0,
                           cells="recurrence")
        missing = _run_or_stall(eng, terms)
        if not missing:
            return _env_to_series(eng.env, terms)
    raise UnderdeterminedError(missing[0])


def extend_self(seeds: Dict[int, int], p: Optional[int], terms: int,
                *, columns: int = 4,
                emit_order: str = "forward") -> Dict[int, int]:
    """Extend a sequence from ``c(1..5)`` using its own product
    identity (all constraint positions, level folding at ``p``).

    ``p = None`` disables the folded factors, which is the correct
    reading for a sequence with no level structure.  Returns the full
    integer table ``{-1: 1, 1: c(1), ..., terms: c(terms)}``.
    """
    if p is not None and not _is_prime(p):
        raise ValueError(f"p must be prime or None, got {p}")
    if terms < 5:
        raise ValueError("terms must be at least 5")
    for i in range(1, 6):
        if i not in seeds:
            raise ValueError(f"seed c({i}) is required")
    base_env = {i: Fraction(seeds[i]) for i in range(1, 6)}
    term_fn = _self_terms_fn(p)
    missing = [6]
    for slack in _EXTEND_SLACKS:
        n_max = terms + slack
        eng = _Propagation(lane=RationalLane, m_cols=columns, n_max=n_max,
                           term_fn=term_fn, fixed=None, env=base_env,
                           emit=lambda m, n: True, cells="recurrence",
                           emit_order=emit_order)
        missing = _run_or_stall(eng, terms)
        if not missing:
            out = {-1: 1}
            for n in range(1, terms + 1):
                v = eng.env[n]
                out[n] = int(v)
            return out
    raise UnderdeterminedError(missing[0])


def _env_to_series(env: Dict[int, Fraction], terms: int) -> QSeries:
    coeffs = [Fraction(1), Fraction(0)]
    for n in range(1, terms + 1):
        coeffs.append(env[n])
    return QSeries(-1, coeffs, terms + 1, RING_Q)


def propagate_padic(p: int, seed_residues: Tuple[int, int, int, int],
                    level: int, cplus: Dict[int, int], *,
                    columns: int = 4, n_max: int = 16,
                    cap: int = CAP_DEFAULT) -> _Propagation:
    """One 3-adic propagation pass from seed residues known modulo
    ``3**level``.

    Returns the engine (with its solved table and residuals) on
    success.  Raises :class:`InconsistentError` or
    :class:`~moonsieve.series.PadicDivisionError` when the residues are
    refuted; the digit sieve treats either as pruning.
    """
    if level < 1 or level + 8 > cap:
        raise ValueError(f"level {level} out of range for cap {cap}")
    lane = Padic3Lane(cap)
    r1, r2, r4, r5 = seed_residues
    env = {
        1: Padic3Frac(PadicApprox(r1, level, cap), 0),
        2: Padic3Frac(PadicApprox(r2, level, cap), 0),
        4: Padic3Frac(PadicApprox(r4, level, cap), 0),
        5: Padic3Frac(PadicApprox(r5, level, cap), 0),
    }
    eng = _Propagation(lane=lane, m_cols=columns, n_max=n_max,
                       term_fn=lambda a, b: _pm_terms(a, b),
                       fixed=cplus, env=env,
                       emit=lambda m, n: (m * n) % p != 0,
                       cells="product")
    eng.run()
    return eng
