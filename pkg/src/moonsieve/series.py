"""Truncated exact series and precision-tracked 3-adic integers.

All coefficient arithmetic in this package is exact: Python ints,
``fractions.Fraction``, or :class:`PadicApprox` residues with explicit
precision.  Nothing here rounds or approximates silently.

Three layers live in this module:

* :class:`PadicApprox` -- an element of Z_3 known modulo ``3**prec``,
  stored modulo ``3**cap``.  Every operation returns a sound precision:
  whatever the true values are, the result's residue is congruent to the
  true result modulo ``3**prec`` of the output.
* :class:`QSeries` -- a univariate Laurent q-expansion truncated after a
  fixed power, generic over a coefficient ring adapter.
* :class:`BiSeries` -- a bivariate r,q-expansion truncated in both
  variables, with ``exp``/``log`` along the r-adic ideal and the infinite
  product builder :func:`product_from_exponents`.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

CAP_DEFAULT = 40


_POW3 = [1, 3, 9, 27, 81]

_UNIT_INV: dict = {}


def pow3(k: int) -> int:
    if k < 0:
        raise ValueError("negative power of 3")
    while len(_POW3) <= k:
        _POW3.append(_POW3[-1] * 3)
    return _POW3[k]


def val3(n: int) -> int:
    """3-adic valuation of a nonzero integer; raises on 0."""
    if n == 0:
        raise ValueError("val3(0) is infinite")
    v = 0
    while n % 3 == 0:
        n //= 3
        v += 1
    return v


class PadicDivisionError(ArithmeticError):
    """Division of a 3-adic value with visibly non-divisible residue.

    In the sieve this is a pruning event, not a crash: it proves the
    constraint system has no solution extending the current seed residues.
    """


class PadicApprox:
    """An element of Z_3 known modulo ``3**prec``, stored modulo ``3**cap``.

    ``residue`` is always reduced into ``[0, 3**cap)``.  ``prec == 0`` means
    the value is entirely unknown.  The residue may carry more digits than
    ``prec`` guarantees; only the low ``prec`` digits are meaningful to
    callers.
    """

    __slots__ = ("residue", "prec", "cap")

    def __init__(self, residue: int, prec: int, cap: int = CAP_DEFAULT):
        if not 0 <= prec <= cap:
            raise ValueError(f"prec must lie in [0, cap]; got prec={prec} cap={cap}")
        self.residue = residue % pow3(cap)
        self.prec = prec
        self.cap = cap

    @classmethod
    def from_int(cls, n: int, cap: int = CAP_DEFAULT) -> "PadicApprox":
        """Exact integer, known to the full cap."""
        return cls(n, cap, cap)

    @classmethod
    def unknown(cls, cap: int = CAP_DEFAULT) -> "PadicApprox":
        return cls(0, 0, cap)

    def known_val(self) -> int:
        """Sound lower bound for the 3-adic valuation of the value.

        Exact when the residue is nonzero modulo ``3**prec``; otherwise the
        bound is ``prec`` itself (the value could be anything divisible by
        ``3**prec``).
        """
        r = self.residue % pow3(self.prec) if self.prec else 0
        if r == 0:
            return self.prec
        return val3(r)

    def val_is_exact(self) -> bool:
        return self.prec > 0 and self.residue % pow3(self.prec) != 0

    def is_known_zero_mod_prec(self) -> bool:
        return self.prec == 0 or self.residue % pow3(self.prec) == 0

    def _check_cap(self, other: "PadicApprox") -> None:
        if self.cap != other.cap:
            raise ValueError("mixed caps")

    def add(self, other: "PadicApprox") -> "PadicApprox":
        self._check_cap(other)
        return PadicApprox(self.residue + other.residue,
                           min(self.prec, other.prec), self.cap)

    def neg(self) -> "PadicApprox":
        return PadicApprox(-self.residue, self.prec, self.cap)

    def sub(self, other: "PadicApprox") -> "PadicApprox":
        return self.add(other.neg())

    def mul(self, other: "PadicApprox") -> "PadicApprox":
        self._check_cap(other)
        cap = self.cap
        if self.prec == cap and other.prec == cap:
            prec = cap
        else:
            prec = min(self.prec + other.known_val(),
                       other.prec + self.known_val(),
                       cap)
        return PadicApprox(self.residue * other.residue, prec, cap)

    def mul_int(self, k: int) -> "PadicApprox":
        """Multiply by an exact integer."""
        if k == 0:
            return PadicApprox.from_int(0, self.cap)
        return PadicApprox(self.residue * k,
                           min(self.prec + val3(k), self.cap), self.cap)

    def pow_sharp(self, e: int) -> "PadicApprox":
        """e-th power with the sharp precision rule.

        For a value of exactly known valuation v the binomial expansion of
        ``(x + 3**prec * err)**e`` shows the result is determined modulo
        ``3**(prec + val3(e) + (e-1)*v)``.  When the valuation is not
        determined (residue = 0 mod 3**prec) only ``e * prec`` digits
        survive.  The sharp branch is what lets a cube lose nothing against
        a following division by 3.
        """
        if e == 0:
            return PadicApprox.from_int(1, self.cap)
        if e < 0:
            raise ValueError("negative power")
        if self.val_is_exact():
            prec = min(self.prec + val3(e) + (e - 1) * self.known_val(), self.cap)
        else:
            prec = min(e * self.prec, self.cap)
        return PadicApprox(pow(self.residue, e, pow3(self.cap)), prec, self.cap)

    def div3(self) -> "PadicApprox":
        """Divide by 3, losing one digit of precision.

        Requires the value to be divisible by 3.  A residue visibly not
        divisible by 3 (at positive precision) raises
        :class:`PadicDivisionError` -- the sieve's pruning signal.  At
        ``prec == 0`` nothing is known, and nothing is known of the
        quotient either.
        """
        if self.prec == 0:
            return PadicApprox.unknown(self.cap)
        if self.residue % 3 != 0:
            raise PadicDivisionError(
                f"residue {self.residue % 27}... not divisible by 3 at prec {self.prec}")
        return PadicApprox(self.residue // 3, self.prec - 1, self.cap)

    def div_unit(self, u: int) -> "PadicApprox":
        """Divide by an integer coprime to 3 (precision preserved)."""
        if u % 3 == 0:
            raise ValueError("not a 3-adic unit")
        key = (u, self.cap)
        inv = _UNIT_INV.get(key)
        if inv is None:
            inv = pow(u, -1, pow3(self.cap))
            if len(_UNIT_INV) < 4096:
                _UNIT_INV[key] = inv
        return PadicApprox(self.residue * inv, self.prec, self.cap)

    def div_int(self, d: int) -> "PadicApprox":
        """Divide by a nonzero integer d = 3**k * u.

        Splits into a unit inversion and k precision-losing
        :meth:`div3` steps, so non-divisibility surfaces as
        :class:`PadicDivisionError`.
        """
        if d == 0:
            raise ZeroDivisionError
        sign = -1 if d < 0 else 1
        d = abs(d)
        k = val3(d)
        out = self.div_unit(sign * (d // pow3(k)))
        for _ in range(k):
            out = out.div3()
        return out

    def residue_mod_prec(self) -> int:
        return self.residue % pow3(self.prec) if self.prec else 0

    def agrees_with_int(self, n: int) -> bool:
        """Does the exact integer n match this approximation mod 3**prec?"""
        return (n - self.residue) % pow3(self.prec) == 0 if self.prec else True

    def __eq__(self, other):
        if not isinstance(other, PadicApprox):
            return NotImplemented
        return (self.cap == other.cap and self.prec == other.prec
                and self.residue_mod_prec() == other.residue_mod_prec())

    def __hash__(self):
        return hash((self.cap, self.prec, self.residue_mod_prec()))

    def __repr__(self):
        return f"PadicApprox({self.residue_mod_prec()} mod 3^{self.prec})"


def padic_add(x: PadicApprox, y: PadicApprox) -> PadicApprox:
    return x.add(y)


def padic_mul(x: PadicApprox, y: PadicApprox) -> PadicApprox:
    return x.mul(y)


def padic_pow_sharp(x: PadicApprox, e: int) -> PadicApprox:
    return x.pow_sharp(e)


def padic_div3(x: PadicApprox) -> PadicApprox:
    return x.div3()


def padic_div_int(x: PadicApprox, d: int) -> PadicApprox:
    return x.div_int(d)


# ---------------------------------------------------------------------------
# Coefficient ring adapters.
#
# QSeries and BiSeries are generic over a tiny ring protocol so the same
# series code runs over exact rationals, K-ring elements, or 3-adic
# residues.  An adapter provides exact ring operations plus division by a
# plain integer (the only division series expansion ever needs).


class RingQ:
    """Exact rational coefficients."""

    zero = Fraction(0)
    one = Fraction(1)

    @staticmethod
    def from_int(n):
        return Fraction(n)

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
        return a / d

    @staticmethod
    def pow(a, e):
        return a ** e

    @staticmethod
    def is_zero(a):
        return a == 0


class RingZ3:
    """PadicApprox coefficients at a fixed cap."""

    def __init__(self, cap: int = CAP_DEFAULT):
        self.cap = cap
        self.zero = PadicApprox.from_int(0, cap)
        self.one = PadicApprox.from_int(1, cap)

    def from_int(self, n):
        return PadicApprox.from_int(n, self.cap)

    @staticmethod
    def add(a, b):
        return a.add(b)

    @staticmethod
    def neg(a):
        return a.neg()

    @staticmethod
    def mul(a, b):
        return a.mul(b)

    @staticmethod
    def div_int(a, d):
        return a.div_int(d)

    @staticmethod
    def pow(a, e):
        return a.pow_sharp(e)

    @staticmethod
    def is_zero(a):
        # Only an exact stored zero may be dropped from a series: a residue
        # that merely vanishes mod 3**prec still carries an error term that
        # must keep degrading later precision.
        return a.prec == a.cap and a.residue == 0


RING_Q = RingQ()


class QSeries:
    """Laurent q-expansion, exact through ``q**trunc`` inclusive.

    Stored densely: ``coeffs[i]`` is the coefficient of ``q**(lead + i)``.
    Operations silently drop anything beyond the truncation order; mixing
    two series keeps the weaker truncation.
    """

    __slots__ = ("lead", "coeffs", "trunc", "ring")

    def __init__(self, lead: int, coeffs: list, trunc: int, ring=RING_Q):
        if lead + len(coeffs) - 1 > trunc:
            coeffs = coeffs[: trunc - lead + 1]
        self.lead = lead
        self.coeffs = list(coeffs)
        self.trunc = trunc
        self.ring = ring

    @classmethod
    def from_dict(cls, d: dict, trunc: int, ring=RING_Q) -> "QSeries":
        if not d:
            return cls(0, [], trunc, ring)
        lead = min(d)
        coeffs = [ring.zero] * (min(max(d), trunc) - lead + 1)
        for n, c in d.items():
            if n <= trunc:
                coeffs[n - lead] = c
        return cls(lead, coeffs, trunc, ring)

    @classmethod
    def one(cls, trunc: int, ring=RING_Q) -> "QSeries":
        return cls(0, [ring.one], trunc, ring)

    def coeff(self, n: int):
        if n > self.trunc:
            raise IndexError(f"coefficient q^{n} beyond truncation {self.trunc}")
        i = n - self.lead
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.ring.zero

    def coeff_dict(self) -> dict:
        return {self.lead + i: c for i, c in enumerate(self.coeffs)
                if not self.ring.is_zero(c)}

    def add(self, other: "QSeries") -> "QSeries":
        ring = self.ring
        trunc = min(self.trunc, other.trunc)
        lead = min(self.lead, other.lead)
        n = max(self.lead + len(self.coeffs), other.lead + len(other.coeffs)) - lead
        out = [ring.zero] * n
        for i, c in enumerate(self.coeffs):
            out[self.lead + i - lead] = c
        for i, c in enumerate(other.coeffs):
            j = other.lead + i - lead
            out[j] = ring.add(out[j], c)
        return QSeries(lead, out, trunc, ring)

    def neg(self) -> "QSeries":
        return QSeries(self.lead, [self.ring.neg(c) for c in self.coeffs],
                       self.trunc, self.ring)

    def sub(self, other: "QSeries") -> "QSeries":
        return self.add(other.neg())

    def mul(self, other: "QSeries") -> "QSeries":
        # (A + O(q^(Ta+1))) * (B + O(q^(Tb+1))) is determined through
        # min(Ta + lead_b, Tb + lead_a): with Laurent leads plain
        # min(Ta, Tb) would overclaim, and with positive leads it would
        # underclaim.
        ring = self.ring
        trunc = min(self.trunc + other.lead, other.trunc + self.lead)
        lead = self.lead + other.lead
        n = min(len(self.coeffs) + len(other.coeffs) - 1, trunc - lead + 1)
        if n <= 0 or not self.coeffs or not other.coeffs:
            return QSeries(0, [], trunc, ring)
        out = [ring.zero] * n
        for i, a in enumerate(self.coeffs):
            if ring.is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                if i + j < n:
                    out[i + j] = ring.add(out[i + j], ring.mul(a, b))
        return QSeries(lead, out, trunc, ring)

    def scale(self, c) -> "QSeries":
        return QSeries(self.lead, [self.ring.mul(c, a) for a in self.coeffs],
                       self.trunc, self.ring)

    def shift(self, k: int) -> "QSeries":
        """Multiply by q**k."""
        return QSeries(self.lead + k, self.coeffs, self.trunc + k, self.ring)

    def substitute_qpow(self, k: int) -> "QSeries":
        """Replace q by q**k (k >= 1)."""
        d = {(self.lead + i) * k: c for i, c in enumerate(self.coeffs)}
        return QSeries.from_dict(d, self.trunc, self.ring)

    def inverse(self) -> "QSeries":
        """Multiplicative inverse; leading coefficient must be a unit.

        Over the rational adapter any nonzero leading coefficient works;
        over 3-adics the leading coefficient must be a unit (the recursion
        divides by it once per term).  The leading exponent shifts absolute
        precision: q**l * g known through q**T determines the inverse
        through q**(T - 2l) -- a loss for poles created (l > 0), a gain
        for poles consumed (l < 0).
        """
        ring = self.ring
        if not self.coeffs or ring.is_zero(self.coeffs[0]):
            raise ZeroDivisionError("series with vanishing leading term")
        a0 = self.coeffs[0]
        if a0 == ring.one:
            def div0(x):
                return x
        elif isinstance(a0, Fraction):
            inv0 = 1 / a0
            def div0(x):
                return x * inv0
        elif isinstance(a0, PadicApprox):
            if a0.known_val() != 0:
                raise ZeroDivisionError("leading coefficient is not a 3-adic unit")
            inv = pow(a0.residue, -1, pow3(a0.cap))
            def div0(x):
                return PadicApprox(x.residue * inv, min(x.prec, a0.prec), a0.cap)
        else:
            raise TypeError("inverse needs rational or 3-adic coefficients")
        res_trunc = self.trunc - 2 * self.lead
        n = res_trunc + self.lead + 1
        out = [ring.zero] * n
        out[0] = div0(ring.one)
        for k in range(1, n):
            acc = ring.zero
            for i in range(1, min(k, len(self.coeffs) - 1) + 1):
                acc = ring.add(acc, ring.mul(self.coeffs[i], out[k - i]))
            out[k] = div0(ring.neg(acc))
        return QSeries(-self.lead, out, res_trunc, ring)

    def div(self, other: "QSeries") -> "QSeries":
        return self.mul(other.inverse())

    def log1(self) -> "QSeries":
        """log of a series with constant term 1 (lead 0).

        Computed by integrating f'/f, so each q**n coefficient costs one
        division by n; over 3-adics those divisions go through
        :meth:`PadicApprox.div_int` and lose precision exactly where
        3 | n.
        """
        ring = self.ring
        if self.lead != 0 or not self.coeffs or self.coeffs[0] != ring.one:
            raise ValueError("log needs constant term 1")
        n = self.trunc + 1
        a = self.coeffs + [ring.zero] * (n - len(self.coeffs))
        out = [ring.zero] * n
        # out[k] solves f' = f * (log f)': k*a[k] = sum_{j<k} (j+1)*... tidied below
        for k in range(1, n):
            acc = ring.mul(a[k], ring.from_int(k))
            for j in range(1, k):
                acc = ring.add(acc, ring.neg(ring.mul(out[j],
                              ring.mul(a[k - j], ring.from_int(j)))))
            out[k] = ring.div_int(acc, k)
        return QSeries(0, out, self.trunc, ring)

    def exp0(self) -> "QSeries":
        """exp of a series with zero constant term (lead >= 1)."""
        ring = self.ring
        if self.lead < 1 and any(not ring.is_zero(c)
                                 for c in self.coeffs[: max(0, 1 - self.lead)]):
            raise ValueError("exp needs vanishing constant term")
        n = self.trunc + 1
        h = [ring.zero] * n
        for i, c in enumerate(self.coeffs):
            if 0 <= self.lead + i < n:
                h[self.lead + i] = c
        out = [ring.zero] * n
        out[0] = ring.one
        for k in range(1, n):
            acc = ring.zero
            for j in range(1, k + 1):
                acc = ring.add(acc, ring.mul(ring.mul(h[j], ring.from_int(j)),
                                             out[k - j]))
            out[k] = ring.div_int(acc, k)
        return QSeries(0, out, self.trunc, ring)

    def pow_int(self, e: int) -> "QSeries":
        if e < 0:
            return self.inverse().pow_int(-e)
        out = QSeries.one(self.trunc, self.ring)
        base = self
        while e:
            if e & 1:
                out = out.mul(base)
            e >>= 1
            if e:
                base = base.mul(base)
        return out

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        trunc = min(self.trunc, other.trunc)
        lo = min(self.lead, other.lead)
        for n in range(lo, trunc + 1):
            if self.coeff(n) != other.coeff(n):
                return False
        return True

    __hash__ = None

    def __repr__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if not self.ring.is_zero(c):
                parts.append(f"{c}*q^{self.lead + i}")
            if len(parts) > 7:
                parts.append("...")
                break
        body = " + ".join(parts) if parts else "0"
        return f"QSeries({body} + O(q^{self.trunc + 1}))"


class BiSeries:
    """Bivariate r,q-expansion with truncation bounds in both variables.

    Sparse storage ``{(m, n): coeff}``; kept indices satisfy
    ``rlow <= m <= M`` and ``qlow <= n <= N``.  Products drop anything
    outside the window, which is the truncation semantics the replication
    identities need (the window always contains every index that can
    influence a kept one).
    """

    __slots__ = ("terms", "M", "N", "rlow", "qlow", "ring")

    def __init__(self, terms: dict, M: int, N: int, rlow: int = -1,
                 qlow: int = -1, ring=RING_Q):
        self.M = M
        self.N = N
        self.rlow = rlow
        self.qlow = qlow
        self.ring = ring
        self.terms = {}
        for (m, n), c in terms.items():
            if rlow <= m <= M and qlow <= n <= N and not ring.is_zero(c):
                self.terms[(m, n)] = c

    @classmethod
    def one(cls, M: int, N: int, ring=RING_Q) -> "BiSeries":
        return cls({(0, 0): ring.one}, M, N, ring=ring)

    def coeff(self, m: int, n: int):
        return self.terms.get((m, n), self.ring.zero)

    def add(self, other: "BiSeries") -> "BiSeries":
        ring = self.ring
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = ring.add(out[k], c) if k in out else c
        return BiSeries(out, min(self.M, other.M), min(self.N, other.N),
                        max(self.rlow, other.rlow), max(self.qlow, other.qlow), ring)

    def neg(self) -> "BiSeries":
        return BiSeries({k: self.ring.neg(c) for k, c in self.terms.items()},
                        self.M, self.N, self.rlow, self.qlow, self.ring)

    def sub(self, other: "BiSeries") -> "BiSeries":
        return self.add(other.neg())

    def mul(self, other: "BiSeries") -> "BiSeries":
        ring = self.ring
        M = min(self.M, other.M)
        N = min(self.N, other.N)
        rlow = max(self.rlow, other.rlow)
        qlow = max(self.qlow, other.qlow)
        out: dict = {}
        for (m1, n1), c1 in self.terms.items():
            for (m2, n2), c2 in other.terms.items():
                m, n = m1 + m2, n1 + n2
                if rlow <= m <= M and qlow <= n <= N:
                    k = (m, n)
                    v = ring.mul(c1, c2)
                    out[k] = ring.add(out[k], v) if k in out else v
        return BiSeries(out, M, N, rlow, qlow, ring)

    def scale(self, c) -> "BiSeries":
        return BiSeries({k: self.ring.mul(c, v) for k, v in self.terms.items()},
                        self.M, self.N, self.rlow, self.qlow, self.ring)

    def r_slice(self, m: int) -> dict:
        """Coefficients {n: c} of r**m."""
        return {n: c for (mm, n), c in self.terms.items() if mm == m}

    def exp_mixed(self) -> "BiSeries":
        """exp of a series supported on m >= 1.

        Since every term raises the r-degree, the exponential is the finite
        sum of powers S**k / k! with k <= M; the only divisions are by the
        factorials.
        """
        ring = self.ring
        if any(m < 1 for (m, _n) in self.terms):
            raise ValueError("exp_mixed needs support in r-degree >= 1")
        out = BiSeries.one(self.M, self.N, ring)
        power = BiSeries.one(self.M, self.N, ring)
        fact = 1
        for k in range(1, self.M + 1):
            power = power.mul(self)
            fact *= k
            if not power.terms:
                break
            out = out.add(BiSeries(
                {key: ring.div_int(c, fact) for key, c in power.terms.items()},
                self.M, self.N, self.rlow, self.qlow, ring))
        return out

    def log_mixed(self) -> "BiSeries":
        """log of 1 + C with C supported on m >= 1 (finite sum, same idea)."""
        ring = self.ring
        c0 = self.coeff(0, 0)
        if not ring.is_zero(ring.add(c0, ring.neg(ring.one))):
            raise ValueError("log_mixed needs constant term 1")
        body = BiSeries({k: v for k, v in self.terms.items() if k != (0, 0)},
                        self.M, self.N, self.rlow, self.qlow, ring)
        if any(m < 1 for (m, _n) in body.terms):
            raise ValueError("log_mixed needs support in r-degree >= 1")
        out = BiSeries({}, self.M, self.N, self.rlow, self.qlow, ring)
        power = BiSeries.one(self.M, self.N, ring)
        for k in range(1, self.M + 1):
            power = power.mul(body)
            if not power.terms:
                break
            sign = 1 if k % 2 == 1 else -1
            out = out.add(BiSeries(
                {key: ring.div_int(c, sign * k) for key, c in power.terms.items()},
                self.M, self.N, self.rlow, self.qlow, ring))
        return out


def binom_int(e: int, k: int) -> int:
    """Binomial coefficient C(e, k) for integer e of either sign, k >= 0."""
    if k < 0:
        return 0
    if e >= 0:
        return comb(e, k)
    return (-1) ** k * comb(-e + k - 1, k)


def product_from_exponents(minus_exp, plus_exp, M: int, N: int,
                           ring=RING_Q) -> "BiSeries":
    """Expand ``r**-1 * prod (1 - r^m q^n)^e1(m,n) * (1 + r^m q^n)^e2(m,n)``.

    ``minus_exp`` and ``plus_exp`` map ``(m, n)`` to integer exponents; only
    keys with ``m >= 1`` participate, and absent keys mean exponent zero
    (factors whose exponent would index a vanishing coefficient are simply
    absent).  ``n`` may be negative.  The result is truncated to
    ``m <= M``, ``n <= N`` with ``m, n >= -1``.

    Truncation care: a factor with negative q-degree lets high-q terms fall
    back into the window, so intermediates keep ``slack`` extra q-digits
    (the total q-degree the negative factors can ever subtract) before the
    final clip.  The r-degree only ever increases past the r**-1 prefactor,
    so factor terms up to r-degree M+1 matter and nothing beyond.
    """
    factors = []
    for (m, n), e in minus_exp.items():
        if e and m >= 1:
            factors.append((m, n, e, -1))
    for (m, n), e in plus_exp.items():
        if e and m >= 1:
            factors.append((m, n, e, +1))
    factors.sort(key=lambda t: (t[1] >= 0, t[0], t[1], t[3]))
    slack = 0
    for m, n, e, _sign in factors:
        if n < 0:
            kmax = (M + 1) // m
            if e >= 0:
                kmax = min(kmax, e)
            slack += kmax * (-n)
    qlow = -max(slack, 1)
    out = BiSeries({(-1, 0): ring.one}, M, N + slack, rlow=-1, qlow=qlow,
                   ring=ring)
    for m, n, e, sign in factors:
        kmax = (M + 1) // m
        terms = {(0, 0): ring.one}
        for k in range(1, kmax + 1):
            coeff = binom_int(e, k)
            if sign < 0:
                coeff *= (-1) ** k
            if coeff:
                terms[(k * m, k * n)] = ring.from_int(coeff)
        out = out.mul(BiSeries(terms, M + 1, N + slack, rlow=-1, qlow=qlow,
                               ring=ring))
    return BiSeries(out.terms, M, N, rlow=-1, qlow=-1, ring=ring)
