from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from moonsieve.series import (
    BiSeries,
    PadicApprox,
    PadicDivisionError,
    QSeries,
    RingZ3,
    binom_int,
    pow3,
    product_from_exponents,
    val3,
)
from padic_reference import run_random_trees


def qs(d, trunc):
    return QSeries.from_dict({k: Fraction(v) for k, v in d.items()}, trunc)


class TestVal3:
    def test_basic(self):
        assert val3(9) == 2
        assert val3(-27) == 3
        assert val3(5) == 0

    def test_zero_raises(self):
        with pytest.raises(ValueError):
            val3(0)


class TestPadicApprox:
    def test_add_min_prec(self):
        x = PadicApprox(7, 5)
        y = PadicApprox(2, 3)
        assert x.add(y).prec == 3
        assert x.add(y).agrees_with_int(9)

    def test_mul_gains_from_valuation(self):
        # x known mod 3^4 with val 0, y = 9*unit known mod 3^6:
        # product determined mod 3^min(4+2, 6+0) = 3^6
        x = PadicApprox(5, 4)
        y = PadicApprox(9 * 2, 6)
        assert x.mul(y).prec == 6

    def test_mul_unknown_val_is_conservative(self):
        # y = 0 mod 3^2 at prec 2: valuation only bounded below by 2, so
        # the product is determined mod 3^min(4+2, 2+0) = 3^2 and no more
        x = PadicApprox(5, 4)
        y = PadicApprox(0, 2)
        z = x.mul(y)
        assert z.prec == 2
        assert z.agrees_with_int(0)
        assert z.agrees_with_int(45)  # 5 * 9: also consistent mod 3^2

    def test_pow_sharp_exact_val(self):
        # val exactly 1, prec 2: cube determined mod 3^(2+1+2)=3^5
        z = PadicApprox(3, 2)
        assert z.pow_sharp(3).prec == 5
        assert z.pow_sharp(3).agrees_with_int(27)

    def test_pow_sharp_cube_then_div27_costs_nothing(self):
        # (3u)^3/27 = u^3: three div3 steps against prec 5 leaves prec 2
        z = PadicApprox(3 + 9 * 5, 2)  # true value 3 mod 9, residue padded
        out = z.pow_sharp(3).div3().div3().div3()
        assert out.prec == 2
        assert out.agrees_with_int(1)

    def test_pow_sharp_hidden_val_is_blunt(self):
        # x = 0 mod 3^2 at prec 2 could be 9u: x^3 = 729 u^3 known mod 3^6 only
        z = PadicApprox(0, 2)
        assert z.pow_sharp(3).prec == 6

    def test_div3_visible_nondivisibility_raises(self):
        with pytest.raises(PadicDivisionError):
            PadicApprox(5, 3).div3()

    def test_div3_at_zero_prec_is_unknown(self):
        out = PadicApprox(5, 0).div3()
        assert out.prec == 0

    def test_div_int_mixed(self):
        x = PadicApprox(90, 8)
        out = x.div_int(18)  # 18 = 2 * 3^2
        assert out.agrees_with_int(5)
        assert out.prec == 6

    def test_div_unit_preserves_precision(self):
        x = PadicApprox(10, 7)
        assert x.div_unit(5).prec == 7
        assert x.div_unit(5).agrees_with_int(2)

    def test_unknown(self):
        u = PadicApprox.unknown()
        assert u.prec == 0
        assert u.agrees_with_int(123456)


class TestRandomTreeSoundness:
    def test_thousand_trees(self):
        stats = run_random_trees(1000, seed=17)
        assert stats.trees == 1000

    @given(st.integers(min_value=0, max_value=2 ** 31))
    @settings(max_examples=30, deadline=None)
    def test_any_seed(self, seed):
        run_random_trees(20, seed=seed)


class TestQSeries:
    def test_geometric_inverse(self):
        f = qs({0: 1, 1: -1}, 12)
        g = f.inverse()
        assert [g.coeff(n) for n in range(13)] == [1] * 13

    def test_inverse_roundtrip(self):
        f = qs({0: 1, 1: 4, 2: -3, 5: 7}, 15)
        prod = f.mul(f.inverse())
        assert prod.coeff(0) == 1
        assert all(prod.coeff(n) == 0 for n in range(1, 16))

    def test_positive_lead_inverse_loses_order(self):
        f = qs({1: 1, 2: 1}, 10)
        g = f.inverse()
        assert g.lead == -1
        assert g.trunc == 8
        prod = f.mul(g)
        assert prod.coeff(0) == 1

    def test_log_exp_roundtrip(self):
        h = qs({1: 2, 2: -1, 4: 9}, 14)
        assert h.exp0().log1() == h

    def test_exp_log_known_series(self):
        # exp(q) coefficients 1/n!
        h = qs({1: 1}, 8)
        e = h.exp0()
        import math
        for n in range(9):
            assert e.coeff(n) == Fraction(1, math.factorial(n))

    def test_log_of_inverse_eta_factor(self):
        # -log(1 - q) = sum q^n / n
        f = qs({0: 1, 1: -1}, 10)
        lg = f.log1()
        for n in range(1, 11):
            assert lg.coeff(n) == Fraction(-1, n)

    def test_substitute_qpow(self):
        f = qs({1: 3, 2: -1}, 10)
        g = f.substitute_qpow(3)
        assert g.coeff(3) == 3 and g.coeff(6) == -1 and g.coeff(2) == 0

    def test_pow_int_matches_repeated_mul(self):
        f = qs({0: 1, 1: 2, 3: -1}, 10)
        direct = f.mul(f).mul(f).mul(f).mul(f)
        assert f.pow_int(5) == direct

    def test_pow_int_negative(self):
        f = qs({0: 1, 1: 1}, 10)
        assert f.pow_int(-1) == f.inverse()

    def test_laurent_shift(self):
        f = qs({0: 1, 1: 5}, 6).shift(-1)
        assert f.coeff(-1) == 1 and f.coeff(0) == 5

    def test_coeff_beyond_trunc_raises(self):
        f = qs({0: 1}, 4)
        with pytest.raises(IndexError):
            f.coeff(5)

    def test_z3_coefficients(self):
        rz = RingZ3(10)
        f = QSeries.from_dict({0: rz.from_int(1), 1: rz.from_int(-3)}, 6, ring=rz)
        g = f.inverse()
        for n in range(7):
            assert g.coeff(n).agrees_with_int(3 ** n)


@st.composite
def small_qseries(draw):
    trunc = draw(st.integers(min_value=3, max_value=8))
    n_terms = draw(st.integers(min_value=0, max_value=5))
    d = {}
    for _ in range(n_terms):
        k = draw(st.integers(min_value=-2, max_value=trunc))
        d[k] = Fraction(draw(st.integers(min_value=-9, max_value=9)),
                        draw(st.integers(min_value=1, max_value=4)))
    return QSeries.from_dict(d, trunc)


class TestQSeriesProperties:
    @given(small_qseries(), small_qseries(), small_qseries())
    @settings(max_examples=60, deadline=None)
    def test_mul_distributes(self, a, b, c):
        lhs = a.mul(b.add(c))
        rhs = a.mul(b).add(a.mul(c))
        assert lhs == rhs

    @given(small_qseries(), small_qseries())
    @settings(max_examples=60, deadline=None)
    def test_mul_commutes(self, a, b):
        assert a.mul(b) == b.mul(a)


class TestBiSeries:
    def test_mul_window(self):
        a = BiSeries({(1, 1): Fraction(1), (2, 3): Fraction(2)}, 4, 6)
        b = BiSeries({(0, 0): Fraction(1), (1, 2): Fraction(-1)}, 4, 6)
        c = a.mul(b)
        assert c.coeff(1, 1) == 1
        assert c.coeff(2, 3) == 2 - 1  # (2,3) direct and (1,1)*(1,2)
        assert c.coeff(3, 5) == -2

    def test_exp_log_roundtrip(self):
        s = BiSeries({(1, 0): Fraction(1), (1, 2): Fraction(-2),
                      (2, 1): Fraction(7), (3, 3): Fraction(1, 2)}, 5, 6)
        assert s.exp_mixed().log_mixed().terms == s.terms

    def test_exp_of_single_term(self):
        # exp(c * r q) has r^k q^k coefficient c^k/k!
        s = BiSeries({(1, 1): Fraction(3)}, 4, 6)
        e = s.exp_mixed()
        assert e.coeff(2, 2) == Fraction(9, 2)
        assert e.coeff(3, 3) == Fraction(27, 6)

    def test_exp_needs_positive_r_degree(self):
        s = BiSeries({(0, 1): Fraction(1)}, 3, 3)
        with pytest.raises(ValueError):
            s.exp_mixed()


class TestProductFromExponents:
    def test_prefactor_and_pole(self):
        out = product_from_exponents({(1, -1): 1}, {}, 5, 8)
        assert out.coeff(-1, 0) == 1
        assert out.coeff(0, -1) == -1
        assert all(c == 0 for k, c in out.terms.items() if k not in
                   {(-1, 0), (0, -1)})

    def test_binom_int_negative_exponent(self):
        assert binom_int(-1, 3) == -1
        assert binom_int(-2, 2) == 3
        assert binom_int(3, 5) == 0

    def test_negative_exponent_factor(self):
        # r^-1 / (1 - r q): r-slice m has q^(m+1) coefficient 1
        out = product_from_exponents({(1, 1): -1}, {}, 4, 8)
        for m in range(-1, 5):
            assert out.coeff(m, m + 1) == 1

    def test_matches_direct_expansion(self):
        # dual route: same product built by explicit BiSeries multiplication
        # over a generous window, then clipped
        minus = {(1, -1): 1, (1, 1): 5, (1, 2): -3, (2, 1): 2}
        plus = {(1, 1): 2, (2, 2): -1}
        M, N = 4, 7
        out = product_from_exponents(minus, plus, M, N)

        big_M, big_N = 9, 20
        acc = BiSeries({(-1, 0): Fraction(1)}, big_M, big_N, rlow=-1,
                       qlow=-big_M)
        for (m, n), e, sign in (
            [(k, e, -1) for k, e in minus.items()]
            + [(k, e, +1) for k, e in plus.items()]
        ):
            terms = {(0, 0): Fraction(1)}
            for k in range(1, big_M // m + 2):
                c = binom_int(e, k) * ((-1) ** k if sign < 0 else 1)
                terms[(k * m, k * n)] = Fraction(c)
            acc = acc.mul(BiSeries(terms, big_M, big_N, rlow=-1, qlow=-big_M))
        for m in range(-1, M + 1):
            for n in range(-1, N + 1):
                assert out.coeff(m, n) == acc.coeff(m, n), (m, n)

    def test_high_q_terms_survive_negative_factor(self):
        # a factor at q-degree N+1 must still reach the window through the
        # (1, -1) factor regardless of multiplication order
        N = 5
        out = product_from_exponents({(1, -1): 1, (1, N + 1): 1}, {}, 3, N)
        # r^-1 * (-r q^-1) * (-r q^(N+1)) = r q^N
        assert out.coeff(1, N) == 1
