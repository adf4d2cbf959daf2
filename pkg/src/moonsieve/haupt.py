"""Hauptmodul coefficient providers.

Three services live here: exact q-expansion of the elliptic modular
function built from Eisenstein series, the seed table of genus-zero
class coefficients shipped with the package, and extension of a
prime-order class from its first five coefficients by constraint
propagation on the self-pair product identity.  Extensions are
verified against an independent re-expansion of the product before
they are returned.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Optional

from .replicate import extend_self
from .series import QSeries, RING_Q, binom_int

CACHE_ENV = "MOONSIEVE_CACHE"

_SEED_INDICES = (-1, 1, 2, 3, 4, 5)


@dataclass
class HauptSeed:
    """One class row: label, order, and the coefficients through q^5."""

    label: str
    p: int
    coeffs: Dict[int, int]
    extended: Optional[QSeries] = None

    def __post_init__(self):
        if self.coeffs.get(-1) != 1:
            raise ValueError(f"class {self.label}: leading coefficient must be 1")
        if 0 in self.coeffs and self.coeffs[0] != 0:
            raise ValueError(f"class {self.label}: constant term must vanish")

    def seed_tuple(self) -> tuple:
        return tuple(self.coeffs[n] for n in (1, 2, 3, 4, 5))


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# The elliptic modular function.


def _sigma(k: int, n: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def j_coefficients(terms: int) -> QSeries:
    """q-expansion q^-1 + 0 + c(1)q + ... of the normalized elliptic
    modular function, to q^terms.

    Route: E4 and E6 from divisor sums, the discriminant form as
    (E4^3 - E6^2)/1728, then the quotient E4^3 over it, minus the
    constant 744.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    t = terms + 3
    e4 = QSeries.from_dict(
        {0: Fraction(1), **{n: Fraction(240 * _sigma(3, n)) for n in range(1, t + 1)}},
        t)
    e6 = QSeries.from_dict(
        {0: Fraction(1), **{n: Fraction(-504 * _sigma(5, n)) for n in range(1, t + 1)}},
        t)
    e4cube = e4.pow_int(3)
    disc = e4cube.sub(e6.pow_int(2)).scale(Fraction(1, 1728))
    disc = QSeries.from_dict(disc.coeff_dict(), disc.trunc)
    jfull = e4cube.div(disc)
    out = {}
    for n in range(-1, terms + 1):
        c = jfull.coeff(n) - (744 if n == 0 else 0)
        frac = Fraction(c)
        if frac.denominator != 1:
            raise ArithmeticError(f"non-integer coefficient at q^{n}: {c}")
        out[n] = int(frac)
    if out[-1] != 1 or out[0] != 0:
        raise ArithmeticError("normalization failed")
    return QSeries.from_dict(out, terms)


# ---------------------------------------------------------------------------
# Seed data.


def default_seed_path() -> str:
    return str(resources.files("moonsieve").joinpath("data/seeds.tsv"))


def load_seeds(path) -> List[HauptSeed]:
    """Parse a seed file: one row per class,
    label<TAB>p<TAB>c(-1),c(1),c(2),c(3),c(4),c(5).
    """
    seeds = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(
                    f"{path}:{lineno}: expected label, order, coefficients "
                    f"separated by tabs; got {len(parts)} field(s)")
            label, p_text, c_text = (s.strip() for s in parts)
            try:
                p = int(p_text)
                values = [int(s) for s in c_text.split(",")]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed integer") from None
            if len(values) != 6:
                raise ValueError(
                    f"{path}:{lineno}: expected 6 coefficients, got {len(values)}")
            if values[0] != 1:
                raise ValueError(
                    f"{path}:{lineno}: leading coefficient must be 1")
            coeffs = dict(zip(_SEED_INDICES, values))
            seeds.append(HauptSeed(label=label, p=p, coeffs=coeffs))
    return seeds


_DEFAULT_SEEDS: Optional[List[HauptSeed]] = None


def load_default_seeds() -> List[HauptSeed]:
    global _DEFAULT_SEEDS
    if _DEFAULT_SEEDS is None:
        _DEFAULT_SEEDS = load_seeds(default_seed_path())
    return list(_DEFAULT_SEEDS)


def seed_by_label(label: str, seeds: Optional[List[HauptSeed]] = None) -> HauptSeed:
    for s in seeds if seeds is not None else load_default_seeds():
        if s.label == label:
            return s
    raise KeyError(f"no class labeled {label!r} in the seed table")


# ---------------------------------------------------------------------------
# Extension of prime-order classes.


def _verify_self_product(table: Dict[int, int], p: int, terms: int) -> None:
    """Re-expand the self-pair product from the extended coefficients
    and check it against the two-variable identity it must satisfy.

    The factor at (1, -1) turns the r^-1 prefactor into r^-1 - q^-1,
    so the check is the difference form: the (m+1, n) coefficient of
    the plain m, n >= 1 product minus its (m, n+1) coefficient must
    give the pure r-side and q-side coefficients and nothing else.
    For orders p >= 7 the folded factors sit outside any window we can
    afford, so they do not contribute here.
    """
    ncols = 4
    nq = terms // (ncols + 1)
    if nq < 1:
        return
    prod: Dict[tuple, int] = {(0, 0): 1}
    for m in range(1, ncols + 2):
        for n in range(1, nq + 1):
            e = table[m * n]
            if e == 0:
                continue
            factor = {(0, 0): 1}
            k = 1
            while k * m <= ncols + 1 and k * n <= nq:
                factor[(k * m, k * n)] = (-1) ** k * binom_int(e, k)
                k += 1
            nxt: Dict[tuple, int] = {}
            for (a, b), ca in prod.items():
                for (x, y), cf in factor.items():
                    key = (a + x, b + y)
                    if key[0] <= ncols + 1 and key[1] <= nq:
                        nxt[key] = nxt.get(key, 0) + ca * cf
            prod = nxt
    for a in range(0, ncols + 1):
        for b in range(0, nq):
            got = prod.get((a + 1, b), 0) - prod.get((a, b + 1), 0)
            if b == 0 and a >= 1:
                want = table[a]
            elif a == 0 and b >= 1:
                want = -table[b]
            else:
                want = 0
            if got != want:
                raise ArithmeticError(
                    f"extension failed re-expansion at r^{a} q^{b}: "
                    f"got {got}, expected {want}")


def extend_class(seed: HauptSeed, p: int, terms: int,
                 emit_order: str = "forward") -> QSeries:
    """Extend a prime-order class from its five seeds to q^terms.

    The coefficients are forced by the vanishing cross-coefficients of
    the self-pair product; the propagation engine recovers them and the
    result is independently re-expanded as a check.
    """
    if p != seed.p:
        raise ValueError(f"class {seed.label} has order {seed.p}, not {p}")
    if not _is_prime(p):
        raise ValueError(
            f"class {seed.label} has composite order {p}; only the shipped "
            f"coefficients are available")
    if terms < 5:
        raise ValueError("terms must be >= 5")
    seeds5 = {n: seed.coeffs[n] for n in (1, 2, 3, 4, 5)}
    table = extend_self(seeds5, p, terms, emit_order=emit_order)
    _verify_self_product(table, p, terms)
    return QSeries.from_dict(table, terms)


# ---------------------------------------------------------------------------
# Cached coefficient tables.


def _cache_filename(label: str, terms: int) -> str:
    safe = re.sub(r"[^A-Za-z0-9+]+", "_", label)
    return f"haupt-{safe}-{terms}.json"


def class_coeffs(label: str, terms: int,
                 seeds: Optional[List[HauptSeed]] = None) -> Dict[int, int]:
    """Extended coefficient table {-1: 1, 1: c(1), ...} for a
    prime-order class, cached on disk when MOONSIEVE_CACHE is set.
    """
    seed = seed_by_label(label, seeds)
    if terms <= 5:
        return {n: seed.coeffs[n] for n in _SEED_INDICES if n <= terms or n == -1}
    cache_dir = os.environ.get(CACHE_ENV)
    path = None
    if cache_dir:
        path = os.path.join(cache_dir, _cache_filename(label, terms))
        try:
            with open(path, encoding="utf-8") as fh:
                blob = json.load(fh)
            if blob.get("label") == label and blob.get("terms") == terms:
                return {int(k): int(v) for k, v in blob["coeffs"].items()}
        except (OSError, ValueError, KeyError):
            pass
    series = extend_class(seed, seed.p, terms)
    table = {n: int(series.coeff(n)) for n in range(-1, terms + 1)
             if n == -1 or (n >= 1 and series.coeff(n) != 0)}
    for n in range(1, terms + 1):
        table.setdefault(n, 0)
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        blob = {"label": label, "terms": terms,
                "coeffs": {str(k): str(v) for k, v in table.items()}}
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(blob, fh, sort_keys=True)
        os.replace(tmp, path)
    return table
