"""Reference harness: random 3-adic expression trees vs exact integers.

Builds random expression trees whose leaves are exact integers, evaluates
them twice -- once over plain Python integers, once over
:class:`moonsieve.series.PadicApprox` leaves deliberately polluted with
garbage above their stated precision -- and checks the approximate result
agrees with the exact one modulo ``3**prec`` of the output.  This is the
soundness contract the sieve relies on: no operation may ever claim a
digit it does not actually determine.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from moonsieve.series import CAP_DEFAULT, PadicApprox, pow3


@dataclass
class TreeStats:
    trees: int = 0
    ops: int = 0
    zero_prec_results: int = 0


def _random_leaf(rng: random.Random, cap: int):
    value = rng.randint(-3 ** 12, 3 ** 12)
    if rng.random() < 0.25:
        value *= 3 ** rng.randint(1, 6)
    prec = rng.randint(0, cap)
    garbage = rng.randint(0, 3 ** 6)
    residue = value + pow3(prec) * garbage
    return value, PadicApprox(residue, prec, cap)


def _random_tree(rng: random.Random, depth: int, cap: int, stats: TreeStats):
    """Returns (exact int value, PadicApprox)."""
    if depth == 0 or rng.random() < 0.25:
        return _random_leaf(rng, cap)
    op = rng.choice(["add", "sub", "mul", "mul_int", "pow", "div3", "div_int"])
    stats.ops += 1
    if op in ("add", "sub", "mul"):
        v1, a1 = _random_tree(rng, depth - 1, cap, stats)
        v2, a2 = _random_tree(rng, depth - 1, cap, stats)
        if op == "add":
            return v1 + v2, a1.add(a2)
        if op == "sub":
            return v1 - v2, a1.sub(a2)
        return v1 * v2, a1.mul(a2)
    if op == "mul_int":
        v, a = _random_tree(rng, depth - 1, cap, stats)
        k = rng.randint(-50, 50) * 3 ** rng.randint(0, 3)
        return v * k, a.mul_int(k)
    if op == "pow":
        v, a = _random_tree(rng, depth - 1, cap, stats)
        e = rng.choice([0, 1, 2, 3, 3, 6, 9])
        return v ** e, a.pow_sharp(e)
    if op == "div3":
        v, a = _random_tree(rng, depth - 1, cap, stats)
        if v % 3 != 0:
            v *= 3
            a = a.mul_int(3)
        return v // 3, a.div3()
    # div_int by d = 3**k * unit, forcing exact divisibility of the value
    v, a = _random_tree(rng, depth - 1, cap, stats)
    k = rng.randint(0, 2)
    u = rng.choice([1, -1, 2, 4, 5, -7, 8])
    d = 3 ** k * u
    v *= d
    a = a.mul_int(d)
    return v // d, a.div_int(d)


def run_random_trees(n_trees: int, seed: int = 0, depth: int = 5,
                     cap: int = CAP_DEFAULT) -> TreeStats:
    """Raises AssertionError on any soundness violation."""
    rng = random.Random(seed)
    stats = TreeStats()
    for _ in range(n_trees):
        stats.trees += 1
        v, a = _random_tree(rng, depth, cap, stats)
        assert a.prec >= 0
        if a.prec == 0:
            stats.zero_prec_results += 1
        assert a.agrees_with_int(v), (
            f"unsound: exact {v} != residue {a.residue} mod 3^{a.prec}")
    return stats
