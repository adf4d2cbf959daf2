"""Branch-and-prune over 3-adic digits of the seed coefficients.

For each supported prime the unknowns are c(1), c(2), c(4), c(5) of a
candidate series paired against the known class coefficients.  Digits
are fixed level by level; at each level every candidate runs one
constraint propagation pass, and any inconsistency (including a failed
division by 3) removes the branch.  What survives to the requested
depth is the survivor table; the inequality filter then isolates the
true class among the survivors at full depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import haupt
from .replicate import InconsistentError, extend_cminus, propagate_padic
from .series import CAP_DEFAULT, PadicDivisionError, pow3

SUPPORTED_PRIMES = (13, 17, 19, 23, 29, 31, 41, 47, 59, 71)

DEPTH_DEFAULT = 29
BOUNDS_DEFAULT = (4, 16)
PREFILTER_NMAX = 8
CAP_SLACK = 8
MAX_DEPTH = CAP_DEFAULT - CAP_SLACK
FILTER_MIN_DEPTH = 26
CPLUS_TERMS = 75

PRUNE_EXCEPTIONS = (InconsistentError, PadicDivisionError)

CAVEAT_13 = ("order-13 caveat: the survivor is unique among candidates whose "
             "coefficients lie below 3^10; 3-adic solutions with larger "
             "representatives are not excluded by this search")


@dataclass(frozen=True)
class SieveNode:
    """One live branch: four seed residues known modulo 3**level."""

    p: int
    level: int
    residues: Tuple[int, int, int, int]

    def __post_init__(self):
        bound = pow3(self.level)
        if not all(0 <= r < bound for r in self.residues):
            raise ValueError(
                f"residues {self.residues} out of range for level {self.level}")


@dataclass(frozen=True)
class Survivor:
    """A branch alive at full depth, optionally matched to a class row."""

    p: int
    depth: int
    residues: Tuple[int, int, int, int]
    label: Optional[str] = None


def class_cplus(p: int, seeds: Optional[List[haupt.HauptSeed]] = None,
                terms: int = CPLUS_TERMS) -> Dict[int, int]:
    """Extended c^+ table of the order-p class the sieve pairs against."""
    return haupt.class_coeffs(f"{p}A", terms, seeds)


def _check_node(p: int, residues: Tuple[int, int, int, int], level: int,
                cplus: Dict[int, int], bounds: Tuple[int, int]) -> bool:
    """True when the residues survive constraint propagation.

    A cheap narrow window runs first; only candidates it cannot refute
    pay for the full window.  The narrow window's constraints are a
    subset of the full window's, so the staging never changes which
    candidates survive.
    """
    columns, n_max = bounds
    cap = level + CAP_SLACK
    try:
        if PREFILTER_NMAX < n_max:
            propagate_padic(p, residues, level, cplus,
                            columns=columns, n_max=PREFILTER_NMAX, cap=cap)
        propagate_padic(p, residues, level, cplus,
                        columns=columns, n_max=n_max, cap=cap)
        return True
    except PRUNE_EXCEPTIONS:
        return False


def run(p: int, depth: int, bounds: Tuple[int, int] = BOUNDS_DEFAULT, *,
        start: Optional[Sequence[SieveNode]] = None,
        cplus: Optional[Dict[int, int]] = None,
        seeds: Optional[List[haupt.HauptSeed]] = None,
        observer: Optional[Callable[[int, List[SieveNode]], None]] = None
        ) -> List[Survivor]:
    """Breadth-first sieve to the requested depth.

    ``start`` resumes from an earlier run's surviving nodes (all at one
    level); otherwise the search begins with the 81 digit choices at
    level 1.  ``observer`` sees each level's surviving nodes as they
    are found.
    """
    if p not in SUPPORTED_PRIMES:
        raise ValueError(f"unsupported prime {p}")
    if depth < 1 or depth > MAX_DEPTH:
        raise ValueError(f"depth must lie in [1, {MAX_DEPTH}]")
    if cplus is None:
        cplus = class_cplus(p, seeds)
    if start:
        levels = {node.level for node in start}
        if len(levels) != 1:
            raise ValueError("start nodes must share one level")
        start_level = levels.pop()
        if start_level > depth:
            raise ValueError("start nodes are already deeper than depth")
        if any(node.p != p for node in start):
            raise ValueError("start nodes belong to a different prime")
        frontier = [node.residues for node in sorted(start, key=lambda s: s.residues)]
    else:
        start_level = 0
        frontier = [(0, 0, 0, 0)]
    for level in range(start_level + 1, depth + 1):
        step = pow3(level - 1)
        survivors: List[Tuple[int, int, int, int]] = []
        for node in frontier:
            for digits in product(range(3), repeat=4):
                child = tuple(node[i] + digits[i] * step for i in range(4))
                if _check_node(p, child, level, cplus, bounds):
                    survivors.append(child)
        frontier = sorted(survivors)
        if observer is not None:
            observer(level, [SieveNode(p, level, r) for r in frontier])
    return [Survivor(p, depth, r) for r in frontier]


def attach_labels(survivors: Sequence[Survivor],
                  seeds: Optional[List[haupt.HauptSeed]] = None) -> List[Survivor]:
    """Match survivors against the seed table modulo 3**depth."""
    table = seeds if seeds is not None else haupt.load_default_seeds()
    out = []
    for s in survivors:
        bound = pow3(s.depth)
        label = None
        for row in table:
            if row.p != s.p:
                continue
            expected = tuple(row.coeffs[n] % bound for n in (1, 2, 4, 5))
            if expected == s.residues:
                label = row.label
                break
        out.append(replace(s, label=label))
    return out


def true_branch_ok(p: int, depth: int,
                   bounds: Tuple[int, int] = BOUNDS_DEFAULT,
                   seeds: Optional[List[haupt.HauptSeed]] = None) -> bool:
    """Propagate the known class residues at every level; all must pass.

    This is the soundness trace: the true solution may never be pruned,
    at any level, for any supported prime.
    """
    cplus = class_cplus(p, seeds)
    row = haupt.seed_by_label(f"{p}A", seeds)
    full = tuple(row.coeffs[n] for n in (1, 2, 4, 5))
    columns, n_max = bounds
    for level in range(1, depth + 1):
        bound = pow3(level)
        residues = tuple(v % bound for v in full)
        try:
            propagate_padic(p, residues, level, cplus,
                            columns=columns, n_max=n_max,
                            cap=level + CAP_SLACK)
        except PRUNE_EXCEPTIONS:
            return False
    return True


def filter_inequalities(survivors: Sequence[Survivor],
                        cplus_seed: haupt.HauptSeed,
                        j_series) -> List[Survivor]:
    """Keep survivors whose least nonnegative representatives pass the
    parity and growth conditions against the class and the elliptic
    modular function coefficients.

    Needs depth >= 26 so that representatives below the modulus
    separate: candidate values at the checked indices fit under the
    modulus, making the representative the only integer candidate.
    """
    kept = []
    for s in survivors:
        if s.depth < FILTER_MIN_DEPTH:
            raise ValueError(
                f"inequality filter needs depth >= {FILTER_MIN_DEPTH}; "
                f"got {s.depth}")
        p = s.p
        ok = True
        for r, n in zip(s.residues, (1, 2, 4, 5)):
            cp = cplus_seed.coeffs[n]
            c1 = int(j_series.coeff(n))
            if (r - cp) % 2 != 0:
                ok = False
                break
            if r < abs(cp):
                ok = False
                break
            if (p - 2) * cp + p * r > 2 * c1:
                ok = False
                break
        if ok:
            kept.append(s)
    return kept


@dataclass
class Verdict:
    """Outcome of the full pipeline for one prime."""

    p: int
    verdict: str
    depth: int
    survivors: List[Survivor]
    filtered: List[Survivor]
    extension_checked: bool = False
    note: Optional[str] = None
    diagnostics: List[str] = field(default_factory=list)


def conclude(p: int, depth: int = DEPTH_DEFAULT,
             bounds: Tuple[int, int] = BOUNDS_DEFAULT, *,
             seeds: Optional[List[haupt.HauptSeed]] = None,
             cplus: Optional[Dict[int, int]] = None,
             survivors: Optional[List[Survivor]] = None) -> Verdict:
    """Full pipeline for one prime: sieve, filter, uniqueness check.

    The verdict is H1_vanishes when the filtered survivor is unique,
    equals the class seeds, and the candidate extension from those
    seeds agrees with the class coefficients on the whole checked
    range; anything else is inconclusive with diagnostics.
    """
    if p not in SUPPORTED_PRIMES:
        raise ValueError(f"unsupported prime {p}")
    if depth < FILTER_MIN_DEPTH:
        raise ValueError(
            f"conclude needs depth >= {FILTER_MIN_DEPTH}; got {depth}")
    seed_rows = seeds if seeds is not None else haupt.load_default_seeds()
    row = haupt.seed_by_label(f"{p}A", seed_rows)
    if cplus is None:
        cplus = class_cplus(p, seed_rows)
    diagnostics: List[str] = []
    if survivors is None:
        survivors = run(p, depth, bounds, cplus=cplus, seeds=seed_rows)
    survivors = attach_labels(survivors, seed_rows)
    filtered = filter_inequalities(survivors, row, haupt.j_coefficients(5))
    expected = tuple(row.coeffs[n] % pow3(depth) for n in (1, 2, 4, 5))
    verdict = "H1_vanishes"
    if len(filtered) != 1:
        verdict = "inconclusive"
        diagnostics.append(
            f"expected a unique filtered survivor, found {len(filtered)}")
    elif filtered[0].residues != expected:
        verdict = "inconclusive"
        diagnostics.append(
            f"filtered survivor {filtered[0].residues} differs from the "
            f"class seeds {expected}")
    extension_checked = False
    if verdict == "H1_vanishes":
        seeds4 = tuple(row.coeffs[n] for n in (1, 2, 4, 5))
        try:
            ext = extend_cminus(seeds4, cplus, p, 45)
            mismatch = [n for n in range(1, 46)
                        if int(ext.coeff(n)) != cplus[n]]
            if mismatch:
                verdict = "inconclusive"
                diagnostics.append(
                    f"candidate extension deviates from the class "
                    f"coefficients at n={mismatch[0]}")
            else:
                extension_checked = True
        except PRUNE_EXCEPTIONS as exc:
            verdict = "inconclusive"
            diagnostics.append(f"candidate extension failed: {exc}")
    note = CAVEAT_13 if p == 13 else None
    return Verdict(p=p, verdict=verdict, depth=depth, survivors=survivors,
                   filtered=filtered, extension_checked=extension_checked,
                   note=note, diagnostics=diagnostics)


def run_all(depth: int, bounds: Tuple[int, int] = BOUNDS_DEFAULT, *,
            seeds: Optional[List[haupt.HauptSeed]] = None,
            primes: Sequence[int] = SUPPORTED_PRIMES,
            observer: Optional[Callable[[int, int, List[SieveNode]], None]] = None
            ) -> Dict[int, List[Survivor]]:
    """Sieve every requested prime; survivors keyed by prime."""
    out: Dict[int, List[Survivor]] = {}
    for p in sorted(primes):
        per_prime = (lambda level, nodes, _p=p: observer(_p, level, nodes)) \
            if observer is not None else None
        out[p] = attach_labels(run(p, depth, bounds, seeds=seeds,
                                   observer=per_prime), seeds)
    return out
