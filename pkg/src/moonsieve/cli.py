"""Command line front end: argument parsing, dispatch, report emission.

Subcommands wrap the library modules one-to-one.  Reports are plain
TSV by default or versioned JSON with every number rendered as a
decimal string; identical inputs must produce byte-identical output,
so reports carry no timing or host information.

Exit codes: 0 success, 1 computational inconsistency (mismatched
survivor table, non-vanishing verdict, violated identities), 2 usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

from . import haupt, kring, lattice, supersplit
from . import sieve as sieve_mod
from .replicate import ReplicateError, check_solution, extend_cminus
from .series import QSeries, pow3

SCHEMA = "moonsieve-report/1"

EXIT_OK = 0
EXIT_INCONSISTENT = 1
EXIT_USAGE = 2

# Survivor rows are listed only when every coordinate has a balanced
# representative of magnitude below 3**10; branches beyond that bound
# describe residue classes with no small integer candidate and are
# counted in a note line instead.
LIST_BOUND_EXP = 10

THETA_CONSTRUCTS = ("e8", "ext2-e8")

COHOMOLOGY_BRUTE = {
    "h_regular": ("regular", False),
    "h_I": ("I", False),
    "h_omega_regular": ("regular", True),
    "h_omega_I": ("I", True),
}


class UsageFault(Exception):
    """Raised for bad arguments discovered after argparse."""


class ReportMismatch(Exception):
    """Raised when computed data contradicts the shipped tables."""


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation: everything dispatch needs, nothing else."""

    command: str
    action: str
    primes: Tuple[int, ...]
    depth: int
    bounds: Tuple[int, int]
    seed_path: Optional[str]
    fmt: str
    workers: int
    caps: Dict[str, object]

    def validate(self) -> None:
        if self.fmt not in ("tsv", "json"):
            raise UsageFault(f"unknown format {self.fmt!r}")
        if self.workers < 1:
            raise UsageFault("worker count must be at least 1")
        if self.seed_path is not None and not os.path.isfile(self.seed_path):
            raise UsageFault(f"seed file not found: {self.seed_path}")
        for p in self.primes:
            if p not in sieve_mod.SUPPORTED_PRIMES:
                raise UsageFault(
                    f"unsupported prime {p}; supported: "
                    + ", ".join(str(q) for q in sieve_mod.SUPPORTED_PRIMES))
        if self.command == "sieve":
            if not 1 <= self.depth <= sieve_mod.MAX_DEPTH:
                raise UsageFault(
                    f"depth must lie in [1, {sieve_mod.MAX_DEPTH}]")
        if self.command == "verify-vanishing":
            if self.depth < sieve_mod.FILTER_MIN_DEPTH:
                raise UsageFault(
                    f"the survivor filter needs depth >= "
                    f"{sieve_mod.FILTER_MIN_DEPTH} so that representatives "
                    f"below the modulus separate; got {self.depth}")
            if self.depth > sieve_mod.MAX_DEPTH:
                raise UsageFault(
                    f"depth must lie in [{sieve_mod.FILTER_MIN_DEPTH}, "
                    f"{sieve_mod.MAX_DEPTH}]")
        cols, n_max = self.bounds
        if cols < 1 or n_max < 1:
            raise UsageFault("bounds must be positive")


# ---------------------------------------------------------------------------
# Report helpers.

def _emit(text: str) -> None:
    sys.stdout.write(text)


def _tsv(header: Sequence[str], rows: Sequence[Sequence[object]],
         notes: Sequence[str] = ()) -> str:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(str(cell) for cell in row))
    for note in notes:
        lines.append(f"# {note}")
    return "\n".join(lines) + "\n"


def _json_report(command: str, payload: Dict[str, object]) -> str:
    body = {"schema": SCHEMA, "command": command}
    body.update(payload)
    return json.dumps(body, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def _num(value) -> str:
    """Decimal-string rendering for JSON payloads."""
    return str(value)


def _balanced(residue: int, modulus: int) -> int:
    return residue if 2 * residue < modulus else residue - modulus


def _load_seeds(path: Optional[str]) -> List[haupt.HauptSeed]:
    if path is None:
        return haupt.load_default_seeds()
    return haupt.load_seeds(path)


# ---------------------------------------------------------------------------
# sieve all / sieve run

def _sieve_one(args) -> Tuple[int, list]:
    p, depth, bounds, seed_rows = args
    found = sieve_mod.run(p, depth, bounds, seeds=seed_rows)
    return p, sieve_mod.attach_labels(found, seed_rows)


def cmd_sieve(cfg: RunConfig) -> int:
    seed_rows = _load_seeds(cfg.seed_path)
    jobs = [(p, cfg.depth, cfg.bounds, seed_rows) for p in sorted(cfg.primes)]
    if cfg.workers > 1 and len(jobs) > 1:
        with Pool(cfg.workers) as pool:
            results = dict(pool.map(_sieve_one, jobs, chunksize=1))
    else:
        results = dict(_sieve_one(job) for job in jobs)

    modulus = pow3(cfg.depth)
    bound = pow3(LIST_BOUND_EXP)
    listed_rows = []
    notes = []
    suppressed_json: Dict[str, object] = {}
    mismatch: Optional[str] = None
    for p in sorted(results):
        survivors = results[p]
        hidden = 0
        listed_labels = set()
        for s in survivors:
            if all(abs(_balanced(r, modulus)) < bound for r in s.residues):
                listed_rows.append(s)
                listed_labels.add(s.label)
            else:
                hidden += 1
        if hidden:
            caveat = sieve_mod.CAVEAT_13 if p == 13 else \
                "residue classes without small representatives remain"
            notes.append(
                f"p={p}: {hidden} branch(es) with every integer candidate "
                f"of magnitude >= 3^{LIST_BOUND_EXP} not listed; {caveat}")
            suppressed_json[str(p)] = {"count": _num(hidden), "note": caveat}
        expected = {row.label for row in seed_rows if row.p == p}
        missing = sorted(expected - listed_labels)
        if mismatch is None and missing:
            mismatch = (f"p={p}: expected class row {missing[0]} "
                        f"missing from the survivor table")
    for s in listed_rows:
        if mismatch is None and s.label is None:
            mismatch = (f"p={s.p}: survivor {s.residues} matches no "
                        f"shipped class row")

    if cfg.fmt == "tsv":
        rows = [(s.p, s.depth, *s.residues,
                 s.label if s.label is not None else "-",
                 "yes" if s.label is not None else "no")
                for s in listed_rows]
        _emit(_tsv(("p", "depth", "c1", "c2", "c4", "c5", "label", "match"),
                   rows, notes))
    else:
        rows = [{"p": _num(s.p), "depth": _num(s.depth),
                 "c1": _num(s.residues[0]), "c2": _num(s.residues[1]),
                 "c4": _num(s.residues[2]), "c5": _num(s.residues[3]),
                 "label": s.label, "matched": s.label is not None}
                for s in listed_rows]
        _emit(_json_report("sieve", {
            "depth": _num(cfg.depth),
            "rows": rows,
            "suppressed": suppressed_json,
        }))
    if mismatch is not None:
        print(f"mismatch: {mismatch}", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify-vanishing

def cmd_verify(cfg: RunConfig) -> int:
    seed_rows = _load_seeds(cfg.seed_path)
    verdicts = []
    for p in sorted(cfg.primes):
        verdicts.append(sieve_mod.conclude(p, cfg.depth, cfg.bounds,
                                           seeds=seed_rows))
    if cfg.fmt == "tsv":
        rows = [(v.p, v.verdict, v.depth, len(v.survivors), len(v.filtered),
                 "checked" if v.extension_checked else "unchecked",
                 v.note if v.note else "-")
                for v in verdicts]
        _emit(_tsv(("p", "verdict", "depth", "survivors", "filtered",
                    "extension", "note"), rows))
    else:
        rows = [{"p": _num(v.p), "verdict": v.verdict,
                 "depth": _num(v.depth),
                 "survivors": _num(len(v.survivors)),
                 "filtered": _num(len(v.filtered)),
                 "extension_checked": v.extension_checked,
                 "note": v.note}
                for v in verdicts]
        _emit(_json_report("verify-vanishing", {"rows": rows}))
    bad = [v for v in verdicts if v.verdict != "H1_vanishes"]
    for v in bad:
        for line in v.diagnostics:
            print(f"p={v.p}: {line}", file=sys.stderr)
    return EXIT_INCONSISTENT if bad else EXIT_OK


# ---------------------------------------------------------------------------
# replicate check / replicate extend

def _class_tables(p: int, terms: int, seed_rows) -> Tuple[dict, dict]:
    cplus = sieve_mod.class_cplus(p, seed_rows)
    row = haupt.seed_by_label(f"{p}A", seed_rows)
    seeds4 = tuple(row.coeffs[n] for n in (1, 2, 4, 5))
    ext = extend_cminus(seeds4, cplus, p, terms)
    cminus = {n: int(ext.coeff(n)) for n in range(-1, terms + 1) if n != 0}
    return cminus, cplus


def cmd_replicate(cfg: RunConfig) -> int:
    seed_rows = _load_seeds(cfg.seed_path)
    p = cfg.primes[0]
    if cfg.action == "extend":
        terms = int(cfg.caps["terms"])
        cminus, _ = _class_tables(p, terms, seed_rows)
        items = sorted(cminus.items())
        if cfg.fmt == "tsv":
            _emit(_tsv(("n", "c"), items))
        else:
            _emit(_json_report("replicate-extend", {
                "p": _num(p),
                "coefficients": {_num(n): _num(c) for n, c in items},
            }))
        return EXIT_OK

    m_max, n_max = cfg.bounds
    cminus, cplus = _class_tables(p, n_max, seed_rows)
    report = check_solution(cminus, cplus, p, (m_max, n_max))
    verdict = "ok" if report.ok else "violated"
    if cfg.fmt == "tsv":
        _emit(_tsv(("p", "m_max", "n_max", "tested", "skipped",
                    "violations", "verdict"),
                   [(p, m_max, n_max, report.tested, len(report.skipped),
                     len(report.violations), verdict)]))
    else:
        _emit(_json_report("replicate-check", {
            "p": _num(p),
            "m_max": _num(m_max),
            "n_max": _num(n_max),
            "tested": _num(report.tested),
            "skipped": _num(len(report.skipped)),
            "violations": _num(len(report.violations)),
            "verdict": verdict,
        }))
    for kind, m, n, value in report.violations:
        print(f"violation ({kind}) at m={m} n={n}: {value}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_INCONSISTENT


# ---------------------------------------------------------------------------
# haupt coeffs

def cmd_haupt(cfg: RunConfig) -> int:
    seed_rows = _load_seeds(cfg.seed_path)
    label = str(cfg.caps["label"])
    terms = int(cfg.caps["terms"])
    try:
        table = haupt.class_coeffs(label, terms, seed_rows)
    except KeyError as exc:
        raise UsageFault(str(exc)) from exc
    items = sorted(table.items())
    if cfg.fmt == "tsv":
        _emit(_tsv(("n", "c"), items))
    else:
        _emit(_json_report("haupt-coeffs", {
            "class": label,
            "coefficients": {_num(n): _num(c) for n, c in items},
        }))
    return EXIT_OK


# ---------------------------------------------------------------------------
# jcoeffs

def cmd_jcoeffs(cfg: RunConfig) -> int:
    terms = int(cfg.caps["terms"])
    series = haupt.j_coefficients(terms)
    items = [(n, int(series.coeff(n))) for n in range(1, terms + 1)]
    if cfg.fmt == "tsv":
        _emit(_tsv(("n", "c"), items))
    else:
        _emit(_json_report("jcoeffs", {
            "coefficients": {_num(n): _num(c) for n, c in items},
        }))
    return EXIT_OK


# ---------------------------------------------------------------------------
# lattice theta

def _theta_lattice(construct: str) -> lattice.GramLattice:
    base = lattice.e8()
    if construct == "e8":
        return base
    return lattice.exterior_power_lattice(base, 2)


def cmd_lattice(cfg: RunConfig) -> int:
    construct = str(cfg.caps["construct"])
    max_norm = int(cfg.caps["max_norm"])
    if max_norm < 0:
        raise UsageFault("max norm must be nonnegative")
    lat = _theta_lattice(construct)
    counts = lattice.theta_counts(lat, max_norm, workers=cfg.workers)
    items = [(n, c) for n, c in sorted(counts.items()) if c]
    if cfg.fmt == "tsv":
        _emit(_tsv(("norm", "count"), items))
    else:
        _emit(_json_report("lattice-theta", {
            "construct": construct,
            "rank": _num(lat.rank),
            "det": _num(lat.det()),
            "counts": {_num(n): _num(c) for n, c in items},
        }))
    return EXIT_OK


# ---------------------------------------------------------------------------
# cohomology series

def cmd_cohomology(cfg: RunConfig) -> int:
    kind = str(cfg.caps["kind"])
    p = int(cfg.caps["p"])
    bound = int(cfg.caps["bound"])
    brute = bool(cfg.caps["brute"])
    try:
        series = supersplit.cohomology_series(kind, p, bound)
    except ValueError as exc:
        raise UsageFault(str(exc)) from exc
    notes = []
    if brute:
        module, omega = COHOMOLOGY_BRUTE[kind]
        table = supersplit.brute_force_h(p, module, omega, bound)
        for degree in range(bound + 1):
            if table.pair(degree) != series.pair(degree):
                print(f"degree {degree}: closed form {series.pair(degree)} "
                      f"but direct count gives {table.pair(degree)}",
                      file=sys.stderr)
                return EXIT_INCONSISTENT
        notes.append("cross-checked against the direct quotient count")
    rows = [(d, *series.pair(d)) for d in range(bound + 1)]
    if cfg.fmt == "tsv":
        _emit(_tsv(("degree", "ordinary", "super"), rows, notes))
    else:
        _emit(_json_report("cohomology-series", {
            "kind": kind,
            "p": _num(p),
            "cross_checked": brute,
            "rows": [{"degree": _num(d), "ordinary": _num(a),
                      "super": _num(b)} for d, a, b in rows],
        }))
    return EXIT_OK


# ---------------------------------------------------------------------------
# split

def _seed_series(row: haupt.HauptSeed, terms: int) -> QSeries:
    table = {-1: row.coeffs[-1]}
    for n in range(1, terms + 1):
        table[n] = row.coeffs[n]
    return QSeries.from_dict(table, terms)


def cmd_split(cfg: RunConfig) -> int:
    seed_rows = _load_seeds(cfg.seed_path)
    terms = int(cfg.caps["terms"])
    if not 1 <= terms <= 5:
        raise UsageFault("the shipped seeds carry coefficients through q^5")
    try:
        row_g = haupt.seed_by_label(str(cfg.caps["label"]), seed_rows)
        row_sg = haupt.seed_by_label(str(cfg.caps["sigma_label"]), seed_rows)
    except KeyError as exc:
        raise UsageFault(str(exc)) from exc
    ordinary, sup = supersplit.split(_seed_series(row_g, terms),
                                    _seed_series(row_sg, terms))
    rows = []
    for part, series in (("ordinary", ordinary), ("super", sup)):
        for n, c in sorted(series.coeff_dict().items()):
            if c:
                rows.append((part, n, c))
    if cfg.fmt == "tsv":
        _emit(_tsv(("part", "n", "c"), rows))
    else:
        payload = {"ordinary": {}, "super": {}}
        for part, n, c in rows:
            payload[part][_num(n)] = _num(c)
        _emit(_json_report("split", payload))
    return EXIT_OK


# ---------------------------------------------------------------------------
# kring table

def cmd_kring(cfg: RunConfig) -> int:
    p = int(cfg.caps["p"])
    trunc = int(cfg.caps["trunc"])
    if trunc < 0:
        raise UsageFault("truncation must be nonnegative")
    try:
        elements = (("triv", kring.triv(p)), ("free", kring.free(p)),
                    ("kernel", kring.kernel(p)))
    except ValueError as exc:
        raise UsageFault(str(exc)) from exc
    rows = []
    for name, x in elements:
        for op_name, op in (("lambda", kring.lambda_n), ("sym", kring.sym_n)):
            for n in range(trunc + 1):
                y = op(x, n)
                rows.append((op_name, name, n, y.a, y.b, y.c))
    if cfg.fmt == "tsv":
        _emit(_tsv(("op", "element", "n", "triv", "free", "kernel"), rows))
    else:
        _emit(_json_report("kring-table", {
            "p": _num(p),
            "rows": [{"op": op_name, "element": name, "n": _num(n),
                      "triv": _num(a), "free": _num(b), "kernel": _num(c)}
                     for op_name, name, n, a, b, c in rows],
        }))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing.

def _parse_bounds(text: str) -> Tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated integers")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError("bounds must be integers") from None


def _parse_primes(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("primes must be integers") from None


def _add_common(sub, *, seeds: bool = True) -> None:
    sub.add_argument("--format", choices=("tsv", "json"), default="tsv",
                     help="report format (default tsv)")
    if seeds:
        sub.add_argument("--seeds", metavar="PATH", default=None,
                         help="seed table path (default: shipped table)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moonsieve",
        description="Exact-arithmetic toolkit: coefficient sieve, "
                    "replication identities, lattice theta counts, and "
                    "equivariant cohomology tables.",
        epilog="Set MOONSIEVE_CACHE to a directory to cache extended "
               "coefficient tables between runs.")
    top = parser.add_subparsers(dest="command", required=True)

    ps = top.add_parser("sieve", help="digit-by-digit coefficient search")
    ps_sub = ps.add_subparsers(dest="action", required=True)
    for action in ("all", "run"):
        sp = ps_sub.add_parser(
            action,
            help="all supported primes" if action == "all" else "one prime")
        if action == "run":
            sp.add_argument("--prime", type=int, required=True)
        else:
            sp.add_argument("--primes", type=_parse_primes,
                            default=sieve_mod.SUPPORTED_PRIMES,
                            help="comma-separated list (default: all)")
            sp.add_argument("--workers", type=int, default=1,
                            help="sieve several primes in parallel")
        sp.add_argument("--depth", type=int,
                        default=sieve_mod.DEPTH_DEFAULT,
                        help="number of base-3 digits to fix (default 29)")
        sp.add_argument("--bounds", type=_parse_bounds,
                        default=sieve_mod.BOUNDS_DEFAULT, metavar="COLS,NMAX",
                        help="constraint window (default 4,16)")
        _add_common(sp)

    pv = top.add_parser("verify-vanishing",
                        help="sieve, filter, and extension check per prime")
    pv.add_argument("--prime", type=int, default=None,
                    help="restrict to one prime (default: all ten)")
    pv.add_argument("--depth", type=int, default=sieve_mod.DEPTH_DEFAULT)
    pv.add_argument("--bounds", type=_parse_bounds,
                    default=sieve_mod.BOUNDS_DEFAULT, metavar="COLS,NMAX")
    _add_common(pv)

    pr = top.add_parser("replicate", help="coefficient identity tooling")
    pr_sub = pr.add_subparsers(dest="action", required=True)
    prc = pr_sub.add_parser("check", help="test the identity grid")
    prc.add_argument("--prime", type=int, required=True)
    prc.add_argument("--bounds", type=_parse_bounds, default=(5, 45),
                     metavar="M,N", help="identity grid extent (default 5,45)")
    _add_common(prc)
    pre = pr_sub.add_parser("extend", help="determine coefficients from seeds")
    pre.add_argument("--prime", type=int, required=True)
    pre.add_argument("--terms", type=int, default=45)
    _add_common(pre)

    ph = top.add_parser("haupt", help="class coefficient tables")
    ph_sub = ph.add_subparsers(dest="action", required=True)
    phc = ph_sub.add_parser("coeffs")
    phc.add_argument("--class", dest="label", required=True)
    phc.add_argument("--terms", type=int, default=10)
    _add_common(phc)

    pj = top.add_parser("jcoeffs", help="elliptic modular function coefficients")
    pj.add_argument("--terms", type=int, default=10)
    _add_common(pj, seeds=False)

    pl = top.add_parser("lattice", help="positive definite lattice data")
    pl_sub = pl.add_subparsers(dest="action", required=True)
    plt = pl_sub.add_parser("theta", help="vector counts by norm")
    plt.add_argument("--construct", choices=THETA_CONSTRUCTS, required=True)
    plt.add_argument("--max-norm", type=int, default=4)
    plt.add_argument("--workers", type=int, default=1)
    _add_common(plt, seeds=False)

    pc = top.add_parser("cohomology", help="fixed-point algebra dimension series")
    pc_sub = pc.add_subparsers(dest="action", required=True)
    pcs = pc_sub.add_parser("series")
    pcs.add_argument("--kind", choices=supersplit.KINDS, required=True)
    pcs.add_argument("--p", type=int, required=True)
    pcs.add_argument("--bound", type=int, default=8)
    pcs.add_argument("--brute", action="store_true",
                     help="cross-check against the direct quotient count")
    _add_common(pcs, seeds=False)

    pp = top.add_parser("split", help="ordinary/super series from a class pair")
    pp.add_argument("--class", dest="label", required=True)
    pp.add_argument("--sigma-class", dest="sigma_label", required=True)
    pp.add_argument("--terms", type=int, default=5)
    _add_common(pp)

    pk = top.add_parser("kring", help="exterior and symmetric power tables")
    pk_sub = pk.add_subparsers(dest="action", required=True)
    pkt = pk_sub.add_parser("table")
    pkt.add_argument("--p", type=int, required=True)
    pkt.add_argument("--trunc", type=int, default=6)
    _add_common(pkt, seeds=False)

    return parser


def _config_from(ns: argparse.Namespace) -> RunConfig:
    command = ns.command
    action = getattr(ns, "action", "")
    if command == "sieve":
        primes = (ns.prime,) if action == "run" else tuple(sorted(ns.primes))
    elif command == "verify-vanishing":
        primes = ((ns.prime,) if ns.prime is not None
                  else sieve_mod.SUPPORTED_PRIMES)
    elif command == "replicate":
        primes = (ns.prime,)
    else:
        primes = ()
    caps: Dict[str, object] = {}
    for name in ("label", "sigma_label", "terms", "construct", "max_norm",
                 "kind", "p", "bound", "brute", "trunc"):
        if hasattr(ns, name):
            caps[name] = getattr(ns, name)
    return RunConfig(
        command=command,
        action=action or "",
        primes=primes,
        depth=getattr(ns, "depth", sieve_mod.DEPTH_DEFAULT),
        bounds=getattr(ns, "bounds", sieve_mod.BOUNDS_DEFAULT),
        seed_path=getattr(ns, "seeds", None),
        fmt=getattr(ns, "format", "tsv"),
        workers=getattr(ns, "workers", 1),
        caps=caps,
    )


DISPATCH = {
    "sieve": cmd_sieve,
    "verify-vanishing": cmd_verify,
    "replicate": cmd_replicate,
    "haupt": cmd_haupt,
    "jcoeffs": cmd_jcoeffs,
    "lattice": cmd_lattice,
    "cohomology": cmd_cohomology,
    "split": cmd_split,
    "kring": cmd_kring,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = _config_from(ns)
    try:
        cfg.validate()
        return DISPATCH[cfg.command](cfg)
    except UsageFault as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {exc}\n")
    except ReplicateError as exc:
        print(f"inconsistent: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except ValueError as exc:
        print(f"inconsistent: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
