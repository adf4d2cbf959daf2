"""Concrete integer realizations of cyclic-prime-order module actions.

A module is an integer matrix of multiplicative order p acting on Z^dim.
Tate cohomology, decomposition into the three indecomposables, and the
multilinear functors (tensor, exterior, symmetric powers) are all done in
exact integer arithmetic; this module is the brute-force cross-check for
the closed forms in :mod:`moonsieve.kring`.

The cohomology realization: with N = 1 + g + ... + g^(p-1),

    H^0 = ker(g-1) / im(N),    H^1 = ker(N) / im(g-1).

Both quotients are computed from a single Smith normal form each: im(N)
has the same rank as ker(g-1) and lies inside it, so ker(g-1) is the
saturation of im(N) and the quotient is exactly the torsion of
coker(N); symmetrically for H^1 and coker(g-1).  Counting invariant
factors divisible by p therefore gives both dimensions without ever
constructing kernel bases.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from math import comb, gcd

import numpy as np

DIM_CAP_DEFAULT = 5000
_INT64_SAFE = 2 ** 40


def _to_array(mat) -> np.ndarray:
    a = np.array(mat, dtype=object)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("g_matrix must be square")
    return a


def _matmul_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Integer matrix product, int64 when safely bounded, objects otherwise."""
    bound = max(int(np.abs(a.astype(object)).max() or 0),
                int(np.abs(b.astype(object)).max() or 0), 1)
    n = a.shape[1]
    if bound * bound * n < _INT64_SAFE:
        return (a.astype(np.int64) @ b.astype(np.int64)).astype(object)
    return a @ b


def _is_monomial(a: np.ndarray):
    """If a is a signed permutation matrix, return (perm, signs) with
    column j mapping to row perm[j] with sign signs[j]; else None."""
    n = a.shape[0]
    perm = np.empty(n, dtype=np.int64)
    signs = np.empty(n, dtype=np.int64)
    seen = set()
    for j in range(n):
        col = a[:, j]
        nz = [i for i in range(n) if col[i] != 0]
        if len(nz) != 1 or col[nz[0]] not in (1, -1) or nz[0] in seen:
            return None
        perm[j] = nz[0]
        signs[j] = col[nz[0]]
        seen.add(nz[0])
    return perm, signs


@dataclass(frozen=True, eq=False)
class ConcreteModule:
    """Z^dim with an action of a generator of order p."""

    p: int
    g_matrix: np.ndarray

    def __init__(self, p: int, g_matrix, check: bool = True):
        if p < 3 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"p must be an odd prime, got {p}")
        a = _to_array(g_matrix)
        a.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "g_matrix", a)
        if check:
            self._validate()

    @property
    def dim(self) -> int:
        return self.g_matrix.shape[0]

    def _validate(self) -> None:
        a = self.g_matrix
        n = self.dim
        mono = _is_monomial(a)
        if mono is not None:
            perm, signs = mono
            # order of a signed permutation: for each cycle of length L
            # with sign product s, the order is L if s == 1 else 2L
            seen = [False] * n
            for start in range(n):
                if seen[start]:
                    continue
                length, s, j = 0, 1, start
                while not seen[j]:
                    seen[j] = True
                    s *= int(signs[j])
                    j = int(perm[j])
                    length += 1
                order = length if s == 1 else 2 * length
                if self.p % order != 0 and order != 1:
                    raise ValueError("matrix order does not divide p")
            return
        power = a
        for _ in range(self.p - 1):
            power = _matmul_exact(power, a)
        if not (power == np.eye(n, dtype=object)).all():
            raise ValueError("g_matrix**p != identity")
        # order divides the prime p, hence is 1 or p; either is a valid
        # module, and det = +-1 follows from invertibility (g * g^(p-1) = 1)

    def norm_matrix(self) -> np.ndarray:
        """N = 1 + g + ... + g^(p-1)."""
        acc = np.eye(self.dim, dtype=object)
        power = np.eye(self.dim, dtype=object)
        for _ in range(self.p - 1):
            power = _matmul_exact(power, self.g_matrix)
            acc = acc + power
        return acc


# ---------------------------------------------------------------------------
# Smith normal form over Z.


def smith_invariant_factors(mat: np.ndarray) -> list:
    """Nonzero invariant factors (positive, each dividing the next).

    Classic pivot-and-reduce elimination with smallest-pivot selection;
    matrices here have tiny invariant factors (1s and one prime), which
    keeps intermediate entries small.
    """
    a = [[int(x) for x in row] for row in np.asarray(mat, dtype=object)]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    factors = []
    top = 0
    while True:
        # find smallest nonzero entry at or below/right of (top, top)
        best = None
        for i in range(top, rows):
            for j in range(top, cols):
                v = a[i][j]
                if v != 0 and (best is None or abs(v) < abs(best[2])):
                    best = (i, j, v)
        if best is None:
            break
        bi, bj, _ = best
        a[top], a[bi] = a[bi], a[top]
        for row in a:
            row[top], row[bj] = row[bj], row[top]
        while True:
            pivot = a[top][top]
            dirty = False
            for i in range(top + 1, rows):
                if a[i][top]:
                    q = a[i][top] // pivot
                    if q:
                        for j in range(top, cols):
                            a[i][j] -= q * a[top][j]
                    if a[i][top]:
                        a[top], a[i] = a[i], a[top]
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(top + 1, cols):
                if a[top][j]:
                    q = a[top][j] // pivot
                    if q:
                        for i in range(top, rows):
                            a[i][j] -= q * a[i][top]
                    if a[top][j]:
                        for i in range(rows):
                            a[i][top], a[i][j] = a[i][j], a[i][top]
                        dirty = True
                        break
            if not dirty:
                break
        # pivot now alone in its row and column; absorb any entry it does
        # not divide, then move on
        pivot = a[top][top]
        fixup = None
        for i in range(top + 1, rows):
            for j in range(top + 1, cols):
                if a[i][j] % pivot != 0:
                    fixup = i
                    break
            if fixup is not None:
                break
        if fixup is not None:
            for j in range(top, cols):
                a[top][j] += a[fixup][j]
            continue
        factors.append(abs(pivot))
        top += 1
        if top >= rows or top >= cols:
            break
    # divisibility chain is a property of the algorithm; assert it
    for x, y in zip(factors, factors[1:]):
        assert y % x == 0, "invariant factor chain broken"
    return factors


def _count_p_factors(mat: np.ndarray, p: int) -> int:
    count = 0
    for f in smith_invariant_factors(mat):
        if f % p == 0:
            if f % (p * p) == 0:
                raise ArithmeticError(
                    "invariant factor divisible by p^2: input is not a "
                    "Z_p-free module of the expected kind")
            count += 1
    return count


def tate_cohomology(module: ConcreteModule) -> tuple:
    """(dim H^0, dim H^1) over F_p.

    H^0 counts invariant factors of the norm map divisible by p, H^1
    those of g - 1; see the module docstring for why torsion of the two
    cokernels is exactly the two Tate groups.
    """
    mono = _is_monomial(module.g_matrix)
    if mono is not None:
        n_triv, n_free = _monomial_orbit_counts(module, mono)
        return (n_triv, 0)
    g = module.g_matrix
    gm1 = g - np.eye(module.dim, dtype=object)
    h0 = _count_p_factors(module.norm_matrix(), module.p)
    h1 = _count_p_factors(gm1, module.p)
    return (h0, h1)


def _monomial_orbit_counts(module: ConcreteModule, mono) -> tuple:
    """(n_triv, n_free) for a signed permutation matrix of order dividing p.

    Each orbit has length 1 or p with sign product +1 (odd order); length
    1 gives a trivial summand, length p a free one after rescaling basis
    vectors by partial sign products.
    """
    perm, signs = mono
    n = module.dim
    seen = [False] * n
    n_triv = n_free = 0
    for start in range(n):
        if seen[start]:
            continue
        length, s, j = 0, 1, start
        while not seen[j]:
            seen[j] = True
            s *= int(signs[j])
            j = int(perm[j])
            length += 1
        if s != 1:
            raise ArithmeticError("orbit sign -1: order does not divide p")
        if length == 1:
            n_triv += 1
        elif length == module.p:
            n_free += 1
        else:
            raise ArithmeticError("orbit length neither 1 nor p")
    return n_triv, n_free


def decompose(module: ConcreteModule) -> tuple:
    """Multiplicities (n_triv, n_free, n_kernel) of the indecomposables.

    Counting rule: n_triv = h0, n_kernel = h1, and the free multiplicity
    fills up the dimension.  Non-integral or negative fill-up means the
    input was not a lattice of the expected kind.
    """
    h0, h1 = tate_cohomology(module)
    p = module.p
    rest = module.dim - h0 - (p - 1) * h1
    if rest < 0 or rest % p != 0:
        raise ArithmeticError(
            f"dimension bookkeeping failed: dim={module.dim} h0={h0} h1={h1}")
    return (h0, rest // p, h1)


def decompose_by_ranks(module: ConcreteModule) -> tuple:
    """Independent route to the same multiplicities via ranks mod p.

    rank(g-1 mod p) = (p-1)*n_free + (p-2)*n_kernel and
    rank((g-1)^(p-1) mod p) = n_free; this never touches Smith forms and
    serves as the cross-check oracle for :func:`decompose`.
    """
    p = module.p
    n = module.dim
    g = np.array([[int(x) % p for x in row] for row in module.g_matrix],
                 dtype=np.int64)
    gm1 = (g - np.eye(n, dtype=np.int64)) % p
    r1 = _rank_mod_p(gm1, p)
    power = np.eye(n, dtype=np.int64)
    for _ in range(p - 1):
        power = (power @ gm1) % p
    n_free = _rank_mod_p(power, p)
    num = r1 - (p - 1) * n_free
    if num < 0 or num % (p - 2) != 0:
        raise ArithmeticError("rank bookkeeping failed")
    n_kernel = num // (p - 2)
    n_triv = n - p * n_free - (p - 1) * n_kernel
    if n_triv < 0:
        raise ArithmeticError("rank bookkeeping failed")
    return (n_triv, n_free, n_kernel)


def _rank_mod_p(mat: np.ndarray, p: int) -> int:
    a = mat.copy() % p
    rows, cols = a.shape
    rank = 0
    col = 0
    for col in range(cols):
        pivot_row = None
        for i in range(rank, rows):
            if a[i, col] % p:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        a[[rank, pivot_row]] = a[[pivot_row, rank]]
        inv = pow(int(a[rank, col]), -1, p)
        a[rank] = (a[rank] * inv) % p
        for i in range(rows):
            if i != rank and a[i, col]:
                a[i] = (a[i] - a[i, col] * a[rank]) % p
        rank += 1
        if rank == rows:
            break
    return rank


# ---------------------------------------------------------------------------
# Models of the three indecomposables.


def trivial_module(p: int) -> ConcreteModule:
    return ConcreteModule(p, [[1]])


def free_module(p: int) -> ConcreteModule:
    """Cyclic shift on Z^p."""
    m = [[0] * p for _ in range(p)]
    for j in range(p):
        m[(j + 1) % p][j] = 1
    return ConcreteModule(p, m)


def kernel_module(p: int) -> ConcreteModule:
    """Companion matrix of 1 + x + ... + x^(p-1): the augmentation kernel
    in the basis e_i - e_(i+1)."""
    n = p - 1
    m = [[0] * n for _ in range(n)]
    for j in range(n - 1):
        m[j + 1][j] = 1
    for i in range(n):
        m[i][n - 1] = -1
    return ConcreteModule(p, m)


# ---------------------------------------------------------------------------
# Multilinear functors.


def _check_cap(dim: int, cap: int) -> None:
    if dim > cap:
        raise ValueError(f"result dimension {dim} exceeds cap {cap}")


def tensor(m1: ConcreteModule, m2: ConcreteModule,
           dim_cap: int = DIM_CAP_DEFAULT) -> ConcreteModule:
    if m1.p != m2.p:
        raise ValueError("mixed primes")
    _check_cap(m1.dim * m2.dim, dim_cap)
    a = np.kron(m1.g_matrix, m2.g_matrix)
    return ConcreteModule(m1.p, a, check=False)

def exterior_power(module: ConcreteModule, n: int,
                   dim_cap: int = DIM_CAP_DEFAULT) -> ConcreteModule:
    """Action on Lambda^n with basis the lex-ordered n-subsets; entries
    are the n x n minors of g."""
    if n < 0:
        raise ValueError("negative power")
    d = module.dim
    new_dim = comb(d, n)
    _check_cap(new_dim, dim_cap)
    if n == 0:
        return ConcreteModule(module.p, [[1]], check=False)
    basis = list(combinations(range(d), n))
    index = {b: i for i, b in enumerate(basis)}
    g = module.g_matrix
    mono = _is_monomial(g)
    out = np.zeros((new_dim, new_dim), dtype=object)
    if mono is not None:
        perm, signs = mono
        for col, subset in enumerate(basis):
            imgs = sorted(((int(perm[j]), int(signs[j])) for j in subset))
            sign = 1
            # sort parity of the image tuple
            raw = [int(perm[j]) for j in subset]
            for i in range(len(raw)):
                for j in range(i + 1, len(raw)):
                    if raw[i] > raw[j]:
                        sign = -sign
            for _, s in imgs:
                sign *= s
            out[index[tuple(t for t, _ in imgs)], col] = sign
    else:
        for col, subset in enumerate(basis):
            sub = g[:, list(subset)]
            for row, rowset in enumerate(basis):
                minor = sub[list(rowset), :]
                out[row, col] = _det_int(minor)
    return ConcreteModule(module.p, out, check=False)


def symmetric_power(module: ConcreteModule, n: int,
                    dim_cap: int = DIM_CAP_DEFAULT) -> ConcreteModule:
    """Action on S^n with basis the lex-ordered multisets."""
    if n < 0:
        raise ValueError("negative power")
    d = module.dim
    new_dim = comb(d + n - 1, n) if n else 1
    _check_cap(new_dim, dim_cap)
    if n == 0:
        return ConcreteModule(module.p, [[1]], check=False)
    basis = list(combinations_with_replacement(range(d), n))
    index = {b: i for i, b in enumerate(basis)}
    g = module.g_matrix
    out = np.zeros((new_dim, new_dim), dtype=object)
    for col, multiset in enumerate(basis):
        # product over i in multiset of the linear form sum_k g[k,i] x_k,
        # expanded as a dict {sorted k-tuple: coefficient}
        poly = {(): 1}
        for i in multiset:
            nxt = {}
            colvec = g[:, i]
            for mono_key, coeff in poly.items():
                for k in range(d):
                    ck = colvec[k]
                    if ck == 0:
                        continue
                    key = tuple(sorted(mono_key + (k,)))
                    nxt[key] = nxt.get(key, 0) + coeff * int(ck)
            poly = nxt
        for key, coeff in poly.items():
            if coeff:
                out[index[key], col] = coeff
    return ConcreteModule(module.p, out, check=False)


def _det_int(a: np.ndarray) -> int:
    """Exact integer determinant by fraction-free elimination."""
    m = [[int(x) for x in row] for row in a]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Split-complex verdicts.


@dataclass(frozen=True, eq=False)
class SplitComplex:
    """Chain of modules with maps d upward and dstar downward, and the
    Laplace scalar k: d dstar + dstar d should be k on every term."""

    modules: tuple
    d: tuple
    dstar: tuple
    k: int

    def __init__(self, modules, d, dstar, k):
        object.__setattr__(self, "modules", tuple(modules))
        object.__setattr__(self, "d", tuple(np.array(m, dtype=object)
                                            for m in d))
        object.__setattr__(self, "dstar", tuple(np.array(m, dtype=object)
                                                for m in dstar))
        object.__setattr__(self, "k", int(k))
        if len(self.d) != len(self.modules) - 1 or \
                len(self.dstar) != len(self.modules) - 1:
            raise ValueError("need exactly one d and one dstar per arrow")


def laplace_split_check(complex_: SplitComplex) -> str:
    """Verdict on whether the complex forces the alternating sum of its
    terms to vanish in the representation ring.

    Returns 'splits' (and checks the sum), 'fails_gcd' when the
    Laplace scalar shares a factor with p, or 'fails_relations'."""
    mods = complex_.modules
    p = mods[0].p
    if any(m.p != p for m in mods):
        return "fails_relations"
    ds, dstars = complex_.d, complex_.dstar
    n = len(mods)

    def _z(r, c):
        return np.zeros((r, c), dtype=object)

    for i in range(n - 1):
        if ds[i].shape != (mods[i + 1].dim, mods[i].dim):
            return "fails_relations"
        if dstars[i].shape != (mods[i].dim, mods[i + 1].dim):
            return "fails_relations"
        # equivariance of both maps
        if not (_matmul_exact(ds[i], mods[i].g_matrix)
                == _matmul_exact(mods[i + 1].g_matrix, ds[i])).all():
            return "fails_relations"
        if not (_matmul_exact(dstars[i], mods[i + 1].g_matrix)
                == _matmul_exact(mods[i].g_matrix, dstars[i])).all():
            return "fails_relations"
    for i in range(n - 2):
        if (_matmul_exact(ds[i + 1], ds[i]) != 0).any():
            return "fails_relations"
        if (_matmul_exact(dstars[i], dstars[i + 1]) != 0).any():
            return "fails_relations"
    for i in range(n):
        lap = _z(mods[i].dim, mods[i].dim)
        if i < n - 1:
            lap = lap + _matmul_exact(dstars[i], ds[i])
        if i > 0:
            lap = lap + _matmul_exact(ds[i - 1], dstars[i - 1])
        if not (lap == complex_.k * np.eye(mods[i].dim, dtype=object)).all():
            return "fails_relations"
    if gcd(complex_.k, p) != 1:
        return "fails_gcd"
    total = [0, 0, 0]
    for i, m in enumerate(mods):
        sign = (-1) ** i
        for slot, mult in enumerate(decompose(m)):
            total[slot] += sign * mult
    if total != [0, 0, 0]:
        raise ArithmeticError(
            f"Laplace relations hold with unit scalar yet alternating sum "
            f"is {total}; theory violated")
    return "splits"


# ---------------------------------------------------------------------------
# Plain-text matrix grids for the CLI.


def parse_matrix(text: str):
    rows = []
    for line in text.strip().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([int(tok) for tok in line.split()])
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ValueError("matrix grid must be square")
    return rows


def format_matrix(mat) -> str:
    return "\n".join(" ".join(str(int(x)) for x in row) for row in mat)
