"""Matrices over the Weyl algebra, the row determinant, and the matrix
builders of the generalized Capelli identity."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from .exactarith import RatFunc, as_rat, linear, prod_linear
from .weylcore import AlgebraSignature, WeylElement


class NotSquare(ValueError):
    pass


class BadPermutation(ValueError):
    pass


@dataclass(frozen=True)
class ProblemData:
    M: int
    N: int
    z: Tuple[Fraction, ...]
    lam: Tuple[Fraction, ...]
    h: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(as_rat(c) for c in self.z))
        object.__setattr__(self, "lam", tuple(as_rat(c) for c in self.lam))
        object.__setattr__(self, "h", as_rat(self.h))
        if len(self.z) != self.N or len(self.lam) != self.M:
            raise ValueError(f"need {self.N} z values and {self.M} lambda values")

    @property
    def sig(self) -> AlgebraSignature:
        return AlgebraSignature(self.M, self.N, self.h)

    def with_h(self, h) -> "ProblemData":
        return ProblemData(self.M, self.N, self.z, self.lam, as_rat(h))

    def transposed(self) -> "ProblemData":
        return ProblemData(self.N, self.M, self.lam, self.z, self.h)

    def distinct(self) -> bool:
        return len(set(self.z)) == self.N and len(set(self.lam)) == self.M

    def to_dict(self) -> dict:
        return {"M": self.M, "N": self.N, "z": [str(c) for c in self.z],
                "lambda": [str(c) for c in self.lam], "h": str(self.h)}


def random_rationals(rng: random.Random, count: int, distinct: bool = True) -> Tuple[Fraction, ...]:
    """Rationals with numerators in [-9, 9] and denominators in [1, 4]."""
    out: List[Fraction] = []
    while len(out) < count:
        c = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
        if distinct and c in out:
            continue
        out.append(c)
    return tuple(out)


def random_problem(M: int, N: int, h, rng: random.Random, distinct: bool = True) -> ProblemData:
    z = random_rationals(rng, N, distinct)
    lam = random_rationals(rng, M, distinct)
    return ProblemData(M, N, z, lam, h)


@dataclass
class WeylMatrix:
    sig: AlgebraSignature
    entries: List[List[WeylElement]] = field(default_factory=list)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij: Tuple[int, int]) -> WeylElement:
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylMatrix):
            return NotImplemented
        return self.sig == other.sig and self.entries == other.entries

    def map(self, fn: Callable[[WeylElement], WeylElement]) -> "WeylMatrix":
        return WeylMatrix(self.sig, [[fn(a) for a in row] for row in self.entries])


# ---------------------------------------------------------------------------
# row determinant
# ---------------------------------------------------------------------------

def rdet(m: WeylMatrix) -> WeylElement:
    """Row determinant: sum over permutations, factors in row order.

    Computed as a Laplace expansion along the top row,
    ``rdet = sum_c (-1)^pos(c) a[0][c] * rdet(rows 1.., columns - c)``,
    memoising the lower-right row determinants by their column set.
    """
    n = m.rows
    if n != m.cols and n:
        raise NotSquare(f"{m.rows}x{m.cols}")
    sig = m.sig
    memo: Dict[FrozenSet[int], WeylElement] = {}

    def sub(row: int, cols: Tuple[int, ...]) -> WeylElement:
        if row == n:
            return sig.one()
        key = frozenset(cols)
        got = memo.get(key)
        if got is not None:
            return got
        acc = sig.zero()
        for pos, c in enumerate(cols):
            a = m.entries[row][c]
            if not a:
                continue
            rest = cols[:pos] + cols[pos + 1:]
            minor = sub(row + 1, rest)
            if not minor:
                continue
            term = a * minor
            acc = acc - term if pos % 2 else acc + term
        memo[key] = acc
        return acc

    return sub(0, tuple(range(n)))


def perm_sign(sigma: Sequence[int]) -> int:
    sigma = list(sigma)
    if sorted(sigma) != list(range(len(sigma))):
        raise BadPermutation(f"{sigma} is not a permutation of 0..{len(sigma) - 1}")
    sign = 1
    seen = [False] * len(sigma)
    for i in range(len(sigma)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = sigma[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def rdet_naive(m: WeylMatrix) -> WeylElement:
    """Plain permutation sum, used as a reference for :func:`rdet`."""
    n = m.rows
    if n != m.cols:
        raise NotSquare(f"{m.rows}x{m.cols}")
    acc = m.sig.zero()
    for sigma in permutations(range(n)):
        prod = m.sig.one()
        for i in range(n):
            prod = prod * m.entries[i][sigma[i]]
        acc = acc + prod if perm_sign(sigma) > 0 else acc - prod
    return acc


def row_permute(m: WeylMatrix, sigma: Sequence[int]) -> WeylMatrix:
    """New matrix whose row ``i`` is row ``sigma[i]`` of ``m`` (0-based)."""
    if len(sigma) != m.rows:
        raise BadPermutation("permutation length differs from row count")
    perm_sign(sigma)
    return WeylMatrix(m.sig, [list(m.entries[s]) for s in sigma])


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _inv_linear(root: Fraction, var: str) -> RatFunc:
    return RatFunc.inv_upoly(linear(root), var)


def build_G(d: ProblemData, sig: Optional[AlgebraSignature] = None) -> WeylMatrix:
    """``G[i][j] = (pu - lam_i) delta_ij - sum_a x[j,a] p[i,a] / (u - z_a)``."""
    sig = sig or d.sig
    rows = []
    for i in range(1, d.M + 1):
        row = []
        for j in range(1, d.M + 1):
            e = sig.zero()
            if i == j:
                e = sig.pu() - d.lam[i - 1]
            for a in range(1, d.N + 1):
                e = e - (sig.x(j, a) * sig.p(i, a)).scale(_inv_linear(d.z[a - 1], "u"))
            row.append(e)
        rows.append(row)
    return WeylMatrix(sig, rows)


def build_H(d: ProblemData, sig: Optional[AlgebraSignature] = None) -> WeylMatrix:
    """``H[i][j] = (pv - z_i) delta_ij - sum_b x[b,j] p[b,i] / (v - lam_b)``."""
    sig = sig or d.sig
    rows = []
    for i in range(1, d.N + 1):
        row = []
        for j in range(1, d.N + 1):
            e = sig.zero()
            if i == j:
                e = sig.pv() - d.z[i - 1]
            for b in range(1, d.M + 1):
                e = e - (sig.x(b, j) * sig.p(b, i)).scale(_inv_linear(d.lam[b - 1], "v"))
            row.append(e)
        rows.append(row)
    return WeylMatrix(sig, rows)


def build_W(d: ProblemData, sig: Optional[AlgebraSignature] = None) -> WeylMatrix:
    """Block matrix ``[[u - Z, X^t], [P, pu - Lambda]]`` of size ``N + M``."""
    sig = sig or d.sig
    size = d.M + d.N
    rows = [[sig.zero() for _ in range(size)] for _ in range(size)]
    for a in range(d.N):
        rows[a][a] = sig.u() - d.z[a]
        for j in range(d.M):
            rows[a][d.N + j] = sig.x(j + 1, a + 1)
    for i in range(d.M):
        for a in range(d.N):
            rows[d.N + i][a] = sig.p(i + 1, a + 1)
        rows[d.N + i][d.N + i] = sig.pu() - d.lam[i]
    return WeylMatrix(sig, rows)


def z_product(d: ProblemData, sig: Optional[AlgebraSignature] = None, var: str = "u") -> WeylElement:
    """``prod_a (u - z_a)`` (or ``prod_b (v - lam_b)`` with ``var="v"``)."""
    sig = sig or d.sig
    roots = d.z if var == "u" else d.lam
    return sig.scalar(RatFunc.from_upoly(prod_linear(roots), var))


def _minor(sig: AlgebraSignature, gen: Callable[[int, int], WeylElement],
           rows: Sequence[int], cols: Sequence[int]) -> WeylElement:
    # entries of a pure-x or pure-p minor commute, so rdet is the ordinary det
    return rdet(WeylMatrix(sig, [[gen(a, b) for b in cols] for a in rows]))


def subset_pairs(M: int, N: int):
    """All ``(A, B)`` with ``A`` in 1..M, ``B`` in 1..N, ``|A| = |B|``, sorted."""
    for k in range(min(M, N) + 1):
        for A in combinations(range(1, M + 1), k):
            for B in combinations(range(1, N + 1), k):
                yield A, B


def theorem_main_rhs(d: ProblemData, sig: Optional[AlgebraSignature] = None) -> WeylElement:
    """Subset expansion of ``prod_a (u - z_a) rdet(G)``.

    Each summand is ``(-1)^|A| prod_{a not in B}(u - z_a)
    prod_{b not in A}(pu - lam_b) det(x_AB) det(p_AB)``, multiplied in that
    order.
    """
    sig = sig or d.sig
    acc = sig.zero()
    for A, B in subset_pairs(d.M, d.N):
        zf = sig.scalar(RatFunc.from_upoly(
            prod_linear(d.z[a - 1] for a in range(1, d.N + 1) if a not in B)))
        term = zf
        for b in range(1, d.M + 1):
            if b not in A:
                term = term * (sig.pu() - d.lam[b - 1])
        term = term * _minor(sig, sig.x, A, B) * _minor(sig, sig.p, A, B)
        acc = acc - term if len(A) % 2 else acc + term
    return acc


def capelli_matrix(M: int, N: int, s, sig: AlgebraSignature) -> WeylMatrix:
    """``(s - h(M - i)) delta_ij - sum_a x[j,a] p[i,a]``, the alpha_s image of
    the rewritten ``u^M rdet(G)`` at ``z = lam = 0``."""
    s = as_rat(s)
    rows = []
    for i in range(1, M + 1):
        row = []
        for j in range(1, M + 1):
            e = sig.scalar(s - sig.h * (M - i)) if i == j else sig.zero()
            for a in range(1, N + 1):
                e = e - sig.x(j, a) * sig.p(i, a)
            row.append(e)
        rows.append(row)
    return WeylMatrix(sig, rows)


def capelli_u_matrix(M: int, N: int, sig: AlgebraSignature) -> WeylMatrix:
    """``(u pu - h(M - i)) delta_ij - sum_a x[j,a] p[i,a]``; its row
    determinant equals ``u^M rdet(G)`` at ``z = lam = 0``."""
    rows = []
    upu = sig.u() * sig.pu()
    for i in range(1, M + 1):
        row = []
        for j in range(1, M + 1):
            e = upu - sig.h * (M - i) if i == j else sig.zero()
            for a in range(1, N + 1):
                e = e - sig.x(j, a) * sig.p(i, a)
            row.append(e)
        rows.append(row)
    return WeylMatrix(sig, rows)


def capelli_rhs(M: int, N: int, s, sig: AlgebraSignature) -> WeylElement:
    """``sum (-1)^|A| prod_{b=0}^{M-|A|-1} (s - b h) det(x_AB) det(p_AB)``."""
    s = as_rat(s)
    acc = sig.zero()
    for A, B in subset_pairs(M, N):
        falling = Fraction(1)
        for b in range(M - len(A)):
            falling *= s - b * sig.h
        if not falling:
            continue
        term = (_minor(sig, sig.x, A, B) * _minor(sig, sig.p, A, B)).scale(falling)
        acc = acc - term if len(A) % 2 else acc + term
    return acc


def classical_capelli_matrix(M: int, sig: AlgebraSignature) -> WeylMatrix:
    """``sum_a x[j,a] p[i,a] + h(M - i) delta_ij`` for ``M = N``."""
    rows = []
    for i in range(1, M + 1):
        row = []
        for j in range(1, M + 1):
            e = sig.scalar(sig.h * (M - i)) if i == j else sig.zero()
            for a in range(1, M + 1):
                e = e + sig.x(j, a) * sig.p(i, a)
            row.append(e)
        rows.append(row)
    return WeylMatrix(sig, rows)


def det_x(sig: AlgebraSignature) -> WeylElement:
    return _minor(sig, sig.x, range(1, sig.M + 1), range(1, sig.N + 1))


def det_p(sig: AlgebraSignature) -> WeylElement:
    return _minor(sig, sig.p, range(1, sig.M + 1), range(1, sig.N + 1))
