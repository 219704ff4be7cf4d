"""Gaudin transfer matrices on weight spaces of ``C[x_ij]``.

Both the gl_M action ``E_ij^(a) -> x[i,a] d/dx[j,a]`` and the gl_N action
``E_ij^(a) -> x[a,i] d/dx[a,j]`` act on the same polynomial space, so a
weight space is spanned by the monomials ``prod x_ij^t_ij`` whose exponent
table ``t`` has row sums ``m`` and column sums ``n``.  Operators are exact
rational matrices in that monomial basis.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exactarith import PoleAtPoint, RatFunc, as_rat, prod_linear
from .idsuite import CheckReport
from .ncdet import ProblemData, build_G, build_H, rdet, z_product
from .weylcore import AlgebraSignature, WeylElement, strip_coeff_grid

GL_M = "gl_M"
GL_N = "gl_N"


class WeightMismatch(ValueError):
    pass


class NotWeightPreserving(ValueError):
    pass


class ContainsFormalVariable(ValueError):
    pass


class RepeatedParameters(ValueError):
    pass


class DimensionGuard(RuntimeError):
    """Weight space larger than the configured cap."""


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------

Table = Tuple[int, ...]


@dataclass(frozen=True)
class WeightBasis:
    M: int
    N: int
    m: Tuple[int, ...]
    n: Tuple[int, ...]
    tables: Tuple[Table, ...]

    @property
    def dim(self) -> int:
        return len(self.tables)

    def index(self) -> Dict[Table, int]:
        return {t: i for i, t in enumerate(self.tables)}

    def grid(self, k: int) -> List[List[int]]:
        t = self.tables[k]
        return [list(t[i * self.N:(i + 1) * self.N]) for i in range(self.M)]


def _compositions(total: int, caps: Sequence[int]):
    if not caps:
        if total == 0:
            yield ()
        return
    first = caps[0]
    rest_cap = sum(caps[1:])
    for k in range(min(total, first), max(0, total - rest_cap) - 1, -1):
        for tail in _compositions(total - k, caps[1:]):
            yield (k,) + tail


def enumerate_basis(m: Sequence[int], n: Sequence[int]) -> WeightBasis:
    """All nonnegative integer ``M x N`` tables with row sums ``m`` and
    column sums ``n``, flattened row-major, in decreasing lex order (so the
    diagonal-heavy table ``x11 x22 ...`` comes first)."""
    m, n = tuple(int(a) for a in m), tuple(int(b) for b in n)
    if any(a < 0 for a in m + n):
        raise WeightMismatch("weights must be nonnegative")
    if sum(m) != sum(n):
        raise WeightMismatch(f"sum(m) = {sum(m)} != sum(n) = {sum(n)}")
    out: List[Table] = []

    def rec(row: int, cols_left: Tuple[int, ...], acc: Table):
        if row == len(m):
            if not any(cols_left):
                out.append(acc)
            return
        for r in _compositions(m[row], cols_left):
            rec(row + 1, tuple(c - x for c, x in zip(cols_left, r)), acc + r)

    rec(0, n, ())
    out.sort(reverse=True)
    return WeightBasis(len(m), len(n), m, n, tuple(out))


# ---------------------------------------------------------------------------
# exact operator matrices
# ---------------------------------------------------------------------------

class OpMatrix:
    """Exact square matrix; column ``j`` is the image of basis vector ``j``."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        arr = np.array(entries, dtype=object)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("OpMatrix must be square")
        self.entries = arr

    @classmethod
    def zeros(cls, dim: int) -> "OpMatrix":
        return cls(np.full((dim, dim), Fraction(0), dtype=object))

    @classmethod
    def identity(cls, dim: int) -> "OpMatrix":
        out = cls.zeros(dim)
        for i in range(dim):
            out.entries[i, i] = Fraction(1)
        return out

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __add__(self, other: "OpMatrix") -> "OpMatrix":
        return OpMatrix(self.entries + other.entries)

    def __sub__(self, other: "OpMatrix") -> "OpMatrix":
        return OpMatrix(self.entries - other.entries)

    def __neg__(self) -> "OpMatrix":
        return OpMatrix(-self.entries)

    def __mul__(self, c) -> "OpMatrix":
        return OpMatrix(self.entries * as_rat(c))

    __rmul__ = __mul__

    def __matmul__(self, other: "OpMatrix") -> "OpMatrix":
        if self.dim == 0:
            return self
        return OpMatrix(self.entries.dot(other.entries))

    def __eq__(self, other) -> bool:
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return self.dim == other.dim and bool((self.entries == other.entries).all())

    __hash__ = None

    def is_zero(self) -> bool:
        return not any(x != 0 for x in self.entries.flat)

    def trace(self) -> Fraction:
        return sum((self.entries[i, i] for i in range(self.dim)), Fraction(0))

    def to_float(self) -> np.ndarray:
        return self.entries.astype(float)

    def tolist(self) -> List[List[str]]:
        return [[str(x) for x in row] for row in self.entries]

    def __repr__(self) -> str:
        return f"OpMatrix({self.tolist()})"


def commutator(a: OpMatrix, b: OpMatrix) -> OpMatrix:
    return a @ b - b @ a


def realize(elem: WeylElement, basis: WeightBasis) -> OpMatrix:
    """Matrix of ``x -> multiplication, p -> d/dx`` on the monomial basis.

    ``elem`` must live in an ``h = 1`` algebra of the basis shape and be free
    of ``u, v, pu, pv``.
    """
    sig = elem.sig
    if (sig.M, sig.N) != (basis.M, basis.N):
        raise ValueError("element and basis shapes differ")
    if sig.h != 1:
        raise ValueError("realization needs h = 1")
    n = sig.nvars
    idx = basis.index()
    out = OpMatrix.zeros(basis.dim)
    ent = out.entries
    terms = []
    for key, c in elem.terms.items():
        if key[2 * n] or key[2 * n + 1] or not c.is_constant():
            raise ContainsFormalVariable(f"term {c} with key {key} involves u, v, pu or pv")
        alpha, beta = key[:n], key[n:2 * n]
        shift = [alpha[q] - beta[q] for q in range(n)]
        rows_ok = all(sum(shift[i * sig.N:(i + 1) * sig.N]) == 0 for i in range(sig.M))
        cols_ok = all(sum(shift[j::sig.N]) == 0 for j in range(sig.N))
        if not (rows_ok and cols_ok):
            raise NotWeightPreserving(f"monomial {key} shifts the weight")
        terms.append((alpha, beta, c.constant_value()))
    for col, t in enumerate(basis.tables):
        for alpha, beta, c in terms:
            w = c
            for q in range(n):
                if beta[q]:
                    if t[q] < beta[q]:
                        w = 0
                        break
                    w = w * (factorial(t[q]) // factorial(t[q] - beta[q]))
            if w:
                new = tuple(t[q] - beta[q] + alpha[q] for q in range(n))
                row = idx[new]
                ent[row, col] = ent[row, col] + w
    return out


# ---------------------------------------------------------------------------
# gl generators and Hamiltonians
# ---------------------------------------------------------------------------

def _check_side(side: str) -> None:
    if side not in (GL_M, GL_N):
        raise ValueError(f"side must be {GL_M!r} or {GL_N!r}")


def gen_E(sig: AlgebraSignature, i: int, j: int, a: int, side: str = GL_M) -> WeylElement:
    """``E_ij^(a)`` under pi^(M) (``x[i,a] p[j,a]``) or pi^(N) (``x[a,i] p[a,j]``)."""
    if side == GL_M:
        return sig.x(i, a) * sig.p(j, a)
    return sig.x(a, i) * sig.p(a, j)


def _side_params(d: ProblemData, side: str):
    """(rank, number of sites, site parameters, rank parameters)."""
    _check_side(side)
    if side == GL_M:
        return d.M, d.N, d.z, d.lam
    return d.N, d.M, d.lam, d.z


def _require_distinct(values: Sequence[Fraction], name: str) -> None:
    if len(set(values)) != len(values):
        raise RepeatedParameters(f"{name} entries must be pairwise distinct: {list(map(str, values))}")


def gaudin_element(d: ProblemData, a: int, side: str = GL_M) -> WeylElement:
    """``H_a = sum_{b != a} Omega^(ab)/(z_a - z_b) + sum_b lam_b E_bb^(a)``.

    On ``side=gl_N`` this is ``H_a(N, M, lam, z)`` under pi^(N).
    """
    rank, sites, zs, lams = _side_params(d, side)
    if not 1 <= a <= sites:
        raise IndexError(f"site index {a} outside 1..{sites}")
    _require_distinct(zs, "site parameter")
    sig = AlgebraSignature(d.M, d.N, 1)
    out = sig.zero()
    for b in range(1, sites + 1):
        if b == a:
            continue
        omega = sig.zero()
        for i in range(1, rank + 1):
            for j in range(1, rank + 1):
                omega = omega + gen_E(sig, i, j, a, side) * gen_E(sig, j, i, b, side)
        out = out + omega.scale(Fraction(1) / (zs[a - 1] - zs[b - 1]))
    for b in range(1, rank + 1):
        out = out + gen_E(sig, b, b, a, side).scale(lams[b - 1])
    return out


def dynamical_element(d: ProblemData, a: int, side: str = GL_M) -> WeylElement:
    """``H^v_a = sum_{b != a} [E_ab E_ba - E_aa]/(lam_a - lam_b) + sum_b z_b E_aa^(b)``
    with ``E_ij = sum_sites E_ij^(site)``."""
    rank, sites, zs, lams = _side_params(d, side)
    if not 1 <= a <= rank:
        raise IndexError(f"index {a} outside 1..{rank}")
    _require_distinct(lams, "rank parameter")
    sig = AlgebraSignature(d.M, d.N, 1)

    def total(i, j):
        acc = sig.zero()
        for s in range(1, sites + 1):
            acc = acc + gen_E(sig, i, j, s, side)
        return acc

    out = sig.zero()
    Eaa = total(a, a)
    for b in range(1, rank + 1):
        if b == a:
            continue
        piece = total(a, b) * total(b, a) - Eaa
        out = out + piece.scale(Fraction(1) / (lams[a - 1] - lams[b - 1]))
    for s in range(1, sites + 1):
        out = out + gen_E(sig, a, a, s, side).scale(zs[s - 1])
    return out


def gaudin_hamiltonian(d: ProblemData, basis: WeightBasis, a: int, side: str = GL_M) -> OpMatrix:
    return realize(gaudin_element(d, a, side), basis)


def dynamical_hamiltonian(d: ProblemData, basis: WeightBasis, a: int, side: str = GL_M) -> OpMatrix:
    return realize(dynamical_element(d, a, side), basis)


# ---------------------------------------------------------------------------
# transfer matrices
# ---------------------------------------------------------------------------

@dataclass
class TransferFamily:
    """Cleared transfer-matrix coefficients on one weight space.

    ``cleared_ops[i - 1][k]`` is the coefficient of ``t^k`` in
    ``G~_i(t) prod (t - c)^i`` (``t = u``, ``c = z`` on the gl_M side;
    ``t = v``, ``c = lam`` on the gl_N side).  ``A_grid[(a, b)]`` is the
    operator multiplying ``u^a d^b/du^b`` (gl_M) or ``v^b d^a/dv^a`` (gl_N)
    in ``prod (t - c) rdet``.
    """

    basis: WeightBasis
    side: str
    data: ProblemData
    cleared_ops: List[List[OpMatrix]]
    A_grid: Dict[Tuple[int, int], OpMatrix]
    poles: Tuple[Fraction, ...] = ()

    @property
    def order(self) -> int:
        return len(self.cleared_ops)

    def degree(self, i: int) -> int:
        return len(self.cleared_ops[i - 1]) - 1

    def evaluate(self, i: int, t) -> OpMatrix:
        """``G^_i(t)`` at a rational point (Horner)."""
        t = as_rat(t)
        coeffs = self.cleared_ops[i - 1]
        acc = OpMatrix.zeros(self.basis.dim)
        for c in reversed(coeffs):
            acc = acc * t + c
        return acc

    def generators(self) -> List[OpMatrix]:
        """All coefficient operators (generators of the Bethe subalgebra image)."""
        return [c for coeffs in self.cleared_ops for c in coeffs]


def transfer_family(d: ProblemData, basis: WeightBasis, side: str = GL_M,
                    require_distinct: bool = True) -> TransferFamily:
    _check_side(side)
    if (basis.M, basis.N) != (d.M, d.N):
        raise ValueError("basis shape differs from problem shape")
    rank, _, zs, lams = _side_params(d, side)
    if require_distinct:
        _require_distinct(d.z, "z")
        _require_distinct(d.lam, "lambda")
    d1 = d.with_h(1)
    sig = d1.sig
    var = "u" if side == GL_M else "v"
    mom = 2 * sig.nvars + (0 if side == GL_M else 1)
    R = rdet(build_G(d1, sig) if side == GL_M else build_H(d1, sig))

    by_power: Dict[int, Dict] = {}
    for key, c in R.terms.items():
        k = list(key)
        power = k[mom]
        k[mom] = 0
        by_power.setdefault(power, {})[tuple(k)] = c
    top = WeylElement(sig, by_power.get(rank, {}))
    assert top == sig.one(), "rdet must be monic in the momentum"

    cleared: List[List[OpMatrix]] = []
    for i in range(1, rank + 1):
        coeff = WeylElement(sig, by_power.get(rank - i, {}))
        clearing = RatFunc.from_upoly(prod_linear(zs, i), var)
        cleared_elem = coeff.scale(clearing)
        grid = strip_coeff_grid(cleared_elem, var) if cleared_elem else {}
        deg = max((k[0] for k in grid), default=0)
        ops = [OpMatrix.zeros(basis.dim) for _ in range(deg + 1)]
        for (e, _), el in grid.items():
            ops[e] = realize(el, basis)
        cleared.append(ops)

    total = z_product(d1, sig, var) * R
    A_grid: Dict[Tuple[int, int], OpMatrix] = {}
    for (tdeg, mdeg), el in strip_coeff_grid(total, var).items():
        key = (tdeg, mdeg) if side == GL_M else (mdeg, tdeg)
        A_grid[key] = realize(el, basis)
    return TransferFamily(basis, side, d, cleared, A_grid, tuple(zs))


def certifying_points(tf: TransferFamily, other: Optional[TransferFamily] = None) -> List[Tuple[Fraction, Fraction]]:
    """Grid ``S x S`` with ``|S| = max degree + 1`` avoiding the poles."""
    other = other or tf
    deg = max(max(tf.degree(i) for i in range(1, tf.order + 1)),
              max(other.degree(i) for i in range(1, other.order + 1)))
    bad = set(tf.poles) | set(other.poles)
    pts: List[Fraction] = []
    k = 0
    while len(pts) < deg + 1:
        cand = Fraction(2 * k + 1, 3)
        k += 1
        if cand not in bad:
            pts.append(cand)
    return [(a, b) for a in pts for b in pts]


def check_commutativity(tf: TransferFamily, sample_points: Sequence[Tuple], other: Optional[TransferFamily] = None) -> CheckReport:
    """``[G^_i(u0), G^_j(v0)] = 0`` for every ``i, j`` and sampled pair.

    ``other`` supplies the second factor's family (defaults to ``tf``); a
    family built with different parameters gives the negative control.
    """
    t0 = time.perf_counter()
    other = other or tf
    poles = set(tf.poles) | set(other.poles)
    params = tf.data.to_dict()
    params.update(side=tf.side, m=list(tf.basis.m), n=list(tf.basis.n),
                  points=len(sample_points))
    cache_a: Dict[Tuple[int, Fraction], OpMatrix] = {}
    cache_b: Dict[Tuple[int, Fraction], OpMatrix] = {}
    for u0, v0 in sample_points:
        u0, v0 = as_rat(u0), as_rat(v0)
        if u0 in poles or v0 in poles:
            raise PoleAtPoint(f"sample point ({u0}, {v0}) hits a pole")
        for i in range(1, tf.order + 1):
            A = cache_a.setdefault((i, u0), tf.evaluate(i, u0))
            for j in range(1, other.order + 1):
                B = cache_b.setdefault((j, v0), other.evaluate(j, v0))
                C = commutator(A, B)
                if not C.is_zero():
                    return CheckReport("transfer_commutativity", params, False,
                                       first_discrepancy=[f"[G{i}({u0}), G{j}({v0})]",
                                                          str(C.tolist())],
                                       wall_time_ms=int((time.perf_counter() - t0) * 1000))
    return CheckReport("transfer_commutativity", params, True,
                       wall_time_ms=int((time.perf_counter() - t0) * 1000),
                       details={"basis_dim": tf.basis.dim})


def check_hamiltonian_duality(d: ProblemData, m: Sequence[int], n: Sequence[int]) -> CheckReport:
    """Gaudin and dynamical Hamiltonians swap under the duality."""
    t0 = time.perf_counter()
    _require_distinct(d.z, "z")
    _require_distinct(d.lam, "lambda")
    basis = enumerate_basis(m, n)
    params = d.to_dict()
    params.update(m=list(basis.m), n=list(basis.n))
    for a in range(1, d.N + 1):
        left = gaudin_hamiltonian(d, basis, a, GL_M)
        right = dynamical_hamiltonian(d, basis, a, GL_N)
        if left != right:
            return CheckReport("hamiltonian_duality", params, False,
                               first_discrepancy=[f"H_{a} = {left.tolist()}",
                                                  f"Hdyn_{a} dual = {right.tolist()}"],
                               wall_time_ms=int((time.perf_counter() - t0) * 1000))
    for b in range(1, d.M + 1):
        left = dynamical_hamiltonian(d, basis, b, GL_M)
        right = gaudin_hamiltonian(d, basis, b, GL_N)
        if left != right:
            return CheckReport("hamiltonian_duality", params, False,
                               first_discrepancy=[f"Hdyn_{b} = {left.tolist()}",
                                                  f"H_{b} dual = {right.tolist()}"],
                               wall_time_ms=int((time.perf_counter() - t0) * 1000))
    return CheckReport("hamiltonian_duality", params, True,
                       wall_time_ms=int((time.perf_counter() - t0) * 1000),
                       details={"basis_dim": basis.dim})


def check_theorem_dual(d: ProblemData, m: Sequence[int], n: Sequence[int]) -> CheckReport:
    """``A_ab^(M) = A_ab^(N)`` for every ``0 <= a <= N``, ``0 <= b <= M``."""
    t0 = time.perf_counter()
    basis = enumerate_basis(m, n)
    tfM = transfer_family(d, basis, GL_M)
    tfN = transfer_family(d, basis, GL_N)
    params = d.to_dict()
    params.update(m=list(basis.m), n=list(basis.n))
    zero = OpMatrix.zeros(basis.dim)
    keys = sorted(set(tfM.A_grid) | set(tfN.A_grid))
    outside = [k for k in keys if not (0 <= k[0] <= d.N and 0 <= k[1] <= d.M)]
    for k in keys:
        a = tfM.A_grid.get(k, zero)
        b = tfN.A_grid.get(k, zero)
        if a != b:
            return CheckReport("theorem_dual", params, False, len(tfM.A_grid), len(tfN.A_grid),
                               [f"A{k} gl_M = {a.tolist()}", f"A{k} gl_N = {b.tolist()}"],
                               int((time.perf_counter() - t0) * 1000))
    passed = not outside
    return CheckReport("theorem_dual", params, passed, len(tfM.A_grid), len(tfN.A_grid),
                       None if passed else [f"entries outside grid: {outside}", ""],
                       int((time.perf_counter() - t0) * 1000),
                       {"basis_dim": basis.dim, "grid_entries": len(keys)})
