"""Joint spectra of the Bethe family and the scalar operators ``D_w``.

All operators arrive as exact :class:`~capelli.gaudinrep.OpMatrix` values;
floating point is used only from the eigendecomposition onward.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from .exactarith import as_rat, prod_linear, upoly_divmod
from .gaudinrep import (GL_M, OpMatrix, TransferFamily, commutator, enumerate_basis,
                        gaudin_hamiltonian, transfer_family)
from .idsuite import CheckReport
from .ncdet import ProblemData

RESIDUAL_TOL = 1e-9
GAP_TOL = 1e-6
NULLITY_TOL = 1e-8
MAX_ATTEMPTS = 5


class NonCommutingInputs(ValueError):
    pass


class DegenerateCombination(RuntimeError):
    pass


class NotAnEigenvector(ValueError):
    pass


@dataclass
class JointSpectrum:
    basis_dim: int
    vectors: List[np.ndarray]
    eigen_tuples: List[List[complex]]
    residuals: List[List[float]]
    seed_used: int = 0


def _rayleigh(A: np.ndarray, w: np.ndarray):
    Aw = A @ w
    theta = np.vdot(w, Aw) / np.vdot(w, w)
    return theta, float(np.linalg.norm(Aw - theta * w))


def _realify(x):
    x = np.asarray(x)
    if np.iscomplexobj(x) and np.max(np.abs(x.imag), initial=0.0) <= 1e-12 * max(1.0, np.max(np.abs(x))):
        return x.real
    return x


def _normalize(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    # fix the phase so the largest entry is real positive
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    return _realify(v)


def joint_eigenvectors(ops: Sequence[OpMatrix], tol: float = RESIDUAL_TOL, seed: int = 0,
                       gap_tol: float = GAP_TOL) -> JointSpectrum:
    """Common eigenvectors from a random linear combination of ``ops``.

    Commutativity is verified exactly first.  A combination whose spectrum
    has a cluster tighter than ``gap_tol`` is retried with the next seed, at
    most ``MAX_ATTEMPTS`` times; clusters that persist are treated as joint
    eigenspaces.  A defective cluster raises :class:`DegenerateCombination`.
    """
    ops = list(ops)
    if not ops:
        raise ValueError("no operators given")
    dim = ops[0].dim
    if any(op.dim != dim for op in ops):
        raise ValueError("operators have different dimensions")
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            if not commutator(ops[i], ops[j]).is_zero():
                raise NonCommutingInputs(f"operators {i} and {j} do not commute")
    mats = [op.to_float() for op in ops]
    norms = [np.linalg.norm(A) for A in mats]
    scaled = [A / n for A, n in zip(mats, norms) if n > 0]
    if not scaled:
        scaled = [np.zeros((dim, dim))]

    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng(seed + attempt)
        coeffs = rng.uniform(-1.0, 1.0, size=len(scaled))
        C = sum(c * A for c, A in zip(coeffs, scaled))
        if dim == 1:
            vals, vecs = np.array([C[0, 0]]), np.ones((1, 1))
        else:
            vals, vecs = np.linalg.eig(C)
        clusters = _clusters(vals, gap_tol)
        if all(len(c) == 1 for c in clusters) or attempt == MAX_ATTEMPTS - 1:
            break
    # a cluster that survives every seed is a genuine joint degeneracy; any
    # basis of the eigenspace then consists of joint eigenvectors
    candidates = []
    for cl in clusters:
        block = vecs[:, cl]
        if len(cl) > 1:
            q, r = np.linalg.qr(block)
            if np.min(np.abs(np.diag(r))) < 1e-8:
                raise DegenerateCombination(
                    f"defective eigenvalue cluster of size {len(cl)} for seeds "
                    f"{seed}..{seed + MAX_ATTEMPTS - 1}")
            block = q
        candidates.extend(block[:, k] for k in range(block.shape[1]))

    vectors, tuples, residuals = [], [], []
    for v in candidates:
        w = _normalize(v)
        thetas, res = [], []
        for A, n in zip(mats, norms):
            th, r = _rayleigh(A, w)
            thetas.append(complex(th) if np.iscomplexobj(th) and abs(np.imag(th)) > 1e-12 else float(np.real(th)))
            res.append(r)
        if all(r < tol * max(n, 1.0) for r, n in zip(res, norms)):
            vectors.append(w)
            tuples.append(thetas)
            residuals.append(res)
    return JointSpectrum(dim, vectors, tuples, residuals, seed + attempt)


def _clusters(vals: np.ndarray, gap_tol: float) -> List[List[int]]:
    """Single-linkage groups of eigenvalue indices closer than ``gap_tol``."""
    parent = list(range(len(vals)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) < gap_tol:
                parent[find(i)] = find(j)
    groups: Dict[int, List[int]] = {}
    for i in range(len(vals)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def bethe_operators(tf: TransferFamily) -> List[OpMatrix]:
    """Nonzero coefficient operators of the cleared transfer matrices."""
    return [op for op in tf.generators() if not op.is_zero()]


def _tuple_distance(a: Sequence, b: Sequence, scales: Sequence[float]) -> float:
    return max(abs(x - y) / s for x, y, s in zip(a, b, scales))


def check_simple_spectrum(d: ProblemData, m: Sequence[int], n: Sequence[int], seeds: Sequence[int],
                          gap_tol: float = GAP_TOL, tol: float = RESIDUAL_TOL,
                          require_distinct: bool = True) -> CheckReport:
    """Joint spectrum of the Bethe family on ``L_n[m]`` is simple for every seed."""
    t0 = time.perf_counter()
    basis = enumerate_basis(m, n)
    tf = transfer_family(d, basis, GL_M, require_distinct=require_distinct)
    ops = bethe_operators(tf)
    hams = [gaudin_hamiltonian(d, basis, a) for a in range(1, d.N + 1)] if len(set(d.z)) == d.N else []
    scales = [max(np.linalg.norm(op.to_float()), 1e-300) for op in ops]
    params = d.to_dict()
    params.update(m=list(basis.m), n=list(basis.n), seeds=list(seeds))
    per_seed = []
    passed = True
    table = None
    for seed in seeds:
        try:
            js = joint_eigenvectors(ops + hams, tol, seed, gap_tol)
        except DegenerateCombination as exc:
            per_seed.append({"seed": seed, "simple": False, "reason": str(exc)})
            passed = False
            continue
        tuples = [t[:len(ops)] for t in js.eigen_tuples]
        dists = [_tuple_distance(tuples[i], tuples[j], scales)
                 for i in range(len(tuples)) for j in range(i + 1, len(tuples))]
        min_gap = min(dists) if dists else float("inf")
        simple = bool(len(tuples) == basis.dim and min_gap > gap_tol)
        passed &= simple
        per_seed.append({"seed": seed, "simple": simple, "accepted": len(tuples),
                         "min_gap": None if min_gap == float("inf") else float(min_gap)})
        if table is None:
            table = [[_jsonable(x) for x in t[len(ops):]] for t in js.eigen_tuples]
    return CheckReport("simple_spectrum", params, passed,
                       first_discrepancy=None if passed else ["joint spectrum not simple", str(per_seed)],
                       wall_time_ms=int((time.perf_counter() - t0) * 1000),
                       details={"basis_dim": basis.dim, "per_seed": per_seed,
                                "gaudin_eigenvalues": table})


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    return float(x)


# ---------------------------------------------------------------------------
# scalar differential operators
# ---------------------------------------------------------------------------

@dataclass
class ScalarODE:
    """``d^M + sum_i G_i(t) d^(M-i)`` with ``G_i = numerators[i] / prod (t - c)^i``.

    ``numerators[0]`` is the constant 1 (monic); coefficient arrays run from
    low to high degree.
    """

    order: int
    poles: Tuple[Fraction, ...]
    numerators: List[np.ndarray]
    den_powers: List[int] = field(default_factory=list)

    def denominator(self, i: int) -> Tuple[Fraction, ...]:
        """Exact ``prod (t - c)^den_powers[i]``."""
        return prod_linear(self.poles, self.den_powers[i])

    def coefficient(self, i: int, t: float) -> complex:
        num = P.polyval(t, self.numerators[i])
        den = np.prod([(t - float(c)) ** self.den_powers[i] for c in self.poles]) if self.poles else 1.0
        return num / den

    def cleared(self) -> List[np.ndarray]:
        """``prod (t - c)^M * coefficient of d^k`` as polynomials, indexed by k."""
        out: List[Optional[np.ndarray]] = [None] * (self.order + 1)
        for i in range(self.order + 1):
            rest = np.array([1.0])
            for c in self.poles:
                rest = P.polymul(rest, P.polypow([-float(c), 1.0], self.order - self.den_powers[i]))
            out[self.order - i] = P.polymul(self.numerators[i], rest)
        return out


def _sample_points(count: int, avoid: Sequence[Fraction]) -> List[Fraction]:
    """Rational approximations of Chebyshev nodes on [-2, 2], nudged off poles."""
    pts: List[Fraction] = []
    bad = set(avoid)
    for k in range(count):
        x = Fraction(2 * np.cos(np.pi * (k + 0.5) / count)).limit_denominator(997)
        while x in bad or x in pts:
            x += Fraction(1, 1009)
        pts.append(x)
    return pts


def transfer_eigenvalue(tf: TransferFamily, i: int, w: np.ndarray, t, tol: float = RESIDUAL_TOL):
    A = tf.evaluate(i, t).to_float()
    theta, r = _rayleigh(A, w)
    if r > tol * max(np.linalg.norm(A), 1.0):
        raise NotAnEigenvector(f"residual {r:.3g} for G{i}({t})")
    return theta


def build_Dw(tf: TransferFamily, w: np.ndarray, tol: float = RESIDUAL_TOL) -> ScalarODE:
    """Scalar operator from the transfer eigenvalues on ``w``.

    Numerators of ``G_i^w`` are recovered by interpolating the Rayleigh
    quotients of ``G^_i(t)`` at ``deg + 1`` rational nodes.
    """
    numerators = [np.array([1.0])]
    for i in range(1, tf.order + 1):
        deg = tf.degree(i)
        pts = _sample_points(deg + 1, tf.poles)
        vals = np.array([transfer_eigenvalue(tf, i, w, t, tol) for t in pts])
        vals = _realify(vals)
        V = np.vander(np.array([float(t) for t in pts]), deg + 1, increasing=True)
        numerators.append(_realify(np.linalg.solve(V, vals)))
    return ScalarODE(tf.order, tf.poles, numerators, list(range(tf.order + 1)))


def denominators_divide(ode: ScalarODE) -> bool:
    """Every coefficient denominator divides ``prod (t - c)^order`` exactly."""
    full = prod_linear(ode.poles, ode.order)
    return all(not upoly_divmod(full, ode.denominator(i))[1] for i in range(ode.order + 1))


def check_eigen_dual(tfM: TransferFamily, tfN: TransferFamily, w: np.ndarray,
                     tol: float = 1e-8) -> CheckReport:
    """Scalars of ``A_ab^(M)`` and ``A_ab^(N)`` on ``w`` agree."""
    t0 = time.perf_counter()
    keys = sorted(set(tfM.A_grid) | set(tfN.A_grid))
    params = tfM.data.to_dict()
    params.update(m=list(tfM.basis.m), n=list(tfM.basis.n))
    dim = tfM.basis.dim
    zero = np.zeros((dim, dim))
    pairs = {}
    bad = None
    for k in keys:
        AM = tfM.A_grid[k].to_float() if k in tfM.A_grid else zero
        AN = tfN.A_grid[k].to_float() if k in tfN.A_grid else zero
        thM, rM = _rayleigh(AM, w)
        thN, rN = _rayleigh(AN, w)
        scale = max(np.linalg.norm(AM), 1.0)
        pairs[f"{k[0]},{k[1]}"] = [_jsonable(complex(thM)) if abs(np.imag(thM)) > 1e-12 else float(np.real(thM)),
                                   _jsonable(complex(thN)) if abs(np.imag(thN)) > 1e-12 else float(np.real(thN))]
        if (rM > tol * scale or rN > tol * scale) and bad is None:
            bad = [f"A{k} not scalar on w", f"residuals {rM:.3g}, {rN:.3g}"]
        if abs(thM - thN) > tol and bad is None:
            bad = [f"A{k}: {thM}", f"{thN}"]
    return CheckReport("eigen_dual", params, bad is None, len(keys), len(keys), bad,
                       int((time.perf_counter() - t0) * 1000), {"scalars": pairs})


def _poly_shift_derivs(Q: Sequence[np.ndarray], lam: float, deg: int) -> np.ndarray:
    """Matrix of ``p -> sum_k Q[k] (d + lam)^k p`` on monomials ``u^0..u^deg``."""
    cols = []
    for j in range(deg + 1):
        basis = np.zeros(j + 1)
        basis[-1] = 1.0
        acc = np.array([0.0])
        for k, Qk in enumerate(Q):
            if Qk is None:
                continue
            # (d + lam)^k u^j = sum_r C(k, r) lam^(k-r) d^r u^j
            shifted = np.array([0.0])
            for r in range(min(k, j) + 1):
                shifted = P.polyadd(shifted, comb(k, r) * lam ** (k - r) * P.polyder(basis, r))
            acc = P.polyadd(acc, P.polymul(Qk, shifted))
        cols.append(acc)
    rows = max(len(c) for c in cols)
    out = np.zeros((rows, deg + 1))
    for j, c in enumerate(cols):
        out[:len(c), j] = c
    return out


def check_kernel_property(ode: ScalarODE, lambda_i, m_i: int, tol: float = NULLITY_TOL) -> CheckReport:
    """``D_w (p e^(lam t)) = 0`` has a polynomial solution ``p`` of degree ``m_i``."""
    t0 = time.perf_counter()
    lam = float(as_rat(lambda_i))
    mat = _poly_shift_derivs(ode.cleared(), lam, m_i)
    norms = np.linalg.norm(mat, axis=0)
    # a column that is zero up to rounding must stay zero, not be blown up
    top = float(np.max(norms)) if norms.size else 0.0
    tiny = norms <= tol * top
    mat = mat.copy()
    mat[:, tiny] = 0.0
    norms[tiny] = max(top, 1.0)
    mat = mat / norms
    sv = np.linalg.svd(mat, compute_uv=False)
    smax = sv[0] if sv.size and sv[0] > 0 else 1.0
    nullity = int(np.sum(sv < tol * smax)) + max(0, (m_i + 1) - mat.shape[0])
    if smax == 0:
        nullity = m_i + 1
    _, _, vh = np.linalg.svd(mat)
    null = vh[-1] / norms
    lead = abs(null[-1]) / max(np.max(np.abs(null)), 1e-300)
    passed = nullity >= 1
    params = {"lambda": str(as_rat(lambda_i)), "m_i": m_i, "order": ode.order}
    return CheckReport("kernel_property", params, passed,
                       first_discrepancy=None if passed else ["no kernel polynomial", f"singular values {sv.tolist()}"],
                       wall_time_ms=int((time.perf_counter() - t0) * 1000),
                       details={"nullity": nullity, "smallest_sv_ratio": float(sv[-1] / smax) if sv.size else 0.0,
                                "leading_coefficient_ratio": float(lead)})
