import random
from fractions import Fraction

import numpy as np
import pytest

from capelli import gaudinrep as gr
from capelli import spectra as sp
from capelli.ncdet import ProblemData, random_problem

CASES = [(2, 2, (1, 1), (1, 1)), (2, 3, (2, 1), (1, 1, 1)), (3, 2, (1, 1, 1), (2, 1))]


def test_identity_and_diagonal():
    js = sp.joint_eigenvectors([gr.OpMatrix.identity(3)])
    assert len(js.vectors) == 3 and all(t == [1.0] for t in js.eigen_tuples)
    diag = gr.OpMatrix.zeros(3)
    for k, val in enumerate((1, 4, -2)):
        diag.entries[k, k] = Fraction(val)
    js = sp.joint_eigenvectors([diag], seed=3)
    recovered = sorted(int(np.argmax(np.abs(w))) for w in js.vectors)
    assert recovered == [0, 1, 2]
    for w in js.vectors:
        assert np.count_nonzero(np.abs(w) > 1e-12) == 1


def test_non_commuting_rejected():
    a, b = gr.OpMatrix.zeros(2), gr.OpMatrix.zeros(2)
    a.entries[0, 1] = Fraction(1)
    b.entries[1, 0] = Fraction(1)
    with pytest.raises(sp.NonCommutingInputs):
        sp.joint_eigenvectors([a, b])


def test_defective_cluster():
    jordan = gr.OpMatrix.identity(2)
    jordan.entries[0, 1] = Fraction(1)
    with pytest.raises(sp.DegenerateCombination):
        sp.joint_eigenvectors([jordan])


def test_hamiltonian_eigenvalues_closed_form():
    z, lam = (Fraction(0), Fraction(1)), (Fraction(0), Fraction(5))
    d = ProblemData(2, 2, z, lam)
    b = gr.enumerate_basis((1, 1), (1, 1))
    js = sp.joint_eigenvectors([gr.gaudin_hamiltonian(d, b, 1)])
    mid = float(lam[0] + lam[1]) / 2
    rad = np.sqrt(float(lam[0] - lam[1]) ** 2 / 4 + 1 / float(z[0] - z[1]) ** 2)
    assert sorted(t[0] for t in js.eigen_tuples) == pytest.approx([mid - rad, mid + rad], abs=1e-12)


@pytest.mark.parametrize("M,N,m,n", CASES)
def test_trace_consistency(M, N, m, n):
    d = random_problem(M, N, 1, random.Random(23))
    b = gr.enumerate_basis(m, n)
    tf = gr.transfer_family(d, b)
    ops = sp.bethe_operators(tf)
    js = sp.joint_eigenvectors(ops, seed=1)
    assert len(js.vectors) == b.dim
    for k, op in enumerate(ops):
        total = sum(t[k] for t in js.eigen_tuples)
        assert abs(total - float(op.trace())) < 1e-8 * max(1.0, np.linalg.norm(op.to_float()))


def test_basis_dim_one_is_simple():
    d = ProblemData(2, 2, (0, 1), (0, 5))
    rep = sp.check_simple_spectrum(d, (2, 0), (1, 1), [0])
    assert rep.passed and rep.details["basis_dim"] == 1


def test_witness_not_simple():
    d = ProblemData(3, 3, (0, 1, 3), (0, 0, 0))
    rep = sp.check_simple_spectrum(d, (1, 1, 1), (1, 1, 1), [0], require_distinct=False)
    assert not rep.passed
    assert rep.details["per_seed"][0]["accepted"] == 6


@pytest.mark.parametrize("M,N,m,n", CASES)
def test_dw_held_out_points(M, N, m, n):
    d = random_problem(M, N, 1, random.Random(31))
    b = gr.enumerate_basis(m, n)
    tf = gr.transfer_family(d, b)
    js = sp.joint_eigenvectors(sp.bethe_operators(tf), seed=0)
    for w in js.vectors:
        ode = sp.build_Dw(tf, w)
        assert ode.numerators[0].tolist() == [1.0]
        assert sp.denominators_divide(ode)
        for t in (Fraction(13, 7), Fraction(-29, 11)):
            for i in range(1, M + 1):
                direct = sp.transfer_eigenvalue(tf, i, w, t)
                den = np.prod([(float(t) - float(c)) ** i for c in tf.poles])
                assert abs(ode.coefficient(i, float(t)) - direct / den) < 1e-7 * max(1, abs(direct / den))


@pytest.mark.parametrize("N,n", [(1, (3,)), (2, (1, 1)), (3, (2, 0, 1))])
def test_rank_one_operator(N, n):
    # gl_1: D_w = d/du - lam - sum_a n_a / (u - z_a)
    z = tuple(Fraction(k, 2) for k in range(N))
    lam = Fraction(3, 2)
    d = ProblemData(1, N, z, (lam,))
    b = gr.enumerate_basis((sum(n),), n)
    tf = gr.transfer_family(d, b)
    ode = sp.build_Dw(tf, np.ones(1))
    t = 2.75
    expected = -float(lam) - sum(k / (t - float(c)) for k, c in zip(n, z))
    assert ode.coefficient(1, t) == pytest.approx(expected, rel=1e-10)
    rep = sp.check_kernel_property(ode, lam, sum(n))
    assert rep.passed


@pytest.mark.parametrize("M,N,m,n", CASES)
def test_eigen_dual_and_kernel(M, N, m, n):
    d = random_problem(M, N, 1, random.Random(41))
    b = gr.enumerate_basis(m, n)
    tfM, tfN = gr.transfer_family(d, b, gr.GL_M), gr.transfer_family(d, b, gr.GL_N)
    js = sp.joint_eigenvectors(sp.bethe_operators(tfM), seed=2)
    for w in js.vectors:
        assert sp.check_eigen_dual(tfM, tfN, w).passed
        ode = sp.build_Dw(tfM, w)
        for i in range(M):
            rep = sp.check_kernel_property(ode, d.lam[i], m[i])
            assert rep.passed and rep.details["nullity"] >= 1
        # a wrong exponent should not admit a quasi-polynomial of that degree
        wrong = sp.check_kernel_property(ode, d.lam[0] + Fraction(1, 3), m[0])
        assert not wrong.passed


def test_kernel_with_vanishing_constant_term():
    # here the lam_1 solution is u e^(lam_1 u): one column of the kernel
    # system is zero up to rounding and must not be rescaled into noise
    d = ProblemData(3, 2, (4, 1), (Fraction(-7, 4), -1, Fraction(-5, 2)))
    b = gr.enumerate_basis((1, 1, 1), (2, 1))
    tf = gr.transfer_family(d, b)
    w = np.array([-2.0, 1.0, 4.0]) / np.sqrt(21.0)
    ode = sp.build_Dw(tf, w)
    for lam in d.lam:
        assert sp.check_kernel_property(ode, lam, 1).passed
