import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from capelli.exactarith import RatFunc, linear
from capelli.ncdet import (BadPermutation, NotSquare, ProblemData, WeylMatrix, build_G, build_H,
                           build_W, capelli_matrix, capelli_rhs, perm_sign, random_problem, rdet,
                           rdet_naive, row_permute, subset_pairs, theorem_main_rhs)
from capelli.weylcore import AlgebraSignature

S = AlgebraSignature(2, 2, 1)


def inv_lin(z, var="u"):
    return RatFunc.inv_upoly(linear(z), var)


def test_rdet_examples():
    x = S.x
    assert rdet(WeylMatrix(S, [[x(1, 1), x(1, 2)], [x(2, 1), x(2, 2)]])) == \
        x(1, 1) * x(2, 2) - x(1, 2) * x(2, 1)
    m = WeylMatrix(S, [[S.pu(), x(1, 1)], [S.p(1, 1), S.u()]])
    assert rdet(m) == S.u() * S.pu() + 1 - x(1, 1) * S.p(1, 1)
    a = S.pu() * S.x(2, 2)
    assert rdet(WeylMatrix(S, [[a]])) == a
    with pytest.raises(NotSquare):
        rdet(WeylMatrix(S, [[a, a]]))


def test_build_G_entries():
    d = ProblemData(1, 1, (Fraction(2),), (Fraction(3),))
    sig = d.sig
    G = build_G(d)
    assert G[0, 0] == sig.pu() - 3 - (sig.x(1, 1) * sig.p(1, 1)).scale(inv_lin(2))
    d = ProblemData(2, 1, (Fraction(2),), (0, 1))
    assert build_G(d)[0, 1] == -(d.sig.x(2, 1) * d.sig.p(1, 1)).scale(inv_lin(2))
    d = ProblemData(2, 2, (0, 1), (0, 5))
    s = d.sig
    assert build_G(d)[1, 1] == s.pu() - 5 - (s.x(2, 1) * s.p(2, 1)).scale(inv_lin(0)) \
        - (s.x(2, 2) * s.p(2, 2)).scale(inv_lin(1))


def test_build_H_entries():
    d = ProblemData(2, 1, (Fraction(4),), (Fraction(1), Fraction(-2)))
    s = d.sig
    expected = s.pv() - 4 - (s.x(1, 1) * s.p(1, 1)).scale(inv_lin(1, "v")) \
        - (s.x(2, 1) * s.p(2, 1)).scale(inv_lin(-2, "v"))
    assert build_H(d)[0, 0] == expected


def test_build_W_blocks():
    d = ProblemData(2, 1, (Fraction(4),), (Fraction(1), Fraction(-2)))
    s = d.sig
    W = build_W(d)
    assert (W.rows, W.cols) == (3, 3)
    assert [W[0, 1], W[0, 2]] == [s.x(1, 1), s.x(2, 1)]
    assert [W[1, 1], W[2, 2]] == [s.pu() - 1, s.pu() + 2]
    assert W[0, 0] == s.u() - 4


def test_theorem_main_rhs_small():
    d = ProblemData(1, 2, (Fraction(1), Fraction(2)), (Fraction(3),))
    s = d.sig
    u, pu = s.u(), s.pu()
    expected = (u - 1) * (u - 2) * (pu - 3) - (u - 2) * s.x(1, 1) * s.p(1, 1) \
        - (u - 1) * s.x(1, 2) * s.p(1, 2)
    assert theorem_main_rhs(d) == expected
    assert len(list(subset_pairs(2, 2))) == 6


@pytest.mark.parametrize("M,N", [(1, 1), (2, 1), (2, 2), (3, 2)])
def test_rdet_matches_naive(M, N):
    d = random_problem(M, N, Fraction(2, 3), random.Random(M * 10 + N))
    G = build_G(d)
    assert rdet(G) == rdet_naive(G)


def test_row_permute():
    d = random_problem(3, 1, 1, random.Random(3))
    G = build_G(d)
    assert row_permute(G, (0, 1, 2)) == G
    assert rdet(row_permute(G, (1, 2, 0))) == rdet(G)
    assert perm_sign((1, 0, 2)) == -1 and perm_sign((1, 2, 0)) == 1
    with pytest.raises(BadPermutation):
        row_permute(G, (0, 0, 1))


@settings(max_examples=20, deadline=None)
@given(st.permutations([0, 1, 2]), st.integers(0, 10 ** 6))
def test_row_sign_on_G(sigma, seed):
    d = random_problem(3, 2, Fraction(7, 5), random.Random(seed))
    G = build_G(d)
    base = rdet(G)
    assert rdet(row_permute(G, sigma)) == (base if perm_sign(sigma) > 0 else -base)


def test_row_sign_is_special_to_G():
    # for a generic matrix with non-commuting entries the sign rule breaks
    x, p, u, pu = S.x, S.p, S.u(), S.pu()
    m = WeylMatrix(S, [[pu, x(1, 1), p(1, 2)], [p(1, 1), u * pu, x(1, 2)],
                       [x(2, 1) * p(2, 1), u, pu * pu]])
    assert rdet(row_permute(m, (0, 2, 1))) != -rdet(m)


@settings(max_examples=30, deadline=None)
@given(st.fractions(-3, 3, max_denominator=3), st.integers(0, 1))
def test_row_multilinearity(c, row):
    x, p, u, pu = S.x, S.p, S.u(), S.pu()
    rows = [[pu, x(1, 1)], [p(1, 1), u]]
    extra = [u * u, x(2, 2) * pu]
    summed = [list(r) for r in rows]
    summed[row] = [a + c * b for a, b in zip(rows[row], extra)]
    replaced = [list(r) for r in rows]
    replaced[row] = extra
    lhs = rdet(WeylMatrix(S, summed))
    rhs = rdet(WeylMatrix(S, rows)) + rdet(WeylMatrix(S, replaced)).scale(RatFunc.const(c))
    assert lhs == rhs


def test_commutative_det_against_sympy():
    # at h = 0 the row determinant is the ordinary determinant of W
    d = ProblemData(2, 2, (Fraction(1), Fraction(-1, 2)), (Fraction(3), Fraction(2, 3)), 0)
    W = build_W(d)
    u, pu = sympy.symbols("u pu")
    xs = {(i, j): sympy.Symbol(f"x{i}{j}") for i in (1, 2) for j in (1, 2)}
    ps = {(i, j): sympy.Symbol(f"p{i}{j}") for i in (1, 2) for j in (1, 2)}
    z = [sympy.Rational(1), sympy.Rational(-1, 2)]
    lam = [sympy.Rational(3), sympy.Rational(2, 3)]
    A = sympy.diag(u - z[0], u - z[1])
    B = sympy.Matrix(2, 2, lambda a, i: xs[(i + 1, a + 1)])
    C = sympy.Matrix(2, 2, lambda i, a: ps[(i + 1, a + 1)])
    D = sympy.diag(pu - lam[0], pu - lam[1])
    oracle = sympy.expand(sympy.Matrix(sympy.BlockMatrix([[A, B], [C, D]])).det())
    ours = rdet(W)
    total = 0
    for key, c in ours.items():
        assert c.is_polynomial()
        term = sum(sympy.Rational(v.numerator, v.denominator) * u ** i for (i, _), v in c.num.items())
        xe, pe = key[:4], key[4:8]
        for n, (i, j) in enumerate(sorted(xs)):
            term *= xs[(i, j)] ** xe[n] * ps[(i, j)] ** pe[n]
        total += term * pu ** key[8]
    assert sympy.expand(total - oracle) == 0


def test_capelli_rhs_h0():
    sig = AlgebraSignature(2, 2, 0)
    s = Fraction(3)
    expansion = capelli_rhs(2, 2, s, sig)
    assert expansion == rdet(capelli_matrix(2, 2, s, sig))
