import random
from fractions import Fraction

import pytest

from capelli import idsuite as ids
from capelli.ncdet import ProblemData, random_problem
from capelli.weylcore import AlgebraSignature, e_map, parse


def test_theorem_main_examples():
    d = ProblemData(1, 1, (Fraction(2),), (Fraction(3),))
    rep = ids.check_theorem_main(d)
    assert rep.passed and rep.first_discrepancy is None
    assert ids.lhs_main(d) == parse(d.sig, "(u - 2)*(pu - 3) - x[1,1]*p[1,1]")
    assert ids.check_theorem_main(ProblemData(2, 2, (0, 1), (0, 5), Fraction(7, 5))).passed


def test_cor_mn_examples():
    d = ProblemData(1, 1, (Fraction(-1),), (Fraction(1, 2),))
    rep = ids.check_cor_mn(d)
    assert rep.passed and rep.lhs_terms == rep.rhs_terms
    assert ids.check_cor_mn(random_problem(2, 1, 1, random.Random(0))).passed


def test_duality_rel_examples():
    d = ProblemData(1, 1, (Fraction(2),), (Fraction(3),))
    assert ids.check_duality_rel(d).passed
    expected = parse(d.sig, "(u - 2)*(v - 3) - x[1,1]*p[1,1]")
    assert e_map(ids.lhs_main(d)) == expected
    assert ids.check_duality_rel(random_problem(2, 3, Fraction(3, 4), random.Random(5))).passed


@pytest.mark.parametrize("h", [0, 1, Fraction(7, 5)])
def test_h0_and_mixed(h):
    d = random_problem(2, 2, h, random.Random(11))
    for check in (ids.check_theorem_main, ids.check_cor_mn, ids.check_duality_rel):
        assert check(d).passed


def test_repeated_z():
    d = ProblemData(2, 3, (1, 1, 1), (0, 0), 1)
    assert ids.check_theorem_main(d).passed
    assert ids.check_duality_rel(d).passed


@pytest.mark.parametrize("M", [1, 2])
def test_capelli_chain(M):
    rep = ids.check_capelli_chain(M, M, 0, 1)
    assert rep.passed and rep.details["subchecks"] == {"a": True, "b": True, "c": True}
    assert ids.check_capelli_chain(M, M, Fraction(-1, 3), 0).passed


def test_capelli_chain_rectangular():
    rep = ids.check_capelli_chain(2, 3, 2, 1)
    assert rep.passed and "c" not in rep.details["subchecks"]


def test_h_independence_and_mutant():
    d = random_problem(2, 1, 1, random.Random(2))
    assert ids.check_h_independence(d, [0, 1, Fraction(7, 5)]).passed
    one = ProblemData(1, 1, (Fraction(2),), (Fraction(3),))
    assert ids.check_h_independence(one, [0, 1]).passed
    mutant = ids.check_h_independence(random_problem(2, 2, 1, random.Random(2)),
                                      [0, 1, Fraction(7, 5)], xp_sign=-1)
    assert not mutant.passed and mutant.first_discrepancy
    with pytest.raises(ValueError):
        ids.check_h_independence(d, [1, 1])


def test_row_sign_examples():
    d = random_problem(3, 2, 1, random.Random(4))
    assert ids.check_row_sign(d, (0, 1, 2)).passed
    swap = ids.check_row_sign(random_problem(2, 2, 1, random.Random(4)), (1, 0))
    assert swap.passed and swap.details["sign"] == -1
    cyc = ids.check_row_sign(d, (1, 2, 0))
    assert cyc.passed and cyc.details["sign"] == 1


@pytest.mark.parametrize("M,N", [(1, 1), (1, 2), (2, 2)])
def test_gauss(M, N):
    assert ids.check_gauss(random_problem(M, N, 1, random.Random(M + N))).passed


def test_first_discrepancy_and_report():
    sig = AlgebraSignature(1, 1, 1)
    a, b = parse(sig, "x[1,1] + 2"), parse(sig, "x[1,1] + 3")
    assert ids.first_discrepancy(a, b) == ["(2)", "(3)"]
    assert ids.first_discrepancy(a, a) is None
    left, right = ids.first_discrepancy(parse(sig, "u*pu"), sig.zero())
    assert parse(sig, left) == parse(sig, "u*pu") and right == "0"
    rep = ids.compare("demo", {"k": 1}, a, b, 0.0)
    doc = rep.to_dict()
    assert doc["passed"] is False and doc["first_discrepancy"] == ["(2)", "(3)"]
    assert set(doc) >= {"check_id", "params", "lhs_terms", "rhs_terms", "wall_time_ms"}
