import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest

from freecorr.algebra import NCPolynomial, SumLetter, center, expand_sum, inner_product, norm_sq, parse_polynomial, trace
from freecorr.errors import PreconditionError
from freecorr.moments import CumulantSequence, FreeFamily
from freecorr.projections import (
    conditional_expectation,
    efron_stein_component,
    is_symmetric,
    letters_used,
    polynomial_in_sum,
    random_polynomial,
    symmetrize,
    verify_commuting,
    verify_decomposition,
    verify_orthogonality,
    verify_sum_projection,
    verify_symmetry_bound,
    verify_tower,
)

SC = CumulantSequence([0, 1, 0, 0, 0, 0, 0, 0])
BERN = CumulantSequence([0, 1, 0, -1, 0, 2, 0, -5])
SHIFTED = CumulantSequence([F(1, 2), F(3, 2), F(1, 3), F(-1, 4), 0, F(1, 5), 0, 0])


def subsets(s):
    s = sorted(s)
    return [frozenset(c) for k in range(len(s) + 1) for c in itertools.combinations(s, k)]


def test_projection_onto_empty_set_is_trace():
    fam = FreeFamily.iid(SHIFTED, 2)
    z = parse_polynomial("x1*x2*x1 + 2*x2 - 1")
    p = conditional_expectation(z, set(), fam).projection
    assert p == NCPolynomial.constant(trace(z, fam))


def test_module_property_examples():
    fam = FreeFamily({1: SC, 2: SC})
    z = parse_polynomial("x1*x2*x1")
    assert conditional_expectation(z, {1}, fam).projection.is_zero()
    c = F(2, 3)
    fam = FreeFamily({1: SC, 2: CumulantSequence([c, 1, 0, 0, 0, 0])})
    assert conditional_expectation(z, {1}, fam).projection == parse_polynomial("2/3*x1^2")


def test_known_projection():
    fam = FreeFamily.iid(CumulantSequence([1, 1, 0, 0, 0, 0]), 2)
    z = parse_polynomial("x2*x1*x2")
    res = conditional_expectation(z, {1}, fam, 3)
    assert res.projection == parse_polynomial("1 + x1")
    # normal-equation residual of the exact solve
    assert res.residual_norm == 0.0


def test_projection_contract_letters_and_normal_equations():
    rng = np.random.default_rng(3)
    fam = FreeFamily.iid(SHIFTED, 3)
    for _ in range(10):
        z = random_polynomial(rng, [1, 2, 3], 3)
        for I in ({1}, {1, 3}, {2, 3}):
            p = conditional_expectation(z, I, fam).projection
            assert letters_used(p) <= I
            assert p.degree <= z.degree
            # residual orthogonal to monomials in I up to degree 2
            r = z - p
            for w in itertools.product(sorted(I), repeat=2):
                assert inner_product(NCPolynomial.word(w), r, fam) == 0


def test_raising_degree_adds_nothing():
    fam = FreeFamily.iid(SHIFTED, 2)
    z = parse_polynomial("x2*x1*x2 + x1*x2")
    a = conditional_expectation(z, {1}, fam, 3).projection
    b = conditional_expectation(z, {1}, fam, 4).projection
    assert a == b


def test_efron_stein_examples():
    fam = FreeFamily.iid(SHIFTED, 2)
    s = expand_sum(2)
    assert efron_stein_component(s, {1}, fam).component == x(1) - NCPolynomial.constant(SHIFTED[1])
    assert efron_stein_component(s, {1, 2}, fam).component.is_zero()
    fam = FreeFamily.iid(SC, 2)
    z = parse_polynomial("x1*x2")
    assert efron_stein_component(z, {1, 2}, fam, 2).component == z
    assert efron_stein_component(z, set(), fam).component == NCPolynomial.constant(trace(z, fam))


def x(i):
    return NCPolynomial.letter(i)


def test_decomposition_examples():
    fam = FreeFamily.iid(SC, 3)
    z = expand_sum(3) ** 2
    assert verify_decomposition(z, {1, 2}, fam).deviation == 0
    assert verify_decomposition(z, set(), fam).deviation == 0
    rng = np.random.default_rng(9)
    ffam = FreeFamily.iid(SHIFTED.to_float(), 2)
    z = random_polynomial(rng, [1, 2], 2, exact=False)
    assert verify_decomposition(z, {1}, ffam).deviation <= 1e-10


def test_orthogonality_examples():
    fam = FreeFamily.iid(SC, 3)
    rep = verify_orthogonality(parse_polynomial("x1*x2"), {1, 2}, {1}, fam)
    assert rep.deviation == 0 and rep.passed
    rep = verify_orthogonality(expand_sum(3) ** 3, {1, 2}, {2, 3}, fam)
    assert rep.deviation == 0
    with pytest.raises(PreconditionError):
        verify_orthogonality(parse_polynomial("x1"), {1}, {1, 2}, fam)


def test_commuting_and_tower():
    rng = np.random.default_rng(4)
    fam = FreeFamily.iid(BERN, 3)
    for _ in range(5):
        z = random_polynomial(rng, [1, 2, 3], 3)
        assert verify_commuting(z, {1, 2}, {2, 3}, fam).deviation == 0
        assert verify_tower(z, {1, 2}, {2}, fam).deviation == 0
    with pytest.raises(PreconditionError):
        verify_tower(parse_polynomial("x1"), {1}, {1, 2}, fam)


def test_parseval_and_contraction():
    rng = np.random.default_rng(6)
    fam = FreeFamily.iid(SHIFTED, 3)
    for _ in range(5):
        z = random_polynomial(rng, [1, 2, 3], 2)
        cache = {}
        for I in subsets({1, 2, 3}):
            p = conditional_expectation(z, I, fam, cache=cache).projection
            total = sum(norm_sq(efron_stein_component(z, J, fam, cache=cache).component, fam) for J in subsets(I))
            assert norm_sq(p, fam) == total
            assert norm_sq(p, fam) <= norm_sq(z, fam)
            # idempotent
            assert conditional_expectation(p, I, fam, max(p.degree, 1), cache).projection == p


def test_singular_gram_float_uses_ridge():
    fam = FreeFamily.iid(BERN.to_float(), 2)
    z = parse_polynomial("x1*x1*x2 + x2*x1").to_float()
    res = conditional_expectation(z, {1, 2}, fam, 3)
    assert res.gram_condition > 1e10
    d = res.projection - z
    assert math.sqrt(max(norm_sq(d, fam), 0)) < 1e-6


def test_symmetry_helpers():
    assert is_symmetric(expand_sum(3) ** 2, 3)
    assert not is_symmetric(parse_polynomial("x1*x2"), 2)
    assert is_symmetric(symmetrize(parse_polynomial("x1*x2*x2"), 3), 3)


def test_symmetry_bound_linear_saturates():
    fam = FreeFamily.iid(SHIFTED, 2)
    z = center(expand_sum(2), fam)
    b = verify_symmetry_bound(z, {1}, 2, fam)
    assert b.lhs_sq == b.rhs_sq
    assert abs(b.lhs - math.sqrt(SHIFTED[2])) < 1e-15
    fam = FreeFamily.iid(SC, 2)
    z = center(expand_sum(2) ** 2, fam)
    b = verify_symmetry_bound(z, {1}, 2, fam)
    assert b.holds and b.lhs_sq <= F(1, 2) * norm_sq(z, fam)
    with pytest.raises(PreconditionError):
        verify_symmetry_bound(parse_polynomial("x1"), {1}, 2, fam)
    with pytest.raises(PreconditionError):
        verify_symmetry_bound(expand_sum(2), {1}, 2, FreeFamily.iid(SHIFTED, 2))


def test_sum_projection_examples():
    fam = FreeFamily.iid(SHIFTED, 3)
    for m in (1, 2, 3):
        rep = verify_sum_projection([0, 1], m, 3, fam)
        assert rep.deviation == 0
        p = conditional_expectation(expand_sum(3), set(range(1, m + 1)), fam).projection
        assert p == expand_sum(m) + NCPolynomial.constant((3 - m) * SHIFTED[1])
    assert verify_sum_projection([0, 0, 1], 1, 2, FreeFamily.iid(SC, 2)).deviation == 0
    rep = verify_sum_projection([0, 0, 0, 1], 2, 3, FreeFamily.iid(BERN.to_float(), 3), 3)
    assert rep.deviation <= 1e-9


def test_polynomial_in_sum():
    assert polynomial_in_sum([1, 0, 1], 2) == NCPolynomial.constant(1) + expand_sum(2) ** 2
    res = conditional_expectation(polynomial_in_sum([0, 0, 1], 2), SumLetter(1), FreeFamily.iid(SC, 2), 2)
    assert res.projection == parse_polynomial("x1^2 + 1")
