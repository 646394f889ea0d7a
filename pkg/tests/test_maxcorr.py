import math
from fractions import Fraction as F

import numpy as np
import pytest

from freecorr import nc_lattice
from freecorr.errors import DegenerateDistributionError, DomainError, ResourceError
from freecorr.maxcorr import (
    canonical_correlations,
    correlation_sweep,
    joint_grams,
    linear_correlation_sq,
    max_correlation,
    max_correlation_from_grams,
)
from freecorr.moments import CumulantSequence

SC = CumulantSequence([0, 1, 0, 0, 0, 0, 0, 0, 0, 0])
BERN = CumulantSequence([0, 1, 0, -1, 0, 2, 0, -5, 0, 14])
BERN_SC = BERN.add_semicircular(F(1, 2))
SHIFTED = CumulantSequence([F(1, 2), F(3, 2), F(1, 3), F(-1, 4), 0, F(1, 5), 0, 0])


def test_gram_entries():
    for m, n in ((1, 2), (2, 3), (1, 4)):
        A, B, C = joint_grams(m, n, 2, SHIFTED)
        assert C[0][0] == m * SHIFTED[2]
        assert A[0][0] == n * SHIFTED[2]
        assert B[0][0] == m * SHIFTED[2]
    A, _, _ = joint_grams(1, 1, 2, SC)
    assert A[1][1] == 1


def test_grams_psd():
    A, B, _ = joint_grams(2, 5, 4, BERN_SC)
    for M in (A, B):
        assert np.linalg.eigvalsh(np.array(M, dtype=float)).min() > -1e-12


@pytest.mark.parametrize("kappa", [SC, BERN, BERN_SC, SHIFTED], ids=["sc", "bern", "bern+sc", "shifted"])
def test_half(kappa):
    rep = max_correlation(1, 2, 1, kappa)
    assert abs(rep.rho_max - math.sqrt(0.5)) < 1e-12
    assert linear_correlation_sq(1, 2, kappa) == F(1, 2)


def test_m_equals_n():
    for D in (1, 2, 3):
        assert abs(max_correlation(3, 3, D, BERN).rho_max - 1.0) < 1e-12


def test_bernoulli_two_thirds():
    rep = max_correlation(2, 3, 4, BERN, "bernoulli")
    assert abs(rep.rho_max - math.sqrt(2 / 3)) < 1e-12
    assert rep.passed
    assert rep.to_json()["pass"] is True
    # the optimizer is linear: higher-power coefficients vanish
    assert all(abs(c) < 1e-10 for c in rep.optimizer_f[1:])
    assert all(abs(c) < 1e-10 for c in rep.optimizer_g[1:])


def test_sweeps_constant_and_monotone():
    sw = correlation_sweep(1, 2, 5, SC)
    assert all(abs(r - math.sqrt(0.5)) < 1e-8 for _, r in sw)
    sw = correlation_sweep(1, 4, 4, BERN)
    assert all(abs(r - 0.5) < 1e-8 for _, r in sw)
    assert all(b >= a - 1e-10 for (_, a), (_, b) in zip(sw, sw[1:]))


def test_dilation_and_shift_invariance():
    base = max_correlation(2, 5, 3, BERN_SC).rho_max
    assert abs(max_correlation(2, 5, 3, BERN_SC.dilate(F(3, 2))).rho_max - base) < 1e-12
    assert abs(max_correlation(2, 5, 3, BERN_SC.shift(F(7, 3))).rho_max - base) < 1e-12


def test_transposed_pencil():
    A, B, C = joint_grams(2, 4, 3, BERN_SC)
    Ct = [list(r) for r in zip(*C)]
    s1 = canonical_correlations(A, B, C, True)[0]
    s2 = canonical_correlations(B, A, Ct, True)[0]
    assert np.allclose(s1, s2, atol=1e-14)


def test_exact_and_float_agree():
    a = max_correlation(2, 4, 3, BERN)
    b = max_correlation(2, 4, 3, BERN, mode="float")
    assert a.mode == "exact" and b.mode == "float"
    assert abs(a.rho_max - b.rho_max) < 1e-7


def test_singular_grams_report_dropped_directions():
    # Bernoulli s_1 = x_1 has x_1^2 = 1: the power basis collapses for m = 1
    rep = max_correlation(1, 2, 3, BERN)
    assert rep.dropped_B >= 1
    assert abs(rep.rho_max - math.sqrt(0.5)) < 1e-12


def test_errors():
    with pytest.raises(DegenerateDistributionError):
        max_correlation(1, 2, 2, CumulantSequence([1, 0, 0, 0]))
    with pytest.raises(DomainError):
        max_correlation(3, 2, 1, SC)
    with pytest.raises(ResourceError):
        max_correlation(1, 2, nc_lattice.R_MAX // 2 + 1, SC)


def test_from_grams_float_path():
    A, B, C = joint_grams(1, 3, 2, BERN_SC.to_float())
    rep = max_correlation_from_grams(A, B, C, 1, 3)
    assert abs(rep.rho_max - math.sqrt(1 / 3)) < 1e-9
