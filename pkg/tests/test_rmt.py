import math
from fractions import Fraction as F

import numpy as np
import pytest

from freecorr.errors import DomainError, ResourceError
from freecorr.moments import CumulantSequence, FreeFamily
from freecorr.rmt import (
    EnsembleSpec,
    _canonical,
    cross_validate,
    diagonal,
    empirical_max_correlation,
    estimate_mixed_moment,
    estimate_mixed_moments,
    haar_orthogonal,
    quantile_function,
    random_mixed_words,
    trace_samples,
)
from freecorr.transforms import Convolved, Semicircular, Uniform, bernoulli

BERN_FAM = FreeFamily.iid(CumulantSequence([0, 1, 0, -1, 0, 2, 0, -5, 0, 14, 0, -42]), 2)


def test_haar_is_orthogonal_and_sign_fixed():
    rng = np.random.default_rng(0)
    U = haar_orthogonal(rng, 50)
    assert np.allclose(U @ U.T, np.eye(50), atol=1e-12)
    # first column of a Haar matrix is uniform on the sphere: mean ~ 0
    cols = np.array([haar_orthogonal(rng, 4)[:, 0] for _ in range(2000)])
    assert np.all(np.abs(cols.mean(axis=0)) < 0.06)


def test_quantiles():
    q = quantile_function(bernoulli())
    assert list(q(np.array([0.1, 0.49, 0.51, 0.9]))) == [-1, -1, 1, 1]
    q = quantile_function(Uniform(-1, 1))
    assert np.allclose(q(np.array([0.25, 0.5, 0.75])), [-0.5, 0.0, 0.5], atol=1e-12)
    q = quantile_function(Semicircular(0, 1))
    assert abs(float(q(np.array([0.5]))[0])) < 1e-12
    q = quantile_function(Convolved(bernoulli(), 2))
    assert abs(float(q(np.array([0.5]))[0])) < 1e-3


def test_quantile_diagonal_moments():
    spec = EnsembleSpec(400, 1, Semicircular(0, 1))
    d = diagonal(spec, None)
    assert abs(np.mean(d ** 2) - 1) < 1e-2
    assert abs(np.mean(d ** 4) - 2) < 2e-2


def test_spec_validation():
    with pytest.raises(DomainError):
        EnsembleSpec(1, 1, bernoulli())
    with pytest.raises(DomainError):
        EnsembleSpec(4, 0, bernoulli())
    with pytest.raises(DomainError):
        EnsembleSpec(4, 1, bernoulli(), diagonal="sobol")
    spec = EnsembleSpec(8, 2, bernoulli())
    with pytest.raises(ResourceError):
        estimate_mixed_moment((1,) * 13, spec)
    with pytest.raises(ResourceError):
        estimate_mixed_moment(tuple(range(7)), spec)


def test_canonical_rotation():
    assert _canonical((2, 1, 1)) == (1, 1, 2)
    assert _canonical((1, 2, 1, 2)) == (1, 2, 1, 2)


def test_single_label_words_are_exact_for_quantiles():
    spec = EnsembleSpec(64, 3, bernoulli())
    for w, target in (((1, 1), 1.0), ((1, 1, 1), 0.0), ((1,) * 4, 1.0)):
        mean, se = estimate_mixed_moment(w, spec)
        assert abs(mean - target) < 1e-12 and se < 1e-12


def test_semicircle_fourth_moment():
    spec = EnsembleSpec(256, 4, Semicircular(0, 1), seed=1)
    mean, se = estimate_mixed_moment((1, 1, 1, 1), spec)
    assert abs(mean - 2) < 3 * se + 2e-2


def test_alternating_word_small():
    spec = EnsembleSpec(256, 6, bernoulli(), seed=2)
    mean, se = estimate_mixed_moment((1, 2, 1, 2), spec)
    assert abs(mean) < 3 * se + 1e-2
    mean, _ = estimate_mixed_moment((1, 1, 2, 2), spec)
    assert abs(mean - 1) < 1e-10  # X^2 = I for Bernoulli quantile diagonals


def test_determinism_and_threads():
    words = [(1, 2, 1, 2), (1, 2, 2), (1, 1, 2, 1, 2, 2)]
    a = trace_samples(words, EnsembleSpec(64, 4, Uniform(-1, 1), seed=5))
    b = trace_samples(words, EnsembleSpec(64, 4, Uniform(-1, 1), seed=5, threads=3))
    c = trace_samples(words, EnsembleSpec(64, 4, Uniform(-1, 1), seed=6))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rotation_invariant_words_share_values():
    spec = EnsembleSpec(64, 2, Uniform(-1, 1), seed=3)
    est = estimate_mixed_moments([(1, 2, 2), (2, 2, 1), (2, 1, 2)], spec)
    assert est[0] == est[1] == est[2]


def test_iid_diagonal_runs():
    spec = EnsembleSpec(128, 3, Uniform(-1, 1), diagonal="iid", seed=4)
    mean, se = estimate_mixed_moment((1, 1), spec)
    assert se > 0 and abs(mean - 1 / 3) < 0.05


def test_random_words_mix_labels():
    rng = np.random.default_rng(0)
    words = random_mixed_words(rng, 30, 6)
    assert len(words) == 30
    assert all(2 <= len(w) <= 6 and len(set(w)) == 2 for w in words)


def _median_deviation(N):
    rng = np.random.default_rng(10)
    words = random_mixed_words(rng, 12, 6)
    spec = EnsembleSpec(N, 4, Uniform(-1, 1), seed=11)
    fam = FreeFamily.iid(Uniform(-1, 1).cumulants(6), 2)
    return float(np.median([c.deviation for c in cross_validate(words, spec, fam)]))


@pytest.mark.slow
def test_deviation_decreases_with_N():
    devs = [_median_deviation(N) for N in (128, 512, 1024)]
    assert devs[0] > devs[1] > devs[2]


def test_cross_validate_json():
    spec = EnsembleSpec(128, 4, bernoulli(), seed=7)
    checks = cross_validate([(1, 2, 1, 2), (1, 1, 2, 2)], spec, BERN_FAM)
    assert [c.engine_value for c in checks] == [0.0, 1.0]
    j = checks[0].to_json()
    assert set(j) == {"word", "N", "T", "mean", "stderr", "engine_value"}
    assert checks[1].within()


def test_empirical_max_correlation_m_equals_n():
    spec = EnsembleSpec(64, 2, bernoulli(), seed=0)
    rep = empirical_max_correlation(2, 2, 2, spec)
    assert abs(rep.rho_max - 1) < 1e-12
    with pytest.raises(DomainError):
        empirical_max_correlation(3, 2, 2, spec)


@pytest.mark.slow
def test_empirical_max_correlation_half():
    spec = EnsembleSpec(512, 8, Convolved(bernoulli(), 1, F(1, 2)), seed=3)
    rep = empirical_max_correlation(1, 4, 2, spec)
    assert abs(rep.rho_max - 0.5) < 0.02
    assert rep.theoretical == pytest.approx(0.5)
    assert math.isfinite(rep.rho_max)
