"""Acceptance criteria, one check per criterion.

Each ``criterion_k`` returns (passed, detail). Under pytest every check is
its own test and prints a PASS/FAIL line; run this file directly to get
the same lines without pytest:

    python3 tests/test_acceptance.py
"""

import math
import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest

from freecorr import nc_lattice as ncl
from freecorr.algebra import center, expand_sum
from freecorr.info import CHI_SEMICIRCLE, entropy_via_fisher, fisher_information, free_entropy, monotonicity_report
from freecorr.maxcorr import max_correlation
from freecorr.moments import CumulantSequence, FreeFamily, MomentSequence, cumulants_to_moments, moments_to_cumulants
from freecorr.projections import (
    random_polynomial,
    symmetrize,
    verify_commuting,
    verify_decomposition,
    verify_orthogonality,
    verify_sum_projection,
    verify_symmetry_bound,
    verify_tower,
)
from freecorr.rmt import EnsembleSpec, cross_validate, empirical_max_correlation, random_mixed_words
from freecorr.transforms import Convolved, Semicircular, Uniform, bernoulli, density_from_cumulants, free_power

SC = Semicircular(0, 1).cumulants(12)
BERN = bernoulli().cumulants(12)
BERN_SC = BERN.add_semicircular(F(1, 2))


def _families(rng, n):
    """A rotating set of rational laws for the projection corpus."""
    a = F(int(rng.integers(-3, 1)), int(rng.integers(1, 4)))
    b = a + F(int(rng.integers(1, 4)), int(rng.integers(1, 3)))
    choices = [
        bernoulli().cumulants(8),
        Uniform(a, b).cumulants(8),
        Semicircular(F(int(rng.integers(-2, 3)), 3), F(int(rng.integers(1, 5)), 2)).cumulants(8),
        BERN_SC.truncate(8),
    ]
    return FreeFamily.iid(choices[int(rng.integers(len(choices)))], n)


def _corpus(seed, count):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, 5))
        letters = list(range(1, n + 1))
        z = random_polynomial(rng, letters, int(rng.integers(1, 4)))
        fam = _families(rng, n)
        I = frozenset(x for x in letters if rng.random() < 0.6) or frozenset([1])
        J = frozenset(x for x in letters if rng.random() < 0.5)
        out.append((z, n, fam, I, J))
    return out


def criterion_1():
    worst, excess, count = 0.0, 0.0, 0
    start = time.perf_counter()
    for name, kappa in (("semicircular", SC), ("bernoulli", BERN), ("bernoulli+sc", BERN_SC)):
        for n in range(2, 7):
            for m in range(1, n):
                for D in range(1, 6 if n <= 3 else 5):
                    rep = max_correlation(m, n, D, kappa, name)
                    target = math.sqrt(m / n)
                    worst = max(worst, abs(rep.rho_max - target))
                    excess = max(excess, rep.rho_max - target)
                    count += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and excess <= 1e-6 and elapsed <= 120
    return ok, f"{count} cases, max |rho - sqrt(m/n)| = {worst:.2e}, max excess = {excess:.2e}, {elapsed:.1f} s"


def criterion_2():
    worst_exact, worst_float = F(0), 0.0
    for z, n, fam, I, J in _corpus(2024, 50):
        cache = {}
        d = verify_decomposition(z, I, fam, cache=cache)
        J2 = J if I - J else J - {min(I)}
        o = verify_orthogonality(z, I, J2, fam, cache=cache)
        worst_exact = max(worst_exact, d.deviation, o.deviation)
        ffam = FreeFamily.iid(fam.cumulants[1].to_float(), n)
        zf = z.to_float()
        cache = {}
        d = verify_decomposition(zf, I, ffam, cache=cache)
        o = verify_orthogonality(zf, I, J2, ffam, cache=cache)
        worst_float = max(worst_float, d.deviation, o.deviation)
    ok = worst_exact == 0 and worst_float <= 1e-10
    return ok, f"50 polynomials: exact deviation {float(worst_exact)}, float deviation {worst_float:.2e}"


def criterion_3():
    worst = 0
    for z, n, fam, I, J in _corpus(7, 50):
        cache = {}
        worst = max(worst, verify_commuting(z, I, J, fam, cache=cache).deviation)
        worst = max(worst, verify_tower(z, I, I & J, fam, cache=cache).deviation)
    return worst == 0, f"50 polynomials: max deviation {worst}"


def criterion_4():
    rng = np.random.default_rng(99)
    violations, checked = 0, 0
    while checked < 100:
        n = int(rng.integers(2, 5))
        fam = _families(rng, n)
        z = center(symmetrize(random_polynomial(rng, list(range(1, n + 1)), int(rng.integers(1, 4))), n), fam)
        if z.is_zero():
            continue
        k = int(rng.integers(1, n + 1))
        b = verify_symmetry_bound(z, set(range(1, k + 1)), n, fam, check_exchangeability=False)
        checked += 1
        violations += not (b.lhs_sq <= b.rhs_sq)
    linear_gap = 0.0
    for n in (2, 3, 4):
        for kappa in (SC, BERN, BERN_SC):
            fam = FreeFamily.iid(kappa.truncate(8), n)
            b = verify_symmetry_bound(center(expand_sum(n), fam), {1}, n, fam)
            linear_gap = max(linear_gap, abs(b.lhs - b.rhs))
    ok = violations == 0 and linear_gap <= 1e-12
    return ok, f"{checked} symmetric z, {violations} violations; linear case max |lhs - rhs| = {linear_gap:.1e}"


def criterion_5():
    worst = 0
    cases = 0
    for kappa in (SC, BERN, BERN_SC):
        for n in range(2, 5):
            fam = FreeFamily.iid(kappa.truncate(8), n)
            cache = {}
            for m in range(1, n):
                for coeffs in ([0, 1], [0, 0, 1], [0, 0, 0, 1]):
                    rep = verify_sum_projection(coeffs, m, n, fam, cache=cache)
                    worst = max(worst, rep.deviation)
                    cases += 1
    return worst == 0, f"{cases} cases, max distance {worst}"


def criterion_6():
    sc = free_entropy(Semicircular(0, 1), points=4000)
    un = free_entropy(Uniform(-1, 1), points=4000)
    e1, e2 = abs(sc - 1.4189385), abs(un - 0.8620534)
    ok = e1 <= 1e-4 and e2 <= 1e-4
    return ok, f"chi(SC) = {sc:.7f} (err {e1:.1e}), chi(U[-1,1]) = {un:.7f} (err {e2:.1e}), 4000 cells"


def criterion_7():
    worst, worst_res = 0.0, 0.0
    for v in (1, 2, F(1, 2)):
        for D in range(1, 9):
            res = fisher_information(Semicircular(0, v).moments(2 * D + 2), D)
            worst = max(worst, abs(res.phi - 1 / float(v)))
            worst_res = max(worst_res, res.max_residual)
    ok = worst <= 1e-10 and worst_res <= 1e-12
    return ok, f"max |Phi - 1/v| = {worst:.1e}, max residual = {worst_res:.1e} (v in 1, 2, 1/2; D = 1..8)"


def criterion_8():
    sc = entropy_via_fisher(Semicircular(0, 1))
    un = entropy_via_fisher(Uniform(-1, 1))
    direct = free_entropy(Uniform(-1, 1))
    e1, e2 = abs(sc - CHI_SEMICIRCLE), abs(un - direct)
    ok = e1 <= 1e-6 and e2 <= 5e-3
    return ok, f"SC error {e1:.1e}; uniform: integral {un:.6f} vs direct {direct:.6f} (diff {e2:.1e})"


def criterion_9():
    rep = monotonicity_report(Convolved(bernoulli(), 1, F(1, 2)), n_max=6, D=8, N=16)
    chi = ", ".join(f"{r.chi:.5f}" for r in rep.rows)
    phi = ", ".join(f"{r.phi:.5f}" for r in rep.rows)
    ok = (
        rep.chi_nondecreasing
        and rep.phi_nonincreasing
        and rep.chi_gaps_resolved
        and rep.phi_gaps_resolved
        and rep.intermediate_ok
    )
    return ok, f"chi = [{chi}]; Phi = [{phi}]; intermediate {len(rep.intermediate)} pairs ok = {rep.intermediate_ok}"


def criterion_10():
    m = free_power(bernoulli(), 2, 10)
    binom_ok = all(m[2 * k] == math.comb(2 * k, k) and m[2 * k - 1] == 0 for k in range(1, 6))
    g = density_from_cumulants(bernoulli().cumulants(16).scale(2))
    err = abs(g.density(0.0) - 1 / (2 * math.pi))
    return binom_ok and err <= 1e-3, f"central binomials exact: {binom_ok}; rho(0) error {err:.1e}"


def criterion_11():
    counts = all(len(ncl.enumerate_nc(r)) == ncl.catalan(r) for r in range(1, 11))
    rows = all(sum(ncl.moebius_to_top(p) for p in ncl.enumerate_nc(r)) == 0 for r in range(2, 9))
    rng = np.random.default_rng(11)
    trips = 0
    for _ in range(100):
        vals = [F(int(rng.integers(-9, 10)), int(rng.integers(1, 8))) for _ in range(10)]
        m = MomentSequence(vals)
        k = CumulantSequence(vals)
        trips += cumulants_to_moments(moments_to_cumulants(m)) == m and moments_to_cumulants(cumulants_to_moments(k)) == k
    ok = counts and rows and trips == 100
    return ok, f"Catalan counts r<=10: {counts}; Moebius row sums r=2..8: {rows}; exact round trips {trips}/100"


def criterion_12():
    spec = EnsembleSpec(1024, 20, bernoulli(), seed=2024)
    words = random_mixed_words(np.random.default_rng(12), 40, 6)
    fam = FreeFamily.iid(BERN, 2)
    checks = cross_validate(words, spec, fam)
    frac = float(np.mean([c.within(3.0) for c in checks]))
    rho = empirical_max_correlation(1, 2, 2, EnsembleSpec(1024, 20, Convolved(bernoulli(), 1, F(1, 2)), seed=7)).rho_max
    ok = frac >= 0.95 and abs(rho - math.sqrt(0.5)) <= 0.02
    return ok, f"{frac * 100:.0f}% of 40 words within 3 stderr; empirical rho(1,2) = {rho:.4f}"


CRITERIA = [
    (1, "maximal correlation equals sqrt(m/n)", criterion_1),
    (2, "Efron-Stein decomposition and orthogonality", criterion_2),
    (3, "commuting projections and tower property", criterion_3),
    (4, "symmetric projection bound", criterion_4),
    (5, "projections of p(s_n) onto x_1..x_m and s_m agree", criterion_5),
    (6, "free entropy values", criterion_6),
    (7, "free Fisher information of semicircular laws", criterion_7),
    (8, "entropy from the Fisher integral", criterion_8),
    (9, "monotonicity along the free CLT", criterion_9),
    (10, "free convolution oracle", criterion_10),
    (11, "combinatorial kernel", criterion_11),
    (12, "random-matrix cross-validation", criterion_12),
]


def _line(num, title, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2} ({title}): {detail}"


@pytest.mark.parametrize("num,title,fn", CRITERIA, ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(num, title, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(num, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num, title, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(_line(num, title, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
