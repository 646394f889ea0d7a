"""Conditional expectations onto letter sub-algebras and the Efron-Stein
decomposition built from them.

Projections are least-squares solutions of the normal equations over a
degree-capped basis of centered monomials plus the unit. Because the
projection of a degree-d polynomial is again a polynomial of degree <= d in
the kept letters, the cap D = deg(z) loses nothing.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import (
    NCPolynomial,
    SumLetter,
    basis_words,
    inner_product,
    monomial_basis,
    norm_sq,
    trace,
)
from .errors import ConditioningError, DomainError, PreconditionError
from .linalg import gram_condition, ridge_solve, solve_exact
from .report import VerificationReport


@dataclass
class ProjectionResult:
    z: NCPolynomial
    subset: object
    projection: NCPolynomial
    residual_norm: float
    gram_condition: float
    ridge: float = 0.0
    degree: int = 0

    def to_json(self):
        sub = self.subset
        sub = {"sum_of": list(sub.labels)} if isinstance(sub, SumLetter) else sorted(sub)
        return {
            "subset": sub,
            "degree": self.degree,
            "projection": self.projection.to_json(),
            "residual_norm": float(self.residual_norm),
            "gram_condition": float(self.gram_condition),
            "ridge": float(self.ridge),
        }


@dataclass
class EfronSteinComponent:
    subset: frozenset
    component: NCPolynomial


def _exact_mode(z, family):
    return family.mode == "exact" and z.exact


def _key(subset):
    return subset if isinstance(subset, SumLetter) else frozenset(subset)


def conditional_expectation(z, subset, family, degree=None, cache=None):
    """Orthogonal projection of z onto the span of {1} and the centered
    monomials of degree <= ``degree`` in ``subset`` (a label set or a
    SumLetter)."""
    D = max(z.degree, 1) if degree is None else degree
    if D < z.degree and not isinstance(subset, SumLetter):
        raise DomainError(f"degree cap {D} below deg(z)={z.degree}")
    if cache is not None:
        ck = (_key(subset) if not isinstance(subset, SumLetter) else ("sum", subset.labels), D, z)
        hit = cache.get(ck)
        if hit is not None:
            return hit
    exact = _exact_mode(z, family)
    tau = trace(z, family)
    if not isinstance(subset, SumLetter) and not subset:
        basis = []
    else:
        basis = monomial_basis(subset, D, family)
    n = len(basis)
    G = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            G[i][j] = G[j][i] = inner_product(basis[i], basis[j], family)
    rhs = [inner_product(b, z, family) for b in basis]
    cond = gram_condition(np.array(G, dtype=float)) if n else 1.0
    ridge = 0.0
    if n == 0:
        coef = []
    elif exact:
        try:
            coef, _ = solve_exact(G, rhs)
        except ConditioningError as exc:
            raise ConditioningError(
                f"normal equations inconsistent for subset {subset}", gram_condition=cond, subset=subset
            ) from exc
    else:
        sol, ridge = ridge_solve(np.array(G, dtype=float), np.array(rhs, dtype=float))
        coef = [float(c) for c in sol]
    proj = NCPolynomial.constant(tau)
    for c, b in zip(coef, basis):
        if c != 0:
            proj = proj + b * c
    if n:
        res = max(abs(float(sum(G[i][j] * coef[j] for j in range(n)) - rhs[i])) for i in range(n))
    else:
        res = 0.0
    out = ProjectionResult(z, subset, proj, res, cond, ridge, D)
    if cache is not None:
        cache[ck] = out
    return out


def _subsets(s):
    s = sorted(s)
    for k in range(len(s) + 1):
        for c in itertools.combinations(s, k):
            yield frozenset(c)


def efron_stein_component(z, subset, family, degree=None, cache=None):
    """z_I = sum over J subset of I of (-1)^{|I|-|J|} proj_J(z)."""
    subset = frozenset(subset)
    cache = {} if cache is None else cache
    comp = NCPolynomial()
    for J in _subsets(subset):
        try:
            pj = conditional_expectation(z, J, family, degree, cache).projection
        except ConditioningError as exc:
            raise ConditioningError(
                f"projection onto J={sorted(J)} failed: {exc}", exc.gram_condition, subset=J
            ) from exc
        sign = -1 if (len(subset) - len(J)) % 2 else 1
        comp = comp + pj * sign
    return EfronSteinComponent(subset, comp)


def _distance(p, q, family):
    """(L2 distance as float, squared distance in the working mode)."""
    d = p - q
    sq = norm_sq(d, family)
    return math.sqrt(max(float(sq), 0.0)), sq


def _max_coef(p):
    return max((abs(float(c)) for c in p.terms.values()), default=0.0)


def _tol(family, z, tol):
    if tol is not None:
        return tol
    return 0.0 if _exact_mode(z, family) else 1e-10


def verify_decomposition(z, subset, family, degree=None, tol=None, cache=None):
    """Compare proj_I(z) with the sum of its Efron-Stein components."""
    subset = frozenset(subset)
    cache = {} if cache is None else cache
    lhs = conditional_expectation(z, subset, family, degree, cache).projection
    rhs = NCPolynomial()
    for J in _subsets(subset):
        rhs = rhs + efron_stein_component(z, J, family, degree, cache).component
    coef_dev = _max_coef(lhs - rhs)
    l2, _ = _distance(lhs, rhs, family)
    return VerificationReport(
        "efron-stein decomposition",
        {"subset": sorted(subset), "degree": degree, "mode": family.mode},
        max(coef_dev, l2),
        _tol(family, z, tol),
        details={"max_coefficient_deviation": coef_dev, "l2_deviation": l2},
    )


def verify_orthogonality(z, I, J, family, degree=None, tol=None, cache=None):
    """|<z_I, z_J>| together with ||proj_J(z_I)||_2; requires I \\ J nonempty."""
    I, J = frozenset(I), frozenset(J)
    if not (I - J):
        raise PreconditionError("orthogonality needs I \\ J nonempty")
    cache = {} if cache is None else cache
    zi = efron_stein_component(z, I, family, degree, cache).component
    zj = efron_stein_component(z, J, family, degree, cache).component
    ip = inner_product(zi, zj, family)
    D = degree if degree is not None else max(z.degree, 1)
    pj = conditional_expectation(zi, J, family, max(D, zi.degree, 1), cache).projection
    pnorm = math.sqrt(max(float(norm_sq(pj, family)), 0.0))
    dev = abs(float(ip))
    return VerificationReport(
        "efron-stein orthogonality",
        {"I": sorted(I), "J": sorted(J), "degree": degree, "mode": family.mode},
        max(dev, pnorm),
        _tol(family, z, tol),
        details={"inner_product": dev, "proj_J_of_z_I_norm": pnorm, "inner_product_is_zero": ip == 0},
    )


def verify_commuting(z, I, J, family, degree=None, tol=None, cache=None):
    """|| proj_I(proj_J(z)) - proj_{I cap J}(z) ||_2."""
    I, J = frozenset(I), frozenset(J)
    cache = {} if cache is None else cache
    D = degree if degree is not None else max(z.degree, 1)
    pj = conditional_expectation(z, J, family, D, cache).projection
    pij = conditional_expectation(pj, I, family, max(D, pj.degree, 1), cache).projection
    pint = conditional_expectation(z, I & J, family, D, cache).projection
    dist, _ = _distance(pij, pint, family)
    return VerificationReport(
        "commuting projections",
        {"I": sorted(I), "J": sorted(J), "degree": degree, "mode": family.mode},
        dist,
        _tol(family, z, tol),
    )


def verify_tower(z, I, J, family, degree=None, tol=None, cache=None):
    """|| proj_J(proj_I(z)) - proj_J(z) ||_2 for J subset of I."""
    I, J = frozenset(I), frozenset(J)
    if not J <= I:
        raise PreconditionError("tower property needs J subset of I")
    cache = {} if cache is None else cache
    D = degree if degree is not None else max(z.degree, 1)
    pi = conditional_expectation(z, I, family, D, cache).projection
    pji = conditional_expectation(pi, J, family, max(D, pi.degree, 1), cache).projection
    pj = conditional_expectation(z, J, family, D, cache).projection
    dist, _ = _distance(pji, pj, family)
    return VerificationReport(
        "tower property", {"I": sorted(I), "J": sorted(J), "mode": family.mode}, dist, _tol(family, z, tol)
    )


def is_symmetric(z, n, tol=0.0):
    """Coefficient-wise invariance under every permutation of letters 1..n."""
    labels = list(range(1, n + 1))
    for perm in itertools.permutations(labels):
        w = z.relabel(dict(zip(labels, perm)))
        diff = w - z
        if any(abs(float(c)) > tol for c in diff.terms.values()):
            return False
    return True


def symmetrize(z, n):
    """Average of z over all permutations of letters 1..n."""
    labels = list(range(1, n + 1))
    perms = list(itertools.permutations(labels))
    acc = NCPolynomial()
    for perm in perms:
        acc = acc + z.relabel(dict(zip(labels, perm)))
    scale = Fraction(1, len(perms)) if z.exact else 1.0 / len(perms)
    return acc * scale


@dataclass
class SymmetryBound:
    lhs: float
    rhs: float
    lhs_sq: object
    rhs_sq: object
    exchange_deviation: float = None

    def __iter__(self):
        return iter((self.lhs, self.rhs))

    @property
    def holds(self):
        return self.lhs_sq <= self.rhs_sq

    def to_json(self):
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": bool(self.holds),
            "exchange_deviation": self.exchange_deviation,
        }


def verify_symmetry_bound(z, subset, n, family, degree=None, check_exchangeability=True, tol=1e-10, cache=None):
    """(||proj_I z||_2, sqrt(|I|/n) ||z||_2) for a symmetric centered z.

    With ``check_exchangeability`` the norms ||z_I|| and ||z_{1..|I|}|| are
    also compared (the components have the same distribution).
    """
    subset = frozenset(subset)
    exact = _exact_mode(z, family)
    sym_tol = 0.0 if exact else tol
    if not is_symmetric(z, n, sym_tol):
        raise PreconditionError("z is not symmetric in letters 1..n")
    t = trace(z, family)
    if abs(float(t)) > (0.0 if exact else tol):
        raise PreconditionError(f"z is not centered (tau(z)={t})")
    cache = {} if cache is None else cache
    p = conditional_expectation(z, subset, family, degree, cache).projection
    lhs_sq = norm_sq(p, family)
    frac = Fraction(len(subset), n) if exact else len(subset) / n
    rhs_sq = frac * norm_sq(z, family)
    exch = None
    if check_exchangeability and subset:
        first = frozenset(range(1, len(subset) + 1))
        a = norm_sq(efron_stein_component(z, subset, family, degree, cache).component, family)
        b = norm_sq(efron_stein_component(z, first, family, degree, cache).component, family)
        exch = abs(float(a - b))
    return SymmetryBound(
        math.sqrt(max(float(lhs_sq), 0.0)),
        math.sqrt(max(float(rhs_sq), 0.0)),
        lhs_sq,
        rhs_sq,
        exch,
    )


def polynomial_in_sum(coeffs, n):
    """p(s_n) for p(s) = sum_k coeffs[k] s^k."""
    s = NCPolynomial({(i,): 1 for i in range(1, n + 1)})
    out = NCPolynomial()
    power = NCPolynomial.constant(1)
    for k, c in enumerate(coeffs):
        if k:
            power = power * s
        if c != 0:
            out = out + power * c
    return out


def verify_sum_projection(coeffs, m, n, family, degree=None, tol=None, cache=None):
    """L2 distance between the projections of p(s_n) onto L2(x_1..x_m) and
    onto L2(s_m)."""
    if not 1 <= m <= n:
        raise PreconditionError("needs 1 <= m <= n")
    z = polynomial_in_sum(coeffs, n)
    D = degree if degree is not None else max(z.degree, 1)
    cache = {} if cache is None else cache
    a = conditional_expectation(z, frozenset(range(1, m + 1)), family, D, cache).projection
    b = conditional_expectation(z, SumLetter(m), family, D, cache).projection
    dist, sq = _distance(a, b, family)
    return VerificationReport(
        "sum projection",
        {"p": [str(c) for c in coeffs], "m": m, "n": n, "degree": D, "mode": family.mode},
        dist,
        _tol(family, z, tol),
        details={"distance_sq_is_zero": sq == 0},
    )


def letters_used(p, tol=0.0):
    return {x for w, c in p.terms.items() if abs(float(c)) > tol for x in w}


def random_polynomial(rng, letters, degree, exact=True, n_terms=None, max_num=5, max_den=4):
    """Random polynomial with rational (or float) coefficients over ``letters``."""
    words = [()] + basis_words(letters, degree)
    k = n_terms if n_terms is not None else rng.integers(2, min(len(words), 8) + 1)
    idx = rng.choice(len(words), size=min(k, len(words)), replace=False)
    terms = {}
    for i in idx:
        num = int(rng.integers(-max_num, max_num + 1)) or 1
        den = int(rng.integers(1, max_den + 1))
        terms[words[i]] = Fraction(num, den) if exact else num / den
    return NCPolynomial(terms)
