"""Maximal correlation between the polynomial spaces of s_n and s_m.

The covariance matrices of centered powers are exact when the cumulants
are rational; the canonical correlations are then the singular values of
the whitened cross-covariance.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import nc_lattice
from .algebra import NCPolynomial, inner_product
from .errors import DegenerateDistributionError, DomainError, ResourceError
from .linalg import inv_sqrt_floor, inv_unit_lower_exact, ldl_exact, matmul_exact
from .moments import CumulantSequence, FreeFamily, cumulants_to_moments

EXCESS_TOL = 1e-6


@dataclass
class CorrelationReport:
    m: int
    n: int
    degree: int
    distribution: str
    gram_A: list
    gram_B: list
    cross_C: list
    rho_max: float
    optimizer_f: list
    optimizer_g: list
    theoretical: float
    deviation: float
    mode: str = "float"
    dropped_A: int = 0
    dropped_B: int = 0
    linear_rho: object = None
    canonical_correlations: list = field(default_factory=list)

    @property
    def passed(self):
        return self.rho_max <= self.theoretical + EXCESS_TOL and self.deviation <= EXCESS_TOL

    def basis_labels(self):
        return (
            [f"s{self.n}^{i}" for i in range(1, self.degree + 1)],
            [f"s{self.m}^{j}" for j in range(1, self.degree + 1)],
        )

    def to_json(self):
        la, lb = self.basis_labels()
        return {
            "m": self.m,
            "n": self.n,
            "degree": self.degree,
            "distribution": self.distribution,
            "mode": self.mode,
            "rho_max": self.rho_max,
            "theoretical": self.theoretical,
            "deviation": self.deviation,
            "pass": bool(self.passed),
            "linear_rho": self.linear_rho,
            "canonical_correlations": self.canonical_correlations,
            "optimizer_f": self.optimizer_f,
            "optimizer_g": self.optimizer_g,
            "dropped_directions": {"A": self.dropped_A, "B": self.dropped_B},
            "basis_A": la,
            "basis_B": lb,
            "gram_A": _rows(self.gram_A),
            "gram_B": _rows(self.gram_B),
            "cross_C": _rows(self.cross_C),
        }


def _rows(mat):
    return [[v for v in row] for row in mat]


def _check(m, n, D, kappa):
    if not (1 <= m <= n):
        raise DomainError(f"need 1 <= m <= n, got m={m}, n={n}")
    if D < 1:
        raise DomainError("degree must be >= 1")
    if 2 * D > nc_lattice.R_MAX:
        raise ResourceError(f"2D={2 * D} exceeds R_max={nc_lattice.R_MAX}", size=2 * D, cap=nc_lattice.R_MAX)
    if kappa.order < 2 * D:
        raise DomainError(f"cumulants needed to order {2 * D}, have {kappa.order}")
    if kappa[2] == 0:
        raise DegenerateDistributionError("sigma(x_1) = 0: the letters are scalars")


def joint_grams(m, n, D, kappa):
    """(A, B, C) with A_ij = cov(s_n^i, s_n^j), B_ij = cov(s_m^i, s_m^j),
    C_ij = cov(s_n^i, s_m^j), i, j = 1..D.

    s_n is written as a + b with a = s_m and b free from a carrying the
    cumulants (n - m) * kappa.
    """
    if not isinstance(kappa, CumulantSequence):
        kappa = CumulantSequence(kappa)
    _check(m, n, D, kappa)
    kappa = kappa.truncate(2 * D)
    fam = FreeFamily({"a": kappa.scale(m), "b": kappa.scale(n - m)}, False)
    mn = cumulants_to_moments(kappa.scale(n)).full()
    mm = cumulants_to_moments(kappa.scale(m)).full()
    A = [[mn[i + j] - mn[i] * mn[j] for j in range(1, D + 1)] for i in range(1, D + 1)]
    B = [[mm[i + j] - mm[i] * mm[j] for j in range(1, D + 1)] for i in range(1, D + 1)]
    s = NCPolynomial({("a",): 1, ("b",): 1})
    a = NCPolynomial.letter("a")
    pn = [NCPolynomial.constant(1)]
    pm = [NCPolynomial.constant(1)]
    for _ in range(D):
        pn.append(pn[-1] * s)
        pm.append(pm[-1] * a)
    C = []
    for i in range(1, D + 1):
        row = []
        for j in range(1, D + 1):
            row.append(inner_product(pn[i], pm[j], fam) - mn[i] * mm[j])
        C.append(row)
    return A, B, C


def _exact_whitened(A, B, C):
    """Delta_A^{-1/2} L_A^{-1} C L_B^{-T} Delta_B^{-1/2} restricted to nonzero pivots,
    with the transforms needed to map singular vectors back."""
    LA, dA, kA = ldl_exact(A)
    LB, dB, kB = ldl_exact(B)
    iA = inv_unit_lower_exact(LA)
    iB = inv_unit_lower_exact(LB)
    iBt = [list(r) for r in zip(*iB)]
    K = matmul_exact(matmul_exact(iA, C), iBt)
    Kf = np.array([[float(K[i][j]) for j in kB] for i in kA], dtype=float)
    sa = np.array([1.0 / math.sqrt(float(dA[i])) for i in kA])
    sb = np.array([1.0 / math.sqrt(float(dB[j])) for j in kB])
    Kw = sa[:, None] * Kf * sb[None, :]
    # coefficient maps: f = L_A^{-T} Delta_A^{-1/2} u on kept pivots
    WA = np.array([[float(iA[c][r]) for r in range(len(A))] for c in kA]).reshape(len(kA), len(A)).T * sa[None, :]
    WB = np.array([[float(iB[c][r]) for r in range(len(B))] for c in kB]).reshape(len(kB), len(B)).T * sb[None, :]
    return Kw, WA, WB, len(A) - len(kA), len(B) - len(kB)


def _float_whitened(A, B, C):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    WA, _, dropA = inv_sqrt_floor(A)
    WB, _, dropB = inv_sqrt_floor(B)
    return WA.T @ C @ WB, WA, WB, dropA, dropB


def canonical_correlations(A, B, C, exact=None):
    """Singular values of the whitened cross-covariance plus the top pair.

    Returns (singular values, f, g, dropped_A, dropped_B)."""
    if exact is None:
        exact = all(isinstance(v, (Fraction, int)) for row in (*A, *B, *C) for v in row)
    if exact:
        K, WA, WB, dA, dB = _exact_whitened(A, B, C)
    else:
        K, WA, WB, dA, dB = _float_whitened(A, B, C)
    if K.size == 0:
        return np.zeros(0), np.zeros(len(A)), np.zeros(len(B)), dA, dB
    U, S, Vt = np.linalg.svd(K)
    f = WA @ U[:, 0]
    g = WB @ Vt[0]
    if f[np.argmax(np.abs(f))] < 0:
        f, g = -f, -g
    return S, f, g, dA, dB


def max_correlation(m, n, D, kappa, distribution="custom", mode=None):
    """Largest canonical correlation between span{s_n^i} and span{s_m^j}, i, j <= D."""
    if not isinstance(kappa, CumulantSequence):
        kappa = CumulantSequence(kappa)
    if mode == "float":
        kappa = kappa.to_float()
    A, B, C = joint_grams(m, n, D, kappa)
    exact = kappa.mode == "exact"
    S, f, g, dA, dB = canonical_correlations(A, B, C, exact)
    rho = float(min(S[0], 1.0)) if len(S) else 0.0
    theo = math.sqrt(m / n)
    lin = math.sqrt(float(C[0][0] ** 2 / (A[0][0] * B[0][0])))
    return CorrelationReport(
        m=m,
        n=n,
        degree=D,
        distribution=distribution,
        gram_A=A,
        gram_B=B,
        cross_C=C,
        rho_max=rho,
        optimizer_f=[float(v) for v in f],
        optimizer_g=[float(v) for v in g],
        theoretical=theo,
        deviation=abs(rho - theo),
        mode="exact" if exact else "float",
        dropped_A=dA,
        dropped_B=dB,
        linear_rho=lin,
        canonical_correlations=[float(s) for s in S],
    )


def linear_correlation_sq(m, n, kappa):
    """rho(s_n, s_m)^2 from the D = 1 grams, exact for rational cumulants."""
    A, B, C = joint_grams(m, n, 1, kappa)
    return C[0][0] ** 2 / (A[0][0] * B[0][0])


def correlation_sweep(m, n, D_max, kappa, distribution="custom", mode=None):
    """[(D, rho_max(D))] for D = 1..D_max."""
    if 2 * D_max > nc_lattice.R_MAX:
        raise ResourceError(f"2*D_max={2 * D_max} exceeds R_max", size=2 * D_max, cap=nc_lattice.R_MAX)
    return [(D, max_correlation(m, n, D, kappa, distribution, mode).rho_max) for D in range(1, D_max + 1)]


def max_correlation_from_grams(A, B, C, m, n, distribution="empirical"):
    """Eigensolve on externally supplied covariance matrices (float path)."""
    S, f, g, dA, dB = canonical_correlations(A, B, C, exact=False)
    rho = float(min(S[0], 1.0)) if len(S) else 0.0
    theo = math.sqrt(m / n)
    return CorrelationReport(
        m=m,
        n=n,
        degree=len(A),
        distribution=distribution,
        gram_A=np.asarray(A, float).tolist(),
        gram_B=np.asarray(B, float).tolist(),
        cross_C=np.asarray(C, float).tolist(),
        rho_max=rho,
        optimizer_f=[float(v) for v in f],
        optimizer_g=[float(v) for v in g],
        theoretical=theo,
        deviation=abs(rho - theo),
        mode="float",
        dropped_A=dA,
        dropped_B=dB,
        canonical_correlations=[float(s) for s in S],
    )
