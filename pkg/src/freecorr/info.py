"""Free entropy, free Fisher information and the monotonicity tables along
the free central limit theorem."""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate, signal

from .errors import AtomError, ConditioningError, DomainError, NumericalError
from .linalg import is_exact, ridge_solve, solve_exact
from .moments import CumulantSequence, MomentSequence, cumulants_to_moments, moments_to_cumulants
from .report import csv_text
from .transforms import (
    Atomic,
    Convolved,
    GridDensity,
    Measure,
    density_from_cumulants,
    density_on_grid,
)

CHI_CONST = 0.75 + 0.5 * math.log(2 * math.pi)
CHI_SEMICIRCLE = 0.5 * math.log(2 * math.pi * math.e)
DIVERGENCE_RATIO = 1.1


# ------------------------------------------------------------------ Fisher


@dataclass
class FisherResult:
    """Finite-degree estimate of the free Fisher information.

    ``coefficients`` expand the conjugate variable as sum c_k z^k. When
    ``divergent`` is set, ``phi`` is the last finite estimate and the true
    value is reported as infinite.
    """

    degree: int
    coefficients: list
    phi_finite: object
    residuals: list
    divergent: bool
    growth_ratio: float
    history: list = field(default_factory=list)
    atoms: bool = False
    mode: str = "exact"

    @property
    def phi(self):
        return math.inf if self.divergent else float(self.phi_finite)

    @property
    def max_residual(self):
        return max((abs(float(r)) for r in self.residuals), default=0.0)

    def to_json(self):
        return {
            "degree": self.degree,
            "phi": self.phi,
            "phi_at_degree": float(self.phi_finite) if self.phi_finite is not None else None,
            "divergent": self.divergent,
            "growth_ratio": self.growth_ratio,
            "atoms": self.atoms,
            "mode": self.mode,
            "coefficients": [float(c) for c in self.coefficients],
            "residuals": [float(r) for r in self.residuals],
            "history": [[d, float(p)] for d, p in self.history],
        }


def _rhs(mv, i):
    """sum_{k<i} m_k m_{i-1-k}: the value tau(xi z^i) must take."""
    acc = mv[0] * 0
    for k in range(i):
        acc += mv[k] * mv[i - 1 - k]
    return acc


def _fisher_solve(mv, D, exact):
    H = [[mv[i + j] for j in range(D + 1)] for i in range(D + 1)]
    b = [_rhs(mv, i) for i in range(D + 1)]
    if exact:
        c, _ = solve_exact(H, b)
        phi = sum((ci * bi for ci, bi in zip(c, b)), Fraction(0))
    else:
        c, _ = ridge_solve(np.array(H, dtype=float), np.array(b, dtype=float))
        c = c.tolist()
        phi = float(np.dot(c, b))
    return c, phi


def fisher_information(m, D=8):
    """Project the conjugate-variable relations onto polynomials of degree <= D.

    Solves H c = b with H_ij = m_{i+j} and b_i = sum_{k<i} m_k m_{i-1-k}
    (row 0 forces tau(xi) = 0); then Phi_D = c^T H c = c^T b. A Hankel
    system with no solution means the measure has finitely many atoms and
    Phi = infinity.

    Symmetric measures have odd conjugate variables, so Phi_D only grows
    every other degree; the divergence test therefore compares Phi_D with
    Phi_{D-2}.
    """
    if isinstance(m, CumulantSequence):
        m = cumulants_to_moments(m)
    if not isinstance(m, MomentSequence):
        m = MomentSequence(m)
    if D < 1:
        raise DomainError("degree must be >= 1")
    if m.order < 2 * D:
        raise DomainError(f"moments needed to order {2 * D}, have {m.order}")
    if m.variance() <= 0:
        raise DomainError("zero variance: point mass")
    exact = m.mode == "exact"
    mv = m.full()
    history = []
    c = None
    for d in range(1, D + 1):
        try:
            c, phi = _fisher_solve(mv, d, exact)
        except ConditioningError:
            last = history[-1][1] if history else math.inf
            return FisherResult(d, [], last, [], True, math.inf, history, atoms=True, mode=m.mode)
        history.append((d, phi))
    phi = history[-1][1]
    ref = history[-3][1] if len(history) >= 3 else history[0][1]
    ratio = float(phi) / float(ref) if float(ref) > 0 else math.inf
    divergent = len(history) >= 3 and ratio > DIVERGENCE_RATIO
    # residuals of tau(xi z^r) = sum m_k m_{r-1-k} wherever moments allow
    residuals = []
    for r in range(0, min(D + 1, m.order - D) + 1):
        lhs = sum(ci * mv[k + r] for k, ci in enumerate(c))
        residuals.append(lhs - _rhs(mv, r))
    return FisherResult(D, list(c), phi, residuals, divergent, ratio, history, mode=m.mode)


def cramer_rao_gap(result, variance):
    """Phi * sigma^2 - 1, which is >= 0 for every measure."""
    return result.phi * float(variance) - 1.0


# ------------------------------------------------------------------ entropy


def _pair_kernel(k):
    """J(k) = int_0^1 int_0^1 log|k + u - v| du dv for integer k >= 0."""
    k = np.asarray(k, dtype=float)

    def g(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 0.5 * x * x * np.log(np.abs(x)) - 0.75 * x * x
        return np.where(x == 0, 0.0, out)

    return g(k + 1) - 2 * g(k) + g(k - 1)


def log_energy(grid):
    """int int log|a - b| for a piecewise-constant density on equal cells.

    Each cell pair is integrated exactly, so the diagonal singularity
    needs no special treatment.
    """
    w = grid.values * grid.h
    w = w / w.sum()
    auto = signal.fftconvolve(w, w[::-1])
    M = len(w)
    lags = np.abs(np.arange(-(M - 1), M))
    return math.log(grid.h) + float(np.dot(auto, _pair_kernel(lags)))


def free_entropy(mu, points=4000):
    """chi(mu) = log-energy + 3/4 + log(2 pi)/2; -inf for measures with atoms."""
    if isinstance(mu, GridDensity):
        if abs(mu.mass - 1.0) > 1e-3:
            raise DomainError(f"density has mass {mu.mass}")
        return log_energy(mu) + CHI_CONST
    if not isinstance(mu, Measure):
        raise DomainError(f"free_entropy expects a measure, got {type(mu).__name__}")
    if mu.atoms():
        return -math.inf
    return log_energy(density_on_grid(mu, points=points)) + CHI_CONST


@dataclass
class EntropyEstimate:
    chi: float
    tolerance: float
    meta: dict

    def to_json(self):
        return {"chi": self.chi, "tolerance": self.tolerance, "meta": self.meta}


def free_entropy_estimate(mu, points=4000, density=None):
    """chi with an error bar from halving the grid resolution.

    ``density`` is a callable points -> GridDensity; by default the
    measure's own density sampler.
    """
    if density is None:
        if isinstance(mu, Atomic) or (isinstance(mu, Measure) and mu.atoms()):
            return EntropyEstimate(-math.inf, 0.0, {"atoms": True})

        def density(p):
            return density_on_grid(mu, points=p)

    fine = density(points)
    coarse = density(points // 2)
    chi = log_energy(fine) + CHI_CONST
    chi2 = log_energy(coarse) + CHI_CONST
    delta = abs(fine.meta.get("renormalization_delta", 0.0))
    tol = abs(chi - chi2) + delta
    meta = dict(fine.meta)
    meta["chi_half_grid"] = chi2
    return EntropyEstimate(chi, tol, meta)


def entropy_via_fisher(mu, t_grid=None, D=12, T=200.0):
    """chi via the heat-flow integral of the Fisher information.

    chi = 1/2 int_0^inf (1/(1+t) - Phi(mu boxplus SC(t))) dt + log(2 pi e)/2.
    The integral is computed adaptively on [0, T] (``t_grid`` supplies
    breakpoints) and the tail beyond T uses Phi ~ 1/(sigma^2 + t).
    """
    if isinstance(mu, CumulantSequence):
        kappa = mu
    elif isinstance(mu, MomentSequence):
        kappa = moments_to_cumulants(mu)
    else:
        kappa = mu.cumulants(2 * D)
    kappa = kappa.truncate(2 * D).to_float()
    var = float(kappa[2])
    if t_grid is not None:
        t_grid = sorted(float(t) for t in t_grid)
        T = t_grid[-1]

    def integrand(t):
        res = fisher_information(cumulants_to_moments(kappa.add_semicircular(t)), D)
        if res.divergent or res.atoms:
            if t == 0.0:
                # the endpoint has no weight in the integral; approach it instead
                return integrand(1e-12)
            raise NumericalError(f"Fisher information did not converge at t={t}", worst_point=t)
        return 1.0 / (1.0 + t) - res.phi

    points = [p for p in (t_grid or []) if 0 < p < T] or None
    val, err = integrate.quad(integrand, 0.0, T, points=points, limit=200, epsabs=1e-10, epsrel=1e-10)
    tail = math.log((var + T) / (1.0 + T))
    return 0.5 * (val + tail) + CHI_SEMICIRCLE


# ------------------------------------------------------------------ monotonicity


@dataclass
class MonotonicityRow:
    n: int
    chi: float
    chi_tol: float
    phi: float
    phi_tol: float
    phi_divergent: bool
    meta: dict = field(default_factory=dict)


@dataclass
class MonotonicityReport:
    measure: str
    rows: list
    degree: int
    order: int
    chi_nondecreasing: bool
    phi_nonincreasing: bool
    chi_gaps_resolved: bool
    phi_gaps_resolved: bool
    intermediate: list = field(default_factory=list)

    @property
    def intermediate_ok(self):
        return all(r["holds"] for r in self.intermediate)

    @property
    def passed(self):
        return self.chi_nondecreasing and self.phi_nonincreasing and self.intermediate_ok

    def to_csv(self):
        rows = [
            (r.n, r.chi, r.chi_tol, "inf" if r.phi_divergent else r.phi, r.phi_tol, int(r.phi_divergent))
            for r in self.rows
        ]
        return csv_text(["n", "chi", "chi_tol", "phi", "phi_tol", "phi_divergent"], rows)

    def to_json(self):
        return {
            "measure": self.measure,
            "degree": self.degree,
            "order": self.order,
            "rows": [
                {
                    "n": r.n,
                    "chi": r.chi,
                    "chi_tol": r.chi_tol,
                    "phi": math.inf if r.phi_divergent else r.phi,
                    "phi_at_degree": r.phi,
                    "phi_tol": r.phi_tol,
                    "phi_divergent": r.phi_divergent,
                    "meta": r.meta,
                }
                for r in self.rows
            ],
            "chi_nondecreasing": self.chi_nondecreasing,
            "phi_nonincreasing": self.phi_nonincreasing,
            "chi_gaps_resolved": self.chi_gaps_resolved,
            "phi_gaps_resolved": self.phi_gaps_resolved,
            "intermediate": self.intermediate,
            "pass": self.passed,
        }


def _phi_key(row):
    return (1, 0.0) if row.phi_divergent else (0, row.phi)


def _chi_values(mu, n, points, density, kappa_n):
    """chi of n^{-1/2} mu^{boxplus n} with its error bar."""
    if density == "subordination" and isinstance(mu, Measure):
        nu = _normalized_power(mu, n)
        if nu.atoms():
            return EntropyEstimate(-math.inf, 0.0, {"atoms": True})
        return free_entropy_estimate(nu, points)
    try:
        est = free_entropy_estimate(None, points, lambda p: density_from_cumulants(kappa_n, points=p))
    except AtomError:
        return EntropyEstimate(-math.inf, 0.0, {"atoms": True})
    # sensitivity to the cumulant truncation: drop the last two orders
    if kappa_n.order >= 6:
        shorter = log_energy(density_from_cumulants(kappa_n.truncate(kappa_n.order - 2), points=points)) + CHI_CONST
        trunc = abs(est.chi - shorter)
        est.meta["chi_truncation"] = trunc
        est.tolerance += trunc
    return est


def _normalized_power(mu, n):
    if isinstance(mu, Convolved) and mu.power == 1 and mu.dilation_sq == 1:
        return Convolved(mu.base, n, mu.smoothing * n, Fraction(1, n))
    return Convolved(mu, n, 0, Fraction(1, n))


def monotonicity_report(mu, n_max=6, D=8, N=16, points=4000, density="cumulants"):
    """chi_n and Phi_n for n^{-1/2}_* mu^{boxplus n}, n = 1..n_max.

    Phi uses the degree-D conjugate-variable solve on the first N
    moments. chi uses the log-energy of a recovered density: by
    continued-fraction inversion of the first N cumulants
    (``density="cumulants"``), or from the subordination equation of the
    full measure (``density="subordination"``; slower, sharper at
    square-root-singular edges).
    Error bars: |Phi_D - Phi_{D-2}| for Phi; for chi the grid-halving
    change plus the renormalization delta, plus |chi_N - chi_{N-2}| on
    the cumulant path.
    """
    if density not in ("subordination", "cumulants"):
        raise DomainError(f"unknown density method {density!r}")
    if N < 2 * D:
        raise DomainError(f"need N >= 2D moments, got N={N}, D={D}")
    base = mu.cumulants(N) if isinstance(mu, Measure) else mu.truncate(N)
    if base[2] <= 0:
        raise DomainError("sigma = 0")
    rows = []
    raw = {}
    for n in range(1, n_max + 1):
        kn = base.scale(n)
        raw[n] = kn
        normalized = _rescale(kn, n)
        fr = fisher_information(cumulants_to_moments(normalized), D)
        hist = dict(fr.history)
        phi_tol = abs(float(hist[D]) - float(hist[D - 2])) if D >= 3 and not fr.atoms else math.inf
        est = _chi_values(mu, n, points, density, normalized)
        rows.append(
            MonotonicityRow(
                n=n,
                chi=est.chi,
                chi_tol=est.tolerance,
                phi=float(fr.phi_finite),
                phi_tol=phi_tol,
                phi_divergent=fr.divergent or fr.atoms,
                meta={"degree": D, "order": N, "density": density, **_short(est.meta)},
            )
        )
    chi_ok = all(b.chi >= a.chi for a, b in zip(rows, rows[1:]))
    phi_ok = all(_phi_key(b) <= _phi_key(a) for a, b in zip(rows, rows[1:]))
    chi_res = all(
        math.isinf(a.chi) or (b.chi - a.chi) > a.chi_tol + b.chi_tol for a, b in zip(rows, rows[1:])
    )
    phi_res = all(
        a.phi_divergent or (a.phi - b.phi) > a.phi_tol + b.phi_tol for a, b in zip(rows, rows[1:])
    )
    inter = []
    for n in range(2, min(n_max, 4) + 1):
        for m in range(1, n):
            fn = fisher_information(cumulants_to_moments(raw[n]), D)
            fm = fisher_information(cumulants_to_moments(raw[m]), D)
            if fm.divergent or fm.atoms:
                holds = True
                lhs, rhs = fn.phi, math.inf
            else:
                lhs, rhs = fn.phi, m / n * fm.phi
                holds = lhs <= rhs + 1e-12
            inter.append({"m": m, "n": n, "phi_n": lhs, "m_over_n_phi_m": rhs, "holds": bool(holds)})
    name = mu.describe() if isinstance(mu, Measure) else "cumulants"
    return MonotonicityReport(name, rows, D, N, chi_ok, phi_ok, chi_res, phi_res, inter)


def _rescale(kappa, n):
    """Cumulants of n^{-1/2} x: kappa_r * n^{-r/2}."""
    out = []
    for r, v in enumerate(kappa.values, start=1):
        if r % 2 == 0:
            out.append(v / Fraction(n) ** (r // 2) if is_exact(v) else v / n ** (r // 2))
        elif v == 0:
            out.append(v)
        else:
            out.append(float(v) / n ** (r / 2))
    return CumulantSequence(out)


def _short(meta):
    keep = ("method", "eps", "points", "renormalization_delta", "chi_half_grid", "chi_truncation", "atoms")
    return {k: meta[k] for k in keep if k in meta}
