"""Compactly supported measures, Cauchy transforms, free additive
convolution powers, dilations and density recovery by Stieltjes inversion.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import AtomError, DomainError, NumericalError, SupportWindowError
from .linalg import fmt_scalar, is_exact, parse_scalar
from .moments import CumulantSequence, MomentSequence, cumulants_to_moments, moments_to_cumulants

DEFAULT_ORDER = 16
DEFAULT_EPS = (1e-2, 5e-3, 2.5e-3)
MASS_TOL = 1e-3


def _num(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    return x


def _richardson(vals):
    """Extrapolate values computed at eps, eps/2, eps/4, ... to eps -> 0."""
    table = [np.asarray(v, dtype=float) for v in vals]
    k = 1
    while len(table) > 1:
        f = 2.0 ** k
        table = [(f * b - a) / (f - 1) for a, b in zip(table, table[1:])]
        k += 1
    return table[0]


def _sqrt_branch(w, c):
    """sqrt(w^2 - c^2) with the branch behaving like w at infinity."""
    return np.sqrt(w - c) * np.sqrt(w + c)


class Measure:
    """Base class; subclasses provide moments and a Cauchy transform."""

    kind = "measure"

    def moments(self, N=DEFAULT_ORDER):
        raise NotImplementedError

    def cumulants(self, N=DEFAULT_ORDER):
        return moments_to_cumulants(self.moments(N))

    def cauchy(self, z):
        raise NotImplementedError

    def cauchy_derivative(self, z):
        raise NotImplementedError

    def atoms(self):
        return []

    @property
    def has_density(self):
        return not self.atoms()

    def support(self):
        raise NotImplementedError

    def mean(self):
        return self.moments(1)[1]

    def variance(self):
        return self.moments(2).variance()

    @property
    def exact(self):
        return self.moments(2).mode == "exact"

    def to_json(self):
        raise NotImplementedError

    def describe(self):
        return self.kind


@dataclass(frozen=True)
class Atomic(Measure):
    """Finitely many point masses [(location, weight), ...]."""

    points: tuple
    kind = "atomic"

    def __post_init__(self):
        pts = tuple((_num(a), _num(w)) for a, w in self.points)
        if not pts:
            raise DomainError("atomic measure needs at least one atom")
        if any(w < 0 for _, w in pts):
            raise DomainError("negative weight")
        total = sum(w for _, w in pts)
        if abs(float(total) - 1.0) > 1e-10:
            raise DomainError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "points", pts)

    def moments(self, N=DEFAULT_ORDER):
        return MomentSequence([sum(w * a ** r for a, w in self.points) for r in range(1, N + 1)])

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        return sum(float(w) / (z - float(a)) for a, w in self.points)

    def cauchy_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return sum(-float(w) / (z - float(a)) ** 2 for a, w in self.points)

    def atoms(self):
        return [(a, w) for a, w in self.points if w > 0]

    def support(self):
        locs = [float(a) for a, _ in self.points]
        return min(locs), max(locs)

    def to_json(self):
        return {"type": "atomic", "params": {"atoms": [[fmt_scalar(a), fmt_scalar(w)] for a, w in self.points]}}

    def describe(self):
        if self.points == ((Fraction(-1), Fraction(1, 2)), (Fraction(1), Fraction(1, 2))):
            return "bernoulli"
        return f"atomic({len(self.points)})"


@dataclass(frozen=True)
class Semicircular(Measure):
    mean_: object = 0
    var: object = 1
    kind = "semicircular"

    def __post_init__(self):
        object.__setattr__(self, "mean_", _num(self.mean_))
        object.__setattr__(self, "var", _num(self.var))
        if self.var <= 0:
            raise DomainError("semicircular variance must be positive")

    def cumulants(self, N=DEFAULT_ORDER):
        zero = self.var * 0
        vals = [self.mean_, self.var] + [zero] * (N - 2)
        return CumulantSequence(vals[:N])

    def moments(self, N=DEFAULT_ORDER):
        return cumulants_to_moments(self.cumulants(N))

    def _w(self, z):
        return np.asarray(z, dtype=complex) - float(self.mean_)

    def cauchy(self, z):
        w = self._w(z)
        v = float(self.var)
        return (w - _sqrt_branch(w, 2.0 * math.sqrt(v))) / (2.0 * v)

    def cauchy_derivative(self, z):
        w = self._w(z)
        v = float(self.var)
        return (1.0 - w / _sqrt_branch(w, 2.0 * math.sqrt(v))) / (2.0 * v)

    def density(self, t):
        t = np.asarray(t, dtype=float) - float(self.mean_)
        v = float(self.var)
        return np.sqrt(np.maximum(4.0 * v - t * t, 0.0)) / (2.0 * math.pi * v)

    def cdf(self, t):
        r = 2.0 * math.sqrt(float(self.var))
        u = np.clip((np.asarray(t, dtype=float) - float(self.mean_)) / r, -1.0, 1.0)
        return 0.5 + (u * np.sqrt(1 - u * u) + np.arcsin(u)) / math.pi

    def support(self):
        r = 2.0 * math.sqrt(float(self.var))
        return float(self.mean_) - r, float(self.mean_) + r

    def to_json(self):
        return {"type": "semicircular", "params": {"mean": fmt_scalar(self.mean_), "var": fmt_scalar(self.var)}}

    def describe(self):
        return f"semicircular({self.mean_},{self.var})"


@dataclass(frozen=True)
class Uniform(Measure):
    a: object = -1
    b: object = 1
    kind = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "a", _num(self.a))
        object.__setattr__(self, "b", _num(self.b))
        if not self.b > self.a:
            raise DomainError("uniform needs a < b")

    def moments(self, N=DEFAULT_ORDER):
        a, b = self.a, self.b
        return MomentSequence([(b ** (r + 1) - a ** (r + 1)) / ((r + 1) * (b - a)) for r in range(1, N + 1)])

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        a, b = float(self.a), float(self.b)
        return (np.log(z - a) - np.log(z - b)) / (b - a)

    def cauchy_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        a, b = float(self.a), float(self.b)
        return (1.0 / (z - a) - 1.0 / (z - b)) / (b - a)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        a, b = float(self.a), float(self.b)
        return np.where((t >= a) & (t <= b), 1.0 / (b - a), 0.0)

    def cdf(self, t):
        a, b = float(self.a), float(self.b)
        return np.clip((np.asarray(t, dtype=float) - a) / (b - a), 0.0, 1.0)

    def support(self):
        return float(self.a), float(self.b)

    def to_json(self):
        return {"type": "uniform", "params": {"a": fmt_scalar(self.a), "b": fmt_scalar(self.b)}}

    def describe(self):
        return f"uniform({self.a},{self.b})"


class GridDensity(Measure):
    """Piecewise-constant density on equal cells centred at the points ``t``."""

    kind = "grid"

    def __init__(self, t, values, meta=None, check_mass=True):
        t = np.asarray(t, dtype=float)
        values = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != values.shape or len(t) < 2:
            raise DomainError("grid and values must be 1-d arrays of equal length >= 2")
        h = np.diff(t)
        if not np.allclose(h, h[0], rtol=1e-8, atol=0):
            raise DomainError("grid must be uniform")
        if np.any(values < 0):
            raise DomainError("negative density values")
        self.t = t
        self.values = values
        self.h = float(h[0])
        self.meta = dict(meta or {})
        if check_mass and abs(self.mass - 1.0) > MASS_TOL:
            raise DomainError(f"density integrates to {self.mass}, not 1")

    @property
    def mass(self):
        return float(self.values.sum() * self.h)

    @property
    def edges(self):
        return self.t[0] - self.h / 2, self.t[-1] + self.h / 2

    def normalized(self):
        return GridDensity(self.t, self.values / self.mass, self.meta)

    def moments(self, N=DEFAULT_ORDER):
        lo = self.t - self.h / 2
        hi = self.t + self.h / 2
        w = self.values / self.mass
        out = []
        for r in range(1, N + 1):
            cell = (hi ** (r + 1) - lo ** (r + 1)) / (r + 1)
            out.append(float(np.dot(w, cell)))
        return MomentSequence(out)

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        lo = self.t - self.h / 2
        hi = self.t + self.h / 2
        w = self.values / self.mass
        zz = z[..., None]
        return (w * (np.log(zz - lo) - np.log(zz - hi))).sum(-1)

    def cauchy_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        lo = self.t - self.h / 2
        hi = self.t + self.h / 2
        w = self.values / self.mass
        zz = z[..., None]
        return (w * (1.0 / (zz - lo) - 1.0 / (zz - hi))).sum(-1)

    def density(self, t):
        return np.interp(t, self.t, self.values / self.mass, left=0.0, right=0.0)

    def support(self):
        nz = np.nonzero(self.values > 0)[0]
        if len(nz) == 0:
            return self.edges
        return self.t[nz[0]] - self.h / 2, self.t[nz[-1]] + self.h / 2

    def to_json(self):
        return {
            "type": "grid",
            "params": {"t": self.t.tolist(), "density": self.values.tolist()},
            "meta": self.meta,
        }

    def to_csv(self):
        from .report import csv_text

        return csv_text(["t", "rho"], zip(self.t.tolist(), self.values.tolist()))

    def describe(self):
        return f"grid({len(self.t)})"


@dataclass(frozen=True)
class Convolved(Measure):
    """Law of  sqrt(dilation_sq) * (base^{boxplus power} boxplus SC(0, smoothing)).

    The dilation is stored squared so that n^{-1/2} scalings stay exact on
    the even cumulants.
    """

    base: Measure
    power: int = 1
    smoothing: object = 0
    dilation_sq: object = 1
    kind = "convolved"

    def __post_init__(self):
        if not isinstance(self.power, int) or self.power < 1:
            raise DomainError("free power must be an integer >= 1")
        object.__setattr__(self, "smoothing", _num(self.smoothing))
        object.__setattr__(self, "dilation_sq", _num(self.dilation_sq))
        if self.smoothing < 0:
            raise DomainError("smoothing variance must be >= 0")
        if self.dilation_sq <= 0:
            raise DomainError("dilation must be positive")

    @property
    def alpha(self):
        return math.sqrt(float(self.dilation_sq))

    def cumulants(self, N=DEFAULT_ORDER):
        k = self.base.cumulants(N).scale(self.power)
        if self.smoothing != 0:
            k = k.add_semicircular(self.smoothing)
        if self.dilation_sq == 1:
            return k
        out = []
        for r, v in enumerate(k.values, start=1):
            if r % 2 == 0:
                out.append(v * self.dilation_sq ** (r // 2))
            elif v == 0:
                out.append(v)
            elif is_exact(v) and _is_square(self.dilation_sq):
                out.append(v * _exact_sqrt(self.dilation_sq) ** r)
            else:
                out.append(float(v) * self.alpha ** r)
        return CumulantSequence(out)

    def moments(self, N=DEFAULT_ORDER):
        return cumulants_to_moments(self.cumulants(N))

    def _inner(self, z):
        """Cauchy transform of base^{boxplus n} boxplus SC(v) (undilated)."""
        return subordination_cauchy(self.base, self.power, float(self.smoothing), z)

    def cauchy(self, z):
        a = self.alpha
        return self._inner(np.asarray(z, dtype=complex) / a) / a

    def cauchy_derivative(self, z, h=1e-7):
        z = np.asarray(z, dtype=complex)
        step = h * np.maximum(1.0, np.abs(z))
        return (self.cauchy(z + step) - self.cauchy(z - step)) / (2 * step)

    def atoms(self):
        if self.smoothing != 0:
            return []
        n = self.power
        out = []
        for a, w in self.base.atoms():
            mass = n * w - (n - 1)
            if mass > 0:
                out.append((a * n * self.alpha, mass))
        return out

    def support(self):
        lo, hi = self.base.support()
        n = self.power
        k = self.base.cumulants(2)
        mean, var = float(k[1]), float(k[2])
        # free sums concentrate: bound by both the trivial interval and a
        # variance-based radius around the mean
        trivial = (n * lo, n * hi)
        radius = 2.0 * math.sqrt(n * var) + max(hi - lo, 0.0) + 2.0 * math.sqrt(float(self.smoothing))
        lo2 = max(trivial[0], n * mean - radius) - 2.0 * math.sqrt(float(self.smoothing))
        hi2 = min(trivial[1], n * mean + radius) + 2.0 * math.sqrt(float(self.smoothing))
        a = self.alpha
        return lo2 * a, hi2 * a

    def to_json(self):
        return {
            "type": "convolved",
            "params": {
                "base": self.base.to_json(),
                "power": self.power,
                "smoothing": fmt_scalar(self.smoothing),
                "dilation_sq": fmt_scalar(self.dilation_sq),
            },
        }

    def describe(self):
        parts = [self.base.describe()]
        if self.power != 1:
            parts.append(f"^boxplus{self.power}")
        if self.smoothing != 0:
            parts.append(f"+SC({self.smoothing})")
        if self.dilation_sq != 1:
            parts.append(f"*sqrt({self.dilation_sq})")
        return "".join(parts)


def _is_square(q):
    q = Fraction(q)
    return math.isqrt(q.numerator) ** 2 == q.numerator and math.isqrt(q.denominator) ** 2 == q.denominator


def _exact_sqrt(q):
    q = Fraction(q)
    return Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))


# ------------------------------------------------------------- named families


def bernoulli():
    """Symmetric Bernoulli 1/2 delta_{-1} + 1/2 delta_{1}."""
    return Atomic(((-1, Fraction(1, 2)), (1, Fraction(1, 2))))


def named_measure(name, smooth=0, **params):
    """Build a named family, optionally freely convolved with SC(0, smooth)."""
    name = name.lower()
    if name in ("semicircular", "semicircle", "sc"):
        mu = Semicircular(params.get("mean", 0), params.get("var", 1))
    elif name == "bernoulli":
        mu = bernoulli()
    elif name == "uniform":
        mu = Uniform(params.get("a", -1), params.get("b", 1))
    elif name == "atomic":
        mu = Atomic(tuple(tuple(p) for p in params["atoms"]))
    else:
        raise DomainError(f"unknown distribution {name!r}")
    smooth = _num(smooth)
    if smooth:
        mu = Convolved(mu, 1, smooth)
    return mu


def measure_from_json(obj):
    """Inverse of ``Measure.to_json``: {type, params}."""
    kind = obj["type"]
    p = obj.get("params", {})
    if kind == "atomic":
        return Atomic(tuple((parse_scalar(a), parse_scalar(w)) for a, w in p["atoms"]))
    if kind == "semicircular":
        return Semicircular(parse_scalar(p.get("mean", 0)), parse_scalar(p.get("var", 1)))
    if kind == "uniform":
        return Uniform(parse_scalar(p.get("a", -1)), parse_scalar(p.get("b", 1)))
    if kind == "bernoulli":
        return bernoulli()
    if kind == "grid":
        return GridDensity(p["t"], p["density"], obj.get("meta"))
    if kind == "convolved":
        return Convolved(
            measure_from_json(p["base"]),
            int(p.get("power", 1)),
            parse_scalar(p.get("smoothing", 0)),
            parse_scalar(p.get("dilation_sq", 1)),
        )
    raise DomainError(f"unknown measure type {kind!r}")


# ------------------------------------------------------------- operations


def moments_of(mu, N=DEFAULT_ORDER):
    """Moments m_1..m_N of a measure (or pass-through for sequences)."""
    if isinstance(mu, MomentSequence):
        return mu.truncate(N)
    if isinstance(mu, CumulantSequence):
        return cumulants_to_moments(mu.truncate(N))
    return mu.moments(N)


def _cumulants(x, N):
    if isinstance(x, CumulantSequence):
        return x.truncate(N)
    if isinstance(x, MomentSequence):
        return moments_to_cumulants(x.truncate(N))
    return x.cumulants(N)


def free_convolve(mu, nu, N=DEFAULT_ORDER):
    """Moments of mu boxplus nu via additivity of free cumulants."""
    return cumulants_to_moments(_cumulants(mu, N) + _cumulants(nu, N))


def free_power(mu, n, N=DEFAULT_ORDER):
    """Moments of mu^{boxplus n}, n a positive integer."""
    if not isinstance(n, int) or n < 1:
        raise DomainError("free power needs an integer n >= 1")
    return cumulants_to_moments(_cumulants(mu, N).scale(n))


def dilate(mu, alpha, squared=False):
    """Pushforward by t -> alpha t (alpha > 0).

    With ``squared=True`` the argument is alpha^2, which keeps
    n^{-1/2} dilations exact on even moments.
    """
    a2 = _num(alpha) if squared else None
    if squared:
        if a2 <= 0:
            raise DomainError("dilation must be positive")
        alpha = _exact_sqrt(a2) if is_exact(a2) and _is_square(a2) else math.sqrt(float(a2))
    else:
        alpha = _num(alpha)
        if alpha <= 0:
            raise DomainError("dilation must be positive")
    if isinstance(mu, MomentSequence):
        if squared and not is_exact(alpha):
            vals = []
            for r, v in enumerate(mu.values, start=1):
                vals.append(v * a2 ** (r // 2) if r % 2 == 0 else (v if v == 0 else float(v) * alpha ** r))
            return MomentSequence(vals)
        return MomentSequence([alpha ** r * v for r, v in enumerate(mu.values, start=1)])
    if isinstance(mu, Atomic):
        return Atomic(tuple((alpha * a, w) for a, w in mu.points))
    if isinstance(mu, Semicircular):
        return Semicircular(alpha * mu.mean_, (a2 if squared else alpha ** 2) * mu.var)
    if isinstance(mu, Uniform):
        return Uniform(alpha * mu.a, alpha * mu.b)
    if isinstance(mu, GridDensity):
        a = float(alpha)
        return GridDensity(mu.t * a, mu.values / a, mu.meta)
    if isinstance(mu, Convolved):
        return Convolved(mu.base, mu.power, mu.smoothing, mu.dilation_sq * (a2 if squared else alpha ** 2))
    raise DomainError(f"cannot dilate {type(mu).__name__}")


def cauchy_transform(mu, z):
    return mu.cauchy(z)


# ------------------------------------------------------------- subordination


def subordination_cauchy(base, n, v, z, tol=1e-13, max_iter=10000, damping=0.5):
    """Cauchy transform of base^{boxplus n} boxplus SC(0, v) at points z.

    Solves  w = z/n + (1 - 1/n) F(w) - (v/n) G(w)  with G the base Cauchy
    transform and F = 1/G, then returns G(w). A short damped iteration
    seeds a safeguarded Newton solve; points where Newton stalls fall back
    to damped iteration.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if n == 1 and v == 0:
        return base.cauchy(z)
    c1 = 1.0 - 1.0 / n
    c2 = v / n

    def fmap(w):
        G = base.cauchy(w)
        return z / n + c1 / G - c2 * G

    def resid(w):
        return w - fmap(w)

    w = z.copy()
    for _ in range(30):
        w = damping * w + (1 - damping) * fmap(w)
    r = resid(w)
    for it in range(max_iter):
        err = np.abs(r)
        if np.all(err < tol * np.maximum(1.0, np.abs(w))):
            break
        G = base.cauchy(w)
        dG = base.cauchy_derivative(w)
        dF = -dG / (G * G)
        jac = 1.0 - c1 * dF + c2 * dG
        step = r / jac
        cand = w - step
        bad = ~np.isfinite(cand) | (cand.imag <= 0)
        rc = np.where(bad, np.inf, np.abs(resid(np.where(bad, w, cand))))
        worse = bad | (rc >= err)
        # damped fixed-point step where Newton does not decrease the residual
        fallback = damping * w + (1 - damping) * fmap(w)
        w = np.where(worse, fallback, cand)
        r = resid(w)
    else:
        k = int(np.argmax(np.abs(r)))
        raise NumericalError(f"subordination did not converge at z={z[k]}", worst_point=complex(z[k]))
    return base.cauchy(w)


# ------------------------------------------------------------- density recovery


def _stieltjes(gfun, t, eps_seq):
    vals = [-np.imag(gfun(t + 1j * e)) / math.pi for e in eps_seq]
    if len(eps_seq) == 1:
        return vals[0], vals
    ratios = [b / a for a, b in zip(eps_seq, eps_seq[1:])]
    if not np.allclose(ratios, 0.5):
        raise DomainError("epsilon sequence must halve at each step for Richardson extrapolation")
    return _richardson(vals), vals


def _window_from(mu):
    lo, hi = mu.support()
    pad = 0.02 * (hi - lo) + 1e-9
    return lo - pad, hi + pad


def density_on_grid(mu, points=4000, window=None, eps=(1e-3, 5e-4, 2.5e-4)):
    """Density of a measure sampled at ``points`` cell centres.

    Closed-form densities are sampled directly; free convolution powers go
    through Stieltjes inversion of the subordination Cauchy transform.
    Measures with atoms raise AtomError.
    """
    if mu.atoms():
        raise AtomError(f"{mu.describe()} has atoms and no density")
    if isinstance(mu, GridDensity):
        return mu
    if window is None:
        window = _window_from(mu)
    lo, hi = window
    if hasattr(mu, "cdf"):
        # exact cell averages of the closed-form density
        edges = np.linspace(lo, hi, points + 1)
        t = 0.5 * (edges[1:] + edges[:-1])
        rho = np.diff(mu.cdf(edges)) / (edges[1] - edges[0])
        return _finish(t, rho, {"method": "closed-form"})
    # locate the support on a coarse grid, then refine
    for _ in range(20):
        tc = _centres(lo, hi, 400)
        rc, _ = _stieltjes(mu.cauchy, tc, eps)
        rc = np.maximum(rc, 0)
        hc = tc[1] - tc[0]
        mass = rc.sum() * hc
        if mass >= 1 - MASS_TOL:
            break
        width = hi - lo
        lo, hi = lo - 0.1 * width, hi + 0.1 * width
    else:
        raise SupportWindowError(f"captured mass {mass} < {1 - MASS_TOL}")
    thresh = 1e-6 * rc.max()
    nz = np.nonzero(rc > thresh)[0]
    lo2 = tc[max(nz[0] - 2, 0)] - hc
    hi2 = tc[min(nz[-1] + 2, len(tc) - 1)] + hc
    # refine until the cells resolve eps (needed near edge singularities),
    # then average blocks of fine cells back to the requested grid
    k_max = max(1, int(math.ceil((hi2 - lo2) / points / (0.5 * min(eps)))))
    k = 1
    while True:
        tf = _centres(lo2, hi2, points * k)
        rf, _ = _stieltjes(mu.cauchy, tf, eps)
        rho = rf.reshape(points, k).mean(axis=1)
        mass = float(np.maximum(rho, 0).sum() * (hi2 - lo2) / points)
        if abs(mass - 1.0) <= MASS_TOL or k >= k_max:
            break
        k = min(4 * k, k_max)
    t = _centres(lo2, hi2, points)
    meta = {"method": "subordination", "eps": list(eps), "window": [lo2, hi2], "refinement": k}
    return _finish(t, rho, meta)


def _centres(lo, hi, m):
    edges = np.linspace(lo, hi, m + 1)
    return 0.5 * (edges[1:] + edges[:-1])


def _finish(t, rho, meta):
    rho = np.asarray(rho, dtype=float)
    neg = float(-rho[rho < 0].sum() * (t[1] - t[0])) if np.any(rho < 0) else 0.0
    rho = np.maximum(rho, 0.0)
    mass = float(rho.sum() * (t[1] - t[0]))
    if abs(mass - 1.0) > MASS_TOL:
        raise SupportWindowError(f"recovered mass {mass} deviates from 1 by more than {MASS_TOL}")
    meta = dict(meta)
    meta.update({"renormalization_delta": mass - 1.0, "clamped_negative_mass": neg, "points": len(t)})
    return GridDensity(t, rho / mass, meta)


def jacobi_parameters(m):
    """Three-term recurrence coefficients (a_k, b_k) from moments by the
    Chebyshev algorithm; exact for rational moments.

    Returns (a, b) with b[0] = m_0 = 1. Stops early if some b_k vanishes
    (finitely supported measure).
    """
    mv = list(m.full())
    L = len(mv)
    n = L // 2
    zero = mv[0] * 0
    sig_prev = [zero] * L
    sig = list(mv)
    a = [mv[1] / mv[0]]
    b = [mv[0]]
    for k in range(1, n + 1):
        new = [zero] * L
        for l in range(k, L - k):
            new[l] = sig[l + 1] - a[k - 1] * sig[l] - b[k - 1] * sig_prev[l]
        bk = new[k] / sig[k - 1]
        if bk == 0 or (not is_exact(bk) and abs(bk) < 1e-14 * abs(b[-1] if len(b) > 1 else 1)):
            b.append(bk)
            break
        b.append(bk)
        if k + 1 <= L - k - 1:
            a.append(new[k + 1] / new[k] - sig[k] / sig[k - 1])
        sig_prev, sig = sig, new
        if len(a) <= k:
            break
    return a, b


def _jacobi_cauchy(a, b):
    af = [float(x) for x in a]
    bf = [float(x) for x in b]
    K = len(af) - 1
    ainf = af[K]
    binf = bf[min(K, len(bf) - 1)] if len(bf) > 1 else 0.0
    if binf <= 0:
        raise AtomError("recurrence terminates: the moments belong to a finitely supported measure")

    M = min(len(af), len(bf) - 1)
    if M >= 4 and (_period_two(bf[1 : M + 1]) or _period_two(af[:M])):
        return _two_band_cauchy(af[:M], bf[: M + 1])

    def G(z):
        z = np.asarray(z, dtype=complex)
        w = z - ainf
        tail = (w - _sqrt_branch(w, 2.0 * math.sqrt(binf))) / (2.0 * binf)
        acc = tail
        for k in range(K, -1, -1):
            bk1 = bf[k + 1] if k + 1 < len(bf) else binf
            acc = 1.0 / (z - af[k] - bk1 * acc)
        return acc * bf[0]

    return G


def _period_two(x):
    """True when the last four coefficients alternate by much more than
    each parity class drifts (a gap in the support)."""
    if len(x) < 4:
        return False
    x = x[-4:]
    d = [x[i + 1] - x[i] for i in range(3)]
    if not (d[0] * d[1] < 0 and d[1] * d[2] < 0):
        return False
    drift = max(abs(x[3] - x[1]), abs(x[2] - x[0]))
    return min(abs(v) for v in d) > 10.0 * drift


def _two_band_cauchy(af, bf):
    """Continued fraction closed by the period-2 tail of its last two levels.

    With u = z - a_{M-2}, v = z - a_{M-1}, beta1 = b_{M-1}, beta2 = b_M the
    tail T solves u beta2 T^2 - (uv + beta2 - beta1) T + v = 0. The
    discriminant is a monic quartic with four real roots (the band edges);
    taking the product of principal square roots puts its cuts on the bands.
    """
    M = len(af)
    a1, a2 = af[M - 2], af[M - 1]
    b1, b2 = bf[M - 1], bf[M]
    if min(b1, b2) <= 0:
        raise AtomError("recurrence terminates: the moments belong to a finitely supported measure")
    mid, half = 0.5 * (a1 + a2), 0.5 * (a1 - a2)
    edges = []
    for P in ((math.sqrt(b1) - math.sqrt(b2)) ** 2, (math.sqrt(b1) + math.sqrt(b2)) ** 2):
        r = math.sqrt(half * half + P)
        edges += [mid - r, mid + r]

    def G(z):
        z = np.asarray(z, dtype=complex)
        u, v = z - a1, z - a2
        root = np.ones_like(z)
        for e in edges:
            root = root * np.sqrt(z - e)
        X = u * v + b2 - b1
        acc = (X - root) / (2.0 * u * b2)
        # the tail enters at level M, which repeats level M - 2
        for k in range(M - 1, -1, -1):
            acc = 1.0 / (z - af[k] - bf[k + 1] * acc)
        return acc * bf[0]

    return G


def _rseries_cauchy(kappa, damping=0.5, max_iter=10000, tol=1e-12):
    kv = [float(x) for x in kappa.values]

    def R(w):
        acc = np.zeros_like(w)
        for c in reversed(kv):
            acc = acc * w + c
        return acc

    def G(z):
        z = np.asarray(z, dtype=complex)
        g = 1.0 / z
        for _ in range(max_iter):
            new = 1.0 / (z - R(g))
            if np.all(np.abs(new - g) < tol):
                return new
            g = damping * g + (1 - damping) * new
        k = int(np.argmax(np.abs(new - g)))
        raise NumericalError(
            f"R-transform fixed point did not converge at t={z.flat[k].real:.6g}",
            worst_point=complex(z.flat[k]),
        )

    return G


def density_from_cumulants(kappa, grid=None, eps_sequence=DEFAULT_EPS, method="jacobi", points=None):
    """Density of the measure with the given (truncated) free cumulants.

    ``method="jacobi"``: continued fraction of the Cauchy transform from
    the recurrence coefficients of the moments, closed by the square-root
    tail of its last coefficients. ``method="rseries"``: damped fixed point
    of G = 1/(z - R(G)) with the truncated R-series. In both cases
    rho = -Im G / pi is Richardson-extrapolated over ``eps_sequence``.
    """
    if not isinstance(kappa, CumulantSequence):
        kappa = CumulantSequence(kappa)
    if kappa.order < 2 or kappa[2] <= 0:
        raise DomainError("density recovery needs kappa_2 > 0")
    k1, k2 = float(kappa[1]), float(kappa[2])
    if method == "jacobi":
        a, b = jacobi_parameters(cumulants_to_moments(kappa))
        gfun = _jacobi_cauchy(a, b)
        binf = float(b[-1])
        radius = 2.0 * math.sqrt(max(float(x) for x in b[1:]))
        centre = float(a[-1])
        span = (min(k1, centre) - radius - 2 * math.sqrt(binf), max(k1, centre) + radius + 2 * math.sqrt(binf))
    elif method == "rseries":
        gfun = _rseries_cauchy(kappa)
        r = 2.0 * math.sqrt(k2 * kappa.order)
        span = (k1 - r, k1 + r)
    else:
        raise DomainError(f"unknown method {method!r}")
    if grid is None:
        lo, hi = span
        for _ in range(30):
            # cells must resolve peaks of width eps
            h_max = 0.5 * min(eps_sequence)
            npts = points or max(2001, int((hi - lo) / h_max) + 1)
            t = np.linspace(lo, hi, npts)
            rho = _cell_averages(gfun, t, eps_sequence, h_max)
            mass = float(np.maximum(rho, 0).sum() * (t[1] - t[0]))
            if mass >= 1 - MASS_TOL:
                break
            w = hi - lo
            lo, hi = lo - 0.1 * w, hi + 0.1 * w
        else:
            raise SupportWindowError(f"captured mass {mass} < {1 - MASS_TOL}")
    else:
        t = np.asarray(grid, dtype=float)
        rho, raw = _stieltjes(gfun, t, eps_sequence)
        _check_atoms(raw, eps_sequence, t)
    meta = {"method": method, "eps": list(eps_sequence), "order": kappa.order}
    return _finish(t, rho, meta)


def _cell_averages(gfun, t, eps_seq, h_max):
    """Stieltjes inversion averaged over the cells centred at ``t``.

    Each cell is split into k equal sub-cells with width <= h_max, so a
    coarse output grid still sees peaks of width eps. Atom detection runs
    on the sub-cells, before averaging flattens the 1/eps peaks.
    """
    h = t[1] - t[0]
    k = max(1, math.ceil(h / h_max))
    offsets = (np.arange(k) + 0.5) / k - 0.5
    fine = (t[:, None] + h * offsets[None, :]).ravel()
    rho, raw = _stieltjes(gfun, fine, eps_seq)
    _check_atoms(raw, eps_seq, fine)
    return rho.reshape(len(t), k).mean(axis=1)


def _check_atoms(raw, eps_seq, t):
    if len(raw) < 2:
        return
    peak = [float(np.max(r)) for r in raw]
    # an atom of mass w gives a peak ~ w / (pi eps): doubling as eps halves
    if peak[0] > 0 and all(q / p > 1.8 for p, q in zip(peak, peak[1:])) and peak[-1] * eps_seq[-1] * math.pi > 1e-2:
        k = int(np.argmax(raw[-1]))
        raise AtomError(f"Im G diverges like 1/eps near t={t[k]:.6g}: the measure has an atom")


def cauchy_sanity(mu, n_points=64):
    """Checks Im G < 0 on an upper half-plane sample and G(z) ~ 1/z far out."""
    rng = np.random.default_rng(0)
    lo, hi = mu.support()
    R = max(abs(lo), abs(hi), 1e-3)
    z = rng.uniform(lo - R, hi + R, n_points) + 1j * rng.uniform(1e-3, 2 * R, n_points)
    g = mu.cauchy(z)
    far = 10 * R * np.exp(1j * np.linspace(0.1, math.pi - 0.1, 16))
    gf = mu.cauchy(far)
    return bool(np.all(g.imag < 0)), float(np.max(np.abs(gf * far - 1)))
