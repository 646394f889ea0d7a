"""Random-matrix realizations of free families.

Each label is realized as U D U^T with an independent Haar orthogonal U
and a diagonal D carrying the law of the letter. Normalized traces of
words then approximate the free mixed moments for large N.
"""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceError
from .maxcorr import max_correlation_from_grams
from .transforms import Atomic, GridDensity, Measure, density_on_grid

MAX_WORD = 12
MAX_LABELS = 6


@dataclass(frozen=True)
class EnsembleSpec:
    """N x N matrices, T independent trials.

    ``diagonal`` is "quantile" (deterministic quantiles of the measure at
    (k - 1/2)/N) or "iid" (independent draws). Trial t uses the t-th child
    of ``SeedSequence(seed)``, so serial and threaded runs agree.
    """

    N: int
    T: int
    measure: Measure
    diagonal: str = "quantile"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.N < 2:
            raise DomainError("matrix size must be >= 2")
        if self.T < 1:
            raise DomainError("need at least one trial")
        if self.diagonal not in ("quantile", "iid"):
            raise DomainError(f"unknown diagonal sampling {self.diagonal!r}")

    def trial_rngs(self):
        return [np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(self.T)]

    def to_json(self):
        return {
            "N": self.N,
            "T": self.T,
            "measure": self.measure.to_json(),
            "diagonal": self.diagonal,
            "seed": self.seed,
        }


def haar_orthogonal(rng, N):
    """Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
    signs of diag(R) absorbed into Q."""
    Q, R = np.linalg.qr(rng.standard_normal((N, N)))
    return Q * np.sign(np.diagonal(R))


def quantile_function(mu):
    """Vectorized u -> inf{t : F(t) >= u} for u in (0, 1)."""
    if isinstance(mu, Atomic):
        pts = sorted((float(a), float(w)) for a, w in mu.points)
        locs = np.array([a for a, _ in pts])
        cum = np.cumsum([w for _, w in pts])
        cum[-1] = 1.0
        return lambda u: locs[np.minimum(np.searchsorted(cum, u, side="left"), len(locs) - 1)]
    if not hasattr(mu, "cdf"):
        mu = density_on_grid(mu) if not isinstance(mu, GridDensity) else mu
    if isinstance(mu, GridDensity):
        lo, _ = mu.edges
        edges = np.concatenate([[lo], mu.t + mu.h / 2])
        cum = np.concatenate([[0.0], np.cumsum(mu.values) * mu.h])
        cum /= cum[-1]
        return lambda u: np.interp(u, cum, edges)
    a, b = mu.support()

    def q(u):
        u = np.asarray(u, dtype=float)
        lo = np.full(u.shape, a)
        hi = np.full(u.shape, b)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = mu.cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    return q


def diagonal(spec, rng):
    q = quantile_function(spec.measure)
    if spec.diagonal == "quantile":
        u = (np.arange(spec.N) + 0.5) / spec.N
    else:
        u = rng.uniform(size=spec.N)
    return q(u)


def _canonical(word):
    """Least cyclic rotation: traces are invariant under rotation."""
    w = tuple(word)
    return min(w[i:] + w[:i] for i in range(len(w)))


def _runs(word):
    return [(lab, len(list(g))) for lab, g in itertools.groupby(word)]


class _Trial:
    """One draw of the ensemble, expressed in the eigenbasis of the first label."""

    def __init__(self, spec, labels, rng, fixed_diag=None):
        self.N = spec.N
        self.first = labels[0]
        self.d = {}
        self.V = {}
        for lab in labels:
            self.d[lab] = fixed_diag if fixed_diag is not None else diagonal(spec, rng)
            if lab != self.first:
                self.V[lab] = haar_orthogonal(rng, spec.N)
        self.Y = {}
        self.memo = {}

    def power(self, lab, p):
        key = (lab, p)
        if key not in self.Y:
            V = self.V[lab]
            self.Y[key] = (V * self.d[lab] ** p) @ V.T
        return self.Y[key]

    def trace(self, word):
        """Normalized trace of the word product."""
        w = _canonical(word)
        if w in self.memo:
            return self.memo[w]
        N = self.N
        if len(set(w)) == 1:
            val = float(np.sum(self.d[w[0]] ** len(w))) / N
            self.memo[w] = val
            return val
        # rotate so the word starts with a non-first label run
        k = next(i for i, lab in enumerate(w) if lab != self.first and (i == 0 or w[i - 1] != lab))
        w2 = w[k:] + w[:k]
        mats = []
        scale = None
        for lab, p in _runs(w2):
            if lab == self.first:
                scale = self.d[lab] ** p
            else:
                M = self.power(lab, p)
                if scale is not None and mats:
                    mats[-1] = mats[-1] * scale[None, :]
                elif scale is not None:
                    M = scale[:, None] * M
                scale = None
                mats.append(M)
        if scale is not None:
            mats[-1] = mats[-1] * scale[None, :]
        A = mats[0]
        for M in mats[1:-1]:
            A = A @ M
        val = float(np.sum(A * mats[-1].T)) / N if len(mats) > 1 else float(np.trace(A)) / N
        self.memo[w] = val
        return val


def _check_words(words):
    labels = []
    for w in words:
        if not 1 <= len(w) <= MAX_WORD:
            raise ResourceError(f"word length {len(w)} outside 1..{MAX_WORD}", size=len(w), cap=MAX_WORD)
        for lab in w:
            if lab not in labels:
                labels.append(lab)
    if len(labels) > MAX_LABELS:
        raise ResourceError(f"{len(labels)} labels exceed {MAX_LABELS}", size=len(labels), cap=MAX_LABELS)
    return sorted(labels, key=str)


def _map_trials(spec, fn):
    rngs = spec.trial_rngs()
    if spec.threads > 1:
        with ThreadPoolExecutor(spec.threads) as pool:
            return list(pool.map(fn, rngs))
    return [fn(r) for r in rngs]


def trace_samples(words, spec):
    """T x len(words) array of normalized traces, one row per trial."""
    words = [tuple(w) for w in words]
    labels = _check_words(words)
    fixed = diagonal(spec, None) if spec.diagonal == "quantile" else None

    def run(rng):
        trial = _Trial(spec, labels, rng, fixed)
        return [trial.trace(w) for w in words]

    return np.array(_map_trials(spec, run), dtype=float)


def _mean_stderr(samples):
    mean = samples.mean(axis=0)
    if samples.shape[0] > 1:
        se = samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0])
    else:
        se = np.zeros_like(mean)
    return mean, se


def estimate_mixed_moment(word, spec):
    """(mean, stderr) of tr_N(X_{i1} ... X_{ik}) over the trials."""
    mean, se = _mean_stderr(trace_samples([word], spec))
    return float(mean[0]), float(se[0])


def estimate_mixed_moments(words, spec):
    """Batch version sharing the random draws across words."""
    mean, se = _mean_stderr(trace_samples(words, spec))
    return [(float(a), float(b)) for a, b in zip(mean, se)]


@dataclass
class WordCheck:
    word: tuple
    N: int
    T: int
    mean: float
    stderr: float
    engine_value: float

    @property
    def deviation(self):
        return abs(self.mean - self.engine_value)

    def within(self, k=3.0, floor=0.0):
        return self.deviation <= k * self.stderr + floor

    def to_json(self):
        return {
            "word": list(self.word),
            "N": self.N,
            "T": self.T,
            "mean": self.mean,
            "stderr": self.stderr,
            "engine_value": self.engine_value,
        }


def cross_validate(words, spec, family):
    """Ensemble estimate against the combinatorial value for each word."""
    from .moments import mixed_moment

    est = estimate_mixed_moments(words, spec)
    return [
        WordCheck(tuple(w), spec.N, spec.T, m, s, float(mixed_moment(tuple(w), family)))
        for w, (m, s) in zip(words, est)
    ]


def random_mixed_words(rng, count, max_len=6, labels=(1, 2)):
    """Distinct-label-containing random words of length 2..max_len."""
    out = []
    while len(out) < count:
        L = int(rng.integers(2, max_len + 1))
        w = tuple(labels[i] for i in rng.integers(0, len(labels), L))
        if len(set(w)) > 1:
            out.append(w)
    return out


def empirical_max_correlation(m, n, D, spec):
    """Maximal correlation between span{S_n^i} and span{S_m^j} from matrix traces.

    S_k is the sum of the first k realized letters. Normalized traces are
    averaged over trials before the covariance matrices are formed.
    """
    if not 1 <= m <= n:
        raise DomainError(f"need 1 <= m <= n, got {m}, {n}")
    if n > MAX_LABELS:
        raise ResourceError(f"n={n} exceeds {MAX_LABELS} labels", size=n, cap=MAX_LABELS)
    N = spec.N
    fixed = diagonal(spec, None) if spec.diagonal == "quantile" else None

    def run(rng):
        mats = []
        for i in range(n):
            d = fixed if fixed is not None else diagonal(spec, rng)
            if i == 0:
                # the first letter is taken in its own eigenbasis
                mats.append(np.diag(d))
            else:
                U = haar_orthogonal(rng, N)
                mats.append((U * d) @ U.T)
        Sm = sum(mats[:m])
        Sn = Sm + sum(mats[m:]) if n > m else Sm
        Pn = [np.eye(N)]
        Pm = [np.eye(N)]
        for _ in range(D):
            Pn.append(Pn[-1] @ Sn)
            Pm.append(Pm[-1] @ Sm)
        tn = [np.sum(Pn[i] * Pn[j].T) / N for i in range(D + 1) for j in range(D + 1)]
        tm = [np.sum(Pm[i] * Pm[j].T) / N for i in range(D + 1) for j in range(D + 1)]
        tc = [np.sum(Pn[i] * Pm[j].T) / N for i in range(D + 1) for j in range(D + 1)]
        return tn + tm + tc

    avg = np.mean(np.array(_map_trials(spec, run)), axis=0)
    k = (D + 1) ** 2
    tn = avg[:k].reshape(D + 1, D + 1)
    tm = avg[k : 2 * k].reshape(D + 1, D + 1)
    tc = avg[2 * k :].reshape(D + 1, D + 1)
    A = tn[1:, 1:] - np.outer(tn[1:, 0], tn[0, 1:])
    B = tm[1:, 1:] - np.outer(tm[1:, 0], tm[0, 1:])
    C = tc[1:, 1:] - np.outer(tc[1:, 0], tc[0, 1:])
    if m == n:
        C = A
        B = A
    return max_correlation_from_grams(A, B, C, m, n, distribution=spec.measure.describe())
