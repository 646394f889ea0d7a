"""Moment and free-cumulant sequences, free families and mixed moments.

Exact ``Fraction`` arithmetic is used whenever the inputs are rational;
floats otherwise. The same code path serves both modes.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import nc_lattice
from .errors import DomainError, ResourceError
from .linalg import all_exact, fmt_scalar, ldl_exact, parse_scalar
from .errors import ConditioningError


def _coerce(values):
    out = []
    for v in values:
        if isinstance(v, bool):
            raise DomainError("booleans are not scalars")
        if isinstance(v, int):
            v = Fraction(v)
        elif isinstance(v, (np.floating, np.integer)):
            v = float(v) if isinstance(v, np.floating) else Fraction(int(v))
        out.append(v)
    return tuple(out)


class _Sequence:
    __slots__ = ("values",)
    _zeroth = None

    def __init__(self, values):
        values = _coerce(values)
        if not values:
            raise DomainError("a sequence needs order N >= 1")
        self.values = values

    @property
    def order(self):
        return len(self.values)

    @property
    def mode(self):
        return "exact" if all_exact(self.values) else "float"

    def __getitem__(self, r):
        if r == 0 and self._zeroth is not None:
            return self._zeroth
        if r < 1 or r > len(self.values):
            raise IndexError(f"index {r} outside 1..{len(self.values)}")
        return self.values[r - 1]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return type(self) is type(other) and self.values == other.values

    def __hash__(self):
        return hash((type(self).__name__, self.values))

    def __repr__(self):
        shown = ", ".join(str(v) for v in self.values)
        return f"{type(self).__name__}({shown})"

    def to_float(self):
        return type(self)(float(v) for v in self.values)

    def truncate(self, n):
        if n > self.order:
            raise DomainError(f"cannot truncate order {self.order} to {n}")
        return type(self)(self.values[:n])

    def to_json(self):
        return {
            "order": self.order,
            "values": [fmt_scalar(v) for v in self.values],
            "mode": self.mode,
        }

    @classmethod
    def from_json(cls, obj):
        vals = [parse_scalar(v) for v in obj["values"]]
        if obj.get("mode") == "float":
            vals = [float(v) for v in vals]
        if "order" in obj and obj["order"] != len(vals):
            raise DomainError("order field does not match number of values")
        return cls(vals)


class MomentSequence(_Sequence):
    """m_1..m_N of a state on one variable; m_0 = 1 is implicit."""

    __slots__ = ()

    def __getitem__(self, r):
        if r == 0:
            return Fraction(1) if self.mode == "exact" else 1.0
        return _Sequence.__getitem__(self, r)

    def full(self):
        """(m_0, m_1, ..., m_N)."""
        return (self[0],) + self.values

    def variance(self):
        if self.order < 2:
            raise DomainError("variance needs order >= 2")
        return self[2] - self[1] ** 2


class CumulantSequence(_Sequence):
    """kappa_1..kappa_N."""

    __slots__ = ()

    def __add__(self, other):
        n = min(self.order, other.order)
        return CumulantSequence(a + b for a, b in zip(self.values[:n], other.values[:n]))

    def scale(self, c):
        """Cumulants of the sum of c free copies (c integer) or of c * kappa."""
        return CumulantSequence(c * v for v in self.values)

    def dilate(self, alpha):
        """Cumulants of alpha * x: kappa_r -> alpha^r kappa_r."""
        return CumulantSequence(alpha ** r * v for r, v in enumerate(self.values, start=1))

    def shift(self, c):
        vals = list(self.values)
        vals[0] = vals[0] + c
        return CumulantSequence(vals)

    def add_semicircular(self, variance):
        vals = list(self.values)
        if len(vals) >= 2:
            vals[1] = vals[1] + variance
        return CumulantSequence(vals)

    def variance(self):
        return self[2]


# ---------------------------------------------------------------- transforms


def _powers_table(mvals, n):
    """P[s][k] = [z^k] M(z)^s for s = 0..n, k = 0..n with M = sum m_k z^k."""
    one = mvals[0] * 0 + 1
    zero = one * 0
    P = [[one] + [zero] * n]
    for s in range(1, n + 1):
        prev = P[-1]
        row = [zero] * (n + 1)
        for k in range(n + 1):
            acc = zero
            for i in range(k + 1):
                if prev[i] != 0 and mvals[k - i] != 0:
                    acc += prev[i] * mvals[k - i]
            row[k] = acc
        P.append(row)
    return P


def moments_to_cumulants(m, method="recursive"):
    """Free cumulants from moments.

    ``method="lattice"`` evaluates the Moebius-inversion sum over NC(r)
    (the reference definition; limited by R_max); ``"recursive"`` uses the
    equivalent functional relation m_n = sum_s kappa_s [z^{n-s}] M(z)^s.
    """
    if not isinstance(m, MomentSequence):
        m = MomentSequence(m)
    N = m.order
    mv = m.full()
    if method == "lattice":
        out = []
        for r in range(1, N + 1):
            acc = mv[0] * 0
            for sizes, weight, _ in nc_lattice.moebius_profile(_lattice_r(r)):
                if weight:
                    term = weight
                    for s in sizes:
                        term = term * mv[s]
                    acc += term
            out.append(acc)
        return CumulantSequence(out)
    if method != "recursive":
        raise DomainError(f"unknown method {method!r}")
    kappa = [mv[0] * 0] * (N + 1)
    # P[s][k] only needs m_0..m_k, all known when solving for kappa_n
    P = _powers_table(mv, N)
    for n in range(1, N + 1):
        acc = mv[n]
        for s in range(1, n):
            if kappa[s] != 0:
                acc -= kappa[s] * P[s][n - s]
        kappa[n] = acc
    return CumulantSequence(kappa[1:])


def cumulants_to_moments(kappa, method="recursive"):
    """Moments from free cumulants: m_r = sum over NC(r) of prod kappa_|V|."""
    if not isinstance(kappa, CumulantSequence):
        kappa = CumulantSequence(kappa)
    N = kappa.order
    kv = (None,) + kappa.values
    one = kv[1] * 0 + 1
    if method == "lattice":
        out = []
        for r in range(1, N + 1):
            acc = one * 0
            for sizes, _, count in nc_lattice.moebius_profile(_lattice_r(r)):
                term = one * count
                for s in sizes:
                    term = term * kv[s]
                acc += term
            out.append(acc)
        return MomentSequence(out)
    if method != "recursive":
        raise DomainError(f"unknown method {method!r}")
    zero = one * 0
    m = [one] + [zero] * N
    # P[s][k] = [z^k] M^s, filled column by column as m_k becomes known
    P = [[one] + [zero] * N] + [[zero] * (N + 1) for _ in range(N)]
    for s in range(1, N + 1):
        P[s][0] = one
    for n in range(1, N + 1):
        acc = zero
        for s in range(1, n + 1):
            if kv[s] != 0:
                acc += kv[s] * P[s][n - s]
        m[n] = acc
        for s in range(1, N + 1):
            prev = P[s - 1]
            tot = zero
            for i in range(n + 1):
                if prev[i] != 0 and m[n - i] != 0:
                    tot += prev[i] * m[n - i]
            P[s][n] = tot
    return MomentSequence(m[1:])


def _lattice_r(r):
    if r > nc_lattice.R_MAX:
        raise ResourceError(f"lattice evaluation of order {r} exceeds R_max", size=r, cap=nc_lattice.R_MAX)
    return r


def hankel_psd(m, tol=1e-12):
    """True iff the Hankel matrix [m_{i+j}], 0 <= i,j <= floor(N/2), is PSD."""
    if not isinstance(m, MomentSequence):
        m = MomentSequence(m)
    k = m.order // 2
    mv = m.full()
    H = [[mv[i + j] for j in range(k + 1)] for i in range(k + 1)]
    if m.mode == "exact":
        try:
            ldl_exact(H)
        except ConditioningError:
            return False
        return True
    ev = np.linalg.eigvalsh(np.array(H, dtype=float))
    return bool(ev[0] >= -tol * max(1.0, abs(ev[-1])))


# ---------------------------------------------------------------- free families


@dataclass
class FreeFamily:
    """Free self-adjoint letters, each with its own cumulant sequence.

    Mixed cumulants across labels vanish by construction. Mixed moments are
    memoized per word; the cache only ever stores deterministic values.
    """

    cumulants: dict
    identically_distributed: bool = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.cumulants = {
            k: v if isinstance(v, CumulantSequence) else CumulantSequence(v)
            for k, v in self.cumulants.items()
        }
        if not self.cumulants:
            raise DomainError("empty family")
        if self.identically_distributed is None:
            seqs = list(self.cumulants.values())
            self.identically_distributed = all(s == seqs[0] for s in seqs)

    @classmethod
    def iid(cls, kappa, n, labels=None):
        labels = list(range(1, n + 1)) if labels is None else list(labels)
        return cls({lab: kappa for lab in labels}, True)

    @property
    def labels(self):
        return sorted(self.cumulants)

    @property
    def mode(self):
        return "exact" if all(s.mode == "exact" for s in self.cumulants.values()) else "float"

    @property
    def order(self):
        return min(s.order for s in self.cumulants.values())

    def zero(self):
        return Fraction(0) if self.mode == "exact" else 0.0

    def one(self):
        return Fraction(1) if self.mode == "exact" else 1.0

    def moment(self, word):
        return mixed_moment(word, self)


def mixed_moment(word, family, method="interval"):
    """tau(x_{i_1} ... x_{i_r}) for free letters.

    Sums prod kappa_|V|(label V) over non-crossing partitions whose blocks
    are label-constant. ``method="filter"`` filters enumerate_nc(r) (the
    reference semantics); ``"interval"`` is the equivalent recursion on the
    block containing the first position, memoized over intervals.
    """
    word = tuple(word)
    r = len(word)
    if r > nc_lattice.R_MAX:
        raise ResourceError(
            f"word of length {r} exceeds R_max={nc_lattice.R_MAX}", size=r, cap=nc_lattice.R_MAX
        )
    for lab in set(word):
        if lab not in family.cumulants:
            raise DomainError(f"label {lab!r} not in family")
    if r == 0:
        return family.one()
    for lab in set(word):
        need = word.count(lab)
        if family.cumulants[lab].order < need:
            raise DomainError(
                f"label {lab!r} needs cumulants to order {need}, has {family.cumulants[lab].order}"
            )
    if method == "filter":
        return _mixed_filter(word, family)
    if method != "interval":
        raise DomainError(f"unknown method {method!r}")
    key = word
    hit = family._cache.get(key)
    if hit is not None:
        return hit
    val = _mixed_interval(word, family)
    family._cache[key] = val
    return val


def _mixed_filter(word, family):
    r = len(word)
    acc = family.zero()
    for pi in nc_lattice.enumerate_nc(r):
        term = family.one()
        for b in pi.blocks:
            lab = word[b[0] - 1]
            if any(word[i - 1] != lab for i in b):
                break
            term = term * family.cumulants[lab][len(b)]
            if term == 0:
                break
        else:
            acc += term
    return acc


def _mixed_interval(word, family):
    r = len(word)
    zero, one = family.zero(), family.one()
    f_memo = {}
    g_memo = {}

    def f(a, b):
        # sum over admissible NC partitions of positions a..b (0-based, inclusive)
        if a > b:
            return one
        key = (a, b)
        if key in f_memo:
            return f_memo[key]
        val = g(a, b, 1)
        f_memo[key] = val
        return val

    def g(v, b, k):
        # v is the k-th element of the block opened at the left end
        key = (v, b, k)
        if key in g_memo:
            return g_memo[key]
        lab = word[v]
        kap = family.cumulants[lab]
        acc = zero
        c = kap[k]
        if c != 0:
            acc += c * f(v + 1, b)
        for w in range(v + 1, b + 1):
            if word[w] == lab:
                inner = f(v + 1, w - 1)
                if inner != 0:
                    acc += inner * g(w, b, k + 1)
        g_memo[key] = acc
        return acc

    return f(0, r - 1)


def sum_cumulants(family, subset):
    """Cumulants of the free sum of the letters in ``subset``."""
    subset = list(subset)
    if not subset:
        raise DomainError("empty subset")
    seqs = [family.cumulants[lab] for lab in subset]
    n = min(s.order for s in seqs)
    out = [sum((s[r] for s in seqs[1:]), seqs[0][r]) for r in range(1, n + 1)]
    return CumulantSequence(out)
