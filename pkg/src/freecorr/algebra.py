"""Noncommutative polynomials in free self-adjoint letters."""

import itertools
import re
import math
from fractions import Fraction

from .errors import DomainError
from .linalg import fmt_scalar, is_exact, parse_scalar
from .moments import mixed_moment


def _word_key(w):
    return (len(w), tuple(str(x) if not isinstance(x, int) else f"{x:012d}" for x in w))


class NCPolynomial:
    """Finite linear combination of words; the empty word is the unit.

    Letters are self-adjoint, so the adjoint reverses each word and
    conjugates its coefficient. Zero coefficients are never stored.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for w, c in (terms or {}).items():
            if isinstance(c, int) and not isinstance(c, bool):
                c = Fraction(c)
            if c != 0:
                clean[tuple(w)] = c
        self.terms = clean

    @classmethod
    def constant(cls, c):
        return cls({(): c})

    @classmethod
    def letter(cls, label, c=1):
        return cls({(label,): c})

    @classmethod
    def word(cls, w, c=1):
        return cls({tuple(w): c})

    def items(self):
        """Terms in graded-lexicographic word order."""
        return sorted(self.terms.items(), key=lambda kv: _word_key(kv[0]))

    def words(self):
        return [w for w, _ in self.items()]

    def coefficient(self, w):
        return self.terms.get(tuple(w), 0)

    @property
    def degree(self):
        return max((len(w) for w in self.terms), default=0)

    def letters(self):
        return set(itertools.chain.from_iterable(self.terms))

    def is_zero(self):
        return not self.terms

    @property
    def exact(self):
        return all(is_exact(c) for c in self.terms.values())

    def adjoint(self):
        return NCPolynomial({w[::-1]: c.conjugate() for w, c in self.terms.items()})

    def to_float(self):
        return NCPolynomial({w: float(c) for w, c in self.terms.items()})

    def relabel(self, mapping):
        out = {}
        for w, c in self.terms.items():
            nw = tuple(mapping.get(x, x) for x in w)
            out[nw] = out.get(nw, 0) + c
        return NCPolynomial(out)

    def __add__(self, other):
        if not isinstance(other, NCPolynomial):
            other = NCPolynomial.constant(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return NCPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return NCPolynomial({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, NCPolynomial) else NCPolynomial.constant(-other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, NCPolynomial):
            return multiply(self, other)
        return NCPolynomial({w: c * other for w, c in self.terms.items()})

    def __rmul__(self, other):
        return NCPolynomial({w: other * c for w, c in self.terms.items()})

    def __pow__(self, k):
        if k < 0:
            raise DomainError("negative power")
        out = NCPolynomial.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.items():
            name = "*".join(f"x{x}" for x in w) if w else "1"
            parts.append(f"{c}*{name}")
        return " + ".join(parts)

    def to_json(self):
        return [{"word": list(w), "coeff": fmt_scalar(c)} for w, c in self.items()]

    @classmethod
    def from_json(cls, records):
        out = {}
        for rec in records:
            w = tuple(rec["word"])
            out[w] = out.get(w, 0) + parse_scalar(rec["coeff"])
        return cls(out)


def multiply(p, q):
    """Bilinear concatenation product."""
    out = {}
    for u, a in p.terms.items():
        for v, b in q.terms.items():
            w = u + v
            out[w] = out.get(w, 0) + a * b
    return NCPolynomial(out)


def expand_sum(k, family=None, labels=None):
    """The partial sum s_k = x_1 + ... + x_k (or over ``labels``)."""
    if labels is None:
        if not isinstance(k, int) or k < 1:
            raise DomainError(f"s_k needs k >= 1, got {k!r}")
        labels = range(1, k + 1)
    labels = list(labels)
    if not labels:
        raise DomainError("empty sum")
    if family is not None:
        missing = [lab for lab in labels if lab not in family.cumulants]
        if missing:
            raise DomainError(f"labels {missing} not in family")
    return NCPolynomial({(lab,): 1 for lab in labels})


def trace(p, family):
    """Linear extension of the mixed-moment functional."""
    acc = family.zero()
    for w, c in p.terms.items():
        acc += c * mixed_moment(w, family)
    return acc


def inner_product(p, q, family):
    """<p, q> = tau(p* q)."""
    acc = family.zero()
    for u, a in p.terms.items():
        ru = u[::-1]
        ca = a.conjugate()
        for v, b in q.terms.items():
            acc += ca * b * mixed_moment(ru + v, family)
    return acc


def norm_sq(p, family):
    return inner_product(p, p, family)


def norm(p, family):
    v = norm_sq(p, family)
    return math.sqrt(max(float(v), 0.0))


def center(p, family):
    """p - tau(p) * 1."""
    return p - NCPolynomial.constant(trace(p, family))


def covariance(p, q, family):
    return inner_product(center(p, family), center(q, family), family)


class SumLetter:
    """Marker for the single generator s = sum of ``labels``."""

    __slots__ = ("labels",)

    def __init__(self, labels):
        if isinstance(labels, int):
            labels = range(1, labels + 1)
        self.labels = tuple(labels)
        if not self.labels:
            raise DomainError("empty sum letter")

    def __repr__(self):
        return f"SumLetter({self.labels})"


def basis_words(letters, max_degree):
    """Words of degree 1..D in the given letters, graded-lex ordered."""
    letters = sorted(letters)
    out = []
    for d in range(1, max_degree + 1):
        out.extend(itertools.product(letters, repeat=d))
    return out


def monomial_basis(letters, max_degree, family):
    """Centered monomials of degree 1..D.

    ``letters`` is a set of labels (all words) or a SumLetter (powers of
    the sum only).
    """
    if max_degree < 1:
        raise DomainError("max_degree must be >= 1")
    if isinstance(letters, SumLetter):
        s = expand_sum(None, family, letters.labels)
        out = []
        power = NCPolynomial.constant(1)
        for _ in range(max_degree):
            power = power * s
            out.append(center(power, family))
        return out
    return [center(NCPolynomial.word(w), family) for w in basis_words(letters, max_degree)]


def basis_labels(letters, max_degree):
    if isinstance(letters, SumLetter):
        name = "s(" + ",".join(map(str, letters.labels)) + ")"
        return [f"{name}^{d}" for d in range(1, max_degree + 1)]
    return ["".join(f"x{x}" for x in w) for w in basis_words(letters, max_degree)]


_TERM = re.compile(r"\s*([+-])?\s*([^+-]+)")
_FACTOR = re.compile(r"^x(\w+?)(?:\^(\d+))?$")


def parse_polynomial(text):
    """Parse expressions such as ``x1*x2^2 - 1/2*x1 + 3``.

    Letters are ``x`` followed by an integer label; coefficients are
    integers, fractions or decimals. No parentheses.
    """
    src = text.replace(" ", "")
    if not src:
        raise DomainError("empty polynomial")
    pos = 0
    out = NCPolynomial()
    while pos < len(src):
        m = _TERM.match(src, pos)
        if not m or m.end() == pos:
            raise DomainError(f"cannot parse polynomial at {src[pos:]!r}")
        pos = m.end()
        sign = -1 if m.group(1) == "-" else 1
        coef = Fraction(sign)
        word = []
        for tok in m.group(2).split("*"):
            f = _FACTOR.match(tok)
            if f:
                lab = int(f.group(1)) if f.group(1).isdigit() else f.group(1)
                word.extend([lab] * int(f.group(2) or 1))
            else:
                try:
                    coef *= Fraction(tok)
                except ValueError:
                    raise DomainError(f"bad factor {tok!r}") from None
        out = out + NCPolynomial.word(word, coef)
    return out
