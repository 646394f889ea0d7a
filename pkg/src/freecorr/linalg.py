"""Small dense linear algebra shared by projections, maxcorr and info.

Exact routines work on lists of ``Fraction``; float routines on numpy
arrays and implement the common conditioning policy (ridge escalation for
normal equations, eigenvalue floor for symmetric roots).
"""

from fractions import Fraction
from numbers import Rational

import numpy as np
import scipy.linalg as sla

from .errors import ConditioningError

EIG_FLOOR = 1e-12
RIDGE_START = 1e-12
RIDGE_MAX = 1e-4


def is_exact(x):
    return isinstance(x, Rational) and not isinstance(x, bool)


def all_exact(values):
    return all(is_exact(v) for v in values)


def exact(x):
    """Coerce an int/Fraction to Fraction; floats are converted exactly."""
    return x if isinstance(x, Fraction) else Fraction(x)


def fmt_scalar(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    return x


def parse_scalar(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def solve_exact(a, b):
    """One solution of a consistent square system over the rationals.

    Free variables are set to zero. Raises ConditioningError with
    ``gram_condition=inf`` if the system is inconsistent.
    Returns (solution, rank).
    """
    n = len(b)
    rows = [[Fraction(v) for v in row] + [Fraction(b[i])] for i, row in enumerate(a)]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        if piv != 1:
            rows[r] = [v / piv for v in rows[r]]
        pr = rows[r]
        for i in range(n):
            if i != r:
                f = rows[i][c]
                if f != 0:
                    rows[i] = [u - f * v for u, v in zip(rows[i], pr)]
        pivots.append(c)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if rows[i][n] != 0:
            raise ConditioningError("inconsistent rational system", gram_condition=float("inf"))
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = rows[i][n]
    return x, r


def ldl_exact(a):
    """Exact LDL^T of a symmetric PSD rational matrix.

    Returns (L, d, kept) where L is unit lower triangular, d the pivots and
    ``kept`` the indices with nonzero pivot. A zero pivot in a PSD matrix
    forces its whole remaining column to vanish; that direction is dropped.
    Raises ConditioningError if a negative pivot shows the matrix is not PSD.
    """
    n = len(a)
    w = [[Fraction(v) for v in row] for row in a]
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    d = [Fraction(0)] * n
    for k in range(n):
        d[k] = w[k][k]
        if d[k] < 0:
            raise ConditioningError("matrix is not positive semidefinite", gram_condition=float("inf"))
        if d[k] == 0:
            if any(w[i][k] != 0 for i in range(k + 1, n)):
                raise ConditioningError("matrix is not positive semidefinite", gram_condition=float("inf"))
            continue
        for i in range(k + 1, n):
            L[i][k] = w[i][k] / d[k]
        for i in range(k + 1, n):
            lik = L[i][k]
            if lik == 0:
                continue
            for j in range(k + 1, i + 1):
                w[i][j] -= lik * w[j][k]
                w[j][i] = w[i][j]
    kept = [k for k in range(n) if d[k] != 0]
    return L, d, kept


def inv_unit_lower_exact(L):
    n = len(L)
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for j in range(n):
        for i in range(j + 1, n):
            s = sum((L[i][k] * inv[k][j] for k in range(j, i)), Fraction(0))
            inv[i][j] = -s
    return inv


def matmul_exact(a, b):
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def gram_condition(g):
    g = np.asarray(g, dtype=float)
    if g.size == 0:
        return 1.0
    ev = np.linalg.eigvalsh(g)
    top = ev[-1]
    low = ev[0]
    if top <= 0:
        return float("inf")
    return float(top / low) if low > 0 else float("inf")


def ridge_solve(g, b, start=RIDGE_START, stop=RIDGE_MAX):
    """Solve the normal equations g x = b with escalating ridge.

    The ridge is relative to the largest diagonal entry after symmetric
    diagonal equilibration and grows x10 from ``start`` until a Cholesky
    factorization succeeds. Returns (x, ridge).
    """
    g = np.asarray(g, dtype=float)
    b = np.asarray(b, dtype=float)
    if g.size == 0:
        return np.zeros(0), 0.0
    diag = np.diag(g).copy()
    scale = np.where(diag > 0, 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0)), 1.0)
    gs = g * scale[:, None] * scale[None, :]
    bs = b * scale
    eps = start
    while eps <= stop:
        try:
            cf = sla.cho_factor(gs + eps * np.eye(len(gs)), lower=True, check_finite=True)
        except np.linalg.LinAlgError:
            eps *= 10
            continue
        y = sla.cho_solve(cf, bs)
        return y * scale, eps
    raise ConditioningError(
        f"Gram matrix singular beyond ridge {stop:g}", gram_condition=gram_condition(g)
    )


def inv_sqrt_floor(a, floor=EIG_FLOOR):
    """Symmetric inverse square root restricted to eigen-directions above
    ``floor * trace``. Returns (W, kept_dims, dropped_count) with
    W of shape (n, kept) so that W.T @ a @ W = I."""
    a = np.asarray(a, dtype=float)
    a = 0.5 * (a + a.T)
    diag = np.diag(a).copy()
    scale = np.where(diag > 0, 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0)), 0.0)
    As = a * scale[:, None] * scale[None, :]
    ev, vec = np.linalg.eigh(As)
    tr = max(float(np.trace(As)), 0.0)
    keep = ev > floor * tr
    W = (vec[:, keep] / np.sqrt(ev[keep])) * scale[:, None]
    return W, int(keep.sum()), int((~keep).sum())
