"""Second-order forward-mode automatic differentiation.

Scalars come in three interchangeable flavours: plain floats, first-order
``Dual`` numbers and second-order ``HyperDual`` numbers.  Coefficients of a
``Dual``/``HyperDual`` may themselves be dual numbers, which is how higher
derivatives of composite pipelines (for example divergences of stress
tensors) are obtained without hand-coded third-order bookkeeping.

The module-level functions ``sin``/``cos``/... dispatch on the scalar type,
so any code written against them evaluates identically on floats and jets.
"""

from __future__ import annotations

import contextvars
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationDomainError, GeometryError, NonFiniteError

__all__ = [
    "Dual",
    "HyperDual",
    "Jet2Scalar",
    "evaluate_jet2",
    "finite_difference_jet2",
    "real_value",
    "sin",
    "cos",
    "tan",
    "exp",
    "log",
    "sqrt",
    "atan2",
    "powc",
]

# Set when |x| is differentiated at exactly 0; read back by evaluate_jet2.
_NONSMOOTH = contextvars.ContextVar("symphonic_nonsmooth", default=False)

_NUMBER = (int, float)


def real_value(x):
    """Unwrap nested dual numbers down to the underlying float."""
    while isinstance(x, (Dual, HyperDual)):
        x = x.re
    return float(x)


class Dual:
    """First-order dual number a + b*eps with eps^2 = 0."""

    __slots__ = ("re", "ep")

    def __init__(self, re, ep=0.0):
        self.re = re
        self.ep = ep

    def __repr__(self):
        return f"Dual({self.re!r}, {self.ep!r})"

    def __neg__(self):
        return Dual(-self.re, -self.ep)

    def __pos__(self):
        return self

    def __add__(self, o):
        if isinstance(o, Dual):
            return Dual(self.re + o.re, self.ep + o.ep)
        if isinstance(o, _NUMBER):
            return Dual(self.re + o, self.ep)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, Dual):
            return Dual(self.re - o.re, self.ep - o.ep)
        if isinstance(o, _NUMBER):
            return Dual(self.re - o, self.ep)
        return NotImplemented

    def __rsub__(self, o):
        if isinstance(o, _NUMBER):
            return Dual(o - self.re, -self.ep)
        return NotImplemented

    def __mul__(self, o):
        if isinstance(o, Dual):
            return Dual(self.re * o.re, self.re * o.ep + self.ep * o.re)
        if isinstance(o, _NUMBER):
            return Dual(self.re * o, self.ep * o)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Dual):
            q = self.re / o.re
            return Dual(q, (self.ep - q * o.ep) / o.re)
        if isinstance(o, _NUMBER):
            return Dual(self.re / o, self.ep / o)
        return NotImplemented

    def __rtruediv__(self, o):
        if isinstance(o, _NUMBER):
            q = o / self.re
            return Dual(q, (-q * self.ep) / self.re)
        return NotImplemented

    def __pow__(self, o):
        if isinstance(o, _NUMBER):
            return powc(self, float(o))
        if isinstance(o, (Dual, HyperDual)):
            return exp(o * log(self))
        return NotImplemented

    def __rpow__(self, base):
        if isinstance(base, _NUMBER):
            if base <= 0.0:
                raise EvaluationDomainError("pow", base, "non-positive base with jet exponent")
            return exp(self * math.log(base))
        return NotImplemented

    def __abs__(self):
        rv = real_value(self.re)
        if rv > 0.0:
            return self
        if rv < 0.0:
            return -self
        _NONSMOOTH.set(True)
        return Dual(abs(self.re) if isinstance(self.re, (Dual, HyperDual)) else 0.0, 0.0 * self.ep)


class HyperDual:
    """Second-order number a + b*e1 + c*e2 + d*e1*e2 with e1^2 = e2^2 = 0.

    One evaluation seeded in directions (i, j) yields the value, both first
    partials and the mixed second partial d2f/dxi dxj.
    """

    __slots__ = ("re", "e1", "e2", "e12")

    def __init__(self, re, e1=0.0, e2=0.0, e12=0.0):
        self.re = re
        self.e1 = e1
        self.e2 = e2
        self.e12 = e12

    def __repr__(self):
        return f"HyperDual({self.re!r}, {self.e1!r}, {self.e2!r}, {self.e12!r})"

    def __neg__(self):
        return HyperDual(-self.re, -self.e1, -self.e2, -self.e12)

    def __pos__(self):
        return self

    def __add__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(self.re + o.re, self.e1 + o.e1, self.e2 + o.e2, self.e12 + o.e12)
        if isinstance(o, _NUMBER):
            return HyperDual(self.re + o, self.e1, self.e2, self.e12)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(self.re - o.re, self.e1 - o.e1, self.e2 - o.e2, self.e12 - o.e12)
        if isinstance(o, _NUMBER):
            return HyperDual(self.re - o, self.e1, self.e2, self.e12)
        return NotImplemented

    def __rsub__(self, o):
        if isinstance(o, _NUMBER):
            return HyperDual(o - self.re, -self.e1, -self.e2, -self.e12)
        return NotImplemented

    def __mul__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(
                self.re * o.re,
                self.e1 * o.re + self.re * o.e1,
                self.e2 * o.re + self.re * o.e2,
                self.e12 * o.re + self.e1 * o.e2 + self.e2 * o.e1 + self.re * o.e12,
            )
        if isinstance(o, _NUMBER):
            return HyperDual(self.re * o, self.e1 * o, self.e2 * o, self.e12 * o)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, HyperDual):
            q = self.re / o.re
            q1 = (self.e1 - q * o.e1) / o.re
            q2 = (self.e2 - q * o.e2) / o.re
            q12 = (self.e12 - q1 * o.e2 - q2 * o.e1 - q * o.e12) / o.re
            return HyperDual(q, q1, q2, q12)
        if isinstance(o, _NUMBER):
            return HyperDual(self.re / o, self.e1 / o, self.e2 / o, self.e12 / o)
        return NotImplemented

    def __rtruediv__(self, o):
        if isinstance(o, _NUMBER):
            q = o / self.re
            q1 = (-q * self.e1) / self.re
            q2 = (-q * self.e2) / self.re
            q12 = (-q12_num(q, q1, q2, self)) / self.re
            return HyperDual(q, q1, q2, q12)
        return NotImplemented

    def __pow__(self, o):
        if isinstance(o, _NUMBER):
            return powc(self, float(o))
        if isinstance(o, (Dual, HyperDual)):
            return exp(o * log(self))
        return NotImplemented

    def __rpow__(self, base):
        if isinstance(base, _NUMBER):
            if base <= 0.0:
                raise EvaluationDomainError("pow", base, "non-positive base with jet exponent")
            return exp(self * math.log(base))
        return NotImplemented

    def __abs__(self):
        rv = real_value(self.re)
        if rv > 0.0:
            return self
        if rv < 0.0:
            return -self
        _NONSMOOTH.set(True)
        zero = abs(self.re) if isinstance(self.re, (Dual, HyperDual)) else 0.0
        return HyperDual(zero, 0.0 * self.e1, 0.0 * self.e2, 0.0 * self.e12)


def q12_num(q, q1, q2, o):
    # numerator of the e12 slot for o.__rtruediv__: d2(c/b) with constant c
    return q1 * o.e2 + q2 * o.e1 + q * o.e12


def powc(x, p):
    """x ** p for a constant real exponent p, via the power rule."""
    if isinstance(x, Dual):
        if p == 2.0:
            return x * x
        if p == 1.0:
            return x
        v = powc(x.re, p)
        d = p * powc(x.re, p - 1.0)
        return Dual(v, d * x.ep)
    if isinstance(x, HyperDual):
        if p == 2.0:
            return x * x
        if p == 1.0:
            return x
        v = powc(x.re, p)
        d = p * powc(x.re, p - 1.0)
        dd = p * (p - 1.0) * powc(x.re, p - 2.0)
        return HyperDual(v, d * x.e1, d * x.e2, dd * (x.e1 * x.e2) + d * x.e12)
    try:
        return math.pow(x, p)
    except (ValueError, OverflowError) as e:
        raise EvaluationDomainError("pow", x, str(e)) from None


def _unary(x, v, d, dd):
    """Assemble the chain rule for a unary function from v = f(x), d = f',
    dd = f'' evaluated at the real part."""
    if isinstance(x, Dual):
        return Dual(v, d * x.ep)
    return HyperDual(v, d * x.e1, d * x.e2, dd * (x.e1 * x.e2) + d * x.e12)


def sin(x):
    if isinstance(x, (Dual, HyperDual)):
        v = sin(x.re)
        c = cos(x.re)
        return _unary(x, v, c, -v)
    return math.sin(x)


def cos(x):
    if isinstance(x, (Dual, HyperDual)):
        v = cos(x.re)
        s = sin(x.re)
        return _unary(x, v, -s, -v)
    return math.cos(x)


def tan(x):
    if isinstance(x, (Dual, HyperDual)):
        t = tan(x.re)
        d = 1.0 + t * t
        return _unary(x, t, d, 2.0 * (t * d))
    return math.tan(x)


def exp(x):
    if isinstance(x, (Dual, HyperDual)):
        v = exp(x.re)
        return _unary(x, v, v, v)
    try:
        return math.exp(x)
    except OverflowError:
        raise EvaluationDomainError("exp", x, "overflow") from None


def log(x):
    if isinstance(x, (Dual, HyperDual)):
        if real_value(x.re) <= 0.0:
            raise EvaluationDomainError("log", real_value(x.re))
        v = log(x.re)
        d = 1.0 / x.re
        return _unary(x, v, d, -(d * d))
    if x <= 0.0:
        raise EvaluationDomainError("log", x)
    return math.log(x)


def sqrt(x):
    if isinstance(x, (Dual, HyperDual)):
        rv = real_value(x.re)
        if rv < 0.0:
            raise EvaluationDomainError("sqrt", rv)
        if rv == 0.0:
            raise EvaluationDomainError("sqrt", 0.0, "derivative singular at 0")
        v = sqrt(x.re)
        d = 0.5 / v
        return _unary(x, v, d, (-0.5) * d / x.re)
    if x < 0.0:
        raise EvaluationDomainError("sqrt", x)
    return math.sqrt(x)


def atan2(y, x):
    if isinstance(y, HyperDual) or isinstance(x, HyperDual):
        if not isinstance(y, HyperDual):
            y = HyperDual(y)
        if not isinstance(x, HyperDual):
            x = HyperDual(x)
        a, b = y.re, x.re
        r2 = a * a + b * b
        if real_value(r2) == 0.0:
            raise EvaluationDomainError("atan2", (0.0, 0.0))
        v = atan2(a, b)
        hy = b / r2
        hx = -a / r2
        r4 = r2 * r2
        hyy = -2.0 * (a * b) / r4
        hyx = (a * a - b * b) / r4
        hxx = 2.0 * (a * b) / r4
        e1 = hy * y.e1 + hx * x.e1
        e2 = hy * y.e2 + hx * x.e2
        e12 = (
            hyy * (y.e1 * y.e2)
            + hyx * (y.e1 * x.e2 + x.e1 * y.e2)
            + hxx * (x.e1 * x.e2)
            + hy * y.e12
            + hx * x.e12
        )
        return HyperDual(v, e1, e2, e12)
    if isinstance(y, Dual) or isinstance(x, Dual):
        if not isinstance(y, Dual):
            y = Dual(y)
        if not isinstance(x, Dual):
            x = Dual(x)
        a, b = y.re, x.re
        r2 = a * a + b * b
        if real_value(r2) == 0.0:
            raise EvaluationDomainError("atan2", (0.0, 0.0))
        v = atan2(a, b)
        return Dual(v, (b / r2) * y.ep + (-a / r2) * x.ep)
    return math.atan2(y, x)


@dataclass
class Jet2Scalar:
    """Value, gradient and symmetric Hessian of a scalar function at a point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray
    nonsmooth: bool = field(default=False, compare=False)


def evaluate_jet2(fn, point):
    """Exact 2-jet of ``fn`` at ``point`` via paired-direction hyper-dual passes.

    Uses n(n+1)/2 evaluations, one per unordered direction pair, so the
    Hessian is symmetric by construction and free of cancellation error.
    """
    pt = [float(c) for c in point]
    n = len(pt)
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    value = None
    token = _NONSMOOTH.set(False)
    try:
        for i in range(n):
            for j in range(i, n):
                coords = [
                    HyperDual(pt[k], 1.0 if k == i else 0.0, 1.0 if k == j else 0.0, 0.0)
                    for k in range(n)
                ]
                r = fn(coords)
                if not isinstance(r, HyperDual):
                    r = HyperDual(float(r))
                if value is None:
                    value = float(r.re)
                if j == i:
                    grad[i] = r.e1
                hess[i, j] = hess[j, i] = r.e12
        if n == 0:
            value = float(fn([]))
        nonsmooth = _NONSMOOTH.get()
    finally:
        _NONSMOOTH.reset(token)
    if not (math.isfinite(value) and np.all(np.isfinite(grad)) and np.all(np.isfinite(hess))):
        raise NonFiniteError("evaluate_jet2", pt)
    return Jet2Scalar(value, grad, hess, nonsmooth)


# Defaults chosen to balance truncation against round-off in doubles.
FD_GRAD_STEP = 1e-4
FD_HESS_STEP = 1e-3


def finite_difference_jet2(fn, point, step=None):
    """Central-difference 2-jet oracle, O(step^2) accurate.

    With ``step=None`` the gradient uses 1e-4 and the Hessian 1e-3.
    """
    if step is not None and step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    hg = step if step is not None else FD_GRAD_STEP
    hh = step if step is not None else FD_HESS_STEP
    pt = [float(c) for c in point]
    n = len(pt)

    def f(q):
        return float(fn(q))

    f0 = f(pt)
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    for i in range(n):
        up = pt[:]
        dn = pt[:]
        up[i] += hg
        dn[i] -= hg
        grad[i] = (f(up) - f(dn)) / (2.0 * hg)
        up = pt[:]
        dn = pt[:]
        up[i] += hh
        dn[i] -= hh
        hess[i, i] = (f(up) - 2.0 * f0 + f(dn)) / (hh * hh)
    for i in range(n):
        for j in range(i + 1, n):
            pp = pt[:]
            pm = pt[:]
            mp = pt[:]
            mm = pt[:]
            pp[i] += hh
            pp[j] += hh
            pm[i] += hh
            pm[j] -= hh
            mp[i] -= hh
            mp[j] += hh
            mm[i] -= hh
            mm[j] -= hh
            hess[i, j] = hess[j, i] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * hh * hh)
    return Jet2Scalar(f0, grad, hess)


# ---------------------------------------------------------------------------
# Small generic linear algebra on list-of-lists of scalar-like entries.
# Dimensions here are tiny (<= 4), so plain Python loops beat object arrays.
# ---------------------------------------------------------------------------


def as_matrix(obj, n, m=None):
    """Normalize a nested sequence / ndarray into a list-of-lists n x m."""
    if m is None:
        m = n
    rows = [list(r) for r in obj]
    if len(rows) != n or any(len(r) != m for r in rows):
        raise ValueError(f"expected {n}x{m} matrix, got {len(rows)} rows")
    return rows


def mat_identity(n):
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        Ai = A[i]
        row = []
        for j in range(m):
            s = Ai[0] * B[0][j]
            for t in range(1, k):
                s = s + Ai[t] * B[t][j]
            row.append(s)
        out.append(row)
    return out


def mat_vec(A, v):
    out = []
    for row in A:
        s = row[0] * v[0]
        for t in range(1, len(v)):
            s = s + row[t] * v[t]
        out.append(s)
    return out


def mat_transpose(A):
    return [list(col) for col in zip(*A)]


def mat_trace(A):
    s = A[0][0]
    for i in range(1, len(A)):
        s = s + A[i][i]
    return s


def mat_power(A, k):
    out = A
    for _ in range(k - 1):
        out = mat_mul(out, A)
    return out


def mat_cholesky(A):
    """Lower-triangular Cholesky factor, generic over scalar type."""
    n = len(A)
    L = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = A[i][j]
            for k in range(j):
                s = s - L[i][k] * L[j][k]
            if i == j:
                if real_value(s) <= 0.0:
                    raise GeometryError("matrix not positive definite in generic Cholesky")
                L[i][j] = sqrt(s)
            else:
                L[i][j] = s / L[j][j]
    return L


def mat_det(A):
    """Determinant by cofactor expansion; fine for the tiny dims used here."""
    n = len(A)
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    det = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        term = A[0][j] * mat_det(minor)
        if j % 2:
            term = -term
        det = term if det is None else det + term
    return det


def mat_inverse(A):
    """Gauss-Jordan inverse with partial pivoting on the real parts."""
    n = len(A)
    M = [list(row) + [1.0 if i == j else 0.0 for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(real_value(M[r][col])))
        if real_value(M[pivot][col]) == 0.0:
            raise GeometryError("singular matrix in generic inverse")
        if pivot != col:
            M[col], M[pivot] = M[pivot], M[col]
        inv_p = 1.0 / M[col][col]
        M[col] = [entry * inv_p for entry in M[col]]
        for r in range(n):
            if r == col:
                continue
            factor = M[r][col]
            if isinstance(factor, (int, float)) and factor == 0.0:
                continue
            M[r] = [a - factor * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]
