"""Truncated Laurent/Puiseux series in t and square matrices of them.

A series with ramification ``m`` stores coefficients on the grid of exponents
``k/m`` for ``low <= k <= trunc``; everything above ``trunc`` is unknown.
The shift substitution ``phi`` sends ``t`` to ``t/(1+t)`` (equivalently
``s`` to ``s + 1`` with ``s = 1/t``); on the ramified grid it sends
``tau`` to ``tau*(1+t)**(-1/m)``.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import InsufficientTruncation, RamificationCapExceeded, ZeroLeadingTerm

DEFAULT_TRUNCATION = 16
MAX_RAMIFICATION = 12
RTOL = 1e-12


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def unified_ramification(*ms: int) -> int:
    m = reduce(_lcm, ms, 1)
    if m > MAX_RAMIFICATION:
        raise RamificationCapExceeded(f"ramification {m} exceeds cap {MAX_RAMIFICATION}")
    return m


def _binomial_series(e, n: int) -> np.ndarray:
    """Coefficients of (1+x)**e up to x**n."""
    out = np.empty(n + 1, dtype=complex)
    out[0] = 1.0
    for j in range(1, n + 1):
        out[j] = out[j - 1] * (e - j + 1) / j
    return out


class PuiseuxSeries:
    """Immutable truncated Puiseux series ``sum_k c_k t**(k/m)``."""

    __slots__ = ("m", "low", "coeffs")
    __hash__ = None

    def __init__(self, coeffs, low: int = 0, m: int = 1):
        c = np.array(coeffs, dtype=complex).ravel()
        if c.size == 0:
            raise ValueError("a series needs at least one coefficient slot")
        if m < 1:
            raise ValueError("ramification must be positive")
        if m > MAX_RAMIFICATION:
            raise RamificationCapExceeded(f"ramification {m} exceeds cap {MAX_RAMIFICATION}")
        c.flags.writeable = False
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "low", int(low))
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("PuiseuxSeries is immutable")

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, trunc: int = DEFAULT_TRUNCATION, m: int = 1, low: int = 0):
        return cls(np.zeros(trunc - low + 1), low, m)

    @classmethod
    def constant(cls, c, trunc: int = DEFAULT_TRUNCATION, m: int = 1):
        out = np.zeros(trunc + 1, dtype=complex)
        out[0] = c
        return cls(out, 0, m)

    @classmethod
    def monomial(cls, k: int, c=1.0, trunc: int = DEFAULT_TRUNCATION, m: int = 1):
        """``c * t**(k/m)`` known exactly up to grid index ``trunc``."""
        low = min(k, 0)
        trunc = max(trunc, k)
        out = np.zeros(trunc - low + 1, dtype=complex)
        out[k - low] = c
        return cls(out, low, m)

    @classmethod
    def from_dict(cls, terms: dict, trunc: int = DEFAULT_TRUNCATION):
        """Build from ``{Fraction exponent: coefficient}`` with the minimal grid."""
        m = unified_ramification(*(Fraction(e).denominator for e in terms)) if terms else 1
        ks = {int(Fraction(e) * m): c for e, c in terms.items()}
        low = min([0, *ks])
        top = max([trunc * m, *ks])
        out = np.zeros(top - low + 1, dtype=complex)
        for k, c in ks.items():
            out[k - low] += c
        return cls(out, low, m)

    # basic properties ---------------------------------------------------
    @property
    def trunc(self) -> int:
        return self.low + self.coeffs.size - 1

    def __getitem__(self, k: int) -> complex:
        if k < self.low:
            return 0j
        if k > self.trunc:
            raise InsufficientTruncation(f"coefficient {k} beyond truncation {self.trunc}")
        return complex(self.coeffs[k - self.low])

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def valuation(self, tol: float = 0.0):
        """Grid index of the first coefficient above ``tol * scale``; None for zero."""
        a = np.abs(self.coeffs)
        thresh = tol * a.max() if a.size else 0.0
        nz = np.nonzero(a > thresh)[0]
        return None if nz.size == 0 else self.low + int(nz[0])

    def is_zero(self, tol: float = RTOL) -> bool:
        return self.scale() <= tol

    # grid manipulation --------------------------------------------------
    def refine(self, m_new: int) -> PuiseuxSeries:
        if m_new == self.m:
            return self
        if m_new % self.m:
            raise ValueError(f"cannot refine ramification {self.m} to {m_new}")
        d = m_new // self.m
        low, trunc = self.low * d, self.trunc * d + d - 1
        out = np.zeros(trunc - low + 1, dtype=complex)
        out[0 : self.coeffs.size * d : d] = self.coeffs
        return PuiseuxSeries(out, low, m_new)

    def window(self, low: int, trunc: int) -> PuiseuxSeries:
        """Re-window; dropping nonzero low terms or extending past trunc is refused."""
        if trunc > self.trunc:
            raise InsufficientTruncation(f"cannot extend truncation {self.trunc} to {trunc}")
        out = np.zeros(trunc - low + 1, dtype=complex)
        lo = max(low, self.low)
        if lo <= trunc:
            out[lo - low : trunc - low + 1] = self.coeffs[lo - self.low : trunc - self.low + 1]
        if low > self.low and np.any(self.coeffs[: low - self.low] != 0):
            raise ValueError("window would drop nonzero low-order terms")
        return PuiseuxSeries(out, low, self.m)

    def truncate(self, trunc: int) -> PuiseuxSeries:
        return self.window(min(self.low, trunc), trunc)

    def strip(self) -> PuiseuxSeries:
        """Drop exactly-zero leading slots (keeps at least one slot)."""
        v = self.valuation()
        if v is None or v <= self.low:
            return self
        return PuiseuxSeries(self.coeffs[v - self.low :], v, self.m)

    @staticmethod
    def _unify(f: PuiseuxSeries, g: PuiseuxSeries):
        m = unified_ramification(f.m, g.m)
        return f.refine(m), g.refine(m)

    # ring operations ----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, PuiseuxSeries):
            if self.trunc < 0:
                raise InsufficientTruncation("constant term is beyond the known window")
            other = PuiseuxSeries.constant(other, self.trunc, self.m)
        f, g = self._unify(self, other)
        low, trunc = min(f.low, g.low), min(f.trunc, g.trunc)
        if trunc < low:
            raise InsufficientTruncation("no overlapping known coefficients")
        out = _aligned(f, low, trunc) + _aligned(g, low, trunc)
        return PuiseuxSeries(out, low, f.m)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries(-self.coeffs, self.low, self.m)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return PuiseuxSeries(self.coeffs * complex(other), self.low, self.m)
        f, g = self._unify(self, other)
        low = f.low + g.low
        trunc = min(f.trunc + g.low, g.trunc + f.low)
        full = np.convolve(f.coeffs, g.coeffs)
        return PuiseuxSeries(full[: trunc - low + 1], low, f.m)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return self * (1.0 / complex(other))
        return self * other.invert()

    def __rtruediv__(self, other):
        return self.invert() * other

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            return power(self, n)
        if n < 0:
            return self.invert() ** (-n)
        if n == 0:
            v = self.valuation() or 0
            return PuiseuxSeries.constant(1.0, max(self.trunc - v, 0), self.m)
        result = self
        for _ in range(n - 1):
            result = result * self
        return result

    def invert(self) -> PuiseuxSeries:
        v = self.valuation(tol=1e-14)
        if v is None:
            raise ZeroLeadingTerm("cannot invert a zero series")
        n = self.trunc - v
        a = self.coeffs[v - self.low :]
        b = np.zeros(n + 1, dtype=complex)
        b[0] = 1.0 / a[0]
        for k in range(1, n + 1):
            b[k] = -np.dot(a[1 : k + 1], b[k - 1 :: -1][:k]) / a[0]
        return PuiseuxSeries(b, -v, self.m)

    # comparisons --------------------------------------------------------
    def allclose(self, other, rtol: float = RTOL) -> bool:
        """Max coefficient deviation over the common window, relative to scale."""
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries.constant(other, max(self.trunc, 0), self.m)
        f, g = self._unify(self, other)
        low, trunc = min(f.low, g.low), min(f.trunc, g.trunc)
        if trunc < low:
            return True
        a, b = _aligned(f, low, trunc), _aligned(g, low, trunc)
        scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
        return bool(np.max(np.abs(a - b)) <= rtol * scale)

    def __eq__(self, other):
        try:
            return self.allclose(other)
        except (TypeError, ValueError):
            return NotImplemented

    # substitutions -----------------------------------------------------
    def phi(self) -> PuiseuxSeries:
        """Shift substitution ``t -> t/(1+t)`` on the ramified grid."""
        return _moebius(self, +1)

    def phi_inverse(self) -> PuiseuxSeries:
        """Inverse substitution ``t -> t/(1-t)``."""
        return _moebius(self, -1)

    # evaluation --------------------------------------------------------
    def evaluate(self, s, log_s=None):
        """Value at ``s = 1/t`` (scalar or array); ``log_s`` fixes the branch."""
        s = np.asarray(s, dtype=complex)
        if log_s is None:
            log_s = np.log(s)
        log_tau = -np.asarray(log_s) / self.m
        ks = np.arange(self.low, self.trunc + 1)
        powers = np.exp(np.multiply.outer(log_tau, ks))
        return powers @ self.coeffs

    def to_text(self, var: str = "t") -> str:
        return format_series(self, var)

    def __repr__(self):
        return f"PuiseuxSeries({format_series(self)} + O(t^({self.trunc + 1}/{self.m})))"


def _aligned(h: PuiseuxSeries, low: int, trunc: int) -> np.ndarray:
    out = np.zeros(trunc - low + 1, dtype=complex)
    hi = min(h.trunc, trunc)
    if hi >= h.low:
        out[h.low - low : hi - low + 1] = h.coeffs[: hi - h.low + 1]
    return out


def _moebius(f: PuiseuxSeries, sign: int) -> PuiseuxSeries:
    m, low, trunc = f.m, f.low, f.trunc
    out = np.zeros(trunc - low + 1, dtype=complex)
    for k in range(low, trunc + 1):
        c = f.coeffs[k - low]
        if c == 0:
            continue
        nj = (trunc - k) // m
        b = _binomial_series(-k / m, nj)
        if sign < 0:
            b = b * (-1.0) ** np.arange(nj + 1)
        out[k - low : k - low + m * nj + 1 : m] += c * b
    return PuiseuxSeries(out, low, m)


def phi_substitute(f: PuiseuxSeries) -> PuiseuxSeries:
    return f.phi()


# transcendental helpers ---------------------------------------------------
def log1p(trunc: int = DEFAULT_TRUNCATION, m: int = 1) -> PuiseuxSeries:
    """``log(1+t) = -sum_n (-t)**n / n`` up to ``t**(trunc/m)``."""
    if trunc < 1:
        raise InsufficientTruncation("log1p needs truncation >= 1")
    out = np.zeros(trunc + 1, dtype=complex)
    for n in range(1, trunc // m + 1):
        out[n * m] = -((-1.0) ** n) / n
    return PuiseuxSeries(out, 0, m)


def exp_series(f: PuiseuxSeries) -> PuiseuxSeries:
    """exp of a series without negative powers."""
    v = f.valuation(tol=0.0)
    if v is not None and v < 0 and np.max(np.abs(f.coeffs[: -f.low])) > 0:
        raise ValueError("exp of a series with a pole is not a Puiseux series")
    g = f.window(0, f.trunc) if f.low < 0 else f
    if g.low > 0:
        g = g.window(0, g.trunc)
    c = g.coeffs
    n = c.size - 1
    e = np.zeros(n + 1, dtype=complex)
    e[0] = 1.0
    j = np.arange(n + 1)
    for k in range(1, n + 1):
        e[k] = np.dot(j[1 : k + 1] * c[1 : k + 1], e[k - 1 :: -1][:k]) / k
    return PuiseuxSeries(e * cmath.exp(c[0]), 0, f.m)


def log_series(f: PuiseuxSeries) -> PuiseuxSeries:
    """Principal log of a series with nonzero constant term and no poles."""
    g = f.strip()
    if g.low != 0:
        raise ValueError("log needs a series with nonzero constant term")
    c0 = g.coeffs[0]
    h = g.coeffs / c0
    n = h.size - 1
    out = np.zeros(n + 1, dtype=complex)
    for k in range(1, n + 1):
        acc = k * h[k]
        if k > 1:
            jj = np.arange(1, k)
            acc -= np.dot(jj * out[1:k], h[k - 1 : 0 : -1])
        out[k] = acc / k
    out[0] = cmath.log(c0)
    return PuiseuxSeries(out, 0, g.m)


def power(f: PuiseuxSeries, e) -> PuiseuxSeries:
    """``f**e`` for a unit-like series (or a monomial times one)."""
    if isinstance(e, (int, np.integer)):
        return f ** int(e)
    g = f.strip()
    v = g.low
    e_frac = Fraction(e).limit_denominator(MAX_RAMIFICATION) if not isinstance(e, complex) else None
    if v != 0:
        if e_frac is None or abs(float(e_frac) - e) > 1e-12:
            raise ValueError("non-rational power of a series with nonzero valuation")
        shift = Fraction(v, g.m) * e_frac
        m_new = unified_ramification(g.m, shift.denominator)
        unit = PuiseuxSeries(g.coeffs, 0, g.m)
        base = power(unit, e).refine(m_new)
        k = int(shift * m_new)
        return PuiseuxSeries(base.coeffs, base.low + k, m_new)
    lg = log_series(g)
    return exp_series(lg * complex(e))


class MatrixSeries:
    """Square matrix of series sharing one grid ``(m, low, trunc)``.

    ``coeffs[k - low]`` is the ``r x r`` coefficient of ``t**(k/m)``.
    """

    __slots__ = ("m", "low", "coeffs")
    __hash__ = None
    __array_ufunc__ = None  # let ``ndarray @ MatrixSeries`` reach __rmatmul__

    def __init__(self, coeffs, low: int = 0, m: int = 1):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError("MatrixSeries coefficients must have shape (n, r, r)")
        if m > MAX_RAMIFICATION:
            raise RamificationCapExceeded(f"ramification {m} exceeds cap {MAX_RAMIFICATION}")
        c.flags.writeable = False
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "low", int(low))
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("MatrixSeries is immutable")

    @property
    def rank(self) -> int:
        return self.coeffs.shape[1]

    @property
    def trunc(self) -> int:
        return self.low + self.coeffs.shape[0] - 1

    @classmethod
    def identity(cls, r: int, trunc: int = DEFAULT_TRUNCATION, m: int = 1):
        c = np.zeros((trunc + 1, r, r), dtype=complex)
        c[0] = np.eye(r)
        return cls(c, 0, m)

    @classmethod
    def constant(cls, M, trunc: int = DEFAULT_TRUNCATION, m: int = 1):
        M = np.atleast_2d(np.asarray(M, dtype=complex))
        c = np.zeros((trunc + 1,) + M.shape, dtype=complex)
        c[0] = M
        return cls(c, 0, m)

    @classmethod
    def from_entries(cls, entries):
        """Build from a nested list of PuiseuxSeries, unifying grid and window."""
        flat = [e for row in entries for e in row]
        r = len(entries)
        if any(len(row) != r for row in entries):
            raise ValueError("matrix of series must be square")
        m = unified_ramification(*(e.m for e in flat))
        flat = [e.refine(m) for e in flat]
        low = min(e.low for e in flat)
        trunc = min(e.trunc for e in flat)
        c = np.zeros((trunc - low + 1, r, r), dtype=complex)
        for i in range(r):
            for j in range(r):
                e = entries[i][j].refine(m)
                c[:, i, j] = _aligned(e, low, trunc)
        return cls(c, low, m)

    def entry(self, i: int, j: int) -> PuiseuxSeries:
        return PuiseuxSeries(self.coeffs[:, i, j], self.low, self.m)

    def entries(self):
        r = self.rank
        return [[self.entry(i, j) for j in range(r)] for i in range(r)]

    def coefficient(self, k: int) -> np.ndarray:
        if k < self.low:
            return np.zeros((self.rank, self.rank), dtype=complex)
        if k > self.trunc:
            raise InsufficientTruncation(f"coefficient {k} beyond truncation {self.trunc}")
        return self.coeffs[k - self.low]

    def refine(self, m_new: int) -> MatrixSeries:
        if m_new == self.m:
            return self
        d = m_new // self.m
        if m_new % self.m:
            raise ValueError(f"cannot refine ramification {self.m} to {m_new}")
        n = self.coeffs.shape[0]
        out = np.zeros((n * d, self.rank, self.rank), dtype=complex)
        out[::d] = self.coeffs
        return MatrixSeries(out, self.low * d, m_new)

    def window(self, low: int, trunc: int) -> MatrixSeries:
        if trunc > self.trunc:
            raise InsufficientTruncation(f"cannot extend truncation {self.trunc} to {trunc}")
        r = self.rank
        out = np.zeros((trunc - low + 1, r, r), dtype=complex)
        lo = max(low, self.low)
        if lo <= trunc:
            out[lo - low :] = self.coeffs[lo - self.low : trunc - self.low + 1]
        return MatrixSeries(out, low, self.m)

    def _unify(self, other):
        m = unified_ramification(self.m, other.m)
        return self.refine(m), other.refine(m)

    def __add__(self, other):
        f, g = self._unify(other)
        low, trunc = min(f.low, g.low), min(f.trunc, g.trunc)
        return MatrixSeries(f.window(low, trunc).coeffs + g.window(low, trunc).coeffs, low, f.m)

    def __neg__(self):
        return MatrixSeries(-self.coeffs, self.low, self.m)

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other):
        if not isinstance(other, MatrixSeries):
            other = np.asarray(other, dtype=complex)
            return MatrixSeries(self.coeffs @ other, self.low, self.m)
        f, g = self._unify(other)
        low = f.low + g.low
        trunc = min(f.trunc + g.low, g.trunc + f.low)
        n = trunc - low + 1
        out = np.zeros((n, f.rank, f.rank), dtype=complex)
        for a in range(min(n, f.coeffs.shape[0])):
            nb = min(n - a, g.coeffs.shape[0])
            out[a : a + nb] += f.coeffs[a] @ g.coeffs[:nb]
        return MatrixSeries(out, low, f.m)

    def __rmatmul__(self, other):
        other = np.asarray(other, dtype=complex)
        return MatrixSeries(other @ self.coeffs, self.low, self.m)

    def __mul__(self, scalar):
        if isinstance(scalar, PuiseuxSeries):
            S = MatrixSeries(scalar.coeffs[:, None, None] * np.eye(self.rank), scalar.low, scalar.m)
            return S @ self
        return MatrixSeries(self.coeffs * complex(scalar), self.low, self.m)

    __rmul__ = __mul__

    def phi(self) -> MatrixSeries:
        r = self.rank
        out = np.zeros_like(self.coeffs)
        for i in range(r):
            for j in range(r):
                out[:, i, j] = self.entry(i, j).phi().coeffs
        return MatrixSeries(out, self.low, self.m)

    def invert(self) -> MatrixSeries:
        """Inverse assuming the lowest stored coefficient is invertible."""
        lead_idx = 0
        while lead_idx < self.coeffs.shape[0] and np.all(self.coeffs[lead_idx] == 0):
            lead_idx += 1
        if lead_idx == self.coeffs.shape[0]:
            raise ZeroLeadingTerm("zero matrix series")
        a = self.coeffs[lead_idx:]
        v = self.low + lead_idx
        if abs(np.linalg.det(a[0])) < 1e-14 * max(1.0, np.max(np.abs(a[0]))) ** self.rank:
            raise ZeroLeadingTerm("leading matrix coefficient is singular")
        a0inv = np.linalg.inv(a[0])
        n = self.trunc - v
        b = np.zeros((n + 1, self.rank, self.rank), dtype=complex)
        b[0] = a0inv
        for k in range(1, n + 1):
            acc = np.zeros((self.rank, self.rank), dtype=complex)
            for j in range(1, k + 1):
                acc += b[k - j] @ a[j]
            b[k] = -acc @ a0inv
        return MatrixSeries(b, -v, self.m)

    def kron(self, other) -> MatrixSeries:
        f, g = self._unify(other)
        low = f.low + g.low
        trunc = min(f.trunc + g.low, g.trunc + f.low)
        n = trunc - low + 1
        r = f.rank * g.rank
        out = np.zeros((n, r, r), dtype=complex)
        for a in range(min(n, f.coeffs.shape[0])):
            for b in range(min(n - a, g.coeffs.shape[0])):
                out[a + b] += np.kron(f.coeffs[a], g.coeffs[b])
        return MatrixSeries(out, low, f.m)

    def transpose(self) -> MatrixSeries:
        return MatrixSeries(np.transpose(self.coeffs, (0, 2, 1)), self.low, self.m)

    def block(self, rows, cols) -> MatrixSeries:
        return MatrixSeries(self.coeffs[:, rows][:, :, cols], self.low, self.m)

    def evaluate(self, s, log_s=None) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        if log_s is None:
            log_s = np.log(s)
        log_tau = -np.asarray(log_s) / self.m
        ks = np.arange(self.low, self.trunc + 1)
        powers = np.exp(np.multiply.outer(log_tau, ks))
        return np.tensordot(powers, self.coeffs, axes=([-1], [0]))

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def allclose(self, other, rtol: float = RTOL) -> bool:
        f, g = self._unify(other)
        low, trunc = min(f.low, g.low), min(f.trunc, g.trunc)
        a, b = f.window(low, trunc).coeffs, g.window(low, trunc).coeffs
        scale = max(1.0, f.scale(), g.scale())
        return bool(np.max(np.abs(a - b)) <= rtol * scale)

    def __eq__(self, other):
        if not isinstance(other, MatrixSeries):
            return NotImplemented
        return self.rank == other.rank and self.allclose(other)

    def __repr__(self):
        return f"MatrixSeries(rank={self.rank}, m={self.m}, window=[{self.low}, {self.trunc}])"


def matrix_power_1pt(G, sign: int = -1, trunc: int = DEFAULT_TRUNCATION, m: int = 1) -> MatrixSeries:
    """``(1+t)**(sign*G) = exp(sign * G * log(1+t))`` as a matrix series.

    Solved from ``(1+t) E' = sign * G E`` coefficientwise in ``t``; exact to
    the truncation because ``log(1+t)`` has positive valuation.
    """
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    r = G.shape[0]
    n = trunc // m
    E = np.zeros((n + 1, r, r), dtype=complex)
    E[0] = np.eye(r)
    SG = sign * G
    for k in range(n):
        # (k+1) E_{k+1} + k E_k = SG E_k
        E[k + 1] = (SG @ E[k] - k * E[k]) / (k + 1)
    out = np.zeros((trunc + 1, r, r), dtype=complex)
    out[:: m][: n + 1] = E
    return MatrixSeries(out, 0, m)


def scalar_power_1pt(gamma, sign: int = -1, trunc: int = DEFAULT_TRUNCATION, m: int = 1) -> PuiseuxSeries:
    return matrix_power_1pt([[gamma]], sign, trunc, m).entry(0, 0)


# text format ----------------------------------------------------------------
def format_complex(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return repr(float(c.real))
    if c.real == 0:
        return f"({float(c.imag)!r}i)"
    sign = "+" if c.imag >= 0 or math.isnan(c.imag) else "-"
    return f"({float(c.real)!r}{sign}{abs(float(c.imag))!r}i)"


def format_power(var: str, e: Fraction) -> str:
    if e == 0:
        return ""
    if e == 1:
        return var
    if e.denominator == 1:
        return f"{var}^({e.numerator})" if e < 0 else f"{var}^{e.numerator}"
    return f"{var}^({e.numerator}/{e.denominator})"


def format_series(f: PuiseuxSeries, var: str = "t") -> str:
    terms = []
    for k in range(f.low, f.trunc + 1):
        c = f.coeffs[k - f.low]
        if c == 0:
            continue
        p = format_power(var, Fraction(k, f.m))
        cs = format_complex(c)
        terms.append(cs if not p else f"{cs}*{p}")
    return " + ".join(terms) if terms else "0"
