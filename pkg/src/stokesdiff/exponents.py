"""Exponential factors ``a(s) = sum_l c_l s**(l/m)`` and their order relations.

Directions: an arc is given on the circle of the variable ``t`` by angles
``theta``; the corresponding ray directions in the ``s``-plane are
``sigma = -theta`` because ``s = 1/t``.  Growth of ``exp(a(s))`` along
``arg s = sigma`` is decided by the largest ``l`` with
``Re(c_l exp(i l sigma / m)) != 0``.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from .errors import EqualExponents, InvalidArc, NotRootOfUnity
from .series import MAX_RAMIFICATION, unified_ramification

TWO_PI = 2.0 * math.pi
ZERO_TOL = 1e-12
EQ_RTOL = 1e-12


@total_ordering
class GrowthClass(enum.Enum):
    RapidDecay = 0
    Moderate = 1
    Growth = 2

    def __lt__(self, other):
        if not isinstance(other, GrowthClass):
            return NotImplemented
        return self.value < other.value


class Exponent:
    """Immutable exponent with ramification ``m``; ``coeffs[l-1]`` multiplies ``s**(l/m)``."""

    __slots__ = ("m", "coeffs")
    __hash__ = None

    def __init__(self, coeffs, m: int | None = None):
        c = np.array(coeffs, dtype=complex).ravel()
        if m is None:
            m = c.size
        if c.size != m or m < 1:
            raise ValueError(f"need exactly m={m} coefficients, got {c.size}")
        if m > MAX_RAMIFICATION:
            unified_ramification(m)
        c.flags.writeable = False
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):
        raise AttributeError("Exponent is immutable")

    @classmethod
    def zero(cls, m: int = 1):
        return cls(np.zeros(m), m)

    @classmethod
    def linear(cls, c):
        """``c * s``."""
        return cls([c], 1)

    @property
    def top(self) -> complex:
        """Coefficient of ``s``."""
        return complex(self.coeffs[-1])

    def coefficient(self, l: int) -> complex:
        return complex(self.coeffs[l - 1])

    def is_zero(self, tol: float = EQ_RTOL) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    # grid handling --------------------------------------------------------
    def refine(self, m_new: int) -> Exponent:
        if m_new == self.m:
            return self
        if m_new % self.m:
            raise ValueError(f"cannot refine ramification {self.m} to {m_new}")
        d = m_new // self.m
        c = np.zeros(m_new, dtype=complex)
        c[d - 1 :: d] = self.coeffs
        return Exponent(c, m_new)

    def minimal(self, tol: float = 0.0) -> Exponent:
        """Same exponent on the coarsest grid."""
        g = self.m
        for l in range(1, self.m + 1):
            if abs(self.coeffs[l - 1]) > tol:
                g = math.gcd(g, l)
        if g == 1:
            return self
        return Exponent(self.coeffs[g - 1 :: g], self.m // g)

    @staticmethod
    def _unify(a: Exponent, b: Exponent):
        m = unified_ramification(a.m, b.m)
        return a.refine(m), b.refine(m)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        a, b = self._unify(self, other)
        return Exponent(a.coeffs + b.coeffs, a.m)

    def __neg__(self):
        return Exponent(-self.coeffs, self.m)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k):
        return Exponent(self.coeffs * complex(k), self.m)

    __rmul__ = __mul__

    def allclose(self, other, rtol: float = EQ_RTOL) -> bool:
        a, b = self._unify(self, other)
        scale = max(1.0, float(np.max(np.abs(a.coeffs))), float(np.max(np.abs(b.coeffs))))
        return bool(np.max(np.abs(a.coeffs - b.coeffs)) <= rtol * scale)

    def __eq__(self, other):
        if not isinstance(other, Exponent):
            return NotImplemented
        return self.allclose(other)

    # evaluation -----------------------------------------------------------
    def __call__(self, s, log_s=None):
        """``a(s)`` with ``s**(l/m) = exp(l/m * log s)``; ``log_s`` fixes the branch."""
        s = np.asarray(s, dtype=complex)
        if log_s is None:
            log_s = np.log(s)
        log_s = np.asarray(log_s)
        out = np.zeros(np.shape(log_s), dtype=complex)
        for l in range(1, self.m + 1):
            c = self.coeffs[l - 1]
            if c != 0:
                out = out + c * np.exp(l / self.m * log_s)
        return out

    def real_part_terms(self, sigma: float) -> np.ndarray:
        """``Re(c_l exp(i l sigma/m))`` for ``l = 1..m``."""
        l = np.arange(1, self.m + 1)
        return np.real(self.coeffs * np.exp(1j * l * sigma / self.m))

    # canonical orbit representatives ---------------------------------------
    @property
    def is_canonical(self) -> bool:
        im = self.top.imag
        return -math.pi < im <= math.pi

    def to_text(self) -> str:
        from .series import format_complex, format_power
        from fractions import Fraction

        terms = []
        for l in range(self.m, 0, -1):
            c = self.coeffs[l - 1]
            if c != 0:
                terms.append(f"{format_complex(c)}*{format_power('s', Fraction(l, self.m))}")
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return f"Exponent({self.to_text()}, m={self.m})"


def shift(a: Exponent, n: int) -> Exponent:
    """``a + 2 pi i n s`` (multiplication of sections by ``u**n``)."""
    c = np.array(a.coeffs)
    c[-1] += 2j * math.pi * n
    return Exponent(c, a.m)


def canonicalize(a: Exponent) -> tuple[Exponent, int]:
    """Return ``(b, n)`` with ``b`` canonical and ``a == shift(b, n)``."""
    im = a.top.imag
    n = math.ceil((im - math.pi) / TWO_PI)
    b = shift(a, -n)
    if b.top.imag <= -math.pi:
        b, n = shift(b, 1), n - 1
    return b, n


def same_orbit(a: Exponent, b: Exponent, tol: float = 1e-10) -> bool:
    return canonicalize(a)[0].allclose(canonicalize(b)[0], rtol=tol)


def mu_action(zeta: complex, a: Exponent) -> Exponent:
    """Deck transformation ``tau -> zeta * tau``: ``c_l -> c_l zeta**(-l)``."""
    zeta = complex(zeta)
    if abs(zeta**a.m - 1.0) > 1e-10:
        raise NotRootOfUnity(f"{zeta} is not an {a.m}-th root of unity")
    l = np.arange(1, a.m + 1)
    return Exponent(a.coeffs * zeta ** (-l), a.m)


def growth_class(a: Exponent, sigma: float) -> GrowthClass:
    """Class of ``exp(a(s))`` along ``arg s = sigma`` (branch ``s**(1/m)`` from sigma)."""
    vals = a.real_part_terms(sigma)
    for l in range(a.m, 0, -1):
        v = vals[l - 1]
        if abs(v) >= ZERO_TOL * (1.0 + abs(a.coeffs[l - 1])):
            return GrowthClass.Growth if v > 0 else GrowthClass.RapidDecay
    return GrowthClass.Moderate


@dataclass(frozen=True)
class Arc:
    """Open arc ``{exp(i theta) : start < theta < end}`` on the t-circle."""

    start: float
    end: float

    def __post_init__(self):
        if not self.start < self.end:
            raise InvalidArc(f"arc needs start < end, got ({self.start}, {self.end})")
        if self.end - self.start > TWO_PI + 1e-12:
            raise InvalidArc("arc wider than the circle")

    @classmethod
    def from_sigma(cls, lo: float, hi: float) -> Arc:
        """Arc whose s-directions form the interval ``(lo, hi)``."""
        return cls(-hi, -lo)

    @property
    def width(self) -> float:
        return self.end - self.start

    @property
    def sigma_range(self) -> tuple[float, float]:
        return (-self.end, -self.start)

    @property
    def mid_theta(self) -> float:
        return 0.5 * (self.start + self.end)

    @property
    def mid_sigma(self) -> float:
        return -self.mid_theta

    def contains_theta(self, theta: float) -> bool:
        k = math.ceil((self.start - theta) / TWO_PI)
        th = theta + k * TWO_PI
        if th <= self.start:
            th += TWO_PI
        return self.start < th < self.end

    def contains_sigma(self, sigma: float) -> bool:
        return self.contains_theta(-sigma)

    @property
    def contains_zero(self) -> bool:
        return self.contains_theta(0.0)

    @property
    def contains_pi(self) -> bool:
        return self.contains_theta(math.pi)

    def sub_arc(self, start: float, end: float) -> Arc:
        if start < self.start - 1e-15 or end > self.end + 1e-15:
            raise InvalidArc("sub-arc not contained in arc")
        return Arc(start, end)


def _zero_crossings(a: Exponent, lo: float, hi: float):
    """Directions in (lo, hi) where the top nonzero term of ``a`` has zero real part."""
    l = _top_index(a)
    if l is None:
        return []
    c = a.coeffs[l - 1]
    # Re(c e^{i l sigma/m}) = 0  <=>  l sigma/m + arg c = pi/2 + k pi
    scale = a.m / l
    base = math.pi / 2 - cmath.phase(c)
    kmin = math.ceil((lo / scale - base) / math.pi - 1e-15)
    out = []
    k = kmin - 1
    while True:
        sig = scale * (base + k * math.pi)
        if sig >= hi:
            break
        if sig > lo:
            out.append(sig)
        k += 1
    return out


def _top_index(a: Exponent, tol: float = EQ_RTOL):
    for l in range(a.m, 0, -1):
        if abs(a.coeffs[l - 1]) > tol:
            return l
    return None


def _sample_directions(d: Exponent, lo: float, hi: float):
    crit = _zero_crossings(d, lo, hi)
    pts = [lo, *crit, hi]
    mids = [0.5 * (x + y) for x, y in zip(pts[:-1], pts[1:])]
    return mids + crit


def leq(a: Exponent, b: Exponent, U: Arc) -> bool:
    """``exp(a - b)`` of moderate growth at every direction of the open arc."""
    d = a - b
    lo, hi = U.sigma_range
    return all(growth_class(d, sg) <= GrowthClass.Moderate for sg in _sample_directions(d, lo, hi))


def lt(a: Exponent, b: Exponent, U: Arc) -> bool:
    """``exp(a - b)`` of rapid decay at every direction of the open arc."""
    d = a - b
    lo, hi = U.sigma_range
    return all(growth_class(d, sg) is GrowthClass.RapidDecay for sg in _sample_directions(d, lo, hi))


def normalize_sigma(sigma: float) -> float:
    """Representative in (-pi, pi]."""
    x = math.remainder(sigma, TWO_PI)
    return math.pi if x <= -math.pi + 1e-15 else x


@dataclass(frozen=True)
class StokesDirection:
    sigma: float
    dominant: int
    sign_change: int  # +1 when Re of the dominant term goes from negative to positive as sigma grows

    @property
    def theta(self) -> float:
        return normalize_sigma(-self.sigma)


def stokes_directions(a: Exponent, b: Exponent) -> list[StokesDirection]:
    """Directions in (-pi, pi] where the dominant term of ``a - b`` changes sign."""
    d = a - b
    l = _top_index(d)
    if l is None:
        raise EqualExponents("exponents coincide; no Stokes directions")
    c = d.coeffs[l - 1]
    out = []
    eps = -math.pi - 1e-9
    for sg in _zero_crossings(d, eps, math.pi + 1e-9):
        sg = normalize_sigma(sg)
        deriv = -(l / d.m) * (c * cmath.exp(1j * l * sg / d.m)).imag
        out.append(StokesDirection(sg, l, 1 if deriv > 0 else -1))
    uniq = []
    for sd in sorted(out, key=lambda x: x.sigma):
        if not uniq or abs(sd.sigma - uniq[-1].sigma) > 1e-12:
            uniq.append(sd)
    return uniq


def stokes_rows(a: Exponent, b: Exponent):
    """CSV rows ``(sigma, theta, dominant_l, sign_change)``."""
    return [(sd.sigma, sd.theta, sd.dominant, sd.sign_change) for sd in stokes_directions(a, b)]
