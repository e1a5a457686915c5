"""Complex Gamma and log-Gamma with branch tracking along rays.

log Gamma is computed by shifting ``z`` to ``Re z >= 15`` with the recurrence
and then summing the Stirling series with Bernoulli corrections.  The log of
the recurrence product is accumulated term by term (each term principal), so
the result is analytic on ``C \\ (-inf, 0]`` and real on the positive reals.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegerInput, PoleAt, RayHitsPole

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SHIFT_TO = 15.0
_POLE_TOL = 1e-10
# B_{2k} / (2k (2k-1)) for k = 1..10
_STIRLING = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
]


def _check_pole(z: complex):
    if z.real <= 0.5 and abs(z.imag) < _POLE_TOL and abs(z.real - round(z.real)) < _POLE_TOL:
        raise PoleAt(z)


def _stirling(z: complex) -> complex:
    w = 1.0 / z
    w2 = w * w
    corr = 0.0
    p = w
    for c in _STIRLING:
        corr += c * p
        p *= w2
    return (z - 0.5) * cmath.log(z) - z + _HALF_LOG_2PI + corr


def loggamma(z) -> complex:
    """log Gamma(z), analytic off ``(-inf, 0]`` (same branch as scipy's ``loggamma`` there)."""
    z = complex(z)
    _check_pole(z)
    acc = 0.0j
    while z.real < _SHIFT_TO:
        acc += cmath.log(z)
        z += 1.0
    return _stirling(z) - acc


def gamma(z) -> complex:
    """Gamma(z); raises PoleAt near non-positive integers and OverflowError beyond double range."""
    lg = loggamma(z)
    if lg.real > 709.0:
        raise OverflowError(f"Gamma({z}) overflows")
    return cmath.exp(lg)


def rgamma(z) -> complex:
    """1/Gamma(z), zero at the poles."""
    z = complex(z)
    try:
        return cmath.exp(-loggamma(z))
    except PoleAt:
        return 0.0j


@dataclass(frozen=True)
class GammaEval:
    s: complex
    value: complex
    log_value: complex
    arg_continuity: float  # accumulated Im log Gamma along the ray


def _unwrap_to(val: complex, ref: complex) -> complex:
    k = round((ref.imag - val.imag) / (2 * math.pi))
    return val + 2j * math.pi * k


def log_gamma_ray(s0, sigma: float, count: int, h: float = 1.0, substeps: int = 8):
    """Branch-continuous log Gamma at ``s0 + k h e^{i sigma}``, k = 0..count-1."""
    s0 = complex(s0)
    d = cmath.exp(1j * sigma) * h
    # pole check: the segment hits a non-positive integer?
    if abs(d.imag) < 1e-15 and abs(s0.imag) < _POLE_TOL:
        end = s0 + d * (count - 1)
        lo, hi = min(s0.real, end.real), max(s0.real, end.real)
        if lo <= 0.0 and math.floor(min(hi, 0.0)) >= lo - _POLE_TOL:
            raise RayHitsPole(f"ray from {s0} in direction {sigma} meets a pole of Gamma")
    elif abs(d.imag) > 1e-15:
        # crossing of the real axis at parameter t*
        tstar = -s0.imag / d.imag
        if 0 <= tstar <= count - 1:
            x = (s0 + tstar * d).real
            if x <= _POLE_TOL and abs(x - round(x)) < 1e-8:
                raise RayHitsPole(f"ray from {s0} passes through the pole {round(x)}")
    out = []
    prev = None
    for k in range(count):
        s = s0 + k * d
        if prev is None:
            lg = loggamma(s)
        else:
            lg = prev
            for j in range(1, substeps + 1):
                pt = s - d + d * j / substeps
                lg = _unwrap_to(loggamma(pt), lg)
        out.append(GammaEval(s, cmath.exp(lg) if lg.real < 709 else complex("inf"), lg, lg.imag))
        prev = lg
    return out


def reflection_residual(s) -> float:
    """Relative deviation of ``(1-u) Gamma(s)`` from ``-2 pi i e^{pi i s} / Gamma(1-s)``, u = e^{2 pi i s}."""
    s = complex(s)
    if abs(s.imag) < _POLE_TOL and abs(s.real - round(s.real)) < _POLE_TOL:
        raise IntegerInput(f"{s} is an integer")
    # compared in log form so that large |Gamma| does not overflow
    u = cmath.exp(2j * math.pi * s)
    lhs_log = cmath.log(1.0 - u) + loggamma(s)
    rhs_log = cmath.log(-2j * math.pi) + 1j * math.pi * s - loggamma(1.0 - s)
    d = lhs_log - rhs_log
    d -= 2j * math.pi * round(d.imag / (2 * math.pi))
    return abs(cmath.exp(d) - 1.0)


def gamma_ratio(s, alpha) -> complex:
    """Gamma(s)/Gamma(s+alpha), computed in log form."""
    return cmath.exp(loggamma(s) - loggamma(complex(s) + alpha))


def loggamma_array(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.vectorize(loggamma, otypes=[complex])(z)
