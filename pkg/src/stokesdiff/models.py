"""Reference rank-one systems with closed-form flat sections."""
from __future__ import annotations

import cmath

import numpy as np

from .diffmod import DiffSystem, FormalBlock, FormalDatum, graded_module
from .exponents import Exponent
from .series import DEFAULT_TRUNCATION, PuiseuxSeries, exp_series, log1p
from .special import loggamma


def trivial(trunc: int = DEFAULT_TRUNCATION) -> DiffSystem:
    """``A = 1``; flat sections are the 1-periodic functions."""
    return DiffSystem.constant([[1.0]], trunc, name="trivial")


def b_alpha(alpha, trunc: int = DEFAULT_TRUNCATION) -> DiffSystem:
    """``A = 1 + alpha t``; flat section ``Gamma(s)/Gamma(s+alpha)``."""
    alpha = complex(alpha)
    c = np.zeros(trunc + 1, dtype=complex)
    c[0], c[1] = 1.0, alpha

    def ev(s, log_s=None):
        return np.array([[1.0 + alpha / s]])

    return DiffSystem.scalar(PuiseuxSeries(c, 0, 1), ev, name=f"B_{alpha}")


def b_alpha_section(s, alpha) -> complex:
    return cmath.exp(loggamma(s) - loggamma(complex(s) + alpha))


def e_gamma(trunc: int = DEFAULT_TRUNCATION) -> DiffSystem:
    """``A(s) = (1+1/s)**(s+1)``, i.e. ``exp(l(s+1)-l(s)) t`` with ``l = s log s``.

    Flat section ``s**(-s) Gamma(s)``; formally ``exp(-s) s**(-1/2)`` times a unit.
    """
    L = log1p(trunc + 1)
    # (1/t + 1) log(1+t) = sum_k L_{k+1} t^k + log(1+t)
    g = exp_series(PuiseuxSeries(L.coeffs[1:], 0, 1) + log1p(trunc))

    def ev(s, log_s=None):
        return np.array([[cmath.exp((s + 1.0) * complex(np.log1p(1.0 / s)))]])

    return DiffSystem.scalar(g, ev, name="E_Gamma")


def e_gamma_section(s, log_s=None) -> complex:
    s = complex(s)
    if log_s is None:
        log_s = cmath.log(s)
    return cmath.exp(-s * log_s + loggamma(s))


def linear_exponent(c, G=0.0, order: int = DEFAULT_TRUNCATION) -> DiffSystem:
    """Elementary rank-one module with exponent ``c s`` and residue ``G``; flat ``exp(-c s) s**G``."""
    fd = FormalDatum([FormalBlock(Exponent([c], 1), [[G]])])
    sys = graded_module(fd, order)
    sys.name = f"E^({c}s)"
    return sys


def linear_exponent_section(s, c, G=0.0, log_s=None) -> complex:
    s = complex(s)
    if log_s is None:
        log_s = cmath.log(s)
    return cmath.exp(-c * s + G * log_s)

