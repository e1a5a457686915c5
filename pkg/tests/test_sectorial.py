import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokesdiff import models
from stokesdiff.diffmod import FormalBlock, FormalDatum, formal_datum
from stokesdiff.errors import InsufficientSamples, StokesLineInArc
from stokesdiff.exponents import Arc, Exponent, GrowthClass, growth_class, shift
from stokesdiff.sectorial import (
    QuadratureParams,
    SolveParams,
    branch_log,
    classify_growth,
    flat_sections,
    lambda_op,
    nabla,
    ray_points,
    residual,
)
from stokesdiff.special import gamma_ratio


def test_branch_log_follows_reference():
    z = -1 - 1e-9j
    assert abs(branch_log(z, math.pi).imag - math.pi) < 1e-6
    assert abs(branch_log(z, 0.0).imag + math.pi) < 1e-6


@pytest.mark.parametrize("alpha", [0.5, 0.3 + 0.2j])
@pytest.mark.parametrize("sigma", [0.0, 0.5, -0.5])
def test_flat_section_b_alpha(alpha, sigma):
    sysm = models.b_alpha(alpha)
    sol = flat_sections(sysm, formal_datum(sysm), Arc(-sigma - 0.2, -sigma + 0.2), SolveParams(10, 40, 16, sigma=sigma))
    ref = np.array([gamma_ratio(s, alpha) for s in sol.samples.s])
    assert np.allclose(sol.samples.values[:, 0, 0], ref, rtol=1e-8)
    assert sol.residual < 1e-10


def test_flat_section_e_gamma():
    sysm = models.e_gamma()
    sol = flat_sections(sysm, formal_datum(sysm), Arc(-0.4, 0.0), SolveParams(10, 30, 12, sigma=0.2))
    ref = np.array([models.e_gamma_section(s, branch_log(s, sol.sigma_ref)) for s in sol.samples.s])
    # normalized to the formal frame exp(-s) s^(-1/2): Stirling's constant
    assert np.allclose(np.sqrt(2 * np.pi) * sol.samples.values[:, 0, 0], ref, rtol=1e-8)


def test_stokes_ray_is_rejected_or_shifted():
    fd = FormalDatum([FormalBlock(Exponent([1.0]), [[0.0]]), FormalBlock(Exponent.zero(), [[0.0]])])
    from stokesdiff.diffmod import graded_module

    sysm = graded_module(fd)
    arc = Arc(-math.pi / 2 - 0.2, -math.pi / 2 + 0.2)
    with pytest.raises(StokesLineInArc):
        flat_sections(sysm, fd, arc, SolveParams(10, 20, 8, sigma=math.pi / 2))
    with pytest.warns(UserWarning):
        sol = flat_sections(sysm, fd, arc, SolveParams(10, 20, 8, sigma=math.pi / 2, on_stokes="shift"))
    assert sol.samples.sigma != math.pi / 2 and sol.warnings


TRIVIAL = FormalBlock(Exponent.zero(), [[0.0]])


def test_lambda_inverts_nabla_on_b():
    block = FormalBlock(Exponent.zero(), [[-0.5]])
    from stokesdiff.diffmod import graded_module

    sysm = graded_module(FormalDatum([block]))
    pts = ray_points(0.4, 3, 15, 10)
    f = lambda z: np.exp(-np.asarray(z))
    L = lambda_op(block, f, pts)
    L.values = L.values.reshape(-1, 1)
    L.next_values = L.next_values.reshape(-1, 1)
    d = nabla(sysm, L, 0.4).reshape(-1)
    assert np.allclose(d, f(pts), rtol=1e-8, atol=0)


def test_quadrature_convergence():
    pts = ray_points(0.3, 3, 12, 6)
    f = lambda z: np.exp(-(1 - 0.3j) * np.asarray(z))
    a = lambda_op(TRIVIAL, f, pts, QuadratureParams(panel=0.25))
    b = lambda_op(TRIVIAL, f, pts, QuadratureParams(panel=0.125))
    change = np.abs(a.values - b.values)
    assert np.all(change <= 10 * a.errors + 1e-15 * np.abs(a.values))


def test_classify_growth_known_functions():
    pts = ray_points(0.2, 4, 30, 20)
    assert classify_growth(pts, values=np.exp(-pts)).cls is GrowthClass.RapidDecay
    assert classify_growth(pts, values=np.exp(pts)).cls is GrowthClass.Growth
    assert classify_growth(pts, values=pts**3).cls is GrowthClass.Moderate
    with pytest.raises(InsufficientSamples):
        classify_growth(pts[:5], values=np.exp(-pts[:5]))


@given(st.integers(-2, 2), st.sampled_from([0.4, 1.2, -0.7, 2.5, -2.0]))
@settings(max_examples=25, deadline=None)
def test_u_shift_matches_growth_class(n, sigma):
    pts = ray_points(sigma, 4, 30, 20)
    logv = 2j * np.pi * n * pts
    fit = classify_growth(pts, values=np.exp(logv.real))
    pred = growth_class(shift(Exponent.zero(), n), sigma)
    assert fit.cls is pred


def test_residual_requires_companions():
    from stokesdiff.errors import MissingCompanions
    from stokesdiff.sectorial import RaySamples

    with pytest.raises(MissingCompanions):
        residual(models.trivial(), RaySamples(ray_points(0, 1, 2, 3), np.ones((3, 1, 1))))
