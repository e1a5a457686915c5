import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from stokesdiff import models
from stokesdiff.diffmod import FormalBlock, FormalDatum, graded_module
from stokesdiff.errors import CertificationFailed, FullCircleArc, InconsistentData, UnsupportedFormalStructure
from stokesdiff.exponents import Arc, Exponent, shift
from stokesdiff.parser import parse_system
from stokesdiff.stokes import (
    Covering,
    GradedDatum,
    RingKind,
    aper_ring,
    aut_pattern,
    cocycle_from_solutions,
    default_covering,
    grading,
    hom_indices,
    identity_cocycle,
    rh_assemble,
    tensor_indices,
)


def _fd(*pairs):
    return FormalDatum([FormalBlock(Exponent([c]) if c else Exponent.zero(), [[g]]) for c, g in pairs])


def test_aper_ring_kinds():
    assert aper_ring(Arc(0.2, 1.0)).kind is RingKind.SmallV
    assert aper_ring(Arc(-1.0, -0.2)).kind is RingKind.SmallU
    assert aper_ring(Arc(-0.5, 0.5)).kind is RingKind.LaurentPoly
    assert aper_ring(Arc(0.2, 1.0)).rapid_generator == "v"
    with pytest.raises(FullCircleArc):
        aper_ring(Arc(-math.pi, math.pi))


def test_default_covering_cuts():
    cov = default_covering(_fd((1.0, 0.0), (0, 0.0)))
    assert len(cov) == 4
    assert np.allclose(cov.cuts, [-math.pi, -math.pi / 2, 0.0, math.pi / 2])
    # every arc contains exactly one cut point, overlaps are the gaps between cuts
    for a in range(len(cov)):
        assert cov.overlap(a).start == cov.cut(a)
        assert cov.arc(a).start < cov.cut(a) < cov.arc(a).end


def test_aut_pattern_upper_triangular():
    exps = [Exponent.zero(), Exponent([1.0])]
    pat = aut_pattern(exps, Arc(0.1, 0.5))  # sigma in (-0.5, -0.1): exp(0 - s) decays, so 0 < s
    assert pat[1][0] and not pat[0][1]


@given(st.floats(-0.45, 0.45), st.floats(-0.45, 0.45))
@settings(max_examples=20, deadline=None)
def test_identity_cocycle_monodromy(g1, g2):
    fd = _fd((1.0, g1), (0, g2))
    gd = grading(rh_assemble(fd, identity_cocycle(fd)))
    assert np.allclose(gd.entries[0].monodromy, np.exp(2j * np.pi * g1))
    assert np.allclose(gd.entries[1].monodromy, np.exp(2j * np.pi * g2))


@pytest.mark.parametrize("alpha", [0.5, 0.3 + 0.2j])
def test_b_alpha_cocycle(alpha):
    sc = cocycle_from_solutions(models.b_alpha(alpha), _fd((0, -alpha)))
    assert sc.certified and len(sc.overlaps) == 2
    mono = grading(sc).entries[0].monodromy
    assert np.allclose(mono, np.exp(-2j * np.pi * alpha), atol=1e-8)
    for o in sc.overlaps:
        assert abs(o.certificates[0].fit.mu + 2 * np.pi * abs(math.sin(o.sigma))) < 0.2 * 2 * np.pi * abs(math.sin(o.sigma))


def test_graded_module_has_identity_cocycle():
    fd = _fd((1.0, 0.2), (0, 0.1))
    sc = cocycle_from_solutions(graded_module(fd), fd)
    ref = identity_cocycle(fd, sc.covering)
    assert grading(sc).allclose(grading(ref), atol=1e-8)


def test_nontrivial_stokes_multiplier():
    sysm = parse_system("A = [[1, t], [0, exp(-1)]]").system()
    fd = FormalDatum([FormalBlock(Exponent.zero(), [[0.0]]), FormalBlock(Exponent([-1.0]), [[0.0]])])
    sc = cocycle_from_solutions(sysm, fd)
    assert sc.certified
    far = [o.raw.values[-1] for o in sc.overlaps]
    big = [g for g in far if abs(g[0, 1]) > 1e-3]
    assert big, "expected a Stokes multiplier"
    # the multiplier of y(s) = A y(s+1) with this A is pi e up to sign and i
    assert any(abs(abs(g[0, 1]) - np.pi * np.e) < 1e-6 for g in big)
    for g in far:
        assert abs(g[1, 0]) < 1e-8  # only the allowed triangle is populated


def test_overlap_across_stokes_line_fails():
    fd = _fd((1.0, 0.0), (0, 0.0))
    cov = Covering((-3 * math.pi / 4, 0.0, 3 * math.pi / 4))
    with pytest.raises(CertificationFailed):
        cocycle_from_solutions(graded_module(fd), fd, covering=cov)


def test_ramified_cocycle_unsupported():
    fd = FormalDatum([FormalBlock(Exponent([1.0, 0.0], 2), [[0.0]])])
    with pytest.raises(UnsupportedFormalStructure):
        cocycle_from_solutions(graded_module(fd), fd)


def test_orbit_arithmetic():
    S = [Exponent.zero(), Exponent([-1.0])]
    tens = tensor_indices(S, S)
    assert len(tens) == 3
    assert len(hom_indices([Exponent.zero()], [shift(Exponent.zero(), 1)])) == 1


def test_orbit_merging():
    fd = FormalDatum([FormalBlock(Exponent([1.0]), [[0.1]]), FormalBlock(shift(Exponent([1.0]), 1), [[0.2]])])
    gd = GradedDatum.from_formal(fd)
    assert len(gd.entries) == 1 and gd.entries[0].rank == 2
    assert np.allclose(gd.entries[0].monodromy, sla.block_diag([[np.exp(0.2j * np.pi)]], [[np.exp(0.4j * np.pi)]]))


def test_rh_assemble_checks_structure(tmp_path):
    fd = _fd((1.0, 0.0), (0, 0.0))
    other = _fd((0, 0.0))
    with pytest.raises(InconsistentData):
        rh_assemble(fd, identity_cocycle(other))
    fm = rh_assemble(_fd((0, -0.5)), cocycle_from_solutions(models.b_alpha(0.5), _fd((0, -0.5))))
    path = fm.write(tmp_path, "m")
    assert path.exists() and len(list(tmp_path.glob("m_overlap*.csv"))) == len(fm.covering)
