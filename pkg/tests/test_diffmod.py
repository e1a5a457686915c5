import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokesdiff import models
from stokesdiff.diffmod import (
    DiffSystem,
    FormalBlock,
    FormalDatum,
    check_mild,
    direct_sum,
    formal_datum,
    gauge_residual,
    graded_module,
    hom,
    rank_one_formal,
    split_by_eigenvalues,
    tensor,
)
from stokesdiff.errors import NotMild, UnsupportedFormalStructure
from stokesdiff.exponents import Exponent
from stokesdiff.parser import parse_system
from stokesdiff.series import MatrixSeries


def _sys(text):
    return parse_system(text).system()


def test_mildness():
    assert check_mild(models.b_alpha(0.5))
    assert not check_mild(_sys("A = [[t]]"))
    with pytest.raises(NotMild):
        split_by_eigenvalues(_sys("A = [[t, 0], [0, 1]]"))


def test_formal_datum_of_diagonal_system():
    fd = formal_datum(_sys("A = [[2*(1+t), 0], [0, 1+t/2]]"))
    a0, a1 = fd.blocks
    assert a0.a.allclose(Exponent([np.log(2)])) and np.allclose(a0.G, [[-1]])
    assert a1.a.is_zero() and np.allclose(a1.G, [[-0.5]])


def test_unsupported_structure():
    with pytest.raises(UnsupportedFormalStructure):
        formal_datum(_sys("A = [[1, t], [t, 1]]"))


def test_e_gamma_formal_exponent():
    a, gam, _ = rank_one_formal(models.e_gamma().A.entry(0, 0))
    assert a.allclose(Exponent([1.0])) and abs(gam + 0.5) < 1e-12


@given(st.complex_numbers(max_magnitude=2, allow_nan=False), st.floats(-1, 1), st.floats(-1, 1))
@settings(max_examples=25, deadline=None)
def test_graded_module_round_trip(c, g1, g2):
    fd = FormalDatum([FormalBlock(Exponent([c]), [[g1]]), FormalBlock(Exponent.zero(), [[g2]])])
    if abs(np.exp(c) - 1) < 0.3:
        return  # clustered leading eigenvalues
    back = formal_datum(graded_module(fd))
    for x, y in zip(fd.blocks, back.blocks):
        assert abs(np.exp(x.a.top) - np.exp(y.a.top)) < 1e-9
        assert np.allclose(x.G, y.G, atol=1e-9)


def test_split_gauge_identity():
    rng = np.random.default_rng(1)
    c = np.zeros((9, 3, 3), dtype=complex)
    c[0] = np.diag([1.0, 2.0, -1.5])
    c[1:4] = rng.normal(size=(3, 3, 3))
    A = MatrixSeries(c, 0, 1)
    H, blocks = split_by_eigenvalues(DiffSystem(A), 8)
    gauged = np.zeros_like(c)
    for k, b in enumerate(blocks):
        gauged[:, k, k] = b.A.coeffs[:, 0, 0]
    assert gauge_residual(A, H, MatrixSeries(gauged, 0, 1)) < 1e-9


def test_constructions():
    b, e = models.b_alpha(0.5), models.e_gamma()
    assert tensor(b, e).rank == 1 and direct_sum(models.trivial(), b).rank == 2
    fd = formal_datum(tensor(models.b_alpha(0.5), models.b_alpha(0.25)))
    assert np.allclose(fd.blocks[0].G, [[-0.75]])
    fd = formal_datum(hom(models.b_alpha(0.5), models.b_alpha(0.25)))
    assert np.allclose(fd.blocks[0].G, [[0.25]])
    s = 7.0 + 1j
    assert np.allclose(tensor(b, e)(s), b(s) * e(s))
