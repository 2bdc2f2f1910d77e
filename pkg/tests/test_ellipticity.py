import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itpcheck.ellipticity import (
    DegeneratePencilError, _pair_margins_2d, check_elliptic, check_elliptic_2d, check_elliptic_nd,
    pencil_roots,
)
from itpcheck.fields import CoefficientField, Cube, Disk, sample
from itpcheck.spectra.validate import ramped_disk_field

E1, E2 = (1.0, 0.0), (0.0, 1.0)


def pencil_value(A, xi1, xi2, lam):
    v = np.asarray(xi1) + lam * np.asarray(xi2)
    return v @ np.asarray(A, dtype=complex) @ v


def test_identity_roots():
    r = pencil_roots(np.eye(2), E1, E2)
    assert abs(r.lambda_plus - 1j) < 1e-15 and abs(r.lambda_minus + 1j) < 1e-15
    assert r.separated


def test_diag23_roots():
    r = pencil_roots(np.diag([2.0, 3.0]), E1, E2)
    assert abs(r.lambda_plus - 1j * math.sqrt(2 / 3)) < 1e-12
    assert abs(r.lambda_plus.imag - 0.81650) < 1e-5
    assert abs(r.lambda_minus + 1j * math.sqrt(2 / 3)) < 1e-12


def test_indefinite_roots_are_real():
    r = pencil_roots(np.diag([1.0, -1.0]), E1, E2)
    assert not r.separated
    assert sorted([r.lambda_plus.real, r.lambda_minus.real]) == pytest.approx([-1, 1])
    assert r.margin == 0


def test_dependent_directions():
    with pytest.raises(DegeneratePencilError, match="linearly dependent"):
        pencil_roots(np.eye(2), (1.0, 1.0), (2.0, 2.0))


def test_degenerate_leading_coefficient():
    with pytest.raises(DegeneratePencilError, match="leading coefficient"):
        pencil_roots(np.diag([1.0, 0.0]), E1, E2)


def test_roots_in_three_dimensions():
    A = np.diag([1.0, 2.0, 3.0])
    r = pencil_roots(A, (1, 0, 0), (0, 0, 1))
    assert abs(r.lambda_plus - 1j / math.sqrt(3)) < 1e-12


def random_symmetric(rng, d, complex_=False):
    M = rng.normal(size=(d, d))
    if complex_:
        M = M + 1j * rng.normal(size=(d, d))
    return 0.5 * (M + M.T)


def test_root_residuals_random():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        A = random_symmetric(rng, 2, complex_=True)
        xi1, xi2 = rng.normal(size=2), rng.normal(size=2)
        try:
            r = pencil_roots(A, xi1, xi2)
        except DegeneratePencilError:
            continue
        for lam in (r.lambda_plus, r.lambda_minus):
            scale = 1 + np.abs(A).max()
            assert abs(pencil_value(A, xi1, xi2, lam)) < 1e-10 * scale * (1 + abs(lam)) ** 2


def test_real_roots_are_conjugate():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        A = random_symmetric(rng, 2)
        if np.linalg.det(A) <= 1e-3:
            continue  # real roots: no conjugate pairing to check
        r = pencil_roots(A, rng.normal(size=2), rng.normal(size=2))
        assert abs(r.lambda_minus - np.conj(r.lambda_plus)) < 1e-10 * (1 + abs(r.lambda_plus))


def test_real_2x2_verdict_matches_determinant():
    rng = np.random.default_rng(3)
    thetas = np.pi * np.arange(16) / 16
    mismatches = 0
    for _ in range(10_000):
        A = random_symmetric(rng, 2)
        det = np.linalg.det(A)
        if abs(det) < 1e-6:
            continue
        elliptic = float(np.min(_pair_margins_2d(A.astype(complex), thetas))) > 1e-8
        mismatches += elliptic != (det > 0)
    assert mismatches == 0


def test_check_2d_identity():
    f = CoefficientField.constant(np.eye(2), 1.0, Disk(1.0))
    rep = check_elliptic_2d(f, sample(Disk(1.0), 6))
    assert rep.elliptic and rep.worst_margin == pytest.approx(1.0, abs=1e-12)


def test_check_2d_indefinite_has_witness():
    f = CoefficientField.constant(np.diag([1.0, -1.0]), 1.0, Disk(1.0))
    rep = check_elliptic_2d(f, sample(Disk(1.0), 6))
    assert not rep.elliptic and rep.worst_margin == 0
    assert len(rep.witness_directions) == 2


def test_check_2d_ramped_disk_field():
    rep = check_elliptic(ramped_disk_field(2.0), sample(Disk(1.0), 12))
    assert rep.elliptic
    assert rep.worst_margin > 0.5


def test_check_2d_diag23_margin():
    f = CoefficientField.constant(np.diag([2.0, 3.0]), 1.0, Disk(1.0))
    rep = check_elliptic_2d(f, sample(Disk(1.0), 8))
    # the minimum over frame angles of the imaginary root part is sqrt(2/3)
    assert rep.worst_margin == pytest.approx(math.sqrt(2 / 3), rel=1e-8)


def test_check_nd_diag123():
    f = CoefficientField.constant(np.diag([1.0, 2.0, 3.0]), 1.0, Cube(1.0))
    rep = check_elliptic_nd(f, sample(Cube(1.0), 3))
    assert rep.elliptic and rep.worst_margin == pytest.approx(1.0)
    np.testing.assert_allclose(np.abs(rep.witness_directions[0]), [1, 0, 0], atol=1e-12)


def test_check_nd_indefinite():
    f = CoefficientField.constant(np.diag([1.0, 1.0, -1.0]), 1.0, Cube(1.0))
    rep = check_elliptic_nd(f, sample(Cube(1.0), 3))
    assert not rep.elliptic and rep.worst_margin < 1e-12
    xi = np.asarray(rep.witness_directions[0])
    assert abs(xi @ np.diag([1, 1, -1]) @ xi) < 1e-12


def test_check_nd_imaginary_identity():
    f = CoefficientField.constant(1j * np.eye(3), 1.0, Cube(1.0))
    rep = check_elliptic_nd(f, sample(Cube(1.0), 3))
    assert rep.elliptic and rep.worst_margin == pytest.approx(1.0, abs=1e-9)


def test_check_nd_complex_degenerate():
    A = np.diag([1.0, 1j, -1.0])
    f = CoefficientField.constant(A, 1.0, Cube(1.0))
    rep = check_elliptic_nd(f, sample(Cube(1.0), 3))
    assert not rep.elliptic


def varying_field():
    def A(x):
        s = 0.3 + x[0] ** 2 - 0.6 * x[1]
        return np.array([[1.0, s], [s, 1.2 - x[0] * x[1]]], dtype=complex)
    return CoefficientField(2, A, lambda x: 1.0, "expression", Disk(1.0))


def test_margin_monotone_under_nested_refinement():
    f = varying_field()
    geom = Disk(1.0)
    margins = [check_elliptic(f, sample(geom, r, boundary=8, n_directions=8)).worst_margin
               for r in (3, 5, 9, 17)]
    for coarse, fine in zip(margins, margins[1:]):
        assert fine <= coarse + 1e-12


def test_margin_monotone_3d():
    f = CoefficientField(3, lambda x: np.diag([1.0 + x[0], 0.5 + x[1] * x[2], 2.0]).astype(complex),
                         lambda x: 1.0, "expression", Cube(1.0))
    margins = [check_elliptic(f, sample(Cube(1.0), r)).worst_margin for r in (3, 5, 9, 17)]
    for coarse, fine in zip(margins, margins[1:]):
        assert fine <= coarse + 1e-12
    assert margins[-1] == pytest.approx(0.5)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(-0.95, 0.95))
def test_positive_definite_is_elliptic(a, b, rho):
    off = rho * math.sqrt(a * b)
    f = CoefficientField.constant([[a, off], [off, b]], 1.0, Disk(1.0))
    assert check_elliptic_2d(f, sample(Disk(1.0), 2, boundary=1, n_directions=8)).elliptic
