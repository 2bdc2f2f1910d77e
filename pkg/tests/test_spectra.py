import math

import mpmath
import numpy as np
import pytest

from itpcheck.spectra import (
    BesselDomainError, ContourConvergenceError, ContourZeroError, DispersionFunction, RadialProblem,
    StepSizeUnderflow, bessel_j, bessel_j_prime, c_scan, count_zeros, dispersion,
    dispersion_closed_form, ramp_profile, probe_grid, radial_v, winding_number,
)
from itpcheck.spectra.rk import integrate
from itpcheck.spectra.validate import CubeCase, sample_ks, validate_cube, validate_disk

RECT = (0.5, 8.0, -0.5, 0.5)


def ramped(a1=2.0, **kw):
    return RadialProblem(a_profile=ramp_profile(a1), **kw)


# Bessel functions

def test_bessel_at_origin():
    assert bessel_j(0, 0) == 1 and bessel_j(1, 0) == 0 and bessel_j(3, 0) == 0


def test_bessel_j0_one():
    assert abs(bessel_j(0, 1.0) - 0.76519769) < 1e-8
    assert abs(bessel_j(0, 1.0) - float(mpmath.besselj(0, 1))) < 1e-15


def test_bessel_j0_imaginary_unit():
    v = bessel_j(0, 1j)
    assert abs(v.imag) < 1e-12 and v.real > 1
    assert abs(v.real - float(mpmath.besseli(0, 1))) < 1e-14


@pytest.mark.parametrize("m", [0, 1, 2, 5, 11])
def test_bessel_against_mpmath(m):
    rng = np.random.default_rng(m)
    z = rng.uniform(-45, 45, 60) + 1j * rng.uniform(-6, 6, 60)
    mine = bessel_j(m, z)
    with mpmath.workdps(30):
        ref = np.array([complex(mpmath.besselj(m, complex(w))) for w in z])
    assert np.max(np.abs(mine - ref) / np.maximum(1, np.abs(ref))) < 1e-12


def test_bessel_derivative_identity_random():
    rng = np.random.default_rng(11)
    z = rng.uniform(-20, 20, 1000) + 1j * rng.uniform(-5, 5, 1000)
    for m in (1, 2, 4):
        lhs = bessel_j_prime(m, z)
        rhs = 0.5 * (bessel_j(m - 1, z) - bessel_j(m + 1, z))
        assert np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs))) < 1e-10
    np.testing.assert_allclose(bessel_j_prime(0, z), -bessel_j(1, z), rtol=1e-14)


def test_bessel_derivative_at_zero():
    assert bessel_j_prime(1, 0) == pytest.approx(0.5)
    assert bessel_j_prime(0, 0) == 0
    assert bessel_j_prime(2, 0) == 0


def test_bessel_domain_window():
    with pytest.raises(BesselDomainError):
        bessel_j(0, 50.0)
    with pytest.raises(ValueError):
        bessel_j(-1, 1.0)


def test_bessel_parity():
    z = np.array([0.3 + 2j, 4.5 - 1j, 12.0])
    for m in range(4):
        np.testing.assert_allclose(bessel_j(m, -z), (-1) ** m * bessel_j(m, z), rtol=1e-13)


# Runge-Kutta integrator

def test_rk_exponential_batch():
    lam = np.array([1j, -2.0, 0.5 - 3j])
    y = integrate(lambda t, y: lam * y, 0.0, 2.0, np.ones((1, 3)), tol=1e-12)
    np.testing.assert_allclose(y[0], np.exp(2 * lam), rtol=1e-9)


def test_rk_harmonic_oscillator():
    w = 3.0 + 0.5j
    y = integrate(lambda t, y: np.array([y[1], -w * w * y[0]]), 0.0, 1.5, np.array([[1.0], [0.0]]))
    assert abs(y[0, 0] - np.cos(w * 1.5)) < 1e-9


def test_rk_zero_span():
    y0 = np.array([[1.0 + 2j]])
    np.testing.assert_array_equal(integrate(lambda t, y: y, 1.0, 1.0, y0), y0)


def test_rk_step_underflow():
    def rhs(t, y):
        # the field stops being finite past t = 0.5, so no step can cross it
        return y * (np.nan if t > 0.5 else 1.0)

    with pytest.raises(StepSizeUnderflow):
        integrate(rhs, 0.0, 2.0, np.ones((1, 1)))


# argument principle

def test_count_two_roots():
    zc = count_zeros(lambda k: k * k - 1, (-2, 2, -1, 1), refine=True)
    assert zc.count == 2 and zc.winding_residual < 1e-10
    np.testing.assert_allclose(sorted(z.real for z in zc.refined_zeros), [-1, 1], atol=1e-12)


def test_count_three_roots():
    zc = count_zeros(lambda k: (k - 1) * (k - 2 + 1j) * (k + 3j), (-4, 4, -4, 4), refine=True)
    assert zc.count == 3
    expected = sorted([1, 2 - 1j, -3j], key=lambda z: (z.real, z.imag))
    np.testing.assert_allclose(zc.refined_zeros, expected, atol=1e-10)


@pytest.mark.parametrize("rect", [(-1, 1, -1, 1), (-10, 3, -30, 30), (5, 6, 0, 0.1)])
def test_count_exp_has_no_zeros(rect):
    assert count_zeros(np.exp, rect).count == 0


def test_count_with_multiplicity():
    assert count_zeros(lambda k: (k - 0.1j) ** 3 * (k + 2), (-1, 1, -1, 1)).count == 3


def test_contour_zero_detected():
    with pytest.raises(ContourZeroError, match="perturb rectangle"):
        count_zeros(lambda k: k - 1, (1, 2, -1, 1))


def test_pole_gives_error():
    with pytest.raises(ContourConvergenceError):
        count_zeros(lambda k: 1 / (k - 0.3j), (-1, 1, -1, 1))


def test_bad_rectangle():
    with pytest.raises(ValueError):
        winding_number(np.exp, (1, 0, 0, 1))


def test_refinement_handles_clustered_zeros():
    roots = [0.5, 0.5 + 1e-3, 2 - 1j, -1.5 + 0.5j]
    f = lambda k: np.prod([k - r for r in roots], axis=0)
    zc = count_zeros(f, (-3, 3, -2, 2), refine=True)
    assert zc.count == 4 and len(zc.refined_zeros) == 4


# radial problem

def test_profile_equals_one_inside_match_radius():
    a = ramp_profile(2.0)
    r = np.linspace(0, 0.5, 50)
    np.testing.assert_array_equal(a(r), 1.0)
    assert a(1.0) == pytest.approx(2.0)
    assert np.all(np.diff(a(np.linspace(0.5, 1, 100))) >= 0)


def test_problem_rejects_bad_profile():
    with pytest.raises(ValueError):
        RadialProblem(a_profile=lambda r: 1 + r)
    with pytest.raises(ValueError):
        RadialProblem(radius=0.4)
    with pytest.raises(ValueError):
        RadialProblem(mode=-1)


@pytest.mark.parametrize("k", [1.0, 2.5 - 0.3j, 4j, 7.1])
def test_radial_v_pure_bessel(k):
    v, dv = radial_v(RadialProblem(), k)
    assert abs(v - bessel_j(0, k)) < 1e-9
    assert abs(dv - k * bessel_j_prime(0, k)) < 1e-9 * (1 + abs(k))


def test_radial_v_scaled_bessel():
    v, _ = radial_v(RadialProblem(c_scale=4.0, mode=1), 1.0)
    assert abs(v - bessel_j(1, 2.0)) < 1e-9


def test_radial_v_self_convergence():
    p = ramped(mode=1)
    v1, _ = radial_v(p, 2.0)
    v2, _ = radial_v(p, 2.0, tol=0.5e-11)
    assert np.isfinite(v1) and abs(v1 - v2) / abs(v2) < 1e-8


def test_radial_v_rejects_zero_k():
    with pytest.raises(ValueError):
        radial_v(RadialProblem(), 0.0)


def test_dispersion_identically_zero_c1_m0():
    for p in (RadialProblem(), ramped(2.0), ramped(3.5)):
        assert np.max(np.abs(dispersion(p, sample_ks(20, 5.0)))) < 1e-9
    assert abs(dispersion(RadialProblem(), 1.0)) < 1e-10


def test_dispersion_c4_closed_form():
    p = RadialProblem(c_scale=4.0)
    k = 1.0
    ref = (bessel_j(0, k) * 2 * k * bessel_j_prime(0, 2 * k)
           - k * bessel_j_prime(0, k) * bessel_j(0, 2 * k))
    assert abs(dispersion(p, k) - ref) < 1e-9
    assert abs(ref) > 0.1
    ks = np.array([0.7, 2.0 + 0.3j, 5.5])
    np.testing.assert_allclose(dispersion(p, ks), dispersion_closed_form(p, ks), atol=1e-9)


def test_closed_form_needs_constant_profile():
    with pytest.raises(ValueError):
        dispersion_closed_form(ramped(), 1.0)


def test_conjugate_symmetry():
    ks = np.array([1.3 + 0.4j, 3.0 - 0.2j, 6.1 + 0.45j])
    for p in (ramped(mode=1), ramped(c_scale=2.0), RadialProblem(alpha=2.0, mode=1)):
        np.testing.assert_allclose(dispersion(p, np.conj(ks)), np.conj(dispersion(p, ks)), atol=1e-9)


@pytest.mark.parametrize("mode", [0, 1, 2])
def test_branch_flip_scales_by_parity(mode):
    # J_m(-z) = (-1)^m J_m(z), so flipping sqrt(c) multiplies D_m by (-1)^m
    p = ramped(c_scale=1 + 1j, mode=mode)
    ks = np.array([1.0 + 0.2j, 4.0, 6.5 - 0.3j])
    a, b = dispersion(p, ks), dispersion(p, ks, flip_branch=True)
    np.testing.assert_allclose(b, (-1) ** mode * a, atol=1e-9)


def test_ode_tolerance_halving():
    ks = probe_grid(RECT, 4)
    for p in (ramped(mode=1), ramped(c_scale=2.0)):
        a = dispersion(p, ks)
        b = dispersion(p, ks, tol=0.5e-11)
        assert np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-3)) < 1e-7


def test_refined_zeros_are_zeros():
    f = DispersionFunction(ramped(c_scale=2.0))
    zc = count_zeros(f, RECT, refine=True)
    assert zc.count == len(zc.refined_zeros) >= 1
    for z in zc.refined_zeros:
        assert abs(f(np.array([z]))[0]) < 1e-8
        assert RECT[0] <= z.real <= RECT[1] and RECT[2] <= z.imag <= RECT[3]


def test_c_scan_phenomenon():
    res = c_scan(ramped(), [1.0, 2.0, 1 + 1j], RECT)
    assert res[0].identically_zero and res[0].count is None
    assert not res[1].identically_zero and res[1].count >= 1
    assert not res[2].identically_zero and res[2].count is not None


def test_c_scan_resolution_stable():
    a = c_scan(ramped(), [2.0], RECT, contour_resolution=256)[0].count
    b = c_scan(ramped(), [2.0], RECT, contour_resolution=512)[0].count
    assert a == b


def test_mode1_not_identically_zero():
    f = DispersionFunction(ramped(mode=1))
    assert np.max(np.abs(f(probe_grid(RECT)))) > 1e-3
    assert count_zeros(f, RECT).count >= 0


def test_isotropic_2I_spectrum_finite():
    for m in (0, 1):
        p = RadialProblem(alpha=2.0, mode=m)
        f = DispersionFunction(p)
        assert np.max(np.abs(f(probe_grid(RECT)))) > 1e-6
        ks = np.array([1.1, 3.3 + 0.2j])
        np.testing.assert_allclose(f(ks), dispersion_closed_form(p, ks), atol=1e-9)
        zc = count_zeros(f, RECT, refine=True)
        assert zc.count == len(zc.refined_zeros)


# the two counterexamples

def test_cube_unit_k():
    r = validate_cube(CubeCase(1.0, 1.0, 0.0))
    assert r.max_residual < 1e-15 and not r.trivial


def test_cube_complex_k():
    r = validate_cube(CubeCase(2 + 3j, 1.0, 1.0))
    assert r.passed


def test_cube_trivial_ansatz():
    r = validate_cube(CubeCase(0.0, 0.0, 1.0))
    assert r.trivial


def test_cube_random_ks():
    for k in sample_ks(20, 5.0, seed=3):
        assert validate_cube(CubeCase(complex(k), 0.7, -1.2 + 0.1j)).passed


def test_cube_detects_wrong_coefficients():
    from itpcheck.fields import CoefficientField, Cube
    bad = CoefficientField.constant(np.diag([2.0, 2.0, 3.0]), 1.0, Cube(1.0))
    assert not validate_cube(CubeCase(1.5, 1.0, 0.3), bad).passed


def test_sample_ks_in_disk():
    ks = sample_ks(50, 5.0)
    assert np.all(np.abs(ks) <= 5.0) and np.all(ks != 0)
    np.testing.assert_array_equal(ks, sample_ks(50, 5.0))


def test_disk_validation_a1_2():
    v = validate_disk(ramped(2.0), sample_ks(20, 5.0), resolution=8, boundary_resolution=60)
    assert v.identically_zero and v.sl_passed
    assert v.sl.min_margin == pytest.approx(1.0, abs=1e-6)


def test_disk_validation_a1_1():
    v = validate_disk(ramped(1.0), sample_ks(20, 5.0), resolution=8, boundary_resolution=60)
    assert v.identically_zero and not v.sl_passed


def test_disk_validation_needs_c1():
    with pytest.raises(ValueError):
        validate_disk(ramped(c_scale=2.0), [1.0])
