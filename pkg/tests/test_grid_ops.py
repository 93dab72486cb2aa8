"""Stencil exactness, second-order convergence, quadrature, and tangency."""

import numpy as np
import pytest

from sesquilab import (
    AmbientField,
    EuclideanPatch,
    ScalarField,
    SphereField,
    TorusGrid,
    bar_nabla_dphi,
    bar_nabla_tension,
    bilaplacian,
    energy_density,
    great_circle,
    integrate,
    laplacian,
    latitude_circle,
    partial_derivative,
    project_sphere,
    tangent_project,
    tension,
)
from sesquilab.errors import NearZeroVector

from conftest import fit_slope, torus1d


def scalar_sin(domain, k=1):
    x = domain.coordinate_mesh()[0]
    w = 2.0 * np.pi * k / domain.lengths[0]
    return ScalarField(domain, np.sin(w * x)), w


# ---------------------------------------------------------------- stencils


def test_partial_constant_is_zero():
    domain = torus1d(32)
    f = ScalarField(domain, np.full(domain.shape, 3.7))
    np.testing.assert_array_equal(partial_derivative(f, 0).values, 0.0)


def test_partial_axis_out_of_range():
    domain = torus1d(32)
    f = ScalarField(domain, np.zeros(domain.shape))
    with pytest.raises(ValueError, match="axis"):
        partial_derivative(f, 1)


def test_partial_linear_exact_on_patch_interior():
    patch = EuclideanPatch(m=2, half_width=1.0, nodes_per_axis=17, margin=2)
    x = patch.coordinate_mesh()[0]
    f = ScalarField(patch, x)
    d = partial_derivative(f, 0).values[patch.interior_slices(1)]
    np.testing.assert_allclose(d, 1.0, rtol=0, atol=1e-13)


@pytest.mark.parametrize("k", [1, 2])
def test_partial_converges_second_order(k):
    errs = []
    for n in (64, 128):
        domain = torus1d(n)
        f, w = scalar_sin(domain, k)
        exact = w * np.cos(w * domain.coordinate_mesh()[0])
        errs.append(np.max(np.abs(partial_derivative(f, 0).values - exact)))
    ratio = errs[0] / errs[1]
    assert 4 * 0.85 < ratio < 4 * 1.15


def test_laplacian_eigenfunction():
    for n in (64, 128):
        domain = torus1d(n)
        f, w = scalar_sin(domain)
        err = np.max(np.abs(laplacian(f).values + w * w * f.values))
        assert err < 10.0 / n**2


def test_laplacian_of_great_circle_is_minus_phi():
    domain = torus1d(128)
    phi = great_circle(domain)
    err = np.max(np.abs(laplacian(phi).values + phi.values))
    assert err < 1e-3


def test_bilaplacian_eigenfunction_and_circle():
    # leading truncation error of the composed stencil is w⁶h²/6 on sin(wx)
    errs = []
    for n in (128, 256):
        domain = torus1d(n)
        f, w = scalar_sin(domain, k=2)
        h = domain.spacings[0]
        err = np.max(np.abs(bilaplacian(f).values - w**4 * f.values))
        assert err < 0.5 * w**6 * h**2
        errs.append(err)
    assert errs[1] < errs[0] / 3
    domain = torus1d(128)
    phi = great_circle(domain)
    err2 = np.max(np.abs(bilaplacian(phi).values - phi.values))
    assert err2 < domain.spacings[0] ** 2


def test_operators_are_linear(rng):
    domain = torus1d(32)
    a = AmbientField(domain, rng.normal(size=domain.shape + (3,)))
    b = AmbientField(domain, rng.normal(size=domain.shape + (3,)))
    lam, mu = 0.7, -1.9
    combo = AmbientField(domain, lam * a.values + mu * b.values)
    for op in (lambda f: partial_derivative(f, 0), laplacian, bilaplacian):
        np.testing.assert_allclose(
            op(combo).values,
            lam * op(a).values + mu * op(b).values,
            rtol=1e-12,
            atol=1e-12,
        )


def test_operator_error_shrinks_4x_on_refinement():
    sups = []
    for n in (64, 128, 256):
        domain = torus1d(n)
        x = domain.coordinate_mesh()[0]
        f = ScalarField(domain, np.sin(x) + 0.3 * np.cos(3 * x))
        exact = -np.sin(x) - 2.7 * np.cos(3 * x)
        sups.append(np.max(np.abs(laplacian(f).values - exact)))
    slope = fit_slope((64, 128, 256), sups)
    assert -2.3 < slope < -1.7


# ------------------------------------------------------------ sphere fields


def test_energy_density_families():
    domain = torus1d(128)
    assert np.max(energy_density(great_circle(domain)).values) == pytest.approx(1.0, abs=1e-3)
    alpha = 0.6
    e = energy_density(latitude_circle(domain, alpha)).values
    np.testing.assert_allclose(e, np.sin(alpha) ** 2, atol=1e-3)


def test_tension_great_circle_vanishes():
    # discrete defect is (|dφ|²_h - k_h²)φ ≈ -(h²/4)φ
    domain = torus1d(256)
    tau = tension(great_circle(domain)).values
    assert np.max(np.abs(tau)) < 0.3 * domain.spacings[0] ** 2


def test_tension_latitude_matches_symbolic():
    # tau = (-s c^2 cos x, -s c^2 sin x, s^2 c), derived by substituting the
    # circle into Δφ + |dφ|²φ
    domain = torus1d(256)
    alpha = 0.8
    s, c = np.sin(alpha), np.cos(alpha)
    x = domain.coordinate_mesh()[0]
    expected = np.stack([-s * c * c * np.cos(x), -s * c * c * np.sin(x), np.full_like(x, s * s * c)], -1)
    tau = tension(latitude_circle(domain, alpha)).values
    np.testing.assert_allclose(tau, expected, atol=domain.spacings[0] ** 2)


def test_tension_tangency_order():
    defects = []
    for n in (64, 128):
        domain = torus1d(n)
        phi = latitude_circle(domain, 0.8)
        tau = tension(phi).values
        defects.append(np.max(np.abs(np.sum(tau * phi.values, axis=-1))))
    assert defects[0] < 0.5 * (2 * np.pi / 64) ** 2
    assert defects[1] < defects[0] / 3


def test_bar_nabla_tension_great_circle_and_tangency():
    domain = torus1d(128)
    phi = latitude_circle(domain, 0.7)
    nt = bar_nabla_tension(phi, 0)
    tangency = np.max(np.abs(np.sum(nt.values * phi.values, axis=-1)))
    assert tangency < 1e-3
    gc = great_circle(domain)
    assert np.max(np.abs(bar_nabla_tension(gc, 0).values)) < 1e-3


def test_bar_nabla_dphi_curve_identity():
    # in one dimension the covariant Hessian equals the tension field exactly
    domain = torus1d(128)
    phi = latitude_circle(domain, 0.9)
    comp = bar_nabla_dphi(phi)[(0, 0)].values
    np.testing.assert_array_equal(comp, tension(phi).values)


def test_bar_nabla_dphi_symmetry_and_tangency(rng):
    domain = TorusGrid(sizes=(24, 24), lengths=(2 * np.pi, 2 * np.pi))
    from conftest import smooth_random_sphere_field

    phi = smooth_random_sphere_field(domain, rng)
    comps = bar_nabla_dphi(phi)
    h2 = max(domain.spacings) ** 2
    for (i, j), field in comps.items():
        tang = np.max(np.abs(np.sum(field.values * phi.values, axis=-1)))
        scale = 1.0 + np.max(np.abs(field.values))
        assert tang < 20 * h2 * scale


# ------------------------------------------------------------- projections


def test_tangent_project_exact(rng):
    domain = torus1d(32)
    phi = great_circle(domain)
    v = AmbientField(domain, rng.normal(size=domain.shape + (3,)))
    w = tangent_project(phi, v)
    np.testing.assert_allclose(np.sum(w.values * phi.values, -1), 0.0, atol=1e-15)
    # projecting phi itself gives zero; a tangent field is unchanged
    np.testing.assert_allclose(tangent_project(phi, phi).values, 0.0, atol=1e-15)
    np.testing.assert_allclose(tangent_project(phi, w).values, w.values, atol=1e-15)


def test_project_sphere_scaling_and_error():
    domain = torus1d(32)
    phi = great_circle(domain)
    doubled = AmbientField(domain, 2.0 * phi.values)
    np.testing.assert_allclose(project_sphere(doubled).values, phi.values, atol=1e-15)
    ones = AmbientField(domain, np.stack([np.ones(32), np.ones(32), np.zeros(32)], -1))
    proj = project_sphere(ones).values
    np.testing.assert_allclose(proj[:, 0], 1 / np.sqrt(2))
    tiny = AmbientField(domain, 1e-9 * phi.values)
    with pytest.raises(NearZeroVector):
        project_sphere(tiny)


# -------------------------------------------------------------- quadrature


def test_integrate_constant_exact():
    domain = TorusGrid(sizes=(16, 24), lengths=(2.0, 3.0))
    f = ScalarField(domain, np.ones(domain.shape))
    assert integrate(f) == pytest.approx(6.0, rel=1e-14)


def test_integrate_sin_squared():
    domain = torus1d(64)
    x = domain.coordinate_mesh()[0]
    f = ScalarField(domain, np.sin(x) ** 2)
    assert integrate(f) == pytest.approx(np.pi, rel=1e-12)


def test_integrate_trig_polynomial_exact():
    # below-Nyquist trigonometric polynomials integrate exactly
    domain = torus1d(32)
    x = domain.coordinate_mesh()[0]
    f = ScalarField(domain, 2.0 + np.cos(3 * x) - 0.5 * np.sin(11 * x))
    assert integrate(f) == pytest.approx(2.0 * 2.0 * np.pi, rel=1e-12)


def test_integrate_disk_mask():
    patch = EuclideanPatch(m=2, half_width=1.5, nodes_per_axis=101, margin=2)
    f = ScalarField(patch, np.ones(patch.shape))
    area = integrate(f, mask=patch.ball_mask(1.0))
    assert abs(area - np.pi) < 4 * patch.spacing  # staircase boundary, O(h)


# ----------------------------------------------------------------- domains


def test_torus_invariants():
    with pytest.raises(ValueError):
        TorusGrid(sizes=(4,), lengths=(1.0,))
    with pytest.raises(ValueError):
        TorusGrid(sizes=(16,), lengths=(-1.0,))
    domain = TorusGrid(sizes=(16, 8), lengths=(1.0, 2.0))
    assert domain.num_nodes == 128
    np.testing.assert_allclose(domain.spacings, (1 / 16, 0.25))


def test_patch_invariants():
    with pytest.raises(ValueError, match="odd"):
        EuclideanPatch(m=1, half_width=1.0, nodes_per_axis=16, margin=2)
    with pytest.raises(ValueError, match="margin"):
        EuclideanPatch(m=1, half_width=1.0, nodes_per_axis=17, margin=1)
    patch = EuclideanPatch(m=2, half_width=1.0, nodes_per_axis=17, margin=2)
    assert patch.max_ball_radius == pytest.approx(1.0 - 2 * patch.spacing)
    from sesquilab.errors import BallOutOfPatch

    with pytest.raises(BallOutOfPatch):
        patch.ball_mask(patch.max_ball_radius + 0.1)


def test_sphere_field_validation():
    domain = torus1d(16)
    bad = np.ones(domain.shape + (3,))
    with pytest.raises(ValueError, match="unit sphere"):
        SphereField(domain, bad)
