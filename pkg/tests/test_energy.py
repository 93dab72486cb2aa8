"""Energies, residual operators, the exact gradient, and their oracles.

The latitude circle φ_α(x) = (sin α cos x, sin α sin x, cos α) annihilates
the critical-point operator exactly when δ₁/δ₂ = 2 sin²α − 1; its unit-speed
reparameterization (period 2π sin α) does so when δ₁/δ₂ = 2 − 1/sin²α. Both
facts, and every closed-form constant asserted below, are re-derived
symbolically in test_symbolic_oracle so the grid code is checked against an
independent computer-algebra evaluation rather than hand arithmetic.
"""

import numpy as np
import pytest

from sesquilab import (
    Coupling,
    critical_latitude_angle,
    directional_derivative,
    discrete_energy_gradient,
    el_residual,
    el_residual_tangential,
    energies,
    extrinsic_bound_gap,
    great_circle,
    immersion_residual,
    interpolating_energy,
    latitude_circle,
    latitude_circle_arclength,
    constant_map,
    perturb_tangent,
    random_sphere_field,
    tangent_project,
    tension,
)
from sesquilab.errors import Delta2Zero, NonpositiveDelta2
from sesquilab.fields import AmbientField, SphereField, normalize_rows

from conftest import fit_slope, smooth_random_sphere_field, torus1d


def matched_alpha(q):
    return float(np.arcsin(np.sqrt((1.0 + q) / 2.0)))


# ------------------------------------------------------------------ energies


def test_energies_constant_map():
    domain = torus1d(32)
    b = energies(constant_map(domain, [0, 0, 1]), Coupling(1.0, 1.0))
    assert b.dirichlet == b.bienergy == b.interpolating == b.extrinsic == 0.0
    assert b.volume == pytest.approx(2 * np.pi, rel=1e-14)


def test_energies_great_circle():
    domain = torus1d(256)
    b = energies(great_circle(domain), Coupling(1.0, 1.0))
    assert b.dirichlet == pytest.approx(2 * np.pi, rel=1e-3)
    assert b.bienergy == pytest.approx(0.0, abs=1e-4)
    assert b.interpolating == pytest.approx(2 * np.pi, rel=1e-3)


def test_energies_biharmonic_latitude():
    domain = torus1d(256)
    b = energies(latitude_circle(domain, matched_alpha(0.0)), Coupling(0.0, 1.0))
    assert b.bienergy == pytest.approx(np.pi / 2, rel=1e-3)
    assert b.interpolating == pytest.approx(np.pi / 2, rel=1e-3)


def test_interpolating_is_exact_combination(rng):
    domain = torus1d(64)
    phi = smooth_random_sphere_field(domain, rng)
    c = Coupling(-0.3, 1.7)
    b = energies(phi, c)
    assert b.interpolating == c.delta1 * b.dirichlet + c.delta2 * b.bienergy
    assert interpolating_energy(phi, c) == pytest.approx(b.interpolating, rel=1e-12)


def test_extrinsic_identity_on_families():
    # ∫|Δφ|² = ∫|τ|² + ∫|dφ|⁴ on the unit sphere
    domain = torus1d(256)
    h2 = domain.spacings[0] ** 2
    for alpha in (0.5, 0.9, np.pi / 2):
        phi = latitude_circle(domain, alpha)
        b = energies(phi, Coupling(1.0, 1.0))
        fourth = np.sin(alpha) ** 4 * 2 * np.pi
        assert abs(b.extrinsic - (b.bienergy + fourth)) < 30 * h2


def test_extrinsic_bound_gap_values():
    domain = torus1d(256)
    gap_const = extrinsic_bound_gap(constant_map(domain, [1, 0, 0]), Coupling(1.0, 1.0))
    assert gap_const == pytest.approx(2 * np.pi / 4, rel=1e-12)
    gap_gc = extrinsic_bound_gap(great_circle(domain), Coupling(0.0, 1.0))
    assert gap_gc == pytest.approx(2 * np.pi, rel=1e-3)


def test_extrinsic_bound_gap_nonnegative(rng):
    domain = torus1d(64)
    fields = [great_circle(domain), latitude_circle(domain, 0.7)]
    fields += [random_sphere_field(domain, 2, rng) for _ in range(5)]
    for phi in fields:
        for d2 in (0.5, 1.0, 2.0):
            for d1 in (-1.0, 0.0, 1.0):
                assert extrinsic_bound_gap(phi, Coupling(d1, d2)) >= -1e-8


def test_extrinsic_bound_gap_requires_positive_delta2():
    domain = torus1d(32)
    with pytest.raises(NonpositiveDelta2):
        extrinsic_bound_gap(great_circle(domain), Coupling(1.0, -1.0))


# ------------------------------------------------------------------ residual


def test_el_residual_constant_map_zero():
    domain = torus1d(32)
    r = el_residual(constant_map(domain, [0, 1, 0]), Coupling(1.0, 1.0))
    np.testing.assert_array_equal(r.values, 0.0)


@pytest.mark.parametrize("q", [-0.5, 0.0, 0.5])
def test_latitude_family_annihilates_residual(q):
    sups = []
    grids = (64, 128, 256)
    for n in grids:
        domain = torus1d(n)
        phi = latitude_circle(domain, matched_alpha(q))
        sups.append(np.max(np.abs(el_residual(phi, Coupling(q, 1.0)).values)))
    slope = fit_slope(grids, sups)
    assert -2.2 < slope < -1.8
    assert sups[-1] < 5e-4


def test_residual_gradient_coherence():
    # tangential gradient = 2 x tangential residual, to O(h²); probe with a
    # fixed smooth non-critical field sampled on successive grids
    diffs = []
    for n in (64, 128):
        domain = torus1d(n)
        x = domain.coordinate_mesh()[0]
        bump = 0.05 * np.stack([np.sin(2 * x), np.cos(3 * x), np.sin(x)], -1)
        phi = SphereField(domain, normalize_rows(latitude_circle(domain, 0.9).values + bump))
        c = Coupling(0.7, 1.3)
        g_tan = tangent_project(phi, discrete_energy_gradient(phi, c))
        r_tan = el_residual_tangential(phi, c)
        diffs.append(np.max(np.abs(g_tan.values / 2.0 - r_tan.values)))
    assert diffs[1] < diffs[0] / 3
    assert diffs[0] < 0.05 * np.max(np.abs(r_tan.values))  # small next to the residual itself


def test_harmonic_implies_small_residual():
    # tau == 0 annihilates the full operator; check along the geodesic family
    for n in (128, 256):
        domain = torus1d(n)
        phi = great_circle(domain)
        tau_sup = np.max(np.abs(tension(phi).values))
        res = np.max(np.abs(el_residual_tangential(phi, Coupling(1.0, 1.0)).values))
        assert res < 5 * tau_sup + 10 * domain.spacings[0] ** 2


# ------------------------------------------------------------------ gradient


def _energy_of_values(values, domain, c):
    # the discrete energy is defined for any ambient field; φ ± εW leaves
    # the sphere, which is exactly what the unconstrained gradient probes
    from sesquilab.energy import _raw_interpolating_energy

    return _raw_interpolating_energy(values, domain, c)


def test_gradient_matches_finite_differences(rng):
    domain = torus1d(16)
    eps = 1e-5
    worst = 0.0
    for _ in range(20):
        phi = random_sphere_field(domain, 2, rng)
        w = AmbientField(domain, rng.normal(size=phi.values.shape))
        c = Coupling(float(rng.normal()), float(rng.normal()) + 2.0)
        exact = directional_derivative(phi, c, w)
        e_plus = _energy_of_values(phi.values + eps * w.values, domain, c)
        e_minus = _energy_of_values(phi.values - eps * w.values, domain, c)
        fd = (e_plus - e_minus) / (2 * eps)
        worst = max(worst, abs(exact - fd) / max(1.0, abs(fd)))
    assert worst < 1e-6


def test_gradient_tangentially_zero_on_constant():
    domain = torus1d(32)
    phi = constant_map(domain, [0, 0, 1])
    g = tangent_project(phi, discrete_energy_gradient(phi, Coupling(1.0, 1.0)))
    np.testing.assert_allclose(g.values, 0.0, atol=1e-14)


def test_great_circle_critical_for_dirichlet():
    domain = torus1d(256)
    phi = great_circle(domain)
    g = tangent_project(phi, discrete_energy_gradient(phi, Coupling(1.0, 0.0)))
    assert np.max(np.abs(g.values)) < 2 * domain.spacings[0] ** 2


# ----------------------------------------------------------------- immersion


def test_immersion_residual_arclength_family():
    # unit-speed circles are isometric immersions: the eigenvalue equation
    # holds with -mK + δ₁/δ₂ and the residual shrinks at second order
    for s2 in (0.5, 0.7):
        alpha = float(np.arcsin(np.sqrt(s2)))
        q = 2.0 - 1.0 / s2
        sups = []
        for n in (128, 256):
            domain = torus1d(n, length=2 * np.pi * np.sin(alpha))
            phi = latitude_circle_arclength(domain, alpha)
            r = immersion_residual(phi, Coupling(q, 1.0), K=1.0, m=1)
            sups.append(np.max(np.abs(r.values)))
        assert sups[0] < 1e-3
        assert sups[1] < sups[0] / 3


def test_immersion_residual_trivial_cases():
    domain = torus1d(128)
    gc = great_circle(domain)
    r = immersion_residual(gc, Coupling(1.0, 1.0), K=1.0, m=1)
    assert np.max(np.abs(r.values)) < 5e-3  # tau = O(h²) makes both sides tiny
    const = constant_map(domain, [0, 0, 1])
    r0 = immersion_residual(const, Coupling(1.0, 1.0), K=1.0, m=1)
    np.testing.assert_array_equal(r0.values, 0.0)
    with pytest.raises(Delta2Zero):
        immersion_residual(gc, Coupling(1.0, 0.0), K=1.0, m=1)


# ------------------------------------------------------------ critical angle


def test_critical_latitude_angle_kills_gradient():
    domain = torus1d(256)
    c = Coupling(0.0, 1.0)
    alpha_h = critical_latitude_angle(domain, c, matched_alpha(0.0))
    phi = latitude_circle(domain, alpha_h)
    g = tangent_project(phi, discrete_energy_gradient(phi, c))
    assert np.max(np.abs(g.values)) / 2.0 < 1e-8
    assert abs(alpha_h - np.pi / 4) < 1e-4


# ------------------------------------------------------------ symbolic oracle


def test_symbolic_oracle():
    """Re-derive the latitude-family facts with sympy and compare the grid
    operators against the symbolic values on a coarse mesh."""
    sympy = pytest.importorskip("sympy")
    sp = sympy
    x, a = sp.symbols("x alpha", real=True)
    s, c = sp.sin(a), sp.cos(a)
    phi = sp.Matrix([s * sp.cos(x), s * sp.sin(x), c])

    d = lambda F: F.diff(x)
    dphi, ddphi = d(phi), d(d(phi))
    e = sp.simplify(dphi.dot(dphi))
    tau = ddphi + e * phi

    # residual of the critical-point operator at the matched ratio vanishes
    q = 2 * s**2 - 1
    lap = ddphi
    residual = (
        d(d(lap))
        + (lap.dot(lap) + sp.diff(e, x, 2) + 2 * dphi.dot(d(lap)) + 2 * e**2) * phi
        + 2 * d(e * dphi)
        - q * (lap + e * phi)
    )
    assert sp.simplify(residual) == sp.zeros(3, 1)

    # grid tension matches the symbolic tension at a specific alpha
    alpha0 = 0.8
    domain = torus1d(128)
    xs = domain.coordinate_mesh()[0]
    tau_fn = sp.lambdify((x, a), tau, "numpy")
    expected = np.array([tau_fn(xi, alpha0) for xi in xs]).reshape(-1, 3)
    got = tension(latitude_circle(domain, alpha0)).values
    np.testing.assert_allclose(got, expected, atol=domain.spacings[0] ** 2)

    # bienergy density |tau|² = sin²α cos²α
    assert sp.simplify(tau.dot(tau) - s**2 * c**2) == 0
