"""Analytic constructors."""

import numpy as np
import pytest

from sesquilab import (
    TorusGrid,
    constant_map,
    energy_density,
    great_circle,
    latitude_circle,
    latitude_circle_arclength,
    perturb_tangent,
    product_extension,
    random_sphere_field,
)

from conftest import torus1d


def test_latitude_at_pi_half_is_great_circle():
    domain = torus1d(64)
    np.testing.assert_allclose(
        latitude_circle(domain, np.pi / 2).values, great_circle(domain).values, atol=1e-15
    )


def test_latitude_at_zero_is_north_pole():
    domain = torus1d(64)
    np.testing.assert_array_equal(
        latitude_circle(domain, 0.0).values, constant_map(domain, [0, 0, 1]).values
    )


def test_constant_map_requires_unit_vector():
    domain = torus1d(16)
    with pytest.raises(ValueError, match="unit"):
        constant_map(domain, [1.0, 1.0, 0.0])


def test_circle_needs_matching_period():
    with pytest.raises(ValueError, match="period"):
        great_circle(torus1d(64, length=1.0))
    with pytest.raises(ValueError, match="period"):
        latitude_circle_arclength(torus1d(64, length=2 * np.pi), 0.6)


def test_arclength_circle_has_unit_speed():
    alpha = 0.6
    domain = torus1d(128, length=2 * np.pi * np.sin(alpha))
    phi = latitude_circle_arclength(domain, alpha)
    e = energy_density(phi).values
    np.testing.assert_allclose(e, 1.0, atol=1e-3)


def test_product_extension_energy_density():
    base_domain = torus1d(32)
    base = latitude_circle(base_domain, 0.7)
    target = TorusGrid(sizes=(32, 8, 8), lengths=(2 * np.pi, 1.0, 1.0))
    lifted = product_extension(base, target)
    e = energy_density(lifted).values
    np.testing.assert_allclose(e, np.sin(0.7) ** 2, atol=1e-2)


def test_product_extension_shape_mismatch():
    base = latitude_circle(torus1d(32), 0.7)
    with pytest.raises(ValueError, match="first axis"):
        product_extension(base, TorusGrid(sizes=(64, 8), lengths=(2 * np.pi, 1.0)))


def test_random_and_perturb_stay_on_sphere(rng):
    domain = torus1d(32)
    phi = random_sphere_field(domain, 2, rng)
    np.testing.assert_allclose(np.linalg.norm(phi.values, axis=-1), 1.0, atol=1e-12)
    bumped = perturb_tangent(great_circle(domain), 1e-3, rng)
    np.testing.assert_allclose(np.linalg.norm(bumped.values, axis=-1), 1.0, atol=1e-12)
    assert np.max(np.abs(bumped.values - great_circle(domain).values)) < 3e-3
    assert perturb_tangent(phi, 0.0, rng) is phi
