"""Analytic field families used as oracles and initial data.

The circle families live on S² and depend on the first coordinate only:

    φ_α(x) = (sin α · cos x₁, sin α · sin x₁, cos α)

On a 1-D torus of length 2π this is the closed latitude circle at polar angle
α; α = π/2 gives the unit-speed great circle (a closed geodesic). On a
higher-dimensional grid or a Euclidean patch the same formula extends the
curve constantly across the remaining axes.
"""

from __future__ import annotations

import numpy as np

from .fields import SphereField, normalize_rows
from .grid import TorusGrid


def _first_coordinate(domain):
    mesh = domain.coordinate_mesh()
    return mesh[0]


def _require_circle_domain(domain, period):
    """Torus axes hosting a closed curve must match its period."""
    if isinstance(domain, TorusGrid):
        if abs(domain.lengths[0] - period) > 1e-9:
            raise ValueError(
                f"first axis period {domain.lengths[0]} does not close the curve "
                f"(need {period})"
            )


def constant_map(domain, p) -> SphereField:
    """Constant map to a fixed unit vector p."""
    p = np.asarray(p, dtype=float)
    if abs(np.linalg.norm(p) - 1.0) > 1e-9:
        raise ValueError("constant map target must be a unit vector")
    values = np.broadcast_to(p, domain.shape + (p.size,)).copy()
    return SphereField(domain, values)


def latitude_circle(domain, alpha) -> SphereField:
    """Latitude circle φ_α traversed with speed sin α (period 2π).

    On a torus the first axis length must be 2π. α = 0 degenerates to the
    constant north pole, α = π/2 to the great circle.
    """
    _require_circle_domain(domain, 2.0 * np.pi)
    x = _first_coordinate(domain)
    s, c = np.sin(alpha), np.cos(alpha)
    values = np.stack([s * np.cos(x), s * np.sin(x), np.full_like(x, c)], axis=-1)
    return SphereField(domain, normalize_rows(values))


def great_circle(domain) -> SphereField:
    """Unit-speed closed geodesic (cos x₁, sin x₁, 0); latitude_circle(π/2)."""
    return latitude_circle(domain, np.pi / 2.0)


def latitude_circle_arclength(domain, alpha) -> SphereField:
    """Latitude circle at polar angle α traversed at unit speed.

    The curve (s cos(x/s), s sin(x/s), c) with s = sin α is an isometric
    immersion of the circle of circumference 2πs, so the torus first-axis
    length must be 2π sin α.
    """
    s, c = np.sin(alpha), np.cos(alpha)
    if s <= 0:
        raise ValueError("arclength parameterization needs sin(alpha) > 0")
    _require_circle_domain(domain, 2.0 * np.pi * s)
    x = _first_coordinate(domain)
    values = np.stack([s * np.cos(x / s), s * np.sin(x / s), np.full_like(x, c)], axis=-1)
    return SphereField(domain, normalize_rows(values))


def product_extension(base: SphereField, domain) -> SphereField:
    """Lift a 1-D torus field to an m-dimensional torus, constant in x₂..x_m.

    The target torus must keep the base axis as its first axis (same node
    count and period).
    """
    if base.domain.m != 1:
        raise ValueError("base field must live on a 1-D domain")
    if not isinstance(domain, TorusGrid) or not isinstance(base.domain, TorusGrid):
        raise ValueError("product_extension lifts torus fields onto torus grids")
    if domain.sizes[0] != base.domain.sizes[0] or abs(domain.lengths[0] - base.domain.lengths[0]) > 1e-12:
        raise ValueError("target first axis must match the base grid")
    reshape = (base.domain.sizes[0],) + (1,) * (domain.m - 1) + (base.values.shape[-1],)
    values = np.broadcast_to(base.values.reshape(reshape), domain.shape + (base.values.shape[-1],))
    return SphereField(domain, values.copy())


def random_sphere_field(domain, n, rng) -> SphereField:
    """iid standard-normal vectors per node, renormalized."""
    values = rng.normal(size=domain.shape + (n + 1,))
    return SphereField(domain, normalize_rows(values))


def perturb_tangent(phi: SphereField, amplitude, rng) -> SphereField:
    """Add seeded tangential noise of the given sup-amplitude and renormalize."""
    if amplitude == 0.0:
        return phi
    noise = rng.normal(size=phi.values.shape)
    noise -= np.sum(noise * phi.values, axis=-1, keepdims=True) * phi.values
    sup = np.max(np.abs(noise))
    if sup > 0:
        noise *= amplitude / sup
    return SphereField(phi.domain, normalize_rows(phi.values + noise))
