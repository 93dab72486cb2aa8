"""Finite-difference operators and quadrature on the node lattice.

Everything is a second-order central scheme:

* ``partial_derivative``     (F(x+h e_i) - F(x-h e_i)) / 2h
* ``laplacian``              Σ_i (F(x+h e_i) - 2F(x) + F(x-h e_i)) / h_i²
* ``bilaplacian``            the Laplacian stencil applied twice
* ``integrate``              Σ_x f(x) ∏ h_i, optionally over a node mask

Stencils wrap periodically on every domain; see :mod:`sesquilab.grid` for the
patch interior contract. The raw ``_raw_*`` helpers operate on bare arrays and
are shared with the energy/solver modules to keep hot loops cheap.
"""

from __future__ import annotations

import numpy as np

from .fields import AmbientField, ScalarField, SphereField


def _check_axis(domain, axis):
    if not 0 <= axis < domain.m:
        raise ValueError(f"axis {axis} out of range for dimension {domain.m}")


def _raw_partial(values, domain, axis):
    h = domain.spacings[axis]
    return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h)


def _raw_second(values, domain, axis):
    h = domain.spacings[axis]
    return (np.roll(values, -1, axis=axis) - 2.0 * values + np.roll(values, 1, axis=axis)) / (h * h)


def _raw_laplacian(values, domain):
    out = _raw_second(values, domain, 0)
    for axis in range(1, domain.m):
        out += _raw_second(values, domain, axis)
    return out


def _raw_energy_density(values, domain):
    out = np.zeros(domain.shape)
    for axis in range(domain.m):
        d = _raw_partial(values, domain, axis)
        out += np.sum(d * d, axis=-1)
    return out


def _raw_tension(values, domain):
    return _raw_laplacian(values, domain) + _raw_energy_density(values, domain)[..., None] * values


def _same_kind(field, values):
    cls = ScalarField if isinstance(field, ScalarField) else AmbientField
    return cls(field.domain, values)


def partial_derivative(field, axis):
    """Central first difference along one axis; exact on linear fields."""
    _check_axis(field.domain, axis)
    return _same_kind(field, _raw_partial(field.values, field.domain, axis))


def laplacian(field):
    """(2m+1)-point Laplacian, convention Δf = div grad f."""
    return _same_kind(field, _raw_laplacian(field.values, field.domain))


def bilaplacian(field):
    """Δ² as the composition of the discrete Laplacian with itself (radius 2)."""
    domain = field.domain
    return _same_kind(field, _raw_laplacian(_raw_laplacian(field.values, domain), domain))


def energy_density(phi: SphereField) -> ScalarField:
    """|dφ|²(x) = Σ_i |∂_i φ(x)|²."""
    return ScalarField(phi.domain, _raw_energy_density(phi.values, phi.domain))


def tension(phi: SphereField) -> AmbientField:
    """Tension field of a sphere-valued map in ambient coordinates:
    τ(φ) = Δφ + |dφ|² φ.  Discretely tangent: <τ, φ> = O(h²).
    """
    return AmbientField(phi.domain, _raw_tension(phi.values, phi.domain))


def bar_nabla_tension(phi: SphereField, axis) -> AmbientField:
    """Pullback-connection derivative of the tension field along one axis:

        ∇̄_i τ = ∂_i(Δφ) + ∂_i(|dφ|² φ) + <Δφ, ∂_i φ> φ.

    The last term is the sphere connection correction; the result is
    discretely tangent along φ to O(h²).
    """
    _check_axis(phi.domain, axis)
    v, domain = phi.values, phi.domain
    lap = _raw_laplacian(v, domain)
    e = _raw_energy_density(v, domain)
    dphi = _raw_partial(v, domain, axis)
    out = _raw_partial(lap, domain, axis)
    out += _raw_partial(e[..., None] * v, domain, axis)
    out += np.sum(lap * dphi, axis=-1)[..., None] * v
    return AmbientField(domain, out)


def _raw_bar_nabla_dphi_components(values, domain):
    """Yield ((i, j), ∇̄_i ∂_j φ) for i <= j.

    ∇̄_i ∂_j φ = ∂_i ∂_j φ + <∂_i φ, ∂_j φ> φ, with the compact second
    difference on the diagonal and nested central differences off it.
    """
    firsts = [_raw_partial(values, domain, i) for i in range(domain.m)]
    for i in range(domain.m):
        for j in range(i, domain.m):
            if i == j:
                hess = _raw_second(values, domain, i)
            else:
                hess = _raw_partial(firsts[j], domain, i)
            corr = np.sum(firsts[i] * firsts[j], axis=-1)[..., None] * values
            yield (i, j), hess + corr


def bar_nabla_dphi(phi: SphereField):
    """Connection-covariant Hessian ∇̄_i ∂_j φ, as a dict keyed by (i, j), i <= j.

    Symmetric in (i, j) up to O(h²); each component tangent up to O(h²). In
    one dimension ∇̄∂φ coincides with the tension field exactly.
    """
    return {
        key: AmbientField(phi.domain, vals)
        for key, vals in _raw_bar_nabla_dphi_components(phi.values, phi.domain)
    }


def _raw_bar_nabla_dphi_sq(values, domain):
    """|∇̄dφ|²(x) = Σ_{ij} |∇̄_i ∂_j φ|², accumulated without storing components."""
    out = np.zeros(domain.shape)
    for (i, j), comp in _raw_bar_nabla_dphi_components(values, domain):
        weight = 1.0 if i == j else 2.0
        out += weight * np.sum(comp * comp, axis=-1)
    return out


def bar_nabla_dphi_squared(phi: SphereField) -> ScalarField:
    """Squared Frobenius norm of the covariant Hessian, Σ_{ij}|∇̄_i∂_jφ|²."""
    return ScalarField(phi.domain, _raw_bar_nabla_dphi_sq(phi.values, phi.domain))


def integrate(f: ScalarField, mask=None) -> float:
    """Node-volume-weighted sum Σ f(x) ∏h_i.

    Exact for periodic trigonometric polynomials below the Nyquist mode on a
    torus. ``mask`` restricts the sum (e.g. a patch ball mask); reductions run
    sequentially for bit-reproducibility.
    """
    if mask is None:
        total = float(np.sum(f.values))
    else:
        total = float(np.sum(f.values[mask]))
    return total * f.domain.node_volume
