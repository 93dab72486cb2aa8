"""Energy functionals and Euler-Lagrange residuals for sphere-valued maps.

The interpolating energy of φ: M → Sⁿ with weights (δ₁, δ₂) is

    E(φ) = δ₁ ∫ |dφ|² dV + δ₂ ∫ |τ(φ)|² dV,   τ(φ) = Δφ + |dφ|² φ.

Critical points satisfy, in ambient coordinates,

    δ₂(Δ²φ + (|Δφ|² + Δ|dφ|² + 2<dφ, ∇Δφ> + 2|dφ|⁴)φ + 2∇(|dφ|² dφ))
        = δ₁(Δφ + |dφ|² φ),

where <dφ, ∇Δφ> = Σ_i <∂_iφ, ∂_iΔφ> and ∇(|dφ|² dφ) = Σ_i ∂_i(|dφ|² ∂_iφ).
``el_residual`` discretizes the left-minus-right side of this equation with
the central stencils of :mod:`sesquilab.ops`, while
``discrete_energy_gradient`` is the exact gradient of the *discretized*
energy; the two agree tangentially to O(h²) (gradient = 2 × residual).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import Delta2Zero, NonpositiveDelta2
from .fields import AmbientField, ScalarField, SphereField, tangent_project
from .grid import Coupling
from .ops import (
    _raw_energy_density,
    _raw_laplacian,
    _raw_partial,
    _raw_tension,
    integrate,
)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Quadrature values of the energy integrals of one field.

    ``interpolating = delta1 * dirichlet + delta2 * bienergy`` holds exactly
    by construction; on the unit sphere ``extrinsic`` (∫|Δφ|²) equals
    ``bienergy + ∫|dφ|⁴`` up to the scheme's consistency error.
    """

    dirichlet: float
    bienergy: float
    interpolating: float
    extrinsic: float
    volume: float

    def to_json_dict(self, domain=None):
        out = {
            "dirichlet": self.dirichlet,
            "bienergy": self.bienergy,
            "interpolating": self.interpolating,
            "extrinsic": self.extrinsic,
            "volume": self.volume,
        }
        if domain is not None:
            out["grid"] = domain_metadata(domain)
        return out


def domain_metadata(domain):
    from .grid import EuclideanPatch, TorusGrid

    if isinstance(domain, TorusGrid):
        return {"kind": "torus", "m": domain.m, "sizes": list(domain.sizes), "lengths": list(domain.lengths)}
    if isinstance(domain, EuclideanPatch):
        return {
            "kind": "patch",
            "m": domain.m,
            "nodes": domain.nodes_per_axis,
            "half_width": domain.half_width,
            "margin": domain.margin,
        }
    raise TypeError(f"unknown domain type {type(domain)!r}")


def _volume(domain, mask=None):
    if mask is None:
        return domain.num_nodes * domain.node_volume
    return float(np.sum(mask)) * domain.node_volume


def energies(phi: SphereField, c: Coupling, mask=None) -> EnergyBreakdown:
    """All five energy integrals of φ (optionally over a node mask)."""
    domain = phi.domain
    e = _raw_energy_density(phi.values, domain)
    tau = _raw_tension(phi.values, domain)
    lap = _raw_laplacian(phi.values, domain)
    dirichlet = integrate(ScalarField(domain, e), mask)
    bienergy = integrate(ScalarField(domain, np.sum(tau * tau, axis=-1)), mask)
    extrinsic = integrate(ScalarField(domain, np.sum(lap * lap, axis=-1)), mask)
    return EnergyBreakdown(
        dirichlet=dirichlet,
        bienergy=bienergy,
        interpolating=c.delta1 * dirichlet + c.delta2 * bienergy,
        extrinsic=extrinsic,
        volume=_volume(domain, mask),
    )


def interpolating_energy(phi: SphereField, c: Coupling) -> float:
    """δ₁∫|dφ|² + δ₂∫|τ|² without the extrinsic extras (solver hot path)."""
    return _raw_interpolating_energy(phi.values, phi.domain, c)


def _raw_interpolating_energy(values, domain, c):
    e = _raw_energy_density(values, domain)
    tau = _raw_tension(values, domain)
    dens = c.delta1 * e + c.delta2 * np.sum(tau * tau, axis=-1)
    return float(np.sum(dens)) * domain.node_volume


def extrinsic_bound_gap(phi: SphereField, c: Coupling) -> float:
    """Slack in  E_{δ₁,δ₂}(φ) <= δ₂ ∫|Δφ|² + δ₁²/(4δ₂) vol(M)  for δ₂ > 0.

    Returns the right side minus the left; nonnegative up to quadrature
    error (the bound is pointwise: δ₁t <= δ₂t² + δ₁²/(4δ₂) at t = |dφ|²).
    """
    if c.delta2 <= 0:
        raise NonpositiveDelta2(f"delta2 must be positive, got {c.delta2}")
    b = energies(phi, c)
    return c.delta2 * b.extrinsic + c.delta1**2 / (4.0 * c.delta2) * b.volume - b.interpolating


def _raw_el_residual(values, domain, c):
    e = _raw_energy_density(values, domain)
    lap = _raw_laplacian(values, domain)
    bilap = _raw_laplacian(lap, domain)
    scalar = np.sum(lap * lap, axis=-1) + _raw_laplacian(e, domain) + 2.0 * e * e
    div_term = np.zeros_like(values)
    for axis in range(domain.m):
        dphi = _raw_partial(values, domain, axis)
        scalar += 2.0 * np.sum(dphi * _raw_partial(lap, domain, axis), axis=-1)
        div_term += _raw_partial(e[..., None] * dphi, domain, axis)
    out = c.delta2 * (bilap + scalar[..., None] * values + 2.0 * div_term)
    out -= c.delta1 * (lap + e[..., None] * values)
    return out


def el_residual(phi: SphereField, c: Coupling) -> AmbientField:
    """Pointwise defect of the ambient critical-point equation.

    Vanishes to O(h²) on exact solutions; e.g. the latitude circle φ_α is
    annihilated when δ₁/δ₂ = 2 sin²α − 1.
    """
    return AmbientField(phi.domain, _raw_el_residual(phi.values, phi.domain, c))


def el_residual_tangential(phi: SphereField, c: Coupling) -> AmbientField:
    """Tangential part of the residual; the quantity the flow drives to zero."""
    return tangent_project(phi, el_residual(phi, c))


def _raw_energy_gradient(values, domain, c):
    """L²-gradient of the discretized energy: d/dt E_h(φ+tW)|₀ = vol·Σ_x <G, W>.

    Derived by transposing the stencils (central differences are
    skew-adjoint, the Laplacian self-adjoint on the periodic lattice):

        G = -2δ₁ Σ_i ∂_i∂_i φ
            + 2δ₂ (Δτ + |dφ|² τ - 2 Σ_i ∂_i(<τ, φ> ∂_i φ)).

    Note the Dirichlet block uses the iterated central difference (radius 2),
    not the compact Laplacian: that is the exact transpose of the discrete
    energy actually summed.
    """
    e = _raw_energy_density(values, domain)
    tau = _raw_tension(values, domain)
    tau_phi = np.sum(tau * values, axis=-1)
    g = 2.0 * c.delta2 * (_raw_laplacian(tau, domain) + e[..., None] * tau)
    for axis in range(domain.m):
        dphi = _raw_partial(values, domain, axis)
        g -= 2.0 * c.delta1 * _raw_partial(dphi, domain, axis)
        g -= 4.0 * c.delta2 * _raw_partial(tau_phi[..., None] * dphi, domain, axis)
    return g


def discrete_energy_gradient(phi: SphereField, c: Coupling) -> AmbientField:
    """Exact gradient of the discretized energy with respect to node values.

    For every ambient perturbation W (no sphere constraint),

        d/dt E_h(φ + tW)|_{t=0} = node_volume · Σ_x <G(x), W(x)>

    holds to roundoff. Its tangential part equals 2 × the tangential
    residual of ``el_residual`` up to O(h²).
    """
    return AmbientField(phi.domain, _raw_energy_gradient(phi.values, phi.domain, c))


def directional_derivative(phi: SphereField, c: Coupling, W: AmbientField) -> float:
    """Pairing node_volume · Σ <gradient, W>; matches central differences of E_h."""
    g = _raw_energy_gradient(phi.values, phi.domain, c)
    return float(np.sum(g * W.values)) * phi.domain.node_volume


def immersion_residual(phi: SphereField, c: Coupling, K: float, m: int) -> AmbientField:
    """Defect of the constant-curvature immersion equation
    Δ̄τ = (-mK + δ₁/δ₂) τ, with Δ̄ the iterated pullback connection
    ∇̄_i W = ∂_i W + <W, ∂_i φ> φ.

    O(h²) on isometric-immersion solutions, e.g. the unit-speed latitude
    circle (period 2π sin α) with δ₁/δ₂ = 2 − 1/sin²α, m = 1, K = 1.
    """
    if c.delta2 == 0:
        raise Delta2Zero("immersion equation needs delta2 != 0")
    domain = phi.domain
    values = phi.values
    tau = _raw_tension(values, domain)
    eigen = -m * K + c.delta1 / c.delta2
    firsts = [_raw_partial(values, domain, i) for i in range(domain.m)]
    bar_lap = np.zeros_like(values)
    for i in range(domain.m):
        w = _raw_partial(tau, domain, i) + np.sum(tau * firsts[i], axis=-1)[..., None] * values
        bar_lap += _raw_partial(w, domain, i) + np.sum(w * firsts[i], axis=-1)[..., None] * values
    return AmbientField(domain, bar_lap - eigen * tau)


def critical_latitude_angle(domain, c: Coupling, alpha0, halfwidth=0.1):
    """Polar angle at which the discrete energy is critical along the
    latitude-circle family, found by a bracketed root solve of dE_h/dα.

    The lattice family φ_α is shift-symmetric, so the full discrete gradient
    vanishes at the returned angle (up to roundoff); it sits O(h²) from the
    continuum angle. Raises ValueError when the bracket holds no sign change.
    """
    from .families import latitude_circle

    def dE_dalpha(alpha):
        phi = latitude_circle(domain, alpha)
        g = _raw_energy_gradient(phi.values, domain, c)
        x = domain.coordinate_mesh()[0]
        ca, sa = np.cos(alpha), np.sin(alpha)
        dalpha = np.stack([ca * np.cos(x), ca * np.sin(x), np.full_like(x, -sa)], axis=-1)
        return float(np.sum(g * dalpha)) * domain.node_volume

    lo, hi = alpha0 - halfwidth, alpha0 + halfwidth
    flo, fhi = dE_dalpha(lo), dE_dalpha(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError(f"no critical angle bracketed in [{lo}, {hi}]")
    return float(brentq(dE_dalpha, lo, hi, xtol=4e-16, rtol=8.9e-16))
