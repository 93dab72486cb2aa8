"""Discrete Morrey norms and the scale-invariant smallness quantity.

For D ⊂ ℝ^m, 1 <= p < ∞ and 0 < λ <= m,

    ‖f‖^p_{M^{p,λ}(D)} = sup_{B_r ⊂ D} r^{λ−m} ∫_{B_r} |f|^p.

At λ = m the weight is 1 and the norm reduces to the plain L^p norm over D.
The supremum is approximated from below over dyadic radii descending from
the inscribed ball of D and over a coarsened lattice of centers (every
second node per axis); both families are logged in the reports.

``smallness`` evaluates, on a four-dimensional patch,

    ‖∇φ‖⁴_{M^{4,4}(B₁)} + ‖∇²φ‖²_{M^{2,4}(B₁)}   and   ∫_{B₁}(|∇²φ|² + |∇φ|⁴),

which coincide because M^{p,m} = L^p; both forms are reported next to the
user-supplied threshold ε₀².
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BallOutOfPatch, EmptyBallFamily, WrongDimension
from .fields import ScalarField, SphereField
from .grid import EuclideanPatch
from .ops import _raw_partial, _raw_second


@dataclass(frozen=True)
class MorreyParams:
    p: float
    lam: float  # λ in (0, m]; validated against the domain at call time

    def __post_init__(self):
        if self.p < 1.0 or not np.isfinite(self.p):
            raise ValueError("p must satisfy 1 <= p < inf")
        if self.lam <= 0.0:
            raise ValueError("lambda must be positive")


@dataclass(frozen=True)
class BallRegion:
    """Ball D = B_radius(center) inside a patch interior."""

    center: tuple
    radius: float


@dataclass(frozen=True)
class MorreyResult:
    norm: float
    best_r: float
    best_center: tuple
    r_list: tuple
    params: MorreyParams

    def to_json_dict(self):
        return {
            "p": self.params.p,
            "lambda": self.params.lam,
            "norm": self.norm,
            "r_list": list(self.r_list),
            "best_center": list(self.best_center),
            "best_r": self.best_r,
        }


def _center_lattice(domain, region, r):
    """Coarsened node centers y (every 2nd node) with B_r(y) ⊂ D.

    The region center itself is always admitted so the family contains the
    inscribed ball of D (required for the λ = m reduction to L^p).
    """
    budget = region.radius - r
    if budget < -1e-12:
        return []
    center = np.asarray(region.center, dtype=float)
    out = [tuple(center)]
    axes = domain.axis_coordinates(0)[::2]
    grids = np.meshgrid(*([axes] * domain.m), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    dist = np.linalg.norm(pts - center, axis=-1)
    for p in pts[(dist <= budget + 1e-12) & (dist > 1e-12)]:
        out.append(tuple(p))
    return out


def morrey_norm_detailed(f: ScalarField, params: MorreyParams, region: BallRegion) -> MorreyResult:
    """Morrey norm of a scalar field over D with full search detail.

    Radii: region.radius · 2^{-k}, stopping once below two cell widths.
    The approximation is monotone from below (a larger family can only
    increase the supremum).
    """
    domain = f.domain
    if not isinstance(domain, EuclideanPatch):
        raise ValueError("Morrey norms are computed on Euclidean patches")
    if params.lam > domain.m:
        raise ValueError(f"lambda must satisfy 0 < lambda <= m = {domain.m}")
    reach = float(np.linalg.norm(region.center)) + region.radius
    if reach > domain.max_ball_radius + 1e-12:
        raise BallOutOfPatch(
            f"region radius {region.radius} at {region.center} exceeds "
            f"max_ball_radius {domain.max_ball_radius}"
        )

    h = domain.spacing
    radii = []
    r = region.radius
    while r >= 2.0 * h:
        radii.append(r)
        r *= 0.5
    if not radii:
        raise EmptyBallFamily(f"region radius {region.radius} holds no ball of radius >= 2h = {2*h}")

    power = np.abs(f.values) ** params.p
    vol = domain.node_volume
    best = -np.inf
    best_r, best_center = radii[0], tuple(region.center)
    for r in radii:
        for center in _center_lattice(domain, region, r):
            mask = domain.ball_mask(r, center, check=False)
            val = r ** (params.lam - domain.m) * float(np.sum(power[mask])) * vol
            if val > best:
                best, best_r, best_center = val, r, center
    return MorreyResult(
        norm=best ** (1.0 / params.p),
        best_r=best_r,
        best_center=best_center,
        r_list=tuple(radii),
        params=params,
    )


def morrey_norm(f: ScalarField, params: MorreyParams, region: BallRegion) -> float:
    return morrey_norm_detailed(f, params, region).norm


def gradient_norm_field(phi) -> ScalarField:
    """|∇φ|(x) = (Σ_i |∂_iφ|²)^{1/2}; accepts ambient or scalar fields."""
    values, domain = phi.values, phi.domain
    acc = np.zeros(domain.shape)
    for axis in range(domain.m):
        d = _raw_partial(values, domain, axis)
        acc += d * d if values.ndim == domain.m else np.sum(d * d, axis=-1)
    return ScalarField(domain, np.sqrt(acc))


def hessian_norm_field(phi) -> ScalarField:
    """|∇²φ|(x) = (Σ_{ij} |∂_i∂_jφ|²)^{1/2}, compact second differences on
    the diagonal and nested central differences off it."""
    values, domain = phi.values, phi.domain
    acc = np.zeros(domain.shape)
    firsts = [_raw_partial(values, domain, i) for i in range(domain.m)]
    for i in range(domain.m):
        for j in range(i, domain.m):
            comp = _raw_second(values, domain, i) if i == j else _raw_partial(firsts[j], domain, i)
            weight = 1.0 if i == j else 2.0
            acc += weight * (comp * comp if values.ndim == domain.m else np.sum(comp * comp, axis=-1))
    return ScalarField(domain, np.sqrt(acc))


@dataclass(frozen=True)
class SmallnessReport:
    quantity: float  # ‖∇φ‖⁴_{M^{4,4}(B₁)} + ‖∇²φ‖²_{M^{2,4}(B₁)}
    epsilon0_sq: float
    satisfied: bool
    m4_form: float  # ∫_{B₁}(|∇²φ|² + |∇φ|⁴)

    def to_json_dict(self):
        return {
            "quantity": self.quantity,
            "epsilon0_sq": self.epsilon0_sq,
            "satisfied": self.satisfied,
            "m4_form": self.m4_form,
        }


def smallness(phi: SphereField, eps0: float) -> SmallnessReport:
    """Evaluate the regularity smallness quantity on the unit ball of a 4-D
    patch and compare against ε₀² (ε₀ is user input; no canonical value)."""
    domain = phi.domain
    if not isinstance(domain, EuclideanPatch) or domain.m != 4:
        raise WrongDimension("smallness requires a 4-dimensional Euclidean patch")
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    region = BallRegion(center=(0.0,) * 4, radius=1.0)

    grad = gradient_norm_field(phi)
    hess = hessian_norm_field(phi)
    q_grad = morrey_norm(grad, MorreyParams(p=4.0, lam=4.0), region) ** 4
    q_hess = morrey_norm(hess, MorreyParams(p=2.0, lam=4.0), region) ** 2
    quantity = q_grad + q_hess

    mask = domain.ball_mask(1.0)
    m4 = float(np.sum(hess.values[mask] ** 2 + grad.values[mask] ** 4)) * domain.node_volume
    return SmallnessReport(
        quantity=quantity,
        epsilon0_sq=eps0 * eps0,
        satisfied=bool(quantity <= eps0 * eps0),
        m4_form=m4,
    )
