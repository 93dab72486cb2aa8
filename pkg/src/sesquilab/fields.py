"""Field containers: scalar, ambient ℝ^{n+1}-valued, and unit-sphere-valued.

Fields are immutable value objects (the arrays are treated as read-only by
convention); every operation returns a fresh field. Node axes come first,
the ambient component axis last.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearZeroVector

UNIT_NORM_TOL = 1e-12
PROJECT_MIN_NORM = 1e-8


@dataclass(frozen=True)
class ScalarField:
    domain: object
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != self.domain.shape:
            raise ValueError(f"scalar values shape {v.shape} != domain {self.domain.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("scalar field contains non-finite values")


@dataclass(frozen=True)
class AmbientField:
    """One vector in ℝ^{n+1} per node."""

    domain: object
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape[:-1] != self.domain.shape or v.ndim != len(self.domain.shape) + 1:
            raise ValueError(f"ambient values shape {v.shape} != domain {self.domain.shape} + (k,)")
        if not np.all(np.isfinite(v)):
            raise ValueError("ambient field contains non-finite values")

    @property
    def n(self):
        return self.values.shape[-1] - 1


@dataclass(frozen=True)
class SphereField(AmbientField):
    """Map into the unit sphere Sⁿ ⊂ ℝ^{n+1}: |values(x)| = 1 at every node."""

    def __post_init__(self):
        super().__post_init__()
        norms = np.linalg.norm(self.values, axis=-1)
        worst = float(np.max(np.abs(norms - 1.0)))
        if worst > UNIT_NORM_TOL:
            raise ValueError(f"sphere field off the unit sphere by {worst:.3e} (tol {UNIT_NORM_TOL})")


def tangent_project(phi: SphereField, V) -> AmbientField:
    """Pointwise tangential projection V - <V, φ>φ; exactly orthogonal to φ."""
    v = V.values if isinstance(V, AmbientField) else np.asarray(V, dtype=float)
    radial = np.sum(v * phi.values, axis=-1, keepdims=True)
    return AmbientField(phi.domain, v - radial * phi.values)


def normalize_rows(values: np.ndarray) -> np.ndarray:
    """Raw renormalization used by project_sphere and the solver loop."""
    norms = np.linalg.norm(values, axis=-1, keepdims=True)
    smallest = float(np.min(norms))
    if smallest < PROJECT_MIN_NORM:
        raise NearZeroVector(f"node norm {smallest:.3e} below {PROJECT_MIN_NORM}")
    return values / norms


def project_sphere(F: AmbientField) -> SphereField:
    """Renormalization retraction F/|F|.

    Raises NearZeroVector when any node norm drops below 1e-8 (the flow
    stepped across the origin; callers should shrink the step).
    """
    return SphereField(F.domain, normalize_rows(F.values))
