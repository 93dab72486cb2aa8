"""Discrete domains: flat periodic tori and Euclidean patches.

Both domains carry a uniform rectilinear node lattice. All differential
operators in :mod:`sesquilab.ops` act with periodic wrap (``np.roll``); on a
:class:`EuclideanPatch` the wrapped values are meaningless near the boundary,
so patch quantities are only read on the interior, and ball-restricted
integrals must keep ``margin`` layers of slack (see ``max_ball_radius``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BallOutOfPatch


@dataclass(frozen=True)
class TorusGrid:
    """Flat torus ∏ [0, L_i) sampled on an N_1 × ... × N_m node lattice.

    Node i along axis k sits at i * L_k / N_k; the spacing h_k = L_k / N_k.
    Every axis needs at least 8 nodes so that the widest stencil used here
    (the composed bi-Laplacian, radius 2 per application) cannot wrap onto
    itself.
    """

    sizes: tuple
    lengths: tuple

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        lengths = tuple(float(L) for L in self.lengths)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "lengths", lengths)
        if len(sizes) != len(lengths):
            raise ValueError("sizes and lengths must have equal length")
        if len(sizes) == 0:
            raise ValueError("domain dimension must be >= 1")
        if any(n < 8 for n in sizes):
            raise ValueError(f"every axis needs >= 8 nodes, got {sizes}")
        if any(L <= 0 for L in lengths):
            raise ValueError(f"periods must be positive, got {lengths}")

    @property
    def m(self):
        return len(self.sizes)

    @property
    def shape(self):
        return self.sizes

    @property
    def spacings(self):
        return tuple(L / n for L, n in zip(self.lengths, self.sizes))

    @property
    def node_volume(self):
        return float(np.prod(self.spacings))

    @property
    def num_nodes(self):
        return int(np.prod(self.sizes))

    @property
    def volume(self):
        return float(np.prod(self.lengths))

    def axis_coordinates(self, axis):
        h = self.spacings[axis]
        return np.arange(self.sizes[axis]) * h

    def coordinate_mesh(self):
        """List of m arrays of shape ``self.shape`` with node coordinates."""
        axes = [self.axis_coordinates(i) for i in range(self.m)]
        return list(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True)
class EuclideanPatch:
    """Cube [-R, R]^m sampled on N nodes per axis, N odd so 0 is a node.

    ``margin`` counts boundary layers that interior operators never trust:
    stencils wrap periodically, so results are garbage within ``depth``
    layers of the boundary after a composed stencil of radius ``depth``.
    The deepest composition shipped here has radius 3 (stress divergence),
    hence margin >= 2 is the hard floor and 4 the comfortable default.

    Ball-restricted integrals require r <= max_ball_radius = R - margin*h.
    """

    m: int
    half_width: float
    nodes_per_axis: int
    margin: int = 4

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("dimension must be >= 1")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.nodes_per_axis % 2 == 0:
            raise ValueError("nodes_per_axis must be odd so the origin is a node")
        if self.margin < 2:
            raise ValueError("margin must be >= 2 (bi-Laplacian stencil radius)")
        if self.nodes_per_axis - 2 * self.margin < 1:
            raise ValueError("interior region is empty; enlarge nodes_per_axis")

    @property
    def shape(self):
        return (self.nodes_per_axis,) * self.m

    @property
    def sizes(self):
        return self.shape

    @property
    def spacing(self):
        return 2.0 * self.half_width / (self.nodes_per_axis - 1)

    @property
    def spacings(self):
        return (self.spacing,) * self.m

    @property
    def node_volume(self):
        return float(self.spacing**self.m)

    @property
    def num_nodes(self):
        return int(self.nodes_per_axis**self.m)

    @property
    def max_ball_radius(self):
        return self.half_width - self.margin * self.spacing

    def axis_coordinates(self, axis):
        if not 0 <= axis < self.m:
            raise ValueError(f"axis {axis} out of range for dimension {self.m}")
        return np.linspace(-self.half_width, self.half_width, self.nodes_per_axis)

    def coordinate_mesh(self):
        axes = [self.axis_coordinates(i) for i in range(self.m)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def radius_squared(self, center=None):
        """|x - center|^2 at every node (center defaults to the origin)."""
        mesh = self.coordinate_mesh()
        if center is None:
            center = (0.0,) * self.m
        out = np.zeros(self.shape)
        for g, c in zip(mesh, center):
            out += (g - c) ** 2
        return out

    def ball_mask(self, radius, center=None, check=True):
        """Boolean mask of nodes with |x - center| <= radius (node centers).

        With check=True the ball must respect the margin contract, i.e.
        |center| + radius <= max_ball_radius.
        """
        if center is None:
            center = (0.0,) * self.m
        if check:
            reach = float(np.linalg.norm(center)) + radius
            if reach > self.max_ball_radius + 1e-12:
                raise BallOutOfPatch(
                    f"ball radius {radius} at {center} exceeds "
                    f"max_ball_radius {self.max_ball_radius}"
                )
        return self.radius_squared(center) <= radius * radius

    def interior_slices(self, depth=None):
        """Index tuple selecting nodes at least ``depth`` layers from the boundary."""
        if depth is None:
            depth = self.margin
        return tuple(slice(depth, self.nodes_per_axis - depth) for _ in range(self.m))


@dataclass(frozen=True)
class Coupling:
    """Weights (delta1, delta2) of the interpolating energy
    delta1 * ∫|dφ|² + delta2 * ∫|τ(φ)|².
    """

    delta1: float
    delta2: float

    def __post_init__(self):
        if self.delta1 == 0.0 and self.delta2 == 0.0:
            raise ValueError("(delta1, delta2) must not both vanish")

    @property
    def noncoercive(self):
        """True when the discrete energy is unbounded below (descent may diverge)."""
        return self.delta1 < 0.0 or self.delta2 < 0.0
