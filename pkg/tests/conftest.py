import numpy as np
import pytest

from sesquilab import SphereField, TorusGrid
from sesquilab.fields import normalize_rows


def torus1d(n, length=2.0 * np.pi):
    return TorusGrid(sizes=(n,), lengths=(length,))


def fit_slope(ns, sups):
    """Least-squares slope of log2(sup) against log2(N)."""
    return float(np.polyfit(np.log2(ns), np.log2(sups), 1)[0])


def smooth_random_sphere_field(domain, rng, modes=3, n=2):
    """Band-limited random field: a few Fourier modes per axis, renormalized."""
    values = np.broadcast_to(rng.normal(size=n + 1), domain.shape + (n + 1,)).copy()
    mesh = domain.coordinate_mesh()
    for axis in range(domain.m):
        w = 2.0 * np.pi / domain.lengths[axis]
        for k in range(1, modes + 1):
            amp = rng.normal(size=(n + 1, 2))
            values += amp[:, 0] * np.cos(k * w * mesh[axis])[..., None]
            values += amp[:, 1] * np.sin(k * w * mesh[axis])[..., None]
    return SphereField(domain, normalize_rows(values))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
