"""Independent reference computations used to check the fast paths.

None of these call into the code they check: the grid search never uses the
mirror construction, and the Rice quadrature uses scipy's Bessel function
rather than the package's own series.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from .geometry import BoundedPlane


def rice_mean_quadrature(nu: float, sigma: float) -> float:
    """Mean of Rice(nu, sigma) by adaptive quadrature of ``x * pdf(x)``."""
    s2 = sigma * sigma

    def integrand(x):
        # exp(-(x-nu)^2/2s2) * i0e(x nu / s2) == exp(-(x^2+nu^2)/2s2) * I0(x nu/s2)
        return x * (x / s2) * math.exp(-((x - nu) ** 2) / (2.0 * s2)) * special.i0e(x * nu / s2)

    hi = nu + 40.0 * sigma
    # split at the bulk of the mass so quad sees the peak
    pts = sorted({x for x in (nu - 10.0 * sigma, nu, nu + 10.0 * sigma) if 0.0 < x < hi})
    val, _ = integrate.quad(integrand, 0.0, hi, points=pts or None, limit=400, epsabs=0.0, epsrel=1e-12)
    return val


def _path_lengths(points, s, a):
    return np.linalg.norm(points - s, axis=-1) + np.linalg.norm(points - a, axis=-1)


def grid_reflection_point(s, a, plane: BoundedPlane, n: int = 200, refine: bool = True):
    """Brute-force minimizer of ``|x - s| + |a - x|`` over the plane's extent.

    Returns ``(point, resolution)`` where ``resolution`` is the final grid
    spacing (the larger of the two in-plane spacings).
    """
    s = np.asarray(s, dtype=float)
    a = np.asarray(a, dtype=float)
    p = np.asarray(plane.point_p, dtype=float)
    u = np.asarray(plane.axis_u, dtype=float)
    v = np.asarray(plane.axis_v, dtype=float)
    ulo, uhi, vlo, vhi = plane.u_min, plane.u_max, plane.v_min, plane.v_max
    rounds = 2 if refine else 1
    for _ in range(rounds):
        us = np.linspace(ulo, uhi, n)
        vs = np.linspace(vlo, vhi, n)
        uu, vv = np.meshgrid(us, vs, indexing="ij")
        pts = p + uu[..., None] * u + vv[..., None] * v
        f = _path_lengths(pts, s, a)
        i, j = np.unravel_index(np.argmin(f), f.shape)
        du = (uhi - ulo) / (n - 1)
        dv = (vhi - vlo) / (n - 1)
        best_u, best_v = us[i], vs[j]
        ulo, uhi = max(plane.u_min, best_u - 1.5 * du), min(plane.u_max, best_u + 1.5 * du)
        vlo, vhi = max(plane.v_min, best_v - 1.5 * dv), min(plane.v_max, best_v + 1.5 * dv)
    return p + best_u * u + best_v * v, max(du, dv)


def random_plane(rng: np.random.Generator, half_extent: float = 60.0) -> BoundedPlane:
    """Random plane through a point near the origin with a square extent."""
    from .geometry import SurfaceKind

    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    v /= np.linalg.norm(v)
    p = rng.uniform(-10.0, 10.0, size=3)
    return BoundedPlane(
        tuple(p), tuple(n), tuple(u), tuple(v),
        -half_extent, half_extent, -half_extent, half_extent,
        SurfaceKind.BUILDING_WALL,
    )


def random_reflection_case(rng: np.random.Generator):
    """A plane plus satellite and antenna points on its front side.

    In-plane offsets stay inside the extent, so a reflection point always
    exists (it is a convex combination of the two projections).
    """
    plane = random_plane(rng)
    p = np.asarray(plane.point_p)
    n = np.asarray(plane.normal_n)
    u = np.asarray(plane.axis_u)
    v = np.asarray(plane.axis_v)

    def point():
        return p + rng.uniform(-50, 50) * u + rng.uniform(-50, 50) * v + rng.uniform(1.0, 50.0) * n

    return plane, point(), point()


def angle_between(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return math.atan2(float(np.linalg.norm(np.cross(x, y))), float(x @ y))
