"""Closed-form Matern kernels and the smoothness bookkeeping around them.

Only the half-integer orders nu = 3/2 and nu = 5/2 are implemented; both
have elementary closed forms and unit diagonal, so the native-space sup
bound is exactly 1. ``RateParameters`` tracks how the kernel order
translates into Sobolev exponents on a k-dimensional submanifold and the
resulting convergence-order bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)

#: Integer slope bounds reported for the two implemented orders on a
#: 1-dimensional manifold in the plane.
SLOPE_BOUNDS = {1.5: 1.0, 2.5: 2.0}

#: Margin keeping the ambient Sobolev exponent strictly below its
#: supremum 2*nu - d/2 (the embedding is strict).
TAU_MARGIN = 1e-6


@dataclass(frozen=True)
class KernelSpec:
    """Normalized Matern kernel of order ``nu`` on R^``ambient_dim``.

    ``length_scale`` is in the same units as the state coordinates.
    K(x, x) = 1 for every x, so kernel values lie in (0, 1].
    """

    nu: float
    length_scale: float
    ambient_dim: int = 2
    family: str = "matern"

    def __post_init__(self):
        if self.family != "matern":
            raise ValueError(f"unsupported kernel family: {self.family!r}")
        if self.nu not in SLOPE_BOUNDS:
            raise ValueError(f"nu must be one of {sorted(SLOPE_BOUNDS)}, got {self.nu}")
        if not self.length_scale > 0:
            raise ValueError("length_scale must be positive")
        if self.ambient_dim < 1:
            raise ValueError("ambient_dim must be >= 1")

    def profile(self, r):
        """Radial profile K(r) for nonnegative distances ``r`` (array ok)."""
        u = np.asarray(r, dtype=float) / self.length_scale
        if self.nu == 1.5:
            t = _SQRT3 * u
            return (1.0 + t) * np.exp(-t)
        t = _SQRT5 * u
        return (1.0 + t + (5.0 / 3.0) * u * u) * np.exp(-t)


@dataclass(frozen=True)
class RateParameters:
    """Sobolev-exponent arithmetic for a kernel order on a submanifold.

    ``tau`` is the ambient Sobolev exponent of the RKHS embedding, ``k``
    the manifold dimension, ``mu`` the order of the measurement norm.
    The restricted exponent and the convergence-order bound follow as
    ``s = tau - (d - k)/2`` and ``bound_exponent = s - mu``.
    """

    nu: float
    tau: float
    d: int
    k: int
    mu: float

    def __post_init__(self):
        if self.d < 1 or self.k < 1 or self.k > self.d:
            raise ValueError("need 1 <= k <= d")
        if self.bound_exponent < 0:
            raise ValueError("mu too large: bound exponent s - mu is negative")

    @property
    def s(self) -> float:
        return self.tau - (self.d - self.k) / 2.0

    @property
    def bound_exponent(self) -> float:
        return self.s - self.mu

    @classmethod
    def for_matern(cls, nu: float, d: int = 2, k: int = 1) -> "RateParameters":
        """Default bookkeeping for the implemented orders.

        ``tau`` sits a margin below its supremum 2*nu - d/2, and ``mu``
        is chosen so the reported bound exponent equals the integer
        slope bound (1 for nu=3/2, 2 for nu=5/2).
        """
        if nu not in SLOPE_BOUNDS:
            raise ValueError(f"nu must be one of {sorted(SLOPE_BOUNDS)}, got {nu}")
        tau = 2.0 * nu - d / 2.0 - TAU_MARGIN
        s = tau - (d - k) / 2.0
        mu = s - SLOPE_BOUNDS[nu]
        return cls(nu=nu, tau=tau, d=d, k=k, mu=mu)


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Kernel value K(x, y) for two points of dimension ``spec.ambient_dim``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (spec.ambient_dim,) or y.shape != (spec.ambient_dim,):
        raise ValueError(
            f"points must have dimension {spec.ambient_dim}, "
            f"got shapes {x.shape} and {y.shape}"
        )
    return float(spec.profile(np.linalg.norm(x - y)))


def kernel_vector(spec: KernelSpec, centers, x) -> np.ndarray:
    """Vector of kernel values [K(xi_i, x)] over a nonempty center array."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[0] == 0:
        raise ValueError("center list is empty")
    if centers.shape[1] != spec.ambient_dim:
        raise ValueError(f"centers must have dimension {spec.ambient_dim}")
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.ambient_dim,):
        raise ValueError(f"x must have dimension {spec.ambient_dim}")
    diff = centers - x
    return spec.profile(np.sqrt(np.einsum("ij,ij->i", diff, diff)))


def kernel_cross(spec: KernelSpec, centers, points) -> np.ndarray:
    """Kernel matrix K(xi_i, p_j) between a center array and a point array."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return spec.profile(cdist(centers, points))


def gram_matrix(spec: KernelSpec, centers) -> np.ndarray:
    """Symmetric positive-definite Gram matrix over pairwise-distinct centers."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    r = cdist(centers, centers)
    n = centers.shape[0]
    if n > 1:
        off = r[~np.eye(n, dtype=bool)]
        if off.min() <= 0.0:
            raise ValueError("duplicate centers: Gram matrix would be singular")
    g = spec.profile(r)
    return (g + g.T) / 2.0


def sup_kernel_bound(spec: KernelSpec) -> float:
    """sup_x sqrt(K(x, x)); equals 1 for the normalized Matern family."""
    return 1.0
