"""Finite-dimensional kernel subspaces: interpolation, evaluation, norms.

For a finite set of distinct centers the orthogonal projection onto the
span of their kernel sections coincides with interpolation at the
centers, so everything here reduces to solves against the (jittered)
Gram matrix. The factorization is computed once and shared; all objects
are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.linalg.lapack import dpocon

from .exceptions import ConditioningError
from .kernels import KernelSpec, gram_matrix, kernel_cross, kernel_vector

#: Largest diagonal regularization the factorization may apply.
JITTER_MAX = 1e-8

#: Interpolation residual tolerance, relative to max |values|.
TOL_INTERP = 1e-6

#: Coefficient tolerance for projection idempotence.
TOL_PROJECT = 1e-10


@dataclass(frozen=True)
class CenterSet:
    """Ordered array of distinct points, optionally tagged with arc lengths.

    ``separation`` (minimum pairwise distance) is computed once at
    construction; zero separation is rejected. Coefficient vectors are
    index-aligned with ``points``.
    """

    points: np.ndarray
    arclengths: Optional[np.ndarray] = None
    separation: float = None  # type: ignore[assignment]  # filled in __post_init__

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        if self.arclengths is not None:
            s = np.asarray(self.arclengths, dtype=float)
            if s.shape != (pts.shape[0],):
                raise ValueError("arclengths must align with points")
            object.__setattr__(self, "arclengths", s)
        n = pts.shape[0]
        if n == 0:
            raise ValueError("center set is empty")
        if n == 1:
            sep = np.inf
        else:
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            sep = float(dist[~np.eye(n, dtype=bool)].min())
            if sep <= 0.0:
                raise ValueError("centers are not pairwise distinct")
        object.__setattr__(self, "separation", sep)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class RkhsFunction:
    """Kernel expansion sum_i a_i K(xi_i, .) with index-aligned coefficients."""

    spec: KernelSpec
    centers: CenterSet
    coefficients: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.coefficients, dtype=float)
        if a.shape != (len(self.centers),):
            raise ValueError("coefficient vector must align with centers")
        object.__setattr__(self, "coefficients", a)

    def __call__(self, x):
        """Evaluate at a single point (d,) or a batch (m, d)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(self.coefficients @ kernel_vector(self.spec, self.centers.points, x))
        return self.coefficients @ kernel_cross(self.spec, self.centers.points, x)


@dataclass(frozen=True)
class GramFactorization:
    """Cholesky factor of G + jitter*I for a fixed center set."""

    spec: KernelSpec
    centers: CenterSet
    gram: np.ndarray
    cho: tuple
    jitter: float

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve(self.cho, rhs)


def factorize(spec: KernelSpec, centers: CenterSet, jitter_max: float = JITTER_MAX) -> GramFactorization:
    """Factor the Gram matrix, escalating jitter 0, 1e-12*n, x10, ... up to ``jitter_max``.

    A nonzero jitter is accepted only while the bias it injects into
    interpolation stays below TOL_INTERP (checked through the LAPACK
    reciprocal condition estimate), so near-duplicate centers exhaust the
    schedule and raise ConditioningError instead of being silently
    regularized into a useless solve.
    """
    g = gram_matrix(spec, centers.points)
    n = len(centers)
    schedule = [0.0]
    j = 1e-12 * n
    while j < jitter_max:
        schedule.append(j)
        j *= 10.0
    schedule.append(jitter_max)
    for jitter in schedule:
        regularized = g + jitter * np.eye(n)
        try:
            cho = cho_factor(regularized, lower=True)
        except LinAlgError:
            continue
        anorm = np.linalg.norm(regularized, 1)
        rcond, info = dpocon(cho[0], anorm, uplo=b"L")
        if info != 0 or rcond <= np.finfo(float).eps:
            continue
        # jitter * ||(G + jitter I)^-1|| bounds the relative residual bias
        if jitter > 0.0 and jitter > TOL_INTERP * rcond * anorm:
            continue
        return GramFactorization(spec=spec, centers=centers, gram=g, cho=cho, jitter=jitter)
    raise ConditioningError(
        f"Gram factorization failed at jitter_max={jitter_max:g} "
        f"(n={n}, min separation={centers.separation:.3e})"
    )


def interpolate(fact: GramFactorization, values) -> RkhsFunction:
    """Interpolant through (xi_i, values_i): solves (G + jitter*I) a = values.

    The result reproduces the data at the centers to TOL_INTERP relative
    to max |values|; a larger jitter-induced residual raises
    ConditioningError.
    """
    values = np.asarray(values, dtype=float)
    n = len(fact.centers)
    if values.shape != (n,):
        raise ValueError(f"expected {n} values, got shape {values.shape}")
    a = fact.solve(values)
    scale = np.abs(values).max()
    if scale > 0.0:
        residual = np.abs(fact.gram @ a - values).max()
        if residual > TOL_INTERP * scale:
            raise ConditioningError(
                f"interpolation residual {residual:.3e} exceeds "
                f"{TOL_INTERP:g} * max|values| (jitter={fact.jitter:g})"
            )
    return RkhsFunction(spec=fact.spec, centers=fact.centers, coefficients=a)


def evaluate(f: RkhsFunction, x) -> float:
    """Value of the kernel expansion at ``x``."""
    return f(x)


def project(
    spec: KernelSpec,
    centers: CenterSet,
    g: Callable,
    fact: Optional[GramFactorization] = None,
) -> RkhsFunction:
    """Orthogonal projection of ``g`` onto the span of the center sections.

    Realized by restriction to the centers followed by interpolation;
    idempotent to TOL_PROJECT in the coefficients. A precomputed
    factorization for the same centers may be passed to skip the solve
    setup.
    """
    if fact is None:
        fact = factorize(spec, centers)
    elif fact.centers is not centers and not np.array_equal(fact.centers.points, centers.points):
        raise ValueError("factorization centers do not match")
    values = np.array([float(g(p)) for p in centers.points])
    return interpolate(fact, values)


def native_norm(fact: GramFactorization, f: RkhsFunction) -> float:
    """Native-space norm sqrt(a^T (G + jitter*I) a) of a kernel expansion."""
    if f.centers is not fact.centers and not np.array_equal(
        f.centers.points, fact.centers.points
    ):
        raise ValueError("function centers do not match factorization centers")
    a = f.coefficients
    quad = float(a @ (fact.gram @ a) + fact.jitter * (a @ a))
    return float(np.sqrt(max(quad, 0.0)))
