"""Invariant level set of the example plant as an arc-length polyline.

The closed orbit through a seed point is traced by integrating the plant
field, resampled to uniform spacing, and pinned back onto the level set
with a few Newton projections along the gradient of the first integral.
Sampling and fill-distance queries all work in the intrinsic (arc-length)
metric of the resulting closed curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import first_integral
from .exceptions import LevelAccuracyError, ResolutionError, TraceNotClosedError
from .rkhs import CenterSet

#: Defaults shared by the tracer and the polyline invariants.
CLOSURE_TOL = 1e-4
LEVEL_TOL = 1e-6
TRACE_STEP = 1e-4


@dataclass(frozen=True)
class ManifoldPolyline:
    """Closed level curve Phi = c sampled densely and uniformly in arc length.

    ``points[j]`` sits at arc length ``arclengths[j]``; the segment from
    the last point back to the first closes the loop, so ``total_length``
    exceeds ``arclengths[-1]`` by one spacing. ``closure_gap`` records how
    closely the traced orbit returned to its seed.
    """

    c: float
    points: np.ndarray
    arclengths: np.ndarray
    total_length: float
    closure_gap: float
    level_tol: float = LEVEL_TOL

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        s = np.asarray(self.arclengths, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "arclengths", s)
        if s[0] != 0.0 or np.any(np.diff(s) <= 0.0):
            raise ValueError("arclengths must start at 0 and increase strictly")
        if s[-1] >= self.total_length:
            raise ValueError("total_length must exceed the last arc length")
        if self.closure_gap > CLOSURE_TOL:
            raise ValueError(
                f"closure gap {self.closure_gap:.3e} exceeds {CLOSURE_TOL:g}"
            )
        drift = np.abs(first_integral(pts) - self.c).max()
        if drift > self.level_tol:
            raise ValueError(
                f"polyline off the level set by {drift:.3e} (> {self.level_tol:g})"
            )

    def __len__(self):
        return self.points.shape[0]

    @property
    def spacing(self) -> float:
        """Largest gap between consecutive arc lengths (including the wrap)."""
        gaps = np.diff(np.append(self.arclengths, self.total_length))
        return float(gaps.max())

    def point_at(self, s):
        """Position at arc length ``s`` (scalar or array), wrapping modulo L."""
        s = np.mod(np.asarray(s, dtype=float), self.total_length)
        grid = np.append(self.arclengths, self.total_length)
        closed = np.vstack([self.points, self.points[:1]])
        idx = np.clip(np.searchsorted(grid, s, side="right") - 1, 0, len(grid) - 2)
        w = (s - grid[idx]) / (grid[idx + 1] - grid[idx])
        out = closed[idx] + w[..., None] * (closed[idx + 1] - closed[idx])
        return out

    def to_csv(self, path):
        """Write columns s, x1, x2, phi."""
        phi = first_integral(self.points)
        with open(path, "w") as fh:
            fh.write("s,x1,x2,phi\n")
            for j in range(len(self)):
                row = (self.arclengths[j], *self.points[j], phi[j])
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _plant_field(x1: float, x2: float):
    # example plant: xdot1 = x2 + x1^2, xdot2 = -x1
    return x2 + x1 * x1, -x1


def _trace_orbit(seed, step, closure_tol, max_time):
    """Raw RK4 trace of the plant orbit until first return to the seed.

    Returns (points, gap). Pure-float loop; the caller checks level drift.
    """
    s1, s2 = float(seed[0]), float(seed[1])
    x1, x2 = s1, s2
    pts = [(x1, x2)]
    arm2 = max(10.0 * closure_tol, 1e-3) ** 2
    tol2 = closure_tol * closure_tol
    armed = False
    closing = False
    best = None
    half = step / 2.0
    sixth = step / 6.0
    for _ in range(int(max_time / step)):
        a1, a2 = _plant_field(x1, x2)
        b1, b2 = _plant_field(x1 + half * a1, x2 + half * a2)
        c1, c2 = _plant_field(x1 + half * b1, x2 + half * b2)
        d1, d2 = _plant_field(x1 + step * c1, x2 + step * c2)
        x1 += sixth * (a1 + 2.0 * (b1 + c1) + d1)
        x2 += sixth * (a2 + 2.0 * (b2 + c2) + d2)
        pts.append((x1, x2))
        r2 = (x1 - s1) ** 2 + (x2 - s2) ** 2
        if not armed:
            armed = r2 > arm2
        elif r2 < tol2:
            closing = True
            if best is None or r2 < best[0]:
                best = (r2, len(pts) - 1)
        elif closing:
            break
    if best is None:
        raise TraceNotClosedError(
            f"orbit did not return within {closure_tol:g} of the seed "
            f"(time budget {max_time:g})"
        )
    stop = best[1]
    return np.array(pts[: stop + 1]), math.sqrt(best[0])


def _project_to_level(points, c, target=1e-12, max_iter=8):
    """Newton-project points onto the level set Phi = c along grad Phi."""
    p = np.array(points, dtype=float)
    for _ in range(max_iter):
        e = np.exp(2.0 * p[:, 1])
        phi = (p[:, 1] + p[:, 0] ** 2 - 0.5) * e
        resid = phi - c
        if np.abs(resid).max() <= target:
            break
        gx = 2.0 * p[:, 0] * e
        gy = 2.0 * (p[:, 1] + p[:, 0] ** 2) * e
        norm2 = gx * gx + gy * gy
        scale = resid / norm2
        p[:, 0] -= scale * gx
        p[:, 1] -= scale * gy
    return p


def trace_level_set(
    c: float,
    seed,
    resolution: float = 1e-3,
    *,
    step: float = TRACE_STEP,
    closure_tol: float = CLOSURE_TOL,
    level_tol: float = LEVEL_TOL,
    max_time: float = 60.0,
) -> ManifoldPolyline:
    """Trace the closed orbit through ``seed`` and return it as a polyline.

    The plant flow is integrated with fixed-step RK4 until it first
    returns within ``closure_tol`` of the seed, resampled to uniform
    spacing <= ``resolution``, and projected back onto the level set so
    every stored point satisfies |Phi - c| <= ``level_tol``. If the raw
    trace drifts off the level set the step is reduced tenfold once
    before giving up.
    """
    seed = np.asarray(seed, dtype=float)
    if abs(first_integral(seed) - c) > level_tol:
        raise ValueError(
            f"seed is not on the level set: |Phi(seed) - c| = "
            f"{abs(first_integral(seed) - c):.3e}"
        )
    if c >= 0.0:
        raise ValueError("need c < 0 for a closed level set")

    raw, gap = _trace_orbit(seed, step, closure_tol, max_time)
    drift = np.abs(first_integral(raw) - c).max()
    if drift > level_tol:
        raw, gap = _trace_orbit(seed, step / 10.0, closure_tol, max_time)
        drift = np.abs(first_integral(raw) - c).max()
        if drift > level_tol:
            raise LevelAccuracyError(
                f"trace drifted off the level set by {drift:.3e} "
                f"even at step {step / 10.0:g}"
            )

    chord = np.linalg.norm(np.diff(raw, axis=0), axis=1)
    s_raw = np.concatenate([[0.0], np.cumsum(chord)])
    length = s_raw[-1] + np.linalg.norm(raw[-1] - raw[0])

    m = max(int(math.ceil(length / resolution)), 8)
    targets = np.arange(m) * (length / m)
    closed = np.vstack([raw, raw[:1]])
    grid = np.append(s_raw, length)
    resampled = np.column_stack(
        [np.interp(targets, grid, closed[:, 0]), np.interp(targets, grid, closed[:, 1])]
    )
    polished = _project_to_level(resampled, c)

    chord = np.linalg.norm(np.diff(polished, axis=0), axis=1)
    arclengths = np.concatenate([[0.0], np.cumsum(chord)])
    total = arclengths[-1] + np.linalg.norm(polished[-1] - polished[0])

    return ManifoldPolyline(
        c=c,
        points=polished,
        arclengths=arclengths,
        total_length=float(total),
        closure_gap=gap,
        level_tol=level_tol,
    )


def uniform_samples(m: ManifoldPolyline, N: int) -> CenterSet:
    """N points equispaced in arc length, starting at the curve's origin."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > len(m) // 4:
        raise ResolutionError(
            f"N={N} exceeds polyline density / 4 = {len(m) // 4}; "
            "trace with a finer resolution"
        )
    s = np.arange(N) * (m.total_length / N)
    return CenterSet(points=m.point_at(s), arclengths=s)


def trajectory_samples(
    m: ManifoldPolyline,
    N: int,
    *,
    dt: float = 1e-3,
    max_time: float = 60.0,
) -> CenterSet:
    """Data-driven variant: N plant states at equispaced times over one period.

    Arc lengths are assigned by nearest dense polyline point. Unlike
    ``uniform_samples`` the spacing in the intrinsic metric is nonuniform
    wherever the orbit speed varies.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    raw, _ = _trace_orbit(m.points[0], dt, CLOSURE_TOL, max_time)
    period_steps = len(raw) - 1
    idx = np.round(np.arange(N) * (period_steps / N)).astype(int)
    pts = raw[idx]
    d2 = (
        (pts[:, None, 0] - m.points[None, :, 0]) ** 2
        + (pts[:, None, 1] - m.points[None, :, 1]) ** 2
    )
    s = m.arclengths[np.argmin(d2, axis=1)]
    return CenterSet(points=pts, arclengths=s)


def intrinsic_distance(m: ManifoldPolyline, s1: float, s2: float) -> float:
    """Geodesic distance between arc lengths on the closed curve."""
    L = m.total_length
    for s in (s1, s2):
        if not 0.0 <= s <= L:
            raise ValueError(f"arc length {s} outside [0, {L}]")
    d = abs(s1 - s2)
    return min(d, L - d)


def fill_distance(m: ManifoldPolyline, samples: CenterSet) -> float:
    """Largest intrinsic distance from any dense point to its nearest sample.

    Brute force over the dense polyline; exact up to the polyline
    spacing. Samples must carry arc lengths and lie on the curve.
    """
    if samples.arclengths is None:
        raise ValueError("samples must carry arc lengths on the manifold")
    off = np.abs(first_integral(samples.points) - m.c).max()
    if off > m.level_tol:
        raise ValueError(f"sample off the manifold by {off:.3e}")
    L = m.total_length
    diff = np.abs(m.arclengths[:, None] - samples.arclengths[None, :])
    circ = np.minimum(diff, L - diff)
    return float(circ.min(axis=1).max())
