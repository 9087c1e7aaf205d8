"""Error norms on the manifold, convergence studies, and slope fits.

Errors of the learned nonlinearity are measured against the true function
along the dense polyline: the sup norm, and discrete Sobolev norms of
orders 0 and 1 in arc length (periodic trapezoid quadrature and central
differences on the closed curve). A convergence study sweeps center
counts and kernel orders, records fill distances, and fits log-log slopes
over a configurable window, next to the integer slope bounds that the
kernel orders imply. A dense-basis run stands in for the
infinite-dimensional estimate when the approximation-only error is
wanted.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import SystemConfig, simulate
from .exceptions import FitError, NumericalError
from .kernels import SLOPE_BOUNDS, KernelSpec
from .manifold import ManifoldPolyline, fill_distance, trajectory_samples, uniform_samples
from .rkhs import CenterSet, RkhsFunction


def _values_on(points: np.ndarray, fn) -> np.ndarray:
    if isinstance(fn, RkhsFunction):
        return fn(points)
    return np.array([float(fn(p)) for p in points])


def sup_error(m: ManifoldPolyline, f_true, f_hat) -> float:
    """sup over the dense polyline of |f_true - f_hat|."""
    return float(np.abs(_values_on(m.points, f_true) - _values_on(m.points, f_hat)).max())


def discrete_sobolev_error(m: ManifoldPolyline, f_true, f_hat, mu: int) -> float:
    """Discrete arc-length Sobolev norm of order ``mu`` in {0, 1} of the error.

    Order 0 is the periodic trapezoid rule of the squared error over arc
    length, square-rooted; order 1 adds the squared central-difference
    derivative of the error under the same quadrature.
    """
    if mu not in (0, 1):
        raise ValueError("mu must be 0 or 1")
    e = _values_on(m.points, f_true) - _values_on(m.points, f_hat)
    s = m.arclengths
    L = m.total_length
    # periodic trapezoid weights: half the two adjacent gaps per node
    gaps = np.diff(np.append(s, L))  # gap following each node (wrap closes)
    w = (gaps + np.roll(gaps, 1)) / 2.0
    total = float(w @ (e * e))
    if mu == 1:
        ds = gaps + np.roll(gaps, 1)  # arc span between circular neighbors
        de = (np.roll(e, -1) - np.roll(e, 1)) / ds
        total += float(w @ (de * de))
    return float(np.sqrt(total))


@dataclass(frozen=True)
class ErrorRecord:
    """Errors of the learned function for one (N, nu) run."""

    N: int
    nu: float
    h: float
    sup_err: float
    l2_err: float
    h1_err: float
    T: float
    gamma: float
    sup_err_ref: Optional[float] = None
    failure: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "nu": self.nu,
            "h": self.h,
            "sup_err": self.sup_err,
            "l2_err": self.l2_err,
            "h1_err": self.h1_err,
            "T": self.T,
            "gamma": self.gamma,
            "sup_err_ref": self.sup_err_ref,
            "failure": self.failure,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-(N, nu) error records with fitted slopes and slope bounds."""

    records: list
    fitted_slopes: dict
    bound_exponents: dict
    fit_window: tuple
    sampling: str = "uniform"

    def slope(self, nu: float, norm: str = "sup") -> float:
        return self.fitted_slopes[f"nu={nu}:{norm}"]

    def to_dict(self, config_echo: Optional[dict] = None) -> dict:
        return {
            "config": config_echo or {},
            "records": [r.as_dict() for r in self.records],
            "slopes": dict(self.fitted_slopes),
            "bounds": {str(k): v for k, v in self.bound_exponents.items()},
            "fit_window": list(self.fit_window),
            "sampling": self.sampling,
        }

    def to_csv(self, path):
        """Write columns N, nu, h, sup_err, l2_err, h1_err."""
        with open(path, "w") as fh:
            fh.write("N,nu,h,sup_err,l2_err,h1_err\n")
            for r in self.records:
                if r.failure is not None:
                    continue
                fh.write(
                    ",".join(
                        [str(r.N), repr(float(r.nu))]
                        + [repr(float(v)) for v in (r.h, r.sup_err, r.l2_err, r.h1_err)]
                    )
                    + "\n"
                )


def fit_slope(Ns: Sequence, errs: Sequence) -> float:
    """Least-squares slope of log(err) against log(N)."""
    Ns = np.asarray(Ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if len(Ns) < 3:
        raise FitError(f"slope fit needs >= 3 points, got {len(Ns)}")
    if np.any(errs <= 0.0):
        raise FitError("slope fit needs strictly positive errors")
    return float(np.polyfit(np.log(Ns), np.log(errs), 1)[0])


def reference_estimate(
    cfg: SystemConfig, spec: KernelSpec, m: ManifoldPolyline, N_ref: int
) -> RkhsFunction:
    """Dense-basis run standing in for the infinite-dimensional estimate.

    Simulates with ``N_ref`` uniform centers (N_ref should be at least 4x
    the largest study N) and returns the final kernel expansion.
    """
    centers = uniform_samples(m, N_ref)
    return simulate(cfg, spec, centers).final_estimate()


def _study_record(args) -> ErrorRecord:
    cfg, m, nu, length_scale, N, sampling, f_ref = args
    spec = KernelSpec(nu=nu, length_scale=length_scale)
    sampler = uniform_samples if sampling == "uniform" else trajectory_samples
    centers = sampler(m, N)
    h = fill_distance(m, centers)
    try:
        traj = simulate(cfg, spec, centers)
    except NumericalError as exc:
        return ErrorRecord(
            N=N, nu=nu, h=h, sup_err=np.nan, l2_err=np.nan, h1_err=np.nan,
            T=cfg.T, gamma=cfg.gamma, failure=str(exc),
        )
    f_hat = traj.final_estimate()
    ref = None if f_ref is None else sup_error(m, f_ref, f_hat)
    return ErrorRecord(
        N=N,
        nu=nu,
        h=h,
        sup_err=sup_error(m, cfg.f_true, f_hat),
        l2_err=discrete_sobolev_error(m, cfg.f_true, f_hat, 0),
        h1_err=discrete_sobolev_error(m, cfg.f_true, f_hat, 1),
        T=cfg.T,
        gamma=cfg.gamma,
        sup_err_ref=ref,
    )


def convergence_study(
    cfg: SystemConfig,
    m: ManifoldPolyline,
    N_list: Sequence[int],
    nu_list: Sequence[float],
    length_scale: float,
    fit_window: tuple = (40, 200),
    sampling: str = "uniform",
    N_ref: Optional[int] = None,
    workers: int = 1,
) -> ConvergenceReport:
    """Sweep (N, nu), record errors and fill distances, fit log-log slopes.

    Slopes are fitted per kernel order and norm over the records with
    ``fit_window[0] <= N <= fit_window[1]``; smaller N are reported but
    excluded as pre-asymptotic. When ``N_ref`` is given, each record also
    carries the sup distance to the dense-basis reference estimate.
    Records are always assembled in (nu, N) order, so reports are
    bit-identical across reruns and worker counts. Simulation failures
    flag their record and leave the rest of the study intact.
    """
    N_list = list(N_list)
    if sorted(N_list) != N_list:
        raise ValueError("N_list must be increasing")
    if sampling not in ("uniform", "trajectory"):
        raise ValueError(f"unknown sampling mode {sampling!r}")

    refs = {}
    if N_ref is not None:
        if N_ref < 4 * max(N_list):
            raise ValueError("N_ref must be at least 4x the largest study N")
        for nu in nu_list:
            spec = KernelSpec(nu=nu, length_scale=length_scale)
            refs[nu] = reference_estimate(cfg, spec, m, N_ref)

    jobs = [
        (cfg, m, nu, length_scale, N, sampling, refs.get(nu))
        for nu in nu_list
        for N in N_list
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_study_record, jobs))
    else:
        records = [_study_record(job) for job in jobs]

    lo, hi = fit_window
    slopes = {}
    for nu in nu_list:
        in_window = [
            r for r in records
            if r.nu == nu and r.failure is None and lo <= r.N <= hi
        ]
        Ns = [r.N for r in in_window]
        for norm, attr in (("sup", "sup_err"), ("l2", "l2_err"), ("h1", "h1_err")):
            slopes[f"nu={nu}:{norm}"] = fit_slope(Ns, [getattr(r, attr) for r in in_window])

    bounds = {nu: SLOPE_BOUNDS[nu] for nu in nu_list}
    return ConvergenceReport(
        records=records,
        fitted_slopes=slopes,
        bound_exponents=bounds,
        fit_window=(lo, hi),
        sampling=sampling,
    )


def error_field(f_true, f_hat, bbox, grid_n):
    """|f_true - f_hat| on a regular grid over ``bbox``.

    ``bbox`` is (x1_min, x1_max, x2_min, x2_max); ``grid_n`` a point count
    per axis (int, or a (n1, n2) pair, each >= 2). Returns (x1_axis,
    x2_axis, err) with err[i, j] the error at (x1_axis[j], x2_axis[i]),
    ready for contour plotting.
    """
    if np.isscalar(grid_n):
        n1 = n2 = int(grid_n)
    else:
        n1, n2 = (int(v) for v in grid_n)
    if n1 < 2 or n2 < 2:
        raise ValueError("grid_n must be >= 2 per axis")
    x1_min, x1_max, x2_min, x2_max = (float(v) for v in bbox)
    x1 = np.linspace(x1_min, x1_max, n1)
    x2 = np.linspace(x2_min, x2_max, n2)
    X1, X2 = np.meshgrid(x1, x2)
    pts = np.column_stack([X1.ravel(), X2.ravel()])
    err = np.abs(_values_on(pts, f_true) - _values_on(pts, f_hat))
    return x1, x2, err.reshape(n2, n1)


def error_field_csv(path, x1, x2, err):
    """Write the grid as rows x1, x2, err (row-major over the grid)."""
    with open(path, "w") as fh:
        fh.write("x1,x2,err\n")
        for i in range(len(x2)):
            for j in range(len(x1)):
                fh.write(f"{x1[j]!r},{x2[i]!r},{err[i, j]!r}\n")
