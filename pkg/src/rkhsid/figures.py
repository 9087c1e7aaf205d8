"""Matplotlib renderings of the pipeline outputs.

Each ``save_*`` function writes one PNG next to the delimited output it
illustrates: phase portrait with the invariant curve, estimator time
histories, log-log convergence rates against their slope bounds, and the
error contour over the plane. All rendering uses the Agg backend so the
CLI works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dynamics import first_integral
from .kernels import SLOPE_BOUNDS

_DPI = 150


def _new_axes(figsize=(6.0, 4.5)):
    fig, ax = plt.subplots(figsize=figsize, layout="constrained")
    ax.grid(True, alpha=0.3)
    return fig, ax


def _finish(fig, path):
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_phase_portrait(path, poly, traj=None, centers=None):
    """Streamlines of the plant field with the invariant level curve."""
    fig, ax = _new_axes(figsize=(5.5, 5.0))
    pts = poly.points
    pad = 0.4
    x1 = np.linspace(pts[:, 0].min() - pad, pts[:, 0].max() + pad, 40)
    x2 = np.linspace(pts[:, 1].min() - pad, pts[:, 1].max() + pad, 40)
    X1, X2 = np.meshgrid(x1, x2)
    U = X2 + X1**2
    V = -X1
    ax.streamplot(X1, X2, U, V, color="0.75", density=1.2, linewidth=0.7)
    ax.plot(pts[:, 0], pts[:, 1], "C0-", lw=1.8, label=f"$\\Phi = {poly.c:g}$")
    if traj is not None:
        ax.plot(traj.x[:, 0], traj.x[:, 1], "C1--", lw=1.0, label="plant")
        ax.plot(traj.xhat[:, 0], traj.xhat[:, 1], "C2:", lw=1.0, label="estimate")
    if centers is not None:
        ax.plot(centers.points[:, 0], centers.points[:, 1], "k.", ms=3, label="centers")
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    _finish(fig, path)


def save_trace_figure(path, poly):
    """Invariant curve and its residual off the level set, vs arc length."""
    fig, (ax0, ax1) = plt.subplots(
        1, 2, figsize=(9.0, 4.0), layout="constrained",
        gridspec_kw={"width_ratios": [1.0, 1.3]},
    )
    pts = poly.points
    ax0.plot(pts[:, 0], pts[:, 1], "C0-", lw=1.5)
    ax0.plot(pts[0, 0], pts[0, 1], "C3o", ms=5, label="seed")
    ax0.set_xlabel("$x_1$")
    ax0.set_ylabel("$x_2$")
    ax0.set_aspect("equal")
    ax0.grid(True, alpha=0.3)
    ax0.legend(fontsize=8)
    ax0.set_title(f"L = {poly.total_length:.6g}")
    resid = np.abs(first_integral(pts) - poly.c)
    ax1.semilogy(poly.arclengths, np.maximum(resid, 1e-18), "C0-", lw=0.8)
    ax1.axhline(poly.level_tol, color="C3", ls="--", lw=1.0, label="tolerance")
    ax1.set_xlabel("arc length s")
    ax1.set_ylabel(f"$|\\Phi - ({poly.c:g})|$")
    ax1.grid(True, alpha=0.3)
    ax1.legend(fontsize=8)
    _finish(fig, path)


def save_simulation_figure(path, traj, poly=None):
    """State tracking error and function-coefficient magnitude over time."""
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(6.5, 5.5), sharex=True, layout="constrained")
    err = np.linalg.norm(traj.x - traj.xhat, axis=1)
    ax0.semilogy(traj.times, np.maximum(err, 1e-18), "C0-", lw=1.0)
    ax0.set_ylabel(r"$\|x - \hat{x}\|$")
    ax0.grid(True, alpha=0.3)
    drift = np.abs(first_integral(traj.x) - first_integral(traj.x[0]))
    ax1.semilogy(traj.times, np.maximum(drift, 1e-18), "C2-", lw=1.0)
    ax1.set_ylabel(r"first-integral drift")
    ax1.set_xlabel("t")
    ax1.grid(True, alpha=0.3)
    _finish(fig, path)


def save_estimate_figure(path, poly, f_true, f_hat):
    """True and learned nonlinearity along the manifold, plus their gap."""
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(6.5, 5.5), sharex=True, layout="constrained")
    s = poly.arclengths
    ft = np.array([float(f_true(p)) for p in poly.points])
    fh = f_hat(poly.points)
    ax0.plot(s, ft, "C0-", lw=1.4, label="true")
    ax0.plot(s, fh, "C1--", lw=1.2, label="estimate")
    ax0.set_ylabel("$f$ on the manifold")
    ax0.legend(fontsize=8)
    ax0.grid(True, alpha=0.3)
    ax1.semilogy(s, np.maximum(np.abs(ft - fh), 1e-18), "C3-", lw=1.0)
    ax1.set_xlabel("arc length s")
    ax1.set_ylabel("abs. error")
    ax1.grid(True, alpha=0.3)
    _finish(fig, path)


def save_rates_figure(path, report, nu):
    """Log-log error curves vs N with the slope-bound guide line."""
    fig, ax = _new_axes()
    recs = [r for r in report.records if r.nu == nu and r.failure is None]
    Ns = np.array([r.N for r in recs], dtype=float)
    for norm, attr, style in (
        ("sup", "sup_err", "o-"),
        ("order 0", "l2_err", "s--"),
        ("order 1", "h1_err", "^:"),
    ):
        errs = np.array([getattr(r, attr) for r in recs])
        ax.loglog(Ns, errs, style, ms=4, lw=1.2, label=norm)
    lo, hi = report.fit_window
    bound = SLOPE_BOUNDS[nu]
    in_win = (Ns >= lo) & (Ns <= hi)
    if np.any(in_win):
        anchor_N = Ns[in_win][0]
        anchor_e = np.array([r.sup_err for r in recs])[in_win][0]
        guide_N = np.array([lo, hi], dtype=float)
        guide = anchor_e * (guide_N / anchor_N) ** (-bound)
        ax.loglog(guide_N, guide, "k--", lw=1.0, label=f"slope $-{bound:g}$")
    ax.axvspan(lo, hi, color="0.92", zorder=0)
    slope = report.slope(nu, "sup")
    ax.set_title(f"$\\nu = {nu}$: fitted sup-norm slope {slope:.2f}")
    ax.set_xlabel("N")
    ax.set_ylabel("error on the manifold")
    ax.legend(fontsize=8)
    _finish(fig, path)


def save_contour_figure(path, x1, x2, err, poly=None):
    """Filled contour of the estimation error over the plane."""
    fig, ax = _new_axes(figsize=(6.0, 5.2))
    floor = max(err[err > 0].min() if np.any(err > 0) else 1e-16, 1e-16)
    levels = np.geomspace(floor, max(err.max(), floor * 10), 24)
    cs = ax.contourf(
        x1, x2, np.maximum(err, floor), levels=levels,
        norm=matplotlib.colors.LogNorm(), cmap="viridis",
    )
    fig.colorbar(cs, ax=ax, label="$|f - \\hat{f}|$")
    if poly is not None:
        ax.plot(poly.points[:, 0], poly.points[:, 1], "w-", lw=1.2)
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    ax.set_aspect("equal")
    _finish(fig, path)
