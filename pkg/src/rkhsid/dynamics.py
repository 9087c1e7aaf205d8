"""Plant, Lyapunov solve, and the coefficient-coordinate adaptive estimator.

The estimator pairs a state observer with a gradient learning law for the
coefficients of a kernel expansion of the unknown scalar nonlinearity:

    d(xhat)/dt = A xhat + (A0 - A) x + B k(Xi, x)^T a
    d(a)/dt    = gamma * (B^T P (x - xhat)) * G^{-1} k(Xi, x)

where k(Xi, x) is the vector of kernel values at the centers, G the Gram
matrix, and P solves A^T P + P A = -Q. The G^{-1} k(Xi, x) factor is the
coefficient vector of the projection of the kernel section at x onto the
span of the center sections, which is how the function-space learning law
looks in coefficient coordinates. Plant and estimator are integrated
jointly with fixed-step classical RK4, so runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .exceptions import DivergenceError, NumericalError, StabilityError
from .kernels import KernelSpec, kernel_vector
from .rkhs import CenterSet, GramFactorization, RkhsFunction, factorize

#: Linear part and input map of the example plant xdot1 = x2 + x1^2, xdot2 = -x1.
PLANT_A0 = np.array([[0.0, 1.0], [-1.0, 0.0]])
PLANT_B = np.array([1.0, 0.0])

#: Relative Frobenius residual allowed for the Lyapunov solve.
LYAPUNOV_TOL = 1e-10


def x1_squared(x) -> float:
    """The example plant's unknown nonlinearity f(x) = x1^2."""
    v = x[0]
    return float(v * v)  # numpy scalar: overflows to inf, not OverflowError


def first_integral(x):
    """Phi(x) = (x2 + x1^2 - 0.5) * exp(2 x2), constant along plant orbits.

    Accepts a single point (2,) or a batch (m, 2).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float((x[1] + x[0] ** 2 - 0.5) * np.exp(2.0 * x[1]))
    return (x[:, 1] + x[:, 0] ** 2 - 0.5) * np.exp(2.0 * x[:, 1])


def first_integral_gradient(x) -> np.ndarray:
    """Gradient of the first integral at a single point."""
    x = np.asarray(x, dtype=float)
    e = np.exp(2.0 * x[1])
    return np.array([2.0 * x[0] * e, 2.0 * (x[1] + x[0] ** 2) * e])


def level_seed(c: float) -> np.ndarray:
    """Point (0, x2*) on the level set Phi = c, for -0.5 < c < 0.

    x2* is the root of (x2 - 0.5) exp(2 x2) = c in (0, 0.5); level values
    outside (-0.5, 0) have no closed orbit through the x2-axis above the
    equilibrium.
    """
    if not -0.5 < c < 0.0:
        raise ValueError(f"need -0.5 < c < 0 for a closed level set, got c={c}")
    x2 = brentq(lambda t: (t - 0.5) * np.exp(2.0 * t) - c, 0.0, 0.5, xtol=1e-14)
    return np.array([0.0, float(x2)])


def _check_hurwitz(A: np.ndarray, what: str = "A"):
    eig = np.linalg.eigvals(A)
    if np.any(eig.real >= 0.0):
        raise StabilityError(
            f"{what} is not Hurwitz: eigenvalue real parts {np.sort(eig.real)}"
        )


@dataclass(frozen=True)
class LyapunovSolution:
    """Symmetric positive definite P with A^T P + P A = -Q."""

    P: np.ndarray


def solve_lyapunov(A, Q) -> LyapunovSolution:
    """Solve A^T P + P A = -Q through the Kronecker-vectorized linear system.

    A must be Hurwitz and Q symmetric positive definite; the solution is
    symmetrized and its residual checked against LYAPUNOV_TOL (relative
    to ||Q||_F).
    """
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    d = A.shape[0]
    if A.shape != (d, d) or Q.shape != (d, d):
        raise ValueError("A and Q must be square matrices of the same size")
    if not np.allclose(Q, Q.T):
        raise ValueError("Q must be symmetric")
    if np.any(np.linalg.eigvalsh(Q) <= 0.0):
        raise ValueError("Q must be positive definite")
    _check_hurwitz(A)

    eye = np.eye(d)
    M = np.kron(eye, A.T) + np.kron(A.T, eye)
    try:
        vec_p = np.linalg.solve(M, -Q.flatten(order="F"))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Kronecker system is singular: {exc}") from exc
    P = vec_p.reshape((d, d), order="F")
    P = (P + P.T) / 2.0

    residual = np.linalg.norm(A.T @ P + P @ A + Q, "fro")
    if residual > LYAPUNOV_TOL * np.linalg.norm(Q, "fro"):
        raise NumericalError(
            f"Lyapunov residual {residual:.3e} exceeds tolerance"
        )
    return LyapunovSolution(P=P)


@dataclass(frozen=True)
class SystemConfig:
    """Plant, observer design, learning gain, and integration grid.

    ``A`` must be Hurwitz (checked here), ``Q`` symmetric positive
    definite. ``a0 = None`` means a zero initial coefficient vector of
    whatever size the center set dictates. ``snapshot_stride`` must
    divide the step count round(T / dt) so snapshots stay equispaced.
    """

    A0: np.ndarray
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    gamma: float
    f_true: Callable
    x0: np.ndarray
    xhat0: np.ndarray
    a0: Optional[np.ndarray] = None
    dt: float = 1e-3
    T: float = 50.0
    snapshot_stride: int = 10

    def __post_init__(self):
        for name in ("A0", "A", "B", "Q", "x0", "xhat0"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        d = self.A0.shape[0]
        if self.A0.shape != (d, d) or self.A.shape != (d, d) or self.Q.shape != (d, d):
            raise ValueError("A0, A, Q must be square matrices of one size")
        B = self.B.reshape(-1)
        if B.shape != (d,):
            raise ValueError("B must be a d-vector (single scalar input channel)")
        object.__setattr__(self, "B", B)
        if self.x0.shape != (d,) or self.xhat0.shape != (d,):
            raise ValueError("x0 and xhat0 must be d-vectors")
        if self.a0 is not None:
            object.__setattr__(self, "a0", np.asarray(self.a0, dtype=float))
        if not (np.allclose(self.Q, self.Q.T) and np.all(np.linalg.eigvalsh(self.Q) > 0)):
            raise ValueError("Q must be symmetric positive definite")
        if not self.gamma >= 0:
            raise ValueError("gamma must be nonnegative")
        if not (self.dt > 0 and self.T > 0):
            raise ValueError("dt and T must be positive")
        _check_hurwitz(self.A)
        n_steps = int(round(self.T / self.dt))
        if n_steps < 1 or n_steps % self.snapshot_stride != 0:
            raise ValueError(
                f"snapshot_stride={self.snapshot_stride} must divide "
                f"round(T/dt)={n_steps}"
            )

    @property
    def dim(self) -> int:
        return self.A0.shape[0]

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


def example_config(
    gamma: float = 1.0,
    dt: float = 1e-3,
    T: float = 50.0,
    level_c: float = -0.1,
    snapshot_stride: int = 10,
    x0: Optional[np.ndarray] = None,
    A: Optional[np.ndarray] = None,
) -> SystemConfig:
    """SystemConfig for the example plant with the default design choices.

    A defaults to A0 - I (eigenvalues -1 +/- i), Q to the identity, and
    x0 to the seed of the level set Phi = level_c on the x2-axis.
    """
    if x0 is None:
        x0 = level_seed(level_c)
    if A is None:
        A = PLANT_A0 - np.eye(2)
    return SystemConfig(
        A0=PLANT_A0,
        A=A,
        B=PLANT_B,
        Q=np.eye(2),
        gamma=gamma,
        f_true=x1_squared,
        x0=x0,
        xhat0=np.array(x0, dtype=float),
        dt=dt,
        T=T,
        snapshot_stride=snapshot_stride,
    )


def plant_rhs(cfg: SystemConfig, x: np.ndarray) -> np.ndarray:
    """Time derivative A0 x + B f(x) of the plant state."""
    return cfg.A0 @ x + cfg.B * cfg.f_true(x)


def estimator_rhs(
    cfg: SystemConfig,
    P: LyapunovSolution,
    fact: GramFactorization,
    centers: CenterSet,
    x: np.ndarray,
    xhat: np.ndarray,
    a: np.ndarray,
):
    """State-estimate and coefficient derivatives at one instant.

    Returns (d(xhat)/dt, d(a)/dt) given the concurrent plant state x.
    """
    k = kernel_vector(fact.spec, centers.points, x)
    dxhat = cfg.A @ xhat + (cfg.A0 - cfg.A) @ x + cfg.B * float(a @ k)
    w = cfg.gamma * float(cfg.B @ (P.P @ (x - xhat)))
    da = w * fact.solve(k)
    return dxhat, da


@dataclass(frozen=True)
class EstimatorTrajectory:
    """Equispaced snapshots of plant state, state estimate, and coefficients."""

    times: np.ndarray
    x: np.ndarray
    xhat: np.ndarray
    a: np.ndarray
    centers: CenterSet
    spec: KernelSpec
    snapshot_stride: int

    def final_estimate(self) -> RkhsFunction:
        """Kernel expansion carried by the last snapshot."""
        return RkhsFunction(spec=self.spec, centers=self.centers, coefficients=self.a[-1])

    def to_csv(self, path):
        """Write columns t, x1, x2, xhat1, xhat2, a_1..a_n."""
        n = self.a.shape[1]
        header = ["t", "x1", "x2", "xhat1", "xhat2"] + [f"a_{i+1}" for i in range(n)]
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for k in range(len(self.times)):
                row = [self.times[k], *self.x[k], *self.xhat[k], *self.a[k]]
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def simulate(cfg: SystemConfig, spec: KernelSpec, centers: CenterSet) -> EstimatorTrajectory:
    """Integrate the coupled plant/estimator system from t=0 to t=T.

    Fixed-step classical RK4 on the stacked state (x, xhat, a); the Gram
    matrix is factored once before the loop. Raises DivergenceError with
    the offending time if the state leaves the finite range.
    """
    fact = factorize(spec, centers)
    P = solve_lyapunov(cfg.A, cfg.Q)
    d, n = cfg.dim, len(centers)

    a0 = np.zeros(n) if cfg.a0 is None else cfg.a0
    if a0.shape != (n,):
        raise ValueError(f"a0 must have length {n}, got {a0.shape}")

    A0, A, B, Q = cfg.A0, cfg.A, cfg.B, cfg.Q
    Pm = P.P
    gamma, f_true = cfg.gamma, cfg.f_true
    pts = centers.points
    profile = spec.profile
    solve = fact.solve
    A0mA = A0 - A

    def rhs(z):
        x = z[:d]
        xhat = z[d : 2 * d]
        a = z[2 * d :]
        fx = f_true(x)
        diff = pts - x
        k = profile(np.sqrt(np.einsum("ij,ij->i", diff, diff)))
        dz = np.empty_like(z)
        dz[:d] = A0 @ x + B * fx
        dz[d : 2 * d] = A @ xhat + A0mA @ x + B * float(a @ k)
        w = gamma * float(B @ (Pm @ (x - xhat)))
        dz[2 * d :] = w * solve(k)
        return dz

    n_steps = cfg.n_steps
    stride = cfg.snapshot_stride
    dt = cfg.dt
    m = n_steps // stride + 1

    times = np.empty(m)
    xs = np.empty((m, d))
    xhats = np.empty((m, d))
    coeffs = np.empty((m, n))

    z = np.concatenate([cfg.x0, cfg.xhat0, a0])
    times[0], xs[0], xhats[0], coeffs[0] = 0.0, z[:d], z[d : 2 * d], z[2 * d :]

    half = dt / 2.0
    sixth = dt / 6.0
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            k1 = rhs(z)
            k2 = rhs(z + half * k1)
            k3 = rhs(z + half * k2)
            k4 = rhs(z + dt * k3)
            z = z + sixth * (k1 + 2.0 * (k2 + k3) + k4)
            if step % stride == 0:
                t = step * dt
                if not np.all(np.isfinite(z)):
                    raise DivergenceError(
                        f"state became non-finite by t={t:.6g}", time=t
                    )
                idx = step // stride
                times[idx] = t
                xs[idx] = z[:d]
                xhats[idx] = z[d : 2 * d]
                coeffs[idx] = z[2 * d :]

    return EstimatorTrajectory(
        times=times,
        x=xs,
        xhat=xhats,
        a=coeffs,
        centers=centers,
        spec=spec,
        snapshot_stride=stride,
    )
