"""Run configuration: YAML schema, documented defaults, strict validation.

A run config is a YAML file whose keys form a fixed two-level schema;
every key has a default (the file may be empty or omit any subset) and
unknown keys are rejected with their dotted path. ``default_config_yaml``
returns the canonical default file with one comment per key;
``load_config`` merges a user file over the defaults and validates.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import yaml

from .dynamics import PLANT_A0, PLANT_B, SystemConfig, level_seed, x1_squared
from .exceptions import ConfigError, StabilityError
from .kernels import KernelSpec

#: Observer damping and learning gain tuned so the adaptation residual at
#: T sits below the interpolation floor across the default study window.
DEFAULT_DAMPING = 5.0
DEFAULT_GAMMA = 1000.0
DEFAULT_LENGTH_SCALE = 0.05

DEFAULTS = {
    "system": {
        "A": None,  # observer matrix; None -> A0 - damping * I
        "damping": DEFAULT_DAMPING,
        "Q": [[1.0, 0.0], [0.0, 1.0]],
        "gamma": DEFAULT_GAMMA,
        "x0": None,  # None -> seed of the level set on the x2-axis
        "xhat0": None,  # None -> x0
        "dt": 1.0e-3,
        "T": 50.0,
        "snapshot_stride": 10,
    },
    "manifold": {
        "level_c": -0.1,
        "resolution": 1.0e-3,
    },
    "kernel": {
        "length_scale": DEFAULT_LENGTH_SCALE,
        "nus": [1.5, 2.5],
    },
    "study": {
        "N_list": [10, 20, 30, 40, 60, 80, 100, 140, 200],
        "fit_window": [40, 200],
        "N_ref": 800,
        "compute_reference": False,
        "sampling": "uniform",
        "workers": 1,
    },
    "simulate": {
        "N": 100,
        "nu": 2.5,
    },
    "contour": {
        "N": 100,
        "nu": 2.5,
        "bbox": [-1.5, 1.5, -1.5, 1.5],
        "grid_n": 201,
        "force_true": False,
    },
    "output": {
        "out_dir": "out",
        "figures": True,
    },
    "seed": 0,
}

_TEMPLATE = """\
# Canonical run configuration; every key shown with its default.
# A config file may set any subset of these keys; unknown keys are
# rejected. Matrices are row-major nested lists.

system:
  A: null                # observer matrix; null -> A0 - damping * I
  damping: {system[damping]}           # shift used when A is null
  Q: {system[Q]}  # Lyapunov right-hand side, symmetric positive definite
  gamma: {system[gamma]}        # learning gain
  x0: null               # plant start; null -> level-set seed on the x2-axis
  xhat0: null            # estimator start; null -> x0
  dt: {system[dt]}             # fixed integrator step
  T: {system[T]}               # horizon
  snapshot_stride: {system[snapshot_stride]}    # steps between stored snapshots

manifold:
  level_c: {manifold[level_c]}          # first-integral level (must be in (-0.5, 0))
  resolution: {manifold[resolution]}      # target polyline spacing

kernel:
  length_scale: {kernel[length_scale]}     # Matern length scale
  nus: {kernel[nus]}        # kernel orders used by the rates study

study:
  N_list: {study[N_list]}
  fit_window: {study[fit_window]}  # N range used for slope fits
  N_ref: {study[N_ref]}             # dense-basis reference size
  compute_reference: {study[compute_reference]}  # add dense-basis reference column
  sampling: {study[sampling]}       # uniform | trajectory
  workers: {study[workers]}             # parallel record workers

simulate:
  N: {simulate[N]}                 # centers for the simulate command
  nu: {simulate[nu]}

contour:
  N: {contour[N]}
  nu: {contour[nu]}
  bbox: {contour[bbox]}
  grid_n: {contour[grid_n]}
  force_true: {contour[force_true]}      # test hook: compare truth to itself

output:
  out_dir: {output[out_dir]}
  figures: {output[figures]}          # render PNG figures next to the data

seed: {seed}
"""


def default_config_yaml() -> str:
    """Canonical default config file with per-key documentation."""
    values = copy.deepcopy(DEFAULTS)
    values["study"]["compute_reference"] = "false"
    values["contour"]["force_true"] = "false"
    values["output"]["figures"] = "true"
    return _TEMPLATE.format(**values)


def _reject_unknown(user, schema, path=""):
    for key, val in user.items():
        dotted = f"{path}{key}"
        if key not in schema:
            raise ConfigError(f"unknown config key: {dotted}")
        if isinstance(schema[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{dotted} must be a mapping")
            _reject_unknown(val, schema[key], dotted + ".")


def _merge(base, user):
    out = copy.deepcopy(base)
    for key, val in user.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _as_matrix(raw, key, shape):
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} is not numeric: {exc}") from exc
    if arr.shape != shape:
        raise ConfigError(f"{key} must have shape {shape}, got {arr.shape}")
    return arr


def _as_number(raw, key, *, positive=False):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{key} must be a number, got {raw!r}")
    if positive and not raw > 0:
        raise ConfigError(f"{key} must be positive, got {raw}")
    return float(raw)


def _as_int(raw, key, *, minimum=None):
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(f"{key} must be an integer, got {raw!r}")
    if minimum is not None and raw < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {raw}")
    return raw


def _as_bool(raw, key):
    if not isinstance(raw, bool):
        raise ConfigError(f"{key} must be true or false, got {raw!r}")
    return raw


def _as_nu(raw, key):
    if raw not in (1.5, 2.5):
        raise ConfigError(f"{key} must be 1.5 or 2.5, got {raw!r}")
    return float(raw)


@dataclass
class RunConfig:
    """Validated, fully-resolved run configuration."""

    raw: dict

    @property
    def level_c(self) -> float:
        return self.raw["manifold"]["level_c"]

    @property
    def resolution(self) -> float:
        return self.raw["manifold"]["resolution"]

    @property
    def length_scale(self) -> float:
        return self.raw["kernel"]["length_scale"]

    @property
    def out_dir(self) -> str:
        return self.raw["output"]["out_dir"]

    @property
    def figures(self) -> bool:
        return self.raw["output"]["figures"]

    def kernel_spec(self, nu: float) -> KernelSpec:
        return KernelSpec(nu=nu, length_scale=self.length_scale)

    def system_config(self) -> SystemConfig:
        sys = self.raw["system"]
        A = sys["A"]
        if A is None:
            A = PLANT_A0 - sys["damping"] * np.eye(2)
        x0 = sys["x0"]
        if x0 is None:
            x0 = level_seed(self.level_c)
        xhat0 = sys["xhat0"]
        if xhat0 is None:
            xhat0 = np.array(x0, dtype=float)
        try:
            return SystemConfig(
                A0=PLANT_A0,
                A=np.asarray(A, dtype=float),
                B=PLANT_B,
                Q=np.asarray(sys["Q"], dtype=float),
                gamma=sys["gamma"],
                f_true=x1_squared,
                x0=np.asarray(x0, dtype=float),
                xhat0=xhat0,
                dt=sys["dt"],
                T=sys["T"],
                snapshot_stride=sys["snapshot_stride"],
            )
        except (ValueError, StabilityError) as exc:
            raise ConfigError(f"invalid system configuration: {exc}") from exc

    def echo(self) -> dict:
        """Plain-JSON view of the resolved configuration."""
        def clean(v):
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            if isinstance(v, np.ndarray):
                return v.tolist()
            return v
        return clean(self.raw)


def _validate(cfg: dict) -> dict:
    sys = cfg["system"]
    if sys["A"] is not None:
        sys["A"] = _as_matrix(sys["A"], "system.A", (2, 2)).tolist()
    sys["damping"] = _as_number(sys["damping"], "system.damping", positive=True)
    _as_matrix(sys["Q"], "system.Q", (2, 2))
    sys["gamma"] = _as_number(sys["gamma"], "system.gamma")
    if sys["gamma"] < 0:
        raise ConfigError(f"system.gamma must be nonnegative, got {sys['gamma']}")
    for key in ("x0", "xhat0"):
        if sys[key] is not None:
            sys[key] = _as_matrix(sys[key], f"system.{key}", (2,)).tolist()
    sys["dt"] = _as_number(sys["dt"], "system.dt", positive=True)
    sys["T"] = _as_number(sys["T"], "system.T", positive=True)
    sys["snapshot_stride"] = _as_int(sys["snapshot_stride"], "system.snapshot_stride", minimum=1)

    man = cfg["manifold"]
    man["level_c"] = _as_number(man["level_c"], "manifold.level_c")
    if not -0.5 < man["level_c"] < 0.0:
        raise ConfigError(
            f"manifold.level_c must lie in (-0.5, 0), got {man['level_c']}"
        )
    man["resolution"] = _as_number(man["resolution"], "manifold.resolution", positive=True)

    ker = cfg["kernel"]
    ker["length_scale"] = _as_number(ker["length_scale"], "kernel.length_scale", positive=True)
    if not isinstance(ker["nus"], list) or not ker["nus"]:
        raise ConfigError("kernel.nus must be a nonempty list")
    ker["nus"] = [_as_nu(v, "kernel.nus") for v in ker["nus"]]

    study = cfg["study"]
    if not isinstance(study["N_list"], list) or not study["N_list"]:
        raise ConfigError("study.N_list must be a nonempty list")
    study["N_list"] = [_as_int(v, "study.N_list", minimum=1) for v in study["N_list"]]
    if sorted(study["N_list"]) != study["N_list"]:
        raise ConfigError("study.N_list must be increasing")
    fw = study["fit_window"]
    if not (isinstance(fw, list) and len(fw) == 2):
        raise ConfigError("study.fit_window must be a [lo, hi] pair")
    study["fit_window"] = [_as_int(v, "study.fit_window", minimum=1) for v in fw]
    if study["fit_window"][0] > study["fit_window"][1]:
        raise ConfigError("study.fit_window must satisfy lo <= hi")
    study["N_ref"] = _as_int(study["N_ref"], "study.N_ref", minimum=4)
    study["compute_reference"] = _as_bool(study["compute_reference"], "study.compute_reference")
    if study["sampling"] not in ("uniform", "trajectory"):
        raise ConfigError(
            f"study.sampling must be 'uniform' or 'trajectory', got {study['sampling']!r}"
        )
    study["workers"] = _as_int(study["workers"], "study.workers", minimum=1)

    sim = cfg["simulate"]
    sim["N"] = _as_int(sim["N"], "simulate.N", minimum=1)
    sim["nu"] = _as_nu(sim["nu"], "simulate.nu")

    con = cfg["contour"]
    con["N"] = _as_int(con["N"], "contour.N", minimum=1)
    con["nu"] = _as_nu(con["nu"], "contour.nu")
    bbox = con["bbox"]
    if not (isinstance(bbox, list) and len(bbox) == 4):
        raise ConfigError("contour.bbox must be [x1_min, x1_max, x2_min, x2_max]")
    con["bbox"] = [_as_number(v, "contour.bbox") for v in bbox]
    if con["bbox"][0] >= con["bbox"][1] or con["bbox"][2] >= con["bbox"][3]:
        raise ConfigError("contour.bbox must have min < max per axis")
    con["grid_n"] = _as_int(con["grid_n"], "contour.grid_n", minimum=2)
    con["force_true"] = _as_bool(con["force_true"], "contour.force_true")

    out = cfg["output"]
    if not isinstance(out["out_dir"], str) or not out["out_dir"]:
        raise ConfigError("output.out_dir must be a nonempty string")
    out["figures"] = _as_bool(out["figures"], "output.figures")

    cfg["seed"] = _as_int(cfg["seed"], "seed", minimum=0)
    return cfg


def load_config(path=None) -> RunConfig:
    """Parse and validate a config file; ``None`` loads the pure defaults."""
    user = {}
    if path is not None:
        try:
            with open(path) as fh:
                user = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config parse error: {exc}") from exc
        if user is None:
            user = {}
        if not isinstance(user, dict):
            raise ConfigError("config file must contain a mapping at top level")
    _reject_unknown(user, DEFAULTS)
    merged = _merge(DEFAULTS, user)
    return RunConfig(raw=_validate(merged))
