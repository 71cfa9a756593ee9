"""Experiment configuration: a strict JSON document describing one study."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .models import DEFAULT_SETUPS, ModelKind, ModelSpec

METHODS = ("hopinf", "intrusive", "opinf")
METRICS = ("frobenius", "spectral")

_MODEL_KEYS = {"kind", "n", "domain_length", "params", "initial_condition"}
_MODEL_PARAMS = {ModelKind.LINEAR_WAVE_FD: {"c"}, ModelKind.LINEAR_WAVE_PS: {"c"},
                 ModelKind.NLSE: {"gamma"}, ModelKind.SINE_GORDON: set()}
_TOP_KEYS = {"model", "dt", "t_train", "t_test", "reduced_dims", "methods",
             "out_dir", "seed", "metric", "t_long", "long_dims", "series_stride"}


class ConfigError(ValueError):
    """The configuration is malformed or inconsistent."""


def _steps(t, dt, name):
    k = round(t / dt)
    if abs(k * dt - t) > 1e-12 * max(1.0, abs(t)):
        raise ConfigError(f"dt={dt} does not divide {name}={t}")
    return int(k)


@dataclass(frozen=True)
class ExperimentConfig:
    """One FOM / ROM study.

    Parameters
    ----------
    model : ModelSpec
    dt : float
        Time step shared by the FOM and all ROMs.
    t_train, t_test : float
        Training and test horizons; the FOM is integrated to ``t_test``.
    reduced_dims : tuple of int
        Even ROM sizes ``2r``.
    methods : tuple of str
        Any of ``hopinf``, ``intrusive``, ``opinf``.
    out_dir : str
    seed : int
        Unused; the pipeline is deterministic.
    metric : {"frobenius", "spectral"}
        Matrix norm of the relative state error.
    t_long : float, optional
        Longer ROM horizon used for the sizes in ``long_dims`` (energy
        monitoring past the FOM data).
    long_dims : tuple of int
    series_stride : int
        Write every ``series_stride``-th point of time series to CSV.
    """

    model: ModelSpec
    dt: float
    t_train: float
    t_test: float
    reduced_dims: tuple
    methods: tuple
    out_dir: str = "runs"
    seed: int = 0
    metric: str = "frobenius"
    t_long: float | None = None
    long_dims: tuple = field(default_factory=tuple)
    series_stride: int = 1

    def __post_init__(self):
        object.__setattr__(self, "reduced_dims", tuple(int(d) for d in self.reduced_dims))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "long_dims", tuple(int(d) for d in self.long_dims))
        self.validate()

    def validate(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not 0 < self.t_train <= self.t_test:
            raise ConfigError(
                f"need 0 < t_train <= t_test, got {self.t_train}, {self.t_test}")
        self.train_steps
        self.test_steps
        if not self.methods:
            raise ConfigError("methods must not be empty")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods contain duplicates")
        if not self.reduced_dims:
            raise ConfigError("reduced_dims must not be empty")
        for d in self.reduced_dims:
            if d <= 0 or d % 2 or d > 2 * self.model.n:
                raise ConfigError(
                    f"reduced dimension {d} must be even and in [2, {2 * self.model.n}]")
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.t_long is not None:
            if self.t_long < self.t_test:
                raise ConfigError("t_long must not be shorter than t_test")
            self.long_steps
        missing = set(self.long_dims) - set(self.reduced_dims)
        if missing:
            raise ConfigError(f"long_dims {sorted(missing)} not in reduced_dims")
        if self.long_dims and self.t_long is None:
            raise ConfigError("long_dims given without t_long")
        if int(self.series_stride) != self.series_stride or self.series_stride < 1:
            raise ConfigError("series_stride must be a positive integer")

    @property
    def train_steps(self):
        return _steps(self.t_train, self.dt, "t_train")

    @property
    def test_steps(self):
        return _steps(self.t_test, self.dt, "t_test")

    @property
    def long_steps(self):
        return _steps(self.t_long, self.dt, "t_long") if self.t_long else self.test_steps

    @property
    def max_dim(self):
        return max(self.reduced_dims)

    def horizon_steps(self, dim):
        return self.long_steps if dim in self.long_dims else self.test_steps

    @property
    def name(self):
        return self.model.kind.value

    def to_dict(self):
        return {"model": self.model.to_dict(), "dt": self.dt,
                "t_train": self.t_train, "t_test": self.t_test,
                "reduced_dims": list(self.reduced_dims),
                "methods": list(self.methods), "out_dir": str(self.out_dir),
                "seed": self.seed, "metric": self.metric, "t_long": self.t_long,
                "long_dims": list(self.long_dims),
                "series_stride": self.series_stride}

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        for key in ("model", "dt", "t_train", "t_test", "reduced_dims", "methods"):
            if key not in data:
                raise ConfigError(f"missing required key {key!r}")
        data = dict(data)
        try:
            data["model"] = _model_from_dict(data["model"])
            return cls(**data)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def with_out_dir(self, out_dir):
        data = self.to_dict()
        data["out_dir"] = str(out_dir)
        return ExperimentConfig.from_dict(data)


def _model_from_dict(data):
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError("model must be an object with a 'kind'")
    unknown = set(data) - _MODEL_KEYS
    if unknown:
        raise ConfigError(f"unknown model keys {sorted(unknown)}")
    try:
        kind = ModelKind(data["kind"])
    except ValueError as exc:
        raise ConfigError(
            f"unknown model kind {data['kind']!r}; choose from "
            f"{[k.value for k in ModelKind]}") from exc
    params = data.get("params", {})
    extra = set(params) - _MODEL_PARAMS[kind]
    if extra:
        raise ConfigError(f"unknown parameters {sorted(extra)} for {kind.value}")
    setup = {**DEFAULT_SETUPS[kind], **{k: v for k, v in data.items() if k != "kind"}}
    setup["params"] = {**DEFAULT_SETUPS[kind]["params"], **dict(setup["params"])}
    try:
        return ModelSpec(kind=kind, **setup)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {path} not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return ExperimentConfig.from_dict(data)
