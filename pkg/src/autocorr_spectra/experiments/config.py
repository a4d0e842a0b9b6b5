"""Experiment configuration: JSON schema, defaults and validation."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Optional

from ..data_gen import DistributionSpec, FactorProcess
from ..errors import ConfigError

EXPERIMENTS = ("esd", "lambda_max", "compare_mp", "factor_demo", "custom")

# caption values of the published figures
DEFAULT_Y_VALUES = (0.5, 1.0, 1.5, 2.0)
DEFAULT_P_VALUES = (100, 200, 400)
DEFAULT_REPLICATIONS = {"lambda_max": 100}
DEFAULT_MASTER_SEED = 20220915


@dataclass(frozen=True)
class FactorSettings:
    k: int = 3
    loading_strength: float = 1.0
    factor_process: str = "ar1"
    phi: float = 0.5
    margin: float = 0.5

    def validate(self) -> None:
        if self.k < 0:
            raise ConfigError("factor.k must be >= 0")
        if self.loading_strength < 0:
            raise ConfigError("factor.loading_strength must be >= 0")
        try:
            proc = FactorProcess(self.factor_process)
        except ValueError:
            raise ConfigError(f"unknown factor.factor_process {self.factor_process!r}") from None
        if proc is FactorProcess.AR1 and not -1.0 < self.phi < 1.0:
            raise ConfigError("factor.phi must lie in (-1, 1)")
        if self.margin < 0:
            raise ConfigError("factor.margin must be >= 0")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a Monte Carlo campaign.

    ``p`` is derived per aspect ratio as ``round(y * n)``. The lambda-max
    experiment instead sweeps ``p_values`` and derives ``n = round(p / y)``.
    """

    experiment: str = "esd"
    n: int = 500
    y_values: tuple = DEFAULT_Y_VALUES
    tau: int = 1
    distribution: str = "normal"
    replications: Optional[int] = None
    master_seed: int = DEFAULT_MASTER_SEED
    centered: bool = True
    output_dir: str = "results"
    bins: int = 60
    p_values: tuple = DEFAULT_P_VALUES
    workers: int = 1
    factor: FactorSettings = field(default_factory=FactorSettings)

    # ------------------------------------------------------------------
    @property
    def dist(self) -> DistributionSpec:
        return DistributionSpec.parse(self.distribution)

    @property
    def reps(self) -> int:
        if self.replications is not None:
            return self.replications
        return DEFAULT_REPLICATIONS.get(self.experiment, 1)

    def p_for(self, y: float) -> int:
        return int(round(y * self.n))

    def resolved(self) -> "ExperimentConfig":
        """Copy with experiment-dependent defaults filled in."""
        return replace(self, replications=self.reps)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["y_values"] = list(self.y_values)
        d["p_values"] = list(self.p_values)
        return d

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if not isinstance(self.n, int) or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n!r}")
        if not self.y_values:
            raise ConfigError("y_values must be non-empty")
        for y in self.y_values:
            if not isinstance(y, (int, float)) or not y > 0:
                raise ConfigError(f"aspect ratios must be positive, got {y!r}")
            if self.experiment != "lambda_max" and self.p_for(y) < 1:
                raise ConfigError(f"y={y} with n={self.n} gives p < 1")
        if not isinstance(self.tau, int) or self.tau < 1:
            # the lag-0 baseline of compare_mp is built internally
            raise ConfigError(f"tau must be an integer >= 1, got {self.tau!r}")
        if self.tau >= self.n:
            raise ConfigError(f"tau={self.tau} must be smaller than n={self.n}")
        try:
            self.dist
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not isinstance(self.reps, int) or self.reps < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications!r}")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if not isinstance(self.bins, int) or self.bins < 10:
            raise ConfigError(f"bins must be an integer >= 10, got {self.bins!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.experiment == "lambda_max":
            if not self.p_values:
                raise ConfigError("p_values must be non-empty")
            for p in self.p_values:
                if not isinstance(p, int) or p < 1:
                    raise ConfigError(f"p_values entries must be positive integers, got {p!r}")
                for y in self.y_values:
                    n = int(round(p / y))
                    if n < 2 or self.tau >= n:
                        raise ConfigError(f"p={p}, y={y} gives n={n}, too small for tau={self.tau}")
        if self.experiment == "factor_demo":
            self.factor.validate()
        return self


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}
_FACTOR_FIELDS = {f.name for f in fields(FactorSettings)}


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(data)
    if "y_values" in kwargs:
        kwargs["y_values"] = tuple(_as_list(kwargs["y_values"], "y_values"))
    if "p_values" in kwargs:
        kwargs["p_values"] = tuple(_as_list(kwargs["p_values"], "p_values"))
    if "factor" in kwargs:
        fac = kwargs["factor"]
        if not isinstance(fac, dict):
            raise ConfigError("factor must be an object")
        bad = set(fac) - _FACTOR_FIELDS
        if bad:
            raise ConfigError(f"unknown factor keys: {sorted(bad)}")
        kwargs["factor"] = FactorSettings(**fac)
    return ExperimentConfig(**kwargs)


def _as_list(value, name: str) -> list:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{name} must be a list")
    return list(value)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(data)
