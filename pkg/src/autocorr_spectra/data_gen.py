"""Noise panels and factor-model observation panels.

Every panel is a deterministic function of its arguments and a 64-bit seed.
Replications get their own seed through :func:`derive_replication_seed`, so
campaigns reproduce bit-for-bit regardless of how work is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

__all__ = [
    "DistributionKind",
    "DistributionSpec",
    "ErrorPanel",
    "FactorProcess",
    "FactorModelConfig",
    "derive_replication_seed",
    "sample_error_panel",
    "sample_factor_panel",
]

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# tags for sub-streams of a factor panel; the noise itself uses the raw seed
_FACTOR_STREAM = 0xFAC7
_LOADING_STREAM = 0x10AD


class DistributionKind(str, Enum):
    STANDARD_NORMAL = "normal"
    RADEMACHER = "rademacher"
    CENTERED_UNIFORM = "uniform"
    STUDENT_T = "student_t"


@dataclass(frozen=True)
class DistributionSpec:
    """Law of the i.i.d. noise entries.

    All kinds are standardized to mean 0 and variance 1 and have a finite
    absolute moment of order > 4. Student-t therefore needs ``df >= 5``.
    """

    kind: DistributionKind = DistributionKind.STANDARD_NORMAL
    df: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DistributionKind(self.kind))
        if self.kind is DistributionKind.STUDENT_T:
            if self.df is None or int(self.df) != self.df:
                raise ValueError("student_t requires an integer df")
            if self.df <= 4:
                raise ValueError(
                    f"student_t df={self.df} has no finite (4+delta)-th moment; need df >= 5"
                )
        elif self.df is not None:
            raise ValueError(f"df only applies to student_t, got kind={self.kind.value}")

    @classmethod
    def parse(cls, text: str) -> "DistributionSpec":
        """Parse ``normal``, ``rademacher``, ``uniform`` or ``student_t:<df>`` / ``t<df>``."""
        s = text.strip().lower()
        if s in ("normal", "gaussian", "standard_normal"):
            return cls(DistributionKind.STANDARD_NORMAL)
        if s == "rademacher":
            return cls(DistributionKind.RADEMACHER)
        if s in ("uniform", "centered_uniform"):
            return cls(DistributionKind.CENTERED_UNIFORM)
        for prefix in ("student_t:", "t:", "t"):
            if s.startswith(prefix):
                try:
                    df = int(s[len(prefix):])
                except ValueError:
                    break
                return cls(DistributionKind.STUDENT_T, df)
        raise ValueError(f"unknown distribution {text!r}")

    def label(self) -> str:
        if self.kind is DistributionKind.STUDENT_T:
            return f"student_t:{self.df}"
        return self.kind.value

    def draw(self, rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
        kind = self.kind
        if kind is DistributionKind.STANDARD_NORMAL:
            return rng.standard_normal(shape)
        if kind is DistributionKind.RADEMACHER:
            return (2 * rng.integers(0, 2, size=shape) - 1).astype(np.float64)
        if kind is DistributionKind.CENTERED_UNIFORM:
            h = math.sqrt(3.0)
            return rng.uniform(-h, h, size=shape)
        df = self.df
        return rng.standard_t(df, size=shape) / math.sqrt(df / (df - 2.0))


@dataclass(frozen=True)
class ErrorPanel:
    """A ``rows x p`` panel; ``rows = n + tau_max``.

    Row ``i`` is the observation vector at time ``i``. The first ``n`` rows
    form the lag-0 window; the extra ``tau_max`` rows feed the shifted
    windows of the non-centered builders.
    """

    data: np.ndarray
    n: int
    tau_max: int
    seed: int

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    p = cols

    def __post_init__(self) -> None:
        if self.data.ndim != 2:
            raise ValueError("panel data must be two-dimensional")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.tau_max < 0:
            raise ValueError("tau_max must be >= 0")
        if self.data.shape[0] != self.n + self.tau_max:
            raise ValueError(
                f"panel has {self.data.shape[0]} rows, expected n + tau_max = {self.n + self.tau_max}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("panel contains non-finite entries")

    @classmethod
    def from_array(cls, data, n: Optional[int] = None, seed: int = 0) -> "ErrorPanel":
        """Wrap an existing array; by default every row belongs to the lag-0 window."""
        arr = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
        if arr.ndim == 1:
            arr = arr[:, None]
        n = arr.shape[0] if n is None else n
        return cls(arr, n=n, tau_max=arr.shape[0] - n, seed=seed)


class FactorProcess(str, Enum):
    IID_NORMAL = "iid_normal"
    AR1 = "ar1"


@dataclass(frozen=True)
class FactorModelConfig:
    """``y_i = mu + B f_i + eps_i`` with ``k`` latent factors.

    ``loadings`` is ``p x k``. An all-zero loading matrix is accepted as the
    null model; otherwise it must have full column rank.
    """

    loadings: np.ndarray
    mean: Optional[np.ndarray] = None
    factor_process: FactorProcess = FactorProcess.IID_NORMAL
    phi: float = 0.0

    def __post_init__(self) -> None:
        B = np.asarray(self.loadings, dtype=np.float64)
        if B.ndim != 2:
            raise ValueError("loadings must be a p x k matrix")
        object.__setattr__(self, "loadings", B)
        object.__setattr__(self, "factor_process", FactorProcess(self.factor_process))
        if self.mean is not None:
            mu = np.asarray(self.mean, dtype=np.float64)
            if mu.shape != (B.shape[0],):
                raise ValueError(f"mean has shape {mu.shape}, expected ({B.shape[0]},)")
            object.__setattr__(self, "mean", mu)
        if self.factor_process is FactorProcess.AR1 and not -1.0 < self.phi < 1.0:
            raise ValueError(f"AR(1) coefficient must lie in (-1, 1), got {self.phi}")
        k = B.shape[1]
        if k >= 1 and np.any(B != 0.0):
            sv = np.linalg.svd(B, compute_uv=False)
            if sv[-1] <= 1e-10 * sv[0]:
                raise ValueError("loadings must have full column rank")

    @property
    def p(self) -> int:
        return self.loadings.shape[0]

    @property
    def k(self) -> int:
        return self.loadings.shape[1]


def _splitmix64(x: int) -> int:
    z = (x + _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_replication_seed(master_seed: int, replication_index: int) -> int:
    """Seed of replication ``replication_index`` under ``master_seed``.

    The counter ``master + i * gamma`` is injective in ``i`` modulo 2**64
    (gamma is odd) and the SplitMix64 finalizer is a bijection, so distinct
    indices always give distinct seeds.
    """
    if replication_index < 0:
        raise ValueError("replication_index must be >= 0")
    counter = (int(master_seed) + int(replication_index) * _GOLDEN_GAMMA) & _MASK64
    return _splitmix64(counter)


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def sample_error_panel(
    spec: DistributionSpec, n: int, p: int, tau_max: int, seed: int
) -> ErrorPanel:
    """Draw an ``(n + tau_max) x p`` panel of i.i.d. entries from ``spec``."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if tau_max < 0:
        raise ValueError(f"tau_max must be >= 0, got {tau_max}")
    data = spec.draw(_generator(seed), (n + tau_max, p))
    return ErrorPanel(np.ascontiguousarray(data), n=n, tau_max=tau_max, seed=int(seed))


def _factor_path(cfg: FactorModelConfig, rows: int, seed: int) -> np.ndarray:
    rng = _generator(derive_replication_seed(seed, _FACTOR_STREAM))
    shocks = rng.standard_normal((rows, cfg.k))
    if cfg.factor_process is FactorProcess.IID_NORMAL:
        return shocks
    # stationary AR(1) with unit marginal variance
    phi = cfg.phi
    scale = math.sqrt(1.0 - phi * phi)
    f = np.empty_like(shocks)
    f[0] = shocks[0]
    for i in range(1, rows):
        f[i] = phi * f[i - 1] + scale * shocks[i]
    return f


def sample_factor_panel(
    cfg: FactorModelConfig,
    spec: DistributionSpec,
    n: int,
    tau_max: int,
    seed: int,
) -> ErrorPanel:
    """Observation panel ``y_i = mu + B f_i + eps_i``.

    The noise is exactly ``sample_error_panel(spec, n, p, tau_max, seed)``;
    the factors come from an independent stream derived from ``seed``.
    """
    noise = sample_error_panel(spec, n, cfg.p, tau_max, seed)
    y = noise.data.copy()
    if cfg.k > 0:
        f = _factor_path(cfg, noise.rows, seed)
        y += f @ cfg.loadings.T
    if cfg.mean is not None:
        y += cfg.mean
    return ErrorPanel(y, n=n, tau_max=tau_max, seed=int(seed))


def random_loadings(p: int, k: int, strength: float, seed: int) -> np.ndarray:
    """Gaussian ``p x k`` loadings whose columns have norm about ``strength * sqrt(p)``."""
    rng = _generator(derive_replication_seed(seed, _LOADING_STREAM))
    return strength * rng.standard_normal((p, k))
