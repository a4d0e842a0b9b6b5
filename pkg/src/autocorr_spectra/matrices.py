"""Lag-tau sample auto-covariance / auto-correlation matrices.

Two conventions are supported:

* centered: mean-subtracted over the first ``n`` rows, circular indexing
  (row ``n + i`` is row ``i``), divisor ``n - 1``;
* non-centered: raw rows, the lag window is rows ``tau .. n + tau - 1``
  of the panel (no wrap), divisor ``n``.

The auto-correlation rescales both sides by ``diag(S_0) ** -1/2`` computed
with the same convention, so the divisor cancels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO, Union

import numpy as np

from .data_gen import ErrorPanel
from .errors import DegenerateInputError

__all__ = [
    "LagMatrix",
    "SymProduct",
    "autocov",
    "autocorr",
    "sym_product",
    "normalized_trace",
    "write_matrix_csv",
]

# squared column norm below which a column counts as constant
ZERO_VARIANCE_THRESHOLD = 1e-30


@dataclass(frozen=True)
class LagMatrix:
    data: np.ndarray
    lag: int
    centered: bool
    normalized: bool
    n: int
    divisor: float

    @property
    def p(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class SymProduct:
    """``A A^t`` for a lag matrix ``A``; symmetric and PSD by construction."""

    data: np.ndarray
    source_lag: int

    @property
    def p(self) -> int:
        return self.data.shape[0]


def _as_panel(panel: Union[ErrorPanel, np.ndarray]) -> ErrorPanel:
    if isinstance(panel, ErrorPanel):
        return panel
    return ErrorPanel.from_array(panel)


def _windows(panel: ErrorPanel, tau: int, centered: bool) -> tuple[np.ndarray, np.ndarray]:
    n = panel.n
    if tau < 0:
        raise ValueError(f"lag must be >= 0, got {tau}")
    if tau >= n:
        raise ValueError(f"lag {tau} must be smaller than n = {n}")
    if centered:
        x0 = panel.data[:n] - panel.data[:n].mean(axis=0)
        xt = np.roll(x0, -tau, axis=0) if tau else x0
        return x0, xt
    if panel.rows < n + tau:
        raise ValueError(
            f"non-centered lag {tau} needs n + tau = {n + tau} rows, panel has {panel.rows} "
            f"(tau_max = {panel.tau_max})"
        )
    return panel.data[:n], panel.data[tau:n + tau]


def autocov(panel: Union[ErrorPanel, np.ndarray], tau: int, centered: bool) -> LagMatrix:
    """Lag-``tau`` sample auto-covariance ``(1/divisor) * X_0^t X_tau``."""
    panel = _as_panel(panel)
    x0, xt = _windows(panel, tau, centered)
    divisor = float(panel.n - 1 if centered else panel.n)
    s = (x0.T @ xt) / divisor
    return LagMatrix(s, lag=tau, centered=centered, normalized=False, n=panel.n, divisor=divisor)


def autocorr(panel: Union[ErrorPanel, np.ndarray], tau: int, centered: bool) -> LagMatrix:
    """Lag-``tau`` sample auto-correlation ``D S_tau D``, ``D = diag(S_0)^{-1/2}``.

    Raises
    ------
    DegenerateInputError
        If a column of the lag-0 window has (numerically) zero variance.
    """
    panel = _as_panel(panel)
    x0, xt = _windows(panel, tau, centered)
    sq = np.einsum("ij,ij->j", x0, x0)
    bad = np.flatnonzero(sq < ZERO_VARIANCE_THRESHOLD)
    if bad.size:
        raise DegenerateInputError(
            f"zero-variance column(s) {bad[:10].tolist()} in the lag-0 window"
        )
    inv = 1.0 / np.sqrt(sq)
    r = (x0 * inv).T @ (xt * inv)
    if tau == 0:
        # self-normalization is exact by definition
        np.fill_diagonal(r, 1.0)
    divisor = float(panel.n - 1 if centered else panel.n)
    return LagMatrix(r, lag=tau, centered=centered, normalized=True, n=panel.n, divisor=divisor)


def sym_product(m: Union[LagMatrix, np.ndarray]) -> SymProduct:
    a = m.data if isinstance(m, LagMatrix) else np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    prod = a @ a.T
    prod = 0.5 * (prod + prod.T)
    lag = m.lag if isinstance(m, LagMatrix) else -1
    return SymProduct(prod, source_lag=lag)


def normalized_trace(sp: Union[SymProduct, np.ndarray]) -> float:
    a = sp.data if isinstance(sp, SymProduct) else np.asarray(sp)
    return float(np.trace(a)) / a.shape[0]


def write_matrix_csv(matrix: Union[LagMatrix, SymProduct, np.ndarray], out: Union[str, TextIO]) -> None:
    """Row-major CSV, 17 significant digits, no header."""
    a = matrix if isinstance(matrix, np.ndarray) else matrix.data
    lines = [",".join(format(float(v), ".17g") for v in row) for row in a]
    text = "\n".join(lines) + "\n"
    if isinstance(out, str):
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)
