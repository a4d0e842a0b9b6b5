"""Dense symmetric eigenvalues and singular values with a-posteriori checks.

LAPACK (``dsyevd`` via numpy / ``dsyevr`` via scipy) does the work; this
module adds input validation, a residual bound, PSD clamping and a
deterministic power-iteration alternative for the top eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, NumericalConsistencyError

__all__ = ["Spectrum", "sym_eigenvalues", "singular_values", "largest_eigenvalue"]

SYMMETRY_TOL = 1e-10
RESIDUAL_TOL = 1e-8
# negative eigenvalues of a PSD product within this fraction of lambda_max are roundoff
PSD_CLAMP_TOL = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in ascending order.

    ``residual_bound`` is ``max_j ||A v_j - lambda_j v_j|| / ||A||_2`` over the
    computed pairs, or ``nan`` when the residual was not evaluated.
    """

    values: np.ndarray
    residual_bound: float = float("nan")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def max(self) -> float:
        return float(self.values[-1])


def _check_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _check_symmetric(a: np.ndarray) -> None:
    scale = np.max(np.abs(a)) if a.size else 0.0
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if asym > SYMMETRY_TOL * scale:
        raise ValueError(f"matrix is not symmetric (max |A - A^t| = {asym:.3g})")


def _clamp_psd(values: np.ndarray) -> np.ndarray:
    top = max(float(values[-1]), 0.0)
    floor = -PSD_CLAMP_TOL * top
    if values[0] < floor:
        raise NumericalConsistencyError(
            f"PSD input has eigenvalue {values[0]:.3g} below -{PSD_CLAMP_TOL:g} * lambda_max"
        )
    return np.where(values < 0.0, 0.0, values)


def sym_eigenvalues(a, *, psd: bool = False, check: bool = True) -> Spectrum:
    """All eigenvalues of a symmetric matrix, ascending.

    Parameters
    ----------
    a : (p, p) array_like
        Symmetric input (checked to ``1e-10 * max|A|``).
    psd : bool
        The input is positive semidefinite by construction; eigenvalues in
        ``[-1e-8 * lambda_max, 0)`` are set to zero and anything more
        negative raises :class:`NumericalConsistencyError`.
    check : bool
        Compute eigenvectors as well to evaluate the residual bound and the
        trace identity. Costs roughly twice as much as values alone.
    """
    a = _check_matrix(a)
    _check_symmetric(a)
    p = a.shape[0]
    if p == 0:
        raise ValueError("empty matrix")
    if check:
        w, v = np.linalg.eigh(a)
        norm = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
        resid = np.linalg.norm(a @ v - v * w, axis=0)
        bound = float(np.max(resid)) / norm
        if bound > RESIDUAL_TOL:
            raise NumericalConsistencyError(f"eigen-residual {bound:.3g} exceeds {RESIDUAL_TOL:g}")
        maxabs = float(np.max(np.abs(a)))
        trace_gap = abs(float(np.sum(w)) - float(np.trace(a)))
        if trace_gap > RESIDUAL_TOL * p * max(maxabs, np.finfo(float).tiny):
            raise NumericalConsistencyError(f"trace mismatch {trace_gap:.3g}")
    else:
        w = np.linalg.eigvalsh(a)
        bound = float("nan")
    if psd:
        w = _clamp_psd(w)
    return Spectrum(np.ascontiguousarray(w), bound)


def singular_values(a, *, check: bool = True) -> Spectrum:
    """Singular values of a square matrix, ascending, as ``sqrt(eig(A A^t))``."""
    a = _check_matrix(a)
    prod = a @ a.T
    prod = 0.5 * (prod + prod.T)
    spec = sym_eigenvalues(prod, psd=True, check=check)
    return Spectrum(np.sqrt(spec.values), spec.residual_bound)


def largest_eigenvalue(
    a,
    *,
    method: str = "lapack",
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> float:
    """Largest eigenvalue of a symmetric matrix.

    ``method="lapack"`` computes only the top eigenvalue with ``dsyevr``.
    ``method="power"`` runs a shifted power iteration from a fixed start
    vector and stops once the relative residual drops below ``tol``; it
    raises :class:`ConvergenceError` after ``max_iter`` steps, in which case
    callers should fall back to the full solve.
    """
    a = _check_matrix(a)
    _check_symmetric(a)
    p = a.shape[0]
    if method == "lapack":
        w = scipy.linalg.eigvalsh(a, subset_by_index=[p - 1, p - 1], check_finite=False)
        return float(w[-1])
    if method != "power":
        raise ValueError(f"unknown method {method!r}")

    # Gershgorin shift makes the spectrum nonnegative so the top eigenvalue dominates
    radius = float(np.max(np.sum(np.abs(a), axis=1)))
    if radius == 0.0:
        return 0.0
    shifted = a + radius * np.eye(p)
    v = 1.0 + np.arange(p, dtype=np.float64) / p
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = shifted @ v
        lam = float(v @ w)
        r = np.linalg.norm(w - lam * v)
        if r <= tol * abs(lam):
            return lam - radius
        v = w / np.linalg.norm(w)
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")
