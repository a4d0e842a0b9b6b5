"""Empirical spectral distributions and distances between distribution functions."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .linalg import Spectrum

__all__ = [
    "Ecdf",
    "EigenvalueSummary",
    "esd",
    "ks_distance",
    "levy_distance",
    "eigenvalue_summary",
    "zero_eigenvalue_count",
    "write_ecdf_csv",
]

ZERO_EIGENVALUE_RTOL = 1e-8


@dataclass(frozen=True)
class Ecdf:
    """Right-continuous step CDF with mass ``1/len`` on each support point."""

    support_points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.sort(np.asarray(self.support_points, dtype=np.float64))
        if pts.size == 0:
            raise ValueError("empirical distribution needs at least one point")
        object.__setattr__(self, "support_points", pts)

    def __len__(self) -> int:
        return self.support_points.size

    def __call__(self, x):
        return np.searchsorted(self.support_points, x, side="right") / self.support_points.size

    def left(self, x):
        """Left limit ``F(x-)``."""
        return np.searchsorted(self.support_points, x, side="left") / self.support_points.size

    def cdf(self, x):
        return self(x)


def esd(
    spectrum: Union[Spectrum, Sequence[float], np.ndarray],
    *,
    zero_rtol: Optional[float] = None,
) -> Ecdf:
    """Empirical spectral distribution of a spectrum.

    With ``zero_rtol`` set, eigenvalues with ``|lambda| <= zero_rtol * max|lambda|``
    are snapped to exactly 0 so that a rank-deficit atom lines up with a
    theoretical point mass at the origin.
    """
    values = np.array(spectrum.values if isinstance(spectrum, Spectrum) else spectrum, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty spectrum")
    if zero_rtol is not None:
        top = float(np.max(np.abs(values)))
        values[np.abs(values) <= zero_rtol * top] = 0.0
    return Ecdf(values)


def _as_cdf(obj) -> Callable:
    if isinstance(obj, Ecdf):
        return obj
    if hasattr(obj, "cdf"):
        return obj.cdf
    if callable(obj):
        return obj
    raise TypeError(f"cannot treat {type(obj).__name__} as a distribution function")


def _atom_at_zero(obj) -> float:
    return float(getattr(obj, "point_mass_at_zero", 0.0))


def _ks_ecdf_vs_law(f: Ecdf, law) -> float:
    pts = np.unique(f.support_points)
    g = np.asarray(_as_cdf(law)(pts), dtype=np.float64)
    g_left = g.copy()
    atom = _atom_at_zero(law)
    if atom:
        g_left[pts == 0.0] -= atom
    right = np.abs(f(pts) - g)
    left = np.abs(f.left(pts) - g_left)
    return float(max(right.max(), left.max()))


def ks_distance(F, G, *, grid_size: int = 4000) -> float:
    """Sup-norm distance ``sup_x |F(x) - G(x)|``.

    Either argument may be an :class:`Ecdf` or an analytic law (an object
    with a vectorized ``cdf`` method and optional ``point_mass_at_zero``).
    With at least one ECDF the supremum is exact: both sides are evaluated
    at every jump point, including left limits. Two analytic laws are
    compared on a ``grid_size`` grid spanning both supports, which gives a
    lower bound on the supremum.
    """
    if isinstance(F, Ecdf) and isinstance(G, Ecdf):
        pts = np.union1d(F.support_points, G.support_points)
        return float(np.max(np.abs(F(pts) - G(pts))))
    if isinstance(F, Ecdf):
        return _ks_ecdf_vs_law(F, G)
    if isinstance(G, Ecdf):
        return _ks_ecdf_vs_law(G, F)
    hi = max(getattr(F, "b", 1.0), getattr(G, "b", 1.0))
    grid = np.union1d(np.linspace(0.0, hi * 1.01, grid_size), [0.0])
    fv = np.asarray(_as_cdf(F)(grid))
    gv = np.asarray(_as_cdf(G)(grid))
    return float(np.max(np.abs(fv - gv)))


def _levy_feasible(F: Ecdf, G: Ecdf, eps: float) -> bool:
    fp, gp = F.support_points, G.support_points
    slack = eps + 1e-15
    # G(x) <= F(x + eps) + eps; breakpoints are jumps of G and jumps of F shifted by -eps
    h1 = max(
        float(np.max(G(gp) - F(gp + eps))),
        float(np.max(G(fp - eps) - F(fp))),
    )
    if h1 > slack:
        return False
    # F(x - eps) - eps <= G(x); breakpoints are jumps of G and jumps of F shifted by +eps
    h2 = max(
        float(np.max(F(gp - eps) - G(gp))),
        float(np.max(F(fp) - G(fp + eps))),
    )
    return h2 <= slack


def levy_distance(F: Ecdf, G: Ecdf, *, tol: float = 1e-9) -> float:
    """Levy distance ``inf{eps : F(x-eps)-eps <= G(x) <= F(x+eps)+eps for all x}``.

    Feasibility of a candidate ``eps`` is decided exactly on the merged jump
    set (both step functions are right-continuous, so each one-sided gap
    attains its supremum at a breakpoint). Feasibility is monotone in ``eps``
    and always holds at ``eps = 1``, so bisection on ``[0, 1]`` converges.
    """
    if not isinstance(F, Ecdf):
        F = esd(F)
    if not isinstance(G, Ecdf):
        G = esd(G)
    if _levy_feasible(F, G, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _levy_feasible(F, G, mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class EigenvalueSummary:
    """Per-replication largest eigenvalues and their boxplot statistics."""

    lambda_max: list
    median: float
    q1: float
    q3: float
    min: float
    max: float
    whisker_low: float
    whisker_high: float
    mean: float

    def to_dict(self) -> dict:
        return asdict(self)


def eigenvalue_summary(spectra: Iterable[Union[Spectrum, float]]) -> EigenvalueSummary:
    """Boxplot ingredients of the largest eigenvalue across replications.

    Accepts spectra or precomputed largest eigenvalues. Quartiles use linear
    interpolation; whiskers extend to the most extreme observations within
    1.5 IQR of the box.
    """
    lam = []
    for s in spectra:
        lam.append(float(s.values[-1]) if isinstance(s, Spectrum) else float(s))
    if not lam:
        raise ValueError("need at least one spectrum")
    arr = np.asarray(lam)
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    inside = arr[(arr >= q1 - 1.5 * iqr) & (arr <= q3 + 1.5 * iqr)]
    return EigenvalueSummary(
        lambda_max=lam,
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        min=float(arr.min()),
        max=float(arr.max()),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        mean=float(arr.mean()),
    )


def zero_eigenvalue_count(spectrum: Union[Spectrum, np.ndarray], rtol: float = ZERO_EIGENVALUE_RTOL) -> int:
    """Number of eigenvalues at most ``rtol * lambda_max`` in absolute value."""
    values = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    top = float(np.max(np.abs(values)))
    return int(np.count_nonzero(np.abs(values) <= rtol * top))


def write_ecdf_csv(f: Ecdf, out: Union[str, TextIO]) -> None:
    """Two columns ``x,F(x)`` at the distinct support points."""
    pts = np.unique(f.support_points)
    vals = f(pts)
    lines = ["x,F"] + [f"{x:.17g},{v:.17g}" for x, v in zip(pts, vals)]
    text = "\n".join(lines) + "\n"
    if isinstance(out, str):
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)
