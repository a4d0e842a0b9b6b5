"""Limiting spectral law of ``R_tau R_tau^t`` and the Marchenko-Pastur law.

For aspect ratio ``y = lim p/n`` the limit law of the squared singular
values of a lag-tau (tau >= 1) sample auto-correlation matrix has Stieltjes
transform ``m`` solving

    z^2 y^2 m^3 + z y (y - 1) m^2 - z m - 1 = 0,

a closed-form density on ``(0, b]`` (y < 1) or ``[a, b]`` (y >= 1) and,
for ``y > 1``, an atom of mass ``1 - 1/y`` at zero. The density is
recovered from ``m`` by ``f(u) = lim (1/pi) Im m(u + i eps)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .errors import NumericalConsistencyError

__all__ = [
    "SpectralLaw",
    "MarchenkoPasturLaw",
    "StieltjesValue",
    "support_edges",
    "edge_quadratic",
    "lsd_density",
    "lsd_cdf",
    "stieltjes_m",
    "mp_edges",
    "mp_density",
    "mp_cdf",
]

ArrayLike = Union[float, np.ndarray]

_CBRT2 = 2.0 ** (1.0 / 3.0)
_CBRT4 = 2.0 ** (2.0 / 3.0)
_SQRT27 = 3.0 * math.sqrt(3.0)

IMAG_RESIDUE_TOL = 1e-8
NEGATIVE_CLAMP_TOL = 1e-10
CUBIC_RESIDUAL_TOL = 1e-10
ROOT_SIGN_TOL = 1e-12
# below this fraction of its term scale the braced expression has lost too many digits
CANCELLATION_TOL = 1e-4
QUAD_EPSABS = 1e-11
QUAD_EPSREL = 1e-10
# multiple of eps * (sum of |terms|) tolerated in a cubic residual
ROUNDING_SLACK = 64.0
_EPS = float(np.finfo(float).eps)


def _check_ratio(y: float) -> float:
    y = float(y)
    if not y > 0.0 or not math.isfinite(y):
        raise ValueError(f"aspect ratio y must be positive and finite, got {y}")
    return y


# ---------------------------------------------------------------------------
# support


def support_edges(y: float) -> tuple[float, float]:
    """Edges ``(a, b)`` of the limiting law.

    For ``y < 1`` the returned ``a`` is negative and purely informational:
    the support is ``(0, b]``. At ``y = 1`` the result is exactly ``(0, 6.75)``.
    """
    y = _check_ratio(y)
    base = -1.0 + 20.0 * y + 8.0 * y * y
    w = 1.0 + 8.0 * y
    r = w * math.sqrt(w)
    return (base - r) / 8.0, (base + r) / 8.0


def edge_quadratic(y: float) -> tuple[float, float, float]:
    """Coefficients ``(c2, c1, c0)`` of ``-4u^2 + (-1 + 4y(5 + 2y))u - 4y(y - 1)^3``.

    Its two roots are the edges ``a`` and ``b``; ``u`` times it is the
    radicand inside the density's ``d(u)``.
    """
    y = _check_ratio(y)
    return -4.0, -1.0 + 4.0 * y * (5.0 + 2.0 * y), -4.0 * y * (y - 1.0) ** 3


# ---------------------------------------------------------------------------
# closed-form density


def _inner(u: complex, y: float) -> tuple[complex, float]:
    """Braced expression of the closed form; ``(y pi u f(u))^2`` in exact arithmetic.

    Returns ``(inner, scale)`` where ``scale`` bounds the magnitude of the
    summed terms.
    """
    ym1 = y - 1.0
    ym1sq = ym1 * ym1
    c2, c1, c0 = edge_quadratic(y)
    rad = u * ((c2 * u + c1) * u + c0)
    d = -2.0 * ym1sq * ym1 + 9.0 * (1.0 + 2.0 * y) * u + _SQRT27 * cmath.sqrt(rad)
    c = d ** (1.0 / 3.0)
    g = 3.0 * u + ym1sq
    t = -8.0 * ym1 + 2.0 * _CBRT2 * g / c + _CBRT4 * c
    inner = (
        -u
        - 5.0 * ym1sq / 3.0
        + 2.0 * _CBRT2 * g * ym1 / (3.0 * c)
        + _CBRT4 * ym1 * c / 3.0
        + t * t / 48.0
    )
    scale = 1.0 + abs(u) + ym1sq + abs(c) ** 2
    return inner, scale


def _in_support(u: np.ndarray, y: float, a: float, b: float) -> np.ndarray:
    lo = 0.0 if y < 1.0 else a
    return (u > 0.0) & (u >= lo) & (u <= b)


def _check_inner(inner: complex, scale: float, u: float, y: float) -> None:
    if abs(inner.imag) > IMAG_RESIDUE_TOL * scale:
        raise NumericalConsistencyError(
            f"density at u={u!r}, y={y}: imaginary residue {inner.imag:.3g}"
        )
    if inner.real < -NEGATIVE_CLAMP_TOL * scale:
        raise NumericalConsistencyError(f"density at u={u!r}, y={y}: negative radicand {inner.real:.3g}")


def _density_on_axis(u: float, y: float) -> float:
    """``Im m(u + i0) / pi`` from the real-coefficient cubic.

    Used only where the closed form suffers cancellation (next to the
    support edges); the Cardano roots stay accurate to full precision there.
    """
    roots = _cubic_roots(u * u * y * y, u * y * (y - 1.0), -u, -1.0)
    return max(max(r.imag for r in roots), 0.0) / math.pi


def _density_scalar(u: float, y: float) -> float:
    inner, scale = _inner(complex(u), y)
    _check_inner(inner, scale, u, y)
    if inner.real < CANCELLATION_TOL * scale:
        return _density_on_axis(u, y)
    return math.sqrt(inner.real) / (y * math.pi * u)


def lsd_density(u: ArrayLike, y: float) -> ArrayLike:
    """Density of the limiting law at ``u`` (scalar or array).

    Zero outside the support. The lower edge ``u = 0`` (where the density
    is singular for ``y <= 1``) is treated as outside.
    """
    y = _check_ratio(y)
    a, b = support_edges(y)
    if np.ndim(u) == 0:
        u = float(u)
        if not (u > 0.0 and u <= b and (y < 1.0 or u >= a)):
            return 0.0
        return _density_scalar(u, y)
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros_like(u)
    mask = _in_support(u, y, a, b)
    if np.any(mask):
        # one scalar kernel for both paths keeps results bit-identical
        vals = [_density_scalar(float(v), y) for v in u[mask]]
        out[mask] = vals
    return out


# ---------------------------------------------------------------------------
# Stieltjes transform


@dataclass(frozen=True)
class StieltjesValue:
    z: complex
    m: complex
    y: float

    @property
    def residual(self) -> float:
        return abs(cubic_residual(self.m, self.z, self.y))


def cubic_residual(m: complex, z: complex, y: float) -> complex:
    return ((z * z * y * y * m + z * y * (y - 1.0)) * m - z) * m - 1.0


def residual_tolerance(m: complex, z: complex, y: float) -> float:
    """Accepted cubic residual at ``(m, z)``.

    ``1e-10 (1 + |z|^3)`` unless the terms of the cubic are so large (``|m|``
    blows up like ``1/|z|`` next to the atom at zero) that double rounding
    alone exceeds it; then a small multiple of ``eps`` times the term sum.
    """
    am, az = abs(m), abs(z)
    terms = az * az * y * y * am ** 3 + az * y * abs(y - 1.0) * am * am + az * am + 1.0
    return max(CUBIC_RESIDUAL_TOL * (1.0 + az ** 3), ROUNDING_SLACK * _EPS * terms)


def _cubic_roots(c3: complex, c2: complex, c1: complex, c0: complex) -> list[complex]:
    """Roots of ``c3 m^3 + c2 m^2 + c1 m + c0`` by Cardano plus Newton polishing."""
    b = c2 / c3
    c = c1 / c3
    d = c0 / c3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d
    disc = cmath.sqrt(q * q / 4.0 + p * p * p / 27.0)
    w1 = -q / 2.0 + disc
    w2 = -q / 2.0 - disc
    w = w1 if abs(w1) >= abs(w2) else w2
    roots = []
    if w == 0:
        roots = [-shift] * 3
    else:
        s = w ** (1.0 / 3.0)
        omega = complex(-0.5, math.sqrt(3.0) / 2.0)
        for k in range(3):
            sk = s * omega**k
            roots.append(sk - p / (3.0 * sk) - shift)

    def poly(x):
        return ((x + b) * x + c) * x + d

    def dpoly(x):
        return (3.0 * x + 2.0 * b) * x + c

    polished = []
    for r in roots:
        best, best_res = r, abs(poly(r))
        x = r
        for _ in range(4):
            dp = dpoly(x)
            if dp == 0:
                break
            x = x - poly(x) / dp
            res = abs(poly(x))
            if res < best_res:
                best, best_res = x, res
        polished.append(best)
    return polished


def stieltjes_m(z: complex, y: float) -> StieltjesValue:
    """Stieltjes transform of the limiting law at ``z`` in the upper half-plane.

    All three roots of the cubic are computed in closed form and polished.
    The transform is the unique root with ``Im m > 0`` and ``Im(z m) >= 0``;
    the second condition holds because the law lives on ``[0, inf)`` and is
    needed to discard a spurious root that also has ``Im m > 0`` when ``|z|``
    is large.

    Raises
    ------
    NumericalConsistencyError
        When no root or more than one root qualifies, when the cubic residual
        exceeds :func:`residual_tolerance`, or when the far-field behaviour
        ``m ~ -1/z`` is violated.
    """
    y = _check_ratio(y)
    z = complex(z)
    if not z.imag > 0.0:
        raise ValueError(f"z must lie in the upper half-plane, got {z}")
    roots = _cubic_roots(z * z * y * y, z * y * (y - 1.0), -z, -1.0)

    upper = [m for m in roots if m.imag > ROOT_SIGN_TOL * abs(m)]
    if len(upper) > 1:
        upper = [m for m in upper if (z * m).imag >= -ROOT_SIGN_TOL * abs(z * m)]
    if len(upper) != 1:
        raise NumericalConsistencyError(
            f"expected one Herglotz root at z={z}, y={y}; roots={roots}"
        )
    m = upper[0]
    res = abs(cubic_residual(m, z, y))
    if res > residual_tolerance(m, z, y):
        raise NumericalConsistencyError(f"cubic residual {res:.3g} at z={z}, y={y}")
    _, b = support_edges(y)
    if abs(z) > 1e4 * max(b, 1.0):
        if abs(z * m + 1.0) > 2.0 * b / abs(z) + 1e-8:
            raise NumericalConsistencyError(f"far-field check m ~ -1/z failed at z={z}")
    return StieltjesValue(z=z, m=m, y=y)


# ---------------------------------------------------------------------------
# distribution functions


def _integrate(
    density: Callable[[float], float], lo: float, u1: float, u2: float, power: int = 2
) -> float:
    """``int_{u1}^{u2} density`` for ``lo <= u1 <= u2``, via ``u = lo + s**power``.

    ``power=2`` removes ``(u - lo)^{-1/2}`` singularities and smooths
    square-root edges; ``power=3`` handles the ``(u - lo)^{-2/3}`` edge.
    """
    if u2 <= u1:
        return 0.0
    inv = 1.0 / power
    s1 = (u1 - lo) ** inv if u1 > lo else 0.0
    s2 = (u2 - lo) ** inv

    def g(s: float) -> float:
        u = lo + s**power
        if u <= 0.0:
            return 0.0
        return power * s ** (power - 1) * density(u)

    val, _ = integrate.quad(g, s1, s2, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
    return max(val, 0.0)


def _cdf_from_density(
    x: ArrayLike,
    density: Callable[[float], float],
    lo: float,
    hi: float,
    atom: float,
    power: int = 2,
) -> ArrayLike:
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty_like(xs)
    out[xs < 0.0] = 0.0
    nonneg = xs >= 0.0
    out[nonneg & (xs <= lo)] = atom
    interior = nonneg & (xs > lo)
    if np.any(interior):
        pts = np.minimum(xs[interior], hi)
        order = np.argsort(pts, kind="stable")
        sorted_pts = pts[order]
        acc = atom
        prev = lo
        vals = np.empty_like(sorted_pts)
        for i, t in enumerate(sorted_pts):
            if t > prev:
                acc += _integrate(density, lo, prev, t, power)
                prev = t
            vals[i] = acc
        res = np.empty_like(vals)
        res[order] = vals
        out[interior] = res
    if scalar:
        return float(out[0])
    return out


def lsd_cdf(x: ArrayLike, y: float) -> ArrayLike:
    """CDF of the limiting law: atom ``max(0, 1 - 1/y)`` at 0 plus the integrated density."""
    return SpectralLaw.from_ratio(y).cdf(x)


def mp_edges(y: float) -> tuple[float, float]:
    y = _check_ratio(y)
    r = math.sqrt(y)
    return (1.0 - r) ** 2, (1.0 + r) ** 2


def mp_density(u: ArrayLike, y: float) -> ArrayLike:
    """Marchenko-Pastur density (unit variance), zero outside ``[a, b]`` and at ``u = 0``."""
    y = _check_ratio(y)
    a, b = mp_edges(y)
    if np.ndim(u) == 0:
        u = float(u)
        if not (a <= u <= b) or u <= 0.0:
            return 0.0
        return math.sqrt(max((b - u) * (u - a), 0.0)) / (2.0 * math.pi * u * y)
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros_like(u)
    mask = (u >= a) & (u <= b) & (u > 0.0)
    um = u[mask]
    out[mask] = np.sqrt(np.maximum((b - um) * (um - a), 0.0)) / (2.0 * math.pi * um * y)
    return out


def mp_cdf(x: ArrayLike, y: float) -> ArrayLike:
    return MarchenkoPasturLaw.from_ratio(y).cdf(x)


# ---------------------------------------------------------------------------
# law objects


@dataclass(frozen=True)
class SpectralLaw:
    """Limiting law of ``R_tau R_tau^t`` for aspect ratio ``y``."""

    y: float
    a: float
    b: float
    point_mass_at_zero: float

    @classmethod
    def from_ratio(cls, y: float) -> "SpectralLaw":
        return _lsd_law(_check_ratio(y))

    @property
    def lower(self) -> float:
        """Lower end of the continuous part."""
        return 0.0 if self.y <= 1.0 else self.a

    def density(self, u: ArrayLike) -> ArrayLike:
        return lsd_density(u, self.y)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        return _cdf_from_density(
            x,
            lambda u: lsd_density(u, self.y),
            self.lower,
            self.b,
            self.point_mass_at_zero,
            self._power,
        )

    @property
    def _power(self) -> int:
        # the lower edge is a (u)^{-2/3} singularity only at y == 1
        return 3 if self.y == 1.0 else 2

    def continuous_mass(self) -> float:
        return _integrate(lambda u: lsd_density(u, self.y), self.lower, self.lower, self.b, self._power)


@dataclass(frozen=True)
class MarchenkoPasturLaw:
    """Marchenko-Pastur law with unit scale; the limit of sample correlation spectra."""

    y: float
    a: float
    b: float
    point_mass_at_zero: float

    @classmethod
    def from_ratio(cls, y: float) -> "MarchenkoPasturLaw":
        y = _check_ratio(y)
        a, b = mp_edges(y)
        return cls(y, a, b, max(0.0, 1.0 - 1.0 / y))

    @property
    def lower(self) -> float:
        return self.a

    def density(self, u: ArrayLike) -> ArrayLike:
        return mp_density(u, self.y)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        return _cdf_from_density(
            x, lambda u: mp_density(u, self.y), self.a, self.b, self.point_mass_at_zero
        )

    def continuous_mass(self) -> float:
        return _integrate(lambda u: mp_density(u, self.y), self.a, self.a, self.b)


@lru_cache(maxsize=256)
def _lsd_law(y: float) -> SpectralLaw:
    a, b = support_edges(y)
    return SpectralLaw(y=y, a=a, b=b, point_mass_at_zero=max(0.0, 1.0 - 1.0 / y))

