"""Monte Carlo campaigns behind the ``spectra`` command.

Every replication draws from its own seed,
``derive_replication_seed(derive_replication_seed(master, cell), rep)``,
so results do not depend on scheduling or on the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence, TypeVar

import numpy as np

from ..data_gen import (
    ErrorPanel,
    FactorModelConfig,
    derive_replication_seed,
    random_loadings,
    sample_error_panel,
    sample_factor_panel,
)
from ..empirics import ZERO_EIGENVALUE_RTOL, eigenvalue_summary, esd, ks_distance, zero_eigenvalue_count
from ..errors import ConfigError
from ..linalg import Spectrum, largest_eigenvalue, singular_values, sym_eigenvalues
from ..matrices import autocorr, sym_product
from ..theory import MarchenkoPasturLaw, SpectralLaw, support_edges
from .config import ExperimentConfig
from .io import write_csv, write_json, write_text
from .svg import BoxGroup, Curve, Histogram, boxplot_svg, overlay_svg

__all__ = [
    "ExperimentResult",
    "cell_seed",
    "density_grid",
    "run_esd_experiment",
    "run_lambda_max_experiment",
    "run_compare_mp_experiment",
    "run_factor_demo",
    "run_experiment",
]

DENSITY_GRID_POINTS = 400
FACTOR_DEMO_NOTE = "demonstration only: the outlier count is a heuristic with no supporting theorem"

T = TypeVar("T")


@dataclass
class ExperimentResult:
    output_dir: Path
    summaries: list = field(default_factory=list)


def cell_seed(master_seed: int, cell_index: int, replication: int) -> int:
    return derive_replication_seed(derive_replication_seed(master_seed, cell_index), replication)


def _map_reps(fn: Callable[[int], T], reps: int, workers: int) -> list[T]:
    """Run ``fn(rep)`` for every replication; results are ordered by index."""
    if workers <= 1 or reps <= 1:
        return [fn(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(reps)))


def _prepare(cfg: ExperimentConfig, expected: str) -> ExperimentConfig:
    if cfg.experiment not in (expected, "custom"):
        raise ConfigError(f"config is for experiment {cfg.experiment!r}, not {expected!r}")
    return replace(cfg, experiment=expected).validate().resolved()


def _cell_dir(root: Path, y: float) -> Path:
    d = root / f"y_{y:g}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def _panel(cfg: ExperimentConfig, n: int, p: int, seed: int) -> ErrorPanel:
    return sample_error_panel(cfg.dist, n, p, cfg.tau, seed)


def _rstar_spectrum(panel: ErrorPanel, tau: int, centered: bool) -> Spectrum:
    r = autocorr(panel, tau, centered)
    return sym_eigenvalues(sym_product(r).data, psd=True)


def density_grid(law, points: int = DENSITY_GRID_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint grid on the continuous support, avoiding the edge singularities."""
    lo, hi = law.lower, law.b
    u = lo + (hi - lo) * (np.arange(points) + 0.5) / points
    return u, np.asarray(law.density(u), dtype=np.float64)


def _histogram(values: np.ndarray, total: int, bins: int, hi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Density-scale histogram ``count / (total * width)`` of the given values."""
    edges = np.linspace(0.0, hi, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    width = edges[1] - edges[0]
    return edges, counts, counts / (total * width)


def _nonzero(spec: Spectrum) -> np.ndarray:
    top = float(np.max(np.abs(spec.values)))
    return spec.values[np.abs(spec.values) > ZERO_EIGENVALUE_RTOL * top]


def _eigen_rows(spectra: Sequence[Spectrum]):
    for rep, s in enumerate(spectra):
        for i, v in enumerate(s.values):
            yield rep, i, float(v)


def _write_hist(path: Path, edges, counts, heights) -> None:
    write_csv(
        path,
        ["bin_left", "bin_right", "count", "density"],
        zip(edges[:-1], edges[1:], counts.tolist(), heights),
    )


def _pooled_histogram(spectra: Sequence[Spectrum], bins: int, hi: float):
    cont = np.concatenate([_nonzero(s) for s in spectra])
    total = sum(len(s) for s in spectra)
    edges, counts, heights = _histogram(cont, total, bins, hi)
    return edges, counts, heights, total - cont.size


def _ks_pair(spectra: Sequence[Spectrum], law) -> tuple[list, float]:
    per_rep = [ks_distance(esd(s, zero_rtol=ZERO_EIGENVALUE_RTOL), law) for s in spectra]
    pooled = ks_distance(esd(np.concatenate([s.values for s in spectra]), zero_rtol=ZERO_EIGENVALUE_RTOL), law)
    return per_rep, pooled


def _y_cap(heights: np.ndarray) -> float | None:
    return 1.6 * float(np.max(heights)) if heights.size and np.max(heights) > 0 else None


# ----------------------------------------------------------------------
# Esd: histogram of R*_tau against the limiting density


def run_esd_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    cfg = _prepare(cfg, "esd")
    root = Path(cfg.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    result = ExperimentResult(root)
    for iy, y in enumerate(cfg.y_values):
        p, n = cfg.p_for(y), cfg.n
        law = SpectralLaw.from_ratio(float(y))
        seeds = [cell_seed(cfg.master_seed, iy, r) for r in range(cfg.reps)]

        def one(r: int) -> Spectrum:
            return _rstar_spectrum(_panel(cfg, n, p, seeds[r]), cfg.tau, cfg.centered)

        spectra = _map_reps(one, cfg.reps, cfg.workers)
        out = _cell_dir(root, y)
        write_csv(out / "eigenvalues.csv", ["replication", "index", "eigenvalue"], _eigen_rows(spectra))

        hi = max(law.b, max(s.max for s in spectra)) * 1.02
        edges, counts, heights, excluded = _pooled_histogram(spectra, cfg.bins, hi)
        _write_hist(out / "histogram.csv", edges, counts, heights)
        u, f = density_grid(law)
        write_csv(out / "density.csv", ["u", "density"], zip(u, f))

        ks_reps, ks_pooled = _ks_pair(spectra, law)
        label = "centered" if cfg.centered else "non-centered"
        svg = overlay_svg(
            [Histogram(edges, heights, f"ESD of R*_{cfg.tau} ({label})")],
            [Curve(u, f, "limiting density")],
            title=f"y = {y:g}, p = {p}, n = {n}",
            y_cap=_y_cap(heights),
        )
        write_text(out / "overlay.svg", svg)

        total = sum(len(s) for s in spectra)
        summary = {
            "config": cfg.to_dict(),
            "y": float(y),
            "p": p,
            "n": n,
            "support": {"a": law.a, "b": law.b},
            "point_mass_at_zero": law.point_mass_at_zero,
            "zero_eigenvalues": [zero_eigenvalue_count(s) for s in spectra],
            "zero_fraction": excluded / total,
            "histogram_excluded_zero_count": excluded,
            "ks": ks_reps,
            "ks_pooled": ks_pooled,
            "ks_max": max(ks_reps),
            "lambda_max": [s.max for s in spectra],
            "normalized_trace": [float(np.mean(s.values)) for s in spectra],
            "seeds": seeds,
        }
        write_json(out / "summary.json", summary)
        result.summaries.append(summary)
    _write_index(root, cfg, result)
    return result


def _write_index(root: Path, cfg: ExperimentConfig, result: ExperimentResult) -> None:
    cells = []
    for s in result.summaries:
        cells.append({k: s[k] for k in s if k in ("y", "p", "n", "ks_pooled", "ks_max", "ks_r0_mp_pooled",
                                                     "ks_rstar_mp_pooled", "outlier_counts")})
    write_json(root / "summary.json", {"config": cfg.to_dict(), "cells": cells})


# ----------------------------------------------------------------------
# LambdaMaxBoxplot: largest eigenvalue of R*_tau across replications


def run_lambda_max_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    cfg = _prepare(cfg, "lambda_max")
    root = Path(cfg.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    result = ExperimentResult(root)
    rows, groups, cells = [], [], []
    cell = 0
    for y in cfg.y_values:
        b = support_edges(float(y))[1]
        for p in cfg.p_values:
            n = int(round(p / y))
            seeds = [cell_seed(cfg.master_seed, cell, r) for r in range(cfg.reps)]
            cell += 1

            def one(r: int) -> float:
                r1 = autocorr(_panel(cfg, n, p, seeds[r]), cfg.tau, cfg.centered)
                return largest_eigenvalue(sym_product(r1).data)

            lam = _map_reps(one, cfg.reps, cfg.workers)
            rows.extend((float(y), p, n, r, seeds[r], v) for r, v in enumerate(lam))
            summ = eigenvalue_summary(lam)
            entry = {"y": float(y), "p": p, "n": n, "b": b, **summ.to_dict()}
            cells.append(entry)
            outliers = [v for v in lam if v < summ.whisker_low or v > summ.whisker_high]
            groups.append(
                BoxGroup(f"y={y:g} p={p}", summ.q1, summ.median, summ.q3, summ.whisker_low,
                         summ.whisker_high, outliers, reference=b)
            )
    write_csv(root / "lambda_max.csv", ["y", "p", "n", "replication", "seed", "lambda_max"], rows)
    write_json(root / "boxstats.json", {"config": cfg.to_dict(), "cells": cells})
    write_text(
        root / "boxplot.svg",
        boxplot_svg(groups, title=f"largest eigenvalue of R*_{cfg.tau}, {cfg.reps} replications", xlabel="(y, p)"),
    )
    result.summaries = cells
    return result


# ----------------------------------------------------------------------
# CompareMp: lag-tau R*_tau versus the lag-0 correlation matrix


def run_compare_mp_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    cfg = _prepare(cfg, "compare_mp")
    root = Path(cfg.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    result = ExperimentResult(root)
    for iy, y in enumerate(cfg.y_values):
        p, n = cfg.p_for(y), cfg.n
        lsd = SpectralLaw.from_ratio(float(y))
        mp = MarchenkoPasturLaw.from_ratio(float(y))
        seeds = [cell_seed(cfg.master_seed, iy, r) for r in range(cfg.reps)]

        def one(r: int) -> tuple[Spectrum, Spectrum]:
            panel = _panel(cfg, n, p, seeds[r])
            rstar = _rstar_spectrum(panel, cfg.tau, cfg.centered)
            # R_0 is symmetric, so its own eigenvalues are used
            r0 = sym_eigenvalues(autocorr(panel, 0, cfg.centered).data, psd=True)
            return rstar, r0

        pairs = _map_reps(one, cfg.reps, cfg.workers)
        rstar = [a for a, _ in pairs]
        r0 = [b for _, b in pairs]
        out = _cell_dir(root, y)
        write_csv(out / "eigenvalues_rstar.csv", ["replication", "index", "eigenvalue"], _eigen_rows(rstar))
        write_csv(out / "eigenvalues_r0.csv", ["replication", "index", "eigenvalue"], _eigen_rows(r0))

        hi = max(lsd.b, mp.b, max(s.max for s in rstar), max(s.max for s in r0)) * 1.02
        e1, c1, h1, _ = _pooled_histogram(rstar, cfg.bins, hi)
        e0, c0, h0, _ = _pooled_histogram(r0, cfg.bins, hi)
        _write_hist(out / "histogram_rstar.csv", e1, c1, h1)
        _write_hist(out / "histogram_r0.csv", e0, c0, h0)
        u1, f1 = density_grid(lsd)
        u0, f0 = density_grid(mp)
        write_csv(out / "density_lsd.csv", ["u", "density"], zip(u1, f1))
        write_csv(out / "density_mp.csv", ["u", "density"], zip(u0, f0))

        svg = overlay_svg(
            [Histogram(e1, h1, f"ESD of R*_{cfg.tau}", "#f1948a"), Histogram(e0, h0, "ESD of R_0", "#85c1e9")],
            [Curve(u1, f1, f"limit of R*_{cfg.tau}", "#922b21"), Curve(u0, f0, "Marchenko-Pastur", "#1a5276")],
            title=f"y = {y:g}, p = {p}, n = {n}",
            y_cap=_y_cap(np.concatenate([h1, h0])),
        )
        write_text(out / "overlay.svg", svg)

        ks_rl, ks_rl_pooled = _ks_pair(rstar, lsd)
        ks_0m, ks_0m_pooled = _ks_pair(r0, mp)
        ks_rm, ks_rm_pooled = _ks_pair(rstar, mp)
        summary = {
            "config": cfg.to_dict(),
            "y": float(y),
            "p": p,
            "n": n,
            "lsd_support": {"a": lsd.a, "b": lsd.b},
            "mp_support": {"a": mp.a, "b": mp.b},
            "ks_rstar_lsd": ks_rl,
            "ks_rstar_lsd_pooled": ks_rl_pooled,
            "ks_r0_mp": ks_0m,
            "ks_r0_mp_pooled": ks_0m_pooled,
            "ks_rstar_mp": ks_rm,
            "ks_rstar_mp_pooled": ks_rm_pooled,
            "seeds": seeds,
        }
        write_json(out / "summary.json", summary)
        result.summaries.append(summary)
    _write_index(root, cfg, result)
    return result


# ----------------------------------------------------------------------
# factor demo: singular values of R_tau for a factor panel


def run_factor_demo(cfg: ExperimentConfig) -> ExperimentResult:
    cfg = _prepare(cfg, "factor_demo")
    fac = cfg.factor
    fac.validate()
    root = Path(cfg.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    result = ExperimentResult(root)
    for iy, y in enumerate(cfg.y_values):
        p, n = cfg.p_for(y), cfg.n
        b = support_edges(float(y))[1]
        threshold = math.sqrt(b) + fac.margin
        loadings = random_loadings(p, fac.k, fac.loading_strength, derive_replication_seed(cfg.master_seed, iy))
        model = FactorModelConfig(loadings, factor_process=fac.factor_process, phi=fac.phi)
        seeds = [cell_seed(cfg.master_seed, iy, r) for r in range(cfg.reps)]

        def one(r: int) -> np.ndarray:
            panel = sample_factor_panel(model, cfg.dist, n, cfg.tau, seeds[r])
            sv = singular_values(autocorr(panel, cfg.tau, cfg.centered).data)
            return sv.values[::-1].copy()

        svs = _map_reps(one, cfg.reps, cfg.workers)
        out = _cell_dir(root, y)
        write_csv(
            out / "singular_values.csv",
            ["replication", "rank", "singular_value"],
            ((r, i + 1, float(v)) for r, sv in enumerate(svs) for i, v in enumerate(sv)),
        )
        counts = [int(np.count_nonzero(sv > threshold)) for sv in svs]
        summary = {
            "config": cfg.to_dict(),
            "note": FACTOR_DEMO_NOTE,
            "y": float(y),
            "p": p,
            "n": n,
            "k": fac.k,
            "b": b,
            "threshold": threshold,
            "outlier_counts": counts,
            "top_singular_values": [sv[: max(fac.k + 2, 5)].tolist() for sv in svs],
            "seeds": seeds,
        }
        write_json(out / "outlier_count.json", summary)
        result.summaries.append(summary)
    _write_index(root, cfg, result)
    return result


RUNNERS = {
    "esd": run_esd_experiment,
    "lambda_max": run_lambda_max_experiment,
    "compare_mp": run_compare_mp_experiment,
    "factor_demo": run_factor_demo,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.experiment == "custom":
        raise ConfigError("a custom config must be run through a specific subcommand")
    return RUNNERS[cfg.experiment](cfg)
