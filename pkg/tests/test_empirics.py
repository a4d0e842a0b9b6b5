import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ndtr

from autocorr_spectra import (
    DistributionSpec,
    Ecdf,
    SpectralLaw,
    Spectrum,
    autocorr,
    autocov,
    eigenvalue_summary,
    esd,
    ks_distance,
    levy_distance,
    sample_error_panel,
    sym_eigenvalues,
    sym_product,
)
from autocorr_spectra.empirics import write_ecdf_csv, zero_eigenvalue_count


# ---------------------------------------------------------------- oracles
def count_oracle(points, x):
    return sum(1 for v in points if v <= x) / len(points)


def levy_grid_oracle(f: Ecdf, g: Ecdf, step: float = 1e-5) -> float:
    """Smallest eps on a fine eps-grid satisfying the defining inequalities at dense x.

    x ranges over a fine grid plus every jump point and its +-eps shifts, so
    the check is exact in x; eps is scanned coarse-to-fine.
    """
    pts = np.union1d(f.support_points, g.support_points)

    def ok(eps):
        xs = np.concatenate([pts, pts - eps, pts + eps, pts - eps - 1e-13, pts + eps - 1e-13, pts - 1e-13])
        lhs = f(xs - eps) - eps
        rhs = f(xs + eps) + eps
        gv = g(xs)
        return bool(np.all(lhs <= gv + 1e-12) and np.all(gv <= rhs + 1e-12))

    lo = 0.0
    for width in (1e-2, 1e-3, 1e-4, step):
        eps = lo
        while not ok(eps):
            eps += width
        lo = max(0.0, eps - width)
    return eps


class TestEcdf:
    def test_definition(self):
        f = esd(Spectrum(np.array([1.0, 2.0, 3.0])))
        assert f(2.0) == pytest.approx(2 / 3)
        assert f(0.0) == 0.0
        assert f(3.0) == 1.0

    def test_extremes(self):
        vals = np.random.default_rng(1).uniform(size=50)
        f = esd(vals)
        assert f(vals.min() - 1) == 0.0
        assert f(vals.max()) == 1.0

    def test_counting_oracle(self):
        rng = np.random.default_rng(2)
        vals = rng.uniform(size=500)
        f = esd(vals)
        queries = np.concatenate([rng.uniform(-0.1, 1.1, 90), vals[:10]])
        for q in queries:
            assert f(q) == count_oracle(vals, q)

    def test_right_continuity_and_left_limit(self):
        f = Ecdf(np.array([0.0, 1.0, 1.0, 2.0]))
        assert f(1.0) == 0.75
        assert f.left(1.0) == 0.25

    def test_empty(self):
        with pytest.raises(ValueError):
            esd(np.array([]))

    def test_zero_snapping(self):
        f = esd(np.array([-1e-14, 1e-14, 1.0, 2.0]), zero_rtol=1e-8)
        assert np.count_nonzero(f.support_points == 0.0) == 2

    def test_csv(self):
        buf = io.StringIO()
        write_ecdf_csv(esd([1.0, 1.0, 3.0]), buf)
        assert buf.getvalue() == "x,F\n1,0.66666666666666663\n3,1\n"


class TestKs:
    def test_identical(self):
        f = esd([1.0, 2.0, 3.0])
        assert ks_distance(f, f) == 0.0

    def test_point_masses(self):
        assert ks_distance(esd([0.0]), esd([1.0])) == 1.0

    def test_dkw_normal(self):
        x = np.random.default_rng(3).standard_normal(10_000)
        assert ks_distance(esd(x), ndtr) < 0.03

    def test_exact_sup_vs_brute_force(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(200)
        grid = np.sort(np.concatenate([x, x - 1e-12, np.linspace(-5, 5, 20001)]))
        f = esd(x)
        brute = np.max(np.abs(f(grid) - ndtr(grid)))
        assert ks_distance(f, ndtr) >= brute - 1e-12
        assert ks_distance(f, ndtr) <= brute + 1e-9

    def test_symmetric(self):
        rng = np.random.default_rng(5)
        f, g = esd(rng.uniform(size=30)), esd(rng.uniform(size=40))
        assert ks_distance(f, g) == ks_distance(g, f)

    def test_atom_at_zero_handled(self):
        # half the eigenvalues at exactly 0 against a law with atom 1/2 at 0
        law = SpectralLaw.from_ratio(2.0)
        pn = sample_error_panel(DistributionSpec.parse("normal"), 200, 400, 1, seed=1)
        w = sym_eigenvalues(sym_product(autocorr(pn, 1, False)).data, psd=True)
        assert ks_distance(esd(w, zero_rtol=1e-8), law) < 0.06

    def test_law_vs_law(self):
        from autocorr_spectra import MarchenkoPasturLaw

        d = ks_distance(SpectralLaw.from_ratio(1.0), MarchenkoPasturLaw.from_ratio(1.0))
        assert d > 0.05
        assert ks_distance(SpectralLaw.from_ratio(1.0), SpectralLaw.from_ratio(1.0)) == 0.0


class TestLevy:
    def test_identical(self):
        f = esd([0.3, 0.5, 0.9])
        assert levy_distance(f, f) == 0.0

    @pytest.mark.parametrize("c", [0.1, 0.25, 0.5, 0.75, 1.0])
    def test_shifted_point_masses(self, c):
        assert abs(levy_distance(esd([0.0]), esd([c])) - c) <= 1e-6

    def test_far_point_masses_capped_at_one(self):
        assert abs(levy_distance(esd([0.0]), esd([5.0])) - 1.0) <= 1e-6

    @pytest.mark.parametrize("seed", range(3))
    def test_grid_scan_oracle(self, seed):
        rng = np.random.default_rng(seed)
        f = esd(rng.uniform(0, 1, 100))
        g = esd(rng.uniform(0.05, 1.1, 100))
        assert abs(levy_distance(f, g) - levy_grid_oracle(f, g)) <= 1e-4

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=25), st.lists(st.floats(-2, 2), min_size=1, max_size=25))
    def test_dominated_by_ks_and_symmetric(self, a, b):
        f, g = esd(a), esd(b)
        lev = levy_distance(f, g)
        assert lev <= ks_distance(f, g) + 1e-9
        assert abs(lev - levy_distance(g, f)) <= 2e-9

    def test_accepts_arrays(self):
        assert abs(levy_distance(np.array([0.0]), np.array([0.4])) - 0.4) <= 1e-6


class TestSummary:
    def test_single(self):
        s = eigenvalue_summary([Spectrum(np.array([1.0, 2.0]))])
        assert s.lambda_max == [2.0]

    def test_median(self):
        spectra = [Spectrum(np.array([0.0, m])) for m in (3.0, 1.0, 2.0)]
        s = eigenvalue_summary(spectra)
        assert s.median == 2.0 and s.min == 1.0 and s.max == 3.0
        assert s.q1 == 1.5 and s.q3 == 2.5

    def test_whiskers(self):
        s = eigenvalue_summary([1.0, 2.0, 3.0, 4.0, 100.0])
        assert s.whisker_high == 4.0 and s.max == 100.0

    def test_empty(self):
        with pytest.raises(ValueError):
            eigenvalue_summary([])

    def test_monte_carlo_band(self):
        lam = []
        for r in range(50):
            pn = sample_error_panel(DistributionSpec.parse("normal"), 400, 400, 1, seed=1000 + r)
            lam.append(sym_eigenvalues(sym_product(autocorr(pn, 1, True)).data).max)
        assert 6.2 <= eigenvalue_summary(lam).median <= 7.3


class TestProperties:
    def test_rank_bound_point_mass(self):
        pn = sample_error_panel(DistributionSpec.parse("normal"), 100, 250, 1, seed=9)
        w = sym_eigenvalues(sym_product(autocorr(pn, 1, False)).data, psd=True)
        assert zero_eigenvalue_count(w) >= 150

    def test_substitution_principle(self):
        ks, gaps = [], []
        for r in range(10):
            pn = sample_error_panel(DistributionSpec.parse("normal"), 800, 800, 1, seed=500 + r)
            c = sym_eigenvalues(sym_product(autocorr(pn, 1, True)).data, psd=True, check=False)
            nc = sym_eigenvalues(sym_product(autocorr(pn, 1, False)).data, psd=True, check=False)
            ks.append(ks_distance(esd(c), esd(nc)))
            gaps.append(abs(c.max - nc.max))
        assert np.median(ks) < 0.05
        assert np.median(gaps) < 0.3

    def test_largest_eigenvalue_equivalence(self):
        def med_gap(p, reps=10):
            gaps = []
            for r in range(reps):
                pn = sample_error_panel(DistributionSpec.parse("normal"), p, p, 1, seed=700 + r)
                rt = sym_eigenvalues(sym_product(autocorr(pn, 1, False)).data, check=False).max
                st_ = sym_eigenvalues(sym_product(autocov(pn, 1, False)).data, check=False).max
                gaps.append(abs(math.sqrt(rt) - math.sqrt(st_)))
            return float(np.median(gaps))

        small, large = med_gap(200), med_gap(800)
        assert large < small
        assert small < 0.2 and large < 0.2
