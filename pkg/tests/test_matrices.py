import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from autocorr_spectra import DegenerateInputError, ErrorPanel, autocorr, autocov, normalized_trace, sym_product
from autocorr_spectra.matrices import LagMatrix, write_matrix_csv


# ---------------------------------------------------------------- oracles
def oracle_autocov(data: np.ndarray, n: int, tau: int, centered: bool) -> np.ndarray:
    """Index-by-index summation, written directly from the definitions."""
    p = data.shape[1]
    out = np.zeros((p, p))
    if centered:
        mean = [sum(data[i, j] for i in range(n)) / n for j in range(p)]
        for j in range(p):
            for k in range(p):
                acc = 0.0
                for i in range(n):
                    acc += (data[i, j] - mean[j]) * (data[(i + tau) % n, k] - mean[k])
                out[j, k] = acc / (n - 1)
    else:
        for j in range(p):
            for k in range(p):
                acc = 0.0
                for i in range(n):
                    acc += data[i, j] * data[i + tau, k]
                out[j, k] = acc / n
    return out


def oracle_autocorr(data, n, tau, centered):
    s0 = oracle_autocov(data, n, 0, centered)
    st_ = oracle_autocov(data, n, tau, centered)
    p = data.shape[1]
    out = np.zeros((p, p))
    for j in range(p):
        for k in range(p):
            out[j, k] = st_[j, k] / np.sqrt(s0[j, j] * s0[k, k])
    return out


def oracle_matmul_t(a):
    p = a.shape[0]
    out = np.zeros((p, p))
    for i in range(p):
        for j in range(p):
            out[i, j] = sum(a[i, k] * a[j, k] for k in range(a.shape[1]))
    return out


def panel(rng, n, p, tau_max):
    return ErrorPanel(rng.standard_normal((n + tau_max, p)), n=n, tau_max=tau_max, seed=0)


# ---------------------------------------------------------------- autocov
class TestAutocov:
    def test_constant_panel_centered_is_zero(self):
        pn = ErrorPanel(np.full((6, 3), 2.5), n=6, tau_max=0, seed=0)
        for tau in range(3):
            assert np.array_equal(autocov(pn, tau, centered=True).data, np.zeros((3, 3)))

    def test_hand_example_noncentered(self):
        pn = ErrorPanel(np.array([[1.0], [1.0], [-1.0]]), n=2, tau_max=1, seed=0)
        s = autocov(pn, 1, centered=False)
        assert s.data.shape == (1, 1) and s.data[0, 0] == 0.0
        assert s.divisor == 2.0 and not s.normalized

    @pytest.mark.parametrize("centered", [True, False])
    @pytest.mark.parametrize("n,p", [(2, 1), (3, 3), (4, 2), (5, 6), (6, 6), (6, 4)])
    def test_triple_loop_oracle(self, centered, n, p):
        rng = np.random.default_rng(100 * n + p)
        for tau in range(0, n):
            pn = panel(rng, n, p, n)
            got = autocov(pn, tau, centered).data
            np.testing.assert_allclose(got, oracle_autocov(pn.data, n, tau, centered), rtol=0, atol=1e-12)

    def test_lag_validation(self):
        pn = panel(np.random.default_rng(0), 5, 2, 1)
        with pytest.raises(ValueError):
            autocov(pn, 5, centered=True)
        with pytest.raises(ValueError):
            autocov(pn, -1, centered=True)
        with pytest.raises(ValueError):
            autocov(pn, 2, centered=False)  # tau_max = 1

    def test_centered_uses_first_n_rows_only(self):
        rng = np.random.default_rng(1)
        a = panel(rng, 5, 3, 2)
        data = a.data.copy()
        data[5:] = 1e6
        b = ErrorPanel(data, n=5, tau_max=2, seed=0)
        assert np.array_equal(autocov(a, 2, True).data, autocov(b, 2, True).data)

    def test_accepts_raw_array(self):
        x = np.random.default_rng(3).standard_normal((7, 2))
        np.testing.assert_allclose(autocov(x, 1, True).data, oracle_autocov(x, 7, 1, True), atol=1e-12)


# ---------------------------------------------------------------- autocorr
class TestAutocorr:
    @pytest.mark.parametrize("centered", [True, False])
    @pytest.mark.parametrize("n,p", [(3, 2), (4, 4), (6, 5), (6, 6)])
    def test_triple_loop_oracle(self, centered, n, p):
        rng = np.random.default_rng(7 * n + p)
        for tau in range(0, n):
            pn = panel(rng, n, p, n)
            got = autocorr(pn, tau, centered)
            assert got.normalized and got.lag == tau and got.centered is centered
            np.testing.assert_allclose(got.data, oracle_autocorr(pn.data, n, tau, centered), rtol=0, atol=1e-12)

    @pytest.mark.parametrize("centered", [True, False])
    def test_lag0_diagonal_exactly_one(self, centered):
        pn = panel(np.random.default_rng(5), 40, 25, 0)
        r = autocorr(pn, 0, centered).data
        assert np.max(np.abs(np.diag(r) - 1.0)) <= 1e-12
        assert np.all(np.abs(r) <= 1.0 + 1e-12)

    @pytest.mark.parametrize("centered", [True, False])
    @pytest.mark.parametrize("tau", [0, 1, 3])
    def test_scale_invariance(self, centered, tau):
        rng = np.random.default_rng(9)
        pn = panel(rng, 30, 8, 3)
        c = np.exp(rng.uniform(-5, 5, size=8))
        scaled = ErrorPanel(pn.data * c, n=30, tau_max=3, seed=0)
        a = autocorr(pn, tau, centered).data
        b = autocorr(scaled, tau, centered).data
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_hand_p2(self):
        # non-centered: D E0^t E1 D / n with D = diag(1/||eps_j^0|| * sqrt(n)) collapses to
        # entries (eps_j^0 . eps_k^1) / (||eps_j^0|| ||eps_k^0||)
        data = np.array([[1.0, 2.0], [-1.0, 0.0], [2.0, 1.0], [0.0, -3.0]])
        pn = ErrorPanel(data, n=3, tau_max=1, seed=0)
        e0 = data[:3]
        e1 = data[1:4]
        nrm = np.sqrt([6.0, 5.0])
        expected = np.array(
            [
                [(1 * -1 + -1 * 2 + 2 * 0) / (nrm[0] * nrm[0]), (1 * 0 + -1 * 1 + 2 * -3) / (nrm[0] * nrm[1])],
                [(2 * -1 + 0 * 2 + 1 * 0) / (nrm[1] * nrm[0]), (2 * 0 + 0 * 1 + 1 * -3) / (nrm[1] * nrm[1])],
            ]
        )
        np.testing.assert_allclose(np.linalg.norm(e0, axis=0), nrm)
        assert e1.shape == (3, 2)
        np.testing.assert_allclose(autocorr(pn, 1, False).data, expected, rtol=0, atol=1e-15)

    def test_zero_variance_column(self):
        data = np.random.default_rng(0).standard_normal((10, 3))
        data[:, 1] = 4.0
        with pytest.raises(DegenerateInputError):
            autocorr(ErrorPanel(data, n=10, tau_max=0, seed=0), 0, centered=True)
        data[:, 1] = 0.0
        with pytest.raises(DegenerateInputError):
            autocorr(ErrorPanel(data, n=10, tau_max=0, seed=0), 0, centered=False)

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(2, 6), st.integers(1, 6), st.integers(0, 5), st.booleans(), st.integers(0, 2**32 - 1)
    )
    def test_property_oracle_and_scale(self, n, p, tau, centered, seed):
        tau = tau % n
        rng = np.random.default_rng(seed)
        pn = panel(rng, n, p, tau)
        try:
            got = autocorr(pn, tau, centered).data
        except DegenerateInputError:
            return
        np.testing.assert_allclose(got, oracle_autocorr(pn.data, n, tau, centered), atol=1e-10)
        c = rng.uniform(0.1, 10.0, size=p)
        scaled = autocorr(ErrorPanel(pn.data * c, n=n, tau_max=tau, seed=0), tau, centered).data
        np.testing.assert_allclose(scaled, got, atol=1e-10)


# ---------------------------------------------------------------- products
class TestSymProduct:
    def test_identity(self):
        assert np.array_equal(sym_product(np.eye(4)).data, np.eye(4))

    def test_hand(self):
        out = sym_product(np.array([[0.0, 1.0], [0.0, 0.0]])).data
        assert np.array_equal(out, np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_triple_loop_oracle(self):
        a = np.random.default_rng(4).standard_normal((4, 4))
        np.testing.assert_allclose(sym_product(a).data, oracle_matmul_t(a), rtol=0, atol=1e-12)

    def test_exact_symmetry_and_psd(self):
        pn = panel(np.random.default_rng(8), 60, 80, 1)
        m = sym_product(autocorr(pn, 1, True))
        assert m.source_lag == 1
        assert np.array_equal(m.data, m.data.T)
        w = np.linalg.eigvalsh(m.data)
        assert w[0] >= -1e-8 * w[-1]

    def test_nonsquare(self):
        with pytest.raises(ValueError):
            sym_product(np.ones((2, 3)))


class TestNormalizedTrace:
    def test_identity(self):
        assert normalized_trace(sym_product(np.eye(7))) == 1.0

    def test_diag(self):
        assert normalized_trace(np.diag([2.0, 4.0])) == 3.0

    def test_monte_carlo_limit(self):
        # non-centered lag-1 S~* at p = n = 400 has trace/p -> y = 1
        from autocorr_spectra import DistributionSpec, sample_error_panel

        pn = sample_error_panel(DistributionSpec.parse("normal"), 400, 400, 1, seed=2024)
        assert 0.93 <= normalized_trace(sym_product(autocov(pn, 1, centered=False))) <= 1.07


class TestRankBound:
    def test_noncentered_point_mass(self):
        from autocorr_spectra import DistributionSpec, sample_error_panel, sym_eigenvalues

        pn = sample_error_panel(DistributionSpec.parse("normal"), 30, 70, 1, seed=1)
        w = sym_eigenvalues(sym_product(autocorr(pn, 1, False)).data, psd=True).values
        assert np.count_nonzero(w <= 1e-8 * w[-1]) >= 70 - 30


def test_csv_export_roundtrip():
    a = np.random.default_rng(2).standard_normal((3, 3))
    buf = io.StringIO()
    write_matrix_csv(LagMatrix(a, 1, True, False, 5, 4.0), buf)
    text = buf.getvalue()
    assert text.endswith("\n") and "\r" not in text
    back = np.loadtxt(io.StringIO(text), delimiter=",")
    assert np.array_equal(back, a)
