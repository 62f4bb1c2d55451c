import numpy as np
import pytest

from csrsma.channel import (
    CovarianceFactor,
    CovarianceVariant,
    OneRingParams,
    derive_seed,
    load_channels_csv,
    one_ring_covariance,
    sample_channels,
    save_channels_csv,
)

# 10^6-node trapezoid values of the (1, 2) entry for n_t = 2, theta = pi/3,
# delta = pi/18, frozen before the implementation was written
R12_STANDARD = -0.8957415146975326 + 0.4157462110876673j
R12_PRINTED = 0.9454656283944323 + 0.028723564435694925j


class TestCovariance:
    @pytest.mark.parametrize("variant,expected", [("standard", R12_STANDARD), ("printed", R12_PRINTED)])
    def test_frozen_entry(self, variant, expected):
        R = one_ring_covariance(OneRingParams(2), variant).R
        assert abs(R[0, 1] - expected) < 1e-8

    @pytest.mark.parametrize("variant", list(CovarianceVariant))
    @pytest.mark.parametrize("n_t", [2, 4, 8])
    def test_structure(self, variant, n_t):
        f = one_ring_covariance(OneRingParams(n_t, theta=0.4, delta=0.3), variant)
        np.testing.assert_array_equal(np.diag(f.R), np.ones(n_t))
        np.testing.assert_allclose(f.R, f.R.conj().T, atol=0)
        assert np.all(f.Lambda > 0)
        # truncated eigenvalues carry a negligible share of the trace
        assert np.sum(f.Lambda) >= (1 - 1e-6) * n_t

    @pytest.mark.parametrize("variant", list(CovarianceVariant))
    @pytest.mark.parametrize("n_t", [2, 4, 8])
    def test_quadrature_doubling(self, variant, n_t):
        a = one_ring_covariance(OneRingParams(n_t), variant).R
        b = one_ring_covariance(OneRingParams(n_t, quadrature_points=8192), variant).R
        assert np.abs(a - b).max() < 1e-9

    def test_toeplitz(self):
        R = one_ring_covariance(OneRingParams(4)).R
        for k in range(1, 4):
            d = np.diag(R, k)
            np.testing.assert_allclose(d, d[0], atol=1e-15)

    def test_tiny_spread_rank_one(self):
        f = one_ring_covariance(OneRingParams(4, delta=1e-7))
        assert f.rank == 1
        H = sample_channels([f] * 3, rng_seed=3).h
        u = f.U[:, 0]
        for hk in H:
            assert np.linalg.norm(hk - u * (u.conj() @ hk)) <= 1e-8 * np.linalg.norm(hk)

    def test_variant_parse(self):
        assert CovarianceVariant.parse("PRINTED") is CovarianceVariant.AS_PRINTED
        assert CovarianceVariant.parse("as_printed") is CovarianceVariant.AS_PRINTED
        with pytest.raises(ValueError):
            CovarianceVariant.parse("other")

    @pytest.mark.parametrize("kwargs", [dict(n_t=0), dict(n_t=2, delta=0.0), dict(n_t=2, quadrature_points=10)])
    def test_invalid_params(self, kwargs):
        with pytest.raises(ValueError):
            OneRingParams(**kwargs)

    def test_factor_from_covariance(self):
        f = CovarianceFactor.from_covariance(np.diag([2.0, 1e-12, 1.0]))
        assert f.rank == 2
        np.testing.assert_allclose(f.Lambda, [2.0, 1.0])


class TestSampling:
    def test_reproducible(self, correlated_factor):
        a = sample_channels([correlated_factor] * 2, rng_seed=9, realization=4)
        b = sample_channels([correlated_factor] * 2, rng_seed=9, realization=4)
        np.testing.assert_array_equal(a.h, b.h)
        c = sample_channels([correlated_factor] * 2, rng_seed=9, realization=5)
        assert not np.array_equal(a.h, c.h)

    def test_user_draw_independent_of_k(self, correlated_factor):
        two = sample_channels([correlated_factor] * 2, rng_seed=1).h
        three = sample_channels([correlated_factor] * 3, rng_seed=1).h
        np.testing.assert_array_equal(two, three[:2])

    def test_column_space(self):
        f = one_ring_covariance(OneRingParams(4, delta=0.05))
        for hk in sample_channels([f] * 2, rng_seed=0).h:
            resid = hk - f.U @ (f.U.conj().T @ hk)
            assert np.linalg.norm(resid) <= 1e-8 * np.linalg.norm(hk)

    def test_second_moments(self):
        f = one_ring_covariance(OneRingParams(4, theta=0.5, delta=0.4))
        H = np.array([sample_channels([f], 77, r).h[0] for r in range(20000)])
        assert np.abs(H.mean(axis=0)).max() < 0.05
        S = H.T @ H.conj() / len(H)
        assert np.linalg.norm(S - f.R) / np.linalg.norm(f.R) < 0.04

    def test_derive_seed(self):
        assert derive_seed(1, 2) == derive_seed(1, 2)
        assert derive_seed(1, 2) != derive_seed(2, 1)
        assert 0 <= derive_seed(-5, 3) < 2 ** 63


class TestCsv:
    def test_round_trip(self, tmp_path, two_user_channels):
        path = tmp_path / "h.csv"
        save_channels_csv(path, two_user_channels)
        np.testing.assert_array_equal(load_channels_csv(path).h, two_user_channels.h)

    def test_bad_width(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("1,2,3\n")
        with pytest.raises(ValueError, match="even number"):
            load_channels_csv(path)

    def test_empty(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="no channel rows"):
            load_channels_csv(path)
