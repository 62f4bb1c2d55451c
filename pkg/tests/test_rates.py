import math

import numpy as np
import pytest

from csrsma.alphabet import TransmissionMode, make_constellation, mode_from_name, modes_for_complexity
from csrsma.rates import (
    RateMethod,
    RateModel,
    Role,
    SchemeKind,
    StreamRates,
    check_allocation,
    decoding_complexity,
    feasible,
    min_rate,
    scheme_roles,
    stream_rates,
    sum_rate,
    user_rates,
)

from conftest import random_channels, random_precoder


def rates(ic, sic, nonsic):
    return StreamRates(np.array(ic, float), np.array(sic, float), np.array(nonsic, float))


class TestSchemes:
    @pytest.mark.parametrize("text,kind", [("cs", SchemeKind.CS), ("CONV-SIC", SchemeKind.CONV_SIC),
                                           ("conv_nonsic", SchemeKind.CONV_NONSIC)])
    def test_parse(self, text, kind):
        assert SchemeKind.parse(text) is kind

    def test_parse_error(self):
        with pytest.raises(ValueError, match="unknown scheme"):
            SchemeKind.parse("noma")

    def test_roles(self):
        assert scheme_roles("conv_sic") == (Role.COMMON, Role.PRIVATE_SIC)
        assert scheme_roles("cs") == (Role.COMMON, Role.PRIVATE_NONSIC)
        assert RateMethod.parse("EXACT") is RateMethod.EXACT


class TestAssembly:
    sr = rates([1.0, 0.4], [1.5, 1.2], [1.1, 0.9])

    def test_sum_rates(self):
        assert sum_rate("cs", self.sr) == pytest.approx(1.0 + 2.0)
        assert sum_rate("conv_nonsic", self.sr) == pytest.approx(0.4 + 2.0)
        assert sum_rate("conv_sic", self.sr) == pytest.approx(0.4 + 2.7)

    def test_user_rates(self):
        np.testing.assert_allclose(user_rates("cs", self.sr, [0.25, 0.75]), [1.35, 1.2])
        np.testing.assert_allclose(user_rates("conv_nonsic", self.sr, [0.5, 0.5]), [1.3, 1.1])
        np.testing.assert_allclose(user_rates("conv_sic", self.sr, [1.0, 0.0]), [1.9, 1.2])
        assert min_rate("cs", self.sr, [0.25, 0.75]) == pytest.approx(1.2)

    def test_conventional_common_counted_once(self):
        for c in ([1.0, 0.0], [0.3, 0.7]):
            total = user_rates("conv_nonsic", self.sr, c).sum()
            assert total == pytest.approx(sum_rate("conv_nonsic", self.sr))

    @pytest.mark.parametrize("c", [[0.5, 0.6], [-0.1, 1.1], [1.0], [[0.5, 0.5]]])
    def test_bad_allocation(self, c):
        with pytest.raises(ValueError):
            check_allocation(c, 2)

    def test_complexity(self):
        qpsk_null = TransmissionMode(make_constellation("qpsk"), make_constellation("null"))
        assert decoding_complexity(qpsk_null) == 4 and feasible(qpsk_null, 4)
        m = mode_from_name("qam8/bpsk")
        assert decoding_complexity(m) == 16 and feasible(m, 16) and not feasible(m, 8)


class TestStreamRates:
    def test_ranges(self, rng):
        mode = mode_from_name("qam8/bpsk")
        for _ in range(10):
            H = random_channels(rng, 3, 4)
            sr = stream_rates(random_precoder(rng, 4, 3, 10.0), H, mode)
            assert np.all((0 <= sr.I_c) & (sr.I_c <= 1))
            assert np.all((0 <= sr.I_p_sic) & (sr.I_p_sic <= 3))
            assert sr.n_users == 3 and sr.std_errors is None

    def test_shape_checks(self, rng):
        H = random_channels(rng, 2, 2)
        with pytest.raises(ValueError, match="shape"):
            stream_rates(np.ones((2, 2)), H, mode_from_name("qpsk/qpsk"))
        with pytest.raises(ValueError, match="power budget"):
            stream_rates(random_precoder(rng, 2, 2, 2.0), H, mode_from_name("qpsk/qpsk"), power_budget=1.0)

    def test_model_matches_clamped_rates(self, rng):
        H = random_channels(rng, 2, 2)
        P = random_precoder(rng, 2, 2, 3.0)
        mode = mode_from_name("qpsk/qpsk")
        vals, grads = RateModel(H, mode).evaluate(P)
        sr = stream_rates(P, H, mode)
        np.testing.assert_allclose(np.clip(vals[Role.COMMON] / math.log(2), 0, 2), sr.I_c, atol=1e-14)
        assert grads[Role.COMMON] is None

    def test_sdma_private_roles_coincide(self, rng):
        H = random_channels(rng, 2, 2)
        P = random_precoder(rng, 2, 2, 3.0)
        mode = modes_for_complexity(16)[0]
        sr = stream_rates(P, H, mode)
        np.testing.assert_allclose(sr.I_p_sic, sr.I_p_nonsic, atol=1e-15)
        ex = stream_rates(P, H, mode, "exact", mc_samples=200)
        np.testing.assert_array_equal(ex.I_p_sic, ex.I_p_nonsic)
        np.testing.assert_array_equal(ex.I_c, 0.0)

    def test_exact_role_subset(self, rng):
        H = random_channels(rng, 2, 2)
        P = random_precoder(rng, 2, 2, 3.0)
        ex = stream_rates(P, H, mode_from_name("qpsk/qpsk"), "exact", mc_samples=200,
                          roles=scheme_roles("cs"))
        assert np.all(np.isnan(ex.I_p_sic))
        assert np.all(np.isfinite(ex.I_c)) and np.all(np.isfinite(ex.I_p_nonsic))
        assert set(ex.std_errors) == {r.value for r in Role}

    def test_exact_reproducible(self, rng):
        H = random_channels(rng, 2, 2)
        P = random_precoder(rng, 2, 2, 3.0)
        a = stream_rates(P, H, mode_from_name("qpsk/bpsk"), "exact", mc_samples=300, rng_seed=5)
        b = stream_rates(P, H, mode_from_name("qpsk/bpsk"), "exact", mc_samples=300, rng_seed=5)
        np.testing.assert_array_equal(a.I_c, b.I_c)

    def test_sic_helps(self):
        rng = np.random.default_rng(31)
        H = random_channels(rng, 2, 2)
        P = random_precoder(rng, 2, 2, 10.0)
        ex = stream_rates(P, H, mode_from_name("qpsk/qpsk"), "exact", mc_samples=10000, rng_seed=2)
        tol = 3 * np.hypot(ex.std_errors["private_sic"], ex.std_errors["private_nonsic"])
        assert np.all(ex.I_p_sic >= ex.I_p_nonsic - tol)

    def test_cs_dominates(self, rng):
        for _ in range(30):
            mode = modes_for_complexity(16)[rng.integers(5)]
            H = random_channels(rng, 2, 2)
            sr = stream_rates(random_precoder(rng, 2, 2, 20.0), H, mode)
            assert sum_rate("cs", sr) >= sum_rate("conv_nonsic", sr)
