import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from csrsma import RSMAPrecoderOptimizer
from csrsma._validation import check_channels, check_int, check_positive, check_precoder
from csrsma.optimize import BarrierConfig

FAST = BarrierConfig(tau_max=100, v_max=40)


class TestEstimator:
    def test_fit_predict_score(self, two_user_channels):
        est = RSMAPrecoderOptimizer(snr_db=10, delta=4, restarts=1, barrier=FAST).fit(two_user_channels)
        assert est.precoder_.shape == (2, 3)
        assert set(est.mode_objectives_) == {"qpsk/null", "bpsk/bpsk", "null/qpsk"}
        assert est.objective_bits_ >= max(est.mode_objectives_.values()) - 1e-6
        assert est.score(two_user_channels) == pytest.approx(est.objective_bits_)
        assert est.predict(two_user_channels).sum() == pytest.approx(est.objective_bits_)

    def test_fixed_mode_mmf(self, two_user_channels):
        est = RSMAPrecoderOptimizer(snr_db=10, objective="mmf", mode="qpsk/qpsk", restarts=1, barrier=FAST)
        est.fit(two_user_channels.h)
        assert est.mode_.name == "qpsk/qpsk"
        assert est.score(two_user_channels) == pytest.approx(est.predict(two_user_channels).min())

    def test_clone_and_params(self):
        est = RSMAPrecoderOptimizer(snr_db=5, scheme="conv_sic")
        twin = clone(est)
        assert twin.get_params() == est.get_params()
        assert twin.set_params(delta=4).delta == 4

    def test_not_fitted(self, two_user_channels):
        with pytest.raises(NotFittedError):
            RSMAPrecoderOptimizer().predict(two_user_channels)

    @pytest.mark.parametrize("params", [dict(sigma2=0), dict(restarts=0), dict(random_state=-1),
                                        dict(snr_db=np.inf), dict(scheme="noma"), dict(objective="ee"),
                                        dict(delta=3)])
    def test_bad_params(self, two_user_channels, params):
        with pytest.raises(ValueError):
            RSMAPrecoderOptimizer(**params).fit(two_user_channels)

    def test_shape_mismatch_on_predict(self, two_user_channels):
        est = RSMAPrecoderOptimizer(snr_db=0, delta=2, restarts=1, barrier=FAST).fit(two_user_channels)
        with pytest.raises(ValueError, match="users"):
            est.predict(np.ones((3, 2)))


class TestValidation:
    def test_channels(self):
        assert check_channels([1, 2j]).shape == (1, 2)
        with pytest.raises(ValueError, match="NaN"):
            check_channels([[np.nan, 1]])
        with pytest.raises(TypeError):
            check_channels(np.array([None, 1], dtype=object))
        with pytest.raises(ValueError, match="antennas"):
            check_channels(np.ones((2, 2)), n_t=3)

    def test_precoder(self):
        assert check_precoder(np.ones((2, 3)), 2, 2).dtype == complex
        with pytest.raises(ValueError, match="strictly inside"):
            check_precoder(np.ones((2, 3)), 2, 2, power_budget=6.0)
        with pytest.raises(ValueError, match="shape"):
            check_precoder(np.ones((2, 2)), 2, 2)

    def test_scalars(self):
        assert check_positive(2, "x") == 2.0
        assert check_int(3, "n", 1) == 3
        for bad in (True, 1.5, 0):
            with pytest.raises(ValueError):
                check_int(bad, "n", 1)
        with pytest.raises(ValueError):
            check_positive("1", "x")
