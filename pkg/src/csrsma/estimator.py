"""Estimator-style wrapper around the precoder optimizers."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_channels, check_int, check_positive
from .alphabet import mode_from_name, modes_for_complexity
from .optimize import BarrierConfig, Objective, optimize_modes, select_mode
from .rates import SchemeKind, min_rate, stream_rates, sum_rate, user_rates

__all__ = ["RSMAPrecoderOptimizer"]


class RSMAPrecoderOptimizer(BaseEstimator):
    """Optimize RSMA precoders for one channel realization.

    Parameters
    ----------
    snr_db : float
        Transmit power over noise power, in dB.
    scheme : {"cs", "conv_nonsic", "conv_sic"}
    objective : {"sr", "mmf"}
        Sum rate or minimum user rate.
    delta : int
        Decoding-complexity budget; every mode it allows is tried.
    mode : str or None
        Fixed mode name such as ``"qpsk/qpsk"``; overrides ``delta``.
    sigma2 : float
        Noise variance.
    restarts : int
        Starting points per mode (one structured, the rest random).
    random_state : int
    barrier : BarrierConfig or None
        Optimizer settings; ``None`` uses the defaults.

    Attributes
    ----------
    mode_ : TransmissionMode
    precoder_ : ndarray of shape (n_t, K + 1)
    common_allocation_ : ndarray of shape (K,)
    objective_bits_ : float
        Closed-form objective at the solution.
    mode_objectives_ : dict
        Objective reached by each mode tried.
    result_ : OptResult
    """

    def __init__(self, snr_db=20.0, scheme="cs", objective="sr", delta=16, mode=None,
                 sigma2=1.0, restarts=3, random_state=0, barrier=None):
        self.snr_db = snr_db
        self.scheme = scheme
        self.objective = objective
        self.delta = delta
        self.mode = mode
        self.sigma2 = sigma2
        self.restarts = restarts
        self.random_state = random_state
        self.barrier = barrier

    def fit(self, H, y=None):
        h = check_channels(H)
        scheme = SchemeKind.parse(self.scheme)
        objective = Objective.parse(self.objective)
        sigma2 = check_positive(self.sigma2, "sigma2")
        restarts = check_int(self.restarts, "restarts", 1)
        seed = check_int(self.random_state, "random_state")
        if not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        modes = [mode_from_name(self.mode)] if self.mode else modes_for_complexity(self.delta)
        cfg = self.barrier if self.barrier is not None else BarrierConfig()
        P_T = 10.0 ** (self.snr_db / 10.0) * sigma2
        results = optimize_modes(h, modes, scheme, objective, cfg, P_T, sigma2, restarts, seed)
        best = select_mode(results)
        self.mode_ = best
        self.result_ = results[best]
        self.precoder_ = results[best].P_star.P
        self.common_allocation_ = results[best].c_star
        self.objective_bits_ = results[best].objective_bits
        self.mode_objectives_ = {m.name: r.objective_bits for m, r in results.items()}
        self.n_users_, self.n_t_ = h.shape
        return self

    def predict(self, H):
        """Per-user rates (bits) of the fitted precoder and allocation on ``H``."""
        check_is_fitted(self, "precoder_")
        h = check_channels(H, self.n_users_, self.n_t_)
        sr = stream_rates(self.precoder_, h, self.mode_, "approx", self.sigma2)
        return user_rates(self.scheme, sr, self.common_allocation_)

    def score(self, H, y=None):
        """Objective (bits) of the fitted solution on ``H``.

        For sum rate the common stream goes to the best user on ``H``
        (CS-RSMA); for max-min fairness the fitted allocation is kept.
        """
        check_is_fitted(self, "precoder_")
        h = check_channels(H, self.n_users_, self.n_t_)
        sr = stream_rates(self.precoder_, h, self.mode_, "approx", self.sigma2)
        if Objective.parse(self.objective) is Objective.SR:
            return sum_rate(self.scheme, sr)
        return min_rate(self.scheme, sr, self.common_allocation_)
