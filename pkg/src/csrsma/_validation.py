"""Input checks shared by the estimator and the command line."""
from __future__ import annotations

import numbers

import numpy as np

__all__ = ["check_channels", "check_precoder", "check_positive", "check_int"]


def check_channels(H, n_users=None, n_t=None) -> np.ndarray:
    """Return channels as a finite complex (K, n_t) array.

    Accepts a :class:`~csrsma.channel.ChannelRealization` or anything array
    like; a 1-D input is one user.
    """
    h = np.asarray(getattr(H, "h", H))
    if h.dtype == object:
        raise TypeError("channels must be numeric")
    h = np.atleast_2d(h.astype(complex))
    if h.ndim != 2 or h.size == 0:
        raise ValueError(f"channels must be a non-empty (K, n_t) array, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("channels contain NaN or inf")
    if n_users is not None and h.shape[0] != n_users:
        raise ValueError(f"expected {n_users} users, got {h.shape[0]}")
    if n_t is not None and h.shape[1] != n_t:
        raise ValueError(f"expected {n_t} transmit antennas, got {h.shape[1]}")
    return h


def check_precoder(P, n_users: int, n_t: int, power_budget=None) -> np.ndarray:
    P = np.asarray(getattr(P, "P", P), dtype=complex)
    if P.shape != (n_t, n_users + 1):
        raise ValueError(f"precoder must have shape {(n_t, n_users + 1)}, got {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValueError("precoder contains NaN or inf")
    if power_budget is not None and np.sum(np.abs(P) ** 2) >= power_budget:
        raise ValueError("precoder is not strictly inside the power budget")
    return P


def check_positive(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_int(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
