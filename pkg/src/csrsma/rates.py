"""Per-user achievable rates of 1-layer RSMA, with and without SIC, and of
codeword-segmentation RSMA, from per-stream GMI values.

Column 0 of a precoder serves the common stream; column ``k + 1`` serves
user ``k``'s private stream. When user ``k`` decodes

* the common stream, its own private stream is enumerated and all other
  private streams are treated as Gaussian;
* its private stream after SIC, the common stream is absent and other
  private streams are Gaussian;
* its private stream without SIC, the common stream is enumerated and other
  private streams are Gaussian.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .alphabet import TransmissionMode, product_alphabet
from .channel import derive_seed
from .gmi import (
    LN2,
    EffectiveChannel,
    StackedPrecoder,
    approx_nats_u,
    gmi_exact,
    symbol_tables,
)

__all__ = [
    "SchemeKind",
    "RateMethod",
    "Role",
    "StreamRates",
    "RateModel",
    "stream_rates",
    "user_rates",
    "sum_rate",
    "min_rate",
    "decoding_complexity",
    "feasible",
    "check_allocation",
    "scheme_roles",
]


class SchemeKind(str, Enum):
    CONV_SIC = "conv_sic"
    CONV_NONSIC = "conv_nonsic"
    CS = "cs"

    @classmethod
    def parse(cls, value) -> "SchemeKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        for v in cls:
            if key in (v.value, v.name.lower()):
                return v
        raise ValueError(f"unknown scheme {value!r}; expected one of {[v.value for v in cls]}")

    @property
    def uses_sic(self) -> bool:
        return self is SchemeKind.CONV_SIC


class RateMethod(str, Enum):
    EXACT = "exact"
    APPROX = "approx"

    @classmethod
    def parse(cls, value) -> "RateMethod":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())


class Role(str, Enum):
    COMMON = "common"
    PRIVATE_SIC = "private_sic"
    PRIVATE_NONSIC = "private_nonsic"


@dataclass(frozen=True)
class StreamRates:
    """Per-user stream GMIs in bits (arrays of length K).

    ``std_errors`` holds the Monte-Carlo standard errors (bits) keyed by role
    when the rates come from the exact GMI, and is ``None`` otherwise.
    """

    I_c: np.ndarray
    I_p_sic: np.ndarray
    I_p_nonsic: np.ndarray
    std_errors: dict | None = None

    @property
    def n_users(self) -> int:
        return len(self.I_c)

    def private(self, scheme) -> np.ndarray:
        return self.I_p_sic if SchemeKind.parse(scheme).uses_sic else self.I_p_nonsic


@dataclass(frozen=True)
class _Split:
    x_col: int
    i_cols: tuple
    j_cols: tuple
    tables: object

    @property
    def cols(self):
        return (self.x_col,) + self.i_cols + self.j_cols


def _splits(K: int, k: int, mode: TransmissionMode) -> dict:
    others = tuple(k2 + 1 for k2 in range(K) if k2 != k)
    J = product_alphabet([mode.private] * (K - 1))
    Ip = product_alphabet([mode.private])
    Ic = product_alphabet([mode.common])
    none = product_alphabet([])
    return {
        Role.COMMON: _Split(0, (k + 1,), others, symbol_tables(mode.common, Ip, J)),
        Role.PRIVATE_SIC: _Split(k + 1, (), others, symbol_tables(mode.private, none, J)),
        Role.PRIVATE_NONSIC: _Split(k + 1, (0,), others, symbol_tables(mode.private, Ic, J)),
    }


class RateModel:
    """Approximate stream GMIs (nats, unclamped) and their gradients for a
    fixed channel, mode and noise level; the precoder is the only variable."""

    def __init__(self, H, mode: TransmissionMode, sigma2: float = 1.0):
        self.h = np.atleast_2d(np.asarray(getattr(H, "h", H), dtype=complex))
        self.mode = mode
        self.sigma2 = float(sigma2)
        K = self.h.shape[0]
        self.splits = [_splits(K, k, mode) for k in range(K)]

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    def evaluate(self, P, roles=tuple(Role), want_grad=False):
        """Return ``(values, grads)`` keyed by role.

        ``values[role]`` has shape (K,), ``grads[role]`` shape (K, n_t, K+1)
        and holds derivatives w.r.t. ``conj(P)``.
        """
        P = np.asarray(P, dtype=complex)
        K = self.n_users
        values, grads = {}, {}
        for role in roles:
            vals = np.empty(K)
            g = np.zeros((K,) + P.shape, dtype=complex) if want_grad else None
            for k in range(K):
                sp = self.splits[k][role]
                cols = list(sp.cols)
                u = np.conj(self.h[k]) @ P[:, cols]
                vals[k], g_u = approx_nats_u(u, sp.tables, self.sigma2, want_grad)
                if want_grad:
                    g[k][:, cols] = np.outer(self.h[k], g_u)
            values[role] = vals
            grads[role] = g
        return values, grads


def _exact_rates(P, h, mode, sigma2, mc_samples, rng_seed, second_term, roles):
    K = h.shape[0]
    out = {r: np.full(K, np.nan) for r in Role}
    err = {r: np.full(K, np.nan) for r in Role}
    interferers = {Role.COMMON: [mode.private], Role.PRIVATE_SIC: [], Role.PRIVATE_NONSIC: [mode.common]}
    J = product_alphabet([mode.private] * (K - 1))
    # without a common stream both private receivers see the same signal
    alias = Role.PRIVATE_NONSIC if mode.common.is_null and Role.PRIVATE_NONSIC in roles else None
    for k in range(K):
        for role, sp in _splits(K, k, mode).items():
            if role not in roles or (role is Role.PRIVATE_SIC and alias is not None):
                continue
            stacked = StackedPrecoder.from_precoder(P, sp.x_col, sp.i_cols, sp.j_cols)
            eff = EffectiveChannel.from_precoder(h[k], stacked, sigma2)
            X = mode.common if role is Role.COMMON else mode.private
            est = gmi_exact(eff, X, product_alphabet(interferers[role]), J, mc_samples=mc_samples,
                            rng_seed=derive_seed(rng_seed, k), second_term=second_term)
            out[role][k] = est.value_bits
            err[role][k] = est.mc_std_error_bits
    if alias is not None and Role.PRIVATE_SIC in roles:
        out[Role.PRIVATE_SIC] = out[alias].copy()
        err[Role.PRIVATE_SIC] = err[alias].copy()
    return out, err


def stream_rates(P, H, mode: TransmissionMode, method="approx", sigma2: float = 1.0,
                 mc_samples: int = 2000, rng_seed: int = 0, power_budget=None,
                 second_term: str = "power_of_sum", roles=None) -> StreamRates:
    """Common, SIC-private and non-SIC-private GMIs of every user, in bits.

    ``method="approx"`` uses the closed form (clamped to ``[0, log2|X|]``);
    ``method="exact"`` the Monte-Carlo GMI with ``mc_samples`` noise draws.
    ``roles`` restricts the exact evaluation to a subset of
    :class:`Role`; skipped entries are NaN.
    """
    P = np.asarray(getattr(P, "P", P), dtype=complex)
    h = np.atleast_2d(np.asarray(getattr(H, "h", H), dtype=complex))
    K = h.shape[0]
    if P.ndim != 2 or P.shape != (h.shape[1], K + 1):
        raise ValueError(f"precoder must have shape {(h.shape[1], K + 1)}, got {P.shape}")
    if power_budget is not None and np.sum(np.abs(P) ** 2) > power_budget + 1e-9:
        raise ValueError("precoder exceeds the power budget")
    method = RateMethod.parse(method)
    if method is RateMethod.APPROX:
        values, _ = RateModel(h, mode, sigma2).evaluate(P)
        caps = {Role.COMMON: np.log2(mode.common.order)}
        out = {}
        for role, v in values.items():
            cap = caps.get(role, np.log2(mode.private.order))
            out[role] = np.clip(v / LN2, 0.0, cap)
        return StreamRates(out[Role.COMMON], out[Role.PRIVATE_SIC], out[Role.PRIVATE_NONSIC])
    roles = tuple(Role) if roles is None else tuple(Role(r) for r in roles)
    out, err = _exact_rates(P, h, mode, sigma2, mc_samples, rng_seed, second_term, roles)
    return StreamRates(out[Role.COMMON], out[Role.PRIVATE_SIC], out[Role.PRIVATE_NONSIC],
                       std_errors={r.value: e for r, e in err.items()})


def scheme_roles(scheme) -> tuple:
    """Roles whose rates enter ``scheme``."""
    scheme = SchemeKind.parse(scheme)
    return (Role.COMMON, Role.PRIVATE_SIC if scheme.uses_sic else Role.PRIVATE_NONSIC)


def check_allocation(c, n_users=None, atol=1e-12) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or (n_users is not None and len(c) != n_users):
        raise ValueError(f"allocation must be a vector of length {n_users}")
    if np.any(c < -atol) or abs(c.sum() - 1.0) > 1e-9:
        raise ValueError("allocation must be non-negative and sum to one")
    return c


def user_rates(scheme, sr: StreamRates, c) -> np.ndarray:
    """Per-user rates (bits) for a common-stream allocation ``c``."""
    scheme = SchemeKind.parse(scheme)
    c = check_allocation(c, sr.n_users)
    I_c = np.asarray(sr.I_c, dtype=float)
    if scheme is SchemeKind.CS:
        return c * I_c + np.asarray(sr.I_p_nonsic)
    return c * I_c.min() + np.asarray(sr.private(scheme))


def sum_rate(scheme, sr: StreamRates) -> float:
    """Sum rate with the best allocation: the common stream counts at its
    worst user for conventional RSMA and at its best user for CS-RSMA."""
    scheme = SchemeKind.parse(scheme)
    common = np.max(sr.I_c) if scheme is SchemeKind.CS else np.min(sr.I_c)
    return float(common + np.sum(sr.private(scheme)))


def min_rate(scheme, sr: StreamRates, c) -> float:
    return float(np.min(user_rates(scheme, sr, c)))


def decoding_complexity(mode: TransmissionMode) -> int:
    return mode.complexity


def feasible(mode: TransmissionMode, delta: int) -> bool:
    return mode.complexity <= int(delta)
