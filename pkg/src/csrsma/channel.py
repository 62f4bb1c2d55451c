"""Spatially correlated Rayleigh channels from the one-ring scattering model.

Covariances are built by extrapolated composite-midpoint quadrature over
the angular spread and realizations are drawn through the Karhunen-Loeve expansion
``h = U diag(sqrt(lambda)) w`` with ``w ~ CN(0, I)``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "CovarianceVariant",
    "OneRingParams",
    "CovarianceFactor",
    "ChannelRealization",
    "one_ring_covariance",
    "sample_channels",
    "derive_seed",
    "save_channels_csv",
    "load_channels_csv",
]

RANK_RTOL = 1e-9


class CovarianceVariant(str, Enum):
    """Phase term of the one-ring integrand.

    ``STANDARD`` uses ``pi (m-n) sin(alpha + theta)``; ``AS_PRINTED`` uses
    ``pi (alpha + theta) (m-n) sin(alpha)``.
    """

    STANDARD = "standard"
    AS_PRINTED = "printed"

    @classmethod
    def parse(cls, value) -> "CovarianceVariant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for v in cls:
            if key in (v.value, v.name.lower()):
                return v
        raise ValueError(f"unknown covariance variant {value!r}")


@dataclass(frozen=True)
class OneRingParams:
    n_t: int
    theta: float = np.pi / 3
    delta: float = np.pi / 18
    quadrature_points: int = 4096

    def __post_init__(self):
        if self.n_t < 1:
            raise ValueError("n_t must be >= 1")
        if not self.delta > 0:
            raise ValueError("angular spread delta must be > 0")
        if self.quadrature_points < 1000:
            raise ValueError("quadrature_points must be >= 1000")


@dataclass(frozen=True)
class CovarianceFactor:
    R: np.ndarray
    U: np.ndarray
    Lambda: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.Lambda)

    @classmethod
    def from_covariance(cls, R, rtol=RANK_RTOL) -> "CovarianceFactor":
        R = np.asarray(R, dtype=complex)
        R = 0.5 * (R + R.conj().T)
        lam, vec = np.linalg.eigh(R)
        lam, vec = lam[::-1], vec[:, ::-1]
        keep = lam > rtol * lam[0]
        return cls(R, vec[:, keep], lam[keep])


@dataclass(frozen=True)
class ChannelRealization:
    """Per-user channel vectors stacked as rows: ``h[k]`` is user k's channel."""

    h: np.ndarray
    seed_record: int = 0

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    @property
    def n_t(self) -> int:
        return self.h.shape[1]


def _phase(alpha, theta, lag, variant):
    if variant is CovarianceVariant.STANDARD:
        return np.pi * lag * np.sin(alpha + theta)
    return np.pi * (alpha + theta) * lag * np.sin(alpha)


def _midpoint_column(params, lags, q, variant):
    step = 2.0 * params.delta / q
    alpha = -params.delta + (np.arange(q) + 0.5) * step
    return np.exp(-1j * _phase(alpha[None, :], params.theta, lags[:, None], variant)).mean(axis=1)


def one_ring_covariance(params: OneRingParams, variant="standard") -> CovarianceFactor:
    """Covariance of a half-wavelength ULA under the one-ring model, factored.

    Entry ``(m, n)`` is the mean of ``exp(-1j * phase(alpha, m - n))`` over
    ``alpha`` uniform on ``[-delta, delta]``, evaluated with
    composite midpoint rules on ``params.quadrature_points`` and twice as
    many nodes, combined by Richardson extrapolation. Only the lags ``0..n_t-1``
    are integrated; the lower triangle is filled by conjugation.
    """
    variant = CovarianceVariant.parse(variant)
    lags = np.arange(params.n_t)
    q = params.quadrature_points
    coarse = _midpoint_column(params, lags, q, variant)
    fine = _midpoint_column(params, lags, 2 * q, variant)
    # one Richardson step cancels the O(h^2) midpoint error term
    column = (4.0 * fine - coarse) / 3.0
    column[0] = 1.0
    idx = lags[:, None] - lags[None, :]
    R = np.where(idx >= 0, column[np.abs(idx)], np.conj(column[np.abs(idx)]))
    return CovarianceFactor.from_covariance(R)


def derive_seed(*keys: int) -> int:
    """Deterministically mix integer keys into one 63-bit seed."""
    ss = np.random.SeedSequence([int(k) & 0xFFFFFFFFFFFFFFFF for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def sample_channels(factors, rng_seed: int, realization: int = 0) -> ChannelRealization:
    """Draw one channel per user from its covariance factor.

    Each user's draw depends only on ``(rng_seed, realization, user index)``.
    """
    rows = []
    for k, f in enumerate(factors):
        rng = np.random.default_rng([int(rng_seed), int(realization), k])
        w = (rng.standard_normal(f.rank) + 1j * rng.standard_normal(f.rank)) / np.sqrt(2.0)
        rows.append(f.U @ (np.sqrt(f.Lambda) * w))
    return ChannelRealization(np.array(rows), seed_record=int(rng_seed))


def save_channels_csv(path, channels: ChannelRealization) -> None:
    """One row per user: ``re0, im0, re1, im1, ...``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for hk in channels.h:
            writer.writerow([repr(float(v)) for v in np.column_stack([hk.real, hk.imag]).ravel()])


def load_channels_csv(path) -> ChannelRealization:
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: no channel rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths.pop() % 2:
        raise ValueError(f"{path}: every row needs the same even number of values")
    arr = np.array(rows)
    return ChannelRealization(arr[:, 0::2] + 1j * arr[:, 1::2])
