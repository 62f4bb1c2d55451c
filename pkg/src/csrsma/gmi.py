"""Generalized mutual information of a finite-alphabet stream decoded with
part of the interference approximated as Gaussian noise.

The received sample is ``y = a x + B i + C j + z`` with ``z ~ CN(0, sigma2)``.
The decoder enumerates the desired symbol ``x`` and the interference vector
``i`` but replaces ``C j`` by Gaussian noise of the same power.

Three quantities are provided:

* :func:`gmi_exact` -- Monte-Carlo evaluation of the GMI with the supremum
  over the decoding exponent ``s`` found numerically;
* :func:`gmi_approx` -- the noise-free closed-form approximation;
* :func:`gmi_approx_grad` -- its gradient with respect to the stacked
  precoder, in nats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .alphabet import Alphabet, VectorAlphabet, product_alphabet

__all__ = [
    "EffectiveChannel",
    "StackedPrecoder",
    "GmiEstimate",
    "SymbolTables",
    "symbol_tables",
    "gmi_exact",
    "gmi_approx",
    "gmi_approx_nats",
    "gmi_approx_grad",
    "S_BOUNDS",
]

LN2 = math.log(2.0)
S_BOUNDS = (0.05, 5.0)
S_GRID_POINTS = 17
S_REL_TOL = 1e-3
_TABLE_LIMIT = 2.5e7  # float64 entries kept in memory for the s-search

SECOND_TERM_GROUPINGS = ("power_of_sum", "sum_of_powers")


@dataclass(frozen=True)
class EffectiveChannel:
    """Scalar gains seen by one receiver: desired ``a``, enumerated
    interference ``B`` and Gaussian-treated interference ``C``."""

    a: complex
    B: np.ndarray
    C: np.ndarray
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "B", np.atleast_1d(np.asarray(self.B, dtype=complex)))
        object.__setattr__(self, "C", np.atleast_1d(np.asarray(self.C, dtype=complex)))
        if not self.sigma2 > 0:
            raise ValueError(f"noise variance must be positive, got {self.sigma2}")

    @property
    def u(self) -> np.ndarray:
        return np.concatenate([[complex(self.a)], self.B, self.C])

    @classmethod
    def from_precoder(cls, h, sp: "StackedPrecoder", sigma2: float) -> "EffectiveChannel":
        u = np.conj(h) @ sp.P_tilde
        return cls(u[0], u[1:1 + sp.n_i], u[1 + sp.n_i:], sigma2)


@dataclass(frozen=True)
class StackedPrecoder:
    """Columns ``[p_x | P_i | P_j]`` gathered from a global precoder.

    ``column_map[t]`` is the global column index of stacked column ``t``.
    """

    P_tilde: np.ndarray
    column_map: tuple
    n_i: int

    @property
    def n_j(self) -> int:
        return self.P_tilde.shape[1] - 1 - self.n_i

    @classmethod
    def from_precoder(cls, P, x_col, i_cols=(), j_cols=()) -> "StackedPrecoder":
        cols = (int(x_col),) + tuple(int(c) for c in i_cols) + tuple(int(c) for c in j_cols)
        if len(set(cols)) != len(cols):
            raise ValueError(f"stacked columns must be distinct, got {cols}")
        return cls(np.asarray(P)[:, cols], cols, len(i_cols))

    def scatter(self, G_tilde, n_cols: int) -> np.ndarray:
        """Place a stacked-shape gradient back into global column order."""
        G = np.zeros((G_tilde.shape[0], n_cols), dtype=complex)
        G[:, list(self.column_map)] += G_tilde
        return G


@dataclass(frozen=True)
class GmiEstimate:
    value_bits: float
    s_opt: float
    mc_std_error_bits: float
    samples: int
    s_bounds: tuple = S_BOUNDS


@dataclass(frozen=True)
class SymbolTables:
    """Enumerated symbol vectors for one (X, I, J) role split.

    ``outer``/``inner`` feed the first (all-hypotheses) term and
    ``outer_i``/``inner_i`` the second (interference-only) term.
    """

    n_x: int
    n_i: int
    outer: np.ndarray
    inner: np.ndarray
    outer_i: np.ndarray
    inner_i: np.ndarray
    j_power: np.ndarray = field(repr=False)


_TABLE_CACHE: dict = {}


def _key(alphabets):
    return tuple(a.name for a in alphabets)


def symbol_tables(X: Alphabet, I: VectorAlphabet, J: VectorAlphabet) -> SymbolTables:
    key = (X.name, _key(I.components), _key(J.components))
    cached = _TABLE_CACHE.get(key)
    if cached is not None:
        return cached
    dI, dJ = I.dims, J.dims
    ncol = 1 + dI + dJ
    x = X.points
    iv, jv = I.vectors, J.vectors
    nx, ni, nj = len(x), len(iv), len(jv)

    outer = np.zeros((nx, ni, nj, ncol), dtype=complex)
    outer[..., 0] = x[:, None, None]
    outer[..., 1:1 + dI] = iv[None, :, None, :]
    outer[..., 1 + dI:] = jv[None, None, :, :]
    inner = np.zeros((nx, ni, ncol), dtype=complex)
    inner[..., 0] = x[:, None]
    inner[..., 1:1 + dI] = iv[None, :, :]

    outer_i = np.zeros((ni, nj, ncol), dtype=complex)
    outer_i[..., 1:1 + dI] = iv[:, None, :]
    outer_i[..., 1 + dI:] = jv[None, :, :]
    inner_i = np.zeros((ni, ncol), dtype=complex)
    inner_i[:, 1:1 + dI] = iv

    j_power = np.zeros(ncol)
    j_power[1 + dI:] = J.powers
    tables = SymbolTables(
        nx, ni,
        np.ascontiguousarray(outer.reshape(-1, ncol)),
        np.ascontiguousarray(inner.reshape(-1, ncol)),
        np.ascontiguousarray(outer_i.reshape(-1, ncol)),
        np.ascontiguousarray(inner_i),
        j_power,
    )
    _TABLE_CACHE[key] = tables
    return tables


def _check(eff: EffectiveChannel, X, I, J):
    if not isinstance(X, Alphabet):
        raise TypeError("X must be an Alphabet")
    if I.dims != len(eff.B) or J.dims != len(eff.C):
        raise ValueError(
            f"effective channel has {len(eff.B)} enumerated and {len(eff.C)} Gaussian "
            f"interferers but alphabets have dims {I.dims} and {J.dims}"
        )


def _as_vector_alphabet(A) -> VectorAlphabet:
    if isinstance(A, VectorAlphabet):
        return A
    if isinstance(A, Alphabet):
        return product_alphabet([A])
    return product_alphabet(list(A))


def _gaussian_power(u, tables) -> float:
    return float(np.sum(tables.j_power * (u.real ** 2 + u.imag ** 2)))


def approx_nats_u(u, tables: SymbolTables, sigma2: float, want_grad=False):
    """Unclamped approximation (nats) and its derivative w.r.t. conj(u)."""
    if tables.n_x == 1:
        return 0.0, np.zeros(len(u), dtype=complex)
    denom = _gaussian_power(u, tables) + 2.0 * sigma2
    t1, g1 = _kernels.approx_term(u, tables.outer, tables.inner, tables.j_power, denom, want_grad)
    t2, g2 = _kernels.approx_term(u, tables.outer_i, tables.inner_i, tables.j_power, denom, want_grad)
    return math.log(tables.n_x) - t1 + t2, g2 - g1


def gmi_approx_nats(eff: EffectiveChannel, X, I, J) -> float:
    """Closed-form approximation in nats, without clamping."""
    I, J = _as_vector_alphabet(I), _as_vector_alphabet(J)
    _check(eff, X, I, J)
    value, _ = approx_nats_u(eff.u, symbol_tables(X, I, J), eff.sigma2)
    return value


def gmi_approx(eff: EffectiveChannel, X, I, J) -> float:
    """Closed-form GMI approximation in bits, clamped to ``[0, log2|X|]``."""
    bits = gmi_approx_nats(eff, X, I, J) / LN2
    return float(min(max(bits, 0.0), math.log2(X.order)))


def gmi_approx_grad(h, sp: StackedPrecoder, X, I, J, sigma2: float) -> np.ndarray:
    """Gradient of :func:`gmi_approx_nats` with respect to ``conj(sp.P_tilde)``.

    For a perturbation ``E`` of ``P_tilde`` the first-order change of the
    approximation is ``2 * Re(trace(E^H G))``.
    """
    I, J = _as_vector_alphabet(I), _as_vector_alphabet(J)
    h = np.asarray(h, dtype=complex)
    eff = EffectiveChannel.from_precoder(h, sp, sigma2)
    _check(eff, X, I, J)
    _, g_u = approx_nats_u(eff.u, symbol_tables(X, I, J), sigma2, want_grad=True)
    return np.outer(h, g_u)


def _noise(samples, sigma2, seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((2, samples))
    return np.sqrt(sigma2 / 2.0) * (w[0] + 1j * w[1])


class _ExactObjective:
    """Per-noise-sample GMI contributions as a function of s (nats)."""

    def __init__(self, u, tables, sigma2, z, grouping):
        self.log_nx = math.log(tables.n_x)
        denom = _gaussian_power(u, tables) + sigma2
        nx, ni = tables.n_x, tables.n_i
        yo = tables.outer @ u
        m = (tables.inner @ u).reshape(nx, ni)
        self.grouping = grouping
        self.denom, self.yo, self.m, self.z = denom, yo, m, z
        size = len(yo) * len(z) * nx
        self.table = None
        if size <= _TABLE_LIMIT:
            self.table = _kernels.shift_rows(_kernels.exact_log_metric(yo, m, z, denom))

        y2 = tables.outer_i @ u
        m2 = (tables.inner_i @ u).reshape(1, ni)
        if grouping == "power_of_sum":
            # s * log sum exp(...) -> s-independent table
            self.second = _kernels.scaled_lse_mean(_kernels.exact_log_metric(y2, m2, z, denom), 1.0)
            self.raw2 = None
        else:
            d = y2[:, None, None] + z[None, :, None] - m2[0][None, None, :]
            self.raw2 = -(d.real ** 2 + d.imag ** 2) / denom
            self.second = None

    def per_sample(self, s_values):
        s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
        if self.table is not None:
            first = np.array([_kernels.shifted_lse_mean(*self.table, s) for s in s_values])
        else:
            first = _kernels.streamed_lse_mean(self.yo, self.m, self.z, self.denom, s_values)
        if self.second is not None:
            second = s_values[:, None] * self.second[None, :]
        else:
            second = np.array([_kernels.scaled_lse_mean(self.raw2, s) for s in s_values])
        return self.log_nx - first + second

    def mean(self, s):
        return float(self.per_sample([s])[0].mean())


def _golden_max(f, lo, hi, rel_tol, best_s, best_val):
    """Golden-section search for the maximum of a concave f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    for s, v in ((c, fc), (d, fd)):
        if v > best_val:
            best_s, best_val = s, v
    while hi - lo > rel_tol * best_s:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
            s, v = c, fc
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
            s, v = d, fd
        if v > best_val:
            best_s, best_val = s, v
    return best_s, best_val


def gmi_exact(eff: EffectiveChannel, X, I, J, mc_samples: int = 2000, rng_seed: int = 0,
              s=None, second_term: str = "power_of_sum") -> GmiEstimate:
    """Monte-Carlo GMI in bits.

    The expectation over the noise uses ``mc_samples`` draws shared by every
    symbol hypothesis and every value of ``s``. With ``s=None`` the
    supremum over ``s`` is taken: a log-spaced grid on ``S_BOUNDS`` (plus
    ``s = 1``) refined by golden-section search to relative width 1e-3.
    A fixed ``s`` evaluates that point only.

    ``second_term`` selects how the exponent enters the interference-only
    term: ``"power_of_sum"`` raises the whole sum over hypotheses to ``s``,
    ``"sum_of_powers"`` raises each summand. They agree at ``s = 1``.
    """
    if mc_samples < 100:
        raise ValueError(f"mc_samples must be >= 100, got {mc_samples}")
    if second_term not in SECOND_TERM_GROUPINGS:
        raise ValueError(f"second_term must be one of {SECOND_TERM_GROUPINGS}")
    I, J = _as_vector_alphabet(I), _as_vector_alphabet(J)
    _check(eff, X, I, J)
    if X.order == 1:
        return GmiEstimate(0.0, 1.0 if s is None else float(s), 0.0, mc_samples)

    tables = symbol_tables(X, I, J)
    z = _noise(mc_samples, eff.sigma2, rng_seed)
    obj = _ExactObjective(eff.u, tables, eff.sigma2, z, second_term)

    if s is not None:
        s_opt = float(s)
        if s_opt < 0:
            raise ValueError("s must be non-negative")
    else:
        grid = np.unique(np.append(np.geomspace(*S_BOUNDS, S_GRID_POINTS), 1.0))
        values = obj.per_sample(grid).mean(axis=1)
        b = int(np.argmax(values))
        lo, hi = grid[max(b - 1, 0)], grid[min(b + 1, len(grid) - 1)]
        s_opt, _ = _golden_max(obj.mean, lo, hi, S_REL_TOL, grid[b], values[b])
    samples = obj.per_sample([s_opt])[0] / LN2
    value = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(len(samples)))
    return GmiEstimate(max(value, 0.0), float(s_opt), se, mc_samples)
