"""Precoder optimization for sum rate and max-min fairness.

Both problems are solved by subgradient ascent on a log-barrier
reformulation ``tau * f(P) + log(P_T - ||P||_F^2)`` with backtracking line
search, increasing ``tau`` geometrically. The rate terms ``f`` use the
closed-form GMI approximation in nats. Gradients are taken with respect to
``conj(P)``, so the first-order change along ``E`` is ``2 Re tr(E^H G)``.

Max-min fairness alternates the closed-form common-stream allocation with
one ascent step on a log-sum-exp smoothed minimum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from .alphabet import TransmissionMode, modes_for_complexity
from .gmi import LN2
from .rates import RateModel, Role, SchemeKind, StreamRates, min_rate, stream_rates, sum_rate

__all__ = [
    "Objective",
    "BarrierConfig",
    "Precoder",
    "TraceStep",
    "OptResult",
    "init_precoders",
    "sr_subgradient",
    "mmf_subgradient",
    "softmin_weights",
    "allocate_common_mmf",
    "maximize_sum_rate",
    "maximize_mmf",
    "optimize",
    "optimize_modes",
    "adaptive_mode_search",
    "select_mode",
    "MODE_TIE_BITS",
]

# objectives closer than this are treated as equal when choosing a mode
MODE_TIE_BITS = 1e-6


class Objective(str, Enum):
    SR = "sr"
    MMF = "mmf"

    @classmethod
    def parse(cls, value) -> "Objective":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())


@dataclass(frozen=True)
class BarrierConfig:
    tau0: float = 1.0
    beta: float = 10.0
    tau_max: float = 1e4
    eps: float = 1e-5
    v_max: int = 300
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    gamma: float = -30.0
    max_backtracks: int = 60

    def __post_init__(self):
        if not self.tau0 > 0:
            raise ValueError("tau0 must be > 0")
        if not self.beta > 1:
            raise ValueError("beta must be > 1")
        if not self.tau_max >= self.tau0:
            raise ValueError("tau_max must be >= tau0")
        if not self.eps > 0:
            raise ValueError("eps must be > 0")
        if self.v_max < 1:
            raise ValueError("v_max must be >= 1")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0 < self.armijo_shrink < 1:
            raise ValueError("armijo_shrink must lie in (0, 1)")
        if not self.gamma < 0:
            raise ValueError("gamma must be negative")


@dataclass(frozen=True)
class Precoder:
    """``P[:, 0]`` precodes the common stream, ``P[:, k + 1]`` user k's
    private stream; ``||P||_F^2`` must stay strictly below the budget."""

    P: np.ndarray
    power_budget: float

    def __post_init__(self):
        object.__setattr__(self, "P", np.asarray(self.P, dtype=complex))
        if self.power >= self.power_budget:
            raise ValueError(
                f"precoder power {self.power:.6g} is not strictly below the budget {self.power_budget:.6g}"
            )

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.P) ** 2))


class TraceStep(NamedTuple):
    """One accepted ascent step.

    ``objective`` is the barrier objective (nats) after the step and
    ``barrier_before`` its value before, both with the allocation used for
    the step. ``rate_bits`` is the rate objective after the step (sum rate,
    or the minimum user rate for max-min fairness).
    """

    outer_iter: int
    inner_iter: int
    objective: float
    barrier_before: float
    rate_bits: float
    tau: float
    power: float

    @property
    def barrier_after(self) -> float:
        return self.objective


@dataclass
class OptResult:
    P_star: Precoder
    c_star: np.ndarray
    objective_bits: float
    trace: list = field(default_factory=list)
    converged: bool = True
    mode: TransmissionMode | None = None
    scheme: SchemeKind | None = None
    objective_kind: Objective | None = None
    stream_rates: StreamRates | None = None


def _channels(H):
    return np.atleast_2d(np.asarray(getattr(H, "h", H), dtype=complex))


def _unit(v, fallback):
    n = np.linalg.norm(v)
    return v / n if n > 0 else fallback


def init_precoders(H, P_T: float, strategy="mrt_plus_common", restarts: int = 3,
                   rng_seed: int = 0, mode: TransmissionMode | None = None) -> list:
    """Interior starting points with ``||P||_F^2 = 0.95 P_T``.

    ``mrt_plus_common`` returns one structured start (private columns along
    the users' channels, common column along the dominant left singular
    vector of the stacked channels, power split evenly between the common
    and private blocks) followed by ``restarts - 1`` random ones; ``random``
    returns ``restarts`` random starts. If ``mode`` is given, columns of
    streams with the null alphabet are set to zero.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    strategy = str(strategy).lower()
    if strategy not in ("mrt_plus_common", "random"):
        raise ValueError(f"unknown init strategy {strategy!r}")
    h = _channels(H)
    K, n_t = h.shape
    target = 0.95 * P_T
    active = np.ones(K + 1, dtype=bool)
    if mode is not None:
        active[0] = not mode.common.is_null
        active[1:] = not mode.private.is_null
    rng = np.random.default_rng([int(rng_seed), 0x1A17])
    e1 = np.zeros(n_t, dtype=complex)
    e1[0] = 1.0

    out = []
    if strategy == "mrt_plus_common":
        P = np.zeros((n_t, K + 1), dtype=complex)
        U, _, _ = np.linalg.svd(h.T)
        P[:, 0] = U[:, 0]
        for k in range(K):
            P[:, k + 1] = _unit(h[k], e1) / np.sqrt(K)
        P[:, ~active] = 0.0
        # even split between the common column and the private block
        common_share = 0.5 if active[0] and active[1:].any() else float(active[0])
        P[:, 0] *= np.sqrt(common_share * target)
        P[:, 1:] *= np.sqrt((1.0 - common_share) * target)
        out.append(Precoder(P, P_T))
    while len(out) < restarts:
        P = rng.standard_normal((n_t, K + 1)) + 1j * rng.standard_normal((n_t, K + 1))
        P[:, ~active] = 0.0
        P *= np.sqrt(target / np.sum(np.abs(P) ** 2))
        out.append(Precoder(P, P_T))
    return out


def _select(values, scheme):
    return int(np.argmax(values)) if scheme is SchemeKind.CS else int(np.argmin(values))


def _private_role(scheme):
    return Role.PRIVATE_SIC if scheme.uses_sic else Role.PRIVATE_NONSIC


def _sr_value_grad(model, P, scheme, want_grad=True):
    roles = (Role.COMMON, _private_role(scheme))
    vals, grads = model.evaluate(P, roles, want_grad)
    kc = _select(vals[Role.COMMON], scheme)
    value = vals[Role.COMMON][kc] + vals[roles[1]].sum()
    if not want_grad:
        return value, None
    return value, grads[Role.COMMON][kc] + grads[roles[1]].sum(axis=0)


def sr_subgradient(P, H, mode: TransmissionMode, scheme, sigma2: float = 1.0) -> np.ndarray:
    """Subgradient (w.r.t. conj(P), nats) of the sum-rate objective.

    The common term is taken at the user with the smallest common rate for
    conventional RSMA and the largest for CS-RSMA (lowest index on ties).
    """
    scheme = SchemeKind.parse(scheme)
    P = np.asarray(getattr(P, "P", P), dtype=complex)
    return _sr_value_grad(RateModel(H, mode, sigma2), P, scheme)[1]


def softmin_weights(rates, gamma: float) -> np.ndarray:
    """Softmax of ``gamma * rates``; concentrates on the minimum as gamma -> -inf."""
    z = gamma * np.asarray(rates, dtype=float)
    z = np.exp(z - z.max())
    return z / z.sum()


def _smooth_min(rates, gamma):
    z = gamma * np.asarray(rates, dtype=float)
    m = z.max()
    return (m + math.log(np.exp(z - m).sum())) / gamma


def _mmf_rates(vals, c, scheme):
    I_c = vals[Role.COMMON]
    I_p = vals[_private_role(scheme)]
    if scheme is SchemeKind.CS:
        return c * I_c + I_p
    return c * I_c.min() + I_p


def _mmf_combine(vals, grads, scheme, c, gamma):
    per_user = _mmf_rates(vals, c, scheme)
    value = _smooth_min(per_user, gamma)
    if grads is None or grads[Role.COMMON] is None:
        return value, None
    w = softmin_weights(per_user, gamma)
    gc, gp = grads[Role.COMMON], grads[_private_role(scheme)]
    if scheme is SchemeKind.CS:
        G = np.einsum("k,kij->ij", w * c, gc)
    else:
        G = np.sum(w * c) * gc[int(np.argmin(vals[Role.COMMON]))]
    return value, G + np.einsum("k,kij->ij", w, gp)


def _mmf_value_grad(model, P, scheme, c, gamma, want_grad=True):
    vals, grads = model.evaluate(P, (Role.COMMON, _private_role(scheme)), want_grad)
    return _mmf_combine(vals, grads, scheme, c, gamma)


def mmf_subgradient(P, H, mode: TransmissionMode, scheme, c, gamma: float = -30.0,
                    sigma2: float = 1.0) -> np.ndarray:
    """Gradient (w.r.t. conj(P), nats) of the log-sum-exp smoothed minimum
    user rate for a fixed allocation ``c``."""
    if not gamma < 0:
        raise ValueError("gamma must be negative")
    scheme = SchemeKind.parse(scheme)
    P = np.asarray(getattr(P, "P", P), dtype=complex)
    c = np.asarray(c, dtype=float)
    return _mmf_value_grad(RateModel(H, mode, sigma2), P, scheme, c, gamma)[1]


def allocate_common_mmf(I_c_prime, I_p):
    """Allocation of the common stream maximizing the minimum user rate.

    Solves ``max_c min_k c_k I_c_prime[k] + I_p[k]`` over the simplex in
    closed form: users are ordered by increasing private rate and the number
    of users sharing the common stream is reduced from K until the
    equal-rate solution is non-negative. Returns ``(c, xi)`` where ``xi`` is
    the achieved minimum rate. For conventional RSMA pass the minimum common
    rate replicated for every user.
    """
    a = np.asarray(I_c_prime, dtype=float)
    b = np.asarray(I_p, dtype=float)
    K = len(a)
    if len(b) != K or K == 0:
        raise ValueError("I_c_prime and I_p must be non-empty and of equal length")
    if np.any(a <= 1e-12):
        return np.full(K, 1.0 / K), float(b.min())
    order = np.argsort(b, kind="stable")
    a_s, b_s = a[order], b[order]
    for n in range(K, 0, -1):
        inv = 1.0 / a_s[:n]
        xi = (1.0 + np.sum(inv * b_s[:n])) / np.sum(inv)
        c_head = xi * inv - inv * b_s[:n]
        if np.all(c_head >= 0):
            break
    c_sorted = np.zeros(K)
    # remove rounding drift so c lies exactly on the simplex
    c_sorted[:n] = c_head / c_head.sum()
    c = np.empty(K)
    c[order] = c_sorted
    return c, float(xi)


def _feasible_step(P, D, P_T):
    """Largest alpha keeping ||P + alpha D||^2 < P_T."""
    qa = float(np.sum(np.abs(D) ** 2))
    qb = 2.0 * float(np.real(np.vdot(P, D)))
    qc = float(np.sum(np.abs(P) ** 2)) - P_T
    if qa == 0.0:
        return math.inf
    return (-qb + math.sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa)


class _Ascent:
    """Barrier objective with Armijo backtracking along the printed direction
    ``tau g + P / (||P||^2 - P_T)``.

    The first trial step is the Barzilai-Borwein step from the previous
    accepted move when it is positive, otherwise twice the last step.
    Acceptance stays monotone.
    """

    def __init__(self, P_T, cfg: BarrierConfig):
        self.P_T = P_T
        self.cfg = cfg
        self.alpha = None
        self._last = None

    def reset(self):
        self._last = None

    def barrier(self, value, P, tau):
        slack = self.P_T - float(np.sum(np.abs(P) ** 2))
        return tau * value + math.log(slack) if slack > 0 else -math.inf

    def _trial(self, P, D):
        if self._last is not None:
            P_old, D_old = self._last
            s, y = P - P_old, D - D_old
            sy = float(np.real(np.vdot(s, y)))
            if sy < 0:
                return -float(np.sum(np.abs(s) ** 2)) / sy
        return 2.0 * self.alpha

    def step(self, P, tau, value, grad, evaluate):
        """Return ``(P_new, omega_old, omega_new, value_new)`` or ``None``."""
        cfg = self.cfg
        power = float(np.sum(np.abs(P) ** 2))
        D = tau * grad + P / (power - self.P_T)
        slope = 2.0 * float(np.sum(np.abs(D) ** 2))
        omega = self.barrier(value, P, tau)
        if slope == 0.0:
            return None
        alpha_max = 0.99 * _feasible_step(P, D, self.P_T)
        if self.alpha is None:
            self.alpha = 0.05 * math.sqrt(self.P_T) / math.sqrt(slope / 2.0)
        alpha = min(self._trial(P, D), alpha_max)
        self._last = (P, D)
        for _ in range(cfg.max_backtracks):
            P_new = P + alpha * D
            v_new = evaluate(P_new)
            omega_new = self.barrier(v_new, P_new, tau)
            if omega_new >= omega + cfg.armijo_c * alpha * slope:
                self.alpha = alpha
                return P_new, omega, omega_new, v_new
            alpha *= cfg.armijo_shrink
        self.alpha = alpha
        return None


def _tau_schedule(cfg):
    tau = cfg.tau0
    while True:
        yield tau
        tau *= cfg.beta
        if tau >= cfg.tau_max:
            return


def _run_sr(model, P0: Precoder, scheme, cfg):
    P_T = P0.power_budget
    P = P0.P.copy()
    asc = _Ascent(P_T, cfg)
    trace = []
    converged = True
    value, grad = _sr_value_grad(model, P, scheme)
    for outer, tau in enumerate(_tau_schedule(cfg)):
        prev = asc.barrier(value, P, tau)
        converged = False
        asc.reset()
        for v in range(cfg.v_max):
            res = asc.step(P, tau, value, grad,
                           lambda Q: _sr_value_grad(model, Q, scheme, want_grad=False)[0])
            if res is None:
                converged = True
                break
            P, before, after, _ = res
            value, grad = _sr_value_grad(model, P, scheme)
            trace.append(TraceStep(outer, v, after, before, value / LN2, tau,
                                   float(np.sum(np.abs(P) ** 2))))
            if abs(after - prev) < cfg.eps:
                converged = True
                break
            prev = after
    return P, trace, converged


def _allocation(vals, scheme, K):
    I_c = vals[Role.COMMON]
    I_p = vals[_private_role(scheme)]
    I_cp = I_c if scheme is SchemeKind.CS else np.full(K, I_c.min())
    return allocate_common_mmf(I_cp, I_p)[0]


def _run_mmf(model, P0: Precoder, scheme, cfg):
    P_T = P0.power_budget
    P = P0.P.copy()
    K = model.n_users
    asc = _Ascent(P_T, cfg)
    trace = []
    converged = True
    roles = (Role.COMMON, _private_role(scheme))
    vals, grads = model.evaluate(P, roles, True)
    for outer, tau in enumerate(_tau_schedule(cfg)):
        prev = None
        converged = False
        asc.reset()
        for v in range(cfg.v_max):
            c = _allocation(vals, scheme, K)
            value, grad = _mmf_combine(vals, grads, scheme, c, cfg.gamma)
            res = asc.step(P, tau, value, grad,
                           lambda Q: _mmf_value_grad(model, Q, scheme, c, cfg.gamma, want_grad=False)[0])
            if res is None:
                converged = True
                break
            P, before, after, _ = res
            vals, grads = model.evaluate(P, roles, True)
            true_min = float(np.min(_mmf_rates(vals, c, scheme)))
            trace.append(TraceStep(outer, v, after, before, true_min / LN2, tau,
                                   float(np.sum(np.abs(P) ** 2))))
            if prev is not None and abs(after - prev) < cfg.eps:
                converged = True
                break
            prev = after
    return P, trace, converged


def _finish(P, P_T, model, mode, scheme, objective, trace, converged):
    sr = stream_rates(P, model.h, mode, "approx", sigma2=model.sigma2)
    K = model.n_users
    if objective is Objective.SR:
        if scheme is SchemeKind.CS:
            c = np.zeros(K)
            c[int(np.argmax(sr.I_c))] = 1.0
        else:
            c = np.full(K, 1.0 / K)
        obj = sum_rate(scheme, sr)
    else:
        I_cp = sr.I_c if scheme is SchemeKind.CS else np.full(K, sr.I_c.min())
        c, _ = allocate_common_mmf(I_cp, sr.private(scheme))
        obj = min_rate(scheme, sr, c)
    return OptResult(Precoder(P, P_T), c, float(obj), trace, converged,
                     mode, scheme, objective, sr)


def _best(results):
    best = results[0]
    for r in results[1:]:
        if r.objective_bits > best.objective_bits:
            best = r
    return best


def maximize_sum_rate(H, mode: TransmissionMode, scheme, cfg: BarrierConfig = BarrierConfig(),
                      inits=None, sigma2: float = 1.0) -> OptResult:
    """Sum-rate maximization from each start in ``inits``; best result wins.

    For CS-RSMA the returned allocation puts the whole common stream on the
    user with the largest common rate.
    """
    scheme = SchemeKind.parse(scheme)
    if not inits:
        raise ValueError("at least one initial precoder is required")
    model = RateModel(H, mode, sigma2)
    results = []
    for P0 in inits:
        P, trace, conv = _run_sr(model, P0, scheme, cfg)
        results.append(_finish(P, P0.power_budget, model, mode, scheme, Objective.SR, trace, conv))
    return _best(results)


def maximize_mmf(H, mode: TransmissionMode, scheme, cfg: BarrierConfig = BarrierConfig(),
                 inits=None, sigma2: float = 1.0) -> OptResult:
    """Max-min fairness by alternating allocation updates and barrier ascent
    steps on the smoothed minimum; best result over ``inits`` wins.

    ``objective_bits`` is the unsmoothed minimum user rate.
    """
    scheme = SchemeKind.parse(scheme)
    if not inits:
        raise ValueError("at least one initial precoder is required")
    model = RateModel(H, mode, sigma2)
    results = []
    for P0 in inits:
        P, trace, conv = _run_mmf(model, P0, scheme, cfg)
        results.append(_finish(P, P0.power_budget, model, mode, scheme, Objective.MMF, trace, conv))
    return _best(results)


def optimize(H, mode, scheme, objective, cfg=BarrierConfig(), P_T: float = 1.0, sigma2: float = 1.0,
             restarts: int = 3, rng_seed: int = 0, init_strategy="mrt_plus_common") -> OptResult:
    """Convenience wrapper: build the starts and run the requested optimizer."""
    inits = init_precoders(H, P_T, init_strategy, restarts, rng_seed, mode=mode)
    run = maximize_sum_rate if Objective.parse(objective) is Objective.SR else maximize_mmf
    return run(H, mode, scheme, cfg, inits, sigma2)


def optimize_modes(H, modes, scheme, objective, cfg=BarrierConfig(), P_T: float = 1.0,
                   sigma2: float = 1.0, restarts: int = 3, rng_seed: int = 0) -> dict:
    """Run :func:`optimize` for every mode; returns ``{mode: OptResult}`` in order."""
    return {
        m: optimize(H, m, scheme, objective, cfg, P_T, sigma2, restarts, rng_seed)
        for m in modes
    }


def select_mode(results: dict):
    """Mode with the largest objective; modes within ``MODE_TIE_BITS`` of
    the best count as tied and the larger private alphabet wins."""
    top = max(r.objective_bits for r in results.values())
    tied = [m for m, r in results.items() if r.objective_bits >= top - MODE_TIE_BITS]
    return max(tied, key=lambda m: m.private.order)


def adaptive_mode_search(H, delta: int, scheme, objective, cfg=BarrierConfig(), P_T: float = 1.0,
                         sigma2: float = 1.0, restarts: int = 3, rng_seed: int = 0):
    """Optimize every mode allowed by complexity ``delta``; return the best
    ``(mode, result)`` as chosen by :func:`select_mode`."""
    results = optimize_modes(H, modes_for_complexity(delta), scheme, objective, cfg,
                             P_T, sigma2, restarts, rng_seed)
    best_mode = select_mode(results)
    return best_mode, results[best_mode]
