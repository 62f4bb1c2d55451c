"""Compiled inner loops for the GMI computations.

Symbol tables are complex 2-D arrays whose rows are stacked symbol vectors
``[x; i; j]``; ``u`` is the effective row channel ``h^H P_tilde``.

Every log-sum-exp is shifted so its largest exponent is 0, and the
remaining ``exp(-t)``, ``t >= 0``, go through :func:`_exp_neg`, which the
compiler can vectorize (``math.exp`` is an opaque call here).
"""
import math

import numpy as np
from numba import njit

# exp(-t) for t beyond this is below half an ulp of a sum whose largest
# term is 1 and is replaced by 0
_CUTOFF = 41.0
_EXP_TABLE = np.append(np.exp(-0.5 * np.arange(83)), 0.0)


@njit(inline="always", fastmath=True)
def _exp_neg(t, table):
    """exp(-t) for t >= 0; relative error below 1e-13, exactly 0 past the cutoff.

    exp(-t) = exp(-j/2) * exp(-f) with j = floor(2t) and f in [0, 1/2); the
    second factor is a degree-12 Taylor polynomial.
    """
    t = min(t, _CUTOFF + 0.5)
    j = int(2.0 * t)
    f = t - 0.5 * j
    p = 1.0 / 479001600.0
    p = p * -f + 1.0 / 39916800.0
    p = p * -f + 1.0 / 3628800.0
    p = p * -f + 1.0 / 362880.0
    p = p * -f + 1.0 / 40320.0
    p = p * -f + 1.0 / 5040.0
    p = p * -f + 1.0 / 720.0
    p = p * -f + 1.0 / 120.0
    p = p * -f + 1.0 / 24.0
    p = p * -f + 1.0 / 6.0
    p = p * -f + 0.5
    p = p * -f + 1.0
    p = p * -f + 1.0
    return table[j] * p


@njit(cache=True)
def exp_neg(t):
    """Vector version of the internal fast ``exp(-t)``, for testing."""
    out = np.empty_like(t)
    for i in range(t.size):
        out.flat[i] = _exp_neg(t.flat[i], _EXP_TABLE)
    return out


@njit(cache=True)
def _project(V, u):
    n, m = V.shape
    out = np.empty(n, dtype=np.complex128)
    for r in range(n):
        acc = 0j
        for c in range(m):
            acc += V[r, c] * u[c]
        out[r] = acc
    return out


@njit(cache=True, fastmath=True)
def approx_term(u, Vo, Vi, pw, denom, want_grad):
    """Mean over rows of Vo of log sum_rows(Vi) exp(-|u.(vo - vi)|^2 / denom).

    Also returns the derivative of that mean with respect to conj(u),
    where ``denom = sum_c pw_c |u_c|^2 + const``.
    """
    table = _EXP_TABLE
    no = Vo.shape[0]
    ni = Vi.shape[0]
    ncol = u.shape[0]
    yo = _project(Vo, u)
    mi = _project(Vi, u)
    q = np.empty(ni)
    w = np.empty(ni)
    er = np.empty(ni)
    ei = np.empty(ni)
    s2 = np.empty(ncol, dtype=np.complex128)
    grad = np.zeros(ncol, dtype=np.complex128)
    total = 0.0
    inv_d = 1.0 / denom
    d2 = denom * denom
    for o in range(no):
        qmin = np.inf
        for i in range(ni):
            dr = yo[o].real - mi[i].real
            di = yo[o].imag - mi[i].imag
            er[i] = dr
            ei[i] = di
            qi = (dr * dr + di * di) * inv_d
            q[i] = qi
            qmin = min(qmin, qi)
        ssum = 0.0
        for i in range(ni):
            wi = _exp_neg(q[i] - qmin, table)
            w[i] = wi
            ssum += wi
        total += math.log(ssum) - qmin
        if want_grad:
            s1 = 0j
            s3 = 0.0
            for c in range(ncol):
                s2[c] = 0j
            inv = 1.0 / ssum
            for i in range(ni):
                wi = w[i] * inv
                we = wi * complex(er[i], ei[i])
                s1 += we
                s3 += wi * q[i] * denom
                for c in range(ncol):
                    s2[c] += we * np.conj(Vi[i, c])
            for c in range(ncol):
                grad[c] += -(np.conj(Vo[o, c]) * s1 - s2[c]) * inv_d + s3 * pw[c] * u[c] / d2
    return total / no, grad / no


@njit(cache=True, fastmath=True)
def _row_lse(q, n, table):
    """log sum_b exp(-q[b]) over the first n entries."""
    qmin = np.inf
    for b in range(n):
        qmin = min(qmin, q[b])
    acc = 0.0
    for b in range(n):
        acc += _exp_neg(q[b] - qmin, table)
    return math.log(acc) - qmin


@njit(cache=True)
def exact_log_metric(yo, m, z, denom):
    """L[o, k, a] = log sum_b exp(-|yo[o] + z[k] - m[a, b]|^2 / denom)."""
    table = _EXP_TABLE
    no = yo.shape[0]
    nz = z.shape[0]
    na, nb = m.shape
    out = np.empty((no, nz, na))
    q = np.empty(nb)
    inv_d = 1.0 / denom
    for o in range(no):
        for k in range(nz):
            y = yo[o] + z[k]
            for a in range(na):
                for b in range(nb):
                    d = y - m[a, b]
                    q[b] = (d.real * d.real + d.imag * d.imag) * inv_d
                if nb == 1:
                    out[o, k, a] = -q[0]
                else:
                    out[o, k, a] = _row_lse(q, nb, table)
    return out


@njit(cache=True)
def shift_rows(L):
    """Split L into its row maxima and the non-positive offsets from them.

    For s >= 0, ``log sum_a exp(s L[a]) = s max(L) + log sum_a exp(s offset[a])``,
    so the offsets do not depend on s.
    """
    no, nz, na = L.shape
    top = np.empty((no, nz))
    offsets = np.empty((no, nz, na))
    for o in range(no):
        for k in range(nz):
            best = -np.inf
            for a in range(na):
                best = max(best, L[o, k, a])
            top[o, k] = best
            for a in range(na):
                offsets[o, k, a] = best - L[o, k, a]
    return top, offsets


@njit(cache=True, fastmath=True)
def shifted_lse_mean(top, offsets, s):
    """Per noise sample: mean over axis 0 of log sum_a exp(s * L[o, k, a]),
    with L given as ``shift_rows(L)``."""
    table = _EXP_TABLE
    no, nz, na = offsets.shape
    out = np.zeros(nz)
    for o in range(no):
        for k in range(nz):
            acc = 0.0
            for a in range(na):
                acc += _exp_neg(s * offsets[o, k, a], table)
            out[k] += s * top[o, k] + math.log(acc)
    return out / no


@njit(cache=True)
def scaled_lse_mean(L, s):
    """Per noise sample: mean over axis 0 of log sum_a exp(s * L[o, k, a])."""
    top, offsets = shift_rows(L)
    return shifted_lse_mean(top, offsets, s)


@njit(cache=True)
def streamed_lse_mean(yo, m, z, denom, s_values):
    """``scaled_lse_mean(exact_log_metric(...), s)`` for several s without
    materialising the metric table."""
    table = _EXP_TABLE
    no = yo.shape[0]
    nz = z.shape[0]
    na, nb = m.shape
    ns = s_values.shape[0]
    out = np.zeros((ns, nz))
    la = np.empty(na)
    q = np.empty(nb)
    inv_d = 1.0 / denom
    for o in range(no):
        for k in range(nz):
            y = yo[o] + z[k]
            for a in range(na):
                for b in range(nb):
                    d = y - m[a, b]
                    q[b] = (d.real * d.real + d.imag * d.imag) * inv_d
                la[a] = _row_lse(q, nb, table)
            best = -np.inf
            for a in range(na):
                best = max(best, la[a])
            for r in range(ns):
                s = s_values[r]
                acc = 0.0
                for a in range(na):
                    acc += _exp_neg(s * (best - la[a]), table)
                out[r, k] += s * best + math.log(acc)
    return out / no
