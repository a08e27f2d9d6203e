"""Hot loops: path enumeration and trajectory sampling over the induced chain.

Each kernel exists once as a plain-Python function and is JIT-compiled with
numba unless the environment variable FLOWLDP_NO_NUMBA is set to a nonzero
value (or numba is unavailable).  The chain is passed as flat arrays:

    succ[state, symbol]  -> successor state index, or -1 if forbidden
    kprob[state, symbol] -> transition probability of the induced chain
    tau_s[state]         -> roof value of the cell
    ghat_s[state]        -> flow observable value on the cell
    pi[state]            -> stationary probability

A flow point is (cell, height u in [0, tau)).  Over a time horizon T the
integral of the observable is piecewise affine in the starting height u,
which the enumeration kernels exploit in closed form.
"""

import cmath
import os

import numpy as np

_MAX_DEPTH = 4096


def _gamma_transform(succ, kprob, tau_s, ghat_s, pi, zre, zim, a, T, max_nodes):
    """Sum over states/paths of pi * integral_0^tau0 e^{z((G-a)^T(u))} du.

    Returns (real, imag, nodes, overflow_flag).  Caller divides by the mean
    roof to get the flow-measure expectation.
    """
    n_states, k = succ.shape
    z = complex(zre, zim)
    acc = complex(0.0, 0.0)
    nodes = 0
    st = np.empty(_MAX_DEPTH, dtype=np.int64)
    sym = np.empty(_MAX_DEPTH + 1, dtype=np.int64)
    S = np.empty(_MAX_DEPTH, dtype=np.float64)
    w = np.empty(_MAX_DEPTH, dtype=np.float64)
    gmid = np.empty(_MAX_DEPTH, dtype=np.float64)
    for s0 in range(n_states):
        if pi[s0] <= 0.0:
            continue
        tau0 = tau_s[s0]
        g0 = ghat_s[s0]
        # endings inside the starting cell: u + T < tau0, value (g0 - a) T
        if T < tau0:
            acc += pi[s0] * (tau0 - T) * cmath.exp(z * ((g0 - a) * T))
        st[0] = s0
        S[0] = tau0
        w[0] = pi[s0]
        gmid[0] = 0.0
        d = 1
        sym[1] = 0
        while d >= 1:
            if sym[d] >= k:
                d -= 1
                continue
            b = sym[d]
            sym[d] += 1
            p = st[d - 1]
            s = succ[p, b]
            if s < 0:
                continue
            nodes += 1
            if nodes > max_nodes:
                return acc.real, acc.imag, nodes, 1
            wgt = w[d - 1] * kprob[p, b]
            gm = 0.0 if d == 1 else gmid[d - 1] + ghat_s[st[d - 1]] * tau_s[st[d - 1]]
            Sprev = S[d - 1]
            Sj = Sprev + tau_s[s]
            lo = Sprev - T
            if lo < 0.0:
                lo = 0.0
            hi = Sj - T
            if hi > tau0:
                hi = tau0
            if hi > lo:
                c1 = ghat_s[s] - g0
                c0 = g0 * tau0 + gm + ghat_s[s] * (T - Sprev) - a * T
                zc1 = z * c1
                if abs(zc1) * (hi - lo) < 1e-8:
                    acc += wgt * (hi - lo) * cmath.exp(z * (c0 + c1 * 0.5 * (lo + hi)))
                else:
                    acc += wgt * cmath.exp(z * c0) * (cmath.exp(zc1 * hi) - cmath.exp(zc1 * lo)) / zc1
            if Sj < T + tau0 and d + 1 < _MAX_DEPTH:
                st[d] = s
                S[d] = Sj
                w[d] = wgt
                gmid[d] = gm
                sym[d + 1] = 0
                d += 1
    return acc.real, acc.imag, nodes, 0


def _interval_measure(succ, kprob, tau_s, ghat_s, pi, a, T, eps, max_nodes):
    """Exact base x height measure of {|(G-a)^T| < eps}; caller divides by mean roof."""
    n_states, k = succ.shape
    acc = 0.0
    nodes = 0
    st = np.empty(_MAX_DEPTH, dtype=np.int64)
    sym = np.empty(_MAX_DEPTH + 1, dtype=np.int64)
    S = np.empty(_MAX_DEPTH, dtype=np.float64)
    w = np.empty(_MAX_DEPTH, dtype=np.float64)
    gmid = np.empty(_MAX_DEPTH, dtype=np.float64)
    for s0 in range(n_states):
        if pi[s0] <= 0.0:
            continue
        tau0 = tau_s[s0]
        g0 = ghat_s[s0]
        if T < tau0 and abs((g0 - a) * T) < eps:
            acc += pi[s0] * (tau0 - T)
        st[0] = s0
        S[0] = tau0
        w[0] = pi[s0]
        gmid[0] = 0.0
        d = 1
        sym[1] = 0
        while d >= 1:
            if sym[d] >= k:
                d -= 1
                continue
            b = sym[d]
            sym[d] += 1
            p = st[d - 1]
            s = succ[p, b]
            if s < 0:
                continue
            nodes += 1
            if nodes > max_nodes:
                return acc, nodes, 1
            wgt = w[d - 1] * kprob[p, b]
            gm = 0.0 if d == 1 else gmid[d - 1] + ghat_s[st[d - 1]] * tau_s[st[d - 1]]
            Sprev = S[d - 1]
            Sj = Sprev + tau_s[s]
            lo = Sprev - T
            if lo < 0.0:
                lo = 0.0
            hi = Sj - T
            if hi > tau0:
                hi = tau0
            if hi > lo:
                c1 = ghat_s[s] - g0
                c0 = g0 * tau0 + gm + ghat_s[s] * (T - Sprev) - a * T
                if c1 == 0.0:
                    if abs(c0) < eps:
                        acc += wgt * (hi - lo)
                else:
                    u1 = (-eps - c0) / c1
                    u2 = (eps - c0) / c1
                    if u1 > u2:
                        u1, u2 = u2, u1
                    if u1 < lo:
                        u1 = lo
                    if u2 > hi:
                        u2 = hi
                    if u2 > u1:
                        acc += wgt * (u2 - u1)
            if Sj < T + tau0 and d + 1 < _MAX_DEPTH:
                st[d] = s
                S[d] = Sj
                w[d] = wgt
                gmid[d] = gm
                sym[d + 1] = 0
                d += 1
    return acc, nodes, 0


def _simulate_values(succ, kcum, tau_s, ghat_s, start_cum, T, a, n_samples, seed):
    """Sample n flow points, evolve each for time T, return (G - a)^T values.

    start_cum is the cumulative start-state distribution (stationary law
    weighted by the roof); heights are uniform within the starting cell.
    """
    n_states, k = succ.shape
    np.random.seed(seed)
    out = np.empty(n_samples)
    for i in range(n_samples):
        r = np.random.random()
        s = 0
        while s < n_states - 1 and start_cum[s] <= r:
            s += 1
        u = np.random.random() * tau_s[s]
        t_rem = T
        dt = tau_s[s] - u
        val = 0.0
        while dt < t_rem:
            val += ghat_s[s] * dt
            t_rem -= dt
            r = np.random.random()
            b = 0
            while b < k - 1 and kcum[s, b] <= r:
                b += 1
            s = succ[s, b]
            dt = tau_s[s]
        val += ghat_s[s] * t_rem
        out[i] = val - a * T
    return out


def _use_numba() -> bool:
    flag = os.environ.get("FLOWLDP_NO_NUMBA", "0")
    return flag in ("", "0", "false", "False")


USING_NUMBA = False
gamma_transform = _gamma_transform
interval_measure = _interval_measure
simulate_values = _simulate_values

if _use_numba():
    try:
        from numba import njit

        gamma_transform = njit(cache=True)(_gamma_transform)
        interval_measure = njit(cache=True)(_interval_measure)
        simulate_values = njit(cache=True)(_simulate_values)
        USING_NUMBA = True
    except ImportError:
        pass
