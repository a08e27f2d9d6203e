"""Suspension-flow semantics over the shift: roof, flow pressure, sampling,
and the exact moment oracle Gamma_z(T).

The flow lives under the roof tau; the observable is constant on each cell,
G(x, t) = Ghat(x) for 0 <= t < tau(x), so g = Ghat * tau at the shift level.
The flow equilibrium is d(mu x Lebesgue) / integral(tau d mu).

All flow computations go through an induced Markov chain on (m+1)-word
states, where every model potential is a per-state constant.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import DegenerateVariance, EnumerationCap, RootBracketFailure
from .shift import ENUMERATION_CAP, SymbolicSystem, cyclic_birkhoff_sum, periodic_orbits
from .transfer import CylinderPotential, RpfData, markov_kernel, rpf


@dataclass
class ChainArrays:
    """Flat-array view of an induced Gibbs chain, ready for the kernels."""

    states: tuple
    index: dict
    succ: np.ndarray
    kprob: np.ndarray
    kcum: np.ndarray
    tau_s: np.ndarray
    ghat_s: np.ndarray
    pi: np.ndarray
    start_cum: np.ndarray
    mean_roof: float
    kernel: np.ndarray

    def state_values(self, potential: CylinderPotential) -> np.ndarray:
        return np.array([potential(w) for w in self.states])


def chain_arrays(data: RpfData, tau: CylinderPotential, ghat: CylinderPotential) -> ChainArrays:
    """Build kernel-ready arrays from RPF data on (m+1)-word states."""
    sys = data.matrix.system
    states = data.states
    L = data.state_len
    if L < tau.m + 1 or L < ghat.m + 1:
        raise ValueError("state length too short for the roof/observable memory")
    index = data.matrix.index
    n = len(states)
    K = markov_kernel(data)
    succ = np.full((n, sys.k), -1, dtype=np.int64)
    kprob = np.zeros((n, sys.k))
    for w, i in index.items():
        for b in range(sys.k):
            if sys.transition[w[-1], b]:
                j = index[w[1:] + (b,)]
                succ[i, b] = j
                kprob[i, b] = K[i, j]
    tau_s = np.array([tau(w) for w in states], dtype=float)
    ghat_s = np.array([ghat(w) for w in states], dtype=float)
    pi = data.mu.copy()
    start = pi * tau_s
    mean_roof = float(start.sum())
    return ChainArrays(
        states=states,
        index=index,
        succ=succ,
        kprob=kprob,
        kcum=np.cumsum(kprob, axis=1),
        tau_s=tau_s,
        ghat_s=ghat_s,
        pi=pi,
        start_cum=np.cumsum(start / mean_roof),
        mean_roof=mean_roof,
        kernel=K,
    )


def flow_pressure(sys: SymbolicSystem, base: CylinderPotential, tau: CylinderPotential,
                  tol: float = 1e-13, max_iter: int = 200) -> float:
    """Unique s* with Pr_sigma(base - s*tau) = 0, by safeguarded Newton.

    The map s -> pressure is strictly decreasing with derivative
    -integral(tau d mu_{base - s tau}), which is available exactly.
    """
    if tau.is_complex or float(np.real(tau.min_value())) <= 0.0:
        raise RootBracketFailure("roof function must be strictly positive")

    L = max(base.m, tau.m) + 1

    def eval_at(s):
        data = rpf(sys, base - s * tau, state_len=L)
        roof = float(data.mu @ np.array([tau(w) for w in data.states]))
        return data.pressure, roof

    s = 0.0
    lo, hi = -math.inf, math.inf
    for _ in range(max_iter):
        pres, roof = eval_at(s)
        if abs(pres) <= tol:
            return s
        if pres > 0:
            lo = max(lo, s)
        else:
            hi = min(hi, s)
        step = pres / roof
        s_new = s + step
        if not (lo < s_new < hi):
            if math.isinf(lo) or math.isinf(hi):
                s_new = s + math.copysign(max(1.0, 2 * abs(step)), step)
            else:
                s_new = 0.5 * (lo + hi)
        if s_new == s:
            return s
        s = s_new
    raise RootBracketFailure(f"pressure root not found to {tol} in {max_iter} iterations")


@dataclass
class FlowMeasure:
    """Normalized flow equilibrium: base Gibbs law, mean roof, 1/mean_roof."""

    base: RpfData
    mean_roof: float

    @property
    def normalization(self) -> float:
        return 1.0 / self.mean_roof


@dataclass
class SuspensionModel:
    """Normalized suspension model: flow pressure of F is 0."""

    system: SymbolicSystem
    f: CylinderPotential
    tau: CylinderPotential
    ghat: CylinderPotential
    diagnostics: dict = field(default_factory=dict)
    _chain: ChainArrays = field(default=None, repr=False)
    _rpf: RpfData = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return max(self.f.m, self.tau.m, self.ghat.m)

    @property
    def state_len(self) -> int:
        return self.m + 1

    @property
    def g(self) -> CylinderPotential:
        """Shift-level observable g = Ghat * tau."""
        m = self.m
        gh, tu = self.ghat.lift(m), self.tau.lift(m)
        return CylinderPotential(self.system, m, {w: gh.table[w] * tu.table[w] for w in gh.table})

    @property
    def base_rpf(self) -> RpfData:
        if self._rpf is None:
            self._rpf = rpf(self.system, self.f, state_len=self.state_len)
        return self._rpf

    @property
    def chain(self) -> ChainArrays:
        if self._chain is None:
            self._chain = chain_arrays(self.base_rpf, self.tau, self.ghat)
        return self._chain

    @property
    def mean_roof(self) -> float:
        return self.chain.mean_roof

    def flow_measure(self) -> FlowMeasure:
        return FlowMeasure(base=self.base_rpf, mean_roof=self.mean_roof)

    def tilted_chain(self, phi: CylinderPotential) -> ChainArrays:
        """Chain of the Gibbs measure of an arbitrary real potential."""
        return chain_arrays(rpf(self.system, phi, state_len=max(self.state_len, phi.m + 1)),
                            self.tau, self.ghat)


def green_kubo_variance(chain: ChainArrays, u: np.ndarray, trunc: float = 1e-14,
                        max_terms: int = 100_000) -> float:
    """Asymptotic variance of a centered per-state observable under the chain.

    sigma^2 = E[u^2] + 2 sum_{j>=1} E[u . u o sigma^j]; the series is
    geometric by the spectral gap and truncated when terms fall below trunc.
    """
    pi, K = chain.pi, chain.kernel
    u = u - float(pi @ u)
    sigma2 = float(pi @ (u * u))
    scale = max(sigma2, 1.0)
    v = u.copy()
    for _ in range(max_terms):
        v = K @ v
        v -= float(pi @ v)  # re-center to suppress drift round-off
        term = 2.0 * float(pi @ (u * v))
        sigma2 += term
        if abs(term) < trunc * scale:
            break
    return sigma2


def _lattice_suspect(sys, tau, max_period: int = 6, max_den: int = 64, rtol: float = 1e-9) -> bool:
    """Crude lattice proxy: do all periodic roof sums share a common divisor?"""
    sums = []
    for n in range(1, max_period + 1):
        for w in periodic_orbits(sys, n):
            sums.append(cyclic_birkhoff_sum(tau, w))
    base = sums[0]
    for s in sums[1:]:
        frac = Fraction(s / base).limit_denominator(max_den)
        if abs(s / base - float(frac)) > rtol:
            return False
    return True


def flow_mean(model: SuspensionModel) -> float:
    """a* = integral(g d mu) / integral(tau d mu) = flow average of G."""
    c = model.chain
    return float((c.pi * c.ghat_s * c.tau_s).sum() / c.mean_roof)


def normalize_model(sys: SymbolicSystem, f_raw: CylinderPotential, tau: CylinderPotential,
                    ghat: CylinderPotential, validate: bool = True) -> SuspensionModel:
    """Replace f_raw by f_raw - s* tau so the flow pressure becomes 0."""
    s_star = flow_pressure(sys, f_raw, tau)
    model = SuspensionModel(system=sys, f=f_raw - s_star * tau, tau=tau, ghat=ghat)
    model.diagnostics["s_star"] = s_star
    if validate:
        residual = abs(flow_pressure(sys, model.f, tau))
        c = model.chain
        a_star = flow_mean(model)
        var0 = green_kubo_variance(c, c.ghat_s * c.tau_s - a_star * c.tau_s) / c.mean_roof
        if var0 < 1e-8:
            raise DegenerateVariance(f"flow variance {var0:.3e} below 1e-8: G cohomologous to a constant")
        model.diagnostics.update(
            normalization_residual=residual,
            flow_variance=var0,
            lattice_suspect=_lattice_suspect(sys, tau),
        )
    return model


def sample_flow_point(model: SuspensionModel, rng: np.random.Generator):
    """One draw from the flow equilibrium: (state word, height in [0, tau))."""
    c = model.chain
    i = int(np.searchsorted(c.start_cum, rng.random(), side="right"))
    i = min(i, len(c.states) - 1)
    return c.states[i], float(rng.random() * c.tau_s[i])


def birkhoff_flow_integral(model: SuspensionModel, start_point, T: float,
                           rng: np.random.Generator) -> float:
    """Integral of G along the flow segment of length T from start_point."""
    c = model.chain
    state, u = start_point
    i = c.index[tuple(state)]
    t_rem = float(T)
    dt = c.tau_s[i] - u
    val = 0.0
    while dt < t_rem:
        val += c.ghat_s[i] * dt
        t_rem -= dt
        b = int(np.searchsorted(c.kcum[i], rng.random(), side="right"))
        b = min(b, c.succ.shape[1] - 1)
        i = int(c.succ[i, b])
        dt = c.tau_s[i]
    return val + c.ghat_s[i] * t_rem


def exact_gamma_transform(model: SuspensionModel, z: complex, a: float, T: float,
                          cap: int = ENUMERATION_CAP, chain: ChainArrays = None) -> complex:
    """Exact Gamma_z(T) = integral of e^{z (G - a)^T} d m_F by path enumeration."""
    c = model.chain if chain is None else chain
    z = complex(z)
    re, im, nodes, overflow = _kernels.gamma_transform(
        c.succ, c.kprob, c.tau_s, c.ghat_s, c.pi, z.real, z.imag, float(a), float(T), cap)
    if overflow:
        raise EnumerationCap(f"path enumeration exceeded cap {cap} at T={T}")
    val = complex(re, im) / c.mean_roof
    return val.real if z.imag == 0.0 else val


def exact_interval_measure(model: SuspensionModel, a: float, eps: float, T: float,
                           cap: int = ENUMERATION_CAP) -> float:
    """Exact m_F{ |(G - a)^T| < eps } by path enumeration."""
    c = model.chain
    acc, nodes, overflow = _kernels.interval_measure(
        c.succ, c.kprob, c.tau_s, c.ghat_s, c.pi, float(a), float(T), float(eps), cap)
    if overflow:
        raise EnumerationCap(f"path enumeration exceeded cap {cap} at T={T}")
    return acc / c.mean_roof


def simulate_deviation_values(chain: ChainArrays, a: float, T: float, n_samples: int,
                              seed: int) -> np.ndarray:
    """(G - a)^T over n_samples flow points drawn from the chain's equilibrium."""
    return _kernels.simulate_values(chain.succ, chain.kcum, chain.tau_s, chain.ghat_s,
                                    chain.start_cum, float(T), float(a), int(n_samples), int(seed))
