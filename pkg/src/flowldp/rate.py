"""Legendre layer: free energy beta(t), its derivatives, xi(a), gamma(a).

beta(t) = Pr(F + tG) - Pr(F) is computed as the root s of
Pr_sigma(f + t g - s tau) = 0 (the model is normalized so Pr(F) = 0).
beta'(t) is exact via the tilted Gibbs chain; beta''(t) combines Richardson
differencing of beta' with a Green-Kubo cross-check.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateVariance, FlowLdpError, OutsideGammaG
from .suspension import SuspensionModel, chain_arrays, flow_pressure, green_kubo_variance
from .transfer import rpf

T_GRID_DEFAULT = np.round(np.arange(-5.0, 5.0 + 1e-9, 0.05), 10)
VARIANCE_FLOOR = 1e-8


def _tilted_chain(model: SuspensionModel, t: float, beta_t: float):
    phi = model.f + t * model.g - beta_t * model.tau
    data = rpf(model.system, phi, state_len=max(model.state_len, phi.m + 1))
    return chain_arrays(data, model.tau, model.ghat)


def beta(model: SuspensionModel, t: float) -> float:
    """Flow free energy: root of Pr_sigma(f + t g - s tau) = 0."""
    if t == 0.0:
        return 0.0
    return flow_pressure(model.system, model.f + t * model.g, model.tau)


def beta_prime(model: SuspensionModel, t: float, beta_t: float = None) -> float:
    """Exact derivative: flow mean of G under the tilted equilibrium."""
    bt = beta(model, t) if beta_t is None else beta_t
    c = _tilted_chain(model, t, bt)
    return float((c.pi * c.ghat_s * c.tau_s).sum() / c.mean_roof)


def beta_second_green_kubo(model: SuspensionModel, t: float, beta_t: float = None) -> float:
    """Asymptotic flow variance of G under the tilted equilibrium."""
    bt = beta(model, t) if beta_t is None else beta_t
    c = _tilted_chain(model, t, bt)
    bp = float((c.pi * c.ghat_s * c.tau_s).sum() / c.mean_roof)
    u = c.ghat_s * c.tau_s - bp * c.tau_s
    return green_kubo_variance(c, u) / c.mean_roof


def beta_second(model: SuspensionModel, t: float, h: float = 1e-3,
                cross_check_tol: float = 1e-4) -> float:
    """Richardson-extrapolated differencing of beta', cross-checked Green-Kubo.

    Raises DegenerateVariance below the variance floor (G cohomologous to a
    constant) and FlowLdpError if the two independent routes disagree beyond
    cross_check_tol relative.
    """
    d1 = (beta_prime(model, t + h) - beta_prime(model, t - h)) / (2 * h)
    d2 = (beta_prime(model, t + h / 2) - beta_prime(model, t - h / 2)) / h
    richardson = (4 * d2 - d1) / 3
    gk = beta_second_green_kubo(model, t)
    if gk < VARIANCE_FLOOR or richardson < VARIANCE_FLOOR:
        raise DegenerateVariance(
            f"variance {gk:.3e} below {VARIANCE_FLOOR}: observable cohomologous to a constant")
    if cross_check_tol is not None and abs(richardson - gk) > cross_check_tol * abs(gk):
        raise FlowLdpError(
            f"beta'' routes disagree: differencing {richardson!r} vs Green-Kubo {gk!r}")
    return gk


def xi_of_a(model: SuspensionModel, a: float, t_max: float = 5.0, tol: float = 1e-11,
            max_iter: int = 100) -> float:
    """Root of beta'(t) = a by safeguarded Newton with derivative beta''."""
    lo, hi = -t_max, t_max
    blo, bhi = beta_prime(model, lo), beta_prime(model, hi)
    if not (blo < a < bhi):
        raise OutsideGammaG(f"a={a} outside (beta'({lo}), beta'({hi})) = ({blo}, {bhi})")
    t = 0.0
    for _ in range(max_iter):
        bp = beta_prime(model, t)
        if abs(bp - a) <= tol:
            return t
        if bp < a:
            lo = t
        else:
            hi = t
        t_new = t - (bp - a) / beta_second_green_kubo(model, t)
        if not (lo < t_new < hi):
            t_new = 0.5 * (lo + hi)
        t = t_new
    raise OutsideGammaG(f"Newton for xi({a}) did not reach |beta' - a| <= {tol}")


def gamma_of_a(model: SuspensionModel, a: float, xi: float = None) -> float:
    """Rate function gamma(a) = beta(xi(a)) - xi(a) a <= 0."""
    x = xi_of_a(model, a) if xi is None else xi
    return beta(model, x) - x * a


def gamma_domain(model: SuspensionModel, t_max: float = 5.0):
    """Accessible interval (beta'(-t_max), beta'(t_max)) of levels a.

    The true domain is the full range of beta'; endpoints here are
    range-limited by t_max and flagged as such.
    """
    return {
        "interval": (beta_prime(model, -t_max), beta_prime(model, t_max)),
        "range_limited": True,
        "t_max": t_max,
    }


@dataclass
class RateProfile:
    """Tabulated beta data on a t-grid plus per-level (xi, gamma, beta'') rows."""

    t_grid: np.ndarray
    beta_vals: np.ndarray
    beta_prime_vals: np.ndarray
    beta_second_vals: np.ndarray
    levels: dict = field(default_factory=dict)  # a -> dict(xi, gamma, beta_second_at_xi)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "beta", "beta_prime", "beta_second"])
            for row in zip(self.t_grid, self.beta_vals, self.beta_prime_vals, self.beta_second_vals):
                wr.writerow([f"{v:.12g}" for v in row])

    def write_levels_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["a", "xi", "gamma", "beta_second_at_xi"])
            for a, d in sorted(self.levels.items()):
                wr.writerow([f"{a:.12g}", f"{d['xi']:.12g}", f"{d['gamma']:.12g}",
                             f"{d['beta_second_at_xi']:.12g}"])


def rate_profile(model: SuspensionModel, t_grid=None, a_values=()) -> RateProfile:
    t_grid = T_GRID_DEFAULT if t_grid is None else np.asarray(t_grid, dtype=float)
    b = np.array([beta(model, t) for t in t_grid])
    bp = np.array([beta_prime(model, t) for t in t_grid])
    bpp = np.array([beta_second_green_kubo(model, t) for t in t_grid])
    prof = RateProfile(t_grid=t_grid, beta_vals=b, beta_prime_vals=bp, beta_second_vals=bpp)
    for a in a_values:
        x = xi_of_a(model, a)
        prof.levels[float(a)] = {
            "xi": x,
            "gamma": gamma_of_a(model, a, xi=x),
            "beta_second_at_xi": beta_second_green_kubo(model, x),
        }
    return prof
