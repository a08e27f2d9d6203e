"""Fejer-kernel Laplace inversion on synthetic square-root-singularity families.

A family g_n with transforms F_n(s) = A_n/sqrt(s-1) + regular parts obeys
    g_n(t) ~ A_n e^t / sqrt(pi t)   for t >= n - q.
The inversion device is averaging H_n(y) = sqrt(y) g_n(y) e^{-y} against the
Fejer kernel sin^2 w / w^2 at scale lambda_n = e^{mu0 n / 2}:
    integral_{-inf}^{lambda y} H_n(y - w/lambda) (sin^2 w / w^2)
                                 sqrt(y)/sqrt(y - w/lambda) dw  ->  A_n sqrt(pi).
The hypothesis structure is supplied in closed form; decomposing an arbitrary
numeric transform into singular + regular parts is ill-posed and out of scope.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import FamilyContractViolated, QuadratureFailure, TailDominates

_CENTRAL_HALF_WIDTH = 300.0  # beyond this, sin^2 is replaced by its mean 1/2
_ENDPOINT_DELTA = 1.0        # width (in y-units) of the endpoint region
_U_FLOOR = 1e-12             # cutoff of the integrable log endpoint for singular H


def _quad(fn, a, b, **kw):
    try:
        val, err = quad(fn, a, b, limit=kw.pop("limit", 4000), **kw)
    except Exception as exc:  # pragma: no cover - scipy failure path
        raise QuadratureFailure(f"quadrature failed on [{a}, {b}]: {exc}") from exc
    if not np.isfinite(val):
        raise QuadratureFailure(f"non-finite quadrature value on [{a}, {b}]")
    return val, err


def _fejer_quad(H, lam, y):
    """integral_{-inf}^{lam y} H(y - w/lam) (sin^2 w/w^2) sqrt(y)/sqrt(y - w/lam) dw.

    Central window exact; |w| beyond it uses the sin^2 -> 1/2 average (the
    remainder is O(1/w^2) at the matching point); the endpoint singularity
    (y - w/lam)^{-1/2} is removed by the substitution u^2 = y - w/lam.
    """
    if lam <= 1:
        raise ValueError("lambda must exceed 1")
    if y < 1:
        raise ValueError("y must be >= 1")
    sy = math.sqrt(y)
    delta = min(_ENDPOINT_DELTA, 0.5 * y)
    C = min(_CENTRAL_HALF_WIDTH, 0.5 * lam * (y - delta))

    def full(w):
        v = y - w / lam
        s = math.sin(w)
        osc = (s * s / (w * w)) if w != 0.0 else 1.0
        return osc * H(v) * sy / math.sqrt(v)

    def averaged(w):
        v = y - w / lam
        return 0.5 / (w * w) * H(v) * sy / math.sqrt(v)

    total, _ = _quad(full, -C, C)
    total += _quad(averaged, -np.inf, -C)[0]
    w_end = lam * (y - delta)
    if w_end > C:
        # split so the adaptive rule resolves both the 1/w^2 head and the far end
        mid = math.sqrt(C * w_end)
        total += _quad(averaged, C, mid)[0]
        total += _quad(averaged, mid, w_end)[0]

    # endpoint region via u = sqrt(y - w/lam); sin^2 keeps its 1/2 average
    def endpoint(u):
        v = u * u
        return lam * sy * H(v) / (lam * (y - v)) ** 2

    total += _quad(endpoint, _U_FLOOR, math.sqrt(delta))[0]
    return total


def kernel_integral(lam, y):
    """Fejer kernel mass with the endpoint weight; -> pi as lambda -> infinity."""
    return _fejer_quad(lambda v: 1.0, float(lam), float(y))


def laplace_numeric(g, s, T_max, growth_M=None):
    """Truncated Laplace transform of g with a reported tail bound.

    The tail beyond T_max is bounded using |g(t)| <= growth_M e^t/sqrt(t)
    (estimated from samples when not supplied); requires Re s > 1.
    """
    s = float(s)
    if s <= 1.0:
        raise ValueError("need Re s > 1 for the truncation tail to converge")
    # sqrt singularities of g at 0 are tamed by t = u^2
    val, _ = _quad(lambda u: 2.0 * u * math.exp(-s * u * u) * g(u * u),
                   0.0, math.sqrt(T_max))
    if growth_M is None:
        ts = np.linspace(max(0.5, 0.1 * T_max), T_max, 64)
        growth_M = max(abs(g(t)) * math.sqrt(t) * math.exp(-t) for t in ts)
    tail = growth_M * math.exp(-(s - 1.0) * T_max) / (math.sqrt(T_max) * (s - 1.0))
    if tail > 0.1 * abs(val):
        raise TailDominates(
            f"tail bound {tail:.3e} exceeds 10% of the value {val:.3e}; raise T_max or s")
    return val, tail


@dataclass
class LaplaceFamily:
    """n-indexed family g_n with A_n/sqrt(s-1) transform singularities.

    A_n must satisfy C0 e^{-mu n} <= A_n <= C1 with mu <= mu0/4; the caller
    declares whether the family is monotone (on the evaluation range) or obeys
    the derivative bound |g_n'(t)| <= B1 e^t/sqrt(t).
    """

    A: object            # n -> A_n
    g: object            # (n, t) -> g_n(t)
    mu: float
    mu0: float
    C0: float = None
    C1: float = None
    kind: str = "monotone"      # or "derivative-bound"
    gprime: object = None       # (n, t) -> g_n'(t), for the derivative bound
    B1: float = None
    H_fn: object = None         # optional stable (n, y) -> g_n(y) e^{-y}
    n_probe: tuple = field(default=tuple(range(1, 31)))

    def __post_init__(self):
        if self.kind not in ("monotone", "derivative-bound"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.mu <= 0 or self.mu > self.mu0 / 4 + 1e-15:
            raise FamilyContractViolated(
                f"need 0 < mu <= mu0/4, got mu={self.mu}, mu0={self.mu0}")
        vals = [float(self.A(n)) for n in self.n_probe]
        if any(v <= 0 for v in vals):
            raise FamilyContractViolated("A_n must be positive")
        if self.C1 is None:
            self.C1 = max(vals)
        if self.C0 is None:
            self.C0 = min(v * math.exp(self.mu * n) for v, n in zip(vals, self.n_probe))
        for v, n in zip(vals, self.n_probe):
            if not (self.C0 * math.exp(-self.mu * n) <= v * (1 + 1e-12) and v <= self.C1 * (1 + 1e-12)):
                raise FamilyContractViolated(
                    f"A_{n} = {v} violates C0 e^(-mu n) <= A_n <= C1 "
                    f"with C0={self.C0}, C1={self.C1}, mu={self.mu}")
        if self.kind == "derivative-bound" and (self.gprime is None or self.B1 is None):
            raise FamilyContractViolated("derivative-bound family needs gprime and B1")

    def lambda_n(self, n):
        return math.exp(0.5 * self.mu0 * n)

    def H(self, n, y):
        """H_n(y) = sqrt(y) g_n(y) e^{-y}; ~ A_n/sqrt(pi) on the band.

        The sqrt(y) factor is what makes the smoothed average converge to
        A_n sqrt(pi) and the (1 +- eta) sandwich around A_n/sqrt(pi) close.
        The smoothing integral evaluates H far into the tail where g ~ e^y
        overflows; families should supply H_fn for a stable form there.
        """
        if self.H_fn is not None:
            return self.H_fn(n, y)
        return math.sqrt(y) * self.g(n, y) * math.exp(-y)

    def predicted(self, n, t):
        return self.A(n) * math.exp(t) / math.sqrt(math.pi * t)


def fejer_smoothed_average(family: LaplaceFamily, n, y):
    """Fejer-smoothed H_n at y; -> A_n sqrt(pi) for admissible families."""
    return _fejer_quad(lambda v: family.H(n, v), family.lambda_n(n), float(y))


def _check_contract(family: LaplaceFamily, n, t_vals):
    if family.kind == "monotone":
        g_vals = [family.g(n, t) for t in t_vals]
        for a, b in zip(g_vals, g_vals[1:]):
            if b < a - 1e-12 * max(abs(a), 1.0):
                raise FamilyContractViolated(
                    f"declared monotone but g_{n} decreases on the evaluation range")
    else:
        for t in t_vals:
            bound = family.B1 * math.exp(t) / math.sqrt(t)
            if abs(family.gprime(n, t)) > bound * (1 + 1e-9):
                raise FamilyContractViolated(
                    f"derivative bound fails at (n={n}, t={t})")


def verify_tauberian(family: LaplaceFamily, q, eta, n_grid, t_rule=None) -> dict:
    """Check g_n(t) in (1 +- eta) A_n e^t/sqrt(pi t) for t >= n - q.

    t_rule maps n to the evaluation times (default: eight points spanning
    [max(n - q, 1), n + 10]).  Reports per-point rows and the empirical onset
    n0: the smallest tested n from which the band holds for every larger n.
    """
    if t_rule is None:
        def t_rule(n):
            lo = max(n - q, 1.0)
            return np.linspace(lo, n + 10.0, 8)
    rows = []
    all_ok = {}
    for n in n_grid:
        t_vals = [float(t) for t in t_rule(n)]
        _check_contract(family, n, t_vals)
        ok = True
        for t in t_vals:
            pred = family.predicted(n, t)
            val = family.g(n, t)
            ratio = val / pred
            in_band = (1 - eta) <= ratio <= (1 + eta)
            ok = ok and in_band
            rows.append({"n": int(n), "t": t, "g": val, "predicted": pred,
                         "ratio": ratio, "in_band": in_band})
        all_ok[int(n)] = ok
    onset = None
    ns = sorted(all_ok)
    for i, n in enumerate(ns):
        if all(all_ok[m] for m in ns[i:]):
            onset = n
            break
    return {"eta": eta, "q": q, "rows": rows, "per_n": all_ok, "onset_n0": onset}
