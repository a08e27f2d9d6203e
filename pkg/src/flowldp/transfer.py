"""Ruelle transfer operators as finite matrices on cylinder functions.

For a locally constant potential with memory m the transfer operator
    (L_phi v)(y) = sum_{sigma x = y} e^{phi(x)} v(x)
acts exactly on functions of the first L symbols, L >= max(m, 1).  States
are admissible L-words; the preimage x of a state y prepends one symbol,
and the entry uses the potential evaluated on the window (x . last(y))[:m+1].

Leading eigendata (lambda = e^pressure, eigenfunction h, eigenmeasure nu,
Gibbs weights mu = h nu) come from power iteration; complex spectra from a
dense eigensolve.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DimensionCap,
    InadmissibleWord,
    MissingEntry,
    NoConvergence,
)
from .shift import SymbolicSystem, check_admissible, cyclic_birkhoff_sum, enumerate_words, periodic_orbits

DENSE_EIG_CAP = 4096
POWER_TOL = 1e-12
POWER_MAX_ITER = 100_000


class CylinderPotential:
    """Locally constant potential: a table on admissible (m+1)-windows.

    Supports addition, scalar multiplication and memory lifting, so complex
    combinations like f - s*tau + z*(g - a*tau) are built with operators.
    """

    def __init__(self, system: SymbolicSystem, m: int, table: dict):
        self.system = system
        self.m = int(m)
        windows = enumerate_words(system, m + 1)
        missing = [w for w in windows if tuple(w) not in table]
        if missing:
            raise MissingEntry(f"potential lacks {len(missing)} admissible windows, e.g. {missing[0]}")
        extra = [w for w in table if tuple(w) not in set(windows)]
        if extra:
            raise InadmissibleWord(f"potential table has inadmissible key {extra[0]}")
        self.table = {tuple(w): table[tuple(w)] for w in windows}

    @classmethod
    def constant(cls, system, value, m=0):
        return cls(system, m, {tuple(w): value for w in enumerate_words(system, m + 1)})

    @classmethod
    def from_function(cls, system, m, fn):
        return cls(system, m, {tuple(w): fn(w) for w in enumerate_words(system, m + 1)})

    def __call__(self, window):
        key = tuple(window[: self.m + 1])
        try:
            return self.table[key]
        except KeyError:
            raise MissingEntry(f"no entry for window {key}") from None

    @property
    def is_complex(self) -> bool:
        return any(isinstance(v, complex) for v in self.table.values())

    def min_value(self):
        return min(self.table.values())

    def lift(self, m_new: int) -> "CylinderPotential":
        if m_new == self.m:
            return self
        if m_new < self.m:
            raise ValueError("cannot lower potential memory")
        return CylinderPotential.from_function(self.system, m_new, self.__call__)

    def _binary(self, other, op):
        if isinstance(other, CylinderPotential):
            if other.system is not self.system and other.system != self.system:
                raise ValueError("potentials on different systems")
            m = max(self.m, other.m)
            a, b = self.lift(m), other.lift(m)
            return CylinderPotential(a.system, m, {w: op(a.table[w], b.table[w]) for w in a.table})
        return CylinderPotential(self.system, self.m, {w: op(v, other) for w, v in self.table.items()})

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y)

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y)

    def __mul__(self, scalar):
        return CylinderPotential(self.system, self.m, {w: v * scalar for w, v in self.table.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1)


@dataclass
class TransferMatrix:
    """Matrix form of L_phi on admissible L-word states."""

    system: SymbolicSystem
    state_len: int
    states: tuple
    index: dict
    M: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.states)


def build_matrix(sys: SymbolicSystem, phi: CylinderPotential, state_len=None) -> TransferMatrix:
    """Matrix with M[y, x] = e^{phi((x . last(y))[:m+1])} over prepending preimages."""
    L = max(phi.m, 1) if state_len is None else int(state_len)
    if L < max(phi.m, 1):
        raise ValueError(f"state length {L} below potential memory {phi.m}")
    states = tuple(enumerate_words(sys, L))
    index = {w: i for i, w in enumerate(states)}
    dtype = complex if phi.is_complex else float
    M = np.zeros((len(states), len(states)), dtype=dtype)
    for x, ix in index.items():
        for b in range(sys.k):
            if not sys.transition[x[-1], b]:
                continue
            y = x[1:] + (b,)
            window = (x + (b,))[: phi.m + 1]
            M[index[y], ix] = np.exp(phi(window))
    return TransferMatrix(system=sys, state_len=L, states=states, index=index, M=M)


@dataclass
class RpfData:
    """Ruelle-Perron-Frobenius data: lambda, h, nu and Gibbs weights mu = h nu.

    Normalization: nu has total mass 1, then h is scaled so sum(h * nu) = 1.
    """

    matrix: TransferMatrix
    potential: CylinderPotential
    lam: float
    h: np.ndarray
    nu: np.ndarray
    residual: float
    iterations: int
    mu: np.ndarray = field(init=False)

    def __post_init__(self):
        self.mu = self.h * self.nu

    @property
    def pressure(self) -> float:
        return float(np.log(self.lam))

    @property
    def states(self):
        return self.matrix.states

    @property
    def state_len(self):
        return self.matrix.state_len

    @cached_property
    def spectral_gap_ratio(self) -> float:
        """|second eigenvalue| / lambda, from a dense solve."""
        eigs = np.sort(np.abs(np.linalg.eigvals(self.matrix.M)))[::-1]
        return float(eigs[1] / eigs[0]) if len(eigs) > 1 else 0.0


def _power_leading(M: np.ndarray, tol: float, max_iter: int):
    """Leading (eigenvalue, positive eigenvector) of a primitive nonnegative matrix.

    The residual criterion is relative to lambda (the natural scale of M on
    the sup-normalized iterate); a round-off plateau above that but below a
    loose absolute floor is accepted, since no further digits are available
    in float64 at that point.
    """
    v = np.ones(M.shape[0])
    lam = 1.0
    best = np.inf
    stale = 0
    for it in range(1, max_iter + 1):
        w = M @ v
        lam = float(w.max())
        resid = float(np.abs(w - lam * v).max())
        v = w / lam
        if resid <= tol * max(1.0, lam):
            return lam, v, resid, it
        if resid < 0.999 * best:
            best = resid
            stale = 0
        else:
            stale += 1
            if stale > 200:
                if best <= 1e-9 * max(1.0, lam):
                    return lam, v, resid, it
                break
    raise NoConvergence(f"power iteration residual {resid:.3e} after {it} iterations")


def rpf(sys: SymbolicSystem, phi: CylinderPotential, state_len=None,
        tol=POWER_TOL, max_iter=POWER_MAX_ITER) -> RpfData:
    """Leading eigendata of the real transfer operator by power iteration."""
    if phi.is_complex:
        raise ValueError("rpf requires a real potential; use complex_spectrum")
    tm = build_matrix(sys, phi, state_len)
    lam, h, res_h, it_h = _power_leading(tm.M, tol, max_iter)
    _, nu, res_nu, it_nu = _power_leading(tm.M.T, tol, max_iter)
    nu = nu / nu.sum()
    h = h / float(h @ nu)
    return RpfData(matrix=tm, potential=phi, lam=lam, h=h, nu=nu,
                   residual=max(res_h, res_nu), iterations=max(it_h, it_nu))


def markov_kernel(data: RpfData) -> np.ndarray:
    """Row-stochastic kernel of the induced stationary chain on states.

    K[w, w'] = e^{phi(window)} nu(w') / (lambda nu(w)) for the transition
    appending one symbol; the stationary law is mu = h nu.  (The eigenmeasure
    nu, not h, makes the rows sum to exactly 1 under this matrix convention.)
    """
    M = data.matrix.M
    # M[y, x] corresponds to the chain step x -> y
    return (M * data.nu[:, None]).T / (data.lam * data.nu[:, None])


def gibbs_cylinder(data: RpfData, word) -> float:
    """Gibbs measure of the cylinder [word] via the induced chain."""
    sys = data.matrix.system
    check_admissible(sys, word)
    L = data.state_len
    word = tuple(word)
    if len(word) < L:
        total = 0.0
        stack = [word]
        while stack:
            w = stack.pop()
            if len(w) == L:
                total += gibbs_cylinder(data, w)
                continue
            for b in range(sys.k):
                if sys.transition[w[-1], b]:
                    stack.append(w + (b,))
        return total
    idx = data.matrix.index
    phi = data.potential
    acc = float(np.log(data.mu[idx[word[:L]]]))
    K = markov_kernel(data)
    for j in range(len(word) - L):
        acc += float(np.log(K[idx[word[j : j + L]], idx[word[j + 1 : j + 1 + L]]]))
    return float(np.exp(acc))


def complex_spectrum(sys: SymbolicSystem, phi: CylinderPotential, state_len=None, cap=DENSE_EIG_CAP):
    """(spectral radius, all eigenvalues) of the complex transfer matrix."""
    tm = build_matrix(sys, phi, state_len)
    if tm.dim > cap:
        raise DimensionCap(f"dimension {tm.dim} exceeds dense eigensolver cap {cap}")
    eigs = np.linalg.eigvals(tm.M)
    order = np.argsort(-np.abs(eigs))
    eigs = eigs[order]
    return float(np.abs(eigs[0])), eigs


def iterate_decay(sys: SymbolicSystem, phi: CylinderPotential, h0, M_steps: int, state_len=None) -> np.ndarray:
    """Sup-norms of L^m h0 for m = 1 .. M_steps (qualitative decay check)."""
    tm = build_matrix(sys, phi, state_len)
    v = np.ones(tm.dim, dtype=tm.M.dtype) if h0 is None else np.asarray(h0, dtype=tm.M.dtype)
    out = np.empty(M_steps)
    for j in range(M_steps):
        v = tm.M @ v
        out[j] = float(np.abs(v).max())
    return out


def periodic_orbit_pressure(sys: SymbolicSystem, phi: CylinderPotential, n: int) -> float:
    """(1/n) log sum over period-n orbits of e^{cyclic Birkhoff sum}; -> pressure."""
    total = sum(np.exp(cyclic_birkhoff_sum(phi, w)) for w in periodic_orbits(sys, n))
    return float(np.log(total) / n)
