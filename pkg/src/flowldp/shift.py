"""Subshifts of finite type: admissible words, periodic orbits, Birkhoff sums.

Words are plain tuples of symbols.  For kernel work they are packed into
integer codes (base-k digits, most significant first) so cylinder lookup
is O(1).
"""

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import InadmissibleWord, LengthOverflow, NotPrimitive, WindowOverrun, ZeroRow

ENUMERATION_CAP = 2**24


@dataclass(frozen=True)
class SymbolicSystem:
    """Combinatorial skeleton: alphabet size, 0/1 transition matrix, memory.

    Potentials on the system depend on coordinates x_0 ... x_m.
    """

    k: int
    transition: np.ndarray
    m: int
    primitivity_power: int = field(default=0, compare=False)

    def allows(self, a: int, b: int) -> bool:
        return bool(self.transition[a, b])

    def is_admissible(self, word) -> bool:
        if any(s < 0 or s >= self.k for s in word):
            return False
        return all(self.transition[a, b] for a, b in zip(word, word[1:]))

    def pack(self, word) -> int:
        code = 0
        for s in word:
            code = code * self.k + s
        return code

    def unpack(self, code: int, n: int) -> tuple:
        out = []
        for _ in range(n):
            out.append(code % self.k)
            code //= self.k
        return tuple(reversed(out))


def validate_system(k, transition, m) -> SymbolicSystem:
    """Check primitivity and build the system.

    A k x k 0/1 matrix is primitive iff some power p <= (k-1)^2 + 1 is
    strictly positive (Wielandt's bound).
    """
    A = np.asarray(transition, dtype=np.int64)
    if k < 2:
        raise NotPrimitive(f"alphabet size {k} < 2")
    if A.shape != (k, k) or not np.isin(A, (0, 1)).all():
        raise NotPrimitive(f"transition must be a {k}x{k} 0/1 matrix")
    if m < 0:
        raise NotPrimitive(f"memory {m} < 0")
    if (A.sum(axis=1) == 0).any():
        bad = int(np.flatnonzero(A.sum(axis=1) == 0)[0])
        raise ZeroRow(f"symbol {bad} has no successor")
    if (A.sum(axis=0) == 0).any():
        bad = int(np.flatnonzero(A.sum(axis=0) == 0)[0])
        raise ZeroRow(f"symbol {bad} has no predecessor")
    bound = (k - 1) ** 2 + 1
    P = A.copy()
    p = 1
    while p <= bound:
        if (P > 0).all():
            A.setflags(write=False)
            return SymbolicSystem(k=k, transition=A, m=int(m), primitivity_power=p)
        # cap entries to avoid overflow; only positivity matters
        P = np.minimum(P @ A, 1)
        p += 1
    raise NotPrimitive("no strictly positive power within the Wielandt bound")


def enumerate_words(sys: SymbolicSystem, n: int, cap: int = ENUMERATION_CAP) -> list:
    """All admissible words of length n, lexicographically ordered."""
    if n < 1:
        raise LengthOverflow(f"word length {n} < 1")
    count = count_words(sys, n)
    if count > cap:
        raise LengthOverflow(f"{count} admissible words exceeds cap {cap}")
    out = []
    stack = [(s,) for s in range(sys.k - 1, -1, -1)]
    while stack:
        w = stack.pop()
        if len(w) == n:
            out.append(w)
            continue
        for b in range(sys.k - 1, -1, -1):
            if sys.transition[w[-1], b]:
                stack.append(w + (b,))
    return out


def count_words(sys: SymbolicSystem, n: int) -> int:
    A = sys.transition.astype(object)
    return int(np.linalg.matrix_power(A, n - 1).sum()) if n > 1 else sys.k


def periodic_orbits(sys: SymbolicSystem, n: int, cap: int = ENUMERATION_CAP) -> list:
    """Words of length n admissible under cyclic shift (w[n-1] -> w[0])."""
    if n < 1:
        raise LengthOverflow(f"period {n} < 1")
    if count_words(sys, n) > cap:
        raise LengthOverflow(f"enumeration for period {n} exceeds cap {cap}")
    return [w for w in enumerate_words(sys, n, cap) if sys.transition[w[-1], w[0]]]


def birkhoff_sum(potential, word, n: int):
    """Sum of potential over the first n shifts of the word.

    potential evaluates windows of length m+1; word must have length >= n + m.
    """
    m = potential.m
    if len(word) < n + m:
        raise WindowOverrun(f"word length {len(word)} < n + m = {n + m}")
    return sum(potential(word[j : j + m + 1]) for j in range(n))


def cyclic_birkhoff_sum(potential, word):
    """Birkhoff sum over a full period of a cyclically admissible word."""
    n = len(word)
    reps = 1 + -(-potential.m // n)  # enough full periods to cover n + m symbols
    ext = (tuple(word) * reps)[: n + potential.m]
    return birkhoff_sum(potential, ext, n)


def check_admissible(sys: SymbolicSystem, word) -> None:
    if not sys.is_admissible(word):
        raise InadmissibleWord(f"word {''.join(map(str, word))} is not admissible")


def words_as_codes(sys: SymbolicSystem, words: Iterable) -> np.ndarray:
    return np.array([sys.pack(w) for w in words], dtype=np.int64)
