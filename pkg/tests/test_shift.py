import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowldp.errors import LengthOverflow, NotPrimitive, WindowOverrun, ZeroRow
from flowldp.shift import (birkhoff_sum, count_words, cyclic_birkhoff_sum,
                           enumerate_words, periodic_orbits, validate_system)
from flowldp.transfer import CylinderPotential


def test_validate_full_shift(two_shift):
    assert two_shift.k == 2
    assert two_shift.primitivity_power == 1


def test_validate_golden_mean(golden_mean_system):
    assert golden_mean_system.primitivity_power == 2


def test_reject_permutation_matrix():
    with pytest.raises(NotPrimitive):
        validate_system(2, [[0, 1], [1, 0]], 0)


def test_reject_zero_row_and_column():
    with pytest.raises(ZeroRow):
        validate_system(2, [[1, 1], [0, 0]], 0)
    with pytest.raises(ZeroRow):
        validate_system(2, [[1, 0], [1, 0]], 0)


def test_word_counts_match_transfer_matrix(golden_mean_system):
    # golden mean: #words(n) follows the Fibonacci recurrence
    counts = [count_words(golden_mean_system, n) for n in range(1, 12)]
    for a, b, c in zip(counts, counts[1:], counts[2:]):
        assert c == a + b
    for n in range(1, 9):
        assert len(enumerate_words(golden_mean_system, n)) == counts[n - 1]


def test_enumeration_sorted_and_admissible(golden_mean_system):
    words = enumerate_words(golden_mean_system, 7)
    assert words == sorted(words)
    assert all(golden_mean_system.is_admissible(w) for w in words)
    assert all((1, 1) not in tuple(zip(w, w[1:])) for w in words)


def test_enumeration_cap():
    sys = validate_system(2, [[1, 1], [1, 1]], 0)
    with pytest.raises(LengthOverflow):
        enumerate_words(sys, 8, cap=100)


def test_periodic_orbit_count_is_matrix_trace(golden_mean_system):
    A = np.asarray(golden_mean_system.transition, dtype=object)
    for n in range(1, 10):
        tr = int(np.trace(np.linalg.matrix_power(A, n)))
        assert len(periodic_orbits(golden_mean_system, n)) == tr


def test_birkhoff_sum_window_checks(two_shift):
    phi = CylinderPotential(two_shift, 1, {(0, 0): 1.0, (0, 1): 2.0, (1, 0): 3.0, (1, 1): 4.0})
    w = (0, 1, 1, 0)
    assert birkhoff_sum(phi, w, 3) == pytest.approx(2.0 + 4.0 + 3.0)
    with pytest.raises(WindowOverrun):
        birkhoff_sum(phi, w, 4)
    # cyclic sum wraps the window
    assert cyclic_birkhoff_sum(phi, w) == pytest.approx(2.0 + 4.0 + 3.0 + 1.0)


def test_cyclic_sum_invariant_under_rotation(two_shift):
    phi = CylinderPotential(two_shift, 1, {(0, 0): 0.3, (0, 1): -1.2, (1, 0): 0.7, (1, 1): 2.1})
    w = (0, 1, 1, 0, 1)
    rotations = [w[i:] + w[:i] for i in range(len(w))]
    vals = [cyclic_birkhoff_sum(phi, r) for r in rotations]
    assert max(vals) - min(vals) < 1e-12


@given(st.integers(min_value=1, max_value=10))
@settings(max_examples=20, deadline=None)
def test_pack_unpack_roundtrip(n):
    sys = validate_system(3, [[1, 1, 1], [1, 1, 0], [1, 0, 1]], 0)
    for w in enumerate_words(sys, n)[:50]:
        assert sys.unpack(sys.pack(w), n) == w


@given(st.lists(st.integers(min_value=0, max_value=1), min_size=2, max_size=12))
@settings(max_examples=100, deadline=None)
def test_admissibility_matches_pairwise_rule(word):
    sys = validate_system(2, [[1, 1], [1, 0]], 0)
    expected = all(not (a == 1 and b == 1) for a, b in zip(word, word[1:]))
    assert sys.is_admissible(tuple(word)) == expected


def test_full_shift_count_is_power(two_shift):
    for n in range(1, 10):
        assert count_words(two_shift, n) == 2**n
