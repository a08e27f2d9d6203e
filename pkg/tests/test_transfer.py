import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowldp.errors import InadmissibleWord, MissingEntry
from flowldp.shift import birkhoff_sum, enumerate_words, validate_system
from flowldp.transfer import (CylinderPotential, build_matrix, complex_spectrum,
                              gibbs_cylinder, markov_kernel,
                              periodic_orbit_pressure, rpf)


def brute_force_cylinder(sys, phi, data, word, n_extra=14):
    """Independent Gibbs oracle: normalized sums of e^{S_n phi} h nu weights.

    mu[word] = lim (1/lambda^n) sum over admissible extensions u of length n
    of e^{S phi over word.u} h(tail) nu-style normalization; realized here by
    the exact eigendata identity mu([w]) = h(w_head) e^{S phi} nu(w_tail) /
    lambda^{n - L}, evaluated with numpy linear algebra (dense eig), not the
    package's power iteration or chain machinery.
    """
    M = build_matrix(sys, phi, state_len=data.state_len).M
    eigvals, right = np.linalg.eig(M)
    i = int(np.argmax(eigvals.real))
    lam = float(eigvals[i].real)
    h = np.abs(right[:, i].real)
    eigvals_l, left = np.linalg.eig(M.T)
    j = int(np.argmax(eigvals_l.real))
    nu = np.abs(left[:, j].real)
    nu = nu / nu.sum()
    h = h / (h @ nu)
    L = data.state_len
    states = data.matrix.states
    index = {w: i for i, w in enumerate(states)}
    word = tuple(word)
    if len(word) < L:
        return sum(brute_force_cylinder(sys, phi, data, w)
                   for w in enumerate_words(sys, L) if w[: len(word)] == word)
    n = len(word) - L
    s = birkhoff_sum(phi, word, n) if n else 0.0
    return h[index[word[:L]]] * math.exp(s) * nu[index[word[-L:]]] / lam**n


def test_pressure_full_shift_log2(two_shift):
    phi = CylinderPotential.constant(two_shift, 0.0)
    assert abs(rpf(two_shift, phi).pressure - math.log(2)) < 1e-12


def test_pressure_golden_mean(golden_mean_system):
    phi = CylinderPotential.constant(golden_mean_system, 0.0)
    target = math.log((1 + math.sqrt(5)) / 2)
    assert abs(rpf(golden_mean_system, phi).pressure - target) < 1e-12


def test_pressure_weighted_two_shift(two_shift):
    # L1 has column sums e^{phi(0.)} + e^{phi(1.)}; for memory 0 the pressure
    # is log(e^{phi(0)} + e^{phi(1)}) exactly
    phi = CylinderPotential(two_shift, 0, {(0,): 0.3, (1,): -0.4})
    target = math.log(math.exp(0.3) + math.exp(-0.4))
    assert abs(rpf(two_shift, phi).pressure - target) < 1e-12


def test_missing_and_inadmissible_entries(golden_mean_system):
    with pytest.raises(MissingEntry):
        CylinderPotential(golden_mean_system, 1, {(0, 0): 1.0})
    full = {(0, 0): 1.0, (0, 1): 2.0, (1, 0): 3.0, (1, 1): 9.9}
    with pytest.raises(InadmissibleWord):
        CylinderPotential(golden_mean_system, 1, full)


def test_markov_kernel_rows_stochastic(golden_mean_system):
    phi = CylinderPotential(golden_mean_system, 1, {(0, 0): 0.2, (0, 1): -0.5, (1, 0): 0.9})
    data = rpf(golden_mean_system, phi)
    K = markov_kernel(data)
    assert np.allclose(K.sum(axis=1), 1.0, atol=1e-12)
    # mu is the stationary law of K
    assert np.allclose(data.mu @ K, data.mu, atol=1e-10)


def test_gibbs_cylinders_sum_to_one(golden_mean_system):
    phi = CylinderPotential(golden_mean_system, 1, {(0, 0): 0.2, (0, 1): -0.5, (1, 0): 0.9})
    data = rpf(golden_mean_system, phi)
    for n in (1, 2, 5):
        total = sum(gibbs_cylinder(data, w) for w in enumerate_words(golden_mean_system, n))
        assert abs(total - 1.0) < 1e-11


def test_gibbs_matches_dense_eig_oracle(golden_mean_system):
    phi = CylinderPotential(golden_mean_system, 1, {(0, 0): 0.2, (0, 1): -0.5, (1, 0): 0.9})
    data = rpf(golden_mean_system, phi)
    for n in range(1, 9):
        for w in enumerate_words(golden_mean_system, n):
            oracle = brute_force_cylinder(golden_mean_system, phi, data, w)
            assert gibbs_cylinder(data, w) == pytest.approx(oracle, abs=1e-11)


def test_shift_invariance_of_gibbs(golden_mean_system):
    # mu([w]) = sum over admissible prefixes a of mu([a w])
    phi = CylinderPotential(golden_mean_system, 1, {(0, 0): 0.2, (0, 1): -0.5, (1, 0): 0.9})
    data = rpf(golden_mean_system, phi)
    for w in enumerate_words(golden_mean_system, 4):
        total = sum(gibbs_cylinder(data, (a,) + w) for a in range(2)
                    if golden_mean_system.transition[a, w[0]])
        assert total == pytest.approx(gibbs_cylinder(data, w), abs=1e-12)


def test_periodic_orbit_pressure_converges(golden_mean_system):
    phi = CylinderPotential(golden_mean_system, 1, {(0, 0): 0.2, (0, 1): -0.5, (1, 0): 0.9})
    p = rpf(golden_mean_system, phi).pressure
    errs = [abs(periodic_orbit_pressure(golden_mean_system, phi, n) - p) for n in (6, 12, 18)]
    assert errs[2] < errs[0]
    assert errs[2] < 1e-3


def test_complex_spectrum_radius_bounded(golden_mean_system):
    phi = CylinderPotential(golden_mean_system, 1, {(0, 0): 0.2, (0, 1): -0.5, (1, 0): 0.9})
    lam = rpf(golden_mean_system, phi).lam
    for b in (0.0, 0.7, 3.0):
        tau = CylinderPotential(golden_mean_system, 0, {(0,): 1.0, (1,): 1.37})
        radius, _ = complex_spectrum(golden_mean_system, phi + (1j * b) * tau)
        assert radius <= lam + 1e-10
    radius0, _ = complex_spectrum(golden_mean_system, phi)
    assert radius0 == pytest.approx(lam, rel=1e-10)


@given(st.floats(min_value=-1.5, max_value=1.5), st.floats(min_value=-1.5, max_value=1.5))
@settings(max_examples=25, deadline=None)
def test_pressure_monotone_and_convex_in_potential(u, v):
    # adding a constant c shifts the pressure by exactly c
    sys = validate_system(2, [[1, 1], [1, 0]], 0)
    phi = CylinderPotential(sys, 0, {(0,): u, (1,): v})
    p0 = rpf(sys, phi).pressure
    p1 = rpf(sys, phi + 0.37).pressure
    assert p1 == pytest.approx(p0 + 0.37, abs=1e-10)


def test_rpf_eigendata_residuals(triad_a):
    data = triad_a.base_rpf
    M = data.matrix.M
    assert np.abs(M @ data.h - data.lam * data.h).max() < 1e-10
    assert np.abs(M.T @ data.nu - data.lam * data.nu).max() < 1e-10
    assert abs(data.nu.sum() - 1.0) < 1e-12
    assert abs(data.h @ data.nu - 1.0) < 1e-12
