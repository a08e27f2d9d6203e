import math

import numpy as np
import pytest

from flowldp.errors import DegenerateVariance
from flowldp.shift import enumerate_words, validate_system
from flowldp.suspension import (SuspensionModel, birkhoff_flow_integral,
                                exact_gamma_transform, exact_interval_measure,
                                flow_mean, flow_pressure, green_kubo_variance,
                                normalize_model, sample_flow_point,
                                simulate_deviation_values)
from flowldp.transfer import CylinderPotential, rpf


def test_flow_pressure_defining_equation(golden_mean_model):
    # the normalized model has Pr_sigma(f - 0 * tau) = 0
    data = golden_mean_model.base_rpf
    assert abs(data.pressure) < 1e-11
    assert golden_mean_model.diagnostics["normalization_residual"] < 1e-10


def test_flow_pressure_constant_roof(two_shift):
    # constant roof c: root of Pr(f - s c) = 0 is Pr(f)/c in closed form
    f = CylinderPotential(two_shift, 0, {(0,): 0.3, (1,): -0.4})
    tau = CylinderPotential.constant(two_shift, 1.7)
    s = flow_pressure(two_shift, f, tau)
    target = math.log(math.exp(0.3) + math.exp(-0.4)) / 1.7
    assert abs(s - target) < 1e-12


def test_mean_roof_matches_brute_force(golden_mean_model):
    c = golden_mean_model.chain
    brute = sum(golden_mean_model.base_rpf.mu[i] * c.tau_s[i] for i in range(len(c.states)))
    assert c.mean_roof == pytest.approx(brute, abs=1e-12)


def test_chain_stationarity(triad_a):
    c = triad_a.chain
    K = c.kernel
    assert np.allclose(K.sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(c.pi @ K, c.pi, atol=1e-10)


def test_degenerate_variance_rejected(two_shift):
    f = CylinderPotential(two_shift, 0, {(0,): 0.0, (1,): 0.0})
    tau = CylinderPotential(two_shift, 0, {(0,): 1.0, (1,): 1.3})
    ghat = CylinderPotential.constant(two_shift, 2.0)  # G constant along the flow
    with pytest.raises(DegenerateVariance):
        normalize_model(two_shift, f, tau, ghat)


def test_green_kubo_iid_case(two_shift):
    # memory-0 potential on the full shift: the chain is iid, so the
    # Green-Kubo sum collapses to the static variance
    f = CylinderPotential(two_shift, 0, {(0,): 0.4, (1,): -0.1})
    data = rpf(two_shift, f, state_len=1)
    tau = CylinderPotential.constant(two_shift, 1.0)
    gh = CylinderPotential(two_shift, 0, {(0,): 1.0, (1,): 3.0})
    from flowldp.suspension import chain_arrays
    c = chain_arrays(data, tau, gh)
    u = c.ghat_s * c.tau_s
    u_c = u - (c.pi * u).sum()
    static = float((c.pi * u_c**2).sum())
    assert green_kubo_variance(c, u) == pytest.approx(static, abs=1e-12)


def test_gamma_transform_normalization(triad_a):
    # z = 0: Gamma_0(T) = total mass 1 for any T
    for T in (3.0, 7.5, 12.0):
        assert exact_gamma_transform(triad_a, 0.0, 1.0, T) == pytest.approx(1.0, abs=1e-12)


def test_gamma_transform_matches_monte_carlo(triad_a):
    a = flow_mean(triad_a)
    z = 0.4
    T = 10.0
    exact = exact_gamma_transform(triad_a, z, a, T)
    V = simulate_deviation_values(triad_a.chain, a, T, 400_000, 5)
    mc = float(np.exp(z * V).mean())
    se = float(np.exp(z * V).std() / math.sqrt(len(V)))
    assert abs(mc - exact) < 4 * se


def test_interval_measure_matches_gamma_grid(triad_a):
    # interval measure is monotone in eps and bounded by 1
    a = flow_mean(triad_a)
    vals = [exact_interval_measure(triad_a, a, eps, 9.0) for eps in (0.05, 0.2, 1.0, 30.0)]
    assert all(0 <= x <= 1 + 1e-12 for x in vals)
    assert vals == sorted(vals)
    assert vals[-1] == pytest.approx(1.0, abs=1e-9)


def test_interval_measure_matches_monte_carlo(triad_a):
    a = flow_mean(triad_a)
    T, eps = 12.0, 0.3
    exact = exact_interval_measure(triad_a, a, eps, T)
    V = simulate_deviation_values(triad_a.chain, a, T, 400_000, 9)
    p = float((np.abs(V) < eps).mean())
    se = math.sqrt(p * (1 - p) / len(V))
    assert abs(p - exact) < 4 * se


def test_flow_sampler_consistent_with_kernel_sampler(triad_a):
    # the slow per-point sampler and the vectorized kernel agree in law
    rng = np.random.default_rng(2)
    a = flow_mean(triad_a)
    T = 8.0
    slow = []
    for _ in range(4000):
        pt = sample_flow_point(triad_a, rng)
        slow.append(birkhoff_flow_integral(triad_a, pt, T, rng) - a * T)
    slow = np.array(slow)
    fast = simulate_deviation_values(triad_a.chain, a, T, 100_000, 4)
    se = math.sqrt(slow.var() / len(slow) + fast.var() / len(fast))
    assert abs(slow.mean() - fast.mean()) < 4 * se
    assert abs(slow.std() - fast.std()) / fast.std() < 0.1


def test_lattice_diagnostic_flags_integer_roof(two_shift):
    f = CylinderPotential(two_shift, 0, {(0,): 0.1, (1,): -0.1})
    tau = CylinderPotential(two_shift, 0, {(0,): 1.0, (1,): 2.0})
    gh = CylinderPotential(two_shift, 0, {(0,): 0.5, (1,): 1.5})
    model = normalize_model(two_shift, f, tau, gh)
    assert model.diagnostics["lattice_suspect"] is True


def test_generic_roof_not_lattice(triad_a):
    assert triad_a.diagnostics["lattice_suspect"] is False
