import cmath
import math

import numpy as np
import pytest

from flowldp.errors import NearPole
from flowldp.laplace import (eval_Z_resolvent, eval_Z_series, growth_bound_probe,
                             level_data, make_query, pole_curve, residue_C)
from flowldp.suspension import exact_gamma_transform, flow_mean


def laplace_oracle(model, query, T_cap=13.0, dt=0.05):
    """Independent oracle: numerically integrate e^{-sT} Gamma_z(T) dT.

    Gamma_z comes from exact path enumeration; beyond T_cap the transform
    tail is summed from an exponential fit of Gamma_z near T_cap (Gamma_z
    decays like a clean exponential there once Re s is away from the pole).
    """
    s, z, a = query.s, query.z, query.a
    Ts = np.arange(0.0, T_cap + dt / 2, dt)
    vals = np.array([exact_gamma_transform(model, z, a, float(T)) for T in Ts],
                    dtype=complex)
    integrand = np.exp(-s * Ts) * vals
    # Simpson on the uniform grid
    n = len(Ts) - 1
    acc = integrand[0] + integrand[-1] + 4 * integrand[1:-1:2].sum() + 2 * integrand[2:-1:2].sum()
    integral = acc * dt / 3
    g_end = exact_gamma_transform(model, z, a, T_cap)
    g_prev = exact_gamma_transform(model, z, a, T_cap - 0.5)
    p = cmath.log(g_end / g_prev) / 0.5
    tail = g_end * cmath.exp(-s * T_cap) / (s - p)
    return integral + tail


def test_series_equals_resolvent(triad_a):
    a = flow_mean(triad_a)
    for s, om in [(0.6, 0.0), (0.8, 0.4), (1.2 + 0.3j, -0.7), (0.5, 2.0)]:
        q = make_query(triad_a, s, om, a)
        zs = eval_Z_series(triad_a, q)
        zr = eval_Z_resolvent(triad_a, q)
        assert abs(zs - zr) < 1e-10 * max(1.0, abs(zr))


def test_z_zero_gives_one_over_s(triad_a):
    # at a = a* the tilt vanishes, Gamma_0 = 1 and Z(s) = 1/s exactly
    a = flow_mean(triad_a)
    for s in (0.4, 0.9, 1.5 + 0.2j):
        q = make_query(triad_a, s, 0.0, a)
        assert eval_Z_series(triad_a, q) == pytest.approx(1.0 / complex(s), abs=1e-9)


def test_series_matches_laplace_oracle(triad_a):
    a = flow_mean(triad_a)
    gamma = level_data(triad_a, a)["gamma"]
    for s, om in [(gamma + 0.6, 0.0), (gamma + 0.8, 0.5), (gamma + 0.5 + 0.3j, -0.4)]:
        q = make_query(triad_a, s, om, a)
        val = eval_Z_series(triad_a, q)
        oracle = laplace_oracle(triad_a, q)
        assert abs(val - oracle) / abs(oracle) < 1e-4


def test_near_pole_raises(triad_a):
    a = flow_mean(triad_a)
    gamma = level_data(triad_a, a)["gamma"]
    with pytest.raises(NearPole):
        eval_Z_series(triad_a, make_query(triad_a, gamma + 1e-9, 0.0, a))


def test_series_info_tail_bound(triad_a):
    a = flow_mean(triad_a)
    q = make_query(triad_a, 0.9, 0.3, a)
    val, info = eval_Z_series(triad_a, q, with_info=True)
    assert info["spectral_radius"] < 1.0
    assert info["tail_bound"] < 1e-9 * abs(val)


def test_pole_curve_anchors_gamma(triad_a):
    a_star = flow_mean(triad_a)
    for a in (a_star, a_star + 0.1, a_star - 0.12):
        gamma = level_data(triad_a, a)["gamma"]
        pd = pole_curve(triad_a, a, omega_grid=[0.0])
        assert abs(pd.gamma_check - gamma) < 1e-8
        assert abs(pd.s_of_omega[0] - gamma) < 1e-8


def test_pole_curvature_is_beta_second(triad_a):
    a_star = flow_mean(triad_a)
    for a in (a_star, a_star + 0.1):
        lev = level_data(triad_a, a)
        pd = pole_curve(triad_a, a, omega_grid=[0.0])
        assert pd.curvature == pytest.approx(lev["beta_second"], rel=1e-3)


def test_pole_real_part_maximal_at_zero_frequency(triad_a):
    a = flow_mean(triad_a)
    gamma = level_data(triad_a, a)["gamma"]
    pd = pole_curve(triad_a, a, omega_grid=np.linspace(-0.3, 0.3, 13))
    assert (pd.s_of_omega.real <= gamma + 1e-12).all()
    # symmetric grid -> conjugate-symmetric curve
    assert np.allclose(pd.s_of_omega[::-1].conj(), pd.s_of_omega, atol=1e-9)


def test_residue_calibration_and_unit_constant(triad_a):
    a_star = flow_mean(triad_a)
    rd = residue_C(triad_a, a_star)
    assert rd.calibration == "B3_over_tilted_roof"
    assert rd.C_a == pytest.approx(1.0, abs=1e-10)
    assert abs(rd.gamma) < 1e-9 and abs(rd.xi) < 1e-9


def test_residue_matches_pole_limit_off_mean(triad_a):
    # (s - gamma(a)) Z(s, 0, a) -> C(a); Richardson in the offset delta
    a_star = flow_mean(triad_a)
    for a in (a_star + 0.12, a_star - 0.15):
        lev = level_data(triad_a, a)
        C = residue_C(triad_a, a).C_a
        def probe(delta):
            q = make_query(triad_a, lev["gamma"] + delta, 0.0, a)
            return (delta * eval_Z_resolvent(triad_a, q)).real
        extrapolated = 2 * probe(0.0125) - probe(0.025)
        assert extrapolated == pytest.approx(C, rel=1e-3)


def test_growth_bound_probe_finite(triad_a):
    a = flow_mean(triad_a)
    gamma = level_data(triad_a, a)["gamma"]
    rep = growth_bound_probe(triad_a, a,
                             s_samples=[gamma + 0.3 + 1j, gamma + 0.3 + 4j],
                             omega_samples=[0.5, 2.0])
    assert rep["B_nu"] > 0 and np.isfinite(rep["B_nu"])
    assert all(r["status"] == "ok" for r in rep["rows"])
