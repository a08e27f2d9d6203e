"""Shared test models.

triad_a / triad_b are 3-symbol sparse-transition systems with generic
incommensurate edge values (drawn once from fixed seeds and frozen here).
Genericity matters: lattice-valued roofs or few-valued observables put atoms
or slow near-lattice oscillations into the deviation distribution and break
the local-CLT asymptotics at accessible time scales.
"""

import numpy as np
import pytest

from flowldp.shift import validate_system
from flowldp.suspension import normalize_model
from flowldp.transfer import CylinderPotential


def edge_potential(sys, edges, values):
    return CylinderPotential(sys, 1, {tuple(e): float(v) for e, v in zip(edges, values)})


TRIAD_A_TRANSITION = [[1, 1, 1], [1, 1, 0], [1, 0, 1]]
TRIAD_A_EDGES = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0), (2, 2)]

TRIAD_B_TRANSITION = [[1, 1, 0], [1, 1, 1], [0, 1, 1]]
TRIAD_B_EDGES = [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 2)]


def _draw(seed, trials):
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        tau_v = rng.uniform(0.8, 2.6, 7)
        gh_v = rng.uniform(0.4, 2.4, 7)
        f_v = rng.uniform(-0.25, 0.25, 7)
    return tau_v, gh_v, f_v


def build_triad_a():
    sys = validate_system(3, TRIAD_A_TRANSITION, 0)
    tau_v, gh_v, f_v = _draw(7, 12)
    return normalize_model(sys, edge_potential(sys, TRIAD_A_EDGES, f_v),
                           edge_potential(sys, TRIAD_A_EDGES, tau_v),
                           edge_potential(sys, TRIAD_A_EDGES, gh_v))


def build_triad_b():
    sys = validate_system(3, TRIAD_B_TRANSITION, 0)
    tau_v, gh_v, f_v = _draw(101, 40)
    return normalize_model(sys, edge_potential(sys, TRIAD_B_EDGES, f_v),
                           edge_potential(sys, TRIAD_B_EDGES, tau_v),
                           edge_potential(sys, TRIAD_B_EDGES, gh_v))


def build_golden_mean():
    sys = validate_system(2, [[1, 1], [1, 0]], 0)
    f = CylinderPotential(sys, 0, {(0,): 0.1, (1,): -0.2})
    tau = CylinderPotential(sys, 0, {(0,): 1.0, (1,): 1.37})
    gh = CylinderPotential(sys, 0, {(0,): 0.8, (1,): 1.9})
    return normalize_model(sys, f, tau, gh)


@pytest.fixture(scope="session")
def triad_a():
    return build_triad_a()


@pytest.fixture(scope="session")
def triad_b():
    return build_triad_b()


@pytest.fixture(scope="session")
def golden_mean_model():
    return build_golden_mean()


@pytest.fixture(scope="session")
def two_shift():
    return validate_system(2, [[1, 1], [1, 1]], 0)


@pytest.fixture(scope="session")
def golden_mean_system():
    return validate_system(2, [[1, 1], [1, 0]], 0)
