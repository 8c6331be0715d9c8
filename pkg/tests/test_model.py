import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trimer.errors import DomainError
from trimer.model import (
    FOCK_BASIS,
    FOCK_LABELS,
    PAIRED,
    UNPAIRED,
    ModelParams,
    basis_state,
    decompose_interaction,
    hamiltonian,
    rotating_frame_phases,
)


def second_quantised_hamiltonian(p, t):
    """Build H from b^dagger b operators on the two-particle sector; independent oracle."""
    eps_t = p.eps * math.cos(p.omega * t)
    index = {occ: k for k, occ in enumerate(FOCK_BASIS)}
    h = np.zeros((6, 6))
    for occ, col in index.items():
        n = np.array(occ)
        # interaction U0/2 * n (n - 1) and tilt eps(t) * (n_R - n_L)
        h[col, col] += 0.5 * p.U0 * np.sum(n * (n - 1)) + eps_t * (n[2] - n[0])
        for a, b in ((0, 1), (1, 2), (1, 0), (2, 1)):
            if n[b] == 0:
                continue
            amp = math.sqrt(n[b]) * math.sqrt(n[a] + 1)
            new = n.copy()
            new[b] -= 1
            new[a] += 1
            h[index[tuple(new)], col] += -p.J * amp
    return h


params_strategy = st.builds(
    ModelParams,
    J=st.floats(0, 5),
    U0=st.floats(0, 400),
    eps=st.floats(0, 500),
    omega=st.floats(1, 300),
)


def test_basis_order_and_labels():
    assert FOCK_LABELS == ("200", "020", "002", "110", "101", "011")
    assert all(sum(occ) == 2 for occ in FOCK_BASIS)
    assert PAIRED == (0, 1, 2) and UNPAIRED == (3, 4, 5)
    assert basis_state("101")[4] == 1


@pytest.mark.parametrize(
    "U0, omega, m, u",
    [(80, 80, 1, 0.0), (50, 80, 1, -30.0), (0, 80, 0, 0.0), (40, 80, 0, 40.0), (120, 80, 1, 40.0), (110, 80, 1, 30.0)],
)
def test_decomposition(U0, omega, m, u):
    d = decompose_interaction(ModelParams(J=1, U0=U0, eps=0, omega=omega))
    assert (d.m, d.u) == (m, u)


@given(U0=st.floats(0, 1000), omega=st.floats(0.5, 300))
def test_decomposition_contract(U0, omega):
    d = decompose_interaction(ModelParams(J=1, U0=U0, eps=0, omega=omega))
    assert d.m >= 0
    assert -omega / 2 < d.u <= omega / 2
    assert d.m * omega + d.u == pytest.approx(U0, abs=1e-9 * max(1, U0))


def test_static_uncoupled():
    h = hamiltonian(ModelParams(J=0, U0=7, eps=0, omega=3), 1.234)
    assert np.array_equal(h, np.diag([7.0, 7, 7, 0, 0, 0]))


def test_pair_hopping_entry():
    p = ModelParams(J=1.3, U0=80, eps=100, omega=80)
    for t in (0.0, 0.01, 1.0):
        assert hamiltonian(p, t)[0, 3] == -math.sqrt(2) * 1.3


def test_driven_diagonal_at_t0():
    p = ModelParams(J=1, U0=80, eps=192.4, omega=80)
    assert hamiltonian(p, 0.0)[0, 0] == pytest.approx(-304.8, abs=1e-12)


@given(p=params_strategy, t=st.floats(-50, 50))
@settings(max_examples=200)
def test_matches_second_quantised_oracle(p, t):
    assert np.allclose(hamiltonian(p, t), second_quantised_hamiltonian(p, t), atol=1e-9, rtol=1e-12)


@given(p=params_strategy, t=st.floats(-50, 50))
@settings(max_examples=100)
def test_hermitian_and_periodic(p, t):
    h = hamiltonian(p, t)
    assert np.array_equal(h, h.conj().T)
    scale = 1 + p.eps + p.U0
    assert np.allclose(hamiltonian(p, t + p.period), h, atol=1e-12 * scale * (1 + abs(t) * p.omega))


def test_block_structure_without_hopping():
    h = hamiltonian(ModelParams(J=0, U0=30, eps=12, omega=5), 0.3)
    for i, j in itertools.product(PAIRED, UNPAIRED):
        assert h[i, j] == 0 and h[j, i] == 0


def test_rotating_frame_phases_remove_diagonal():
    # d theta/dt must equal the diagonal of H(t)
    p = ModelParams(J=1, U0=50, eps=160, omega=80)
    t, dt = 0.37, 1e-6
    rate = (rotating_frame_phases(p, t + dt) - rotating_frame_phases(p, t - dt)) / (2 * dt)
    assert np.allclose(rate, np.diag(hamiltonian(p, t)), atol=1e-5)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"J": 1, "U0": 1, "eps": 1, "omega": 0},
        {"J": 1, "U0": 1, "eps": -1, "omega": 1},
        {"J": -1, "U0": 1, "eps": 1, "omega": 1},
        {"J": 1, "U0": math.nan, "eps": 1, "omega": 1},
        {"J": 1, "U0": 1, "eps": math.inf, "omega": 1},
    ],
)
def test_invalid_parameters(kwargs):
    with pytest.raises(DomainError):
        ModelParams(**kwargs)


def test_from_ratios():
    p = ModelParams.from_ratios(1, 80, U0_over_omega=1.5, eps_over_omega=2)
    assert (p.U0, p.eps) == (120, 160)
    with pytest.raises(DomainError):
        ModelParams.from_ratios(1, 80, U0=1, U0_over_omega=1, eps=0)


def test_unknown_label():
    with pytest.raises(DomainError):
        basis_state("111")
