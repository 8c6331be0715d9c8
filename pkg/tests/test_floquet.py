import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

import trimer.floquet as fl
from trimer.effective import find_rho2_zeros, rho_coefficients
from trimer.errors import AccuracyError
from trimer.floquet import (
    Monodromy,
    QuasienergyRecord,
    analytic_paired_quasienergies,
    analytic_quasienergies,
    analytic_unpaired_quasienergies,
    classify_bands,
    find_paired_crossings,
    floquet_spectrum,
    fold_quasienergy,
    monodromy,
    paired_crossing_gap,
    period_propagators,
    quasienergies,
)
from trimer.model import ModelParams, hopping_matrix

J0_ZERO = 2.404825557695773


def params(U0, x, J=1.0, omega=80.0):
    return ModelParams.from_ratios(J, omega, U0=U0, eps_over_omega=x)


def test_uncoupled_undriven_monodromy():
    p = ModelParams(J=0, U0=33.0, eps=0, omega=80)
    mono = monodromy(p)
    phase = np.exp(-1j * 33.0 * p.period)
    assert np.allclose(mono.matrix, np.diag([phase] * 3 + [1] * 3), atol=1e-10)


def test_undriven_spectrum_matches_static_diagonalisation():
    p = ModelParams(J=1, U0=0, eps=0, omega=80)
    record = quasienergies(monodromy(p))
    static = np.sort(fold_quasienergy(np.linalg.eigvalsh(hopping_matrix(1.0)), 80.0))
    assert np.allclose(record.energies, static, atol=1e-8)
    # the matrix exponential gives the same propagator
    assert np.allclose(monodromy(p).matrix, expm(-1j * hopping_matrix(1.0) * p.period), atol=1e-10)


def test_identity_gives_zero_quasienergies():
    record = quasienergies(Monodromy(matrix=np.eye(6, dtype=complex), period=2 * math.pi / 80, defect=0.0))
    assert np.array_equal(record.energies, np.zeros(6))


def test_integer_interaction_folds_to_zero():
    record = quasienergies(monodromy(ModelParams(J=0, U0=80, eps=0, omega=80)))
    assert np.allclose(record.energies, 0.0, atol=1e-8)


def test_propagator_stack_ends_at_monodromy():
    p = params(50.0, 2.0)
    stack = period_propagators(p, 7)
    assert stack.shape == (8, 6, 6)
    assert np.allclose(stack[0], np.eye(6))
    assert np.allclose(stack[-1], monodromy(p).matrix, atol=1e-9)


def test_monodromy_tolerance_contract():
    with pytest.raises(ValueError):
        monodromy(params(50.0, 2.0), tol=1e-9)


def test_loose_integration_is_rejected(monkeypatch):
    def sloppy(p, n_phases=1, tol=1e-11):
        u = np.eye(6, dtype=complex)
        u[0, 0] = 1 + 1e-6
        return np.array([np.eye(6), u])

    monkeypatch.setattr(fl, "period_propagators", sloppy)
    with pytest.raises(AccuracyError):
        fl.monodromy(params(50.0, 2.0))


@pytest.mark.parametrize("U0", [0.0, 50.0, 80.0, 206.4])
@pytest.mark.parametrize("x", [0.0, 1.0, 2.405, 3.832, 6.0])
def test_unitarity_everywhere(U0, x):
    mono = monodromy(params(U0, x))
    assert mono.defect <= 1e-8
    record = quasienergies(mono)
    assert np.all(record.energies > -40.0) and np.all(record.energies <= 40.0)


@given(e=st.floats(-1e4, 1e4), omega=st.floats(0.5, 300))
def test_fold_is_idempotent(e, omega):
    once = fold_quasienergy(e, omega)
    assert -omega / 2 < once <= omega / 2
    assert fold_quasienergy(once, omega) == once
    k = round((e - once) / omega)
    assert e - once == pytest.approx(k * omega, abs=1e-9 * max(1.0, abs(e)))


def test_fold_boundary():
    assert fold_quasienergy(40.0, 80.0) == 40.0
    assert fold_quasienergy(-40.0, 80.0) == 40.0


def test_pure_paired_vector_label():
    vecs = np.eye(6, dtype=complex)
    record = classify_bands(QuasienergyRecord(energies=np.zeros(6), eigenvectors=vecs))
    assert record.labels[1] == "paired" and record.confidences[1] == 1.0
    assert record.labels[4] == "unpaired"


def test_two_bands_far_from_resonance():
    record = floquet_spectrum(params(50.0, 1.0))
    assert sorted(record.labels) == ["paired"] * 3 + ["unpaired"] * 3
    assert np.all((record.confidences >= 0) & (record.confidences <= 1))


def test_collapse_at_j0_zero():
    record = floquet_spectrum(params(0.0, 2.4048))
    assert np.ptp(record.energies) <= 0.05
    assert np.ptp(floquet_spectrum(params(0.0, 1.0)).energies) >= 0.5


def test_symmetric_pair_sign():
    """Both printed and re-derived signs are compared; the re-derived (minus) one is adopted."""
    p = params(50.0, 2.0)
    c = rho_coefficients(p)
    numeric = np.sort(floquet_spectrum(p).band("unpaired"))
    (e1, e2, e3), rho3 = analytic_unpaired_quasienergies(p, c)
    shift = (2 * c.rho1 + c.rho2) / p.omega
    minus = np.sort([e1, -shift - rho3 / p.omega, -shift + rho3 / p.omega])
    plus = np.sort([e1, shift - rho3 / p.omega, shift + rho3 / p.omega])
    assert np.allclose(np.sort([e1, e2, e3]), minus, atol=0)
    dev_minus = np.max(np.abs(numeric - minus))
    dev_plus = np.max(np.abs(numeric - plus))
    assert dev_minus < 1e-3
    assert dev_plus > 10 * dev_minus


@pytest.mark.parametrize("x", [1.5, 2.0, 2.405, 3.0, 3.5])
def test_unpaired_band_against_perturbation_theory(x):
    p = params(50.0, x)
    numeric = np.sort(floquet_spectrum(p).band("unpaired"))
    analytic = np.sort(analytic_quasienergies(p).unpaired)
    assert np.max(np.abs(numeric - analytic)) <= 0.02


def test_avoided_crossing_at_j0_zero():
    record = floquet_spectrum(params(50.0, 2.405))
    assert record.min_gap("unpaired") > 0


def test_unpaired_without_hopping():
    p = ModelParams.from_ratios(0.0, 80.0, U0=50.0, eps_over_omega=2.0)
    (e1, e2, e3), rho3 = analytic_unpaired_quasienergies(p, rho_coefficients(p))
    assert (e1, e2, e3) == (0.0, 0.0, 0.0) and rho3 == 0.0


def test_unpaired_roots_when_j0_vanishes():
    p = params(50.0, J0_ZERO)
    c = rho_coefficients(p)
    (_, e2, e3), _ = analytic_unpaired_quasienergies(p, c)
    other = -(4 * c.rho1 + 2 * c.rho2) / p.omega
    assert sorted([e2, e3]) == pytest.approx(sorted([0.0, other]), abs=1e-12)


def test_analytic_invariants():
    p = params(50.0, 2.7)
    c = rho_coefficients(p)
    a = analytic_quasienergies(p, c)
    assert a.rho3 >= 0
    e4, e5, e6 = a.paired_unfolded
    assert e5 - e6 == pytest.approx(2 * math.sqrt(c.rho1**2 + 8 * c.rho2**2) / p.omega, rel=1e-12)
    assert e5 >= e6


def test_paired_crossing_when_rho2_vanishes():
    for root in find_rho2_zeros(2.58):
        p = ModelParams.from_ratios(1.0, 80.0, U0_over_omega=2.58, eps_over_omega=root)
        assert paired_crossing_gap(p, rho_coefficients(p)) < 1e-10


def test_paired_fold_subtracts_three_photons():
    p = ModelParams.from_ratios(1.0, 80.0, U0_over_omega=2.58, eps_over_omega=1.0)
    c = rho_coefficients(p)
    raw = analytic_paired_quasienergies(p, c, fold=False)
    folded = analytic_paired_quasienergies(p, c)
    assert np.allclose(np.array(raw) - np.array(folded), 3 * 80.0, atol=1e-9)


def test_paired_crossings():
    assert any(abs(x - 0.95) <= 0.02 for x in find_paired_crossings(1.6))
    found = find_paired_crossings(2.58)
    assert len(found) == 4
    assert found == pytest.approx([1.20, 2.02, 5.52, 5.74], abs=0.02)
    assert found == pytest.approx(find_rho2_zeros(2.58), abs=0.005)


def test_band_gap_grows_with_detuning():
    def centre_gap(U0):
        record = floquet_spectrum(params(U0, 1.3))
        return abs(record.band("paired").mean() - record.band("unpaired").mean())

    assert centre_gap(50.0) > centre_gap(60.0)
    assert centre_gap(110.0) > centre_gap(100.0)
