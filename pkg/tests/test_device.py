import math

import numpy as np
import pytest

from core.device import (
    Coupling, DeviceSpec, EigenSolution, Truncation, assemble, diagonalize, label_states, solve,
)
from core.errors import LabelError, NumericalError, ParameterDomainError, ResourceError
from core.presets import Q1, Q2, spectator_device, stc_device
from tests.conftest import tiny_type1


# ---------------------------------------------------------------------------
# Device structure
# ---------------------------------------------------------------------------


class TestDeviceSpec:
    def test_dtc_mode_names(self, tiny_device):
        assert tiny_device.mode_names == ('q1', 'q2', 'c1', 'c2')

    def test_stc_mode_names(self, tiny_stc):
        assert tiny_stc.mode_names == ('q1', 'q2', 'c')

    def test_spectator_mode_names(self):
        device = spectator_device(0.0, 0.0)
        assert device.mode_names == ('q1', 'q2', 'q3', 'c1', 'c2', 's1', 's2')

    def test_unknown_mode_in_coupling(self):
        with pytest.raises(ParameterDomainError):
            DeviceSpec(fluxoniums=(Q1, Q2), couplings=(Coupling('q1', 'c1', 0.5),))

    def test_self_coupling(self):
        with pytest.raises(ParameterDomainError):
            DeviceSpec(fluxoniums=(Q1, Q2), couplings=(Coupling('q1', 'q1', 0.5),))

    def test_too_few_levels(self):
        with pytest.raises(ParameterDomainError):
            DeviceSpec(fluxoniums=(Q1,), truncation=Truncation(fluxonium_levels=2))

    def test_coupling_strength_sums_terms(self):
        device = DeviceSpec(fluxoniums=(Q1, Q2),
                            couplings=(Coupling('q1', 'q2', 0.1),),
                            extra_couplings=(Coupling('q2', 'q1', 0.02),))
        assert device.coupling_strength('q1', 'q2') == pytest.approx(0.12)


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


class TestAssemble:
    def test_dimension_is_product_of_levels(self, tiny_device):
        assert assemble(tiny_device).dim == 3 * 3 * 2 * 2

    def test_hamiltonian_is_hermitian(self, tiny_device):
        h = assemble(tiny_device).hamiltonian
        assert np.allclose(h, h.conj().T)

    def test_mode_order_does_not_change_spectrum(self):
        truncation = Truncation(fluxonium_levels=4)
        forward = DeviceSpec(fluxoniums=(Q1, Q2), couplings=(Coupling('q1', 'q2', 0.05),),
                             truncation=truncation, fluxonium_basis=30)
        swapped = DeviceSpec(fluxoniums=(Q2, Q1), couplings=(Coupling('q2', 'q1', 0.05),),
                             truncation=truncation, fluxonium_basis=30)
        assert np.allclose(solve(forward).energies, solve(swapped).energies, atol=1e-9)

    def test_qubit_order_around_coupler_does_not_change_spectrum(self):
        kwargs = {'truncation': Truncation(fluxonium_levels=3, coupler_levels=2),
                  'fluxonium_basis': 30, 'charge_basis': 21}
        forward = stc_device(0.3, fluxonium_1=Q1, fluxonium_2=Q2, **kwargs)
        swapped = stc_device(0.3, fluxonium_1=Q2, fluxonium_2=Q1, **kwargs)
        assert np.allclose(solve(forward).energies, solve(swapped).energies, atol=1e-9)

    def test_resource_cap(self):
        device = tiny_type1(truncation=Truncation(fluxonium_levels=3, coupler_levels=2, max_dim=10))
        with pytest.raises(ResourceError):
            assemble(device)

    def test_energy_cutoff_prunes(self, tiny_device):
        full = assemble(tiny_device).dim
        pruned = tiny_type1(truncation=Truncation(fluxonium_levels=3, coupler_levels=2, energy_cutoff=5.0))
        assert assemble(pruned).dim < full

    def test_reference_basis_reproduces_device(self, tiny_device):
        direct = assemble(tiny_device).hamiltonian
        shared = assemble(tiny_device, reference=tiny_device).hamiltonian
        assert np.allclose(np.linalg.eigvalsh(direct), np.linalg.eigvalsh(shared), atol=1e-9)

    def test_reference_with_other_structure(self, tiny_device, tiny_stc):
        with pytest.raises(ParameterDomainError):
            assemble(tiny_device, reference=tiny_stc)

    def test_operator_kinds(self, tiny_device):
        system = assemble(tiny_device)
        assert system.operator('q1', 'n').shape == (system.dim, system.dim)
        with pytest.raises(ParameterDomainError):
            system.operator('q1', 'q')


# ---------------------------------------------------------------------------
# Diagonalization and labels
# ---------------------------------------------------------------------------


class TestDiagonalize:
    def test_diagonal_matrix(self):
        eig = diagonalize(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(eig.energies, [1.0, 2.0, 3.0])

    def test_avoided_crossing_toy(self):
        w1, w2, g = 5.0, 5.2, 0.03
        h = np.diag([0.0, w2, w1, w1 + w2]).astype(complex)
        h[1, 2] = h[2, 1] = g
        energies = diagonalize(h).energies
        mean, half = 0.5 * (w1 + w2), math.hypot(0.5 * (w1 - w2), g)
        assert np.allclose(energies, [0.0, mean - half, mean + half, w1 + w2])

    def test_non_hermitian_rejected(self):
        with pytest.raises(NumericalError):
            diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestLabels:
    def test_uncoupled_states_are_pure(self, uncoupled_pair):
        eig = solve(uncoupled_pair)
        assert all(label is not None for label in eig.labels)
        assert np.allclose(eig.overlap_quality, 1.0)

    def test_even_split_is_left_unlabeled(self, uncoupled_pair):
        system = assemble(uncoupled_pair)
        vectors = np.eye(system.dim, dtype=complex)
        vectors[:2, :2] = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
        eig = label_states(EigenSolution(energies=np.arange(system.dim, dtype=float), vectors=vectors),
                           bare_basis=system)
        assert eig.labels[0] is None and eig.labels[1] is None
        assert eig.overlap_quality[0] == pytest.approx(0.5)
        assert all(label is not None for label in eig.labels[2:])

    def test_ground_state_label(self, tiny_device):
        eig = solve(tiny_device)
        assert eig.index('00') == 0

    def test_parse_label(self, tiny_device):
        eig = solve(tiny_device)
        assert eig.parse_label('21') == (2, 1, 0, 0)
        assert eig.parse_label('21,01') == (2, 1, 0, 1)

    def test_label_too_long(self, tiny_device):
        eig = solve(tiny_device)
        with pytest.raises(LabelError):
            eig.parse_label('21011')

    def test_missing_label_is_key_error(self, tiny_device):
        eig = solve(tiny_device)
        with pytest.raises(KeyError):
            eig.index('99')

    def test_labels_need_bare_basis(self):
        with pytest.raises(LabelError):
            label_states(diagonalize(np.eye(2)))

    def test_dressing_keeps_qubit_labels(self, tiny_device):
        eig = solve(tiny_device)
        for label in ('00', '01', '10', '11', '20', '02', '21', '12'):
            assert eig.has(label)

    def test_stc_spectrum_even_in_flux(self):
        def energies(phi):
            device = stc_device(phi, truncation=Truncation(fluxonium_levels=3, coupler_levels=2),
                                fluxonium_basis=30, charge_basis=21)
            return solve(device).energies
        assert np.allclose(energies(0.4), energies(-0.4), atol=1e-9)

    def test_coupler_bias_periodicity(self):
        low = solve(tiny_type1(0.3)).energies
        high = solve(tiny_type1(0.3 + 4.0 * math.pi)).energies
        assert np.allclose(low, high, atol=1e-8)
