import math

import numpy as np
import pytest

from analysis.effective import (
    bare_couplings, bogoliubov_matrix, coupler_eigenmodes, dtc_eigenmodes, effective_coupling, g_c_frequency_dependent,
    g_eff_dtc_bogoliubov, g_eff_dtc_capacitive, g_eff_dtc_full, g_eff_dtc_rwa, g_eff_stc, nnn_strengths,
    off_resonant_leakage, symplectic_defect, transition_levels,
)
from core.circuits import StcSpec, TransmonSpec
from core.errors import ParameterDomainError
from core.presets import type1_coupler, type1_device

G1, G2, GC = 0.05, 0.06, 0.02
D1, D2, OMEGA_C = -0.8, -0.9, 6.0


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


class TestClosedForms:
    def test_rwa_value(self):
        expected = G1 * G2 * GC / 2.0 * (1.0 / D1 ** 2 + 1.0 / D2 ** 2)
        assert g_eff_dtc_rwa(G1, G2, GC, D1, D2) == pytest.approx(expected)

    def test_full_reduces_to_rwa_for_fast_coupler(self):
        assert g_eff_dtc_full(G1, G2, GC, D1, D2, 1e9) == pytest.approx(g_eff_dtc_rwa(G1, G2, GC, D1, D2),
                                                                        rel=1e-6)

    def test_capacitive_without_inductive_part(self):
        value = g_eff_dtc_capacitive(G1, G2, GC, 0.0, D1, D2, OMEGA_C)
        expected = G1 * G2 * GC / 2.0 * sum((1.0 - d / OMEGA_C) / d ** 2 for d in (D1, D2))
        assert value == pytest.approx(expected)

    def test_capacitive_null_shifts_with_detuning(self):
        # g_cap = g_ind nulls the static coupling but not the frequency-dependent part
        assert g_eff_dtc_capacitive(G1, G2, GC, GC, D1, D2, OMEGA_C) != 0.0

    def test_frequency_dependent_intermode_coupling(self):
        assert g_c_frequency_dependent(0.03, 0.01, 0.0, OMEGA_C) == pytest.approx(0.02)
        assert g_c_frequency_dependent(0.03, 0.01, 0.6, OMEGA_C) == pytest.approx(0.02 - 0.1 * 0.04)

    def test_mediated_coupling_vanishes_with_g_c(self):
        assert g_eff_dtc_full(G1, G2, 0.0, D1, D2, OMEGA_C) == 0.0

    def test_bogoliubov_close_to_full_in_dispersive_limit(self):
        omega_1, omega_2 = OMEGA_C + D1, OMEGA_C + D2
        exact = g_eff_dtc_bogoliubov(G1, G2, 1e-3, omega_1, omega_2, OMEGA_C)
        approx = g_eff_dtc_full(G1, G2, 1e-3, D1, D2, OMEGA_C)
        assert exact == pytest.approx(approx, rel=0.05)

    def test_stc_direct_term(self):
        assert g_eff_stc(0.01, 0.0, G2, D1, D2) == pytest.approx(0.01)

    @pytest.mark.parametrize('formula', [g_eff_dtc_rwa, g_eff_stc])
    def test_zero_detuning(self, formula):
        with pytest.raises(ParameterDomainError):
            if formula is g_eff_stc:
                formula(0.0, G1, G2, 0.0, D2)
            else:
                formula(G1, G2, GC, 0.0, D2)


class TestCouplerModes:
    def test_rwa_splitting(self):
        assert dtc_eigenmodes(OMEGA_C, GC) == pytest.approx((OMEGA_C + GC, OMEGA_C - GC))

    def test_full_splitting(self):
        plus, minus = dtc_eigenmodes(OMEGA_C, GC, rwa=False)
        assert plus ** 2 - minus ** 2 == pytest.approx(4.0 * GC * OMEGA_C)

    def test_overcoupled_modes(self):
        with pytest.raises(ParameterDomainError):
            dtc_eigenmodes(1.0, 0.6, rwa=False)

    def test_stc_reports_one_frequency(self):
        minus, plus = coupler_eigenmodes(StcSpec(TransmonSpec(0.32, 55.0)), n_basis=21, levels=3)
        assert minus == plus > 0.0

    def test_decoupled_degenerate_dtc(self):
        spec = type1_coupler(math.pi, j_cap=0.0)
        minus, plus = coupler_eigenmodes(spec, n_basis=21, levels=3)
        assert minus == pytest.approx(plus, abs=1e-9)


class TestBogoliubov:
    def test_symplectic_at_zero_coupling(self):
        assert symplectic_defect(bogoliubov_matrix(OMEGA_C, 0.0)) < 1e-12

    def test_defect_is_second_order(self):
        small = symplectic_defect(bogoliubov_matrix(OMEGA_C, 0.01))
        large = symplectic_defect(bogoliubov_matrix(OMEGA_C, 0.02))
        assert large / small == pytest.approx(4.0, rel=0.05)

    def test_invalid_frequency(self):
        with pytest.raises(ParameterDomainError):
            bogoliubov_matrix(0.0, 0.01)


class TestStrays:
    def test_nnn_strengths(self):
        j_nnn_1, j_nnn_2, j_nnnn = nnn_strengths(0.55, 0.55, 0.1, 5.0)
        assert j_nnn_1 == pytest.approx(2.0 * 0.55 * 0.1 / 5.0)
        assert j_nnn_2 == pytest.approx(j_nnn_1)
        assert j_nnnn == pytest.approx(4.0 * 0.55 * 0.1 * 0.55 / 25.0)

    def test_leakage_on_resonance(self):
        assert off_resonant_leakage(0.01, 0.0) == pytest.approx((100.0, 1.0))

    def test_leakage_far_detuned(self):
        period, amplitude = off_resonant_leakage(0.01, 0.5)
        assert amplitude < 1e-3
        assert period == pytest.approx(1.0 / math.hypot(0.5, 0.01))

    def test_leakage_needs_a_rate(self):
        with pytest.raises(ParameterDomainError):
            off_resonant_leakage(0.0, 0.0)


# ---------------------------------------------------------------------------
# Device-level evaluation
# ---------------------------------------------------------------------------


class TestDeviceCoupling:
    @pytest.mark.parametrize('text, expected', [('12', (1, 2)), ('1-2', (1, 2)), ((0, 1), (0, 1))])
    def test_transition_levels(self, text, expected):
        assert transition_levels(text) == expected

    def test_transition_levels_invalid(self):
        with pytest.raises(ParameterDomainError):
            transition_levels('123')

    def test_split_into_direct_and_mediated(self, tiny_device):
        result = effective_coupling(tiny_device, '12', 'full')
        assert result.g_eff == pytest.approx(result.direct + result.mediated)
        assert 'dispersive_ok' in result.regime_flags

    def test_unknown_formula(self, tiny_device):
        with pytest.raises(ParameterDomainError):
            effective_coupling(tiny_device, '12', 'exact')

    def test_stc_formula_needs_stc(self, tiny_device):
        with pytest.raises(ParameterDomainError):
            effective_coupling(tiny_device, '12', 'stc')

    def test_stc_device(self, tiny_stc):
        result = effective_coupling(tiny_stc, '12')
        assert np.isfinite(result.g_eff)

    def test_computational_couplings_are_suppressed(self):
        device = type1_device(math.pi)
        computational = bare_couplings(device, '01')
        plasmon = bare_couplings(device, '12')
        assert 5.0 * abs(computational.g1) <= abs(plasmon.g1)
        assert 5.0 * abs(computational.g2) <= abs(plasmon.g2)
