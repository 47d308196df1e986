import math

import pytest

from analysis.comparison import REL_ERR_TOLERANCE, compare_effective_vs_exact, doublet_splitting, find_resonance
from core.device import DeviceSpec, Truncation
from core.errors import ResonanceNotFoundError
from core.presets import Q1, Q2, stc_device, type1_device


class TestResonance:
    def test_identical_fluxoniums_resonate_at_sweet_spot(self):
        device = DeviceSpec(fluxoniums=(Q1, Q1), truncation=Truncation(fluxonium_levels=4), fluxonium_basis=30)
        assert find_resonance(device, '12') == pytest.approx(math.pi)

    def test_narrow_window(self, uncoupled_pair):
        with pytest.raises(ResonanceNotFoundError):
            find_resonance(uncoupled_pair, '12', window=1e-6, points=3)

    def test_uncoupled_doublet_is_bare_detuning(self):
        device = DeviceSpec(fluxoniums=(Q1, Q1), truncation=Truncation(fluxonium_levels=4), fluxonium_basis=30)
        assert doublet_splitting(device, '12') == pytest.approx(0.0, abs=1e-9)


@pytest.mark.slow
class TestFormulaAgreement:
    @pytest.mark.parametrize('device, formula', [
        (type1_device(0.0), 'full'),
        (stc_device(0.0), 'stc'),
    ])
    def test_dispersive_rows_agree(self, device, formula):
        report = compare_effective_vs_exact(device, [0.0, 0.5], '12', formula)
        rows = [row for row in report.rows if row.dispersive_ok]
        assert rows
        for row in rows:
            assert row.rel_err < REL_ERR_TOLERANCE
        assert list(report.to_frame().columns) == ['bias', 'g_formula_ghz', 'g_exact_ghz', 'rel_err',
                                                   'dispersive_ok']
