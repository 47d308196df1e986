import math
import os

import numpy as np
import pytest

from analysis.metrics import plasmon_shift
from config.settings import build_device, load_config
from core.device import solve
from core.errors import ParameterDomainError
from core.presets import type1_device
from gates.calibration import (
    PHASE_WEIGHT, calibrate_drive, calibrate_gate, find_idle_bias, find_interaction_point, gate_objective,
    rabi_area_amplitude, spectator_experiment,
)
from gates.fidelity import GateReport
from tests.conftest import REPO_ROOT
from utils.helpers import set_path

NEAR_HALF_FLUX = np.linspace(0.5 * math.pi, 1.5 * math.pi, 21)


class ToyModel:
    """Objective with a known optimum at peak 0.02, frequency 5.0."""
    idle_bias = 0.0

    def __init__(self):
        self.calls = 0

    def run(self, schedule) -> GateReport:
        self.calls += 1
        drive = schedule.drive
        return GateReport(fidelity=1.0, leakage=(drive.peak - 0.02) ** 2,
                          conditional_phase=math.pi + 10.0 * (drive.frequency - 5.0), z_phases=(0.0, 0.0))


def _report(leakage: float, phase: float) -> GateReport:
    return GateReport(fidelity=1.0, leakage=leakage, conditional_phase=phase, z_phases=(0.0, 0.0))


class TestObjective:
    def test_perfect_gate(self):
        assert gate_objective(_report(0.0, math.pi)) == 0.0

    def test_phase_wraps(self):
        assert gate_objective(_report(0.0, -math.pi)) == pytest.approx(0.0, abs=1e-20)

    def test_weights(self):
        value = gate_objective(_report(1e-3, math.pi + 0.1))
        assert value == pytest.approx(1e-3 + PHASE_WEIGHT * 0.01)

    def test_rabi_area(self):
        assert rabi_area_amplitude(0.5, 50.0) == pytest.approx(0.04)

    @pytest.mark.parametrize('element, t_g', [(0.0, 50.0), (0.5, 0.0)])
    def test_rabi_area_invalid(self, element, t_g):
        with pytest.raises(ParameterDomainError):
            rabi_area_amplitude(element, t_g)


class TestCalibrateDrive:
    def test_converges_on_toy_model(self):
        result = calibrate_drive(ToyModel(), 50.0, (0.025, 5.004, 0.0), budget=400, target=1e-10)
        assert result.peak == pytest.approx(0.02, abs=1e-4)
        assert result.frequency == pytest.approx(5.0, abs=1e-4)
        assert result.objective < 1e-8

    def test_budget_is_respected(self):
        model = ToyModel()
        result = calibrate_drive(model, 50.0, (0.025, 5.004, 0.0), budget=7)
        assert result.evaluations <= 7
        assert model.calls <= 7
        assert result.objective == min(result.history)

    def test_larger_budget_is_never_worse(self):
        small = calibrate_drive(ToyModel(), 50.0, (0.025, 5.004, 0.0), budget=10)
        large = calibrate_drive(ToyModel(), 50.0, (0.025, 5.004, 0.0), budget=60)
        assert large.objective <= small.objective

    def test_seed_makes_restarts_reproducible(self):
        first = calibrate_drive(ToyModel(), 50.0, (0.025, 5.004, 0.0), budget=80, target=0.0, seed=3, restarts=2)
        second = calibrate_drive(ToyModel(), 50.0, (0.025, 5.004, 0.0), budget=80, target=0.0, seed=3, restarts=2)
        assert first.history == second.history

    def test_empty_budget(self):
        with pytest.raises(ParameterDomainError):
            calibrate_drive(ToyModel(), 50.0, (0.025, 5.0, 0.0), budget=0)


class TestInteractionPoint:
    def test_zero_target_stays_at_idle(self, tiny_device):
        assert find_interaction_point(tiny_device, target_shift=0.0, points=5) == pytest.approx(0.0)

    def test_unreachable_target_uses_largest_shift(self, tiny_device):
        values = np.linspace(-math.pi, math.pi, 5)
        bias = find_interaction_point(tiny_device, target_shift=1e3, points=5)
        assert bias in [pytest.approx(v) for v in values]

    def test_needs_target_or_gate_length(self, tiny_device):
        with pytest.raises(ParameterDomainError):
            find_interaction_point(tiny_device)

    def test_window_is_centred_on_idle_bias(self, tiny_device):
        bias = find_interaction_point(tiny_device, target_shift=0.0, points=5, idle_bias=math.pi)
        assert bias == pytest.approx(math.pi)

    def test_interaction_point_leaves_the_null(self, tiny_device):
        bias = find_interaction_point(tiny_device, t_g=100.0, points=21, idle_bias=math.pi)
        assert abs(bias - math.pi) > 0.1
        shifts = [plasmon_shift(solve(set_path(tiny_device, 'couplers.c.phi_ext_squid', b))).max_shift
                  for b in (math.pi, bias)]
        assert shifts[1] > shifts[0]


class TestIdleBias:
    def test_idle_bias_minimizes_the_shift(self, tiny_device):
        idle = find_idle_bias(tiny_device, grid=NEAR_HALF_FLUX)
        assert abs(idle - math.pi) < 0.5
        at_idle = plasmon_shift(solve(set_path(tiny_device, 'couplers.c.phi_ext_squid', idle))).max_shift
        assert at_idle < plasmon_shift(solve(tiny_device)).max_shift

    def test_gate_pulses_away_from_idle(self, tiny_device):
        idle = find_idle_bias(tiny_device, grid=NEAR_HALF_FLUX)
        bias = find_interaction_point(tiny_device, t_g=20.0, points=21, idle_bias=idle)
        result = calibrate_gate(tiny_device, 20.0, bias, budget=3, levels=12, ramp=1.0, idle_bias=idle)
        flux = result.schedule.flux
        assert flux.idle_bias == pytest.approx(idle)
        assert flux.amplitude == pytest.approx(bias - idle)
        assert abs(flux.amplitude) > 0.1
        assert result.model.idle_bias == pytest.approx(idle)
        assert result.evaluations <= 3


@pytest.mark.slow
class TestReferenceGate:
    def test_cz_error_at_100_ns(self):
        device = type1_device(math.pi)
        idle = find_idle_bias(device, grid=np.linspace(0.5 * math.pi, 1.5 * math.pi, 41), threads=4)
        bias = find_interaction_point(device, t_g=100.0, threads=4, idle_bias=idle)
        result = calibrate_gate(device, 100.0, bias, budget=200, idle_bias=idle)
        assert abs(result.schedule.flux.amplitude) > 0.1
        assert result.report.error < 1e-4
        assert result.report.leakage < 1e-4

    def test_spectator_does_not_change_the_gate_at_the_null(self):
        config = load_config(os.path.join(REPO_ROOT, 'configs', 'spectator_type1.json'))
        device = build_device(config)
        idle = find_idle_bias(device, grid=np.linspace(0.75 * math.pi, 1.25 * math.pi, 11), threads=4)
        bias = find_interaction_point(device, t_g=100.0, points=31, threads=4, idle_bias=idle)
        result = spectator_experiment(device, 100.0, bias, budget=200, levels=int(config.gate['levels']),
                                      idle_bias=idle)
        assert abs(result.calibration.schedule.flux.amplitude) > 0.1
        assert abs(result.error_difference) < 1e-4
        assert np.isfinite(result.shift_ghz)
        assert result.shift_ghz >= 0.0
