import numpy as np
import pytest
from scipy.integrate import trapezoid

from core.errors import ParameterDomainError
from gates.pulses import DrivePulse, FluxPulse, PulseSchedule, drive_envelope, flux_pulse_value

T_G, RAMP, PEAK = 50.0, 3.0, 0.02


@pytest.fixture
def schedule():
    return PulseSchedule.build(idle_bias=0.0, amplitude=1.2, t_g=T_G, peak=PEAK, frequency=5.0,
                               phase_rel=0.3, ramp=RAMP)


class TestSchedule:
    def test_total_length(self, schedule):
        assert schedule.duration == pytest.approx(T_G + 2.0 * RAMP)
        assert schedule.drive_start == RAMP
        assert schedule.max_bias == pytest.approx(1.2)

    def test_relative_phase(self, schedule):
        assert schedule.drive.phase_rel == pytest.approx(0.3)

    def test_with_drive(self, schedule):
        changed = schedule.with_drive(peak=0.05)
        assert changed.drive.peak == 0.05
        assert changed.flux == schedule.flux

    @pytest.mark.parametrize('flux, drive', [
        (FluxPulse(0.0, ramp=-1.0, total=60.0), DrivePulse(PEAK, 5.0, 50.0)),
        (FluxPulse(0.0, total=60.0), DrivePulse(-PEAK, 5.0, 50.0)),
        (FluxPulse(0.0, total=60.0), DrivePulse(PEAK, 5.0, 0.0)),
        (FluxPulse(0.0, ramp=6.0, total=60.0), DrivePulse(PEAK, 5.0, 50.0)),
    ])
    def test_invalid(self, flux, drive):
        with pytest.raises(ParameterDomainError):
            PulseSchedule(flux=flux, drive=drive)


class TestFluxPulse:
    def test_ends_at_idle(self, schedule):
        assert flux_pulse_value(schedule, 0.0) == pytest.approx(0.0)
        assert flux_pulse_value(schedule, schedule.duration) == pytest.approx(0.0)

    def test_flat_top(self, schedule):
        times = np.linspace(RAMP, RAMP + T_G, 11)
        assert np.allclose(flux_pulse_value(schedule, times), 1.2)

    def test_half_way_up_the_ramp(self, schedule):
        assert flux_pulse_value(schedule, 0.5 * RAMP) == pytest.approx(0.6)

    def test_no_ramp(self):
        square = PulseSchedule.build(0.1, 0.5, T_G, PEAK, 5.0, ramp=0.0)
        assert flux_pulse_value(square, 0.0) == pytest.approx(0.6)

    def test_outside_window(self, schedule):
        with pytest.raises(ParameterDomainError):
            flux_pulse_value(schedule, schedule.duration + 1.0)


class TestDriveEnvelope:
    def test_zero_at_edges(self, schedule):
        assert drive_envelope(schedule, RAMP) == pytest.approx(0.0)
        assert drive_envelope(schedule, RAMP + T_G) == pytest.approx(0.0, abs=1e-15)

    def test_twice_peak_at_centre(self, schedule):
        assert drive_envelope(schedule, RAMP + 0.5 * T_G) == pytest.approx(2.0 * PEAK)

    def test_mean_equals_peak(self, schedule):
        times = RAMP + np.linspace(0.0, T_G, 2001)
        assert trapezoid(drive_envelope(schedule, times), times) / T_G == pytest.approx(PEAK, rel=1e-6)

    def test_off_during_ramps(self, schedule):
        assert drive_envelope(schedule, 0.5 * RAMP) == 0.0

    def test_outside_window(self, schedule):
        with pytest.raises(ParameterDomainError):
            drive_envelope(schedule, np.array([-1.0, 1.0]))
