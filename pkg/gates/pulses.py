"""
Flux and microwave pulse shapes. Times in ns, frequencies in GHz, phases in rad.

A schedule is one flat-top flux pulse with cosine ramps; the microwave drive
sits on the flat top, starting at the end of the first ramp.
"""
import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from core.errors import ParameterDomainError

DEFAULT_RAMP_NS = 3.0
_TIME_TOL = 1e-9

TimeLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class FluxPulse:
    idle_bias: float
    amplitude: float = 0.0
    ramp: float = DEFAULT_RAMP_NS
    total: float = 0.0


@dataclass(frozen=True)
class DrivePulse:
    peak: float
    frequency: float
    length: float
    phase_1: float = 0.0
    phase_2: float = 0.0

    @property
    def phase_rel(self) -> float:
        return self.phase_2 - self.phase_1


@dataclass(frozen=True)
class PulseSchedule:
    flux: FluxPulse
    drive: DrivePulse

    def __post_init__(self):
        if self.flux.ramp < 0.0:
            raise ParameterDomainError(f"ramp time must be non-negative, got {self.flux.ramp}")
        if self.drive.peak < 0.0:
            raise ParameterDomainError(f"drive amplitude must be non-negative, got {self.drive.peak}")
        if self.drive.length <= 0.0:
            raise ParameterDomainError(f"gate length must be positive, got {self.drive.length}")
        if self.flux.total < self.drive.length + 2.0 * self.flux.ramp - _TIME_TOL:
            raise ParameterDomainError(
                f"pulse length {self.flux.total} ns shorter than gate {self.drive.length} ns plus two ramps"
            )

    @classmethod
    def build(cls, idle_bias: float, amplitude: float, t_g: float, peak: float, frequency: float,
              phase_rel: float = 0.0, ramp: float = DEFAULT_RAMP_NS) -> 'PulseSchedule':
        """Schedule whose total length is the gate length plus both ramps."""
        return cls(flux=FluxPulse(idle_bias=idle_bias, amplitude=amplitude, ramp=ramp, total=t_g + 2.0 * ramp),
                   drive=DrivePulse(peak=peak, frequency=frequency, length=t_g, phase_1=0.0, phase_2=phase_rel))

    @property
    def duration(self) -> float:
        return self.flux.total

    @property
    def drive_start(self) -> float:
        return self.flux.ramp

    @property
    def max_bias(self) -> float:
        return self.flux.idle_bias + self.flux.amplitude

    def with_drive(self, **changes) -> 'PulseSchedule':
        return replace(self, drive=replace(self.drive, **changes))


def _check_times(schedule: PulseSchedule, t: np.ndarray) -> None:
    if np.any(t < -_TIME_TOL) or np.any(t > schedule.duration + _TIME_TOL):
        raise ParameterDomainError(f"time outside the pulse window [0, {schedule.duration}] ns")


def flux_pulse_value(schedule: PulseSchedule, t: TimeLike) -> TimeLike:
    """Flat-top flux bias with cosine ramps at time(s) ``t``."""
    times = np.asarray(t, dtype=float)
    _check_times(schedule, times)
    flux = schedule.flux
    if flux.ramp == 0.0:
        shape = np.ones_like(times)
    else:
        rise = 0.5 * (1.0 - np.cos(math.pi * np.clip(times, 0.0, flux.ramp) / flux.ramp))
        fall = 0.5 * (1.0 - np.cos(math.pi * np.clip(flux.total - times, 0.0, flux.ramp) / flux.ramp))
        shape = np.minimum(rise, fall)
    value = flux.idle_bias + flux.amplitude * shape
    return float(value) if np.ndim(value) == 0 else value


def drive_envelope(schedule: PulseSchedule, t: TimeLike) -> TimeLike:
    """Omega_d (1 - cos 2 pi tau / t_g) inside the drive window, zero outside."""
    times = np.asarray(t, dtype=float)
    _check_times(schedule, times)
    drive = schedule.drive
    tau = times - schedule.drive_start
    inside = (tau >= 0.0) & (tau <= drive.length)
    value = np.where(inside, drive.peak * (1.0 - np.cos(2.0 * math.pi * tau / drive.length)), 0.0)
    return float(value) if np.ndim(value) == 0 else value
