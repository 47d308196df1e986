"""
Gate calibration: interaction-point choice, derivative-free drive tuning and
the spectator protocol.
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from analysis.metrics import find_nulling_point, plasmon_shift, spectator_shift
from core.device import DeviceSpec, solve
from core.errors import CircuitError, ParameterDomainError
from core.sweep import sweep
from gates.dynamics import DEFAULT_BASIS_LEVELS, GateModel, coupler_bias_path
from gates.fidelity import GateReport
from gates.pulses import DEFAULT_RAMP_NS, PulseSchedule
from utils.helpers import get_path, set_path, wrap_phase
from utils.logger import setup_logger

logger = setup_logger('calibration')

DEFAULT_BUDGET = 200
LEAKAGE_WEIGHT = 1.0
PHASE_WEIGHT = 1.0 / math.pi ** 2
DEFAULT_TARGET = 1e-4
INITIAL_STEPS = (0.1, 2e-3, 0.2)
IDLE_METRIC = 'max_shift_ghz'


@dataclass
class DriveCalibration:
    peak: float
    frequency: float
    phase_rel: float
    objective: float
    evaluations: int
    history: List[float] = field(default_factory=list)


@dataclass
class CalibrationResult:
    schedule: PulseSchedule
    report: GateReport
    objective: float
    evaluations: int
    best_effort: bool = False
    model: Optional[GateModel] = field(default=None, repr=False)


@dataclass
class SpectatorResult:
    report_0: GateReport
    report_1: GateReport
    shift_ghz: float
    calibration: CalibrationResult

    @property
    def error_difference(self) -> float:
        return self.report_1.error - self.report_0.error


class _BudgetExhausted(Exception):
    pass


def gate_objective(report: GateReport, weights: Tuple[float, float] = (LEAKAGE_WEIGHT, PHASE_WEIGHT)) -> float:
    """w_L * leakage + w_phi * (conditional phase - pi)^2."""
    phase_error = wrap_phase(report.conditional_phase - math.pi)
    return weights[0] * report.leakage + weights[1] * phase_error ** 2


def rabi_area_amplitude(element: float, t_g: float) -> float:
    """Peak Omega_d giving one full Rabi cycle over the cosine envelope: 1/(|m| t_g)."""
    if element <= 0.0 or t_g <= 0.0:
        raise ParameterDomainError("Rabi area rule needs a positive matrix element and gate length")
    return 1.0 / (element * t_g)


def calibrate_drive(model, t_g: float, initial: Sequence[float], budget: int = DEFAULT_BUDGET,
                    weights: Tuple[float, float] = (LEAKAGE_WEIGHT, PHASE_WEIGHT),
                    target: float = DEFAULT_TARGET, seed: int = 0, restarts: int = 1,
                    steps: Optional[Sequence[float]] = None) -> DriveCalibration:
    """Nelder-Mead over (peak, frequency, relative phase) on the static model.

    ``model`` needs ``idle_bias`` and ``run(schedule)``. The best point seen is
    kept, so a larger budget never returns a worse objective.
    """
    if budget < 1:
        raise ParameterDomainError(f"calibration budget must be positive, got {budget}")
    x0 = np.asarray(initial, dtype=float)
    scale = np.asarray(steps if steps is not None else
                       (INITIAL_STEPS[0] * max(abs(x0[0]), 1e-6), INITIAL_STEPS[1], INITIAL_STEPS[2]))
    best = {'x': x0.copy(), 'f': math.inf}
    history: List[float] = []

    def objective(x: np.ndarray) -> float:
        if len(history) >= budget:
            raise _BudgetExhausted()
        schedule = PulseSchedule.build(idle_bias=model.idle_bias, amplitude=0.0, t_g=t_g,
                                       peak=abs(float(x[0])), frequency=float(x[1]),
                                       phase_rel=float(x[2]), ramp=0.0)
        value = gate_objective(model.run(schedule), weights)
        history.append(value)
        if value < best['f']:
            best['f'], best['x'] = value, np.array(x, dtype=float)
        logger.debug(f"eval {len(history)}: peak={x[0]:.6g} freq={x[1]:.9g} phase={x[2]:.4g} -> {value:.3e}")
        return value

    rng = np.random.default_rng(seed)
    start = x0
    for _ in range(restarts + 1):
        simplex = np.vstack([start] + [start + np.eye(3)[k] * scale[k] for k in range(3)])
        try:
            optimize.minimize(objective, start, method='Nelder-Mead',
                              options={'initial_simplex': simplex, 'maxfev': budget,
                                       'xatol': 1e-10, 'fatol': 1e-12})
        except _BudgetExhausted:
            break
        if best['f'] <= target or len(history) >= budget:
            break
        start = best['x'] + rng.normal(size=3) * scale
    x = best['x']
    return DriveCalibration(peak=abs(float(x[0])), frequency=float(x[1]), phase_rel=wrap_phase(x[2]),
                            objective=best['f'], evaluations=len(history), history=history)


def find_idle_bias(device: DeviceSpec, bias_path: Optional[str] = None, grid: Optional[Sequence[float]] = None,
                   threads: int = 1) -> float:
    """Coupler bias where the plasmon shifts are minimal; the gate parks the coupler there."""
    path = bias_path or coupler_bias_path(device)
    bias, value = find_nulling_point(device, path, grid, IDLE_METRIC, threads=threads)
    logger.info(f"idle bias {bias:.6g} with residual shift {value * 1e3:.4g} MHz")
    return bias


def find_interaction_point(device: DeviceSpec, target_shift: Optional[float] = None,
                           t_g: Optional[float] = None, bias_range: Optional[Tuple[float, float]] = None,
                           points: int = 61, bias_path: Optional[str] = None, threads: int = 1,
                           idle_bias: Optional[float] = None) -> float:
    """Bias closest to idle whose maximum plasmon shift reaches ``target_shift`` (default 2/t_g).

    ``idle_bias`` defaults to the device's configured bias; the search window
    defaults to one flux period centred on it.
    """
    path = bias_path or coupler_bias_path(device)
    idle = float(get_path(device, path) if idle_bias is None else idle_bias)
    if target_shift is None:
        if not t_g:
            raise ParameterDomainError("need a target shift or a gate length")
        target_shift = 2.0 / t_g
    low, high = bias_range if bias_range is not None else (idle - math.pi, idle + math.pi)
    values = np.linspace(low, high, max(points, 2))
    result = sweep(device, path, values, ['max_shift_ghz'], threads=threads)
    shifts = result.column('max_shift_ghz')
    reached = [k for k, s in enumerate(shifts) if np.isfinite(s) and s >= target_shift]
    if not reached:
        k = int(np.nanargmax(shifts))
        logger.warning(f"no bias in [{low:.4g}, {high:.4g}] reaches a {target_shift:.3g} GHz shift; "
                       f"using the largest ({shifts[k]:.3g} GHz)")
        return float(values[k])
    k = min(reached, key=lambda j: abs(values[j] - idle))
    neighbour = k - 1 if values[k] > idle else k + 1
    if 0 <= neighbour < len(values) and np.isfinite(shifts[neighbour]) and shifts[neighbour] < target_shift:
        def excess(bias: float) -> float:
            return _max_shift(set_path(device, path, bias)) - target_shift
        a, b = sorted((values[neighbour], values[k]))
        try:
            return float(optimize.brentq(excess, a, b, xtol=1e-10))
        except (ValueError, CircuitError):
            logger.debug("interaction point refinement failed; keeping the grid value")
    return float(values[k])


def _max_shift(device: DeviceSpec) -> float:
    return plasmon_shift(solve(device)).max_shift


def calibrate_gate(device: DeviceSpec, t_g: float, interaction_bias: float, transition: str = '11-21',
                   budget: int = DEFAULT_BUDGET, bias_path: Optional[str] = None,
                   ramp: float = DEFAULT_RAMP_NS, levels: int = DEFAULT_BASIS_LEVELS,
                   weights: Tuple[float, float] = (LEAKAGE_WEIGHT, PHASE_WEIGHT),
                   target: float = DEFAULT_TARGET, seed: int = 0, restarts: int = 1,
                   spectator_levels: Sequence[int] = (0,), idle_bias: Optional[float] = None) -> CalibrationResult:
    """Tune the drive at the interaction point, then simulate the full ramped gate.

    The coupler idles at ``idle_bias`` (default: the device's configured bias)
    and is pulsed to ``interaction_bias`` and back. The drive starts on the
    dressed frequency of ``transition`` with the Rabi area amplitude. The
    returned report is taken in the idle dressed frame.
    """
    path = bias_path or coupler_bias_path(device)
    idle = float(get_path(device, path) if idle_bias is None else idle_bias)
    static = GateModel(device, path, idle_bias=interaction_bias, levels=levels, transition=transition)
    peak = rabi_area_amplitude(static.transition_element(), t_g)
    initial = (peak, static.transition_frequency(), 0.0)
    drive = calibrate_drive(static, t_g, initial, budget=budget, weights=weights, target=target,
                            seed=seed, restarts=restarts)
    schedule = PulseSchedule.build(idle_bias=idle, amplitude=interaction_bias - idle, t_g=t_g,
                                   peak=drive.peak, frequency=drive.frequency, phase_rel=drive.phase_rel, ramp=ramp)
    model = GateModel(device, path, idle_bias=idle, levels=levels, transition=transition,
                      spectator_levels=spectator_levels)
    report = model.run(schedule)
    best_effort = drive.objective > target
    if best_effort:
        logger.warning(f"calibration budget of {budget} spent with objective {drive.objective:.3e} > {target:.1e}")
    logger.info(f"t_g={t_g:g} ns: F={report.fidelity:.6f}, leakage={report.leakage:.2e}, "
                f"phase={report.conditional_phase:.4f} after {drive.evaluations} evaluations")
    return CalibrationResult(schedule=schedule, report=report, objective=drive.objective,
                             evaluations=drive.evaluations, best_effort=best_effort, model=model)


def spectator_experiment(device: DeviceSpec, t_g: float, interaction_bias: float,
                         transition: str = '11-21', budget: int = DEFAULT_BUDGET,
                         bias_path: Optional[str] = None, levels: int = DEFAULT_BASIS_LEVELS,
                         seed: int = 0, idle_bias: Optional[float] = None) -> SpectatorResult:
    """Calibrate with the spectator (third fluxonium) in |0>, then evaluate with it in |0> and |1>."""
    if len(device.fluxoniums) < 3:
        raise ParameterDomainError("spectator experiment needs three fluxoniums")
    calibration = calibrate_gate(device, t_g, interaction_bias, transition, budget=budget,
                                 bias_path=bias_path, levels=levels, seed=seed, spectator_levels=(0, 1),
                                 idle_bias=idle_bias)
    model = calibration.model
    report_0 = calibration.report
    report_1 = model.run(calibration.schedule, spectator_level=1)
    path = bias_path or coupler_bias_path(device)
    shift = spectator_shift(solve(set_path(device, path, interaction_bias)), transition)
    logger.info(f"spectator: error |0> {report_0.error:.3e}, |1> {report_1.error:.3e}, shift {shift * 1e3:.4g} MHz")
    return SpectatorResult(report_0=report_0, report_1=report_1, shift_ghz=shift, calibration=calibration)
