"""
Time-dependent gate simulation in a fixed dressed basis.

The basis is the set of low-lying eigenstates of the device at its idle
bias. Along the flux pulse the static Hamiltonian is assembled on a bias grid
in that basis and spline-interpolated entrywise; the propagator is a
time-ordered product of exact short-step exponentials.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

from core.device import DeviceSpec, EigenSolution, assemble, diagonalize, label_states
from core.errors import ParameterDomainError, StepSizeError
from gates.fidelity import GateReport, gate_report
from gates.pulses import PulseSchedule, drive_envelope, flux_pulse_value
from utils.helpers import get_path, set_path
from utils.logger import setup_logger

logger = setup_logger('dynamics')

DEFAULT_BASIS_LEVELS = 20
DEFAULT_GRID_POINTS = 33
STEPS_PER_PERIOD = 40
UNITARITY_TOL = 1e-8
_CHUNK = 2048

TRACE_COLUMNS = ('P_00', 'P_01', 'P_10', 'P_11', 'P_21', 'leak_other')


def coupler_bias_path(device: DeviceSpec) -> str:
    if device.coupler is None:
        raise ParameterDomainError("device has no coupler to pulse")
    return f"couplers.{device.coupler_name}.{device.coupler.bias_field}"


def gate_labels(n_qubits: int, transition: str = '11-21', spectator_levels: Sequence[int] = (0,),
                qubits: Tuple[int, int] = (0, 1), spectator: int = 2) -> Dict[str, List[str]]:
    """Label strings for the computational states and the gate transition.

    Keys are 'computational' (00, 01, 10, 11 per spectator level) and 'target'
    (both ends of the transition per spectator level).
    """
    def label(pair: str, level: int) -> str:
        digits = [0] * n_qubits
        digits[qubits[0]], digits[qubits[1]] = int(pair[0]), int(pair[1])
        if n_qubits > spectator:
            digits[spectator] = level
        return ''.join(str(d) for d in digits)

    levels = spectator_levels if n_qubits > spectator else (0,)
    start, _, end = transition.partition('-')
    return {
        'computational': [label(p, s) for s in levels for p in ('00', '01', '10', '11')],
        'target': [label(p, s) for s in levels for p in (start, end)],
    }


class GateModel:
    """Device restricted to the dressed eigenbasis at ``idle_bias``.

    Parameters
    ----------
    device : DeviceSpec
    bias_path : dotted path of the pulsed bias; defaults to the coupler's flux line
    idle_bias : bias defining the frame; defaults to the device's current value
    levels : number of lowest dressed states kept (required labels are always added)
    """

    def __init__(self, device: DeviceSpec, bias_path: Optional[str] = None,
                 idle_bias: Optional[float] = None, levels: int = DEFAULT_BASIS_LEVELS,
                 transition: str = '11-21', spectator_levels: Sequence[int] = (0,),
                 grid_points: int = DEFAULT_GRID_POINTS):
        self.bias_path = bias_path or coupler_bias_path(device)
        self.idle_bias = float(get_path(device, self.bias_path) if idle_bias is None else idle_bias)
        self.device = set_path(device, self.bias_path, self.idle_bias)
        self.transition = transition
        self.grid_points = max(int(grid_points), 4)
        self.system = assemble(self.device)
        self.eig: EigenSolution = label_states(diagonalize(self.system))
        labels = gate_labels(self.system.n_qubits, transition, spectator_levels)
        required = self.eig.indices(labels['computational'] + labels['target'])
        keep = sorted(set(range(min(levels, len(self.eig.energies)))) | set(required))
        self.keep = keep
        self.frame = self.eig.vectors[:, keep]
        self.energies = self.eig.energies[keep]
        self.labels = [self.eig.labels[k] for k in keep]
        self._position = {k: p for p, k in enumerate(keep)}
        self.drive_ops = [self._project(self.system.operator(q, 'n')) for q in ('q1', 'q2')]
        self._splines: Dict[Tuple[float, float, int], Tuple[CubicSpline, CubicSpline]] = {}
        logger.debug(f"gate model: {len(keep)} dressed states of {self.system.dim} at bias {self.idle_bias:.6g}")

    @property
    def dim(self) -> int:
        return len(self.keep)

    def _project(self, matrix: np.ndarray) -> np.ndarray:
        return self.frame.conj().T @ matrix @ self.frame

    def index(self, label) -> int:
        """Position of a labeled state inside the kept basis."""
        k = self.eig.index(label)
        if k not in self._position:
            raise ParameterDomainError(f"state {label} is outside the kept gate basis")
        return self._position[k]

    def indices(self, labels: Sequence) -> List[int]:
        return [self.index(label) for label in labels]

    def computational_indices(self, spectator_level: int = 0) -> List[int]:
        labels = gate_labels(self.system.n_qubits, self.transition, (spectator_level,))
        return self.indices(labels['computational'])

    def static_hamiltonian(self, bias: float) -> np.ndarray:
        """Static Hamiltonian at ``bias`` in the fixed idle basis, by direct assembly."""
        if bias == self.idle_bias:
            return np.diag(self.energies).astype(complex)
        biased = set_path(self.device, self.bias_path, bias)
        h = self._project(assemble(biased, reference=self.device).hamiltonian)
        return 0.5 * (h + h.conj().T)

    def static_spline(self, low: float, high: float) -> Tuple[CubicSpline, CubicSpline]:
        key = (float(low), float(high), self.grid_points)
        if key not in self._splines:
            grid = np.linspace(low, high, self.grid_points)
            stack = np.array([self.static_hamiltonian(b) for b in grid])
            real = CubicSpline(grid, stack.real, axis=0)
            imag = CubicSpline(grid, stack.imag, axis=0)
            self._splines[key] = (real, imag)
        return self._splines[key]

    def static_interpolated(self, bias: np.ndarray, low: float, high: float) -> np.ndarray:
        real, imag = self.static_spline(low, high)
        h = real(bias) + 1j * imag(bias)
        return 0.5 * (h + np.swapaxes(h, -1, -2).conj())

    def transition_frequency(self, transition: Optional[str] = None) -> float:
        start, _, end = (transition or self.transition).partition('-')
        labels = gate_labels(self.system.n_qubits, f"{start}-{end}")['target']
        return self.eig.energy(labels[1]) - self.eig.energy(labels[0])

    def transition_element(self, transition: Optional[str] = None) -> float:
        """|<start| n_1 + n_2 |end>| in the dressed basis."""
        labels = gate_labels(self.system.n_qubits, transition or self.transition)['target']
        a, b = self.indices(labels[:2])
        return float(abs((self.drive_ops[0] + self.drive_ops[1])[a, b]))

    def run(self, schedule: PulseSchedule, spectator_level: int = 0,
            record_every: Optional[float] = None) -> GateReport:
        """Simulate one schedule and evaluate the CZ metrics in the rotating idle frame."""
        hamiltonian = build_time_dependent_hamiltonian(self, schedule)
        computational = self.computational_indices(spectator_level)
        if record_every is None:
            u = propagate(hamiltonian, (0.0, schedule.duration), max_frequency=hamiltonian.max_frequency)
            traces = None
        else:
            u, times, snapshots = propagate_with_trace(hamiltonian, (0.0, schedule.duration), record_every,
                                                       max_frequency=hamiltonian.max_frequency)
            traces = self._population_traces(times, snapshots, computational, spectator_level)
        u_frame = np.exp(2j * math.pi * self.energies * schedule.duration)[:, None] * u
        return gate_report(u_frame, computational, traces)

    def _population_traces(self, times, snapshots, computational, spectator_level) -> pd.DataFrame:
        labels = gate_labels(self.system.n_qubits, '11-21', (spectator_level,))
        p21 = self.index(labels['target'][1])
        rows = []
        for t, u in zip(times, snapshots):
            for initial, source in zip(('00', '01', '10', '11'), computational):
                column = np.abs(u[:, source]) ** 2
                populations = [column[k] for k in computational] + [column[p21]]
                rows.append([t, initial] + populations + [max(1.0 - sum(populations), 0.0)])
        return pd.DataFrame(rows, columns=['t_ns', 'initial'] + list(TRACE_COLUMNS))


@dataclass
class TimeDependentHamiltonian:
    """H(t) = H_static(flux(t)) + A(t) sum_i cos(2 pi omega_d t + phi_i) n_i."""
    model: GateModel
    schedule: PulseSchedule

    def __post_init__(self):
        flux = self.schedule.flux
        self._static = flux.amplitude != 0.0
        self._low = min(flux.idle_bias, flux.idle_bias + flux.amplitude)
        self._high = max(flux.idle_bias, flux.idle_bias + flux.amplitude)
        self._idle = np.diag(self.model.energies).astype(complex)
        self._ops = np.array(self.model.drive_ops)
        spectrum = self.model.energies
        self.max_frequency = float(max(spectrum.max() - spectrum.min(), self.schedule.drive.frequency, 1e-3))
        if self._static:
            self.model.static_spline(self._low, self._high)

    def batch(self, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        if self._static:
            h = self.model.static_interpolated(flux_pulse_value(self.schedule, times), self._low, self._high)
        else:
            h = np.broadcast_to(self._idle, (len(times),) + self._idle.shape).copy()
        drive = self.schedule.drive
        envelope = drive_envelope(self.schedule, times)
        if drive.peak:
            carrier = 2.0 * math.pi * drive.frequency * times
            c1 = envelope * np.cos(carrier + drive.phase_1)
            c2 = envelope * np.cos(carrier + drive.phase_2)
            h = h + c1[:, None, None] * self._ops[0] + c2[:, None, None] * self._ops[1]
        return h

    def __call__(self, t: float) -> np.ndarray:
        return self.batch(np.array([t]))[0]


def build_time_dependent_hamiltonian(model: GateModel, schedule: PulseSchedule) -> TimeDependentHamiltonian:
    return TimeDependentHamiltonian(model=model, schedule=schedule)


HamiltonianBatch = Callable[[np.ndarray], np.ndarray]


def _batch_fn(hamiltonian) -> HamiltonianBatch:
    if hasattr(hamiltonian, 'batch'):
        return hamiltonian.batch
    return lambda times: np.array([hamiltonian(t) for t in times])


def _step_exponentials(h: np.ndarray, dt: float) -> np.ndarray:
    energies, vectors = np.linalg.eigh(h)
    phases = np.exp(-2j * math.pi * energies * dt)
    return (vectors * phases[:, None, :]) @ np.swapaxes(vectors, -1, -2).conj()


def _ordered_product(steps: np.ndarray) -> np.ndarray:
    """steps[-1] @ ... @ steps[0] by pairwise reduction."""
    while len(steps) > 1:
        if len(steps) % 2:
            steps = np.concatenate([steps, np.eye(steps.shape[-1], dtype=complex)[None]])
        steps = steps[1::2] @ steps[0::2]
    return steps[0]


def _step_grid(t_span: Tuple[float, float], dt: Optional[float],
               max_frequency: Optional[float]) -> Tuple[np.ndarray, float]:
    t0, t1 = (float(v) for v in t_span)
    if t1 < t0:
        raise ParameterDomainError(f"propagation window ({t0}, {t1}) runs backwards")
    limit = math.inf if not max_frequency else 1.0 / (STEPS_PER_PERIOD * max_frequency)
    step = min(dt, limit) if dt is not None else limit
    if not math.isfinite(step):
        step = (t1 - t0) or 1.0
    n_steps = max(1, int(math.ceil((t1 - t0) / step - 1e-12)))
    dt = (t1 - t0) / n_steps
    midpoints = t0 + dt * (np.arange(n_steps) + 0.5)
    return midpoints, dt


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def _check_unitary(u: np.ndarray) -> None:
    defect = unitarity_defect(u)
    if defect > UNITARITY_TOL:
        raise StepSizeError("propagator lost unitarity", residual=defect)


def _segment_product(batch: HamiltonianBatch, midpoints: np.ndarray, step: float) -> np.ndarray:
    u = None
    for start in range(0, len(midpoints), _CHUNK):
        chunk = _ordered_product(_step_exponentials(batch(midpoints[start:start + _CHUNK]), step))
        u = chunk if u is None else chunk @ u
    return u


def propagate(hamiltonian, t_span: Tuple[float, float], dt: Optional[float] = None,
              max_frequency: Optional[float] = None) -> np.ndarray:
    """Time-ordered product of exp(-i 2 pi H(t_mid) dt) over ``t_span`` (ns, GHz).

    The step is the smaller of ``dt`` and 1/(40 * max_frequency).
    """
    midpoints, step = _step_grid(t_span, dt, max_frequency)
    u = _segment_product(_batch_fn(hamiltonian), midpoints, step)
    _check_unitary(u)
    return u


def propagate_with_trace(hamiltonian, t_span: Tuple[float, float], record_every: float,
                         dt: Optional[float] = None, max_frequency: Optional[float] = None):
    """Like ``propagate`` but also returns snapshots of U roughly every ``record_every`` ns."""
    if record_every <= 0.0:
        raise ParameterDomainError("trace interval must be positive")
    batch = _batch_fn(hamiltonian)
    midpoints, step = _step_grid(t_span, dt, max_frequency)
    stride = max(1, int(round(record_every / step)))
    u = None
    times = [float(t_span[0])]
    snapshots = []
    for start in range(0, len(midpoints), stride):
        segment = _segment_product(batch, midpoints[start:start + stride], step)
        if u is None:
            snapshots.append(np.eye(segment.shape[0], dtype=complex))
            u = segment
        else:
            u = segment @ u
        times.append(float(midpoints[min(start + stride, len(midpoints)) - 1] + 0.5 * step))
        snapshots.append(u.copy())
    _check_unitary(u)
    return u, times, snapshots


def step_convergence(hamiltonian, t_span: Tuple[float, float], dt: float) -> float:
    """Richardson-style check: ||U(dt) - U(dt/2)||."""
    return float(np.linalg.norm(propagate(hamiltonian, t_span, dt) - propagate(hamiltonian, t_span, 0.5 * dt)))
