"""
Scalar diagnostics of labeled spectra and the registry that maps stable
CSV column names to them.
"""
import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from core.device import DeviceSpec, EigenSolution, solve
from core.errors import CircuitError, LabelError, ParameterDomainError
from utils.helpers import get_path, set_path
from utils.logger import setup_logger

logger = setup_logger('metrics')

FLUX_QUANTUM_PHASE = 2.0 * math.pi
DEFAULT_FLUX_STEP = 1e-4
DEFAULT_FLUX_NOISE = 1e-5
COLLISION_RADIUS = 0.05

GATE_TRANSITIONS = ('11-21', '11-12', '10-20', '01-02')
PARASITIC_TRANSITIONS = ('21-22', '12-22', '00-03', '00-30')
COMPUTATIONAL = ('00', '01', '10', '11')


@dataclass
class ShiftPair:
    delta_q1: float
    delta_q2: float
    max_shift: float
    signed_q1: float = 0.0
    signed_q2: float = 0.0


@dataclass
class DephasingEstimate:
    freq_shift: float
    sensitivity: float
    t_phi_1f: float


@dataclass
class CollisionReport:
    detuning: float
    gate: str
    parasitic: str

    @property
    def collides(self) -> bool:
        return self.detuning <= COLLISION_RADIUS

    @property
    def annotation(self) -> str:
        return f"{self.gate}~{self.parasitic}" if self.collides else ''


# --- label helpers ---

def qubit_label(eig: EigenSolution, levels: Dict[int, int]) -> str:
    """Label string with the given fluxonium levels, other qubits and couplers in ground."""
    digits = [0] * max(eig.n_qubits, 1)
    for qubit, level in levels.items():
        if qubit >= len(digits):
            raise ParameterDomainError(f"qubit index {qubit} out of range for {eig.n_qubits} qubits")
        digits[qubit] = level
    return ''.join(str(d) for d in digits)


def pair_label(eig: EigenSolution, pair: str, qubits: Tuple[int, int] = (0, 1)) -> str:
    return qubit_label(eig, {qubits[0]: int(pair[0]), qubits[1]: int(pair[1])})


def _pair_energies(eig: EigenSolution, pairs: Sequence[str], qubits: Tuple[int, int]) -> Dict[str, float]:
    labels = [pair_label(eig, p, qubits) for p in pairs]
    idx = eig.indices(labels)
    return {p: float(eig.energies[k]) for p, k in zip(pairs, idx)}


def _split_transition(transition: Union[str, Tuple]) -> Tuple:
    if isinstance(transition, str):
        start, _, end = transition.partition('-')
        if not end:
            raise ParameterDomainError(f"transition '{transition}' must look like '11-21'")
        return start, end
    return tuple(transition)


def transition_frequency(eig: EigenSolution, transition: Union[str, Tuple]) -> float:
    start, end = _split_transition(transition)
    return eig.energy(end) - eig.energy(start)


# --- overlap metrics ---

def hybridization(eig: EigenSolution, target_label, bare_label) -> float:
    """|<bare|target-dressed>|^2; ``target_label`` may also be an eigenstate index."""
    column = eig.index(target_label)
    row = eig.bare_row(bare_label)
    return float(abs(eig.vectors[row, column]) ** 2)


def dressing_overlap(eig: EigenSolution, label) -> float:
    return hybridization(eig, label, label)


def plasmon_shift(eig: EigenSolution, qubits: Tuple[int, int] = (0, 1)) -> ShiftPair:
    e = _pair_energies(eig, ('10', '11', '20', '21', '01', '02', '12'), qubits)
    signed_1 = (e['21'] - e['11']) - (e['20'] - e['10'])
    signed_2 = (e['12'] - e['11']) - (e['02'] - e['01'])
    delta_1, delta_2 = abs(signed_1), abs(signed_2)
    return ShiftPair(delta_q1=delta_1, delta_q2=delta_2, max_shift=max(delta_1, delta_2),
                     signed_q1=signed_1, signed_q2=signed_2)


def zz_strength(eig: EigenSolution, qubits: Tuple[int, int] = (0, 1)) -> float:
    e = _pair_energies(eig, COMPUTATIONAL, qubits)
    return (e['11'] - e['01']) - (e['10'] - e['00'])


def transition_dipole(eig: EigenSolution, state_a, state_b, mode: Union[int, str]) -> float:
    if eig.system is None:
        raise LabelError([state_a, state_b], context='no operator table attached')
    op = eig.system.operator(mode, 'n')
    va, vb = eig.vector(state_a), eig.vector(state_b)
    return float(abs(va.conj() @ op @ vb))


def collision_report(eig: EigenSolution, gates: Iterable[str] = GATE_TRANSITIONS,
                     qubits: Tuple[int, int] = (0, 1)) -> Optional[CollisionReport]:
    """Nearest parasitic transition to any of the gate transitions."""

    def frequency(start, end):
        try:
            return eig.energy(end) - eig.energy(start)
        except LabelError:
            return None

    parasitic = {}
    for name in PARASITIC_TRANSITIONS:
        a, b = name.split('-')
        parasitic[name] = frequency(pair_label(eig, a, qubits), pair_label(eig, b, qubits))
    n_modes = len(eig.mode_names)
    for m in range(eig.n_qubits, n_modes):
        for comp in COMPUTATIONAL:
            base = eig.parse_label(pair_label(eig, comp, qubits))
            excited = list(base)
            excited[m] = 1
            parasitic[f"{comp}-{comp},{eig.mode_names[m]}"] = frequency(base, tuple(excited))

    best = None
    for gate in gates:
        a, b = gate.split('-')
        omega = frequency(pair_label(eig, a, qubits), pair_label(eig, b, qubits))
        if omega is None:
            continue
        for name, value in parasitic.items():
            if value is None:
                continue
            detuning = abs(omega - value)
            if best is None or detuning < best.detuning:
                best = CollisionReport(detuning=detuning, gate=gate, parasitic=name)
    return best


# --- flux sensitivity and dephasing ---

def central_difference(function: Callable[[float], float], x0: float, delta: float) -> float:
    return (function(x0 + delta) - function(x0 - delta)) / (2.0 * delta)


def flux_sensitivity(target: Union[DeviceSpec, Callable[[float], float]], transition=None,
                     bias_path: Optional[str] = None, delta: float = DEFAULT_FLUX_STEP,
                     at: float = 0.0) -> float:
    """d(omega)/d(Phi) in GHz per flux quantum by central differences.

    ``target`` is either a device (then ``transition`` and ``bias_path`` name the
    frequency and the phase bias, perturbed by 2*pi*delta) or a callable
    frequency(Phi) evaluated around ``at``.
    """
    if delta <= 0.0:
        raise ParameterDomainError(f"finite-difference step must be positive, got {delta}")
    if callable(target) and not isinstance(target, DeviceSpec):
        return central_difference(target, at, delta)
    if transition is None or bias_path is None:
        raise ParameterDomainError("device sensitivity needs a transition and a bias path")
    base_phase = float(get_path(target, bias_path))

    def frequency(flux: float) -> float:
        device = set_path(target, bias_path, base_phase + FLUX_QUANTUM_PHASE * flux)
        return transition_frequency(solve(device), transition)

    return central_difference(frequency, 0.0, delta)


def dephasing_time_1f(sensitivity: float, a_phi: float = DEFAULT_FLUX_NOISE) -> float:
    """1/f flux-noise dephasing time in seconds; math.inf for a flux-insensitive transition.

    The sensitivity (GHz per flux quantum) is converted to angular frequency.
    """
    if not a_phi > 0.0:
        raise ParameterDomainError(f"flux noise amplitude must be positive, got {a_phi}")
    if sensitivity == 0.0:
        return math.inf
    angular = 2.0 * math.pi * 1e9 * abs(sensitivity)
    return 1.0 / (math.sqrt(a_phi ** 2 * math.log(2.0)) * angular)


def dephasing_estimate(device: DeviceSpec, transition, bias_path: str,
                       a_phi: float = DEFAULT_FLUX_NOISE, reference: Optional[DeviceSpec] = None,
                       delta: float = DEFAULT_FLUX_STEP) -> DephasingEstimate:
    omega = transition_frequency(solve(device), transition)
    shift = 0.0
    if reference is not None:
        shift = omega - transition_frequency(solve(reference), transition)
    sensitivity = flux_sensitivity(device, transition, bias_path, delta)
    return DephasingEstimate(freq_shift=shift, sensitivity=sensitivity,
                             t_phi_1f=dephasing_time_1f(sensitivity, a_phi))


# --- spectator ---

def spectator_shift(target: Union[DeviceSpec, EigenSolution], transition: str = '11-21',
                    spectator: int = 2, qubits: Tuple[int, int] = (0, 1)) -> float:
    eig = solve(target) if isinstance(target, DeviceSpec) else target
    if eig.n_qubits < 3:
        raise ParameterDomainError("spectator shift needs a device with three fluxoniums")
    start, end = _split_transition(transition)

    def label(pair: str, level: int) -> str:
        return qubit_label(eig, {qubits[0]: int(pair[0]), qubits[1]: int(pair[1]), spectator: level})

    labels = [label(start, 0), label(end, 0), label(start, 1), label(end, 1)]
    e = [float(eig.energies[k]) for k in eig.indices(labels)]
    return abs((e[1] - e[0]) - (e[3] - e[2]))


def residual_vs_qubit_flux(device: DeviceSpec, qubit: int, fluxes: Sequence[float],
                           threads: int = 1, metrics: Optional[List[str]] = None):
    """Residual plasmon shifts while one fluxonium is detuned from its sweet spot."""
    from core.sweep import sweep

    names = metrics or ['max_shift_ghz', 'shift_q1_ghz', 'shift_q2_ghz', 'zz_ghz', 'collision_detuning_ghz']
    if 'collision_detuning_ghz' not in names:
        names = list(names) + ['collision_detuning_ghz']
    return sweep(device, f"fluxoniums.{qubit}.phi_ext", fluxes, names, threads=threads, annotate=True)


# --- nulling ---

DEFAULT_NULLING_POINTS = 101


def refine_minimum(function: Callable[[float], float], grid: np.ndarray, values: np.ndarray) -> Tuple[float, float]:
    """Golden-section search bracketed by the neighbours of the coarse grid minimum."""
    finite = np.where(np.isfinite(values), values, np.inf)
    k = int(np.argmin(finite))
    if not np.isfinite(finite[k]):
        raise ParameterDomainError("metric is undefined at every grid point")
    if 0 < k < len(grid) - 1 and finite[k - 1] > finite[k] < finite[k + 1]:
        bracket = (grid[k - 1], grid[k], grid[k + 1])
        result = optimize.minimize_scalar(function, bracket=bracket, method='golden', options={'xtol': 1e-8})
        low, high = sorted((grid[k - 1], grid[k + 1]))
        if getattr(result, 'success', True) and low <= result.x <= high and result.fun <= finite[k]:
            return float(result.x), float(result.fun)
        logger.debug("golden-section step left the bracket; keeping the grid minimum")
    else:
        logger.warning(f"metric minimum at the edge of the sweep ({grid[k]:.6g}); no refinement")
    return float(grid[k]), float(finite[k])


def find_nulling_point(device: DeviceSpec, axis: str, grid: Optional[Sequence[float]] = None,
                       metric: str = 'max_shift_ghz', threads: int = 1) -> Tuple[float, float]:
    """Bias along ``axis`` minimizing ``metric``; the grid defaults to one flux period."""
    from core.sweep import sweep

    if grid is None:
        grid = np.linspace(0.0, FLUX_QUANTUM_PHASE, DEFAULT_NULLING_POINTS)
    coarse = sweep(device, axis, grid, [metric], threads=threads)

    def evaluate(bias: float) -> float:
        biased = set_path(device, axis, float(bias))
        value = evaluate_metrics([metric], solve(biased), biased)[metric]
        return value if math.isfinite(value) else math.inf

    return refine_minimum(evaluate, coarse.axis_values, coarse.column(metric))


# --- metric registry ---

MetricFn = Callable[[EigenSolution, DeviceSpec], float]


def _omega(levels: Tuple[int, int], qubit: int) -> MetricFn:
    def metric(eig, device):
        low, high = levels
        return eig.energy(qubit_label(eig, {qubit: high})) - eig.energy(qubit_label(eig, {qubit: low}))
    return metric


def _coupler_mode(which: int) -> MetricFn:
    def metric(eig, device):
        from analysis.effective import coupler_eigenmodes
        if device.coupler is None:
            raise ParameterDomainError("device has no coupler")
        return coupler_eigenmodes(device.coupler, device.charge_basis)[which]
    return metric


def _collision(eig, device):
    report = collision_report(eig)
    return math.nan if report is None else report.detuning


def _max_hyb(eig, device):
    return max(hybridization(eig, pair_label(eig, '21'), pair_label(eig, '12')),
               hybridization(eig, pair_label(eig, '12'), pair_label(eig, '21')))


_STATIC: Dict[str, MetricFn] = {
    'zz_ghz': lambda eig, dev: zz_strength(eig),
    'max_shift_ghz': lambda eig, dev: plasmon_shift(eig).max_shift,
    'shift_q1_ghz': lambda eig, dev: plasmon_shift(eig).delta_q1,
    'shift_q2_ghz': lambda eig, dev: plasmon_shift(eig).delta_q2,
    'shift_q1_signed_ghz': lambda eig, dev: plasmon_shift(eig).signed_q1,
    'shift_q2_signed_ghz': lambda eig, dev: plasmon_shift(eig).signed_q2,
    'hyb_max': _max_hyb,
    'omega01_q1_ghz': _omega((0, 1), 0),
    'omega01_q2_ghz': _omega((0, 1), 1),
    'omega12_q1_ghz': _omega((1, 2), 0),
    'omega12_q2_ghz': _omega((1, 2), 1),
    'min_overlap': lambda eig, dev: float(np.min(eig.overlap_quality)) if len(eig.overlap_quality) else math.nan,
    'n_unlabeled': lambda eig, dev: float(sum(label is None for label in eig.labels)),
    'collision_detuning_ghz': _collision,
    'coupler_minus_ghz': _coupler_mode(0),
    'coupler_plus_ghz': _coupler_mode(1),
    'spectator_shift_ghz': lambda eig, dev: spectator_shift(eig),
}

# hyb_<bare>_<dressed>: |<bare|dressed>|^2, e.g. hyb_12_21 = |<12|21 dressed>|^2
_PATTERNS: List[Tuple[re.Pattern, Callable[[re.Match], MetricFn]]] = [
    (re.compile(r'^hyb_(\d+)_(\d+)$'), lambda m: lambda eig, dev: hybridization(eig, m[2], m[1])),
    (re.compile(r'^dress_(\d+)$'), lambda m: lambda eig, dev: dressing_overlap(eig, m[1])),
    (re.compile(r'^energy_(\d+)_ghz$'), lambda m: lambda eig, dev: eig.energy(m[1]) - float(eig.energies[0])),
    (re.compile(r'^freq_(\d+)_(\d+)_ghz$'), lambda m: lambda eig, dev: eig.energy(m[2]) - eig.energy(m[1])),
    (re.compile(r'^dipole_(\d+)_(\d+)_q(\d+)$'),
     lambda m: lambda eig, dev: transition_dipole(eig, m[1], m[2], f"q{m[3]}")),
]


def metric_names() -> List[str]:
    return sorted(_STATIC) + ['hyb_<bare>_<dressed>', 'dress_<label>', 'energy_<label>_ghz',
                              'freq_<from>_<to>_ghz', 'dipole_<from>_<to>_q<k>']


def resolve_metric(name: str) -> MetricFn:
    if name in _STATIC:
        return _STATIC[name]
    for pattern, factory in _PATTERNS:
        match = pattern.match(name)
        if match:
            return factory(match)
    raise ParameterDomainError(f"unknown metric '{name}'")


def evaluate_metrics(names: Iterable[str], eig: EigenSolution, device: DeviceSpec,
                     strict: bool = False) -> Dict[str, float]:
    """Evaluate registry metrics; a label failure yields NaN unless ``strict``."""
    values = {}
    for name in names:
        try:
            values[name] = float(resolve_metric(name)(eig, device))
        except LabelError as exc:
            if strict:
                raise
            logger.debug(f"metric {name}: {exc}")
            values[name] = math.nan
    return values
