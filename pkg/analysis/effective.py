"""
Closed-form effective couplings between fluxonium transitions mediated by a
double-transmon (DTC) or single-transmon (STC) coupler.

All frequencies in GHz. A detuning is ``omega_kl_i - omega_c``.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from core.circuits import (
    DtcSpec, StcSpec, CouplerSpec, capacitive_coupling_strength, coupler_modes,
    fluxonium_mode, inductive_coupling_strength,
)
from core.device import DeviceSpec, Truncation, diagonalize, assemble
from core.errors import ParameterDomainError
from utils.logger import setup_logger

logger = setup_logger('effective')

DISPERSIVE_RATIO = 0.1
SQRT2 = math.sqrt(2.0)


@dataclass
class BareCouplings:
    g1: float
    g2: float
    g12: float


@dataclass
class TransitionFrequencies:
    omega_1: float
    omega_2: float
    omega_c: float

    @property
    def detunings(self) -> Tuple[float, float]:
        return self.omega_1 - self.omega_c, self.omega_2 - self.omega_c


@dataclass
class EffectiveCoupling:
    g_eff: float
    direct: float
    mediated: float
    regime_flags: Dict[str, bool] = field(default_factory=dict)

    @property
    def dispersive_ok(self) -> bool:
        return self.regime_flags.get('dispersive_ok', False)


def transition_levels(transition) -> Tuple[int, int]:
    if isinstance(transition, str):
        digits = transition.replace('-', '')
        if len(digits) != 2:
            raise ParameterDomainError(f"transition '{transition}' must name two levels, e.g. '12'")
        return int(digits[0]), int(digits[1])
    k, l = transition
    return int(k), int(l)


def _require_detuning(*detunings: float) -> None:
    for delta in detunings:
        if delta == 0.0 or not math.isfinite(delta):
            raise ParameterDomainError("zero detuning: effective coupling is singular")


def fluxonium_transition(device: DeviceSpec, index: int, k: int, l: int) -> Tuple[float, float]:
    """(|<k|n|l>|, E_l - E_k) of one fluxonium by itself."""
    ops = fluxonium_mode(device.fluxoniums[index], device.fluxonium_basis)
    energies, vectors = ops.eigensystem(max(k, l) + 1)
    element = abs(vectors[:, k].conj() @ ops.n_op @ vectors[:, l])
    return float(element), float(energies[l] - energies[k])


def _coupler_single_modes(device: DeviceSpec):
    if device.coupler is None:
        raise ParameterDomainError("device has no coupler")
    modes, _ = coupler_modes(device.coupler, device.charge_basis, device.transmon_mode)
    result = []
    for ops in modes:
        energies, vectors = ops.eigensystem(2)
        element = abs(vectors[:, 1].conj() @ ops.n_op @ vectors[:, 0])
        result.append((float(element), float(energies[1] - energies[0])))
    return result


def _qubit_coupler_mode(device: DeviceSpec, qubit: str) -> int:
    """Index of the coupler mode that ``qubit`` couples to most strongly."""
    names = device.coupler_mode_map[device.coupler_name]
    strengths = [abs(device.coupling_strength(qubit, name)) for name in names]
    return int(np.argmax(strengths))


def bare_couplings(device: DeviceSpec, transition='12') -> BareCouplings:
    """g_kl,i = J_ci <k|n_i|l><1|n_ci|0> and the direct g_kl,12 = J_12 |<k|n_1|l>||<k|n_2|l>|."""
    k, l = transition_levels(transition)
    coupler = _coupler_single_modes(device)
    names = device.coupler_mode_map[device.coupler_name]
    values = []
    for index, qubit in enumerate(device.qubit_modes[:2]):
        element, _ = fluxonium_transition(device, index, k, l)
        mode = _qubit_coupler_mode(device, qubit)
        values.append(device.coupling_strength(qubit, names[mode]) * element * coupler[mode][0])
    n_1, _ = fluxonium_transition(device, 0, k, l)
    n_2, _ = fluxonium_transition(device, 1, k, l)
    g12 = device.coupling_strength('q1', 'q2') * n_1 * n_2
    return BareCouplings(g1=values[0], g2=values[1], g12=g12)


def transition_frequencies(device: DeviceSpec, transition='12') -> TransitionFrequencies:
    k, l = transition_levels(transition)
    _, omega_1 = fluxonium_transition(device, 0, k, l)
    _, omega_2 = fluxonium_transition(device, 1, k, l)
    coupler = _coupler_single_modes(device)
    return TransitionFrequencies(omega_1=omega_1, omega_2=omega_2, omega_c=coupler[0][1])


def coupler_g_c(spec: DtcSpec) -> float:
    """Intermode exchange g_c = g_cap - g_ind of a DTC (harmonic coupler modes)."""
    return capacitive_coupling_strength(spec) - inductive_coupling_strength(spec)


# --- closed forms ---

def g_eff_dtc_rwa(g1: float, g2: float, g_c: float, delta_1: float, delta_2: float) -> float:
    _require_detuning(delta_1, delta_2)
    return g1 * g2 * g_c / 2.0 * (1.0 / delta_1 ** 2 + 1.0 / delta_2 ** 2)


def g_eff_dtc_full(g1: float, g2: float, g_c: float, delta_1: float, delta_2: float,
                   omega_c: float) -> float:
    """First order in g_c/omega_c, counter-rotating coupler terms kept."""
    _require_detuning(delta_1, delta_2)
    if omega_c <= 0.0:
        raise ParameterDomainError(f"coupler frequency must be positive, got {omega_c}")
    return g1 * g2 * g_c / 2.0 * sum((1.0 + d / omega_c) / d ** 2 for d in (delta_1, delta_2))


def g_c_frequency_dependent(g_cap: float, g_ind: float, delta: float, omega_c: float) -> float:
    return (g_cap - g_ind) - (delta / omega_c) * (g_cap + g_ind)


def g_eff_dtc_capacitive(g1: float, g2: float, g_cap: float, g_ind: float,
                         delta_1: float, delta_2: float, omega_c: float) -> float:
    """Both intermode couplings kept: the nulling point depends on each detuning."""
    _require_detuning(delta_1, delta_2)
    if omega_c <= 0.0:
        raise ParameterDomainError(f"coupler frequency must be positive, got {omega_c}")
    return g1 * g2 / 2.0 * sum(g_c_frequency_dependent(g_cap, g_ind, d, omega_c) / d ** 2
                               for d in (delta_1, delta_2))


def dtc_eigenmodes(omega_c: float, g_c: float, rwa: bool = True) -> Tuple[float, float]:
    """(omega_plus, omega_minus) of the two coupled degenerate coupler modes."""
    if rwa:
        return omega_c + g_c, omega_c - g_c
    plus, minus = omega_c ** 2 + 2.0 * g_c * omega_c, omega_c ** 2 - 2.0 * g_c * omega_c
    if plus < 0.0 or minus < 0.0:
        raise ParameterDomainError(f"|g_c| = {abs(g_c)} too large for coupler frequency {omega_c}")
    return math.sqrt(plus), math.sqrt(minus)


def g_eff_dtc_bogoliubov(g1: float, g2: float, g_c: float, omega_1: float, omega_2: float,
                         omega_c: float) -> float:
    """Mediated coupling through the Bogoliubov eigenmodes before the final expansion in g_c/omega_c."""
    omega_plus, omega_minus = dtc_eigenmodes(omega_c, g_c, rwa=False)
    _require_detuning(omega_1 - omega_plus, omega_2 - omega_plus, omega_1 - omega_minus, omega_2 - omega_minus)
    eps = g_c / (2.0 * SQRT2 * omega_c)
    plus = sum(1.0 / (w - omega_plus) for w in (omega_1, omega_2))
    minus = sum(1.0 / (w - omega_minus) for w in (omega_1, omega_2))
    return g1 * g2 / 2.0 * ((1.0 / SQRT2 + eps) ** 2 * plus - (1.0 / SQRT2 - eps) ** 2 * minus)


def g_eff_stc(g12_direct: float, g1: float, g2: float, delta_1: float, delta_2: float) -> float:
    _require_detuning(delta_1, delta_2)
    return g12_direct + g1 * g2 / 2.0 * (1.0 / delta_1 + 1.0 / delta_2)


def bogoliubov_matrix(omega_c: float, g_c: float) -> np.ndarray:
    """First-order map (a_c1, a_c1^+, a_c2, a_c2^+) = M (a_-, a_-^+, a_+, a_+^+)."""
    if omega_c <= 0.0:
        raise ParameterDomainError(f"coupler frequency must be positive, got {omega_c}")
    s = 1.0 / SQRT2
    e = g_c / (2.0 * SQRT2 * omega_c)
    return np.array([
        [s, e, s, -e],
        [e, s, -e, s],
        [-s, -e, s, -e],
        [-e, -s, -e, s],
    ])


def symplectic_defect(matrix: np.ndarray) -> float:
    """||M K M^T - K|| for the bosonic commutator form K = diag(J, J), J = [[0, 1], [-1, 0]]."""
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    form = np.kron(np.eye(2), block)
    return float(np.linalg.norm(matrix @ form @ matrix.T - form))


def nnn_strengths(j_c1: float, j_c2: float, j_cap: float, omega_c: float) -> Tuple[float, float, float]:
    """Stray couplings induced by the intermode capacitance: (J_NNN,1, J_NNN,2, J_NNNN)."""
    if omega_c <= 0.0:
        raise ParameterDomainError(f"coupler frequency must be positive, got {omega_c}")
    return (2.0 * j_c1 * j_cap / omega_c,
            2.0 * j_c2 * j_cap / omega_c,
            4.0 * j_c1 * j_cap * j_c2 / omega_c ** 2)


def off_resonant_leakage(omega: float, delta: float) -> Tuple[float, float]:
    """(period, amplitude) of Rabi oscillation into a transition detuned by ``delta``."""
    rate = math.hypot(delta, omega)
    if rate == 0.0:
        raise ParameterDomainError("drive and detuning are both zero")
    return 1.0 / rate, omega ** 2 / rate ** 2


def coupler_eigenmodes(spec: CouplerSpec, n_basis: int = 41, levels: int = 5) -> Tuple[float, float]:
    """Two lowest excitation frequencies of the coupler circuit by itself.

    For a DTC these are the minus and plus intermode modes; a single
    transmon reports its 0-1 frequency twice.
    """
    device = DeviceSpec(fluxoniums=(), couplers={'c': spec}, charge_basis=n_basis,
                        truncation=Truncation(coupler_levels=levels))
    energies = diagonalize(assemble(device)).energies
    if isinstance(spec, StcSpec):
        return float(energies[1] - energies[0]), float(energies[1] - energies[0])
    return float(energies[1] - energies[0]), float(energies[2] - energies[0])


def effective_coupling(device: DeviceSpec, transition='12', formula: str = 'full') -> EffectiveCoupling:
    """Formula value of the mediated flip-flop coupling for one device.

    ``formula`` is one of 'rwa', 'full', 'capacitive', 'bogoliubov' (DTC) or
    'stc' (single-transmon coupler).
    """
    bare = bare_couplings(device, transition)
    freqs = transition_frequencies(device, transition)
    delta_1, delta_2 = freqs.detunings
    spec = device.coupler
    if isinstance(spec, StcSpec) or formula == 'stc':
        if not isinstance(spec, StcSpec):
            raise ParameterDomainError("formula 'stc' needs a single-transmon coupler")
        total = g_eff_stc(bare.g12, bare.g1, bare.g2, delta_1, delta_2)
        direct = bare.g12
    else:
        g_cap, g_ind = capacitive_coupling_strength(spec), inductive_coupling_strength(spec)
        g_c = g_cap - g_ind
        if formula == 'rwa':
            total = g_eff_dtc_rwa(bare.g1, bare.g2, g_c, delta_1, delta_2)
        elif formula == 'full':
            total = g_eff_dtc_full(bare.g1, bare.g2, g_c, delta_1, delta_2, freqs.omega_c)
        elif formula == 'capacitive':
            total = g_eff_dtc_capacitive(bare.g1, bare.g2, g_cap, g_ind, delta_1, delta_2, freqs.omega_c)
        elif formula == 'bogoliubov':
            total = g_eff_dtc_bogoliubov(bare.g1, bare.g2, g_c, freqs.omega_1, freqs.omega_2, freqs.omega_c)
        else:
            raise ParameterDomainError(f"unknown formula '{formula}'")
        total += bare.g12
        direct = bare.g12
    ratio = max(abs(bare.g1 / delta_1), abs(bare.g2 / delta_2))
    return EffectiveCoupling(g_eff=total, direct=direct, mediated=total - direct,
                             regime_flags={'dispersive_ok': ratio < DISPERSIVE_RATIO})
