"""
Single-mode circuit operators: fluxonium, transmon, and the two coupler types.

All energies are linear frequencies in GHz (E/h). Phases are in radians.
"""
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy import linalg, optimize

from core.errors import NumericalError, ParameterDomainError
from utils.helpers import hermiticity_defect
from utils.logger import setup_logger

logger = setup_logger('circuits')

TRANSMON_REGIME_RATIO = 20.0
DEFAULT_FLUXONIUM_BASIS = 60
DEFAULT_CHARGE_BASIS = 41
TRANSMON_MODES = ('exact_charge', 'harmonic')


def _require_positive(name: str, value: float) -> None:
    if not (value > 0.0 and math.isfinite(value)):
        raise ParameterDomainError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class FluxoniumSpec:
    e_c: float
    e_l: float
    e_j: float
    phi_ext: float = math.pi

    def __post_init__(self):
        _require_positive('e_c', self.e_c)
        _require_positive('e_l', self.e_l)
        # e_j = 0 is the bare LC limit
        if not (self.e_j >= 0.0 and math.isfinite(self.e_j)):
            raise ParameterDomainError(f"e_j must be non-negative and finite, got {self.e_j}")
        if not math.isfinite(self.phi_ext):
            raise ParameterDomainError("phi_ext must be finite")


@dataclass(frozen=True)
class TransmonSpec:
    e_c: float
    e_j: float

    def __post_init__(self):
        _require_positive('e_c', self.e_c)
        _require_positive('e_j', self.e_j)
        if self.e_j / self.e_c < TRANSMON_REGIME_RATIO:
            logger.warning(
                f"TransmonSpec e_j/e_c={self.e_j / self.e_c:.2f} is below {TRANSMON_REGIME_RATIO:.0f}; "
                f"the mode leaves the transmon regime"
            )


@dataclass(frozen=True)
class DtcSpec:
    """Double-transmon coupler: two transmon modes joined through a SQUID.

    ``flux_line`` names the loop a coupler bias acts on: ``'squid'`` for the
    SQUID-biased setup, ``'main'`` for the main-loop-biased setup.
    """
    transmon_a: TransmonSpec
    transmon_b: TransmonSpec
    e_j_squid_sum: float
    asymmetry: float = 0.0
    phi_ext_squid: float = 0.0
    phi_ext_main: float = 0.0
    j_cap_intermode: float = 0.0
    crosstalk_compensated: bool = True
    flux_line: str = 'squid'

    def __post_init__(self):
        if not (self.e_j_squid_sum >= 0.0 and math.isfinite(self.e_j_squid_sum)):
            raise ParameterDomainError(f"e_j_squid_sum must be >= 0, got {self.e_j_squid_sum}")
        if not (0.0 <= self.asymmetry < 1.0):
            raise ParameterDomainError(f"asymmetry must lie in [0, 1), got {self.asymmetry}")
        if not math.isfinite(self.j_cap_intermode):
            raise ParameterDomainError("j_cap_intermode must be finite")
        if self.flux_line not in ('squid', 'main'):
            raise ParameterDomainError(f"flux_line must be 'squid' or 'main', got '{self.flux_line}'")

    @property
    def bias_field(self) -> str:
        return 'phi_ext_squid' if self.flux_line == 'squid' else 'phi_ext_main'


@dataclass(frozen=True)
class StcSpec:
    transmon: TransmonSpec
    phi_ext: float = 0.0

    @property
    def bias_field(self) -> str:
        return 'phi_ext'


CouplerSpec = Union[DtcSpec, StcSpec]


@dataclass
class ModeOperators:
    dim: int
    h: np.ndarray
    n_op: np.ndarray
    phi_op: np.ndarray
    basis_kind: str
    phi2_op: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ('h', 'n_op', 'phi_op'):
            matrix = getattr(self, name)
            if matrix.shape != (self.dim, self.dim):
                raise ParameterDomainError(f"{name} has shape {matrix.shape}, expected {(self.dim, self.dim)}")
        if self.phi2_op is None:
            self.phi2_op = self.phi_op @ self.phi_op

    def check_hermitian(self, tol: float = 1e-12) -> None:
        for name in ('h', 'n_op', 'phi_op'):
            defect = hermiticity_defect(getattr(self, name))
            if defect > tol:
                raise NumericalError(f"{name} is not Hermitian", residual=defect)

    def eigensystem(self, levels: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Lowest ``levels`` eigenpairs with a fixed phase gauge.

        Each eigenvector is rotated so its largest-magnitude component is real
        and positive, which keeps vectors continuous along smooth sweeps.
        """
        energies, vectors = linalg.eigh(self.h)
        if levels is not None:
            if levels > self.dim:
                raise ParameterDomainError(f"requested {levels} levels from a basis of {self.dim}")
            energies, vectors = energies[:levels], vectors[:, :levels]
        vectors = np.array(vectors, dtype=complex)
        for k in range(vectors.shape[1]):
            pivot = np.argmax(np.abs(vectors[:, k]) > np.abs(vectors[:, k]).max() * (1.0 - 1e-9))
            phase = vectors[pivot, k] / abs(vectors[pivot, k])
            vectors[:, k] /= phase
        return energies, vectors


def zpf(e_c: float, e_j: float) -> Tuple[float, float]:
    """Harmonic zero-point fluctuations (phase, charge) of a transmon-like mode."""
    _require_positive('e_c', e_c)
    _require_positive('e_j', e_j)
    phi_zpf = (8.0 * e_c / e_j) ** 0.25 / math.sqrt(2.0)
    n_zpf = 1.0 / (2.0 * phi_zpf)
    return phi_zpf, n_zpf


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def _matrix_cos(matrix: np.ndarray, shift: float = 0.0) -> np.ndarray:
    """cos(matrix + shift) for a Hermitian matrix via its eigendecomposition."""
    values, vectors = linalg.eigh(matrix)
    return (vectors * np.cos(values + shift)) @ vectors.conj().T


def fluxonium_mode(spec: FluxoniumSpec, n_basis: int = DEFAULT_FLUXONIUM_BASIS) -> ModeOperators:
    """Fluxonium in the oscillator basis of its LC part.

    The oscillator coordinate is the displaced phase phi - phi_ext, so the LC
    part is exactly diagonal; the returned phi_op is the physical phase.
    """
    if n_basis < 10:
        raise ParameterDomainError(f"fluxonium basis must have at least 10 states, got {n_basis}")
    omega = math.sqrt(8.0 * spec.e_c * spec.e_l)
    phi_osc = (8.0 * spec.e_c / spec.e_l) ** 0.25
    a = _ladder(n_basis)
    x = phi_osc * (a + a.T) / math.sqrt(2.0)
    n_op = 1j * (a.T - a) / (math.sqrt(2.0) * phi_osc)

    h = np.diag(omega * (np.arange(n_basis) + 0.5)).astype(complex)
    if spec.e_j > 0.0:
        h = h - spec.e_j * _matrix_cos(x, spec.phi_ext)
    h = 0.5 * (h + h.conj().T)
    phi_op = x + spec.phi_ext * np.eye(n_basis)
    return ModeOperators(dim=n_basis, h=h, n_op=n_op, phi_op=phi_op.astype(complex),
                         basis_kind='oscillator', phi2_op=(phi_op @ phi_op).astype(complex))


def _charge_operators(n_basis: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if n_basis < 21 or n_basis % 2 == 0:
        raise ParameterDomainError(f"charge basis needs an odd number of states >= 21, got {n_basis}")
    cutoff = n_basis // 2
    charges = np.arange(-cutoff, cutoff + 1, dtype=float)
    n_op = np.diag(charges).astype(complex)
    shift = np.diag(np.ones(n_basis - 1), 1)
    cos_phi = 0.5 * (shift + shift.T)
    # Fourier elements of the 2pi-periodic sawtooth phase and its square
    k = charges[:, None] - charges[None, :]
    sign = np.where(np.mod(k, 2) == 0, 1.0, -1.0)
    with np.errstate(divide='ignore', invalid='ignore'):
        phi_op = np.where(k != 0, 1j * sign / k, 0.0)
        phi2_op = np.where(k != 0, 2.0 * sign / k ** 2, math.pi ** 2 / 3.0)
    return n_op, cos_phi.astype(complex), phi_op.astype(complex), phi2_op.astype(complex)


def _charge_basis_mode(e_c: float, e_j: float, n_basis: int) -> ModeOperators:
    n_op, cos_phi, phi_op, phi2_op = _charge_operators(n_basis)
    h = 4.0 * e_c * (n_op @ n_op) - e_j * cos_phi
    return ModeOperators(dim=n_basis, h=h, n_op=n_op, phi_op=phi_op, basis_kind='charge', phi2_op=phi2_op)


def _harmonic_mode(e_c: float, e_j: float, n_basis: int) -> ModeOperators:
    if n_basis < 5:
        raise ParameterDomainError(f"harmonic basis must have at least 5 states, got {n_basis}")
    phi_zpf, n_zpf = zpf(e_c, e_j)
    omega = math.sqrt(8.0 * e_c * e_j)
    a = _ladder(n_basis)
    h = np.diag(omega * np.arange(n_basis)).astype(complex)
    phi_op = (phi_zpf * (a + a.T)).astype(complex)
    n_op = 1j * n_zpf * (a.T - a)
    return ModeOperators(dim=n_basis, h=h, n_op=n_op, phi_op=phi_op, basis_kind='oscillator')


def transmon_mode(spec: TransmonSpec, n_basis: int = DEFAULT_CHARGE_BASIS,
                  mode: str = 'exact_charge') -> ModeOperators:
    if mode == 'exact_charge':
        return _charge_basis_mode(spec.e_c, spec.e_j, n_basis)
    if mode == 'harmonic':
        return _harmonic_mode(spec.e_c, spec.e_j, n_basis)
    raise ParameterDomainError(f"unknown transmon mode '{mode}', expected one of {TRANSMON_MODES}")


# --- SQUID algebra of the double-transmon coupler ---

def _squid_junctions(spec: DtcSpec) -> Tuple[float, float]:
    e_a = 0.5 * spec.e_j_squid_sum * (1.0 + spec.asymmetry)
    e_b = 0.5 * spec.e_j_squid_sum * (1.0 - spec.asymmetry)
    return e_a, e_b


def dtc_effective_junction(spec: DtcSpec) -> Tuple[float, float]:
    """Effective junction energy and phase offset of the coupler SQUID.

    The SQUID acts as a single junction e_j12 * cos(theta + phi_0). e_j12 is the
    non-negative magnitude; phi_0 is continuous in the SQUID bias for any
    asymmetry > 0 and reported as 0 where the junction vanishes.
    """
    half = 0.5 * spec.phi_ext_squid
    d = spec.asymmetry
    e_j12 = spec.e_j_squid_sum * math.sqrt(math.cos(half) ** 2 + d * d * math.sin(half) ** 2)
    if e_j12 <= 1e-12 * max(spec.e_j_squid_sum, 1.0):
        return 0.0, 0.0
    phi_s = spec.phi_ext_squid
    phi_0 = math.atan2((1.0 - d) * math.sin(phi_s), (1.0 + d) + (1.0 - d) * math.cos(phi_s))
    return e_j12, phi_0


def _compensation_phase(spec: DtcSpec) -> float:
    """Unwrapped phi_0 along the SQUID bias, continuous from phi_0(0) = 0."""
    if spec.asymmetry > 0.0:
        return dtc_effective_junction(spec)[1]
    return 0.5 * math.remainder(spec.phi_ext_squid, 4.0 * math.pi)


def dtc_main_loop_phase(spec: DtcSpec) -> float:
    """Main-loop phase actually seen by the coupler (crosstalk compensation applied)."""
    if spec.crosstalk_compensated:
        return -_compensation_phase(spec)
    return spec.phi_ext_main


def _potential_gradient(spec: DtcSpec, e_j12: float, offset: float):
    e_1, e_2 = spec.transmon_a.e_j, spec.transmon_b.e_j

    def gradient(x):
        theta = x[0] - x[1] + offset
        return np.array([e_1 * math.sin(x[0]) + e_j12 * math.sin(theta),
                         e_2 * math.sin(x[1]) - e_j12 * math.sin(theta)])

    def hessian(x):
        c = e_j12 * math.cos(x[0] - x[1] + offset)
        return np.array([[e_1 * math.cos(x[0]) + c, -c],
                         [-c, e_2 * math.cos(x[1]) + c]])

    return gradient, hessian


def dtc_minimize_potential(spec: DtcSpec, tol: float = 1e-10) -> Tuple[float, float]:
    """Static phase offsets of the two coupler modes at the potential minimum."""
    e_j12, phi_0 = dtc_effective_junction(spec)
    if e_j12 == 0.0:
        return 0.0, 0.0
    offset = dtc_main_loop_phase(spec) + phi_0
    gradient, hessian = _potential_gradient(spec, e_j12, offset)
    if np.max(np.abs(gradient(np.zeros(2)))) < tol:
        return 0.0, 0.0

    solution = optimize.root(gradient, np.zeros(2), jac=hessian, method='hybr', options={'xtol': 1e-14})
    residual = float(np.max(np.abs(gradient(solution.x))))
    if not solution.success or residual >= tol:
        raise NumericalError("coupler potential minimization did not converge", residual=residual)
    phi_bar_1, phi_bar_2 = (math.remainder(v, 2.0 * math.pi) for v in solution.x)
    return phi_bar_1, phi_bar_2


def dtc_effective_phase(spec: DtcSpec) -> float:
    """Intermode phase difference theta at the potential minimum."""
    e_j12, phi_0 = dtc_effective_junction(spec)
    phi_bar_1, phi_bar_2 = dtc_minimize_potential(spec)
    return phi_bar_1 - phi_bar_2 + dtc_main_loop_phase(spec) + phi_0


def dtc_effective_bias(spec: DtcSpec, tilde_phi: float) -> float:
    """Main-loop bias that produces the effective intermode phase ``tilde_phi``."""
    e_j12, _ = dtc_effective_junction(spec)
    result = tilde_phi
    for transmon in (spec.transmon_a, spec.transmon_b):
        ratio = e_j12 * math.sin(tilde_phi) / transmon.e_j
        if abs(ratio) > 1.0:
            raise ParameterDomainError(
                f"effective bias {tilde_phi:.6g} rad unreachable: |E_J12 sin/E_J| = {abs(ratio):.6g} > 1"
            )
        result += math.asin(ratio)
    return result


# --- Coupler Hamiltonian terms ---

class HamiltonianTerm(NamedTuple):
    """One coupler term. ``left``/``right`` are 'kind:mode' keys.

    kinds: 'junction' (-strength * cos phi_i on one mode), 'self'
    (strength * phi_i^2), 'inductive' (strength * phi_1 phi_2) and
    'capacitive' (strength * n_1 n_2).
    """
    kind: str
    left: str
    right: str
    strength: float


def _intermode_state(spec: DtcSpec) -> Tuple[float, float, float]:
    """(E_J12 cos theta, phi_bar_1, phi_bar_2) at the potential minimum."""
    e_j12, phi_0 = dtc_effective_junction(spec)
    if e_j12 == 0.0:
        return 0.0, 0.0, 0.0
    phi_bar_1, phi_bar_2 = dtc_minimize_potential(spec)
    theta = phi_bar_1 - phi_bar_2 + dtc_main_loop_phase(spec) + phi_0
    return e_j12 * math.cos(theta), phi_bar_1, phi_bar_2


def coupler_hamiltonian_terms(spec: CouplerSpec) -> List[HamiltonianTerm]:
    if isinstance(spec, StcSpec):
        e_j = spec.transmon.e_j * abs(math.cos(0.5 * spec.phi_ext))
        if e_j < 1e-12 * spec.transmon.e_j:
            e_j = 0.0
        return [HamiltonianTerm('junction', 'cos:0', '', e_j)]

    inductive, phi_bar_1, phi_bar_2 = _intermode_state(spec)
    if abs(inductive) < 1e-12 * max(spec.e_j_squid_sum, 1.0):
        inductive = 0.0
    return [
        HamiltonianTerm('junction', 'cos:0', '', spec.transmon_a.e_j * math.cos(phi_bar_1)),
        HamiltonianTerm('junction', 'cos:1', '', spec.transmon_b.e_j * math.cos(phi_bar_2)),
        HamiltonianTerm('self', 'phi:0', 'phi:0', 0.5 * inductive),
        HamiltonianTerm('self', 'phi:1', 'phi:1', 0.5 * inductive),
        HamiltonianTerm('inductive', 'phi:0', 'phi:1', -inductive),
        HamiltonianTerm('capacitive', 'n:0', 'n:1', spec.j_cap_intermode),
    ]


def coupler_transmons(spec: CouplerSpec) -> List[TransmonSpec]:
    if isinstance(spec, StcSpec):
        return [spec.transmon]
    return [spec.transmon_a, spec.transmon_b]


def coupler_modes(spec: CouplerSpec, n_basis: int = DEFAULT_CHARGE_BASIS,
                  mode: str = 'exact_charge') -> Tuple[List[ModeOperators], List[HamiltonianTerm]]:
    """Per-mode operators (junction and self terms folded in) plus the intermode terms."""
    terms = coupler_hamiltonian_terms(spec)
    transmons = coupler_transmons(spec)
    junctions = {int(t.left.split(':')[1]): t.strength for t in terms if t.kind == 'junction'}
    self_terms = {int(t.left.split(':')[1]): t.strength for t in terms if t.kind == 'self'}

    modes = []
    for idx, transmon in enumerate(transmons):
        e_j = junctions[idx]
        if mode == 'exact_charge':
            ops = _charge_basis_mode(transmon.e_c, e_j, n_basis)
        elif mode == 'harmonic':
            if e_j <= 0.0:
                raise ParameterDomainError("harmonic coupler mode needs a positive junction energy")
            ops = _harmonic_mode(transmon.e_c, e_j, n_basis)
        else:
            raise ParameterDomainError(f"unknown transmon mode '{mode}', expected one of {TRANSMON_MODES}")
        correction = self_terms.get(idx, 0.0)
        if correction:
            ops.h = ops.h + correction * ops.phi2_op
        modes.append(ops)
    intermode = [t for t in terms if t.kind in ('inductive', 'capacitive')]
    return modes, intermode


def coupler_curvatures(spec: DtcSpec) -> Tuple[float, float]:
    """Effective junction energies (quadratic curvature) of the two coupler modes."""
    inductive, phi_bar_1, phi_bar_2 = _intermode_state(spec)
    return (spec.transmon_a.e_j * math.cos(phi_bar_1) + inductive,
            spec.transmon_b.e_j * math.cos(phi_bar_2) + inductive)


def inductive_coupling_strength(spec: DtcSpec) -> float:
    """g_ind = E_J12 cos(theta) * phi_zpf,1 * phi_zpf,2 (harmonic coupler modes)."""
    inductive, _, _ = _intermode_state(spec)
    e_1, e_2 = coupler_curvatures(spec)
    return inductive * zpf(spec.transmon_a.e_c, e_1)[0] * zpf(spec.transmon_b.e_c, e_2)[0]


def capacitive_coupling_strength(spec: DtcSpec) -> float:
    """g_cap with J n_1 n_2 = -g_cap (a_1 - a_1^+)(a_2 - a_2^+)."""
    e_1, e_2 = coupler_curvatures(spec)
    return spec.j_cap_intermode * zpf(spec.transmon_a.e_c, e_1)[1] * zpf(spec.transmon_b.e_c, e_2)[1]
