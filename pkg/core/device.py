"""
Composite devices: fluxoniums plus coupler modes, assembled in a truncated
product basis of pre-diagonalized single modes.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from core.circuits import (
    DEFAULT_CHARGE_BASIS, DEFAULT_FLUXONIUM_BASIS, TRANSMON_MODES,
    CouplerSpec, DtcSpec, FluxoniumSpec, ModeOperators, StcSpec,
    coupler_modes, fluxonium_mode,
)
from core.errors import LabelError, NumericalError, ParameterDomainError, ResourceError
from utils.helpers import hermiticity_defect
from utils.logger import setup_logger

logger = setup_logger('device')

LABEL_THRESHOLD = 0.5
Label = Union[str, Sequence[int]]


@dataclass(frozen=True)
class Coupling:
    """Charge-charge coupling J * n_a * n_b between two named modes (GHz)."""
    a: str
    b: str
    strength: float
    kind: str = 'charge_charge'


@dataclass(frozen=True)
class Truncation:
    fluxonium_levels: int = 6
    coupler_levels: int = 4
    energy_cutoff: Optional[float] = None
    max_dim: int = 6000
    levels: Dict[str, int] = field(default_factory=dict)

    def levels_for(self, mode: str, is_fluxonium: bool) -> int:
        if mode in self.levels:
            return int(self.levels[mode])
        return self.fluxonium_levels if is_fluxonium else self.coupler_levels


@dataclass(frozen=True)
class DeviceSpec:
    """Fluxoniums q1..qN plus named couplers.

    A DTC named ``c`` contributes modes ``c1`` and ``c2``; an STC named ``c``
    contributes mode ``c``.
    """
    fluxoniums: Tuple[FluxoniumSpec, ...]
    couplers: Dict[str, CouplerSpec] = field(default_factory=dict)
    couplings: Tuple[Coupling, ...] = ()
    extra_couplings: Tuple[Coupling, ...] = ()
    truncation: Truncation = field(default_factory=Truncation)
    fluxonium_basis: int = DEFAULT_FLUXONIUM_BASIS
    charge_basis: int = DEFAULT_CHARGE_BASIS
    transmon_mode: str = 'exact_charge'

    def __post_init__(self):
        object.__setattr__(self, 'fluxoniums', tuple(self.fluxoniums))
        object.__setattr__(self, 'couplings', tuple(self.couplings))
        object.__setattr__(self, 'extra_couplings', tuple(self.extra_couplings))
        if self.transmon_mode not in TRANSMON_MODES:
            raise ParameterDomainError(f"unknown transmon mode '{self.transmon_mode}'")
        names = self.mode_names
        if len(set(names)) != len(names):
            raise ParameterDomainError(f"duplicate mode names in device: {names}")
        for coupling in self.couplings + self.extra_couplings:
            if coupling.a not in names or coupling.b not in names:
                raise ParameterDomainError(f"coupling {coupling.a}-{coupling.b} references an unknown mode")
            if coupling.a == coupling.b:
                raise ParameterDomainError(f"coupling {coupling.a}-{coupling.b} joins a mode to itself")
            if not math.isfinite(coupling.strength):
                raise ParameterDomainError(f"coupling {coupling.a}-{coupling.b} strength is not finite")
            if coupling.kind != 'charge_charge':
                raise ParameterDomainError(f"unsupported coupling kind '{coupling.kind}'")
        for name in names:
            is_flux = name in self.qubit_modes
            minimum = 3 if is_flux else 2
            if self.truncation.levels_for(name, is_flux) < minimum:
                raise ParameterDomainError(f"mode {name} keeps fewer than {minimum} levels")

    @property
    def qubit_modes(self) -> Tuple[str, ...]:
        return tuple(f"q{i + 1}" for i in range(len(self.fluxoniums)))

    @property
    def coupler_mode_map(self) -> Dict[str, Tuple[str, ...]]:
        result = {}
        for name, spec in self.couplers.items():
            if isinstance(spec, DtcSpec):
                result[name] = (f"{name}1", f"{name}2")
            else:
                result[name] = (name,)
        return result

    @property
    def mode_names(self) -> Tuple[str, ...]:
        names = list(self.qubit_modes)
        for modes in self.coupler_mode_map.values():
            names.extend(modes)
        return tuple(names)

    @property
    def coupler(self) -> Optional[CouplerSpec]:
        """First coupler, the common two-qubit case."""
        return next(iter(self.couplers.values()), None)

    @property
    def coupler_name(self) -> Optional[str]:
        return next(iter(self.couplers), None)

    def coupling_strength(self, a: str, b: str) -> float:
        total = 0.0
        for coupling in self.couplings + self.extra_couplings:
            if {coupling.a, coupling.b} == {a, b}:
                total += coupling.strength
        return total


@dataclass
class LocalMode:
    name: str
    energies: np.ndarray
    h: np.ndarray
    n: np.ndarray
    phi: np.ndarray
    vectors: np.ndarray

    @property
    def levels(self) -> int:
        return len(self.energies)


@dataclass
class AssembledSystem:
    mode_names: Tuple[str, ...]
    n_qubits: int
    states: np.ndarray
    hamiltonian: np.ndarray
    local: Dict[str, LocalMode]
    _equal: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    _index: Dict[Tuple[int, ...], int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {tuple(int(v) for v in row): k for k, row in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, state: Tuple[int, ...]) -> Optional[int]:
        return self._index.get(tuple(state))

    def _equal_mask(self, mode: int) -> np.ndarray:
        if mode not in self._equal:
            column = self.states[:, mode]
            self._equal[mode] = column[:, None] == column[None, :]
        return self._equal[mode]

    def _spectator_mask(self, active: Iterable[int]) -> np.ndarray:
        mask = np.ones((self.dim, self.dim), dtype=bool)
        active = set(active)
        for m in range(len(self.mode_names)):
            if m not in active:
                mask &= self._equal_mask(m)
        return mask

    def embed(self, mode: str, matrix: np.ndarray) -> np.ndarray:
        m = self.mode_names.index(mode)
        s = self.states[:, m]
        return matrix[np.ix_(s, s)] * self._spectator_mask([m])

    def embed_pair(self, mode_a: str, op_a: np.ndarray, mode_b: str, op_b: np.ndarray) -> np.ndarray:
        a, b = self.mode_names.index(mode_a), self.mode_names.index(mode_b)
        sa, sb = self.states[:, a], self.states[:, b]
        return op_a[np.ix_(sa, sa)] * op_b[np.ix_(sb, sb)] * self._spectator_mask([a, b])

    def operator(self, mode: Union[str, int], kind: str = 'n') -> np.ndarray:
        name = self.mode_names[mode] if isinstance(mode, (int, np.integer)) else mode
        if name not in self.local:
            raise ParameterDomainError(f"unknown mode '{name}'")
        if kind not in ('n', 'phi'):
            raise ParameterDomainError(f"unknown operator kind '{kind}'")
        return self.embed(name, getattr(self.local[name], kind))


def _mode_operators(device: DeviceSpec) -> Tuple[Dict[str, ModeOperators], List[Tuple[str, str, str, float]]]:
    """Full-basis operators per mode plus intermode coupler terms as (op, mode_a, mode_b, strength)."""
    ops = {}
    for name, spec in zip(device.qubit_modes, device.fluxoniums):
        ops[name] = fluxonium_mode(spec, device.fluxonium_basis)
    intermode = []
    for cname, spec in device.couplers.items():
        basis = device.charge_basis if device.transmon_mode == 'exact_charge' else max(device.truncation.coupler_levels + 6, 12)
        modes, terms = coupler_modes(spec, basis, device.transmon_mode)
        mode_names = device.coupler_mode_map[cname]
        for mname, mode_ops in zip(mode_names, modes):
            ops[mname] = mode_ops
        for term in terms:
            left_mode = mode_names[int(term.left.split(':')[1])]
            right_mode = mode_names[int(term.right.split(':')[1])]
            op_kind = term.left.split(':')[0]
            intermode.append((op_kind, left_mode, right_mode, term.strength))
    return ops, intermode


def _product_states(levels: List[int], energies: List[np.ndarray], cutoff: Optional[float],
                    max_dim: int) -> np.ndarray:
    """Lexicographic product states, pruned by total excitation energy when a cutoff is set."""
    full = int(np.prod(levels))
    if cutoff is None and full > max_dim:
        raise ResourceError(f"product dimension {full} exceeds the cap of {max_dim}")
    excitations = [e - e[0] for e in energies]
    states: List[Tuple[int, ...]] = [()]
    budgets = [0.0]
    for m, count in enumerate(levels):
        next_states, next_budgets = [], []
        for state, used in zip(states, budgets):
            for k in range(count):
                total = used + excitations[m][k]
                if cutoff is not None and total > cutoff:
                    break
                next_states.append(state + (k,))
                next_budgets.append(total)
        states, budgets = next_states, next_budgets
    if len(states) > max_dim:
        raise ResourceError(f"truncated dimension {len(states)} exceeds the cap of {max_dim}")
    return np.array(states, dtype=int).reshape(len(states), len(levels))


def assemble(device: DeviceSpec, reference: Optional[DeviceSpec] = None) -> AssembledSystem:
    """Build the composite Hamiltonian in the truncated product basis.

    With ``reference`` the local eigenbases (and the retained product states)
    come from the reference device, so systems assembled at different biases
    share one basis.
    """
    ops, intermode = _mode_operators(device)
    basis_ops = ops if reference is None else _mode_operators(reference)[0]
    if reference is not None and tuple(basis_ops) != tuple(ops):
        raise ParameterDomainError("reference device has a different mode structure")

    local = {}
    for name in device.mode_names:
        levels = device.truncation.levels_for(name, name in device.qubit_modes)
        energies, vectors = basis_ops[name].eigensystem(levels)
        project = lambda matrix: vectors.conj().T @ matrix @ vectors
        if reference is None:
            h_local = np.diag(energies).astype(complex)
        else:
            h_local = project(ops[name].h)
            h_local = 0.5 * (h_local + h_local.conj().T)
        local[name] = LocalMode(name=name, energies=energies, h=h_local,
                                n=project(ops[name].n_op), phi=project(ops[name].phi_op), vectors=vectors)

    mode_names = device.mode_names
    level_counts = [local[name].levels for name in mode_names]
    states = _product_states(level_counts, [local[name].energies for name in mode_names],
                             device.truncation.energy_cutoff, device.truncation.max_dim)
    system = AssembledSystem(mode_names=mode_names, n_qubits=len(device.fluxoniums), states=states,
                             hamiltonian=np.zeros((len(states), len(states)), dtype=complex), local=local)

    h = np.zeros((system.dim, system.dim), dtype=complex)
    for name in mode_names:
        h += system.embed(name, local[name].h)
    for coupling in device.couplings + device.extra_couplings:
        if coupling.strength:
            h += coupling.strength * system.embed_pair(coupling.a, local[coupling.a].n,
                                                       coupling.b, local[coupling.b].n)
    for op_kind, mode_a, mode_b, strength in intermode:
        if strength:
            h += strength * system.embed_pair(mode_a, getattr(local[mode_a], op_kind),
                                              mode_b, getattr(local[mode_b], op_kind))
    system.hamiltonian = 0.5 * (h + h.conj().T)
    logger.debug(f"assembled {len(mode_names)} modes into dimension {system.dim}")
    return system


@dataclass
class EigenSolution:
    energies: np.ndarray
    vectors: np.ndarray
    labels: List[Optional[Tuple[int, ...]]] = field(default_factory=list)
    overlap_quality: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mode_names: Tuple[str, ...] = ()
    n_qubits: int = 0
    system: Optional[AssembledSystem] = field(default=None, repr=False)
    _by_label: Dict[Tuple[int, ...], int] = field(default_factory=dict, repr=False)

    def _reindex(self) -> None:
        self._by_label = {label: k for k, label in enumerate(self.labels) if label is not None}

    def parse_label(self, label: Label) -> Tuple[int, ...]:
        """'21' -> qubits (2, 1), couplers ground; '21,01' also sets coupler levels."""
        n_modes = len(self.mode_names)
        if isinstance(label, str):
            qubit_part, _, coupler_part = label.partition(',')
            digits = [int(c) for c in qubit_part.strip()] + [int(c) for c in coupler_part.strip()]
        else:
            digits = [int(v) for v in label]
        if len(digits) > n_modes:
            raise LabelError([label], context='label longer than the mode list')
        return tuple(digits + [0] * (n_modes - len(digits)))

    def index(self, label: Union[Label, int]) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        key = self.parse_label(label)
        if key not in self._by_label:
            raise LabelError([label])
        return self._by_label[key]

    def indices(self, labels: Iterable[Label]) -> List[int]:
        labels = list(labels)
        missing = [lab for lab in labels if self.parse_label(lab) not in self._by_label]
        if missing:
            raise LabelError(missing)
        return [self._by_label[self.parse_label(lab)] for lab in labels]

    def energy(self, label: Union[Label, int]) -> float:
        return float(self.energies[self.index(label)])

    def vector(self, label: Union[Label, int]) -> np.ndarray:
        return self.vectors[:, self.index(label)]

    def has(self, label: Label) -> bool:
        return self.parse_label(label) in self._by_label

    def bare_row(self, label: Label) -> int:
        if self.system is None:
            raise LabelError([label], context='no bare basis attached')
        row = self.system.index_of(self.parse_label(label))
        if row is None:
            raise LabelError([label], context='bare state outside the truncated basis')
        return row


def diagonalize(h: Union[np.ndarray, AssembledSystem], tol: float = 1e-10) -> EigenSolution:
    system = h if isinstance(h, AssembledSystem) else None
    matrix = system.hamiltonian if system is not None else np.asarray(h)
    defect = hermiticity_defect(matrix)
    if defect > tol:
        raise NumericalError("Hamiltonian is not Hermitian", residual=defect)
    energies, vectors = linalg.eigh(matrix)
    eig = EigenSolution(energies=energies, vectors=vectors, labels=[None] * len(energies),
                        overlap_quality=np.zeros(len(energies)))
    if system is not None:
        eig.mode_names = system.mode_names
        eig.n_qubits = system.n_qubits
        eig.system = system
    return eig


def label_states(eig: EigenSolution, bare_basis: Optional[AssembledSystem] = None,
                 threshold: float = LABEL_THRESHOLD) -> EigenSolution:
    """Greedy maximum-overlap labeling of eigenstates by bare product states."""
    system = bare_basis or eig.system
    if system is None:
        raise LabelError(['*'], context='label_states needs the bare basis')
    eig.system = system
    eig.mode_names = system.mode_names
    eig.n_qubits = system.n_qubits

    populations = np.abs(eig.vectors) ** 2
    best = populations.max(axis=0)
    order = np.argsort(-best, kind='stable')
    taken = np.zeros(system.dim, dtype=bool)
    labels: List[Optional[Tuple[int, ...]]] = [None] * len(eig.energies)
    quality = np.zeros(len(eig.energies))
    for j in order:
        column = np.where(taken, -1.0, populations[:, j])
        row = int(np.argmax(column))
        quality[j] = max(column[row], 0.0)
        if column[row] > threshold + 1e-6:
            labels[j] = tuple(int(v) for v in system.states[row])
            taken[row] = True
    eig.labels = labels
    eig.overlap_quality = quality
    eig._reindex()
    unlabeled = sum(label is None for label in labels)
    if unlabeled:
        logger.debug(f"{unlabeled} of {len(labels)} eigenstates left unlabeled")
    return eig


def solve(device: DeviceSpec) -> EigenSolution:
    """assemble -> diagonalize -> label in one call."""
    return label_states(diagonalize(assemble(device)))
