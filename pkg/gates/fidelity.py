"""
CZ gate figures of merit on the computational block, ordered 00, 01, 10, 11.
"""
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from core.errors import ParameterDomainError
from utils.helpers import wrap_phase

U_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
_CZ_SIGNS = np.diag(U_CZ).real
_PHASE_GRID = 24


@dataclass
class GateReport:
    fidelity: float
    leakage: float
    conditional_phase: float
    z_phases: Tuple[float, float]
    population_traces: Optional[pd.DataFrame] = None

    @property
    def error(self) -> float:
        return 1.0 - self.fidelity


def _check_block(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ParameterDomainError(f"computational block must be 4x4, got {u.shape}")
    return u


def _overlap(diagonal: np.ndarray, alpha: float, beta: float) -> float:
    """|Tr(U_CZ^+ Z U)|^2 with Z = diag(1, e^{i alpha}, e^{i beta}, e^{i(alpha+beta)})."""
    z = np.exp(1j * np.array([0.0, alpha, beta, alpha + beta]))
    return float(abs(np.sum(_CZ_SIGNS * z * diagonal)) ** 2)


def closed_form_z_phases(u: np.ndarray) -> Tuple[float, float]:
    """(alpha, beta) aligning the 01 and 10 diagonal phases with 00."""
    d = np.diag(_check_block(u))
    return wrap_phase(np.angle(d[0]) - np.angle(d[1])), wrap_phase(np.angle(d[0]) - np.angle(d[2]))


def fidelity_cz(u: np.ndarray, optimize_phases: bool = True) -> Tuple[float, Tuple[float, float]]:
    """Average CZ fidelity maximized over single-qubit Z phases.

    Returns (F, (theta_1, theta_2)) where theta_i is the Z correction applied
    to qubit i. The closed-form phases are used as a start and refined
    numerically unless ``optimize_phases`` is False.
    """
    u = _check_block(u)
    norm = float(np.real(np.trace(u.conj().T @ u)))
    diagonal = np.diag(u)
    alpha, beta = closed_form_z_phases(u)
    best = (_overlap(diagonal, alpha, beta), alpha, beta)
    if optimize_phases:
        grid = np.linspace(-math.pi, math.pi, _PHASE_GRID, endpoint=False)
        for a, b in itertools.product(grid, grid):
            value = _overlap(diagonal, a, b)
            if value > best[0]:
                best = (value, a, b)
        result = optimize.minimize(lambda x: -_overlap(diagonal, x[0], x[1]), x0=[best[1], best[2]],
                                   method='Nelder-Mead', options={'xatol': 1e-12, 'fatol': 1e-15, 'maxiter': 2000})
        if -result.fun > best[0]:
            best = (-result.fun, result.x[0], result.x[1])
    overlap, alpha, beta = best
    fidelity = (norm + overlap) / 20.0
    return min(max(fidelity, 0.0), 1.0), (wrap_phase(beta), wrap_phase(alpha))


def leakage(u: np.ndarray, computational: Sequence[int]) -> float:
    """Average population leaving the computational block."""
    u = np.asarray(u, dtype=complex)
    block = u[np.ix_(computational, computational)]
    return float(min(max(1.0 - np.sum(np.abs(block) ** 2) / len(computational), 0.0), 1.0))


def conditional_phase(u: np.ndarray) -> float:
    d = np.diag(_check_block(u))
    return wrap_phase(np.angle(d[0]) + np.angle(d[3]) - np.angle(d[1]) - np.angle(d[2]))


def gate_report(u: np.ndarray, computational: Sequence[int],
                traces: Optional[pd.DataFrame] = None) -> GateReport:
    block = np.asarray(u)[np.ix_(computational, computational)]
    fidelity, z_phases = fidelity_cz(block)
    return GateReport(fidelity=fidelity, leakage=leakage(u, computational),
                      conditional_phase=conditional_phase(block), z_phases=z_phases,
                      population_traces=traces)
