"""
Incoherent CZ error from relaxation and dephasing of the |21> state.

Times are seconds in CoherenceBudget and ns for gate lengths.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from core.errors import ParameterDomainError, StepSizeError
from utils.logger import setup_logger

logger = setup_logger('decoherence')

NS = 1e-9
TRACE_TOL = 1e-8
# basis order of the reduced model
REDUCED_STATES = ('00', '01', '10', '11', '21')


@dataclass(frozen=True)
class CoherenceBudget:
    t1_21: float = math.inf
    tphi_white_21: float = math.inf
    tphi_1f_21: float = math.inf

    def __post_init__(self):
        for name in ('t1_21', 'tphi_white_21', 'tphi_1f_21'):
            value = getattr(self, name)
            if not value > 0.0:
                raise ParameterDomainError(f"{name} must be positive or inf, got {value}")


@dataclass
class IncoherentError:
    t1: float
    white: float
    one_over_f: float

    @property
    def total(self) -> float:
        return self.t1 + self.white + self.one_over_f

    @property
    def fidelity(self) -> float:
        return 1.0 - self.total


def incoherent_error(budget: CoherenceBudget, t_g: float) -> IncoherentError:
    """Closed-form error components for a gate of ``t_g`` ns that visits |21> once."""
    if t_g <= 0.0:
        raise ParameterDomainError(f"gate length must be positive, got {t_g}")
    t = t_g * NS
    return IncoherentError(
        t1=3.0 / 32.0 * t / budget.t1_21,
        white=13.0 / 80.0 * t / budget.tphi_white_21,
        one_over_f=13.0 / 80.0 * (t / budget.tphi_1f_21) ** 2,
    )


def _projector(i: int, j: int, dim: int = len(REDUCED_STATES)) -> np.ndarray:
    op = np.zeros((dim, dim), dtype=complex)
    op[i, j] = 1.0
    return op


def lindblad_reduced_check(t_g: float, budget: CoherenceBudget, omega: float = None,
                           rtol: float = 1e-10, atol: float = 1e-12) -> float:
    """1 - F_avg of the five-state model |11> <-> |21> with decay and dephasing of |21>.

    ``omega`` is in rad/ns and defaults to pi/t_g (one full cycle, CZ phase on |11>).
    """
    if t_g <= 0.0:
        raise ParameterDomainError(f"gate length must be positive, got {t_g}")
    omega = math.pi / t_g if omega is None else float(omega)
    i11, i21 = REDUCED_STATES.index('11'), REDUCED_STATES.index('21')
    h = omega * (_projector(i11, i21) + _projector(i21, i11))
    collapse = []
    if math.isfinite(budget.t1_21):
        collapse.append(math.sqrt(1.0 / (budget.t1_21 / NS)) * _projector(i11, i21))
    if math.isfinite(budget.tphi_white_21):
        collapse.append(math.sqrt(2.0 / (budget.tphi_white_21 / NS)) * _projector(i21, i21))
    dim = len(REDUCED_STATES)
    jumps = np.array(collapse) if collapse else np.zeros((0, dim, dim), dtype=complex)
    decay = sum((c.conj().T @ c for c in jumps), np.zeros((dim, dim), dtype=complex))

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        drho = -1j * (h @ rho - rho @ h) - 0.5 * (decay @ rho + rho @ decay)
        for c in jumps:
            drho += c @ rho @ c.conj().T
        return drho.ravel()

    ideal = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    process = 0.0
    for i in range(4):
        for j in range(4):
            solution = solve_ivp(rhs, (0.0, t_g), _projector(i, j).ravel(), method='DOP853',
                                 rtol=rtol, atol=atol)
            if not solution.success:
                raise StepSizeError(f"density-matrix integration failed: {solution.message}")
            rho = solution.y[:, -1].reshape(dim, dim)
            trace = np.trace(rho)
            expected = 1.0 if i == j else 0.0
            if abs(trace - expected) > TRACE_TOL:
                raise StepSizeError("density-matrix trace drifted", residual=float(abs(trace - expected)))
            block = rho[:4, :4]
            process += np.real(ideal[i, i].conj() * block[i, j] * ideal[j, j])
    process /= 16.0
    average = (4.0 * process + 1.0) / 5.0
    error = 1.0 - average
    logger.debug(f"reduced Lindblad check: t_g={t_g:g} ns, error={error:.3e}")
    return float(error)
