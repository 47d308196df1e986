"""
Effective-coupling formulas checked against exact diagonalization.

At each coupler bias the second fluxonium is detuned off its sweet spot until
its k-l transition is resonant with the first one; half the minimum splitting
of the |kl>/|lk> doublet is the exact coupling.
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from analysis.effective import fluxonium_transition, transition_levels, effective_coupling
from core.device import DeviceSpec, assemble, diagonalize
from core.errors import ResonanceNotFoundError
from utils.helpers import set_path
from utils.logger import setup_logger

logger = setup_logger('comparison')

DEFAULT_SCAN_WINDOW = 1.0
DEFAULT_SCAN_POINTS = 81
REL_ERR_TOLERANCE = 0.15


@dataclass
class ComparisonRow:
    bias: float
    g_formula_ghz: float
    g_exact_ghz: float
    rel_err: float
    dispersive_ok: bool
    resonance_phi: float = math.nan


@dataclass
class ComparisonReport:
    transition: str
    formula: str
    rows: List[ComparisonRow] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        columns = ['bias', 'g_formula_ghz', 'g_exact_ghz', 'rel_err', 'dispersive_ok']
        return pd.DataFrame([{c: getattr(r, c) for c in columns} for r in self.rows], columns=columns)


def _detuned(device: DeviceSpec, phi: float) -> DeviceSpec:
    return set_path(device, 'fluxoniums.1.phi_ext', phi)


def find_resonance(device: DeviceSpec, transition='12', window: float = DEFAULT_SCAN_WINDOW,
                   points: int = DEFAULT_SCAN_POINTS) -> float:
    """Flux bias of fluxonium 2 (radians) where its k-l transition meets fluxonium 1's.

    Scans below the sweet spot first, then above it.
    """
    k, l = transition_levels(transition)
    _, target = fluxonium_transition(device, 0, k, l)

    def mismatch(phi: float) -> float:
        return fluxonium_transition(_detuned(device, phi), 1, k, l)[1] - target

    centre = device.fluxoniums[1].phi_ext
    for grid in (np.linspace(centre, centre - window, points), np.linspace(centre, centre + window, points)):
        values = [mismatch(phi) for phi in grid]
        for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
            if fa == 0.0:
                return float(a)
            if fa * fb < 0.0:
                return float(optimize.brentq(mismatch, min(a, b), max(a, b), xtol=1e-12))
    raise ResonanceNotFoundError(
        f"transition {k}-{l} of fluxonium 2 never crosses {target:.6g} GHz within +/-{window} rad"
    )


def doublet_splitting(device: DeviceSpec, transition='12') -> float:
    """Energy gap between the eigenstates carrying most weight on |kl> and |lk>."""
    k, l = transition_levels(transition)
    system = assemble(device)
    eig = diagonalize(system)
    rows = []
    for digits in ((k, l), (l, k)):
        row = system.index_of(eig.parse_label(digits))
        if row is None:
            raise ResonanceNotFoundError(f"bare state {digits} lies outside the truncated basis")
        rows.append(row)
    weights_a = np.abs(eig.vectors[rows[0], :]) ** 2
    weights_b = np.abs(eig.vectors[rows[1], :]) ** 2
    first = int(np.argmax(weights_a))
    weights_b[first] = -1.0
    second = int(np.argmax(weights_b))
    return abs(float(eig.energies[first] - eig.energies[second]))


def exact_coupling(device: DeviceSpec, transition='12', window: float = DEFAULT_SCAN_WINDOW,
                   points: int = DEFAULT_SCAN_POINTS) -> Tuple[float, float]:
    """(g_exact, phi_res): half the minimum doublet splitting near the bare resonance."""
    phi_res = find_resonance(device, transition, window, points)
    step = window / (points - 1)
    result = optimize.minimize_scalar(
        lambda phi: doublet_splitting(_detuned(device, phi), transition),
        bounds=(phi_res - step, phi_res + step), method='bounded', options={'xatol': 1e-8},
    )
    return 0.5 * float(result.fun), float(result.x)


def compare_effective_vs_exact(device: DeviceSpec, biases: Sequence[float], transition='12',
                               formula: str = 'full', bias_path: Optional[str] = None,
                               window: float = DEFAULT_SCAN_WINDOW,
                               points: int = DEFAULT_SCAN_POINTS) -> ComparisonReport:
    if bias_path is None:
        bias_path = f"couplers.{device.coupler_name}.{device.coupler.bias_field}"
    report = ComparisonReport(transition=str(transition), formula=formula)
    for bias in biases:
        biased = set_path(device, bias_path, bias)
        g_exact, phi_res = exact_coupling(biased, transition, window, points)
        predicted = effective_coupling(_detuned(biased, phi_res), transition, formula)
        magnitude = abs(predicted.g_eff)
        rel_err = abs(magnitude - g_exact) / g_exact if g_exact > 0.0 else math.inf
        report.rows.append(ComparisonRow(bias=float(bias), g_formula_ghz=predicted.g_eff,
                                         g_exact_ghz=g_exact, rel_err=rel_err,
                                         dispersive_ok=predicted.dispersive_ok, resonance_phi=phi_res))
        logger.debug(f"bias={bias:.6g}: formula {predicted.g_eff:.6g} GHz, exact {g_exact:.6g} GHz")
    logger.info(f"compared {formula} formula at {len(report.rows)} biases")
    return report
