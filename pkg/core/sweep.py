"""
Parameter sweeps over a device template.

Points are diagonalized independently (optionally on a thread pool); labels
are then assigned in axis order, with unlabeled states seeded from the
previous point's eigenvectors.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment

from core.device import DeviceSpec, EigenSolution, assemble, diagonalize, label_states
from core.errors import CircuitError, ParameterDomainError, SweepPointError
from utils.helpers import get_path, set_path
from utils.logger import setup_logger

logger = setup_logger('sweep')

CONTINUITY_THRESHOLD = 0.5


@dataclass
class PointSummary:
    value: float
    dim: int
    ground_energy: float
    min_overlap: float
    n_unlabeled: int
    n_seeded: int = 0


@dataclass
class SweepResult:
    axis_name: str
    axis_values: List[float]
    columns: Dict[str, List[float]] = field(default_factory=dict)
    summaries: List[PointSummary] = field(default_factory=list)
    annotations: List[str] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        data = {self.axis_name: self.axis_values}
        data.update(self.columns)
        data.setdefault('min_overlap', [s.min_overlap for s in self.summaries])
        data.setdefault('n_unlabeled', [s.n_unlabeled for s in self.summaries])
        if self.annotations:
            data['annotation'] = self.annotations
        return pd.DataFrame(data)


def _check_axis(values: Sequence[float]) -> List[float]:
    values = [float(v) for v in values]
    if not values:
        raise ParameterDomainError("sweep axis is empty")
    if len(values) > 1:
        steps = np.diff(values)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ParameterDomainError("sweep axis must be strictly monotone")
    return values


def seed_from_previous(eig: EigenSolution, previous: Optional[EigenSolution],
                       threshold: float = CONTINUITY_THRESHOLD) -> int:
    """Give unlabeled eigenstates the labels of their best-matching predecessors.

    Only labels missing at this point are candidates, matched by a
    Hungarian assignment on squared overlaps. Returns the number seeded.
    """
    if previous is None or previous.system is None or eig.system is None:
        return 0
    if not np.array_equal(previous.system.states, eig.system.states):
        return 0
    missing = [j for j, label in enumerate(eig.labels) if label is None]
    present = set(label for label in eig.labels if label is not None)
    free = [k for k, label in enumerate(previous.labels) if label is not None and label not in present]
    if not missing or not free:
        return 0
    overlap = np.abs(previous.vectors[:, free].conj().T @ eig.vectors[:, missing]) ** 2
    rows, cols = linear_sum_assignment(-overlap)
    seeded = 0
    for r, c in zip(rows, cols):
        if overlap[r, c] > threshold:
            eig.labels[missing[c]] = previous.labels[free[r]]
            eig.overlap_quality[missing[c]] = overlap[r, c]
            seeded += 1
    if seeded:
        eig._reindex()
    return seeded


def sweep(template: DeviceSpec, axis: str, values: Sequence[float], metrics: Sequence[str],
          threads: int = 1, strict: bool = False, annotate: bool = False) -> SweepResult:
    """Evaluate registry metrics along one scalar parameter of ``template``.

    ``axis`` is a dotted path such as ``couplers.c.phi_ext_squid`` or
    ``fluxoniums.0.phi_ext``.
    """
    from analysis.metrics import collision_report, evaluate_metrics, resolve_metric

    values = _check_axis(values)
    get_path(template, axis)
    for name in metrics:
        resolve_metric(name)

    def diagonalize_point(value: float):
        try:
            device = set_path(template, axis, value)
            return device, diagonalize(assemble(device))
        except CircuitError as exc:
            raise SweepPointError(axis, value, exc) from exc

    if threads > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(diagonalize_point, values))
    else:
        points = [diagonalize_point(v) for v in values]

    result = SweepResult(axis_name=axis, axis_values=values, columns={name: [] for name in metrics})
    previous = None
    for value, (device, eig) in zip(values, points):
        try:
            label_states(eig)
            seeded = seed_from_previous(eig, previous)
            row = evaluate_metrics(metrics, eig, device, strict=strict)
            note = ''
            if annotate:
                report = collision_report(eig)
                note = report.annotation if report is not None else ''
        except CircuitError as exc:
            raise SweepPointError(axis, value, exc) from exc
        for name in metrics:
            result.columns[name].append(row[name])
        labeled = eig.overlap_quality[[j for j, lab in enumerate(eig.labels) if lab is not None]]
        result.summaries.append(PointSummary(
            value=value, dim=len(eig.energies), ground_energy=float(eig.energies[0]),
            min_overlap=float(labeled.min()) if len(labeled) else math.nan,
            n_unlabeled=sum(label is None for label in eig.labels), n_seeded=seeded,
        ))
        if annotate:
            result.annotations.append(note)
        previous = eig
    logger.info(f"sweep over {axis}: {len(values)} points, {len(metrics)} metrics")
    return result
