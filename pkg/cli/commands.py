"""
Command implementations behind main.py. Each command reads a validated
RunConfig, writes its CSV files plus config_echo.json into the output
directory and returns the written paths.
"""
import math
import os
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from analysis.comparison import compare_effective_vs_exact
from analysis.metrics import dephasing_estimate, find_nulling_point, residual_vs_qubit_flux
from analysis.reporter import write_csv, write_json
from config.settings import RunConfig, axis_values, build_device
from core.device import DeviceSpec, solve
from core.errors import ConfigError
from core.sweep import sweep
from gates.calibration import calibrate_gate, find_idle_bias, find_interaction_point, spectator_experiment
from gates.decoherence import CoherenceBudget, incoherent_error, lindblad_reduced_check
from gates.dynamics import coupler_bias_path
from utils.helpers import get_path, parse_angle, set_path
from utils.logger import setup_logger

logger = setup_logger('cli')

SPECTRUM_LABELS = ('00', '01', '10', '11', '02', '20', '12', '21', '22', '03', '30')
GATE_COLUMNS = ['t_g_ns', 'fidelity', 'leakage', 'cond_phase_rad', 'omega_d_ghz', 'amp_ghz',
                'phase_rel_rad', 'idle_bias', 'interaction_bias', 'evaluations', 'best_effort']


def _out_path(config: RunConfig, name: str) -> str:
    return os.path.join(config.output, name)


def _echo(config: RunConfig, written: List[str]) -> List[str]:
    written.append(write_json(config.data, _out_path(config, 'config_echo.json')))
    return written


def _label_text(label: Optional[Tuple[int, ...]], n_qubits: int) -> str:
    if label is None:
        return ''
    qubits = ''.join(str(v) for v in label[:n_qubits])
    couplers = ''.join(str(v) for v in label[n_qubits:])
    return f"{qubits},{couplers}" if couplers else qubits


# --- spectrum / sweep ---

def cmd_spectrum(config: RunConfig) -> List[str]:
    """Dressed levels at the configured biases and their dependence on the sweep axis."""
    device = build_device(config)
    eig = solve(device)
    frame = pd.DataFrame({
        'level': np.arange(len(eig.energies)),
        'energy_ghz': eig.energies - eig.energies[0],
        'label': [_label_text(label, eig.n_qubits) for label in eig.labels],
        'overlap': eig.overlap_quality,
    })
    written = [write_csv(frame, _out_path(config, 'spectrum.csv'))]
    names = [f"energy_{label}_ghz" for label in SPECTRUM_LABELS]
    result = sweep(device, config.sweep['axis'], axis_values(config.sweep, 'sweep'), names, threads=config.threads)
    written.append(write_csv(result.to_frame(), _out_path(config, 'spectrum_sweep.csv')))
    return _echo(config, written)


def cmd_sweep(config: RunConfig) -> List[str]:
    device = build_device(config)
    result = sweep(device, config.sweep['axis'], axis_values(config.sweep, 'sweep'), config.metrics,
                   threads=config.threads)
    return _echo(config, [write_csv(result.to_frame(), _out_path(config, 'sweep.csv'))])


# --- nulling ---

def cmd_nulling(config: RunConfig) -> List[str]:
    """Coarse sweep plus golden-section refinement of the nulling bias, optionally per scanned parameter."""
    device = build_device(config)
    axis = config.sweep['axis']
    grid = axis_values(config.sweep, 'sweep')
    metric = config.nulling['metric']
    scan = config.nulling['scan']
    rows = []
    if scan is None:
        bias, value = find_nulling_point(device, axis, grid, metric, config.threads)
        rows.append({'null_bias': bias, metric: value})
    else:
        if not isinstance(scan, dict) or set(scan) != {'path', 'values'}:
            raise ConfigError("scan needs exactly 'path' and 'values'", field='nulling.scan')
        get_path(device, scan['path'])
        for raw in scan['values']:
            scanned = parse_angle(raw, 'nulling.scan.values')
            bias, value = find_nulling_point(set_path(device, scan['path'], scanned), axis, grid, metric,
                                             config.threads)
            rows.append({'scan_value': scanned, 'null_bias': bias, metric: value})
    for row in rows:
        logger.info(f"nulling point: {row}")
    return _echo(config, [write_csv(pd.DataFrame(rows), _out_path(config, 'nulling.csv'))])


def cmd_residual(config: RunConfig) -> List[str]:
    section = config.residual
    result = residual_vs_qubit_flux(build_device(config), int(section['qubit']),
                                    axis_values(section, 'residual'), threads=config.threads)
    return _echo(config, [write_csv(result.to_frame(), _out_path(config, 'residual.csv'))])


# --- gates ---

def _idle_bias(device: DeviceSpec, config: RunConfig) -> float:
    """Configured idle bias, or the nulling point along the coupler's flux line."""
    if config.gate['idle_bias'] is not None:
        return parse_angle(config.gate['idle_bias'], 'gate.idle_bias')
    path = coupler_bias_path(device)
    grid = axis_values(config.sweep, 'sweep') if config.sweep['axis'] == path else None
    return find_idle_bias(device, path, grid=grid, threads=config.threads)


def _interaction_bias(device: DeviceSpec, config: RunConfig, t_g: float, idle: float) -> float:
    gate = config.gate
    if gate['interaction_bias'] is not None:
        return parse_angle(gate['interaction_bias'], 'gate.interaction_bias')
    bias_range = None
    if gate['bias_range'] is not None:
        low, high = gate['bias_range']
        bias_range = (parse_angle(low, 'gate.bias_range'), parse_angle(high, 'gate.bias_range'))
    return find_interaction_point(device, target_shift=gate['target_shift'], t_g=t_g,
                                  bias_range=bias_range, threads=config.threads, idle_bias=idle)


def cmd_gate(config: RunConfig) -> List[str]:
    device = build_device(config)
    gate = config.gate
    rows: List[Dict[str, float]] = []
    idle = _idle_bias(device, config)
    written: List[str] = []
    for t_g in gate['t_g']:
        bias = _interaction_bias(device, config, t_g, idle)
        result = calibrate_gate(device, t_g, bias, transition=gate['transition'], budget=int(gate['budget']),
                                ramp=float(gate['ramp']), levels=int(gate['levels']), seed=config.seed,
                                idle_bias=idle)
        drive = result.schedule.drive
        report = result.report
        rows.append(dict(zip(GATE_COLUMNS, (
            t_g, report.fidelity, report.leakage, report.conditional_phase, drive.frequency, drive.peak,
            drive.phase_rel, idle, bias, result.evaluations, result.best_effort,
        ))))
        if gate['record_every'] is not None:
            traced = result.model.run(result.schedule, record_every=float(gate['record_every']))
            written.append(write_csv(traced.population_traces, _out_path(config, f"populations_tg{t_g:g}.csv")))
    written.insert(0, write_csv(pd.DataFrame(rows, columns=GATE_COLUMNS), _out_path(config, 'gate.csv')))
    return _echo(config, written)


def cmd_spectator(config: RunConfig) -> List[str]:
    device = build_device(config)
    if config.device['spectator'] is None:
        raise ConfigError('spectator command needs a spectator device', field='device.spectator')
    gate = config.gate
    idle = _idle_bias(device, config)
    rows = []
    for t_g in gate['t_g']:
        bias = _interaction_bias(device, config, t_g, idle)
        result = spectator_experiment(device, t_g, bias, transition=gate['transition'],
                                      budget=int(gate['budget']), levels=int(gate['levels']), seed=config.seed,
                                      idle_bias=idle)
        rows.append({'t_g_ns': t_g, 'error_spectator_0': result.report_0.error,
                     'error_spectator_1': result.report_1.error, 'error_diff': result.error_difference,
                     'spectator_shift_ghz': result.shift_ghz, 'idle_bias': idle, 'interaction_bias': bias})
    return _echo(config, [write_csv(pd.DataFrame(rows), _out_path(config, 'spectator.csv'))])


# --- decoherence ---

def _reference_device(device: DeviceSpec) -> DeviceSpec:
    return DeviceSpec(fluxoniums=device.fluxoniums, truncation=device.truncation,
                      fluxonium_basis=device.fluxonium_basis, charge_basis=device.charge_basis)


def cmd_decoherence(config: RunConfig) -> List[str]:
    """Dephasing estimates per transition and the incoherent error budget per gate length."""
    device = build_device(config)
    section = config.decoherence
    path = coupler_bias_path(device)
    reference = _reference_device(device)
    rows = []
    estimates = {}
    for transition in section['transitions']:
        estimate = dephasing_estimate(device, transition, path, a_phi=section['a_phi'], reference=reference)
        estimates[transition] = estimate
        rows.append({'transition': transition, 'freq_shift_ghz': estimate.freq_shift,
                     'sensitivity_ghz_per_phi0': estimate.sensitivity, 'tphi_1f_s': estimate.t_phi_1f})
    written = [write_csv(pd.DataFrame(rows), _out_path(config, 'dephasing.csv'))]

    tphi_1f = estimates['11-21'].t_phi_1f if '11-21' in estimates else math.inf
    budget = CoherenceBudget(t1_21=section['t1_21'], tphi_white_21=section['tphi_white_21'], tphi_1f_21=tphi_1f)
    t1_only = CoherenceBudget(t1_21=section['t1_21'])
    errors = []
    for t_g in config.gate['t_g']:
        error = incoherent_error(budget, t_g)
        errors.append({'t_g_ns': t_g, 'error_t1': error.t1, 'error_white': error.white,
                       'error_1f': error.one_over_f, 'error_total': error.total,
                       'lindblad_t1': lindblad_reduced_check(t_g, t1_only)})
    written.append(write_csv(pd.DataFrame(errors), _out_path(config, 'decoherence.csv')))
    return _echo(config, written)


def cmd_compare(config: RunConfig) -> List[str]:
    section = config.compare
    report = compare_effective_vs_exact(build_device(config), axis_values(section, 'compare'),
                                        transition=section['transition'], formula=section['formula'],
                                        window=float(section['window']), points=int(section['scan_points']))
    return _echo(config, [write_csv(report.to_frame(), _out_path(config, 'compare.csv'))])


COMMANDS: Dict[str, Callable[[RunConfig], List[str]]] = {
    'spectrum': cmd_spectrum,
    'sweep': cmd_sweep,
    'nulling': cmd_nulling,
    'residual': cmd_residual,
    'gate': cmd_gate,
    'spectator': cmd_spectator,
    'decoherence': cmd_decoherence,
    'compare': cmd_compare,
}
