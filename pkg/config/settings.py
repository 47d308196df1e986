# config/settings.py
import copy
import json
import math
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from core.circuits import DtcSpec, FluxoniumSpec, StcSpec, TransmonSpec
from core.device import Coupling, DeviceSpec, Truncation
from core.errors import CircuitError, ConfigError
from utils.helpers import parse_angle

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(__file__), '..', 'config.json')

_FLUXONIUM_KEYS = ('e_c', 'e_l', 'e_j')
# validated by type-specific defaults in _validate_coupler
_OPAQUE = {'device.coupler', 'device.truncation.levels'}
_TRANSMON_KEYS = ('e_c', 'e_j')


@dataclass
class RunConfig:
    """Validated run configuration; ``data`` is the echo with every default filled in."""
    data: Dict[str, Any]
    source: Optional[str] = None

    @property
    def device(self) -> Dict[str, Any]:
        return self.data['device']

    @property
    def sweep(self) -> Dict[str, Any]:
        return self.data['sweep']

    @property
    def metrics(self) -> List[str]:
        return list(self.data['metrics'])

    @property
    def gate(self) -> Dict[str, Any]:
        return self.data['gate']

    @property
    def nulling(self) -> Dict[str, Any]:
        return self.data['nulling']

    @property
    def residual(self) -> Dict[str, Any]:
        return self.data['residual']

    @property
    def decoherence(self) -> Dict[str, Any]:
        return self.data['decoherence']

    @property
    def compare(self) -> Dict[str, Any]:
        return self.data['compare']

    @property
    def output(self) -> str:
        return self.data['output']

    @property
    def seed(self) -> int:
        return int(self.data['seed'])

    @property
    def threads(self) -> int:
        return int(self.data['threads'])

    def with_overrides(self, **overrides) -> 'RunConfig':
        data = copy.deepcopy(self.data)
        for key, value in overrides.items():
            if value is not None:
                data[key] = value
        return RunConfig(data=_validate(data), source=self.source)

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2)


def _transmon(e_c: float, e_j: float) -> Dict[str, float]:
    return {'e_c': e_c, 'e_j': e_j}


def default_coupler(kind: str) -> Dict[str, Any]:
    if kind == 'dtc':
        return {
            'type': 'dtc', 'transmon_a': _transmon(0.25, 9.0), 'transmon_b': _transmon(0.25, 9.0),
            'e_j_squid_sum': 7.0, 'asymmetry': 0.0, 'phi_ext_squid': 0.0, 'phi_ext_main': 0.0,
            'j_cap_intermode': 0.1, 'crosstalk_compensated': True, 'flux_line': 'squid',
            'j_c': 0.55, 'stray': None,
        }
    if kind == 'stc':
        return {'type': 'stc', 'transmon': _transmon(0.32, 55.0), 'phi_ext': 0.0, 'j_c': 0.5, 'j_12': 0.125}
    raise ConfigError(f"unknown coupler type '{kind}'", field='device.coupler.type')


def get_default_config() -> Dict[str, Any]:
    """
    Reference Type-1 device with every section at its default.

    Returns:
        Dict[str, Any]: full configuration
    """
    return {
        'device': {
            'fluxoniums': [
                {'e_c': 1.41, 'e_l': 0.80, 'e_j': 6.27, 'phi_ext': 'pi'},
                {'e_c': 1.30, 'e_l': 0.59, 'e_j': 5.71, 'phi_ext': 'pi'},
            ],
            'coupler': default_coupler('dtc'),
            'spectator': None,
            'truncation': {'fluxonium_levels': 6, 'coupler_levels': 4, 'energy_cutoff': None,
                           'max_dim': 6000, 'levels': {}},
            'fluxonium_basis': 60,
            'charge_basis': 41,
            'transmon_mode': 'exact_charge',
        },
        'sweep': {'axis': 'couplers.c.phi_ext_squid', 'start': 0.0, 'stop': '2*pi', 'points': 101},
        'metrics': ['zz_ghz', 'max_shift_ghz', 'hyb_max', 'dress_00', 'dress_11'],
        'gate': {
            'transition': '11-21', 't_g': [50.0, 100.0], 'ramp': 3.0, 'budget': 200,
            'idle_bias': None, 'interaction_bias': None, 'target_shift': None, 'bias_range': None,
            'levels': 20, 'record_every': None,
        },
        'nulling': {'metric': 'max_shift_ghz', 'scan': None},
        'residual': {'qubit': 0, 'start': 'pi/2', 'stop': 'pi', 'points': 41},
        'decoherence': {
            'a_phi': 1e-5, 't1_21': 1e-5, 'tphi_white_21': 1e-5,
            'transitions': ['00-10', '00-01', '11-21'],
        },
        'compare': {
            'transition': '12', 'formula': 'full', 'start': 0.0, 'stop': 'pi/2', 'points': 5,
            'window': 1.0, 'scan_points': 81,
        },
        'output': 'data',
        'seed': 0,
        'threads': 1,
    }


def _merge(defaults: Any, given: Any, path: str, opaque=_OPAQUE) -> Any:
    """Fill ``given`` from ``defaults``; keys absent from the defaults are errors."""
    if isinstance(defaults, dict) and isinstance(given, dict) and path not in opaque:
        unknown = sorted(set(given) - set(defaults))
        if unknown:
            where = f"{path}.{unknown[0]}" if path else unknown[0]
            raise ConfigError('unknown key', field=where)
        merged = copy.deepcopy(defaults)
        for key, value in given.items():
            merged[key] = _merge(defaults[key], value, f"{path}.{key}" if path else key, opaque)
        return merged
    return copy.deepcopy(given)


def _require_number(value: Any, where: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=where)
    if not math.isfinite(value) or (positive and value <= 0):
        raise ConfigError(f"expected a {'positive ' if positive else ''}finite number, got {value}", field=where)
    return float(value)


def _require_int(value: Any, where: str, minimum: int) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"expected an integer, got {value!r}", field=where)
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected an integer, got {value!r}", field=where) from None
    if number != value or number < minimum:
        raise ConfigError(f"expected an integer of at least {minimum}, got {value!r}", field=where)
    return number


def _check_keys(section: Dict[str, Any], allowed, required, where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError('expected an object', field=where)
    for key in section:
        if key not in allowed:
            raise ConfigError('unknown key', field=f"{where}.{key}")
    for key in required:
        if key not in section:
            raise ConfigError('missing required key', field=f"{where}.{key}")


def _validate_fluxonium(entry: Dict[str, Any], where: str) -> Dict[str, Any]:
    _check_keys(entry, _FLUXONIUM_KEYS + ('phi_ext',), _FLUXONIUM_KEYS, where)
    for key in _FLUXONIUM_KEYS:
        _require_number(entry[key], f"{where}.{key}", positive=key != 'e_j')
    entry.setdefault('phi_ext', 'pi')
    parse_angle(entry['phi_ext'], f"{where}.phi_ext")
    return entry


def _validate_coupler(entry: Dict[str, Any], where: str) -> Dict[str, Any]:
    if not isinstance(entry, dict):
        raise ConfigError('expected an object', field=where)
    defaults = default_coupler(entry.get('type', 'dtc'))
    merged = _merge(defaults, entry, where, opaque=())
    transmons = ('transmon_a', 'transmon_b') if merged['type'] == 'dtc' else ('transmon',)
    for name in transmons:
        _check_keys(merged[name], _TRANSMON_KEYS, _TRANSMON_KEYS, f"{where}.{name}")
        for key in _TRANSMON_KEYS:
            _require_number(merged[name][key], f"{where}.{name}.{key}", positive=True)
    if merged['type'] == 'dtc':
        if merged['flux_line'] not in ('squid', 'main'):
            raise ConfigError(f"flux_line must be 'squid' or 'main'", field=f"{where}.flux_line")
        if merged['stray'] is not None:
            _check_keys(merged['stray'], ('j_nnn', 'j_nnnn'), ('j_nnn', 'j_nnnn'), f"{where}.stray")
    return merged


def _validate(data: Dict[str, Any]) -> Dict[str, Any]:
    device = data['device']
    fluxoniums = device['fluxoniums']
    if not isinstance(fluxoniums, list) or len(fluxoniums) != 2:
        raise ConfigError('expected a list of two fluxoniums', field='device.fluxoniums')
    device['fluxoniums'] = [_validate_fluxonium(f, f"device.fluxoniums[{k}]") for k, f in enumerate(fluxoniums)]
    device['coupler'] = _validate_coupler(device['coupler'], 'device.coupler')
    if device['spectator'] is not None:
        spectator = device['spectator']
        _check_keys(spectator, ('fluxonium', 'coupler'), ('fluxonium', 'coupler'), 'device.spectator')
        spectator['fluxonium'] = _validate_fluxonium(spectator['fluxonium'], 'device.spectator.fluxonium')
        spectator['coupler'] = _validate_coupler(spectator['coupler'], 'device.spectator.coupler')
        if spectator['coupler']['type'] != 'dtc':
            raise ConfigError('spectator coupler must be a dtc', field='device.spectator.coupler.type')
    sweep = data['sweep']
    _require_int(sweep['points'], 'sweep.points', 2)
    if parse_angle(sweep['start'], 'sweep.start') == parse_angle(sweep['stop'], 'sweep.stop'):
        raise ConfigError('empty sweep range', field='sweep.stop')
    if not isinstance(data['metrics'], list) or not data['metrics']:
        raise ConfigError('expected a non-empty list of metric names', field='metrics')
    t_g = data['gate']['t_g']
    t_g = t_g if isinstance(t_g, list) else [t_g]
    for k, value in enumerate(t_g):
        _require_number(value, f"gate.t_g[{k}]", positive=True)
    data['gate']['t_g'] = t_g
    if data['gate']['idle_bias'] is not None:
        parse_angle(data['gate']['idle_bias'], 'gate.idle_bias')
    _require_int(data['threads'], 'threads', 1)
    seed = data['seed']
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError('seed must be an unsigned 64-bit integer', field='seed')
    return data


def parse_config(text: str, source: Optional[str] = None) -> RunConfig:
    try:
        given = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, line=e.lineno) from None
    if not isinstance(given, dict):
        raise ConfigError('top level must be an object', line=1)
    return RunConfig(data=_validate(_merge(get_default_config(), given, '')), source=source)


def load_config(path: Optional[str] = None) -> RunConfig:
    """
    Load and validate a JSON run configuration.

    Args:
        path: config file; the repository's config.json when omitted

    Returns:
        RunConfig: validated configuration with defaults filled in
    """
    config_path = path or DEFAULT_CONFIG_PATH
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            text = f.read()
    except FileNotFoundError:
        raise ConfigError(f"config file {config_path} not found") from None
    return parse_config(text, source=config_path)


# --- device construction ---

def _fluxonium_spec(entry: Dict[str, Any], where: str) -> FluxoniumSpec:
    return FluxoniumSpec(e_c=entry['e_c'], e_l=entry['e_l'], e_j=entry['e_j'],
                         phi_ext=parse_angle(entry['phi_ext'], f"{where}.phi_ext"))


def _coupler_spec(entry: Dict[str, Any], where: str):
    if entry['type'] == 'stc':
        return StcSpec(transmon=TransmonSpec(**entry['transmon']),
                       phi_ext=parse_angle(entry['phi_ext'], f"{where}.phi_ext"))
    return DtcSpec(transmon_a=TransmonSpec(**entry['transmon_a']), transmon_b=TransmonSpec(**entry['transmon_b']),
                   e_j_squid_sum=entry['e_j_squid_sum'], asymmetry=entry['asymmetry'],
                   phi_ext_squid=parse_angle(entry['phi_ext_squid'], f"{where}.phi_ext_squid"),
                   phi_ext_main=parse_angle(entry['phi_ext_main'], f"{where}.phi_ext_main"),
                   j_cap_intermode=entry['j_cap_intermode'],
                   crosstalk_compensated=bool(entry['crosstalk_compensated']), flux_line=entry['flux_line'])


def _coupler_links(name: str, entry: Dict[str, Any], qubit_a: str, qubit_b: str):
    j_c = entry['j_c']
    if entry['type'] == 'stc':
        return (Coupling(qubit_a, name, j_c), Coupling(qubit_b, name, j_c), Coupling(qubit_a, qubit_b, entry['j_12'])), ()
    links = (Coupling(qubit_a, f"{name}1", j_c), Coupling(qubit_b, f"{name}2", j_c))
    stray = entry.get('stray')
    extra = ()
    if stray:
        extra = (Coupling(qubit_a, f"{name}2", stray['j_nnn']), Coupling(qubit_b, f"{name}1", stray['j_nnn']),
                 Coupling(qubit_a, qubit_b, stray['j_nnnn']))
    return links, extra


def build_device(config: RunConfig) -> DeviceSpec:
    """DeviceSpec from the device section; a spectator adds q3 behind coupler ``s`` on q1."""
    section = config.device
    try:
        fluxoniums = [_fluxonium_spec(f, f"device.fluxoniums[{k}]") for k, f in enumerate(section['fluxoniums'])]
        couplers = {'c': _coupler_spec(section['coupler'], 'device.coupler')}
        couplings, extra = _coupler_links('c', section['coupler'], 'q1', 'q2')
        if section['spectator'] is not None:
            spectator = section['spectator']
            fluxoniums.append(_fluxonium_spec(spectator['fluxonium'], 'device.spectator.fluxonium'))
            couplers['s'] = _coupler_spec(spectator['coupler'], 'device.spectator.coupler')
            links, stray = _coupler_links('s', spectator['coupler'], 'q1', 'q3')
            couplings, extra = couplings + links, extra + stray
        truncation = Truncation(**section['truncation'])
        return DeviceSpec(fluxoniums=tuple(fluxoniums), couplers=couplers, couplings=couplings,
                          extra_couplings=extra, truncation=truncation,
                          fluxonium_basis=int(section['fluxonium_basis']),
                          charge_basis=int(section['charge_basis']), transmon_mode=section['transmon_mode'])
    except (TypeError, CircuitError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e), field='device') from e


def axis_values(section: Dict[str, Any], where: str) -> np.ndarray:
    start = parse_angle(section['start'], f"{where}.start")
    stop = parse_angle(section['stop'], f"{where}.stop")
    return np.linspace(start, stop, int(section['points']))


# quick check of the shipped config
if __name__ == "__main__":
    print(load_config().to_json())
