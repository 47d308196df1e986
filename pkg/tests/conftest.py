import json
import os
import sys

import pytest

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
if REPO_ROOT not in sys.path:
    sys.path.insert(0, REPO_ROOT)

from core.device import DeviceSpec, Truncation
from core.presets import Q1, Q2, stc_device, type1_device

TINY_TRUNCATION = Truncation(fluxonium_levels=3, coupler_levels=2)
TINY_BASIS = {'fluxonium_basis': 30, 'charge_basis': 21}


def tiny_type1(phi_squid: float = 0.0, **kwargs) -> DeviceSpec:
    """Type-1 device truncated to 36 product states."""
    kwargs.setdefault('truncation', TINY_TRUNCATION)
    return type1_device(phi_squid, **TINY_BASIS, **kwargs)


@pytest.fixture
def tiny_device():
    return tiny_type1()


@pytest.fixture
def tiny_stc():
    return stc_device(0.0, truncation=TINY_TRUNCATION, **TINY_BASIS)


@pytest.fixture
def uncoupled_pair():
    return DeviceSpec(fluxoniums=(Q1, Q2), truncation=Truncation(fluxonium_levels=4), fluxonium_basis=30)


@pytest.fixture
def tiny_config():
    """Run configuration for the 36-state device with a three-point sweep."""
    return {
        'device': {
            'truncation': {'fluxonium_levels': 3, 'coupler_levels': 2},
            'fluxonium_basis': 30,
            'charge_basis': 21,
        },
        'sweep': {'axis': 'couplers.c.phi_ext_squid', 'start': 0.0, 'stop': 'pi/2', 'points': 3},
        'metrics': ['zz_ghz', 'max_shift_ghz'],
        'gate': {'t_g': [20.0]},
    }


@pytest.fixture
def write_config(tmp_path):
    def _write(data, name='run.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)
    return _write
