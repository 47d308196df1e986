"""
Reference devices. Energies in GHz, phases in radians.
"""
import math
from typing import Optional

from core.circuits import DtcSpec, FluxoniumSpec, StcSpec, TransmonSpec
from core.device import Coupling, DeviceSpec, Truncation
from core.errors import ParameterDomainError

Q1 = FluxoniumSpec(e_c=1.41, e_l=0.80, e_j=6.27, phi_ext=math.pi)
Q2 = FluxoniumSpec(e_c=1.30, e_l=0.59, e_j=5.71, phi_ext=math.pi)
Q3 = FluxoniumSpec(e_c=1.33, e_l=0.60, e_j=5.40, phi_ext=math.pi)

DTC_TRANSMON = TransmonSpec(e_c=0.25, e_j=9.0)
STC_TRANSMON = TransmonSpec(e_c=0.32, e_j=55.0)
TYPE2_TRANSMON = TransmonSpec(e_c=0.25, e_j=20.0)

DTC_J_C = 0.55
DTC_J_CAP = 0.10
DTC_E_J12 = 7.0
TYPE2_E_J12 = 3.5
STC_J_C = 0.50
STC_J_12 = 0.125
NNN_STRAY = 0.025
NNNN_STRAY = 0.010
PLASMON_SCALE = 5.0

COUPLER_SETS = {
    'A': (TransmonSpec(e_c=0.20, e_j=30.0), 7.0),
    'B': (TransmonSpec(e_c=0.25, e_j=40.0), 18.0),
}


def _dtc_couplings(name: str, qubit_a: str, qubit_b: str, j_c: float) -> tuple:
    return (Coupling(qubit_a, f"{name}1", j_c), Coupling(qubit_b, f"{name}2", j_c))


def _stray_couplings(name: str, qubit_a: str, qubit_b: str,
                     j_nnn: float = NNN_STRAY, j_nnnn: float = NNNN_STRAY) -> tuple:
    return (Coupling(qubit_a, f"{name}2", j_nnn),
            Coupling(qubit_b, f"{name}1", j_nnn),
            Coupling(qubit_a, qubit_b, j_nnnn))


def type1_coupler(phi_squid: float = 0.0, transmon_a: TransmonSpec = DTC_TRANSMON,
                  transmon_b: Optional[TransmonSpec] = None, asymmetry: float = 0.0,
                  compensated: bool = True, phi_main: float = 0.0,
                  j_cap: float = DTC_J_CAP, e_j12: float = DTC_E_J12) -> DtcSpec:
    return DtcSpec(transmon_a=transmon_a, transmon_b=transmon_b or transmon_a,
                   e_j_squid_sum=e_j12, asymmetry=asymmetry, phi_ext_squid=phi_squid,
                   phi_ext_main=phi_main, j_cap_intermode=j_cap,
                   crosstalk_compensated=compensated, flux_line='squid')


def type2_coupler(phi_main: float = 0.0, transmon: TransmonSpec = TYPE2_TRANSMON,
                  e_j12: float = TYPE2_E_J12, j_cap: float = DTC_J_CAP,
                  transmon_b: Optional[TransmonSpec] = None) -> DtcSpec:
    return DtcSpec(transmon_a=transmon, transmon_b=transmon_b or transmon, e_j_squid_sum=e_j12,
                   asymmetry=0.0, phi_ext_squid=0.0, phi_ext_main=phi_main, j_cap_intermode=j_cap,
                   crosstalk_compensated=False, flux_line='main')


def dtc_device(coupler: DtcSpec, fluxonium_1: FluxoniumSpec = Q1, fluxonium_2: FluxoniumSpec = Q2,
               j_c: float = DTC_J_C, stray: bool = False,
               truncation: Optional[Truncation] = None, **kwargs) -> DeviceSpec:
    extra = _stray_couplings('c', 'q1', 'q2') if stray else ()
    return DeviceSpec(fluxoniums=(fluxonium_1, fluxonium_2), couplers={'c': coupler},
                      couplings=_dtc_couplings('c', 'q1', 'q2', j_c), extra_couplings=extra,
                      truncation=truncation or Truncation(), **kwargs)


def type1_device(phi_squid: float = 0.0, **kwargs) -> DeviceSpec:
    """Two-qubit device with a SQUID-biased double-transmon coupler."""
    coupler_args = {k: kwargs.pop(k) for k in list(kwargs)
                    if k in ('transmon_a', 'transmon_b', 'asymmetry', 'compensated', 'phi_main', 'j_cap', 'e_j12')}
    return dtc_device(type1_coupler(phi_squid, **coupler_args), **kwargs)


def type2_device(phi_main: float = 0.0, coupler_set: Optional[str] = None, **kwargs) -> DeviceSpec:
    """Two-qubit device with a main-loop-biased double-transmon coupler."""
    coupler_args = {k: kwargs.pop(k) for k in list(kwargs) if k in ('transmon', 'transmon_b', 'e_j12', 'j_cap')}
    if coupler_set is not None:
        transmon, e_j12 = COUPLER_SETS[coupler_set]
        coupler_args.setdefault('transmon', transmon)
        coupler_args.setdefault('e_j12', e_j12)
    return dtc_device(type2_coupler(phi_main, **coupler_args), **kwargs)


def stc_device(phi_ext: float = 0.0, fluxonium_1: FluxoniumSpec = Q1, fluxonium_2: FluxoniumSpec = Q2,
               j_c: float = STC_J_C, j_12: float = STC_J_12,
               truncation: Optional[Truncation] = None, **kwargs) -> DeviceSpec:
    """Two-qubit device with a single flux-tunable transmon coupler."""
    couplings = (Coupling('q1', 'c', j_c), Coupling('q2', 'c', j_c), Coupling('q1', 'q2', j_12))
    return DeviceSpec(fluxoniums=(fluxonium_1, fluxonium_2),
                      couplers={'c': StcSpec(transmon=STC_TRANSMON, phi_ext=phi_ext)},
                      couplings=couplings, truncation=truncation or Truncation(), **kwargs)


def spectator_device(gate_bias: float, spectator_bias: float, setup: str = 'type1',
                     truncation: Optional[Truncation] = None) -> DeviceSpec:
    """Q1-Q2 gate pair plus spectator Q3 attached to Q1 through a second coupler ``s``.

    The default truncation keeps product states within three plasmon energies of the ground state.
    """
    if setup == 'type1':
        gate, spectator = type1_coupler(gate_bias), type1_coupler(spectator_bias)
    elif setup == 'type2':
        gate, spectator = type2_coupler(gate_bias), type2_coupler(spectator_bias)
    else:
        raise ParameterDomainError(f"unknown setup '{setup}'")
    couplings = _dtc_couplings('c', 'q1', 'q2', DTC_J_C) + _dtc_couplings('s', 'q1', 'q3', DTC_J_C)
    if truncation is None:
        truncation = Truncation(fluxonium_levels=4, coupler_levels=3, energy_cutoff=3.0 * PLASMON_SCALE, max_dim=6000)
    return DeviceSpec(fluxoniums=(Q1, Q2, Q3), couplers={'c': gate, 's': spectator},
                      couplings=couplings, truncation=truncation)
