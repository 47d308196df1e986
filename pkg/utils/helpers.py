import math
import re
from dataclasses import fields, is_dataclass, replace
from typing import Any, List, Union

import numpy as np

from core.errors import ConfigError, ParameterDomainError


def wrap_phase(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.remainder(float(angle), 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def hermiticity_defect(matrix: np.ndarray) -> float:
    """Relative Frobenius norm of the anti-Hermitian part."""
    norm = np.linalg.norm(matrix)
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(matrix - matrix.conj().T) / norm)


_ANGLE_RE = re.compile(
    r'^\s*(?P<sign>[-+]?)\s*(?:(?P<coef>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)\s*\*\s*)?pi'
    r'(?:\s*/\s*(?P<den>\d+(?:\.\d*)?))?\s*$'
)


def parse_angle(value: Union[str, float, int], field: str = 'angle') -> float:
    """Accept radians as a number or strings such as 'pi', '-pi/2', '0.5*pi'."""
    if isinstance(value, bool):
        raise ConfigError('expected an angle, got a boolean', field=field)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        match = _ANGLE_RE.match(value)
        if match is None:
            try:
                return float(value)
            except ValueError:
                raise ConfigError(f"cannot parse angle '{value}'", field=field) from None
        coef = float(match.group('coef') or 1.0)
        den = float(match.group('den') or 1.0)
        result = coef * math.pi / den
        return -result if match.group('sign') == '-' else result
    raise ConfigError(f'expected an angle, got {type(value).__name__}', field=field)


def _split_path(path: str) -> List[str]:
    parts = [p for p in path.split('.') if p]
    if not parts:
        raise ParameterDomainError(f"empty parameter path '{path}'")
    return parts


def _get_child(obj: Any, key: str) -> Any:
    if isinstance(obj, dict):
        if key not in obj:
            raise ParameterDomainError(f"unknown key '{key}' in parameter path")
        return obj[key]
    if isinstance(obj, (list, tuple)):
        try:
            return obj[int(key)]
        except (ValueError, IndexError):
            raise ParameterDomainError(f"bad index '{key}' in parameter path") from None
    if is_dataclass(obj):
        names = {f.name for f in fields(obj)}
        if key not in names:
            raise ParameterDomainError(f"'{type(obj).__name__}' has no field '{key}'")
        return getattr(obj, key)
    raise ParameterDomainError(f"cannot descend into {type(obj).__name__} with '{key}'")


def _set_child(obj: Any, key: str, value: Any) -> Any:
    if isinstance(obj, dict):
        new = dict(obj)
        new[key] = value
        return new
    if isinstance(obj, (list, tuple)):
        items = list(obj)
        items[int(key)] = value
        return type(obj)(items)
    return replace(obj, **{key: value})


def get_path(obj: Any, path: str) -> Any:
    """Resolve a dotted path like 'couplers.c.phi_ext_squid' or 'fluxoniums.0.phi_ext'."""
    current = obj
    for key in _split_path(path):
        current = _get_child(current, key)
    return current


def set_path(obj: Any, path: str, value: Any) -> Any:
    """Return a copy of ``obj`` with the scalar at ``path`` replaced (dataclasses are frozen)."""
    keys = _split_path(path)
    leaf = get_path(obj, path)
    if not isinstance(leaf, (int, float, np.floating, np.integer)) or isinstance(leaf, bool):
        raise ParameterDomainError(f"path '{path}' does not resolve to a scalar field")

    def _rebuild(node: Any, remaining: List[str]) -> Any:
        head = remaining[0]
        if len(remaining) == 1:
            return _set_child(node, head, float(value))
        return _set_child(node, head, _rebuild(_get_child(node, head), remaining[1:]))

    return _rebuild(obj, keys)
