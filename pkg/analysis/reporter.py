"""
Result files: CSV tables and JSON summaries under the output directory.
"""
import json
import math
import os
from typing import Any, Dict

import pandas as pd

from utils.logger import setup_logger

logger = setup_logger('reporter')

FLOAT_FORMAT = '%.12g'


def write_csv(frame: pd.DataFrame, path: str) -> str:
    """UTF-8, comma separated, header row, 12 significant digits."""
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding='utf-8', lineterminator='\n')
    logger.info(f"wrote {len(frame)} rows to {path}")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return 'inf' if value > 0 else ('-inf' if value < 0 else 'nan')
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, 'item'):
        return _jsonable(value.item())
    return value


def write_json(data: Dict[str, Any], path: str) -> str:
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_jsonable(data), f, indent=2, ensure_ascii=False)
    return path
