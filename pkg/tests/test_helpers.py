import json
import logging
import math

import numpy as np
import pandas as pd
import pytest

from analysis.reporter import write_csv, write_json
from core.errors import ConfigError, ParameterDomainError
from utils.helpers import get_path, hermiticity_defect, parse_angle, set_path, wrap_phase
from utils.logger import setup_logger


class TestAngles:
    @pytest.mark.parametrize('text, expected', [
        ('pi', math.pi),
        ('-pi/2', -math.pi / 2),
        ('0.5*pi', math.pi / 2),
        ('2 * pi', 2.0 * math.pi),
        ('1.25', 1.25),
        (3, 3.0),
    ])
    def test_parse(self, text, expected):
        assert parse_angle(text) == pytest.approx(expected)

    @pytest.mark.parametrize('value', ['tau', True, None])
    def test_parse_invalid(self, value):
        with pytest.raises(ConfigError) as info:
            parse_angle(value, 'sweep.start')
        assert info.value.field == 'sweep.start'

    def test_wrap_range(self):
        assert wrap_phase(math.pi) == pytest.approx(math.pi)
        assert wrap_phase(-math.pi) == pytest.approx(math.pi)
        assert wrap_phase(3.0 * math.pi / 2.0) == pytest.approx(-math.pi / 2.0)


class TestPaths:
    def test_set_is_not_in_place(self, tiny_device):
        changed = set_path(tiny_device, 'couplers.c.phi_ext_squid', 0.7)
        assert get_path(changed, 'couplers.c.phi_ext_squid') == 0.7
        assert get_path(tiny_device, 'couplers.c.phi_ext_squid') == 0.0

    def test_indexed_fluxonium(self, tiny_device):
        changed = set_path(tiny_device, 'fluxoniums.1.phi_ext', 3.0)
        assert changed.fluxoniums[1].phi_ext == 3.0
        assert changed.fluxoniums[0] == tiny_device.fluxoniums[0]

    @pytest.mark.parametrize('path', ['', 'couplers.x.phi_ext', 'fluxoniums.5.e_c', 'fluxoniums.0.flux'])
    def test_bad_paths(self, tiny_device, path):
        with pytest.raises(ParameterDomainError):
            get_path(tiny_device, path)

    def test_hermiticity_defect(self):
        assert hermiticity_defect(np.eye(3)) == 0.0
        assert hermiticity_defect(np.zeros((2, 2))) == 0.0
        assert hermiticity_defect(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(math.sqrt(2.0))


class TestReporter:
    def test_csv_precision_and_header(self, tmp_path):
        path = write_csv(pd.DataFrame({'a': [1.0 / 3.0], 'b': ['x']}), str(tmp_path / 'sub' / 't.csv'))
        with open(path, 'rb') as f:
            assert f.read() == b'a,b\n0.333333333333,x\n'

    def test_json_non_finite(self, tmp_path):
        path = write_json({'t': math.inf, 'v': np.float64(0.5), 'l': (1, math.nan)}, str(tmp_path / 'e.json'))
        with open(path, 'r', encoding='utf-8') as f:
            assert json.load(f) == {'t': 'inf', 'v': 0.5, 'l': [1, 'nan']}


class TestLogger:
    def test_file_handler_only_on_request(self, tmp_path, monkeypatch):
        monkeypatch.setenv('LOG_FILE', str(tmp_path / 'env.log'))
        logger = setup_logger('test-console-only')
        assert [type(h) for h in logger.handlers] == [logging.StreamHandler]
        assert not (tmp_path / 'env.log').exists()

    def test_explicit_log_file(self, tmp_path):
        path = tmp_path / 'logs' / 'run.log'
        logger = setup_logger('test-with-file', log_file=str(path), level='DEBUG')
        logger.debug('written')
        for handler in logger.handlers:
            handler.flush()
        assert 'written' in path.read_text(encoding='utf-8')
        assert logger.level == logging.DEBUG

    def test_handlers_are_not_duplicated(self):
        first = setup_logger('test-once')
        assert setup_logger('test-once').handlers == first.handlers
