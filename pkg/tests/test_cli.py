import json
import math
import os

import numpy as np
import pandas as pd
import pytest

from cli.commands import COMMANDS, GATE_COLUMNS, cmd_decoherence
from config.settings import load_config
from main import build_parser, main


def _json_lines(text: str):
    return [json.loads(line) for line in text.splitlines() if line.startswith('{')]


class TestMain:
    def test_parser_lists_every_command(self):
        assert build_parser().parse_args(['gate']).command == 'gate'
        assert set(COMMANDS) == {'spectrum', 'sweep', 'nulling', 'residual', 'gate', 'spectator',
                                 'decoherence', 'compare'}

    def test_sweep_writes_csv_and_echo(self, tiny_config, write_config, tmp_path):
        out = str(tmp_path / 'out')
        assert main(['sweep', '--config', write_config(tiny_config), '--out', out]) == 0
        frame = pd.read_csv(os.path.join(out, 'sweep.csv'))
        assert list(frame.columns[:3]) == ['couplers.c.phi_ext_squid', 'zz_ghz', 'max_shift_ghz']
        assert len(frame) == 3
        with open(os.path.join(out, 'config_echo.json'), 'r', encoding='utf-8') as f:
            echo = json.load(f)
        assert echo['output'] == out
        assert echo['sweep']['stop'] == 'pi/2'

    def test_repeated_runs_are_identical(self, tiny_config, write_config, tmp_path):
        out = str(tmp_path / 'out')
        path = write_config(tiny_config)
        contents = []
        for _ in range(2):
            assert main(['sweep', '--config', path, '--out', out, '--threads', '2']) == 0
            with open(os.path.join(out, 'sweep.csv'), 'rb') as f:
                contents.append(f.read())
        assert contents[0] == contents[1]

    def test_config_error_exit_code(self, write_config, tmp_path, capsys):
        code = main(['sweep', '--config', write_config({'seed': -1}), '--out', str(tmp_path)])
        assert code != 0
        (error,) = _json_lines(capsys.readouterr().err)
        assert error['error'] == 'ConfigError'
        assert error['field'] == 'seed'

    def test_parse_error_reports_line(self, tmp_path, capsys):
        path = tmp_path / 'broken.json'
        path.write_text('{\n  "seed": \n}', encoding='utf-8')
        assert main(['sweep', '--config', str(path)]) != 0
        (error,) = _json_lines(capsys.readouterr().err)
        assert error['line'] == 3

    def test_spectator_needs_third_fluxonium(self, tiny_config, write_config, tmp_path, capsys):
        assert main(['spectator', '--config', write_config(tiny_config), '--out', str(tmp_path)]) != 0
        (error,) = _json_lines(capsys.readouterr().err)
        assert error['field'] == 'device.spectator'


class TestCommands:
    def test_decoherence_tables(self, tiny_config, write_config, tmp_path):
        config = load_config(write_config(tiny_config)).with_overrides(output=str(tmp_path))
        written = cmd_decoherence(config)
        assert [os.path.basename(p) for p in written] == ['dephasing.csv', 'decoherence.csv', 'config_echo.json']
        dephasing = pd.read_csv(written[0])
        assert list(dephasing['transition']) == ['00-10', '00-01', '11-21']
        errors = pd.read_csv(written[1])
        assert list(errors.columns) == ['t_g_ns', 'error_t1', 'error_white', 'error_1f', 'error_total',
                                        'lindblad_t1']
        assert errors['error_total'].iloc[0] >= errors['error_t1'].iloc[0] + errors['error_white'].iloc[0]

    def test_gate_columns(self):
        assert GATE_COLUMNS == ['t_g_ns', 'fidelity', 'leakage', 'cond_phase_rad', 'omega_d_ghz', 'amp_ghz',
                                'phase_rel_rad', 'idle_bias', 'interaction_bias', 'evaluations', 'best_effort']

    def test_gate_idles_at_null_of_configured_sweep(self, tiny_config, write_config, tmp_path):
        tiny_config['gate'].update({'budget': 3, 'levels': 12, 'ramp': 1.0, 'interaction_bias': 0.0})
        out = str(tmp_path / 'out')
        assert main(['gate', '--config', write_config(tiny_config), '--out', out]) == 0
        frame = pd.read_csv(os.path.join(out, 'gate.csv'))
        assert list(frame.columns) == GATE_COLUMNS
        # shift falls monotonically up to pi/2
        assert frame['idle_bias'].iloc[0] == pytest.approx(math.pi / 2)
        assert frame['interaction_bias'].iloc[0] == 0.0
        assert frame['evaluations'].iloc[0] <= 3

    def test_configured_idle_bias(self, tiny_config, write_config, tmp_path):
        tiny_config['gate'].update({'budget': 3, 'levels': 12, 'ramp': 1.0,
                                    'idle_bias': 'pi', 'interaction_bias': 'pi/4'})
        out = str(tmp_path / 'out')
        assert main(['gate', '--config', write_config(tiny_config), '--out', out]) == 0
        frame = pd.read_csv(os.path.join(out, 'gate.csv'))
        assert np.allclose(frame[['idle_bias', 'interaction_bias']].iloc[0], [math.pi, math.pi / 4])
