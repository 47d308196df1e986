# main.py
import argparse
import json
import sys
import time

from cli.commands import COMMANDS
from config.settings import load_config
from core.errors import CircuitError, ConfigError
from utils.logger import setup_logger

logger = setup_logger('main')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Fluxonium plasmon-coupler simulator')
    parser.add_argument('command', choices=sorted(COMMANDS))
    parser.add_argument('--config', default=None, help='JSON run configuration (default: config.json)')
    parser.add_argument('--out', default=None, help='output directory (default: data/)')
    parser.add_argument('--threads', type=int, default=None, help='worker threads for sweeps')
    parser.add_argument('--seed', type=int, default=None, help='unsigned 64-bit optimizer seed')
    return parser


def _error_line(exc: Exception) -> str:
    payload = {'error': type(exc).__name__, 'message': str(exc)}
    if isinstance(exc, ConfigError):
        payload.update({'field': exc.field, 'line': exc.line})
    return json.dumps(payload)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        logger.info(f"Loading configuration {args.config or 'config.json'}...")
        config = load_config(args.config).with_overrides(output=args.out, threads=args.threads, seed=args.seed)

        started = time.perf_counter()
        logger.info(f"Running '{args.command}' into {config.output}/")
        written = COMMANDS[args.command](config)
        for path in written:
            logger.info(f"   - {path}")
        logger.info(f"'{args.command}' finished in {time.perf_counter() - started:.1f} s")
        return 0
    except CircuitError as e:
        logger.error(f"'{args.command}' failed: {e}")
        print(_error_line(e), file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception(f"Unexpected error in '{args.command}': {e}")
        print(_error_line(e), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
