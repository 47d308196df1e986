import logging
import os

from dotenv import load_dotenv

load_dotenv()

_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logger(name, log_file=None, level=None):
    """Configure a named logger.

    Level comes from ``level`` or the LOG_LEVEL environment variable (a .env file
    is honoured); a file handler is added only when ``log_file`` is given.
    Calling it twice for the same name does not duplicate handlers.
    """
    if level is None:
        level = os.getenv('LOG_LEVEL', 'INFO').upper()

    logger = logging.getLogger(name)
    logger.setLevel(level)
    if logger.handlers:
        return logger

    formatter = logging.Formatter(_FORMAT)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir)
        handler = logging.FileHandler(log_file, encoding='utf-8')
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    logger.propagate = False
    return logger
