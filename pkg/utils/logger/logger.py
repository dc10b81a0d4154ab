import os
import time
import yaml
import asyncio
import logging
import functools
import logging.config
from datetime import datetime
from typing import Any, Callable, Optional, TypeVar, cast
from pathlib import Path
from concurrent.futures import ThreadPoolExecutor

from utils.singleton import singleton

F = TypeVar('F', bound=Callable[..., Any])

LOGGER_NAME = 'gsqg_lab'
DEFAULT_LOG_DIR = Path(__file__).parent.parent.parent / 'logs'


@singleton
class LabLogger:
    """
    Process-wide logger for the lab.

    Configured once from ``logger.yaml``; the file handler gets a timestamped
    file inside ``GSQG_LOG_DIR`` (default ``<project>/logs``). Numerical
    services log from worker threads, which the standard handlers tolerate,
    so ``log`` is synchronous; ``alog`` is the awaitable variant used by the
    command pipeline.
    """

    valid_levels = {'debug', 'info', 'warning', 'error', 'critical'}

    def __init__(self, config_path: Optional[Path] = Path(__file__).parent / 'logger.yaml',
                 log_dir: Optional[Path] = None):
        """
        Args:
            config_path: YAML dictConfig file, None selects the built-in defaults
            log_dir: Directory for log files, overrides GSQG_LOG_DIR
        """
        self.__logger: Optional[logging.Logger] = None
        self.__executor = ThreadPoolExecutor(max_workers=1, thread_name_prefix='lab-log')
        self.log_file: Optional[Path] = None
        self.__initialize_logger(config_path, log_dir)

    def __initialize_logger(self, config_path: Optional[Path], log_dir: Optional[Path] = None) -> None:
        try:
            logs_dir = Path(log_dir or os.getenv('GSQG_LOG_DIR') or DEFAULT_LOG_DIR)
            logs_dir.mkdir(parents=True, exist_ok=True)

            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            self.log_file = logs_dir / f"gsqg_{timestamp}.log"

            if config_path:
                self.__configure_from_yaml(config_path, self.log_file)
            else:
                self.__configure_defaults(self.log_file)

            self.__logger = logging.getLogger(LOGGER_NAME)
            level = os.getenv('GSQG_LOG_LEVEL')
            if level and level.lower() in self.valid_levels:
                self.__logger.setLevel(level.upper())

        except FileNotFoundError:
            raise RuntimeError(f"Configuration file not found: {config_path}")

        except Exception as e:
            logging.basicConfig(
                level=logging.INFO,
                format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            self.__logger = logging.getLogger(f'{LOGGER_NAME}_fallback')
            self.__logger.error(f"Failed to initialize logger: {str(e)}")

    def __configure_from_yaml(self, config_path: Path, log_filepath: Path) -> None:
        """
        Configure logging from a YAML dictConfig file, pointing every file
        handler at ``log_filepath``.
        """
        if not Path(config_path).exists():
            raise FileNotFoundError(config_path)
        try:
            with open(config_path, 'r') as file:
                config = yaml.safe_load(file)

            for handler in config.get('handlers', {}).values():
                if handler.get('filename'):
                    handler['filename'] = str(log_filepath)

            logging.config.dictConfig(config)
        except Exception as e:
            raise RuntimeError(f"Failed to load logger configuration from {config_path}: {str(e)}")

    def __configure_defaults(self, log_filepath: Path) -> None:
        logging.config.dictConfig({
            'version': 1,
            'disable_existing_loggers': False,
            'formatters': {
                'standard': {'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s'},
            },
            'handlers': {
                'console': {
                    'class': 'logging.StreamHandler',
                    'level': 'INFO',
                    'formatter': 'standard',
                    'stream': 'ext://sys.stderr',
                },
                'file': {
                    'class': 'logging.FileHandler',
                    'level': 'DEBUG',
                    'formatter': 'standard',
                    'filename': str(log_filepath),
                    'encoding': 'utf8',
                },
            },
            'loggers': {
                LOGGER_NAME: {'handlers': ['console', 'file'], 'level': 'DEBUG', 'propagate': False},
            },
        })

    def __normalize(self, level: str) -> str:
        return level.lower() if level.lower() in self.valid_levels else 'info'

    def log(self, level: str, message: str) -> None:
        """
        Log a message at the specified level; unknown levels fall back to INFO.

        Args:
            level: The log level (debug, info, warning, error, critical)
            message: The message to log
        """
        if not self.__logger:
            return
        log_func = getattr(self.__logger, self.__normalize(level))
        log_func(message, stacklevel=2)

    async def alog(self, level: str, message: str) -> None:
        """Awaitable log call; the write happens on the logger's own thread."""
        if not self.__logger:
            return
        log_func = getattr(self.__logger, self.__normalize(level))
        loop = asyncio.get_running_loop()
        await loop.run_in_executor(self.__executor, functools.partial(log_func, message, stacklevel=2))

    def is_enabled_for(self, level: str) -> bool:
        if not self.__logger:
            return False
        return self.__logger.isEnabledFor(getattr(logging, self.__normalize(level).upper()))

    def log_time_exec(self, func: F) -> F:
        """
        Decorator logging the wall time of a sync or async callable at DEBUG.

        Args:
            func: The function to be decorated

        Returns:
            The wrapped function
        """

        @functools.wraps(func)
        async def async_wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                return await func(*args, **kwargs)
            finally:
                elapsed = time.perf_counter() - start_time
                self.log('debug', f"'{func.__qualname__}' finished in {elapsed:.4f} s")

        @functools.wraps(func)
        def sync_wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                elapsed = time.perf_counter() - start_time
                self.log('debug', f"'{func.__qualname__}' finished in {elapsed:.4f} s")

        if asyncio.iscoroutinefunction(func):
            return cast(F, async_wrapper)
        return cast(F, sync_wrapper)
