import functools
import logging
import sys
import time
from logging.handlers import TimedRotatingFileHandler
from typing import Any, Callable, Optional, TypeVar, Union

from ..config.settings import config

F = TypeVar("F", bound=Callable[..., Any])

LOG_FORMAT = '[%(asctime)s] [%(levelname)s] [%(classname)s] %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class SafeFormatter(logging.Formatter):
    """
    Formatter que garantiza que todos los campos esperados
    existan en el LogRecord.
    """

    def format(self, record: logging.LogRecord) -> str:
        if not hasattr(record, "classname"):
            record.classname = "MskDx"
        return super().format(record)


class ColoredFormatter(SafeFormatter):
    """Colores ANSI por nivel; solo para consola."""

    COLORS = {
        'DEBUG': '\033[94m',
        'INFO': '\033[92m',
        'WARNING': '\033[93m',
        'ERROR': '\033[91m',
        'CRITICAL': '\033[95m',
        'ENDC': '\033[0m',
    }

    def format(self, record: logging.LogRecord) -> str:
        message = super().format(record)
        color = self.COLORS.get(record.levelname, self.COLORS['ENDC'])
        return f"{color}{message}{self.COLORS['ENDC']}"


class ClassLoggerAdapter(logging.LoggerAdapter):
    """Inyecta el nombre de la clase en cada registro."""

    def process(self, msg, kwargs):
        kwargs.setdefault("extra", {})
        kwargs["extra"]["classname"] = self.extra.get("classname", "N/A")
        return msg, kwargs


def get_logger(
        name: str = "pymskdx",
        classname: Optional[str] = None
) -> Union[logging.Logger, logging.LoggerAdapter]:
    """
    Factory de logger.

    - Configura el logger una sola vez
    - Retorna LoggerAdapter si se pasa classname
    """
    logger = logging.getLogger(name)

    if not getattr(logger, "_configured", False):
        _configure_logger(logger)
        logger._configured = True  # type: ignore[attr-defined]

    if classname:
        return ClassLoggerAdapter(logger, {"classname": classname})

    return logger


def _resolve_level() -> int:
    if config.DEBUG:
        return logging.DEBUG
    level = logging.getLevelName((config.LOG_LEVEL or "INFO").upper())
    return level if isinstance(level, int) else logging.INFO


def _configure_logger(logger: logging.Logger) -> None:
    logger.setLevel(_resolve_level())
    logger.propagate = False

    base_formatter = SafeFormatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    # stderr: stdout queda para tablas y JSON de la CLI
    console_handler = logging.StreamHandler(sys.stderr)
    if (config.DEBUG and sys.stderr.isatty()) or config.FORCE_COLOR:
        console_handler.setFormatter(ColoredFormatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    else:
        console_handler.setFormatter(base_formatter)
    logger.addHandler(console_handler)

    if not config.LOG_TO_FILE:
        return

    try:
        file_handler = TimedRotatingFileHandler(
            filename=config.get_log_path() / "app.log",
            when="midnight",
            interval=1,
            backupCount=config.LOG_BACKUP_COUNT,
            encoding="utf-8",
            utc=True,
        )
        file_handler.setFormatter(base_formatter)
        file_handler.suffix = "%Y-%m-%d"
        logger.addHandler(file_handler)
    except (PermissionError, OSError) as exc:
        print(f"⚠️ No se pudo configurar el log a archivo: {exc}", file=sys.stderr)


def log_execution(func: F) -> F:
    """Registra inicio, fin y duración de un comando."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        log = get_logger(classname=func.__name__)
        log.debug("Inicio de %s", func.__name__)
        started = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            log.debug("Fin de %s (%.3fs)", func.__name__, time.perf_counter() - started)

    return wrapper  # type: ignore[return-value]


# Logger por defecto para compatibilidad
logger = get_logger()
