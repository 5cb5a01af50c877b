"""
Structured logging configuration.
"""
import functools
import logging
import sys
import time
from typing import Any, Callable, Optional, TypeVar

import structlog
from structlog.stdlib import LoggerFactory

from src.config import settings

F = TypeVar("F", bound=Callable[..., Any])


def setup_logging(level: Optional[str] = None, json: Optional[bool] = None) -> None:
    """Configure stdlib logging and structlog; everything goes to stderr."""
    level = (level or settings.log_level).upper()
    json = settings.log_json if json is None else json

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level, logging.INFO),
    )

    structlog.reset_defaults()
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="ISO"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer() if json else structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=LoggerFactory(),
        context_class=dict,
        cache_logger_on_first_use=False,
    )


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance."""
    return structlog.get_logger(name)


class PerformanceLogger:
    """Context manager for performance logging."""

    def __init__(self, operation: str, logger: Optional[structlog.stdlib.BoundLogger] = None):
        self.operation = operation
        self.logger = logger or get_logger("performance")
        self.start_time: Optional[float] = None
        self.elapsed = 0.0

    def __enter__(self) -> "PerformanceLogger":
        self.start_time = time.perf_counter()
        self.logger.debug("⏱️ Starting operation", operation=self.operation)
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        if self.start_time is None:
            return
        self.elapsed = time.perf_counter() - self.start_time

        if exc_type:
            self.logger.error(
                "❌ Operation failed",
                operation=self.operation,
                duration=f"{self.elapsed:.2f}s",
                error=str(exc_val) if exc_val else "Unknown error",
            )
        else:
            level = "warning" if self.elapsed > 600 else "info" if self.elapsed > 1 else "debug"
            getattr(self.logger, level)(
                "✅ Operation completed",
                operation=self.operation,
                duration=f"{self.elapsed:.2f}s",
            )


def log_function_call(func: F) -> F:
    """Decorator to log function calls with performance metrics."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        logger = get_logger(func.__module__)

        with PerformanceLogger(func.__name__, logger):
            try:
                return func(*args, **kwargs)
            except Exception as e:
                logger.error(
                    "Function call failed",
                    function=func.__name__,
                    error=str(e),
                    args_count=len(args),
                    kwargs_keys=list(kwargs.keys()),
                )
                raise

    return wrapper  # type: ignore[return-value]


# Domain-specific loggers
def get_graph_logger() -> structlog.stdlib.BoundLogger:
    """Get logger for graph construction."""
    return get_logger("graph")


def get_bp_logger() -> structlog.stdlib.BoundLogger:
    """Get logger for belief propagation."""
    return get_logger("bp")


def get_sampler_logger() -> structlog.stdlib.BoundLogger:
    """Get logger for Glauber dynamics."""
    return get_logger("sampler")


def get_oracle_logger() -> structlog.stdlib.BoundLogger:
    """Get logger for exact computations."""
    return get_logger("oracle")


def get_experiment_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get logger for an experiment."""
    return get_logger(f"experiment.{name}")


def get_cli_logger() -> structlog.stdlib.BoundLogger:
    """Get logger for the command line runner."""
    return get_logger("cli")


# Initialize logging on import
setup_logging()
