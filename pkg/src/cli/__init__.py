"""
Command-line runner.
"""
from .config import load_config
from .main import cli_dispatch, main
from .parser import build_parser

__all__ = ["build_parser", "cli_dispatch", "load_config", "main"]
