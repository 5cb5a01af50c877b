#!/usr/bin/env python3
"""
hardcore-lab command-line entry point.

    python main.py <command> [flags]

Run ``python main.py --help`` for the command list.
"""
from src.cli import main

if __name__ == "__main__":
    main()
