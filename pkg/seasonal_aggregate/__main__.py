"""
CLI entry point for running as a module: python -m seasonal_aggregate
"""

from .cli import main

if __name__ == "__main__":
    main()
