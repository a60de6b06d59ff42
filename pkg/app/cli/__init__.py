"""
Command-line surface of the incidence engine.
"""

from .cli import cli

__all__ = [
    'cli',
]
