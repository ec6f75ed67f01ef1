#!/usr/bin/env python3
"""
Commands package for the patchlabel command line
"""

from .commands import Commands
from .base_command import BaseCommand

__all__ = [
    'Commands',
    'BaseCommand',
]
