#!/usr/bin/env python3
"""
Base command class for the patchlabel command line.

Commands return a human-readable result string; ``safe_execute`` turns the
pipeline's exceptions into process exit codes.
"""

import argparse
import logging
from abc import ABC, abstractmethod

from core.errors import PatchLabelError

logger = logging.getLogger("patchlabel_commands")


class BaseCommand(ABC):
    """Base class for all commands with uniform error handling"""

    def __init__(self, name: str, description: str):
        self.name = name
        self.description = description

    @abstractmethod
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """Declare the command's flags"""

    @abstractmethod
    def execute(self, args: argparse.Namespace) -> str:
        """Run the command and return a summary - to be implemented by subclasses"""

    def safe_execute(self, args: argparse.Namespace) -> int:
        """Run the command, print its summary and return the exit code"""
        try:
            print(self.execute(args))
            return 0
        except PatchLabelError as e:
            print(self.format_error(e))
            return e.exit_code
        except KeyboardInterrupt:
            logger.warning("Command %s interrupted", self.name)
            return 130
        except Exception as e:
            logger.error("❌ Unexpected error in %s: %s", self.name, e, exc_info=True)
            print("❌ Unexpected error in %s: %s" % (self.name, e))
            return 1

    def format_error(self, error: PatchLabelError) -> str:
        error_type = type(error).__name__
        logger.error("Command %s: %s: %s", self.name, error_type, error)
        message = "❌ %s in %s: %s" % (error_type, self.name, error)
        last_good = getattr(error, "last_good_checkpoint", None)
        if last_good:
            message += "\n   last good checkpoint: %s" % last_good
        return message
