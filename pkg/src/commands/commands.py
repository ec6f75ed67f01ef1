#!/usr/bin/env python3
"""
Command registry for the patchlabel command line
"""

import argparse
import logging
from typing import Dict, List, Optional

from core.errors import UsageError
from .base_command import BaseCommand

logger = logging.getLogger("patchlabel_commands")


class Commands:
    """Registers every command and dispatches parsed arguments to it"""

    def __init__(self):
        self.commands: Dict[str, BaseCommand] = {}
        self._register_commands()

    def _register_commands(self):
        from .train import TrainCommand
        from .evaluate import EvaluateCommand
        from .predict import PredictCommand
        from .filter import FilterCommand
        from .visualize import VisualizeCommand
        from .sweep import SweepCommand
        from .corpus_commands import Crack500Command, DeriveCommand, IngestCommand, SynthesizeCommand

        commands_to_register = [
            IngestCommand(),
            SynthesizeCommand(),
            Crack500Command(),
            DeriveCommand(),
            TrainCommand(),
            EvaluateCommand(),
            PredictCommand(),
            FilterCommand(),
            VisualizeCommand(),
            SweepCommand(),
        ]
        for command in commands_to_register:
            self.commands[command.name] = command
            logger.debug("Registered command: %s", command.name)

    def get_command(self, name: str) -> BaseCommand:
        if name not in self.commands:
            raise UsageError(f"Command '{name}' not found. Available commands: {list(self.commands)}")
        return self.commands[name]

    def list_available_commands(self) -> Dict[str, str]:
        return {name: command.description for name, command in self.commands.items()}

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog="patchlabel",
            description="Weakly supervised patch label inference for pavement images",
        )
        subparsers = parser.add_subparsers(dest="command", required=True)
        for name, command in self.commands.items():
            command.add_arguments(subparsers.add_parser(name, help=command.description))
        return parser

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Parse argv and run the selected command; argparse errors exit with code 2"""
        args = self.build_parser().parse_args(argv)
        return self.get_command(args.command).safe_execute(args)
