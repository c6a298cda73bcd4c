# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: UwbHar.py
# ----------------------------------------------------------------------------------
# Purpose:
# This is the main application file for UWB-HAR. Pipeline subcommands are passed
# through to the CLI; `--test` runs the test suite instead.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import sys
from argparse import REMAINDER, ArgumentParser

from uwb_har import get_logger
from uwb_har.cli import run
from tests import run_all_tests


class UwbHar:
    """Main application class for UWB-HAR."""

    def __init__(self):
        self._logger = get_logger()

    def _run_tests(self) -> None:
        """Run all application tests."""
        self._logger.info("Running all tests")
        run_all_tests()

    def run(self, args) -> int:
        """Run the application with parsed command line arguments; returns the exit code."""
        if args.test:
            self._run_tests()
            return 0
        if not args.command:
            print("No action specified. Use --help for available options.")
            return 2
        return run(args.command)


def main() -> None:
    """Main entry point for UWB-HAR."""
    parser = ArgumentParser(description="UWB-HAR Command Line Interface", epilog="Run 'UwbHar.py <command> --help' for the pipeline stages.")
    parser.add_argument("-t", "--test", action="store_true", help="Run all tests")
    parser.add_argument("command", nargs=REMAINDER, help="pipeline subcommand and its arguments")
    args = parser.parse_args()

    app = UwbHar()
    sys.exit(app.run(args))


if __name__ == "__main__":
    main()
