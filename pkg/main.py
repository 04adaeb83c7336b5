#!/usr/bin/env python3
"""
Rational Points Explorer
Main entry point: the interactive explorer without arguments, the subcommand CLI otherwise
"""

import sys

from interfaces import cli
from interfaces.explorer_cli import RationalPointsExplorer


def main():
    """Main entry point for the Rational Points Explorer"""
    if len(sys.argv) > 1:
        sys.exit(cli.main(sys.argv[1:]))

    explorer = RationalPointsExplorer()
    explorer.run()


if __name__ == "__main__":
    main()
