#! /usr/bin/env python

import argparse
import json
from typing import Any, Optional
import random
import sys
try:
    import tomllib as toml
except ImportError:
    try:
        import toml
    except ImportError:
        print("Outdated Python version detected.\n"
              "Please install 'toml' to continue: "
              " pip3 install toml")
        sys.exit(1)

import numpy as np
from sympy import isprime


class TorsionGrowthError(Exception):
    """ Base class of all certification and search failures

    Every failure names the statement whose hypothesis or conclusion
    could not be established, so that a run log can be traced back to
    the inference that broke.
    """

    def __init__(self, message:str, anchor:str = "",
                 details:Optional[dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.anchor = anchor
        self.details = dict() if details is None else details

    def to_record(self) -> dict[str, Any]:
        """ Machine-readable error record

        :rtype: dict[str, Any]
        """
        return {"error": type(self).__name__,
                "anchor": self.anchor,
                "message": self.message,
                "details": self.details}


def primeArg(arg:str) -> int:
    """ Custom argument type for primes

    :param arg: user provided argument string
    :type arg: str
    :rtype: int
    :returns: a prime number
    """
    try:
        p = int(arg)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{arg}' is not an integer.")

    if not isprime(p):
        raise argparse.ArgumentTypeError(f"'{arg}' is not a prime number.")

    return p

def positiveIntArg(arg:str) -> int:
    """ Custom argument type for budgets and counts

    :param arg: user provided argument string
    :type arg: str
    :rtype: int
    :returns: a strictly positive integer
    """
    try:
        n = int(arg)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{arg}' is not an integer.")

    if n <= 0:
        raise argparse.ArgumentTypeError(f"'{arg}' is not positive.")

    return n

def growthArg(arg:str) -> dict[int, int]:
    """ Custom argument type for growth function tables

    :param arg: JSON object mapping positive integers to nonnegative
        integers, eg '{"1": 2, "2": 3}'
    :type arg: str
    :rtype: dict[int, int]
    """
    try:
        raw = json.loads(arg)
        table = {int(k): int(v) for k, v in raw.items()}
    except (ValueError, AttributeError, TypeError):
        raise argparse.ArgumentTypeError(f"'{arg}' is not a valid growth "
                                         "table. Expects a JSON object such "
                                         "as '{\"1\": 2}'.")

    if len(table) <= 0 or min(table) < 1 or min(table.values()) < 0:
        raise argparse.ArgumentTypeError(f"'{arg}' needs positive keys and "
                                         "nonnegative values.")

    return table

def load_config(filename:str) -> dict[str, Any]:
    """ Read a TOML run configuration. Dashes in keys are normalized to
        underscores so that keys can be written as on the command line.

    :param filename: path to a TOML file
    :type filename: str
    :rtype: dict[str, Any]
    """
    mode = 'rb' if sys.version_info >= (3, 11) else 'r'
    with open(filename, mode) as f:
        rc = toml.load(f)

    return {k.replace('-', '_'): v for k, v in rc.items()}

def read_version(filename:str) -> str:
    """ Parse the project's version

    :param filename: path to 'pyproject.toml'
    :type filename: str
    :rtype: str
    :returns: the project's version as a string
    """
    mode = 'rb' if sys.version_info >= (3, 11) else 'r'
    with open(filename, mode) as f:
        rc = toml.load(f)

    try:
        version = rc["project"]["version"]
    except KeyError:
        version = "unknown"

    return version

def rng_set_seed(seed:Optional[int] = None) -> np.random.Generator:
    """ Set seed of the random number generators.

    :param seed: a custom seed (optional)
    :type seed: Optional[int]
    :rtype: np.random.Generator
    :returns: a random number generator
    """
    random.seed(a = seed)  # set Python seed

    return np.random.default_rng(seed)
