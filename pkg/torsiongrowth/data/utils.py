#! /usr/bin/env python

import json
from pathlib import Path
from typing import Any

from torsiongrowth.core.linalg import IntMatrix
from torsiongrowth.core.utils import TorsionGrowthError


class MalformedInput(TorsionGrowthError):
    pass


def parse_matrix(text:str) -> IntMatrix:
    """ Read a matrix in text format: 'rows cols' followed by the
        entries in row-major order, separated by whitespace.

    :param text: file content
    :type text: str
    :rtype: IntMatrix
    """
    tokens = text.split()
    try:
        values = [int(t) for t in tokens]
    except ValueError as e:
        raise MalformedInput(f"Non-integer token in matrix file: {e}",
                             anchor="matrix format")

    if len(values) < 2 or values[0] < 0 or values[1] < 0:
        raise MalformedInput("Matrix file needs a 'rows cols' header",
                             anchor="matrix format")

    rows, cols = values[0], values[1]
    if len(values) - 2 != rows * cols:
        raise MalformedInput(f"Expected {rows * cols} entries, found "
                             f"{len(values) - 2}", anchor="matrix format")

    return IntMatrix(rows, cols, tuple(values[2:]))

def read_matrix(filename:str) -> IntMatrix:
    with open(filename, 'r') as f:
        return parse_matrix(f.read())

def format_matrix(A:IntMatrix) -> str:
    lines = [f"{A.rows} {A.cols}"]
    lines.extend(" ".join(str(v) for v in A.row(i)) for i in range(A.rows))

    return "\n".join(lines) + "\n"

def write_matrix(filename:str, A:IntMatrix) -> None:
    with open(filename, 'w') as f:
        f.write(format_matrix(A))

def dumps(data:Any) -> str:
    """ Canonical JSON text; equal data give byte-identical output """
    return json.dumps(data, sort_keys=True, indent=2) + "\n"

def write_json(filename:Path, data:Any) -> None:
    with open(filename, 'w') as f:
        f.write(dumps(data))

def read_json(filename:str) -> Any:
    try:
        with open(filename, 'r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise MalformedInput(f"Invalid JSON in {filename}: {e}",
                             anchor="json input")

def mkfile(directory:str, basename:str, extension:str) -> Path:
    """ Return path to a new file. Adds numerical suffix if
        the file already exists.

    :param directory:
    :type directory: str
    :param basename:
    :type basename: str
    :param extension:
    :type extension: str
    :rtype: Path
    """
    if not extension.startswith('.'):
        extension = '.' + extension

    out = Path(directory).joinpath(basename).with_suffix(extension)
    suffix = 1
    while out.exists():
        out = Path(directory).joinpath(f"{basename}-{suffix}"
                                       ).with_suffix(extension)
        suffix += 1

    return out
