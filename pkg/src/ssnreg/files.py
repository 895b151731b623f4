"""CSV matrices/vectors, JSON records and run manifests."""
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__


class DataFileError(ValueError):
    pass


def _has_header(first_line):
    for field in first_line.strip().split(","):
        try:
            float(field)
        except ValueError:
            return True
    return False


def read_matrix(path):
    """Comma-separated numeric matrix with an optional single header row."""
    with open(path) as fh:
        first = fh.readline()
    if not first.strip():
        raise DataFileError(f"{path}: file is empty")
    skip = 1 if _has_header(first) else 0
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2, dtype=float)
    except ValueError as exc:
        raise DataFileError(f"{path}: {exc}") from None
    bad = ~np.isfinite(data)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise DataFileError(f"{path}: non-finite value at row {i + 1 + skip}, column {j + 1}")
    return data


def read_vector(path):
    data = read_matrix(path)
    if data.shape[1] != 1:
        raise DataFileError(f"{path}: expected a single column, found {data.shape[1]}")
    return data[:, 0]


def read_dataset(x_path, y_path):
    X = read_matrix(x_path)
    y = read_vector(y_path)
    if X.shape[0] != y.shape[0]:
        raise DataFileError(f"row counts differ: X has {X.shape[0]}, y has {y.shape[0]}")
    return X, y


def write_matrix(path, a):
    # %.17g round-trips doubles exactly
    np.savetxt(path, np.atleast_2d(a), delimiter=",", fmt="%.17g")


def write_vector(path, v):
    np.savetxt(path, np.asarray(v, dtype=float).reshape(-1, 1), fmt="%.17g")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")


def write_jsonl(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, default=_default))
            fh.write("\n")


def read_jsonl(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def manifest(command, options, started, seed=None):
    return {
        "command": command,
        "argv": sys.argv[1:],
        "options": options,
        "seed": seed,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time": time.perf_counter() - started,
    }


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")
    return path
