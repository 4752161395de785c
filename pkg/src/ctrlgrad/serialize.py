"""File formats: system/problem JSON, experiment CSV, run manifests.

Conventions chosen for bit-faithful reproducibility:

- matrices are stored flat in row-major order (nested rows are accepted
  on input);
- CSV cells use 17 significant digits ('%.17g'), enough to round-trip
  any double exactly, '.' decimal separator, one header row, '\\n' line
  endings;
- JSON files are written with sorted keys and a trailing newline via an
  atomic replace, so a partially-written manifest is never observed.

Schema errors carry a JSON-pointer-style path ("/A/3") naming the
offending element.
"""

import hashlib
import json
import os
import tempfile

import numpy as np

from .controllability import ControlSystem
from .errors import SchemaError
from .quadratic import QuadraticProblem

__all__ = [
    "fmt17",
    "problem_to_dict",
    "problem_from_dict",
    "system_to_dict",
    "system_from_dict",
    "load_system",
    "save_system",
    "write_csv",
    "dump_json",
    "write_json_atomic",
    "sha256_file",
    "load_manifest",
]


def fmt17(value):
    """Round-trip-safe decimal rendering of a double."""
    return f"{float(value):.17g}"


def _require(d, key, ptr=""):
    if not isinstance(d, dict):
        raise SchemaError(f"{ptr or '/'}: expected an object")
    if key not in d:
        raise SchemaError(f"{ptr}/{key}: missing required field")
    return d[key]


def _as_int(v, ptr):
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{ptr}: expected an integer, got {type(v).__name__}")
    return v


def _as_real(v, ptr):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{ptr}: expected a number, got {type(v).__name__}")
    return float(v)


def _vector_from_json(v, length, ptr):
    if not isinstance(v, list):
        raise SchemaError(f"{ptr}: expected an array")
    if len(v) != length:
        raise SchemaError(f"{ptr}: expected {length} entries, got {len(v)}")
    return np.array([_as_real(e, f"{ptr}/{i}") for i, e in enumerate(v)], dtype=float)


def _matrix_from_json(v, rows, cols, ptr):
    """Accept flat row-major (rows*cols numbers) or nested (rows arrays)."""
    if not isinstance(v, list):
        raise SchemaError(f"{ptr}: expected an array")
    if len(v) == rows * cols and (rows * cols == 0 or not isinstance(v[0], list)):
        flat = [_as_real(e, f"{ptr}/{i}") for i, e in enumerate(v)]
        return np.array(flat, dtype=float).reshape(rows, cols)
    if len(v) != rows:
        raise SchemaError(
            f"{ptr}: expected {rows}x{cols} row-major ({rows * cols} numbers) "
            f"or {rows} rows, got length {len(v)}"
        )
    out = np.empty((rows, cols))
    for i, row in enumerate(v):
        out[i] = _vector_from_json(row, cols, f"{ptr}/{i}")
    return out


def problem_to_dict(p):
    return {
        "n": int(p.n),
        "A": [float(v) for v in p.A.ravel()],
        "b": [float(v) for v in p.b],
        "c": float(p.c),
    }


def problem_from_dict(d):
    n = _as_int(_require(d, "n"), "/n")
    if n < 1:
        raise SchemaError(f"/n: must be >= 1, got {n}")
    A = _matrix_from_json(_require(d, "A"), n, n, "/A")
    b = _vector_from_json(_require(d, "b"), n, "/b")
    c = _as_real(_require(d, "c"), "/c")
    return QuadraticProblem(A=A, b=b, c=c)


def system_to_dict(sys):
    d = problem_to_dict(sys.problem)
    d["m"] = int(sys.m)
    d["B"] = [float(v) for v in sys.B.ravel()]
    return d


def system_from_dict(d):
    p = problem_from_dict(d)
    m = _as_int(_require(d, "m"), "/m")
    if m < 0:
        raise SchemaError(f"/m: must be >= 0, got {m}")
    B = _matrix_from_json(_require(d, "B"), p.n, m, "/B")
    return ControlSystem(problem=p, B=B)


def load_system(path):
    """Read and validate a ControlSystem JSON file.

    Malformed files raise SchemaError (or json/OS errors); files that
    parse but violate a model invariant (asymmetric A, indefinite A, ...)
    raise ContractViolationError from the constructors.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return system_from_dict(data)


def save_system(path, sys):
    write_json_atomic(path, system_to_dict(sys))


def _render_cell(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return fmt17(v)


def write_csv(target, header, rows):
    """Write rows of numbers; target is a path or an open text stream."""
    def _emit(fh):
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_render_cell(v) for v in row) + "\n")

    if hasattr(target, "write"):
        _emit(target)
    else:
        with open(target, "w", encoding="utf-8", newline="") as fh:
            _emit(fh)


def dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json_atomic(path, obj):
    """Serialize then rename into place, so readers never see a torn file."""
    text = dump_json(obj)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def load_manifest(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: manifest must be a JSON object")
    return data
