"""Serialization helpers: JSON matrix format, deterministic JSON, atomic writes, TOML loading."""

from __future__ import annotations

import json
import math
import os
import sys
import tempfile

import numpy as np

from .exceptions import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


def matrix_to_json(M):
    """``{"rows", "cols", "data": [[re, im], ...]}`` in row-major order."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    flat = M.reshape(-1)
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]), "data": [[float(z.real), float(z.imag)] for z in flat]}


def matrix_from_json(obj):
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"matrix object needs rows, cols and data: {exc}") from None
    if len(data) != rows * cols:
        raise ConfigError(f"matrix data has {len(data)} entries, expected {rows * cols}")
    return np.array([complex_from_pair(z) for z in data], dtype=complex).reshape(rows, cols)


def complex_from_pair(z, where="value"):
    if isinstance(z, (int, float)):
        return complex(z)
    if isinstance(z, (list, tuple)) and len(z) == 2 and all(isinstance(t, (int, float)) for t in z):
        return complex(z[0], z[1])
    raise ConfigError(f"{where}: expected a number or an [re, im] pair, got {z!r}")


def parse_kets(obj, where):
    """A list of kets, each a list of amplitudes given as [re, im] pairs or reals."""
    if not isinstance(obj, list) or not obj:
        raise ConfigError(f"{where}: expected a non-empty list of kets")
    out = []
    for i, ket in enumerate(obj):
        if not isinstance(ket, list) or not ket:
            raise ConfigError(f"{where}[{i}]: expected a list of amplitudes")
        out.append([complex_from_pair(z, f"{where}[{i}]") for z in ket])
    lengths = {len(k) for k in out}
    if len(lengths) != 1:
        raise ConfigError(f"{where}: kets have differing dimensions {sorted(lengths)}")
    return np.array(out, dtype=complex)


def parse_matrix(obj, where):
    """Either a JSON matrix object or a list of rows of amplitudes."""
    if isinstance(obj, dict):
        return matrix_from_json(obj)
    return parse_kets(obj, where)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj) and obj.ndim == 2:
            return matrix_to_json(obj)
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj):
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def atomic_write(path, text):
    """Write through a temporary file in the target directory and rename it into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _decode_message(exc, text):
    msg = str(exc)
    if "at end of document" in msg:
        # report the last position explicitly so every message carries a line and column
        lines = text.split("\n")
        if len(lines) > 1 and lines[-1] == "":
            lines.pop()
        msg = msg.replace("at end of document", f"at end of document, line {len(lines)}, column {len(lines[-1]) + 1}")
    return msg


def load_toml(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: not valid UTF-8: {exc}") from None
    return loads_toml(text, str(path))


def loads_toml(text, name="<config>"):
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # the decoder message carries "(at line L, column C)"
        raise ConfigError(f"{name}: {_decode_message(exc, text)}") from None
