"""Dataset, model, config, and report files.

Datasets are JSON Lines. The first line is a header::

    {"schema": "soft", "categories": 2}
    {"schema": "noisy", "bounds": [-0.2, 1.2], "dim": 1}

and every following line is one sample, ``{"x": 0, "y": 0.8}`` for a
categorical feature or ``{"x": [0.25], "y": 0.8}`` for a continuous one.
Labels are written with ``repr`` so reloading reproduces them bit for bit.

Reports are single JSON documents whose floats carry 17 significant digits.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Union

import numpy as np

from .core import SoftDataset, feature_dim, is_categorical
from .denoising import NoisyDataset
from .errors import ConfigError, DomainError

PathLike = Union[str, Path]
SCHEMAS = ("soft", "noisy", "binary")


def _schema_of(data) -> str:
    if isinstance(data, SoftDataset):
        return "soft"
    return "binary" if data.label_kind == "binary" else "noisy"


def dataset_lines(data, categories: int | None = None) -> list[str]:
    schema = _schema_of(data)
    header: dict = {"schema": schema}
    if schema == "noisy":
        header["bounds"] = list(data.bounds)
    if is_categorical(data.x):
        k = int(data.x.max()) + 1
        header["categories"] = max(k, categories or 0)
    else:
        header["dim"] = feature_dim(data.x)
    lines = [json.dumps(header)]
    for xi, yi in zip(data.x.tolist(), data.y.tolist()):
        lines.append(json.dumps({"x": xi, "y": yi}))
    return lines


def save_dataset(data, path: PathLike, categories: int | None = None) -> None:
    """Write a :class:`SoftDataset` or :class:`NoisyDataset` as JSON Lines."""
    Path(path).write_text("\n".join(dataset_lines(data, categories)) + "\n")


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def load_dataset(path: PathLike):
    """Read a dataset file, validating labels against its schema."""
    text = Path(path).read_text().splitlines()
    rows = [line for line in text if line.strip()]
    if not rows:
        raise DomainError(f"{path}: empty dataset file")
    try:
        header = json.loads(rows[0])
        records = [json.loads(r) for r in rows[1:]]
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(header, dict) or header.get("schema") not in SCHEMAS:
        raise DomainError(f"{path}: header needs 'schema' in {SCHEMAS}")
    schema = header["schema"]
    categorical = "categories" in header
    if categorical == ("dim" in header):
        raise DomainError(f"{path}: header needs exactly one of 'categories' or 'dim'")
    if not records:
        raise DomainError(f"{path}: no samples")
    xs, ys = [], []
    for i, rec in enumerate(records, start=2):
        if not isinstance(rec, dict) or "x" not in rec or "y" not in rec:
            raise DomainError(f"{path}:{i}: record needs 'x' and 'y'")
        x, y = rec["x"], rec["y"]
        if not _is_number(y):
            raise DomainError(f"{path}:{i}: label must be a number")
        if categorical:
            if not (isinstance(x, int) and not isinstance(x, bool)) or not 0 <= x < header["categories"]:
                raise DomainError(f"{path}:{i}: x must be an integer in [0, {header['categories']})")
        elif not (isinstance(x, list) and len(x) == header["dim"] and all(_is_number(v) for v in x)):
            raise DomainError(f"{path}:{i}: x must be a list of {header['dim']} numbers")
        xs.append(x)
        ys.append(float(y))
    x = np.array(xs, dtype=np.int64 if categorical else np.float64)
    y = np.array(ys, dtype=np.float64)
    if schema == "soft":
        return SoftDataset(x, y)
    if schema == "binary":
        return NoisyDataset(x, y, (0.0, 1.0), "binary")
    bounds = header.get("bounds")
    if not (isinstance(bounds, list) and len(bounds) == 2 and all(_is_number(b) for b in bounds)):
        raise DomainError(f"{path}: noisy schema needs 'bounds': [a, b]")
    return NoisyDataset(x, y, tuple(bounds), "continuous")


def import_csv(path: PathLike, schema: str, bounds: tuple[float, float] | None = None):
    """Read a CSV with columns ``x0 .. x{m-1}, y`` (or a single integer ``x``)."""
    if schema not in SCHEMAS:
        raise DomainError(f"schema must be one of {SCHEMAS}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        rows = list(reader)
    if "y" not in cols:
        raise DomainError(f"{path}: missing 'y' column")
    if not rows:
        raise DomainError(f"{path}: no rows")
    try:
        y = np.array([float(r["y"]) for r in rows])
        if "x" in cols:
            x = np.array([int(r["x"]) for r in rows], dtype=np.int64)
        else:
            xcols = sorted((c for c in cols if c[:1] == "x" and c[1:].isdigit()), key=lambda c: int(c[1:]))
            if not xcols or xcols != [f"x{i}" for i in range(len(xcols))]:
                raise DomainError(f"{path}: expected feature columns x0..x{{m-1}} or x")
            x = np.array([[float(r[c]) for c in xcols] for r in rows])
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from exc
    if schema == "soft":
        return SoftDataset(x, y)
    if schema == "binary":
        return NoisyDataset(x, y, (0.0, 1.0), "binary")
    return NoisyDataset(x, y, bounds, "continuous")


def load_json(path: PathLike, what: str = "file"):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"{what} {path}: not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path}: malformed JSON ({exc})") from exc


# -- report serialisation -----------------------------------------------------


def _float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"cannot serialise non-finite value {v!r}")
    s = format(v, ".17g")
    if not any(ch in s for ch in ".e"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits; key order preserved."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(_is_number(v) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_report(report, path: PathLike, include_timing: bool = False) -> None:
    Path(path).write_text(dumps(report.to_dict(include_timing)) + "\n")


def read_report(path: PathLike) -> dict:
    return json.loads(Path(path).read_text())
