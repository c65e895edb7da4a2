"""Deterministic CSV/JSON writers and the output manifest.

Numbers are written as ``%.17e`` (round-trip exact for float64), headers carry
units, and nothing time-dependent is recorded, so a rerun with the same
inputs is byte-identical.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17e"
MANIFEST = "manifest.json"


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


@dataclass
class OutputWriter:
    """Writes files under ``root`` and remembers every one for the manifest."""

    root: Path
    files: list = field(default_factory=list)

    def __post_init__(self):
        self.root = Path(self.root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, name):
        self.files.append(name)
        return self.root / name

    def columns(self, name, header, columns):
        """Column CSV; ``header`` is a list of 'name [unit]' labels."""
        data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
        np.savetxt(self._path(name), data, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")

    def matrix(self, name, values, label):
        """Square matrix CSV; rows index the signal axis, columns the idler axis."""
        header = f"{label}; row = signal bin, column = idler bin; axes in axes.csv"
        np.savetxt(self._path(name), np.asarray(values, dtype=float), fmt=FLOAT_FMT, delimiter=",",
                   header=header, comments="# ")

    def table(self, name, header, rows):
        """CSV with mixed text/number cells; numbers in round-trip scientific notation."""

        def cell(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "yes" if v else "no"
            if isinstance(v, (float, np.floating)):
                return FLOAT_FMT % v
            text = str(v)
            return f'"{text}"' if "," in text else text

        lines = [",".join(header)] + [",".join(cell(v) for v in row) for row in rows]
        self.text(name, "\n".join(lines) + "\n")

    def text(self, name, content):
        self._path(name).write_text(content, encoding="utf-8")

    def json(self, name, payload):
        self.text(name, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")

    def manifest(self, scenario, inputs, seed):
        """Write manifest.json listing every emitted file with its sha256."""
        entries = []
        for name in sorted(set(self.files)):
            path = self.root / name
            entries.append({"path": name, "sha256": sha256_file(path), "bytes": path.stat().st_size})
        payload = {"scenario": scenario, "seed": seed, "inputs": inputs, "outputs": entries}
        (self.root / MANIFEST).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n",
                                          encoding="utf-8")
        return payload
