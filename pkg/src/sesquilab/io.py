"""Artifact I/O: the field container format and deterministic CSV/JSON.

Field file layout (stable across versions, all little-endian):

    bytes 0..3    magic b"SQF1"
    bytes 4..7    uint32 header length H
    bytes 8..8+H  UTF-8 JSON header:
                    torus: {"kind": "torus", "m", "n", "sizes", "lengths"}
                    patch: {"kind": "patch", "m", "n", "nodes",
                            "half_width", "margin"}
    rest          row-major float64 node vectors, ∏sizes · (n+1) values

CSV bodies are reproducible byte-for-byte: every float is rendered with 17
significant digits ('.' decimal separator), rows end in '\\n', and reductions
upstream are sequential. Timestamps never enter CSV or summary files; they
live in the separate run_meta.json.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import IoError
from .fields import AmbientField, SphereField
from .grid import EuclideanPatch, TorusGrid

MAGIC = b"SQF1"


def format_float(x) -> str:
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    """Write rows of numbers/strings with deterministic float formatting."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else format_float(cell) for cell in row))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_json(path, payload):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _domain_header(domain, n):
    if isinstance(domain, TorusGrid):
        return {
            "kind": "torus",
            "m": domain.m,
            "n": n,
            "sizes": list(domain.sizes),
            "lengths": list(domain.lengths),
        }
    if isinstance(domain, EuclideanPatch):
        return {
            "kind": "patch",
            "m": domain.m,
            "n": n,
            "nodes": domain.nodes_per_axis,
            "half_width": domain.half_width,
            "margin": domain.margin,
        }
    raise TypeError(f"unknown domain type {type(domain)!r}")


def _domain_from_header(header):
    if header["kind"] == "torus":
        return TorusGrid(sizes=tuple(header["sizes"]), lengths=tuple(header["lengths"]))
    if header["kind"] == "patch":
        return EuclideanPatch(
            m=header["m"],
            half_width=header["half_width"],
            nodes_per_axis=header["nodes"],
            margin=header["margin"],
        )
    raise IoError(f"unknown domain kind {header['kind']!r}")


def save_field(path, field: AmbientField):
    header = json.dumps(_domain_header(field.domain, field.n), sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_field(path, sphere=True):
    """Read a field container; returns a SphereField (default) or AmbientField."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if blob[:4] != MAGIC:
        raise IoError(f"{path}: bad magic {blob[:4]!r}")
    (hlen,) = struct.unpack("<I", blob[4:8])
    try:
        header = json.loads(blob[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IoError(f"{path}: corrupt header: {exc}") from exc
    domain = _domain_from_header(header)
    count = domain.num_nodes * (header["n"] + 1)
    data = np.frombuffer(blob[8 + hlen :], dtype="<f8")
    if data.size != count:
        raise IoError(f"{path}: expected {count} values, found {data.size}")
    values = data.reshape(domain.shape + (header["n"] + 1,)).astype(float)
    cls = SphereField if sphere else AmbientField
    return cls(domain, values)
