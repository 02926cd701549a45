"""Versioned JSON envelope shared by every trainable system.

    {"format_version": 1, "system": "foenet", "dims": {...},
     "weights": {...}, "state": {...}, "metadata": {...}}

Arrays are stored as ``{"shape": [...], "values": [row-major floats]}``. Floats
go through ``repr``, which round-trips float64 exactly.
"""

import json
from pathlib import Path

import numpy as np

from .exceptions import SchemaError, VersionMismatch

FORMAT_VERSION = 1


def encode_array(a):
    a = np.asarray(a, dtype=np.float64)
    return {"shape": list(a.shape), "values": [float(x) for x in a.ravel()]}


def decode_array(obj, name="array"):
    try:
        shape = tuple(int(s) for s in obj["shape"])
        values = np.array(obj["values"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{name}: malformed array ({exc})") from None
    if values.size != int(np.prod(shape)):
        raise SchemaError(f"{name}: {values.size} values for shape {shape}")
    if not np.all(np.isfinite(values)):
        raise SchemaError(f"{name}: non-finite values")
    return values.reshape(shape)


def dumps_envelope(system, dims, weights, state=None, metadata=None):
    doc = {
        "format_version": FORMAT_VERSION,
        "system": system,
        "dims": dims,
        "weights": {k: encode_array(v) for k, v in weights.items()},
        "state": state or {},
        "metadata": metadata or {},
    }
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"


def write_envelope(path, system, dims, weights, state=None, metadata=None):
    text = dumps_envelope(system, dims, weights, state, metadata)
    Path(path).write_text(text)


def read_envelope(path, system=None):
    """Parse and sanity-check an envelope. Raises before anything is built."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: format_version {version!r}, expected {FORMAT_VERSION}")
    for key in ("system", "dims", "weights"):
        if key not in doc:
            raise SchemaError(f"{path}: missing {key!r}")
    if system is not None and doc["system"] != system:
        raise SchemaError(f"{path}: holds system {doc['system']!r}, expected {system!r}")
    doc.setdefault("state", {})
    doc.setdefault("metadata", {})
    doc["weights"] = {k: decode_array(v, k) for k, v in doc["weights"].items()}
    return doc
