"""Canonical result documents.

A result document is JSON with a fixed key order and fixed float formatting:
every float carries 17 significant digits plus a decimal marker, so parsing
and re-serializing a document reproduces it byte for byte. Wall-clock timing
is deliberately left out; documents from identical (input, flags, seed) runs
must be identical.
"""

import json
import math

import numpy as np

from .models import Family

SCHEMA_VERSION = 1

_RUNSPEC_KEYS = (
    "input",
    "generate",
    "points",
    "k",
    "type",
    "param",
    "nstart",
    "iter_max",
    "card_min",
    "init",
    "method",
    "seed",
    "format",
)


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(float(x), ".17g")
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def _render(obj, indent: int, out: list) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        last = len(obj) - 1
        for i, (key, val) in enumerate(obj.items()):
            out.append(pad + "  " + json.dumps(key) + ": ")
            _render(val, indent + 1, out)
            out.append("\n" if i == last else ",\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        if all(not isinstance(v, (dict, list, tuple)) for v in items):
            out.append("[")
            for i, val in enumerate(items):
                if i:
                    out.append(", ")
                _render(val, indent, out)
            out.append("]")
            return
        out.append("[\n")
        last = len(items) - 1
        for i, val in enumerate(items):
            out.append(pad + "  ")
            _render(val, indent + 1, out)
            out.append("\n" if i == last else ",\n")
        out.append(pad + "]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Serialize to the canonical text form, newline-terminated."""
    out = []
    _render(obj, 0, out)
    out.append("\n")
    return "".join(out)


def loads(text: str):
    """Inverse of dumps; plain JSON parsing."""
    return json.loads(text)


def _family_entry(spec) -> dict:
    if spec.kind is Family.FIXED_RADIUS:
        param = float(spec.r)
    elif spec.kind is Family.FIXED_COVARIANCE:
        param = [[float(v) for v in row] for row in spec.sigma]
    elif spec.kind is Family.FIXED_EIGENVALUES:
        param = [float(v) for v in spec.lambdas]
    else:
        param = None
    return {"type": spec.name, "param": param}


def build_document(result, runspec: dict, ellipses=None, oracle=None) -> dict:
    """Assemble the full document in canonical key order.

    runspec is echoed under its fixed key set (missing keys become null).
    ellipses and oracle sections appear only when provided.
    """
    doc = {
        "schema": SCHEMA_VERSION,
        "runspec": {key: runspec.get(key) for key in _RUNSPEC_KEYS},
        "result": {
            "nclusters": int(result.nclusters),
            "final_energy": float(result.final_energy),
            "iterations": int(result.iterations),
            "seed": int(result.seed),
            "probabilities": [float(p) for p in result.probabilities],
            "means": [[float(v) for v in row] for row in result.means],
            "covariances": [
                [[float(v) for v in row] for row in mat] for mat in result.covariances
            ],
            "families": [_family_entry(spec) for spec in result.families],
            "membership": [int(lab) for lab in result.membership],
            "energy_trace": [float(e) for e in result.energy_trace],
            "nclusters_trace": [int(m) for m in result.nclusters_trace],
        },
    }
    if ellipses is not None:
        doc["ellipses"] = ellipses
    if oracle is not None:
        doc["oracle"] = oracle
    return doc
