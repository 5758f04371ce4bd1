"""JSON wire formats for matrices and channels.

Matrix: ``{"rows": n, "cols": m, "data": [[re, im], ...]}`` in row-major
order; vectors use ``cols = 1``.
Channel: ``{"d": n, "tag": "general|ru|rp", "terms": [{"weight": w, "op": <matrix>}]}``.
"""

from __future__ import annotations

import numpy as np

from .channels import KrausChannel


class FormatError(ValueError):
    pass


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise FormatError(f"cannot serialize array of shape {m.shape}")
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed matrix object: {exc}") from None
    if rows < 1 or cols < 1:
        raise FormatError("rows and cols must be positive")
    if len(data) != rows * cols:
        raise FormatError(f"expected {rows * cols} entries, got {len(data)}")
    try:
        arr = np.array([complex(float(re), float(im)) for re, im in data])
    except (TypeError, ValueError) as exc:
        raise FormatError(f"entries must be [re, im] pairs: {exc}") from None
    if not np.all(np.isfinite(arr)):
        raise FormatError("matrix has non-finite entries")
    return arr.reshape(rows, cols)


def channel_to_json(ch: KrausChannel) -> dict:
    return {
        "d": ch.d,
        "tag": ch.tag,
        "terms": [{"weight": w, "op": matrix_to_json(k)} for w, k in zip(ch.weights, ch.ops)],
    }


def channel_from_json(obj) -> KrausChannel:
    try:
        d = int(obj["d"])
        tag = str(obj.get("tag", "general")).lower()
        terms = obj["terms"]
        weights = tuple(float(t["weight"]) for t in terms)
        ops = tuple(matrix_from_json(t["op"]) for t in terms)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed channel object: {exc}") from None
    return KrausChannel(d, weights, ops, tag)
