"""Small shared helpers: tolerances and canonical JSON."""

from __future__ import annotations

import json

import numpy as np

from .errors import DegenerateInput

#: Tolerance for membership in a unit sphere: ``|norm(x) - 1| <= TOL_SPHERE``.
TOL_SPHERE = 1e-9


def as_pair(x) -> tuple[float, float]:
    """Coerce ``x`` to a real pair ``(a, b)``."""
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.size != 2:
        raise DegenerateInput(f"expected a length-2 real pair, got shape {np.shape(x)}")
    return float(arr[0]), float(arr[1])


def _canonical_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def canonical_json(data) -> str:
    """Serialize ``data`` to a canonical JSON string.

    Keys are sorted, separators are fixed, and floats keep full ``repr``
    precision, so equal inputs always produce identical bytes.
    """
    return json.dumps(data, sort_keys=True, separators=(",", ":"),
                      allow_nan=False, default=_canonical_default)
