"""Deterministic CSV/JSON emission helpers.

CSV: header row, '.' decimal separator, LF line endings. JSON: sorted keys,
two-space indent, all numpy scalars coerced to plain Python types. No
timestamps anywhere, so identical inputs give identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: Path, obj) -> None:
    path.write_text(canonical_json(obj), encoding="utf-8", newline="\n")


def config_hash(config: dict) -> str:
    blob = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    if len(header) != len(columns):
        raise ValueError("header/column count mismatch")
    rows = [",".join(header)]
    for i in range(len(columns[0])):
        rows.append(",".join(repr(float(col[i])) for col in columns))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def check(name: str, observed: float, tolerance: float, comparison: str,
          predicted: float | None = None) -> dict:
    """One pass/fail entry; ``comparison`` is 'abs_diff' (|obs - pred| <= tol)
    or 'le' (obs <= tol)."""
    observed = float(observed)
    if comparison == "abs_diff":
        if predicted is None:
            raise ValueError("abs_diff comparison needs a predicted value")
        passed = abs(observed - float(predicted)) <= tolerance
    elif comparison == "le":
        passed = observed <= tolerance
    else:
        raise ValueError(f"unknown comparison {comparison!r}")
    entry = {"name": name, "observed": observed, "tolerance": float(tolerance),
             "comparison": comparison, "passed": bool(passed)}
    if predicted is not None:
        entry["predicted"] = float(predicted)
    return entry
