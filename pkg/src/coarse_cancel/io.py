"""JSON loading and canonical output for the command line and the corpus runner."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .action import ActionWindow, window_from_permutations
from .errors import InvalidInput
from .grouptheory import AmalgamData, GroupTable, bass_serre_window, free_group_window
from .metric_core import FiniteMetricSpace, GraphSpec, build_space


class JSONInputError(InvalidInput):
    """Malformed JSON, with the position of the first problem."""


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise JSONInputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else ("-inf" if x < 0 else "nan"))
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if hasattr(obj, "to_json"):
        return _plain(obj.to_json())
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, non-finite floats as strings, trailing newline."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_space(obj) -> FiniteMetricSpace:
    """A graph ``{"vertices", "edges"}`` or a matrix ``{"points", "matrix"}``."""
    if isinstance(obj, (str, Path)):
        obj = read_json(obj)
    if not isinstance(obj, dict):
        raise InvalidInput("space must be a JSON object")
    if "matrix" in obj:
        try:
            return FiniteMetricSpace.from_matrix([str(p) for p in obj["points"]], np.asarray(obj["matrix"], float))
        except (KeyError, ValueError) as exc:
            raise InvalidInput(f"malformed distance matrix: {exc}") from exc
    spec = GraphSpec.from_json(obj)
    return build_space(spec, int(obj.get("subdivide", 1)))


def load_group(obj) -> GroupTable:
    if isinstance(obj, (str, Path)):
        obj = read_json(obj)
    return GroupTable.from_json(obj)


def load_amalgam(obj) -> AmalgamData:
    if isinstance(obj, (str, Path)):
        obj = read_json(obj)
    if not isinstance(obj, dict):
        raise InvalidInput("amalgam must be a JSON object")
    if "free_product" in obj:
        m, n = obj["free_product"]
        return AmalgamData.free_product(int(m), int(n))
    return AmalgamData.from_json(obj)


def load_window(obj) -> tuple[FiniteMetricSpace, ActionWindow, dict]:
    """Window spec: an amalgam tree ball, a free group ball, or explicit permutations.

    Returns the space, the window and the raw spec (for optional extras such
    as ``finite_normal_subgroups``).
    """
    if isinstance(obj, (str, Path)):
        obj = read_json(obj)
    if not isinstance(obj, dict):
        raise InvalidInput("window spec must be a JSON object")
    mwl = int(obj.get("max_word_length", 4))
    if "amalgam" in obj or "free_product" in obj:
        data = load_amalgam(obj["amalgam"] if "amalgam" in obj else {"free_product": obj["free_product"]})
        space, window = bass_serre_window(data, int(obj.get("radius", 3)), int(obj.get("subdivide", 1)), mwl)
    elif "free_group" in obj:
        space, window = free_group_window(int(obj["free_group"]), int(obj.get("radius", 3)), mwl)
    elif "space" in obj and "permutations" in obj:
        space = load_space(obj["space"])
        window = window_from_permutations(space, obj["permutations"], max_word_length=mwl)
    else:
        raise InvalidInput("window spec needs 'amalgam', 'free_product', 'free_group' or 'space' + 'permutations'")
    return space, window, obj
