"""Corpus runner: execute manifest entries through the CLI and diff against golden files."""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import InvalidInput
from .io import dumps, read_json

BUILTIN = "builtin"


def builtin_manifest() -> Path:
    return Path(__file__).with_name("corpus") / "manifest.json"


def _resolve(arg: str, root: Path) -> str:
    if arg.startswith("-"):
        return arg
    candidate = root / arg
    return str(candidate) if candidate.exists() else arg


def diff(expected, actual, tolerance: float, path: str = "$") -> list[str]:
    """Structural differences; numbers compare with a mixed absolute/relative tolerance."""
    if isinstance(expected, bool) or isinstance(actual, bool):
        same = type(expected) is type(actual) and expected == actual
        return [] if same else [f"{path}: {expected!r} != {actual!r}"]
    if isinstance(expected, (int, float)) and isinstance(actual, (int, float)):
        if math.isclose(expected, actual, rel_tol=tolerance, abs_tol=tolerance):
            return []
        return [f"{path}: {expected!r} != {actual!r}"]
    if isinstance(expected, dict) and isinstance(actual, dict):
        out = []
        for k in sorted(set(expected) | set(actual)):
            if k not in actual:
                out.append(f"{path}.{k}: missing")
            elif k not in expected:
                out.append(f"{path}.{k}: unexpected")
            else:
                out.extend(diff(expected[k], actual[k], tolerance, f"{path}.{k}"))
        return out
    if isinstance(expected, list) and isinstance(actual, list):
        if len(expected) != len(actual):
            return [f"{path}: length {len(expected)} != {len(actual)}"]
        out = []
        for i, (a, b) in enumerate(zip(expected, actual)):
            out.extend(diff(a, b, tolerance, f"{path}[{i}]"))
        return out
    return [] if expected == actual else [f"{path}: {expected!r} != {actual!r}"]


def run_manifest(manifest: str | Path, update: bool = False, extra_args: list[str] | None = None) -> dict:
    from .cli import dispatch

    path = builtin_manifest() if str(manifest) == BUILTIN else Path(manifest)
    spec = read_json(path)
    instances = spec.get("instances", []) if isinstance(spec, dict) else None
    if instances is None:
        raise InvalidInput("manifest must be an object with an 'instances' list")
    root = path.parent
    results = []
    for entry in instances:
        try:
            name, argv, golden = entry["name"], list(entry["args"]), entry["golden"]
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed manifest entry: {exc}") from exc
        argv = [_resolve(a, root) for a in argv] + list(extra_args or [])
        code, text = dispatch(argv)
        actual = {"exit_code": code, "report": json.loads(text)}
        golden_path = root / golden
        if update:
            golden_path.parent.mkdir(parents=True, exist_ok=True)
            golden_path.write_text(dumps(actual))
            results.append({"name": name, "status": "updated", "mismatches": []})
            continue
        if not golden_path.exists():
            results.append({"name": name, "status": "fail", "mismatches": [f"golden file {golden} missing"]})
            continue
        mismatches = diff(read_json(golden_path), actual, float(entry.get("tolerance", 1e-9)))
        results.append({"name": name, "status": "pass" if not mismatches else "fail", "mismatches": mismatches[:20]})
    failed = sum(r["status"] == "fail" for r in results)
    return {"total": len(results), "passed": sum(r["status"] == "pass" for r in results), "failed": failed,
            "instances": results}
