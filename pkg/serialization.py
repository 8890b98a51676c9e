"""
JSON codec for state files, tensor files, matrix files and reports.

Every file carries "schema": 1. Complex matrices are row-major nested lists
of [re, im] pairs. Output is written with sorted keys and a trailing newline
so identical runs give byte-identical files.
"""
import hashlib
import json
import os
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import CheckConfig
from errors import StateFileError
from hypermatrix import Hypermatrix
from qudit_state import DensityMatrix, TensorRep, parse_subset_label
from specht import Quiver, QuiverMatrixRep

SCHEMA_VERSION = 1
CRITERIA = ("specht", "jing", "futorny", "quiver")


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Hypermatrix):
        return obj.array.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def dumps(data: Dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, indent=2, default=_default) + "\n"


def dump_json(data: Dict[str, Any], path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(data))


def canonical_json(data: Any) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=_default).encode("utf-8")


def sha256_hex(data: Any) -> str:
    return hashlib.sha256(canonical_json(data)).hexdigest()


def load_json(path: str) -> Dict[str, Any]:
    """Read a JSON object, turning I/O and syntax errors into StateFileError."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise StateFileError(f"cannot read {path}: {e.strerror}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise StateFileError(f"{path} is not valid JSON: {e.msg}", f"line {e.lineno} column {e.colno}")
    if not isinstance(data, dict):
        raise StateFileError(f"{path} must hold a JSON object")
    return data


def _check_schema(data: Dict[str, Any]):
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise StateFileError(f"unsupported schema {schema!r}, expected {SCHEMA_VERSION}", "schema")


def _dims(data: Dict[str, Any], key: str = "dims") -> Tuple[int, ...]:
    dims = data.get(key)
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and not isinstance(d, bool) for d in dims):
        raise StateFileError(f"{key} must be a nonempty list of integers", key)
    return tuple(dims)


def _real_matrix(obj, where: str) -> np.ndarray:
    try:
        M = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise StateFileError("expected a matrix of numbers", where)
    if M.ndim != 2:
        raise StateFileError(f"expected a 2-d matrix, got {M.ndim} dimensions", where)
    if not np.all(np.isfinite(M)):
        raise StateFileError("matrix entries must be finite", where)
    return M


# States

def state_to_dict(rho: DensityMatrix) -> Dict[str, Any]:
    mat = np.asarray(rho.mat)
    return {
        "schema": SCHEMA_VERSION,
        "dims": list(rho.dims),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in mat],
    }


def state_from_dict(data: Dict[str, Any], check: bool = True) -> DensityMatrix:
    _check_schema(data)
    dims = _dims(data)
    try:
        pairs = np.array(data.get("matrix"), dtype=float)
    except (TypeError, ValueError):
        raise StateFileError("matrix must be a nested list of [re, im] pairs", "matrix")
    D = int(np.prod(dims))
    if pairs.shape != (D, D, 2):
        raise StateFileError(f"matrix has shape {pairs.shape}, expected ({D}, {D}, 2) for dims {list(dims)}", "matrix")
    return DensityMatrix(dims, pairs[..., 0] + 1j * pairs[..., 1], check=check)


def load_state(path: str) -> DensityMatrix:
    return state_from_dict(load_json(path))


# Tensor representations

def rep_to_dict(rep: TensorRep) -> Dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "dims": list(rep.dims),
        "tensors": {label: T.array.tolist() for label, T in rep.labelled().items()},
    }


def rep_from_dict(data: Dict[str, Any]) -> TensorRep:
    _check_schema(data)
    dims = _dims(data)
    raw = data.get("tensors")
    if not isinstance(raw, dict):
        raise StateFileError("tensors must be an object keyed by subset label", "tensors")
    tensors = {}
    for label, values in raw.items():
        try:
            subset = parse_subset_label(label)
            T = np.array(values, dtype=float)
        except (TypeError, ValueError):
            raise StateFileError(f"bad tensor entry {label!r}", f"tensors.{label}")
        if not np.all(np.isfinite(T)):
            raise StateFileError(f"{label} has NaN or infinite entries", f"tensors.{label}")
        tensors[subset] = T
    return TensorRep(dims, tensors)


# Matrix files for the identity engines

def _matrix_list(obj, where: str) -> List[np.ndarray]:
    if not isinstance(obj, list) or not obj:
        raise StateFileError("expected a nonempty list of matrices", where)
    return [_real_matrix(M, f"{where}[{i}]") for i, M in enumerate(obj)]


def _side(data: Dict[str, Any], side: str, criterion: str):
    if side not in data:
        raise StateFileError(f"missing side {side!r}", side)
    obj = data[side]
    if criterion == "specht":
        return _real_matrix(obj, side)
    if criterion in ("jing", "quiver"):
        return _matrix_list(obj, side)
    if not isinstance(obj, dict):
        raise StateFileError("futorny sides must be objects with group1 and group2", side)
    return (
        _matrix_list(obj.get("group1"), f"{side}.group1"),
        _matrix_list(obj.get("group2"), f"{side}.group2"),
    )


def matrices_from_dict(data: Dict[str, Any], criterion: str):
    """
    Parse both sides of a matrices file for `criterion`.

    Returns (a, b) for specht, jing and futorny, and (quiver, rep_a, rep_b)
    for quiver.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}, expected one of {', '.join(CRITERIA)}")
    _check_schema(data)
    a = _side(data, "a", criterion)
    b = _side(data, "b", criterion)
    if criterion != "quiver":
        return a, b
    spec = data.get("quiver")
    if not isinstance(spec, dict):
        raise StateFileError("quiver files need a quiver object", "quiver")
    vertices = spec.get("vertices")
    arrows = spec.get("arrows")
    if not isinstance(vertices, int) or not isinstance(arrows, list):
        raise StateFileError("quiver needs integer vertices and a list of arrows", "quiver")
    q = Quiver(vertices, arrows)
    dims = _dims(data)
    return q, QuiverMatrixRep(q, dims, a), QuiverMatrixRep(q, dims, b)


# Reports

def input_entry(path: str, data: Dict[str, Any]) -> Dict[str, Any]:
    entry = {"name": os.path.basename(path), "sha256": sha256_hex(data)}
    if "dims" in data:
        entry["dims"] = data["dims"]
    return entry


def build_report(command: str, inputs: Sequence[Dict[str, Any]], config: CheckConfig,
                 result: Dict[str, Any], verdict: str, seed: Optional[int] = None) -> Dict[str, Any]:
    """Report file: inputs with hashes, the echoed configuration, the result and its verdict."""
    report = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "inputs": list(inputs),
        "config": config.to_dict(),
        "result": result,
        "verdict": verdict,
    }
    if seed is not None:
        report["seed"] = seed
    return report
