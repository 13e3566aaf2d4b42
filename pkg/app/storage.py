"""
Reading model/sequence/frame files and writing deterministic reports
"""
import json
import logging
import math
from numbers import Integral, Real
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import TypeAdapter, ValidationError

from app.config import settings
from app.models.schemas import ModelSchema
from app.spectral.claims import EMPIRICAL, TIERS
from app.spectral.operators import (
    CyclicUnitary,
    DenseVector,
    DirectSum,
    FiniteContraction,
    OperatorModel,
    SparseVector,
    SumVector,
    UnilateralShift,
    VectorRep,
)
from app.validation import SchemaError

logger = logging.getLogger(__name__)

# floats may only appear inside claims or under these keys (inputs and configuration)
INPUT_KEYS = ("parameters", "policy", "sequence", "model", "element")
CLAIM_KEYS = {"value", "bound", "tier"}

_model_adapter = TypeAdapter(ModelSchema)


def _parse_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from exc


def schema_error(exc: ValidationError, source: str) -> SchemaError:
    error = exc.errors()[0]
    location = ".".join(str(part) for part in error["loc"]) or "<root>"
    return SchemaError(f"{source}: {error['msg']}", location)


def parse_model(text: str, source: str = "<model>") -> OperatorModel:
    data = _parse_json(text, source)
    try:
        schema = _model_adapter.validate_python(data)
    except ValidationError as exc:
        raise schema_error(exc, source) from exc
    model = schema.build()
    logger.debug("loaded %s model from %s", model.kind, source)
    return model


def load_model(path: Union[str, Path]) -> OperatorModel:
    path = Path(path)
    return parse_model(path.read_text(), str(path))


def read_json_argument(value: str, source: str):
    """Inline JSON, or the path of a JSON file"""
    candidate = Path(value)
    if not value.lstrip().startswith(("{", "[")) and candidate.is_file():
        return _parse_json(candidate.read_text(), str(candidate))
    return _parse_json(value, source)


def _complex(entry, location: str) -> complex:
    if isinstance(entry, Real):
        return complex(float(entry))
    if isinstance(entry, list) and len(entry) == 2 and all(isinstance(v, Real) for v in entry):
        return complex(float(entry[0]), float(entry[1]))
    raise SchemaError("expected a number or a [re, im] pair", location)


def parse_vector(model: OperatorModel, data, location: str = "vector") -> VectorRep:
    """Sparse {index: [re, im]} maps for cyclic and shift parts, dense lists for finite matrices"""
    if isinstance(model, DirectSum):
        if not isinstance(data, list) or len(data) != len(model.components):
            raise SchemaError(f"expected one entry per summand ({len(model.components)})", location)
        return SumVector(tuple(parse_vector(m, part, f"{location}.{i}")
                               for i, (m, part) in enumerate(zip(model.components, data))))
    if isinstance(model, FiniteContraction):
        if not isinstance(data, list) or len(data) != model.dimension:
            raise SchemaError(f"expected a list of {model.dimension} entries", location)
        return DenseVector(tuple(_complex(v, f"{location}.{i}") for i, v in enumerate(data)))
    if isinstance(model, (CyclicUnitary, UnilateralShift)):
        if not isinstance(data, dict):
            raise SchemaError("expected a map from index to coefficient", location)
        coefficients = {}
        for key, value in data.items():
            try:
                index = int(key)
            except ValueError as exc:
                raise SchemaError(f"index {key!r} is not an integer", f"{location}.{key}") from exc
            coefficients[index] = _complex(value, f"{location}.{key}")
        return SparseVector.from_dict(coefficients)
    raise SchemaError(f"no vector format for {model.kind} models", location)


def parse_frame(model: OperatorModel, data) -> List[VectorRep]:
    if not isinstance(data, list) or not data:
        raise SchemaError("a frame is a nonempty list of vectors", "--frame")
    return [parse_vector(model, v, f"--frame.{i}") for i, v in enumerate(data)]


def _encode(value, indent: int) -> str:
    pad = "  " * (indent + 1)
    close = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(value[k], indent + 1)}"
                 for k in sorted(value, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        return "[\n" + ",\n".join(pad + _encode(v, indent + 1) for v in value) + "\n" + close + "]"
    if value is None or isinstance(value, (bool, np.bool_)):
        return json.dumps(None if value is None else bool(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, Integral):
        return str(int(value))
    if isinstance(value, (complex, np.complexfloating)):
        return _encode({"re": float(value.real), "im": float(value.imag)}, indent)
    if isinstance(value, Real):
        number = float(value)
        if math.isnan(number):
            return "NaN"
        if math.isinf(number):
            return "Infinity" if number > 0 else "-Infinity"
        return settings.float_format % number
    raise TypeError(f"cannot encode {type(value).__name__} in a report")


def dumps_report(report: Dict) -> str:
    """Sorted keys and fixed float formatting so equal runs produce equal bytes"""
    return _encode(report, 0) + "\n"


def write_report(report: Dict, out_dir: Union[str, Path], name: str) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.json"
    path.write_text(dumps_report(report))
    logger.info("wrote %s", path)
    return path


def write_table(frame: pd.DataFrame, out_dir: Union[str, Path], name: str) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    frame.to_csv(path, index=False, float_format=settings.float_format)
    logger.info("wrote %s", path)
    return path


def _is_claim(node) -> bool:
    return isinstance(node, dict) and set(node) == CLAIM_KEYS


def lint_report(report, path: str = "$") -> List[Tuple[str, str]]:
    """Floats that are neither claims nor inputs, plus claims missing a bound they need"""
    problems: List[Tuple[str, str]] = []
    if _is_claim(report):
        if report["tier"] not in TIERS:
            problems.append((path, f"unknown tier {report['tier']!r}"))
        elif report["bound"] is None and report["tier"] != EMPIRICAL:
            problems.append((path, f"{report['tier']} claim without a bound"))
        return problems
    if isinstance(report, dict):
        for key, value in report.items():
            if key in INPUT_KEYS:
                continue
            problems.extend(lint_report(value, f"{path}.{key}"))
    elif isinstance(report, list):
        for i, value in enumerate(report):
            problems.extend(lint_report(value, f"{path}[{i}]"))
    elif isinstance(report, float):
        problems.append((path, "bare float outside a claim"))
    return problems


def lint_files(paths: Iterable[Path]) -> Dict[str, List[Tuple[str, str]]]:
    results = {}
    for path in paths:
        data = json.loads(Path(path).read_text())
        results[str(path)] = lint_report(data)
    return results
