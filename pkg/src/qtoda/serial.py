"""
Canonical JSON for the artifact objects, with schema validation on load.

Output uses sorted keys and fixed separators, so equal objects give equal
bytes.  Rationals are "p/q" strings (integers without the "/1").
"""

from __future__ import annotations

import json
from typing import Any

import jsonschema

from .exactalg import SparsePoly
from .qcoh import QMatrix
from .toda import NOElement


class SchemaError(ValueError):
    """Malformed or schema-violating input; ``path`` locates the bad node."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


RATIONAL = {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"}
EXPS = {"type": "array", "items": {"type": "integer", "minimum": 0}}

POLY_TERMS = {"type": "array", "items": {
    "type": "object",
    "required": ["coeff", "exps"],
    "properties": {"coeff": RATIONAL, "exps": EXPS},
    "additionalProperties": False,
}}

SCHEMAS: dict[str, dict] = {
    "poly": {
        "type": "object",
        "required": ["vars", "weights", "terms"],
        "properties": {
            "vars": {"type": "array", "items": {"type": "string"}},
            "weights": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            "terms": POLY_TERMS,
        },
        "additionalProperties": False,
    },
    "no_element": {
        "type": "object",
        "required": ["rank", "terms"],
        "properties": {
            "rank": {"type": "integer", "minimum": 1},
            "terms": {"type": "array", "items": {
                "type": "object",
                "required": ["coeff", "X", "L"],
                "properties": {"coeff": RATIONAL, "X": EXPS, "L": EXPS},
                "additionalProperties": False,
            }},
        },
        "additionalProperties": False,
    },
    "qmatrix": {
        "type": "object",
        "required": ["size", "vars", "weights", "entries"],
        "properties": {
            "size": {"type": "integer", "minimum": 1},
            "vars": {"type": "array", "items": {"type": "string"}},
            "weights": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            "entries": {"type": "array", "items": {
                "type": "object",
                "required": ["row", "col", "poly"],
                "properties": {
                    "row": {"type": "integer", "minimum": 0},
                    "col": {"type": "integer", "minimum": 0},
                    "poly": POLY_TERMS,
                },
                "additionalProperties": False,
            }},
        },
        "additionalProperties": False,
    },
}

_LOADERS = {"poly": SparsePoly.from_json, "no_element": NOElement.from_json, "qmatrix": QMatrix.from_json}
_KINDS = {SparsePoly: "poly", NOElement: "no_element", QMatrix: "qmatrix"}


def canonical_dumps(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def _path(parts, root: str = "$") -> str:
    out = root
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate(data: Any, kind: str, root: str = "$") -> None:
    validator = jsonschema.Draft202012Validator(SCHEMAS[kind])
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, _path(err.absolute_path, root))


def serialize(obj) -> str:
    kind = _KINDS.get(type(obj))
    if kind is None:
        raise TypeError(f"no canonical form for {type(obj).__name__}")
    return canonical_dumps({"kind": kind, "value": obj.to_json()})


def deserialize(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg} at line {exc.lineno}") from exc
    if not isinstance(data, dict) or set(data) != {"kind", "value"}:
        raise SchemaError("expected an object with keys 'kind' and 'value'")
    kind = data["kind"]
    if kind not in SCHEMAS:
        raise SchemaError(f"unknown kind {kind!r}", "$.kind")
    validate(data["value"], kind, "$.value")
    try:
        return _LOADERS[kind](data["value"])
    except (ValueError, KeyError) as exc:
        raise SchemaError(str(exc), "$.value") from exc
