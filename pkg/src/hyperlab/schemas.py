"""JSON schemas for every object read from or written to disk.

Each ``from_dict`` in the package validates its input against the schema
named here before building the value, so malformed files fail early with
an :class:`~hyperlab.errors.InputError`.
"""
import jsonschema

from .errors import InputError

_number = {"type": "number"}
_complex = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}
_positive = {"type": "number", "exclusiveMinimum": 0}

WINDOW_VECTOR = {
    "type": "object",
    "required": ["p", "lo", "hi", "coeffs"],
    "properties": {
        "p": {"type": "number", "minimum": 1},
        "lo": {"type": "integer"},
        "hi": {"type": "integer"},
        "axis": {"enum": ["N", "Z"]},
        "coeffs": {"type": "array", "items": _complex, "minItems": 1},
    },
}

WEIGHT_SEQUENCE = {
    "type": "object",
    "required": ["axis", "rule"],
    "properties": {
        "axis": {"enum": ["N", "Z"]},
        "rule": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["kind", "value"],
                    "properties": {"kind": {"const": "constant"}, "value": _positive},
                },
                {
                    "type": "object",
                    "required": ["kind", "values"],
                    "properties": {
                        "kind": {"const": "periodic"},
                        "values": {"type": "array", "items": _positive, "minItems": 1},
                    },
                },
                {
                    "type": "object",
                    "required": ["kind", "neg_value", "pos_value"],
                    "properties": {
                        "kind": {"const": "piecewise"},
                        "neg_value": _positive,
                        "pos_value": _positive,
                        "breakpoint": {"type": "integer"},
                    },
                },
                {
                    "type": "object",
                    "required": ["kind", "values", "default_tail"],
                    "properties": {
                        "kind": {"const": "explicit"},
                        "values": {
                            "type": "object",
                            "patternProperties": {"^-?[0-9]+$": _positive},
                            "additionalProperties": False,
                        },
                        "default_tail": _positive,
                    },
                },
            ]
        },
    },
}

MOEBIUS_MAP = {
    "type": "object",
    "required": ["a", "b", "c", "d"],
    "properties": {k: _complex for k in "abcd"},
}

HARDY_FUNCTION = {
    "type": "object",
    "required": ["coeffs"],
    "properties": {"coeffs": {"type": "array", "items": _complex, "minItems": 1}},
}

CRITERION_INSTANCE = {
    "type": "object",
    "required": ["weights", "Y", "Z", "nk"],
    "properties": {
        "weights": WEIGHT_SEQUENCE,
        "Y": {"type": "array", "items": WINDOW_VECTOR, "minItems": 1},
        "Z": {"type": "array", "items": WINDOW_VECTOR, "minItems": 1},
        "nk": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "M": _positive,
    },
}

REPORT = {
    "type": "object",
    "required": ["check", "verdict"],
    "properties": {
        "check": {"type": "string"},
        "verdict": {
            "enum": ["PASS", "FAIL", "EVIDENCE_HYPERCYCLIC", "VIOLATED", "UNDETERMINED_AT_HORIZON"]
        },
        "witness": {"type": "object"},
        "summary": {"type": "object"},
        "series": {"type": "object"},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}

SCHEMAS = {
    "window_vector": WINDOW_VECTOR,
    "weight_sequence": WEIGHT_SEQUENCE,
    "moebius_map": MOEBIUS_MAP,
    "hardy_function": HARDY_FUNCTION,
    "criterion_instance": CRITERION_INSTANCE,
    "report": REPORT,
}


def validate(data, name):
    try:
        jsonschema.validate(data, SCHEMAS[name])
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"invalid {name} at {path}: {exc.message}") from None
