"""Versioned JSON Schema for every report the command line emits."""

from __future__ import annotations

import json
from functools import lru_cache

import jsonschema

# Append a new entry whenever the report layout changes; never rewrite history.
SCHEMA_HISTORY = (1,)
SCHEMA_VERSION = SCHEMA_HISTORY[-1]
SCHEMA_ID = f"https://taucert.invalid/schema/report-v{SCHEMA_VERSION}.json"

_INT = {"type": "integer"}
_NINT = {"type": ["integer", "null"]}
_SEEDS = {"type": "array", "items": {"type": "array", "items": _INT}}

_CERTIFICATE = {
    "type": "object",
    "required": [
        "type", "label", "m", "d", "t", "scheme", "trials", "prime", "primes", "seeds",
        "trial_ranks", "achieved_rank", "expected_rank", "scheme_degree", "n_cols", "verdict", "note",
    ],
    "properties": {
        "type": {"const": "Certificate"},
        "label": {"type": "string"},
        "m": _INT,
        "d": _INT,
        "t": _NINT,
        "scheme": {"type": "array", "items": {"type": "string"}},
        "trials": {"type": "integer", "minimum": 1},
        "prime": _INT,
        "primes": {"type": "array", "items": _INT, "minItems": 1},
        "seeds": _SEEDS,
        "trial_ranks": {"type": "array", "items": _INT},
        "achieved_rank": _INT,
        "expected_rank": _INT,
        "scheme_degree": _INT,
        "n_cols": _INT,
        "verdict": {"enum": ["certified", "inconclusive", "out_of_range"]},
        "note": {"type": "string"},
        "checks": {"type": "object"},
    },
}

_NODE_CHECK = {
    "type": "object",
    "required": ["point", "hessian_rank", "chart_rank"],
    "properties": {
        "point": {"type": "array", "items": _INT},
        "hessian_rank": _INT,
        "chart_rank": _INT,
    },
}

_DRIP = {
    "type": "object",
    "required": [
        "type", "m", "d", "t", "seed", "prime", "seeds", "rank", "expected_rank", "scheme_degree",
        "rank_ok", "node_checks", "o_multiplicity", "contact_line_ok", "sing_enumeration",
        "isolatedness", "verdict", "note",
    ],
    "properties": {
        "type": {"const": "DripReport"},
        "m": _INT,
        "d": _INT,
        "t": _INT,
        "seed": _INT,
        "prime": _INT,
        "seeds": _SEEDS,
        "rank": _INT,
        "expected_rank": _INT,
        "scheme_degree": _INT,
        "rank_ok": {"type": "boolean"},
        "node_checks": {"type": "array", "items": _NODE_CHECK},
        "o_multiplicity": {"type": "object"},
        "contact_line_ok": {"type": "boolean"},
        "sing_enumeration": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["matched", "points", "extra_degree", "at_infinity", "attempts"],
                    "properties": {"matched": {"type": "boolean"}},
                },
            ]
        },
        "isolatedness": {"type": "string"},
        "verdict": {"enum": ["certified", "inconclusive", "failed", "out_of_range"]},
        "note": {"type": "string"},
        "checks": {"type": "object"},
    },
}

_RECOVERY = {
    "type": "object",
    "required": [
        "type", "m", "d", "t", "restarts", "seed", "tol", "match_tol", "candidates",
        "converged_count", "matched_count", "matched", "red_alert", "non_matching", "verdict",
    ],
    "properties": {
        "type": {"const": "RecoveryResult"},
        "m": _INT,
        "d": _INT,
        "t": _INT,
        "restarts": {"type": "integer", "minimum": 1},
        "tol": {"type": "number"},
        "match_tol": {"type": "number"},
        "candidates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["theta", "residual"],
                "properties": {
                    "theta": {"type": "array", "items": {"type": "number"}},
                    "residual": {"type": "number"},
                },
            },
        },
        "converged_count": {"type": "integer", "minimum": 0},
        "matched_count": {"type": "integer", "minimum": 0},
        "matched": {"type": "boolean"},
        "red_alert": {"type": "boolean"},
        "non_matching": {"type": "array", "items": _INT},
        "verdict": {"enum": ["matched", "inconclusive", "red_alert"]},
    },
}

_DIMS = {
    "type": "object",
    "required": ["type", "m", "d", "t", "tau_dim", "sigma_dim", "expected_tau", "expected_sigma", "verdict"],
    "properties": {
        "type": {"const": "DimsReport"},
        "m": _INT,
        "d": _INT,
        "t": _INT,
        "tau_dim": _INT,
        "sigma_dim": _INT,
        "expected_tau": _INT,
        "expected_sigma": _INT,
        "verdict": {"const": "computed"},
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": SCHEMA_ID,
    "title": "taucert report document",
    "type": "object",
    "required": ["schema_version", "tool", "version", "command", "job", "reports", "summary", "meta"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool": {"const": "taucert"},
        "version": {"type": "string"},
        "command": {"enum": ["dims", "h1", "certify", "unique"]},
        "job": {"type": "object"},
        "reports": {
            "type": "array",
            "items": {
                "oneOf": [
                    {"$ref": "#/$defs/Certificate"},
                    {"$ref": "#/$defs/DripReport"},
                    {"$ref": "#/$defs/RecoveryResult"},
                    {"$ref": "#/$defs/DimsReport"},
                ]
            },
        },
        "summary": {
            "type": "object",
            "required": ["exit_code", "verdicts"],
            "properties": {"exit_code": {"enum": [0, 1, 2]}, "verdicts": {"type": "object"}},
        },
        "meta": {"type": "object"},
    },
    "$defs": {
        "Certificate": _CERTIFICATE,
        "DripReport": _DRIP,
        "RecoveryResult": _RECOVERY,
        "DimsReport": _DIMS,
    },
}


def report_schema() -> dict:
    """A deep copy of the current schema document."""
    return json.loads(json.dumps(SCHEMA))


@lru_cache(maxsize=None)
def _validator(kind: str | None):
    schema = report_schema()
    if kind is not None:
        schema = {"$defs": schema["$defs"], "$ref": f"#/$defs/{kind}"}
    return jsonschema.Draft202012Validator(schema)


def validate_document(doc: dict) -> None:
    _validator(None).validate(doc)


def validate_report(report: dict) -> None:
    """Validate one report against the definition named by its ``type``."""
    kind = report.get("type")
    if kind not in SCHEMA["$defs"]:
        raise jsonschema.ValidationError(f"unknown report type {kind!r}")
    _validator(kind).validate(report)
