"""Experiment configuration documents: JSON loading, schema validation and resolution."""

from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema

from .errors import ConfigInvalid

_code = {
    "type": "object",
    "properties": {
        "generators": {"type": "string", "pattern": r"^\s*[0-7]+(\s*,\s*[0-7]+)+\s*$"},
        "constraint_length": {"type": ["integer", "null"], "minimum": 2},
        "puncture": {
            "oneOf": [
                {"type": "null"},
                {"type": "string"},
                {"type": "array", "minItems": 2,
                 "items": {"type": "array", "minItems": 1, "items": {"enum": [0, 1]}}},
            ]
        },
    },
    "required": ["generators"],
    "additionalProperties": False,
}

_pattern = {
    "oneOf": [
        {"type": "string", "pattern": r"^(rotating|designed|block:[1-9][0-9]*)$"},
        {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
    ]
}

_snr = {"type": "array", "minItems": 1, "items": {"type": "number"}}
_window = {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}}
_antennas = {"type": "integer", "minimum": 1, "maximum": 8}

_sim_run = {
    "code": _code,
    "label": {"type": "string"},
    "pattern": _pattern,
    "M": _antennas, "N": _antennas,
    "S": {"type": "integer", "minimum": 1},
    "m": {"type": "integer", "minimum": 1, "maximum": 8},
    "L": {"type": "integer", "minimum": 1},
    "snr_db": _snr,
    "target_bit_errors": {"type": "integer", "minimum": 1},
    "max_packets": {"type": "integer", "minimum": 1},
    "min_packets": {"type": "integer", "minimum": 0},
    "batch_packets": {"type": "integer", "minimum": 1},
    "interleave": {"type": "boolean"},
    "chain": {"enum": ["reduced", "full"]},
    "slope_window": _window,
}

SCHEMAS = {
    "spectrum": {
        "type": "object",
        "properties": {
            "code": _code, "S": {"type": "integer", "minimum": 1}, "pattern": _pattern,
            "n": {"type": "integer", "minimum": 1},
            "max_dH": {"type": ["integer", "null"], "minimum": 1},
            "M": _antennas, "N": _antennas, "seed": {"type": "integer", "minimum": 0},
        },
        "required": ["code", "S"],
        "additionalProperties": False,
    },
    "design": {
        "type": "object",
        "properties": {
            "code": _code, "S": {"type": "integer", "minimum": 1},
            "n": {"type": "integer", "minimum": 1},
            "period_bits": {"type": ["integer", "null"], "minimum": 1},
            "M": _antennas, "N": _antennas, "seed": {"type": "integer", "minimum": 0},
        },
        "required": ["code", "S"],
        "additionalProperties": False,
    },
    "simulate-ber": {
        "type": "object",
        "properties": dict(_sim_run, seed={"type": "integer", "minimum": 0},
                           runs={"type": "array", "minItems": 1,
                                 "items": {"type": "object", "properties": _sim_run,
                                           "additionalProperties": False}}),
        "additionalProperties": False,
    },
    "simulate-pep": {
        "type": "object",
        "properties": {
            "M": _antennas, "N": _antennas, "m": {"type": "integer", "minimum": 1, "maximum": 8},
            "alphas": {"type": "array", "minItems": 1,
                       "items": {"type": "array", "minItems": 1,
                                 "items": {"type": "integer", "minimum": 0}}},
            "snr_db": _snr, "trials": {"type": "integer", "minimum": 1},
            "method": {"enum": ["importance", "direct"]},
            "slope_window": _window, "seed": {"type": "integer", "minimum": 0},
        },
        "required": ["M", "N", "alphas", "snr_db"],
        "additionalProperties": False,
    },
    "diversity-table": {
        "type": "object",
        "properties": {
            "M": _antennas, "N": _antennas,
            "rates": {"type": "array", "items": {"type": "string", "pattern": r"^\d+(/\d+)?$"}},
        },
        "required": ["M", "N"],
        "additionalProperties": False,
    },
    "verify-appendix": {
        "type": "object",
        "properties": {
            "M_max": {"type": "integer", "minimum": 1, "maximum": 5},
            "N_max": {"type": "integer", "minimum": 1, "maximum": 5},
            "formula_offset": {"type": "integer"},
        },
        "required": ["M_max", "N_max"],
        "additionalProperties": False,
    },
}

DEFAULTS = {
    "spectrum": {"pattern": "rotating", "n": 1, "max_dH": None, "seed": 0},
    "design": {"n": 1, "period_bits": None, "seed": 0},
    "simulate-ber": {"seed": 0},
    "simulate-pep": {"m": 2, "trials": 1_000_000, "method": "importance",
                     "slope_window": [20, 30], "seed": 0},
    "diversity-table": {"rates": ["1/4", "1/3", "1/2", "2/3", "3/4", "1"]},
    "verify-appendix": {"formula_offset": 0},
}

SIM_DEFAULTS = {"pattern": "rotating", "M": 2, "N": 2, "S": 2, "m": 2, "L": 512,
                "target_bit_errors": 100, "max_packets": 100_000, "min_packets": 0,
                "batch_packets": 64, "interleave": True, "chain": "reduced"}


def parse_json(text: str, source: str = "<config>") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigInvalid(f"{source}: top level must be a JSON object")
    return doc


def load_config(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from exc
    return parse_json(text, str(path))


def validate(command: str, doc: dict) -> None:
    try:
        jsonschema.validate(doc, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigInvalid(f"{where}: {exc.message}") from exc


def resolve(command: str, doc: dict, seed: int | None = None) -> dict:
    """Validate and fill defaults; a seed given here overrides the document."""
    validate(command, doc)
    out = copy.deepcopy(DEFAULTS.get(command, {}))
    out.update(copy.deepcopy(doc))
    if seed is not None and command in ("spectrum", "design", "simulate-ber", "simulate-pep"):
        out["seed"] = seed
    if command == "simulate-ber":
        shared = {k: v for k, v in out.items() if k != "runs"}
        runs = out.get("runs") or [{}]
        resolved = []
        for i, run in enumerate(runs):
            r = dict(SIM_DEFAULTS)
            r.update(shared)
            r.update(run)
            r.setdefault("label", f"run{i}")
            if "code" not in r or "snr_db" not in r:
                raise ConfigInvalid(f"runs/{i}: 'code' and 'snr_db' are required")
            r.setdefault("slope_window", [min(r["snr_db"]), max(r["snr_db"])])
            resolved.append(r)
        out = {"seed": out["seed"], "runs": resolved}
    return out
