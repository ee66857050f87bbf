"""Versioned JSON configuration for the experiment driver.

Each experiment owns a table of defaults; a config file may override any of
them and must carry ``schema: 1``.  Unknown keys are rejected.
"""
from __future__ import annotations

import json
from typing import Any

import jsonschema

from .errors import ConfigInvalid

SCHEMA_VERSION = 1

DEFAULTS: dict[str, dict[str, Any]] = {
    "volume-check": {
        "fields": ["Q", "Q(sqrt5)", "Q(i)"],
        "tol_rational": 1e-12,
        "tol_oracle": 1e-6,
        "zeta_cutoff": 100000,
    },
    "eisenstein-check": {
        "fields": ["Q", "Q(sqrt5)", "Q(i)"],
        "s_values": [2.0, 2.3],
        "nontrivial_m_field": "Q(sqrt5)",
        "points": 20,
        "y_range": [0.8, 1.6],
        "tol": 1e-6,
    },
    "special-check": {
        "triples": 20,
        "tol": 1e-8,
    },
    "whittaker-check": {
        "k_max": 40,
        "tol": 1e-8,
    },
    "luosarnak-check": {
        "k_values": [50, 100, 200, 400, 800],
        "s_values": [[1.0, 0.0], [0.5, 0.0], [1.5, 0.0], [2.0, 0.0], [3.0, 0.0],
                     [0.5, 3.0], [0.5, 10.0], [1.0, 5.0], [2.0, 2.0]],
        "growth_factor": 2.0,
    },
    "hecke-check": {
        "weights": [12, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34, 36, 38, 40, 42, 44, 46, 48, 50, 52,
                    54, 56, 58, 60],
        "nmax": 5000,
    },
    "holonorm-check": {
        "weights": [12, 16, 20],
        "prime_cutoff": 100000,
        "margin": 0.02,
    },
    "que-table": {
        "weights": [12, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34, 36, 38, 40, 42, 44, 46, 48, 50, 52,
                    54, 56, 58, 60],
        "profiles": ["psi1", "psi2", "psi3"],
        "coefficients": 3000,
    },
    "unfold-check": {
        "T_values": [1, 2, 4, 8, 16, 32, 64],
        "g_sigma": 0.3,
        "profile": "psi2",
        "coefficients": 4000,
        "growth_factor": 2.0,
    },
    "zero-table": {
        "weights": [12, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34, 36, 38, 40, 42, 44, 46, 48, 50, 52,
                    54, 56, 58, 60],
        "coefficients": 2000,
    },
    "sup-check": {
        "weights": [12, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34, 36, 38, 40, 42, 44, 46, 48, 50, 52,
                    54, 56, 58, 60],
        "max_exponent": 1.5,
        "deltas": [0.1, 0.5, 1.0],
    },
    "sieve-check": {
        "n1_instances": 200,
        "n2_instances": 50,
        "nu": 0.5,
        "stability": 2.0,
    },
    "shift-table": {
        "delta_exponents": [12, 13, 14, 15, 16, 17, 18, 19, 20],
        "shifts": [1, 2, 3],
        "field_boxes": [50, 100, 200, 300],
        "eps": 0.5,
        "growth_factor": 2.0,
    },
    "ems-check": {
        "exponents": [10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20],
    },
    "mk-table": {
        "weights": [12, 16, 18, 20, 22, 26],
        "k_values": [1000, 3000, 10000, 30000, 100000],
        "prime_cutoff": 100000,
        "slack_exponent": 0.2,
    },
    "ramanujan-check": {
        "x_values": [1000, 3000, 10000, 30000, 100000, 300000, 1000000],
    },
}

EXPERIMENTS = tuple(DEFAULTS)


def _json_type(value: Any) -> dict:
    if isinstance(value, bool):
        return {"type": "boolean"}
    if isinstance(value, int):
        return {"type": "integer"}
    if isinstance(value, float):
        return {"type": "number"}
    if isinstance(value, str):
        return {"type": "string"}
    if isinstance(value, list):
        return {"type": "array"}
    raise TypeError(value)


def schema_for(experiment: str) -> dict:
    props = {"schema": {"const": SCHEMA_VERSION}, "experiment": {"const": experiment},
             "seed": {"type": "integer"}}
    for key, val in DEFAULTS[experiment].items():
        props[key] = _json_type(val)
    return {"type": "object", "properties": props, "required": ["schema"],
            "additionalProperties": False}


def validate(experiment: str, raw: Any) -> dict:
    """Merged parameters; raises ConfigInvalid naming the offending key."""
    if experiment not in DEFAULTS:
        raise ConfigInvalid(f"unknown experiment {experiment!r}")
    if not isinstance(raw, dict):
        raise ConfigInvalid("config must be a JSON object")
    unknown = sorted(set(raw) - set(schema_for(experiment)["properties"]))
    if unknown:
        raise ConfigInvalid(f"unknown key {unknown[0]!r}")
    try:
        jsonschema.validate(raw, schema_for(experiment))
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "schema"
        raise ConfigInvalid(f"key {where!r}: {exc.message}") from None
    params = dict(DEFAULTS[experiment])
    params.update({k: v for k, v in raw.items() if k not in ("schema", "experiment")})
    return params


def load(experiment: str, path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"invalid JSON: {exc}") from None
    return validate(experiment, raw)
