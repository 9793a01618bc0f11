"""Versioned JSON schemas for the CLI config files."""

SCHEMA_VERSION = 1

_STATE = {
    "oneOf": [
        {"type": "string"},
        {"type": "array", "items": {
            "type": "array", "items": {
                "type": "array", "items": {"type": "number"},
                "minItems": 2, "maxItems": 2},
            "minItems": 4, "maxItems": 4},
         "minItems": 4, "maxItems": 4},
    ]
}
_WITNESS = {"enum": ["plus", "minus", "tilde"]}

WITNESS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "witness config",
    "version": SCHEMA_VERSION,
    "type": "object",
    "required": ["rhoS"],
    "additionalProperties": False,
    "properties": {"rhoS": _STATE},
}

GAS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "gas config",
    "version": SCHEMA_VERSION,
    "type": "object",
    "required": ["N", "m", "beta", "alpha", "rhoS", "witness", "tMax",
                 "nSteps", "samples"],
    "additionalProperties": False,
    "properties": {
        "N": {"type": "integer", "minimum": 1},
        "m": {"type": "number", "exclusiveMinimum": 0},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "alpha": {"type": "number"},
        "rhoS": _STATE,
        "witness": _WITNESS,
        "tMax": {"type": "number", "exclusiveMinimum": 0},
        "nSteps": {"type": "integer", "minimum": 2},
        "samples": {"type": "integer", "minimum": 2},
    },
}

RADIATION_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "radiation config",
    "version": SCHEMA_VERSION,
    "type": "object",
    "required": ["L", "kMax", "gridN", "epsilon0", "dipole", "rhoS",
                 "witness", "T", "nSteps"],
    "additionalProperties": False,
    "properties": {
        "L": {"type": "number", "exclusiveMinimum": 0},
        "kMax": {"type": "number", "exclusiveMinimum": 0},
        "gridN": {"type": "integer", "minimum": 2},
        "epsilon0": {"type": "number", "exclusiveMinimum": 0},
        "dipole": {
            "type": "object",
            "required": ["type"],
            "properties": {
                "type": {"enum": ["gaussian", "planewave", "file"]},
                "width": {"type": "number", "exclusiveMinimum": 0},
                "direction": {"type": "array", "items": {"type": "number"},
                              "minItems": 3, "maxItems": 3},
                "amplitude": {"type": "number"},
                "nTriple": {"type": "array", "items": {"type": "integer"},
                            "minItems": 3, "maxItems": 3},
                "polIndex": {"type": "integer", "minimum": 0, "maximum": 1},
                "path": {"type": "string"},
            },
        },
        "rhoS": _STATE,
        "witness": _WITNESS,
        "T": {"type": "number", "exclusiveMinimum": 0},
        "nSteps": {"type": "integer", "minimum": 2},
    },
}

CAVITY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "cavity config",
    "version": SCHEMA_VERSION,
    "type": "object",
    "required": ["epsilons", "omega", "gamma", "nMax", "rhoS0", "envInit",
                 "tMax", "nSteps"],
    "additionalProperties": False,
    "properties": {
        "epsilons": {"type": "array", "items": {"type": "number"},
                     "minItems": 4, "maxItems": 4},
        "omega": {"type": "number", "exclusiveMinimum": 0},
        "gamma": {"type": "number"},
        "nMax": {"type": "integer", "minimum": 10},
        "rhoS0": _STATE,
        "envInit": {"enum": ["vacuum", "thermal"]},
        "envBeta": {"type": "number", "exclusiveMinimum": 0},
        "tMax": {"type": "number", "exclusiveMinimum": 0},
        "nSteps": {"type": "integer", "minimum": 2},
        "frozen": {"type": "boolean"},
    },
}

VERIFY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "verify config",
    "version": SCHEMA_VERSION,
    "type": "object",
    "additionalProperties": False,
    "properties": {},
}

BY_SUBCOMMAND = {
    "witness": WITNESS_SCHEMA,
    "gas": GAS_SCHEMA,
    "radiation": RADIATION_SCHEMA,
    "cavity": CAVITY_SCHEMA,
    "verify": VERIFY_SCHEMA,
}
