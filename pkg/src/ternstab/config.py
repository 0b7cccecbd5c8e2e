"""Run configuration: loading, schema validation and object construction.

A config is a JSON or TOML document::

    schema_version = 1
    command = "theorem25"        # axioms | residual | extract | theorem25 | theorem26 | corollary
    output_dir = "out"           # optional, --out overrides
    formats = ["json", "csv"]    # optional, --format overrides

    [spec]                       # command-specific payload, see SPEC_SCHEMAS
    algebra = "complex"
    ...
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from typing import List

import jsonschema
import tomli

from .algebra import AlgebraInstance
from .errors import ConfigError, SchemaError
from .fixedpoint import ControlFunction
from .funceq import FunctionHandle, parse_scalar
from .sampling import SampleGrid
from .stability import ExperimentSpec, Tolerances

SCHEMA_VERSION = 1
COMMANDS = ("axioms", "residual", "extract", "theorem25", "theorem26", "corollary")
FORMATS = ("json", "csv")

_number = {"type": "number"}
_scalar_schema = {
    "oneOf": [
        _number,
        {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
    ]
}
_algebra = {"type": "string", "pattern": r"^(complex|pointwise:[1-9][0-9]*|matrix:[1-9][0-9]*)$"}
_u64 = {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}
_j = {"type": "integer", "enum": [1, 2]}
_grid = {
    "type": "object",
    "properties": {
        "seed": _u64,
        "count": {"type": "integer", "minimum": 1},
        "band": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2, "maxItems": 2},
        "structured": {"type": "boolean"},
    },
    "additionalProperties": False,
}
_term = {
    "type": "object",
    "properties": {
        "term": {
            "enum": ["linear", "quadratic", "cubic", "even_quartic", "constant", "power_perturbation"]
        },
        "c": _scalar_schema,
        "s": {"type": "number", "minimum": 0},
        "r": _number,
        "direction": {"enum": ["odd", "even", "fixed"]},
        "seed": _u64,
    },
    "required": ["term"],
    "additionalProperties": False,
}
_handle = {
    "type": "object",
    "properties": {
        "terms": {"type": "array", "items": _term},
        "parity": {"enum": ["odd", "even", "none"]},
    },
    "required": ["terms"],
    "additionalProperties": False,
}
_power = {
    "type": "object",
    "properties": {"s": {"type": "number", "minimum": 0}, "r": _number},
    "required": ["s", "r"],
    "additionalProperties": False,
}
_control = {
    "type": "object",
    "properties": {
        "family": {"enum": ["power", "constant"]},
        "s": {"type": "number", "minimum": 0},
        "r": _number,
        "c": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}
_tolerances = {
    "type": "object",
    "properties": {
        "convergence": {"type": "number", "exclusiveMinimum": 0},
        "bound_slack": {"type": "number", "minimum": 0},
        "defect": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}
_positive = {"type": "number", "exclusiveMinimum": 0}
_nmax = {"type": "integer", "minimum": 1}


def _obj(required, **props):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_experiment = dict(
    algebra=_algebra,
    j=_j,
    rho=_scalar_schema,
    base=_handle,
    perturbation=_power,
    seed=_u64,
    grid=_grid,
    tolerances=_tolerances,
    n_max=_nmax,
)

SPEC_SCHEMAS = {
    "axioms": _obj(["algebra"], algebra=_algebra, grid=_grid, tol=_positive),
    "residual": _obj(
        ["algebra", "j", "handle"],
        algebra=_algebra, j=_j, rho=_scalar_schema, handle=_handle, grid=_grid, control=_control, tol=_positive,
    ),
    "extract": _obj(
        ["algebra", "j", "handle"],
        algebra=_algebra, j=_j, handle=_handle, grid=_grid, n_max=_nmax, tol=_positive,
    ),
    "theorem25": _obj(["algebra", "j", "base", "perturbation"], **_experiment),
    "theorem26": _obj(
        ["algebra", "j", "base_hom", "base_der", "perturbation", "sigma"],
        **{k: v for k, v in _experiment.items() if k != "base"},
        base_hom=_handle,
        base_der=_handle,
        sigma=_power,
        perturbation_der=_power,
    ),
    "corollary": _obj(["s", "r", "j"], s={"type": "number", "minimum": 0}, r=_number, j=_j),
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": list(COMMANDS)},
        "spec": {"type": "object"},
        "output_dir": {"type": "string"},
        "formats": {
            "type": "array",
            "items": {"enum": list(FORMATS)},
            "minItems": 1,
            "uniqueItems": True,
        },
    },
    "required": ["schema_version", "command", "spec"],
    "additionalProperties": False,
}


@dataclass
class RunConfig:
    command: str
    spec: dict
    output_dir: str = "."
    formats: List[str] = field(default_factory=lambda: ["json"])


def read_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if os.fspath(path).endswith(".toml"):
            return tomli.loads(raw.decode("utf-8"))
        return json.loads(raw)
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def _validate(instance, schema, where: str) -> None:
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"{where}{'/' + loc if loc else ''}: {exc.message}") from None


def validate_config(doc: dict) -> RunConfig:
    _validate(doc, CONFIG_SCHEMA, "config")
    command = doc["command"]
    _validate(doc["spec"], SPEC_SCHEMAS[command], "spec")
    return RunConfig(
        command,
        copy.deepcopy(doc["spec"]),
        doc.get("output_dir", "."),
        list(doc.get("formats", ["json"])),
    )


def load_config(path) -> RunConfig:
    return validate_config(read_config(path))


# --- construction helpers --------------------------------------------------

def build_grid(d: dict = None) -> SampleGrid:
    d = d or {}
    default = SampleGrid()
    return SampleGrid(
        seed=d.get("seed", default.seed),
        count=d.get("count", default.count),
        radius_band=tuple(d.get("band", default.radius_band)),
        includes_structured=d.get("structured", default.includes_structured),
    )


def build_handle(d: dict, algebra: AlgebraInstance) -> FunctionHandle:
    return FunctionHandle.from_dict(d, algebra)


def build_experiment(spec: dict) -> ExperimentSpec:
    algebra = AlgebraInstance.parse(spec["algebra"])
    base = spec.get("base", spec.get("base_hom"))
    return ExperimentSpec(
        algebra=algebra,
        j=spec["j"],
        base=build_handle(base, algebra),
        perturbation=ControlFunction.power(spec["perturbation"]["s"], spec["perturbation"]["r"]),
        rho=parse_scalar(spec.get("rho", 2)),
        seed=spec.get("seed", 0),
        grid=build_grid(spec.get("grid")),
        tolerances=Tolerances(**spec.get("tolerances", {})),
        n_max=spec.get("n_max", 200),
    )
