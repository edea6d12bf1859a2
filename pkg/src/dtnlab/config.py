"""Run configuration: parsing, validation, canonical serialization, hashing.

Configurations are JSON documents (UTF-8, key/value with nesting).  Parsing
either returns a fully validated :class:`RunConfig` with defaults filled or
raises :class:`ConfigError` carrying a list of positioned issues
``(path, message)``; expression syntax errors additionally carry the column
inside the offending string.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

from .errors import ConfigError, ExpressionError
from .expressions import parse_expression

__all__ = ["RunConfig", "parse_config", "serialize_config", "config_hash", "SCHEMA_VERSION"]

SCHEMA_VERSION = "1"

EXPERIMENT_KINDS = ("validate", "dtn", "graph", "sector", "converge", "resolvent", "check")

_KNOWN_TOP = {"schema_version", "geometry", "coefficients", "pivot", "experiment", "output"}
_KNOWN_GEOMETRY = {"kind", "n", "nx", "ny"}
_KNOWN_COEFF = {"a", "m"}
_KNOWN_PIVOT = {"gram"}
_KNOWN_EXPERIMENT = {"kind", "parameters"}
_KNOWN_OUTPUT = {"csv_path", "svg_path", "seed"}
_KNOWN_PARAMETERS = {
    "samples",
    "witnesses",
    "n_oscs",
    "grid_factor",
    "lambda_offsets",
    "a_template",
    "m_template",
    "a_limit",
    "m_limit",
    "mu",
    "norm_cap",
}


@dataclass(frozen=True)
class RunConfig:
    """A validated experiment configuration with defaults filled."""

    geometry: dict
    coefficients: dict
    pivot: dict
    experiment: dict
    output: dict
    schema_version: str = SCHEMA_VERSION

    def as_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "geometry": dict(self.geometry),
            "coefficients": dict(self.coefficients),
            "pivot": dict(self.pivot),
            "experiment": {
                "kind": self.experiment["kind"],
                "parameters": dict(self.experiment.get("parameters", {})),
            },
            "output": dict(self.output),
        }


def _check_unknown(issues, data, known, path, strict):
    if not strict:
        return
    for key in data:
        if key not in known:
            issues.append((f"{path}.{key}" if path else key, "unknown key"))


def _coefficient_issue(spec, path, issues):
    if isinstance(spec, (int, float, complex)):
        return
    if isinstance(spec, str):
        try:
            parse_expression(spec)
        except ExpressionError as exc:
            issues.append((path, f"expression syntax error at column {exc.column}: {exc}"))
        return
    if isinstance(spec, list):
        if not all(isinstance(v, (int, float)) for v in spec):
            issues.append((path, "per-dof coefficient arrays must hold numbers"))
        return
    if isinstance(spec, dict):
        for fam, sub in spec.items():
            if fam not in ("x", "y"):
                issues.append((f"{path}.{fam}", "face families are 'x' and 'y'"))
            else:
                _coefficient_issue(sub, f"{path}.{fam}", issues)
        return
    issues.append((path, f"unsupported coefficient specification {type(spec).__name__}"))


def parse_config(text: str, strict: bool = False) -> RunConfig:
    """Parse and validate a configuration document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
            issues=[("", f"line {exc.lineno} col {exc.colno}: {exc.msg}")],
        ) from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")

    issues: list = []
    _check_unknown(issues, data, _KNOWN_TOP, "", strict)

    schema_version = str(data.get("schema_version", SCHEMA_VERSION))

    geometry = dict(data.get("geometry", {"kind": "interval", "n": 16}))
    _check_unknown(issues, geometry, _KNOWN_GEOMETRY, "geometry", strict)
    kind = geometry.get("kind")
    if kind == "interval":
        n = geometry.get("n")
        if not isinstance(n, int) or n < 1:
            issues.append(("geometry.n", "interval needs an integer n >= 1"))
        geometry = {"kind": "interval", "n": n}
    elif kind == "rectangle":
        nx, ny = geometry.get("nx"), geometry.get("ny")
        if not isinstance(nx, int) or nx < 1:
            issues.append(("geometry.nx", "rectangle needs an integer nx >= 1"))
        if not isinstance(ny, int) or ny < 1:
            issues.append(("geometry.ny", "rectangle needs an integer ny >= 1"))
        geometry = {"kind": "rectangle", "nx": nx, "ny": ny}
    else:
        issues.append(("geometry.kind", "kind must be 'interval' or 'rectangle'"))

    coefficients = dict(data.get("coefficients", {"a": 1.0, "m": 1.0}))
    _check_unknown(issues, coefficients, _KNOWN_COEFF, "coefficients", strict)
    coefficients.setdefault("a", 1.0)
    coefficients.setdefault("m", 1.0)
    _coefficient_issue(coefficients["a"], "coefficients.a", issues)
    _coefficient_issue(coefficients["m"], "coefficients.m", issues)

    pivot = dict(data.get("pivot", {"gram": "default"}))
    _check_unknown(issues, pivot, _KNOWN_PIVOT, "pivot", strict)
    gram = pivot.get("gram", "default")
    if gram != "default":
        if not isinstance(gram, list) or not all(
            isinstance(w, (int, float)) and w > 0 for w in gram
        ):
            issues.append(("pivot.gram", "custom pivot gram must be a list of positive weights"))
    pivot = {"gram": gram}

    experiment = dict(data.get("experiment", {"kind": "validate"}))
    _check_unknown(issues, experiment, _KNOWN_EXPERIMENT, "experiment", strict)
    exp_kind = experiment.get("kind")
    if exp_kind not in EXPERIMENT_KINDS:
        issues.append(("experiment.kind", f"kind must be one of {EXPERIMENT_KINDS}"))
    parameters = dict(experiment.get("parameters", {}))
    _check_unknown(issues, parameters, _KNOWN_PARAMETERS, "experiment.parameters", strict)
    for key in ("a_template", "m_template", "a_limit", "m_limit"):
        if key in parameters and isinstance(parameters[key], str) and "{n}" not in parameters[key]:
            _coefficient_issue(parameters[key], f"experiment.parameters.{key}", issues)
    experiment = {"kind": exp_kind, "parameters": parameters}

    output = dict(data.get("output", {}))
    _check_unknown(issues, output, _KNOWN_OUTPUT, "output", strict)
    csv_path = output.get("csv_path", f"{exp_kind}.csv" if exp_kind else "out.csv")
    svg_path = output.get("svg_path")
    seed = output.get("seed", 42)
    if not isinstance(csv_path, str):
        issues.append(("output.csv_path", "csv_path must be a string"))
    if svg_path is not None and not isinstance(svg_path, str):
        issues.append(("output.svg_path", "svg_path must be a string or null"))
    if not isinstance(seed, int):
        issues.append(("output.seed", "seed must be an integer"))
    output = {"csv_path": csv_path, "svg_path": svg_path, "seed": seed}

    if issues:
        detail = "; ".join(f"{p}: {m}" for p, m in issues)
        raise ConfigError(f"invalid configuration: {detail}", issues=issues)

    return RunConfig(
        geometry=geometry,
        coefficients=coefficients,
        pivot=pivot,
        experiment=experiment,
        output=output,
        schema_version=schema_version,
    )


def serialize_config(config: RunConfig) -> str:
    """Canonical JSON form (sorted keys); parse(serialize(c)) == c."""
    return json.dumps(config.as_dict(), sort_keys=True, indent=2)


def config_hash(config: RunConfig) -> str:
    """Stable 12-hex-digit digest of the canonical serialization."""
    return hashlib.sha256(serialize_config(config).encode("utf-8")).hexdigest()[:12]
