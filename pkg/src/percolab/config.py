"""Experiment configuration: flat ``key = value`` text with one section per experiment.

    [experiment]
    tag = one-arm
    seed = 12345
    trials = 1000
    workers = 1
    out = results/one_arm.csv

    [one-arm]
    family = triangular-lattice-disk
    size = 32
    radii = 4, 8, 16
    p = 0.5

Only the section named by ``tag`` may appear besides ``[experiment]``.
Keys missing from a section take the schema default.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field as ``section.key``."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _fmt(value: Any) -> str:
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class Field:
    parse: Callable[[str], Any]
    default: Any


FAMILIES = ("triangular-lattice-disk", "d-regular-hyperbolic", "layered", "mixed-degree", "rhombus", "file")
_FAMILY = {
    "family": Field(str, "triangular-lattice-disk"),
    "size": Field(int, 8),
    "degree": Field(int, 7),
    "graph": Field(str, ""),
}

SCHEMAS: dict[str, dict[str, Field]] = {
    "one-arm": {**_FAMILY, "center": Field(int, 0), "radii": Field(_int_list, (4, 8)), "p": Field(float, 0.5)},
    "arc-cross": {**_FAMILY, "p": Field(float, 0.5), "fractions": Field(_float_list, (0.25, 0.25, 0.25, 0.25)), "offset": Field(int, 0)},
    "macro": {**_FAMILY, "center": Field(int, 0), "r": Field(int, 4), "p": Field(float, 0.5)},
    "pc-sweep": {
        "family": Field(str, "rhombus"),
        "degree": Field(int, 7),
        "sizes": Field(_int_list, (8, 16)),
        "ps": Field(_float_list, (0.4, 0.5, 0.6)),
        "bootstrap": Field(int, 1000),
    },
    "resistance": {**_FAMILY, "center": Field(int, 0), "r_max": Field(int, 8)},
    "cross-tiling": {
        "fixture": Field(str, "grid"),
        "n": Field(int, 3),
        "m": Field(int, 0),
        "tiling": Field(str, ""),
        "graph": Field(str, ""),
        "poles": Field(str, "root"),
        "ps": Field(_float_list, (0.5,)),
        "exact": Field(_bool, True),
    },
    "hvoronoi": {
        "a": Field(float, 0.0),
        "b": Field(float, 1.5707963267948966),
        "c": Field(float, 3.141592653589793),
        "d": Field(float, 4.71238898038469),
        "lambdas": Field(_float_list, (50.0,)),
        "R": Field(float, 0.0),  # 0 selects the default rule
        "p": Field(float, 0.5),
        "weight": Field(str, "none"),
    },
}

_HEADER = {
    "tag": Field(str, None),
    "seed": Field(int, 0),
    "trials": Field(int, 1000),
    "workers": Field(int, 1),
    "out": Field(str, ""),
}


@dataclass(frozen=True)
class ExperimentConfig:
    tag: str
    seed: int = 0
    trials: int = 1000
    workers: int = 1
    out: str = ""
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in SCHEMAS:
            raise ConfigError("experiment.tag", f"unknown experiment {self.tag!r}; known: {', '.join(SCHEMAS)}")
        schema = SCHEMAS[self.tag]
        full = {k: f.default for k, f in schema.items()}
        for k, v in self.params.items():
            if k not in schema:
                raise ConfigError(f"{self.tag}.{k}", "unknown key")
            full[k] = v
        object.__setattr__(self, "params", full)
        if self.trials < 1:
            raise ConfigError("experiment.trials", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("experiment.workers", "must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("experiment.seed", "must be an unsigned 64-bit integer")
        if "family" in schema and self.tag != "pc-sweep" and full["family"] not in FAMILIES:
            raise ConfigError(f"{self.tag}.family", f"unknown family {full['family']!r}")
        if full.get("family") == "file" and not full.get("graph"):
            raise ConfigError(f"{self.tag}.graph", "family = file needs a graph path")
        for key in ("p",):
            if key in full and not 0.0 <= full[key] <= 1.0:
                raise ConfigError(f"{self.tag}.{key}", "must lie in [0, 1]")
        if "ps" in full and any(not 0.0 <= p <= 1.0 for p in full["ps"]):
            raise ConfigError(f"{self.tag}.ps", "values must lie in [0, 1]")

    def with_updates(self, **kw) -> ExperimentConfig:
        header = {k: kw.pop(k) for k in list(kw) if k in _HEADER}
        return ExperimentConfig(
            header.get("tag", self.tag),
            header.get("seed", self.seed),
            header.get("trials", self.trials),
            header.get("workers", self.workers),
            header.get("out", self.out),
            {**self.params, **kw},
        )

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp["experiment"] = {"tag": self.tag, "seed": str(self.seed), "trials": str(self.trials), "workers": str(self.workers), "out": self.out}
        cp[self.tag] = {k: _fmt(v) for k, v in self.params.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", f"malformed config: {exc}") from None
    if "experiment" not in cp:
        raise ConfigError("experiment", "missing [experiment] section")
    head = cp["experiment"]
    values: dict[str, Any] = {}
    for key, raw in head.items():
        if key not in _HEADER:
            raise ConfigError(f"experiment.{key}", "unknown key")
        try:
            values[key] = _HEADER[key].parse(raw)
        except ValueError as exc:
            raise ConfigError(f"experiment.{key}", str(exc)) from None
    if "tag" not in values:
        raise ConfigError("experiment.tag", "missing")
    tag = values.pop("tag")
    if tag not in SCHEMAS:
        raise ConfigError("experiment.tag", f"unknown experiment {tag!r}; known: {', '.join(SCHEMAS)}")
    for section in cp.sections():
        if section not in ("experiment", tag):
            raise ConfigError(section, "unexpected section")
    params: dict[str, Any] = {}
    if tag in cp:
        schema = SCHEMAS[tag]
        for key, raw in cp[tag].items():
            if key not in schema:
                raise ConfigError(f"{tag}.{key}", "unknown key")
            try:
                params[key] = schema[key].parse(raw)
            except ValueError as exc:
                raise ConfigError(f"{tag}.{key}", str(exc)) from None
    return ExperimentConfig(tag, params=params, **values)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    return parse_config(text)
