"""Run configuration files.

The format is INI with one level of sections. Every key is optional except
``[scenario] config`` and ``placement``; unknown sections or keys are
rejected so typos never pass silently.

.. code-block:: ini

    [run]
    schema_version = 1
    engine = closed-form        ; closed-form | deterministic | monte-carlo
    format = csv                ; csv | json
    grid_points = 51            ; or: grid = 0, 0.25, 0.5, 0.75, 1
    corrected = false           ; path-switch correction
    shots = 100000              ; monte-carlo budget per grid point
    fringe_points = 24

    [scenario]
    config = 1                  ; 1 scans the first splitter, 2 the second
    placement = outside         ; none | inside | outside

    [loss]
    l1 = 0
    l2 = 0.5

    [detection]
    survival = 1
    discrimination = 1
    damping = 0
    bright_path = 2

    [seed]
    seed = 1
    stream = 0
"""

from __future__ import annotations

import configparser
import os
from typing import Callable, Union

from .errors import ComplementarityError, ConfigError
from .interferometer import LossSpec
from .metrics import Scenario
from .montecarlo import DetectionModel, SeedSpec
from .sweep import RunSpec, uniform_grid

SCHEMA_VERSION = 1

_KEYS = {
    "run": {"schema_version", "engine", "format", "grid_points", "grid", "corrected",
            "shots", "fringe_points", "preset"},
    "scenario": {"config", "placement"},
    "loss": {"l1", "l2"},
    "detection": {"survival", "discrimination", "damping", "bright_path"},
    "seed": {"seed", "stream"},
}


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _grid(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, source: str):
        self.parser = parser
        self.source = source

    def get(self, section: str, key: str, convert: Callable = str, default=None):
        if not self.parser.has_option(section, key):
            return default
        raw = self.parser.get(section, key)
        try:
            return convert(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{self.source}: [{section}] {key} = {raw!r}: {exc}") from None

    def require(self, section: str, key: str, convert: Callable = str):
        value = self.get(section, key, convert)
        if value is None:
            raise ConfigError(f"{self.source}: missing required field [{section}] {key}")
        return value


def parse_config(text: str, source: str = "<config>") -> RunSpec:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        where = source
        lineno = getattr(exc, "lineno", None)
        summary = str(exc).splitlines()[0]
        errors = getattr(exc, "errors", None)
        if lineno is None and errors:
            lineno = errors[0][0]
            summary = "expected 'key = value' or a [section] header"
        if lineno is not None:
            where = f"{source}, line {lineno}"
        raise ConfigError(f"{where}: parse error: {summary}") from None

    for section in parser.sections():
        if section not in _KEYS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        unknown = set(parser.options(section)) - _KEYS[section]
        if unknown:
            raise ConfigError(
                f"{source}: unknown field(s) in [{section}]: {', '.join(sorted(unknown))}"
            )

    rd = _Reader(parser, source)
    version = rd.get("run", "schema_version", int, SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{source}: unsupported schema_version {version}")

    grid = rd.get("run", "grid", _grid)
    if grid is None:
        grid = uniform_grid(rd.get("run", "grid_points", int, 51))

    seed = None
    if parser.has_section("seed"):
        seed = SeedSpec(
            rd.require("seed", "seed", int), rd.get("seed", "stream", int, 0)
        )

    try:
        return RunSpec(
            scenario=Scenario(
                rd.require("scenario", "config", int),
                rd.require("scenario", "placement", str.lower),
            ),
            loss=LossSpec(
                rd.require("scenario", "placement", str.lower),
                rd.get("loss", "l1", float, 0.0),
                rd.get("loss", "l2", float, 0.0),
            ),
            grid=grid,
            engine=rd.get("run", "engine", str.lower, "closed-form"),
            det=DetectionModel(
                survival=rd.get("detection", "survival", float, 1.0),
                discrimination=rd.get("detection", "discrimination", float, 1.0),
                damping=rd.get("detection", "damping", float, 0.0),
                bright_path=rd.get("detection", "bright_path", int, 2),
            ),
            seed=seed,
            shots_budget=rd.get("run", "shots", int),
            output_format=rd.get("run", "format", str.lower, "csv"),
            corrected=rd.get("run", "corrected", _bool, False),
            preset=rd.get("run", "preset"),
            n_fringe_points=rd.get("run", "fringe_points", int, 24),
        )
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    except (ComplementarityError, ValueError) as exc:
        raise ConfigError(f"{source}: invalid value: {exc}") from None


def load_config(path: Union[str, os.PathLike]) -> RunSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {os.fspath(path)}: {exc.strerror}") from None
    return parse_config(text, source=os.fspath(path))
