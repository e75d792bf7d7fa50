"""Reflectivity sweeps, figure presets and table serialization."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Optional, Sequence, Union

import numpy as np

from . import __version__
from .errors import (
    ComplementarityError,
    ConfigError,
    DegenerateConfigurationError,
    DegenerateFitError,
    InsufficientStatisticsError,
)
from .interferometer import LossPlacement, LossSpec
from .metrics import (
    DEFAULT_FRINGE_POINTS,
    Configuration,
    DualityMetrics,
    Scenario,
    TwoTermReading,
    closed_form_corrected,
    closed_form_metrics,
    corrected_metrics,
    measured_metrics,
    two_term_predictability,
)
from .montecarlo import (
    DEFAULT_SHOTS_BUDGET,
    MIN_SHOTS_BUDGET,
    DetectionModel,
    SeedSpec,
    estimate_corrected_metrics,
    estimate_metrics,
)

DEFAULT_GRID_POINTS = 51
EXACT_VIOLATION_TOL = 1e-9
JSON_SCHEMA = "complementarity.sweep/1"

BASE_COLUMNS = ("r", "v2", "p2", "sum", "v2_err", "p2_err", "sum_err", "p_lost", "violation")
TWO_TERM_COLUMNS = ("p2_printed", "p2_regrouped", "p2_sim", "p2_sim_minus_printed")

_DEGENERATE = (DegenerateConfigurationError, DegenerateFitError, InsufficientStatisticsError)


class Engine(str, enum.Enum):
    CLOSED_FORM = "closed-form"
    DETERMINISTIC = "deterministic"
    MONTE_CARLO = "monte-carlo"

    @property
    def exact(self) -> bool:
        return self is not Engine.MONTE_CARLO


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


def uniform_grid(n_points: int = DEFAULT_GRID_POINTS) -> tuple[float, ...]:
    if n_points < 1:
        raise ConfigError(f"grid_points must be positive, got {n_points}")
    if n_points == 1:
        return (0.0,)
    return tuple(float(x) for x in np.linspace(0.0, 1.0, n_points))


@dataclass(frozen=True)
class RunSpec:
    scenario: Scenario
    loss: LossSpec = field(default_factory=LossSpec)
    grid: tuple[float, ...] = field(default_factory=uniform_grid)
    engine: Engine = Engine.CLOSED_FORM
    det: DetectionModel = field(default_factory=DetectionModel)
    seed: Optional[SeedSpec] = None
    shots_budget: Optional[int] = None
    output_format: OutputFormat = OutputFormat.CSV
    corrected: bool = False
    preset: Optional[str] = None
    n_fringe_points: int = DEFAULT_FRINGE_POINTS

    def __post_init__(self):
        object.__setattr__(self, "engine", Engine(self.engine))
        object.__setattr__(self, "output_format", OutputFormat(self.output_format))
        grid = tuple(float(r) for r in self.grid)
        if any(not 0.0 <= r <= 1.0 for r in grid):
            raise ConfigError("grid values must lie in [0, 1]")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("grid values must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        try:
            self.scenario.check_loss(self.loss)
        except ComplementarityError as exc:
            raise ConfigError(str(exc)) from exc
        if self.n_fringe_points < 3:
            raise ConfigError("fringe_points must be at least 3")
        if self.engine is Engine.MONTE_CARLO:
            if self.seed is None:
                raise ConfigError("the monte-carlo engine requires a seed")
            if self.shots_budget is None:
                raise ConfigError("the monte-carlo engine requires a shots budget")
            if self.shots_budget < MIN_SHOTS_BUDGET:
                raise ConfigError(f"shots budget must be at least {MIN_SHOTS_BUDGET}")

    @property
    def reports_two_term(self) -> bool:
        return (
            self.scenario.config is Configuration.VARY_SECOND
            and self.scenario.placement is LossPlacement.OUTSIDE
            and not self.corrected
        )

    @property
    def extra_columns(self) -> tuple[str, ...]:
        return TWO_TERM_COLUMNS if self.reports_two_term else ()


_FIG_LOSS = dict(l1=0.0, l2=0.5)

PRESETS: dict[str, tuple[Scenario, LossSpec, bool]] = {
    "fig3b": (Scenario(1, "none"), LossSpec(), False),
    "fig4a": (Scenario(1, "inside"), LossSpec.inside(**_FIG_LOSS), False),
    "fig4b": (Scenario(1, "outside"), LossSpec.outside(**_FIG_LOSS), False),
    "fig5b": (Scenario(2, "none"), LossSpec(), False),
    "fig5c": (Scenario(2, "inside"), LossSpec.inside(**_FIG_LOSS), False),
    "fig5d": (Scenario(2, "outside"), LossSpec.outside(**_FIG_LOSS), False),
    "fig6": (Scenario(1, "outside"), LossSpec.outside(**_FIG_LOSS), True),
}


def preset_spec(name: str, engine: Engine = Engine.CLOSED_FORM, **overrides) -> RunSpec:
    """RunSpec for a named figure preset; keyword overrides replace fields.

    ``grid_points`` is accepted as shorthand for a uniform ``grid``.
    """
    try:
        scenario, loss, corrected = PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; choose from {', '.join(PRESETS)}"
        ) from None
    n = overrides.pop("grid_points", None)
    if n is not None:
        overrides["grid"] = uniform_grid(n)
    if Engine(engine) is Engine.MONTE_CARLO:
        overrides.setdefault("shots_budget", DEFAULT_SHOTS_BUDGET)
    return RunSpec(
        scenario=scenario,
        loss=loss,
        engine=engine,
        corrected=corrected,
        preset=name,
        **overrides,
    )


@dataclass
class SweepRow:
    r: float
    v2: Optional[float] = None
    p2: Optional[float] = None
    sum: Optional[float] = None
    v2_err: Optional[float] = None
    p2_err: Optional[float] = None
    sum_err: Optional[float] = None
    p_lost: Optional[float] = None
    violation: bool = False
    degenerate: bool = False
    extras: dict[str, Optional[float]] = field(default_factory=dict)

    @classmethod
    def from_metrics(cls, r: float, m: DualityMetrics, exact: bool) -> "SweepRow":
        total = m.sum
        if exact or m.sum_sigma is None:
            violation = total > 1.0 + EXACT_VIOLATION_TOL
        else:
            violation = total > 1.0 + 3.0 * m.sum_sigma
        return cls(
            r=r,
            v2=m.v2,
            p2=m.p2,
            sum=total,
            v2_err=m.v2_sigma,
            p2_err=m.p2_sigma,
            sum_err=m.sum_sigma,
            p_lost=m.p_lost,
            violation=violation,
        )


@dataclass
class SweepTable:
    rows: list[SweepRow]
    extra_columns: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict)

    @property
    def columns(self) -> tuple[str, ...]:
        return BASE_COLUMNS + tuple(self.extra_columns)

    @property
    def all_degenerate(self) -> bool:
        return bool(self.rows) and all(row.degenerate for row in self.rows)

    def column(self, name: str) -> list:
        if name in self.extra_columns:
            return [row.extras.get(name) for row in self.rows]
        return [getattr(row, name) for row in self.rows]


def _safe(fn, *args) -> Optional[float]:
    try:
        return fn(*args)
    except _DEGENERATE:
        return None


def _two_term_extras(spec: RunSpec, r: float) -> dict[str, Optional[float]]:
    printed = _safe(two_term_predictability, r, spec.loss, TwoTermReading.PRINTED)
    regrouped = _safe(two_term_predictability, r, spec.loss, TwoTermReading.REGROUPED)
    sim = _safe(lambda: measured_metrics(spec.scenario, r, spec.loss, spec.n_fringe_points).p)
    diff = None if printed is None or sim is None else sim**2 - printed**2
    sq = lambda x: None if x is None else x * x  # noqa: E731
    return {
        "p2_printed": sq(printed),
        "p2_regrouped": sq(regrouped),
        "p2_sim": sq(sim),
        "p2_sim_minus_printed": diff,
    }


def _point_metrics(spec: RunSpec, index: int, r: float) -> DualityMetrics:
    s, loss = spec.scenario, spec.loss
    if spec.engine is Engine.CLOSED_FORM:
        if spec.corrected:
            return closed_form_corrected(s, r, loss)
        return closed_form_metrics(s, r, loss)
    if spec.engine is Engine.DETERMINISTIC:
        if spec.corrected:
            return corrected_metrics(s, r, loss, spec.n_fringe_points)
        return measured_metrics(s, r, loss, spec.n_fringe_points)
    seed = spec.seed.substream(index)
    fn = estimate_corrected_metrics if spec.corrected else estimate_metrics
    return fn(s, r, loss, spec.det, seed, spec.shots_budget, spec.n_fringe_points)


def evaluate_point(spec: RunSpec, index: int, r: float) -> SweepRow:
    """One sweep row; degenerate points come back flagged rather than raising."""
    try:
        row = SweepRow.from_metrics(r, _point_metrics(spec, index, r), spec.engine.exact)
    except _DEGENERATE:
        row = SweepRow(r=r, degenerate=True)
    if spec.reports_two_term:
        row.extras = _two_term_extras(spec, r)
    return row


def run_metadata(spec: RunSpec) -> dict:
    seed = None if spec.seed is None else {"seed": spec.seed.seed, "stream": spec.seed.stream}
    return {
        "tool_version": __version__,
        "preset": spec.preset,
        "engine": spec.engine.value,
        "seed": seed,
        "shots_budget": spec.shots_budget,
        "scenario": {
            "config": int(spec.scenario.config),
            "placement": spec.scenario.placement.value,
        },
        "loss": {"l1": spec.loss.l1, "l2": spec.loss.l2},
        "detection": {
            "survival": spec.det.survival,
            "discrimination": spec.det.discrimination,
            "damping": spec.det.damping,
            "bright_path": int(spec.det.bright_path),
        },
        "corrected": spec.corrected,
        "fringe_points": spec.n_fringe_points,
        "grid_points": len(spec.grid),
    }


def run_spec(spec: RunSpec, workers: int = 1) -> SweepTable:
    """Evaluate every grid point; rows are always in grid order."""
    indexed = list(enumerate(spec.grid))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda ir: evaluate_point(spec, *ir), indexed))
    else:
        rows = [evaluate_point(spec, i, r) for i, r in indexed]
    return SweepTable(rows, spec.extra_columns, run_metadata(spec))


def run_preset(
    name: str, engine: Engine = Engine.CLOSED_FORM, workers: int = 1, **overrides
) -> SweepTable:
    return run_spec(preset_spec(name, engine, **overrides), workers=workers)


def run_config(path: Union[str, os.PathLike], workers: int = 1) -> SweepTable:
    from .config import load_config

    return run_spec(load_config(path), workers=workers)


# -- serialization -----------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    value = float(value) + 0.0  # normalizes -0.0
    return f"{value:.9g}"


def _csv_cells(row: SweepRow, extra_columns: Sequence[str]) -> list[str]:
    if row.degenerate:
        flag = "degenerate"
    else:
        flag = "true" if row.violation else "false"
    cells = [f"{row.r:.9f}"]
    cells += [_fmt(getattr(row, c)) for c in BASE_COLUMNS[1:-1]]
    cells.append(flag)
    cells += [_fmt(row.extras.get(c)) for c in extra_columns]
    return cells


def to_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow(_csv_cells(row, table.extra_columns))
    return buf.getvalue()


def _json_value(value):
    if value is None or isinstance(value, bool):
        return value
    value = float(value)
    return value if math.isfinite(value) else None


def to_json(table: SweepTable) -> str:
    rows = []
    for row in table.rows:
        d = {c: _json_value(getattr(row, c)) for c in BASE_COLUMNS}
        d["degenerate"] = row.degenerate
        d.update({c: _json_value(row.extras.get(c)) for c in table.extra_columns})
        rows.append(d)
    doc = {
        "schema": JSON_SCHEMA,
        "metadata": table.metadata,
        "columns": list(table.columns),
        "rows": rows,
    }
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> SweepTable:
    doc = json.loads(text)
    if doc.get("schema") != JSON_SCHEMA:
        raise ConfigError(f"unsupported table schema {doc.get('schema')!r}")
    extra = tuple(c for c in doc["columns"] if c not in BASE_COLUMNS)
    rows = []
    for d in doc["rows"]:
        rows.append(
            SweepRow(
                **{c: d[c] for c in BASE_COLUMNS},
                degenerate=d["degenerate"],
                extras={c: d[c] for c in extra},
            )
        )
    return SweepTable(rows, extra, doc["metadata"])


def render(table: SweepTable, fmt: OutputFormat = OutputFormat.CSV) -> str:
    return to_csv(table) if OutputFormat(fmt) is OutputFormat.CSV else to_json(table)


def emit(
    table: SweepTable,
    fmt: OutputFormat = OutputFormat.CSV,
    destination: Union[str, os.PathLike, IO[str], None] = None,
) -> None:
    """Write the table to a path, an open text stream, or stdout when ``None``."""
    text = render(table, fmt)
    if destination is None:
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        try:
            with open(destination, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {os.fspath(destination)}: {exc.strerror}") from exc


def two_term_discrepancy(table: SweepTable) -> Optional[float]:
    """Largest ``|p2_sim - p2_printed|`` in a table that carries both columns."""
    if "p2_sim_minus_printed" not in table.extra_columns:
        return None
    diffs = [abs(d) for d in table.column("p2_sim_minus_printed") if d is not None]
    return max(diffs) if diffs else None


__all__ = [
    "BASE_COLUMNS",
    "TWO_TERM_COLUMNS",
    "PRESETS",
    "Engine",
    "OutputFormat",
    "RunSpec",
    "SweepRow",
    "SweepTable",
    "emit",
    "two_term_discrepancy",
    "evaluate_point",
    "from_json",
    "preset_spec",
    "render",
    "run_config",
    "run_metadata",
    "run_preset",
    "run_spec",
    "to_csv",
    "to_json",
    "uniform_grid",
]
