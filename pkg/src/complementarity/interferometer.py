"""Two-path amplitude evolution through splitters, a phase shift and loss.

A Ramsey sequence on a two-level atom is treated as a Mach-Zehnder
interferometer: each microwave pulse is a beam splitter whose power
reflectivity is ``sin^2(area / 2)``, the free evolution between pulses is a
relative phase on path 2, and controlled depumping is an amplitude
attenuation into a sink that never interferes again.

Reflection carries a factor ``i``::

    amp1' = sqrt(1 - r) * amp1 + i * sqrt(r) * amp2
    amp2' = i * sqrt(r) * amp1 + sqrt(1 - r) * amp2

Only moduli enter the visibility and predictability, so any fixed unitary
convention gives the same metrics; this one keeps golden values stable.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field, replace

from .errors import DomainError

__all__ = [
    "InputPath",
    "LossPlacement",
    "LossSpec",
    "OutcomeDistribution",
    "PathState",
    "SequenceConfig",
    "apply_beam_splitter",
    "apply_loss",
    "apply_phase",
    "check_reflectivity",
    "pulse_area_from_reflectivity",
    "reflectivity_from_pulse_area",
    "run_sequence",
    "run_sequence_dephased",
]


class InputPath(enum.IntEnum):
    """Initial path occupied by the atom (path 1 is the ``|1>`` analog)."""

    PATH1 = 1
    PATH2 = 2

    def swapped(self) -> "InputPath":
        return InputPath.PATH2 if self is InputPath.PATH1 else InputPath.PATH1


class LossPlacement(str, enum.Enum):
    NONE = "none"
    INSIDE = "inside"
    OUTSIDE = "outside"


def check_reflectivity(r: float, name: str = "reflectivity") -> float:
    """Return ``r`` as a float, raising :class:`DomainError` unless it is in [0, 1]."""
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {r!r}")
    return r


def _check_probability(x: float, name: str) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def reflectivity_from_pulse_area(area: float) -> float:
    """Power reflectivity of a resonant pulse of the given area (radians)."""
    area = float(area)
    if not 0.0 <= area <= math.pi:
        raise DomainError(f"pulse area must lie in [0, pi], got {area!r}")
    return math.sin(area / 2.0) ** 2


def pulse_area_from_reflectivity(r: float) -> float:
    """Inverse of :func:`reflectivity_from_pulse_area`."""
    r = check_reflectivity(r)
    return 2.0 * math.asin(math.sqrt(r))


@dataclass(frozen=True)
class LossSpec:
    """Where loss is applied and how much of each path it removes."""

    placement: LossPlacement = LossPlacement.NONE
    l1: float = 0.0
    l2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "placement", LossPlacement(self.placement))
        object.__setattr__(self, "l1", _check_probability(self.l1, "l1"))
        object.__setattr__(self, "l2", _check_probability(self.l2, "l2"))
        if self.placement is LossPlacement.NONE and (self.l1 != 0.0 or self.l2 != 0.0):
            raise DomainError("loss magnitudes must be zero when placement is 'none'")

    @classmethod
    def inside(cls, l1: float = 0.0, l2: float = 0.0) -> "LossSpec":
        return cls(LossPlacement.INSIDE, l1, l2)

    @classmethod
    def outside(cls, l1: float = 0.0, l2: float = 0.0) -> "LossSpec":
        return cls(LossPlacement.OUTSIDE, l1, l2)

    def swapped(self) -> "LossSpec":
        return LossSpec(self.placement, self.l2, self.l1)


@dataclass(frozen=True)
class PathState:
    """Amplitudes of the two paths plus the probability already lost."""

    amp1: complex
    amp2: complex
    lost: float = 0.0

    @classmethod
    def initial(cls, path: InputPath = InputPath.PATH1) -> "PathState":
        if InputPath(path) is InputPath.PATH1:
            return cls(1.0 + 0j, 0j, 0.0)
        return cls(0j, 1.0 + 0j, 0.0)

    @property
    def populations(self) -> tuple[float, float]:
        return abs(self.amp1) ** 2, abs(self.amp2) ** 2

    @property
    def total(self) -> float:
        p1, p2 = self.populations
        return p1 + p2 + self.lost


@dataclass(frozen=True)
class SequenceConfig:
    """Full description of one interferometer run.

    ``r2`` is ignored when ``second_pulse_present`` is false.
    """

    r1: float = 0.5
    r2: float = 0.5
    second_pulse_present: bool = True
    phase: float = 0.0
    loss: LossSpec = field(default_factory=LossSpec)
    input_path: InputPath = InputPath.PATH1

    def __post_init__(self):
        object.__setattr__(self, "r1", check_reflectivity(self.r1, "r1"))
        object.__setattr__(self, "r2", check_reflectivity(self.r2, "r2"))
        object.__setattr__(self, "input_path", InputPath(self.input_path))
        if not math.isfinite(self.phase):
            raise DomainError(f"phase must be finite, got {self.phase!r}")
        object.__setattr__(self, "phase", float(self.phase))

    def with_phase(self, phase: float) -> "SequenceConfig":
        return replace(self, phase=phase)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities at the two output ports and in the loss sink."""

    p_path1: float
    p_path2: float
    p_lost: float

    @property
    def p_detected(self) -> float:
        return self.p_path1 + self.p_path2


def apply_beam_splitter(s: PathState, r: float) -> PathState:
    r = check_reflectivity(r)
    t = math.sqrt(1.0 - r)
    ir = 1j * math.sqrt(r)
    return PathState(t * s.amp1 + ir * s.amp2, ir * s.amp1 + t * s.amp2, s.lost)


def apply_phase(s: PathState, theta: float) -> PathState:
    if not math.isfinite(theta):
        raise DomainError(f"phase must be finite, got {theta!r}")
    return PathState(s.amp1, s.amp2 * cmath.exp(1j * theta), s.lost)


def apply_loss(s: PathState, loss: LossSpec) -> PathState:
    """Attenuate each path by its loss fraction, moving the removed mass to the sink."""
    p1, p2 = s.populations
    return PathState(
        s.amp1 * math.sqrt(1.0 - loss.l1),
        s.amp2 * math.sqrt(1.0 - loss.l2),
        s.lost + p1 * loss.l1 + p2 * loss.l2,
    )


def run_sequence(cfg: SequenceConfig) -> OutcomeDistribution:
    """Evolve the input path through the configured sequence and measure it."""
    s = PathState.initial(cfg.input_path)
    s = apply_beam_splitter(s, cfg.r1)
    if cfg.loss.placement is LossPlacement.INSIDE:
        s = apply_loss(s, cfg.loss)
    s = apply_phase(s, cfg.phase)
    if cfg.second_pulse_present:
        s = apply_beam_splitter(s, cfg.r2)
    if cfg.loss.placement is LossPlacement.OUTSIDE:
        s = apply_loss(s, cfg.loss)
    p1, p2 = s.populations
    return OutcomeDistribution(p1, p2, s.lost)


def run_sequence_dephased(cfg: SequenceConfig) -> OutcomeDistribution:
    """Outcome distribution with the inter-path coherence destroyed.

    The cross term is linear in ``exp(i * phase)``, so averaging the runs at
    ``phase`` and ``phase + pi`` cancels it exactly and leaves the classical
    mixture of the two paths.
    """
    a = run_sequence(cfg)
    b = run_sequence(cfg.with_phase(cfg.phase + math.pi))
    return OutcomeDistribution(
        0.5 * (a.p_path1 + b.p_path1),
        0.5 * (a.p_path2 + b.p_path2),
        0.5 * (a.p_lost + b.p_lost),
    )
