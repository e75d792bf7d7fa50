"""Shot-by-shot emulation of the experiment with a three-outcome readout.

Every shot draws four uniforms from a Philox-4x64 block whose key is
``(seed, stream)`` and whose counter is the shot index, so a shot's outcome
depends only on ``(seed, stream, shot_index)``. Splitting a run into chunks,
reordering them or spreading them over threads gives bit-identical results.

Uniform usage per shot: ``u[0]`` picks the port (or the loss sink),
``u[1]`` decides detection survival, ``u[2]`` a readout flip and ``u[3]``
whether the shot is dephased.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InsufficientStatisticsError
from .interferometer import (
    InputPath,
    LossSpec,
    SequenceConfig,
    run_sequence,
    run_sequence_dephased,
)
from .metrics import (
    DEFAULT_FRINGE_POINTS,
    DualityMetrics,
    Fringe,
    Scenario,
    fit_sinusoid,
    fringe_phases,
    scenario_sequences,
    with_uncertainty,
)

DEFAULT_SHOTS_PER_POINT = 10_000
DEFAULT_SHOTS_BUDGET = 100_000
MIN_SHOTS_BUDGET = 1_000
_UINT64_MAX = 2**64 - 1


class ShotOutcome(enum.IntEnum):
    BRIGHT = 0
    DARK = 1
    LOST = 2


@dataclass(frozen=True)
class DetectionModel:
    """Readout imperfections applied after the interferometer.

    Attributes:
        survival: probability that the atom stays trapped long enough to be read.
        discrimination: probability that a surviving atom is read in the right state.
        damping: probability that a shot loses its inter-path coherence.
        bright_path: which path fluoresces under the probe.
    """

    survival: float = 1.0
    discrimination: float = 1.0
    damping: float = 0.0
    bright_path: InputPath = InputPath.PATH2

    def __post_init__(self):
        if not 0.0 <= self.survival <= 1.0:
            raise DomainError(f"survival must lie in [0, 1], got {self.survival!r}")
        if not 0.5 <= self.discrimination <= 1.0:
            raise DomainError(
                f"discrimination must lie in [0.5, 1], got {self.discrimination!r}"
            )
        if not 0.0 <= self.damping <= 1.0:
            raise DomainError(f"damping must lie in [0, 1], got {self.damping!r}")
        object.__setattr__(self, "bright_path", InputPath(self.bright_path))

    @classmethod
    def reported(cls) -> "DetectionModel":
        """Detection figures quoted for the single-atom apparatus."""
        return cls(survival=0.75, discrimination=0.99, damping=0.0004)


@dataclass(frozen=True)
class SeedSpec:
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value <= _UINT64_MAX:
                raise DomainError(f"{name} must be an unsigned 64-bit integer")
            object.__setattr__(self, name, int(value))

    def substream(self, *labels: int) -> "SeedSpec":
        """Independent stream for a labelled sub-experiment (sweep point, phase...)."""
        ss = np.random.SeedSequence(entropy=self.stream, spawn_key=tuple(labels))
        return SeedSpec(self.seed, int(ss.generate_state(1, np.uint64)[0]))


def shot_uniforms(seed: SeedSpec, start: int, n: int) -> np.ndarray:
    """``(n, 4)`` uniforms in [0, 1) for shots ``start .. start + n - 1``."""
    bitgen = np.random.Philox(
        key=np.array([seed.seed, seed.stream], dtype=np.uint64),
        counter=np.array([start, 0, 0, 0], dtype=np.uint64),
    )
    raw = bitgen.random_raw(4 * n).reshape(n, 4)
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def sample_shots(
    cfg: SequenceConfig,
    det: DetectionModel,
    seed: SeedSpec,
    n_shots: int,
    start: int = 0,
) -> np.ndarray:
    """Outcome codes (see :class:`ShotOutcome`) for a contiguous block of shots."""
    u = shot_uniforms(seed, start, n_shots)
    d = run_sequence(cfg)
    p1 = np.full(n_shots, d.p_path1)
    p12 = np.full(n_shots, d.p_path1 + d.p_path2)
    if det.damping > 0.0:
        mixed = run_sequence_dephased(cfg)
        dephase = u[:, 3] < det.damping
        p1[dephase] = mixed.p_path1
        p12[dephase] = mixed.p_path1 + mixed.p_path2
    path = np.where(u[:, 0] < p1, 1, np.where(u[:, 0] < p12, 2, 0))
    lost = (path == 0) | (u[:, 1] >= det.survival)
    flipped = u[:, 2] >= det.discrimination
    bright = (path == int(det.bright_path)) ^ flipped
    out = np.where(bright, ShotOutcome.BRIGHT, ShotOutcome.DARK)
    out[lost] = ShotOutcome.LOST
    return out.astype(np.int8)


def sample_shot(
    cfg: SequenceConfig, det: DetectionModel, seed: SeedSpec, shot_index: int
) -> ShotOutcome:
    return ShotOutcome(int(sample_shots(cfg, det, seed, 1, start=shot_index)[0]))


@dataclass(frozen=True)
class EstimateWithCI:
    """A frequency estimate with its binomial standard error.

    ``n_detected`` counts shots that were not lost; ``n_total`` all shots.
    """

    mean: float
    stderr: float
    n_detected: int
    n_total: int

    def contains(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.stderr


def _binomial(k: int, n: int, n_detected: int, n_total: int) -> EstimateWithCI:
    q = k / n
    return EstimateWithCI(q, math.sqrt(q * (1.0 - q) / n), n_detected, n_total)


@dataclass(frozen=True)
class ShotCounts:
    """Tally of Bright/Dark/Lost outcomes for one configuration."""

    n_bright: int
    n_dark: int
    n_lost: int
    bright_path: InputPath = InputPath.PATH2

    @property
    def n_total(self) -> int:
        return self.n_bright + self.n_dark + self.n_lost

    @property
    def n_detected(self) -> int:
        return self.n_bright + self.n_dark

    @property
    def n_path1(self) -> int:
        """Shots read out as path 1."""
        return self.n_bright if self.bright_path is InputPath.PATH1 else self.n_dark

    @property
    def n_path2(self) -> int:
        return self.n_detected - self.n_path1

    def _fraction(self, k: int) -> EstimateWithCI:
        return _binomial(k, self.n_total, self.n_detected, self.n_total)

    @property
    def p_bright(self) -> EstimateWithCI:
        return self._fraction(self.n_bright)

    @property
    def p_dark(self) -> EstimateWithCI:
        return self._fraction(self.n_dark)

    @property
    def p_lost(self) -> EstimateWithCI:
        return self._fraction(self.n_lost)

    @property
    def p_path1(self) -> EstimateWithCI:
        return self._fraction(self.n_path1)

    def _require_detected(self) -> int:
        if self.n_detected == 0:
            raise InsufficientStatisticsError("no shot survived detection")
        return self.n_detected

    def postselected_bright(self) -> EstimateWithCI:
        nd = self._require_detected()
        return _binomial(self.n_bright, nd, nd, self.n_total)

    def postselected_path1(self) -> EstimateWithCI:
        nd = self._require_detected()
        return _binomial(self.n_path1, nd, nd, self.n_total)

    def signed_difference(self) -> EstimateWithCI:
        """``(n_path1 - n_path2) / n_detected``."""
        q = self.postselected_path1()
        return EstimateWithCI(2.0 * q.mean - 1.0, 2.0 * q.stderr, q.n_detected, q.n_total)


def estimate_distribution(
    cfg: SequenceConfig, det: DetectionModel, seed: SeedSpec, n_shots: int
) -> ShotCounts:
    if n_shots < 1:
        raise DomainError(f"n_shots must be positive, got {n_shots}")
    codes = sample_shots(cfg, det, seed, n_shots)
    nb, nd, nl = (int(c) for c in np.bincount(codes, minlength=3))
    return ShotCounts(nb, nd, nl, det.bright_path)


def _smoothed_sigma(k: int, n: int) -> float:
    # keeps a finite weight at 0% / 100% points
    q = (k + 0.5) / (n + 1.0)
    return math.sqrt(q * (1.0 - q) / n)


def estimate_fringe(
    cfg: SequenceConfig,
    det: DetectionModel,
    seed: SeedSpec,
    n_points: int = DEFAULT_FRINGE_POINTS,
    shots_per_point: int = DEFAULT_SHOTS_PER_POINT,
    postselect: bool = True,
) -> Fringe:
    """Phase scan of the fraction of shots read out as path 1.

    Each phase index ``k`` draws from ``seed.substream(k)``. With
    ``postselect`` the fraction is taken over detected shots, otherwise over
    all shots.
    """
    if shots_per_point < 1:
        raise DomainError(f"shots_per_point must be positive, got {shots_per_point}")
    phases = fringe_phases(n_points)
    p = np.empty(n_points)
    sigma = np.empty(n_points)
    for k, theta in enumerate(phases):
        counts = estimate_distribution(
            cfg.with_phase(float(theta)), det, seed.substream(k), shots_per_point
        )
        if counts.n_detected == 0:
            raise InsufficientStatisticsError(f"no detected shots at phase {theta:.6g}")
        n = counts.n_detected if postselect else counts.n_total
        p[k] = counts.n_path1 / n
        sigma[k] = _smoothed_sigma(counts.n_path1, n)
    return Fringe(phases, p, sigma)


@dataclass(frozen=True)
class _Measurement:
    v: float
    v_sigma: float
    diff: EstimateWithCI
    p_lost: float


_FRINGE, _WHICH_PATH = 0, 1


def _check_budget(shots_budget: int) -> None:
    if shots_budget < MIN_SHOTS_BUDGET:
        raise DomainError(f"shots_budget must be at least {MIN_SHOTS_BUDGET}")


def _budget_split(shots_budget: int, n_fringe_points: int) -> tuple[int, int]:
    which = shots_budget // 2
    return (shots_budget - which) // n_fringe_points, which


def _estimate_one(
    s: Scenario,
    r: float,
    loss: LossSpec,
    det: DetectionModel,
    seed: SeedSpec,
    shots_budget: int,
    n_fringe_points: int,
    input_path: InputPath,
) -> _Measurement:
    per_point, which_shots = _budget_split(shots_budget, n_fringe_points)
    fringe_cfg, which_cfg = scenario_sequences(s, r, loss, input_path)
    fringe = estimate_fringe(
        fringe_cfg,
        det,
        seed.substream(int(input_path), _FRINGE),
        n_fringe_points,
        per_point,
        postselect=False,
    )
    fit = fit_sinusoid(fringe)
    counts = estimate_distribution(
        which_cfg, det, seed.substream(int(input_path), _WHICH_PATH), which_shots
    )
    return _Measurement(
        fit.visibility, fit.visibility_sigma, counts.signed_difference(), counts.p_lost.mean
    )


def estimate_metrics(
    s: Scenario,
    r: float,
    loss: LossSpec,
    det: DetectionModel,
    seed: SeedSpec,
    shots_budget: int = DEFAULT_SHOTS_BUDGET,
    n_fringe_points: int = DEFAULT_FRINGE_POINTS,
    input_path: InputPath = InputPath.PATH1,
) -> DualityMetrics:
    """Monte Carlo estimate of V, P and their sum with standard errors.

    Half the budget goes to the which-path run, the rest is spread evenly
    over the fringe phases. V comes from a sinusoid fit to the raw path-1
    readout fraction; P from the post-selected readout imbalance.
    """
    _check_budget(shots_budget)
    m = _estimate_one(
        s, r, loss, det, seed, shots_budget, n_fringe_points, InputPath(input_path)
    )
    base = DualityMetrics(v=m.v, p=abs(m.diff.mean), p_lost=m.p_lost)
    return with_uncertainty(base, m.v_sigma, m.diff.stderr)


def estimate_corrected_metrics(
    s: Scenario,
    r: float,
    loss: LossSpec,
    det: DetectionModel,
    seed: SeedSpec,
    shots_budget: int = DEFAULT_SHOTS_BUDGET,
    n_fringe_points: int = DEFAULT_FRINGE_POINTS,
) -> DualityMetrics:
    """Path-switch correction from two Monte Carlo runs sharing the budget."""
    _check_budget(shots_budget)
    half = shots_budget // 2
    a, b = (
        _estimate_one(s, r, loss, det, seed, half, n_fringe_points, path)
        for path in (InputPath.PATH1, InputPath.PATH2)
    )
    base = DualityMetrics(
        v=0.5 * (a.v + b.v),
        p=0.5 * abs(a.diff.mean - b.diff.mean),
        p_lost=0.5 * (a.p_lost + b.p_lost),
    )
    return with_uncertainty(
        base,
        0.5 * math.hypot(a.v_sigma, b.v_sigma),
        0.5 * math.hypot(a.diff.stderr, b.diff.stderr),
    )


def fraction_within(
    estimates: Sequence[float], sigmas: Sequence[float], exact: Sequence[float], k: float = 3.0
) -> float:
    """Fraction of points with ``|estimate - exact| <= k * sigma``."""
    est, sig, ref = (np.asarray(x, dtype=float) for x in (estimates, sigmas, exact))
    return float(np.mean(np.abs(est - ref) <= k * sig + 1e-12))
