"""Visibility, predictability and their complementarity sum.

Two independent routes are provided for every scenario:

* ``closed_form_metrics`` evaluates the analytic V/P expressions directly;
* ``measured_metrics`` recovers the same numbers from noiseless simulated
  data, exactly as one would from detector counts: V from a least-squares
  sinusoid through a phase scan, P from the post-selected path imbalance with
  the recombining pulse switched off.

Predictability is always the *measured* one, normalized by the detected
population, which is what lets imbalanced loss push ``P**2 + V**2`` above 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (
    DegenerateConfigurationError,
    DegenerateFitError,
    DomainError,
    InsufficientDataError,
)
from .interferometer import (
    InputPath,
    LossPlacement,
    LossSpec,
    OutcomeDistribution,
    SequenceConfig,
    check_reflectivity,
    run_sequence,
)

TWO_PI = 2.0 * math.pi
DEFAULT_FRINGE_POINTS = 24
# Detected populations below this are treated as "everything was lost".
DEGENERATE_TOL = 1e-14


class Configuration(enum.IntEnum):
    """Which splitter is scanned: the first (second fixed at 0.5) or the second."""

    VARY_FIRST = 1
    VARY_SECOND = 2


class TwoTermReading(str, enum.Enum):
    """How to read the outside-loss predictability of the second configuration.

    ``PRINTED`` takes the two denominators literally, ``2*a + b``;
    ``REGROUPED`` reads them as ``2*(a + b)``, i.e. the mean of the
    predictabilities obtained from the two input paths.
    """

    PRINTED = "printed"
    REGROUPED = "regrouped"


class VisibilityMethod(str, enum.Enum):
    EXTREMA = "extrema"
    SINUSOID_FIT = "fit"


@dataclass(frozen=True)
class Scenario:
    config: Configuration
    placement: LossPlacement = LossPlacement.NONE

    def __post_init__(self):
        object.__setattr__(self, "config", Configuration(self.config))
        object.__setattr__(self, "placement", LossPlacement(self.placement))

    def check_loss(self, loss: LossSpec) -> None:
        if loss.placement is not self.placement:
            raise DomainError(
                f"loss placement {loss.placement.value!r} does not match "
                f"scenario placement {self.placement.value!r}"
            )


@dataclass(frozen=True)
class DualityMetrics:
    """Visibility ``v``, predictability ``p`` and optional standard errors.

    ``p_lost`` is the fraction of shots removed in the which-path run; it is
    reported alongside because the post-selected ``p`` hides it.
    """

    v: float
    p: float
    v_sigma: Optional[float] = None
    p_sigma: Optional[float] = None
    sum_sigma: Optional[float] = None
    p_lost: float = 0.0

    @property
    def v2(self) -> float:
        return self.v * self.v

    @property
    def p2(self) -> float:
        return self.p * self.p

    @property
    def sum(self) -> float:
        return self.v * self.v + self.p * self.p

    @property
    def v2_sigma(self) -> Optional[float]:
        return None if self.v_sigma is None else 2.0 * abs(self.v) * self.v_sigma

    @property
    def p2_sigma(self) -> Optional[float]:
        return None if self.p_sigma is None else 2.0 * abs(self.p) * self.p_sigma


@dataclass(frozen=True)
class Fringe:
    """Detection probability sampled at a set of inter-path phases."""

    phases: np.ndarray
    p: np.ndarray
    sigma: Optional[np.ndarray] = None

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if phases.ndim != 1 or phases.shape != p.shape:
            raise DomainError("phases and p must be 1-d arrays of equal length")
        if not np.all(np.isfinite(phases)):
            raise DomainError("fringe phases must be finite")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12) or not np.all(np.isfinite(p)):
            raise DomainError("fringe probabilities must lie in [0, 1]")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "p", np.clip(p, 0.0, 1.0))
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            if sigma.shape != p.shape or np.any(sigma < 0):
                raise DomainError("sigma must be non-negative and match p")
            object.__setattr__(self, "sigma", sigma)

    def __len__(self):
        return len(self.p)


@dataclass(frozen=True)
class SinusoidFit:
    """Least-squares coefficients of ``c0 + c1*cos(phase) + c2*sin(phase)``."""

    c0: float
    c1: float
    c2: float
    cov: Optional[np.ndarray] = None

    @property
    def amplitude(self) -> float:
        return math.hypot(self.c1, self.c2)

    @property
    def visibility(self) -> float:
        return self.amplitude / self.c0

    @property
    def visibility_sigma(self) -> Optional[float]:
        if self.cov is None:
            return None
        rho = self.amplitude
        if rho == 0.0:
            # gradient undefined at zero amplitude; use the Rayleigh scale
            return math.sqrt(0.5 * (self.cov[1, 1] + self.cov[2, 2])) / self.c0
        grad = np.array(
            [-rho / self.c0**2, self.c1 / (rho * self.c0), self.c2 / (rho * self.c0)]
        )
        return float(math.sqrt(max(grad @ self.cov @ grad, 0.0)))


def fringe_phases(n_points: int) -> np.ndarray:
    """``n_points`` phases uniformly spanning [0, 2*pi)."""
    if n_points < 3:
        raise InsufficientDataError(f"need at least 3 fringe points, got {n_points}")
    return TWO_PI * np.arange(n_points) / n_points


def simulate_fringe(
    cfg: SequenceConfig, n_points: int = DEFAULT_FRINGE_POINTS, postselect: bool = True
) -> Fringe:
    """Noiseless phase scan of the path-1 output probability.

    With ``postselect`` the probability is conditioned on detection,
    ``p1 / (p1 + p2)``; otherwise it is the raw port probability ``p1``.
    The two have identical contrast unless loss acts after the recombining
    pulse, where only the raw port keeps a sinusoidal shape.
    """
    if not cfg.second_pulse_present:
        raise DomainError("a fringe requires the second pulse")
    phases = fringe_phases(n_points)
    values = np.empty(n_points)
    for k, theta in enumerate(phases):
        d = run_sequence(cfg.with_phase(float(theta)))
        detected = d.p_detected
        if detected <= DEGENERATE_TOL:
            raise DegenerateConfigurationError(
                f"all population lost at phase {theta:.6g}"
            )
        values[k] = d.p_path1 / detected if postselect else d.p_path1
    return Fringe(phases, values)


def _distinct_phase_count(phases: np.ndarray) -> int:
    wrapped = np.round(np.mod(phases, TWO_PI), 12) % round(TWO_PI, 12)
    return len(np.unique(wrapped))


def fit_sinusoid(f: Fringe) -> SinusoidFit:
    """Linear least-squares fit; the covariance is propagated from ``f.sigma``."""
    if _distinct_phase_count(f.phases) < 3:
        raise InsufficientDataError("sinusoid fit needs at least 3 distinct phases")
    A = np.column_stack([np.ones_like(f.phases), np.cos(f.phases), np.sin(f.phases)])
    coef, *_ = np.linalg.lstsq(A, f.p, rcond=None)
    c0, c1, c2 = (float(c) for c in coef)
    if c0 <= 0.0:
        raise DegenerateFitError(f"fitted fringe offset {c0:.3g} is not positive")
    cov = None
    if f.sigma is not None:
        # sandwich form; stays finite when some sigma are exactly zero
        pinv = np.linalg.pinv(A)
        cov = pinv @ np.diag(f.sigma**2) @ pinv.T
    return SinusoidFit(c0, c1, c2, cov)


def visibility_from_fringe(
    f: Fringe, method: VisibilityMethod = VisibilityMethod.SINUSOID_FIT
) -> float:
    method = VisibilityMethod(method)
    if method is VisibilityMethod.EXTREMA:
        if _distinct_phase_count(f.phases) < 3:
            raise InsufficientDataError("visibility needs at least 3 distinct phases")
        hi, lo = float(f.p.max()), float(f.p.min())
        if hi + lo <= 0.0:
            raise DegenerateFitError("fringe is identically zero")
        return (hi - lo) / (hi + lo)
    return fit_sinusoid(f).visibility


def _detected(d: OutcomeDistribution) -> float:
    detected = d.p_detected
    if detected <= DEGENERATE_TOL:
        raise DegenerateConfigurationError("no detectable population")
    return detected


def signed_path_difference(d: OutcomeDistribution) -> float:
    """``(p1 - p2) / (p1 + p2)``."""
    return (d.p_path1 - d.p_path2) / _detected(d)


def predictability_from_distribution(d: OutcomeDistribution) -> float:
    return abs(d.p_path1 - d.p_path2) / _detected(d)


# -- scenario plumbing -------------------------------------------------------


def scenario_sequences(
    s: Scenario, r: float, loss: LossSpec, input_path: InputPath = InputPath.PATH1
) -> tuple[SequenceConfig, SequenceConfig]:
    """Sequences for the fringe scan and the which-path run of a scenario.

    Scanning the first splitter, the which-path run simply drops the second
    pulse. Scanning the second splitter, the roles are mirrored: the first
    pulse is dropped and the varied second pulse alone sets the imbalance.
    """
    r = check_reflectivity(r)
    s.check_loss(loss)
    if s.config is Configuration.VARY_FIRST:
        fringe = SequenceConfig(r1=r, r2=0.5, loss=loss, input_path=input_path)
        which = SequenceConfig(
            r1=r, r2=0.5, second_pulse_present=False, loss=loss, input_path=input_path
        )
    else:
        fringe = SequenceConfig(r1=0.5, r2=r, loss=loss, input_path=input_path)
        which = SequenceConfig(r1=0.0, r2=r, loss=loss, input_path=input_path)
    return fringe, which


def _measure(
    s: Scenario, r: float, loss: LossSpec, input_path: InputPath, n_fringe_points: int
) -> tuple[float, float, float]:
    fringe_cfg, which_cfg = scenario_sequences(s, r, loss, input_path)
    v = visibility_from_fringe(
        simulate_fringe(fringe_cfg, n_fringe_points, postselect=False)
    )
    d = run_sequence(which_cfg)
    return v, signed_path_difference(d), d.p_lost


def measured_metrics(
    s: Scenario,
    r: float,
    loss: LossSpec,
    n_fringe_points: int = DEFAULT_FRINGE_POINTS,
    input_path: InputPath = InputPath.PATH1,
) -> DualityMetrics:
    v, diff, lost = _measure(s, r, loss, InputPath(input_path), n_fringe_points)
    return DualityMetrics(v=v, p=abs(diff), p_lost=lost)


@dataclass(frozen=True)
class PathSwitchResult:
    """Metrics from both input paths and their combination."""

    corrected: DualityMetrics
    direct: DualityMetrics
    switched: DualityMetrics
    diff_direct: float
    diff_switched: float


def _combine_switch(v1, d1, lost1, v2, d2, lost2) -> PathSwitchResult:
    corrected = DualityMetrics(
        v=0.5 * (v1 + v2), p=0.5 * abs(d1 - d2), p_lost=0.5 * (lost1 + lost2)
    )
    return PathSwitchResult(
        corrected,
        DualityMetrics(v=v1, p=abs(d1), p_lost=lost1),
        DualityMetrics(v=v2, p=abs(d2), p_lost=lost2),
        d1,
        d2,
    )


def path_switch_metrics(
    s: Scenario, r: float, loss: LossSpec, n_fringe_points: int = DEFAULT_FRINGE_POINTS
) -> PathSwitchResult:
    """Repeat the measurement with the input path switched and combine.

    Visibilities are averaged. For predictability the signed imbalances are
    combined as ``|D_direct - D_switched| / 2``: switching the input flips
    the sign of the genuine imbalance but not of the loss-induced bias, so
    the half-difference cancels the bias.
    """
    first = _measure(s, r, loss, InputPath.PATH1, n_fringe_points)
    second = _measure(s, r, loss, InputPath.PATH2, n_fringe_points)
    return _combine_switch(*first, *second)


def corrected_metrics(
    s: Scenario, r: float, loss: LossSpec, n_fringe_points: int = DEFAULT_FRINGE_POINTS
) -> DualityMetrics:
    return path_switch_metrics(s, r, loss, n_fringe_points).corrected


# -- closed forms ------------------------------------------------------------


def _ratio(num: float, den: float) -> float:
    if den <= DEGENERATE_TOL:
        raise DegenerateConfigurationError("all detected population vanishes")
    return num / den


def lossless_visibility(r: float) -> float:
    return 2.0 * math.sqrt(r * (1.0 - r))


def _which_path_populations(
    s: Scenario, r: float, loss: LossSpec, input_path: InputPath
) -> tuple[float, float, float]:
    """Path populations and lost fraction of the which-path run, in closed form."""
    l1, l2 = loss.l1, loss.l2
    direct = input_path is InputPath.PATH1
    if s.config is Configuration.VARY_FIRST or s.placement is not LossPlacement.INSIDE:
        if direct:
            return (1 - r) * (1 - l1), r * (1 - l2), (1 - r) * l1 + r * l2
        return r * (1 - l1), (1 - r) * (1 - l2), r * l1 + (1 - r) * l2
    # second splitter scanned, loss inside: only the input path is occupied there
    lost = l1 if direct else l2
    if direct:
        return (1 - r) * (1 - lost), r * (1 - lost), lost
    return r * (1 - lost), (1 - r) * (1 - lost), lost


def _closed_form_visibility(
    s: Scenario, r: float, loss: LossSpec, input_path: InputPath
) -> float:
    if s.placement is not LossPlacement.INSIDE:
        return lossless_visibility(r)
    l1, l2 = loss.l1, loss.l2
    if s.config is Configuration.VARY_FIRST and input_path is InputPath.PATH2:
        a, b = r * (1 - l1), (1 - r) * (1 - l2)
    else:
        a, b = (1 - r) * (1 - l1), r * (1 - l2)
    return _ratio(2.0 * math.sqrt(a * b), a + b)


def two_term_predictability(
    r: float, loss: LossSpec, reading: TwoTermReading = TwoTermReading.PRINTED
) -> float:
    """Outside-loss predictability for the scanned second splitter."""
    l1, l2 = loss.l1, loss.l2
    a, b = (1 - r) * (1 - l1), r * (1 - l2)
    c, d = (1 - r) * (1 - l2), r * (1 - l1)
    if TwoTermReading(reading) is TwoTermReading.PRINTED:
        return _ratio(abs(a - b), 2 * a + b) + _ratio(abs(c - d), 2 * c + d)
    return 0.5 * (_ratio(abs(a - b), a + b) + _ratio(abs(c - d), c + d))


def closed_form_metrics(
    s: Scenario,
    r: float,
    loss: LossSpec,
    two_term: TwoTermReading = TwoTermReading.PRINTED,
) -> DualityMetrics:
    """Evaluate the analytic expressions for V and P.

    ``sum`` on the result is recomputed from ``v`` and ``p``; the analytic
    sum expressions live in :func:`closed_form_sum` for cross-checking.
    """
    r = check_reflectivity(r)
    s.check_loss(loss)
    l1, l2 = loss.l1, loss.l2
    a, b = (1 - r) * (1 - l1), r * (1 - l2)
    if s.placement is LossPlacement.NONE:
        v, p = lossless_visibility(r), abs(1 - 2 * r)
    elif s.config is Configuration.VARY_FIRST:
        v = _closed_form_visibility(s, r, loss, InputPath.PATH1)
        p = _ratio(abs(a - b), a + b)
    elif s.placement is LossPlacement.INSIDE:
        v = _closed_form_visibility(s, r, loss, InputPath.PATH1)
        p = abs(1 - 2 * r)
    else:
        v = lossless_visibility(r)
        p = two_term_predictability(r, loss, two_term)
    *_, lost = _which_path_populations(s, r, loss, InputPath.PATH1)
    return DualityMetrics(v=v, p=p, p_lost=lost)


def closed_form_sum(
    s: Scenario, r: float, loss: LossSpec, two_term: TwoTermReading = TwoTermReading.PRINTED
) -> float:
    """``P**2 + V**2`` written out as a single analytic sum expression."""
    r = check_reflectivity(r)
    s.check_loss(loss)
    l1, l2 = loss.l1, loss.l2
    if s.placement is LossPlacement.NONE:
        return 1.0
    a, b = (1 - r) * (1 - l1), r * (1 - l2)
    coherent = 4 * r * (1 - r) * (1 - l1) * (1 - l2)
    if s.config is Configuration.VARY_FIRST and s.placement is LossPlacement.INSIDE:
        return _ratio(coherent, (a + b) ** 2) + _ratio(abs(a - b) ** 2, (a + b) ** 2)
    if s.config is Configuration.VARY_FIRST:
        return _ratio(abs(a - b) ** 2, (a + b) ** 2) + 4 * r * (1 - r)
    if s.placement is LossPlacement.INSIDE:
        return _ratio(coherent, (a + b) ** 2) + (1 - 2 * r) ** 2
    return two_term_predictability(r, loss, two_term) ** 2 + 4 * r * (1 - r)


def closed_form_path_switch(
    s: Scenario, r: float, loss: LossSpec
) -> PathSwitchResult:
    """Closed-form counterpart of :func:`path_switch_metrics`."""
    r = check_reflectivity(r)
    s.check_loss(loss)
    parts = []
    for path in (InputPath.PATH1, InputPath.PATH2):
        q1, q2, lost = _which_path_populations(s, r, loss, path)
        v = _closed_form_visibility(s, r, loss, path)
        parts += [v, _ratio(q1 - q2, q1 + q2), lost]
    return _combine_switch(*parts)


def closed_form_corrected(s: Scenario, r: float, loss: LossSpec) -> DualityMetrics:
    return closed_form_path_switch(s, r, loss).corrected


def with_uncertainty(m: DualityMetrics, v_sigma: float, p_sigma: float) -> DualityMetrics:
    """Attach standard errors and the propagated error of the sum."""
    sum_sigma = math.hypot(2.0 * m.v * v_sigma, 2.0 * m.p * p_sigma)
    return replace(m, v_sigma=v_sigma, p_sigma=p_sigma, sum_sigma=sum_sigma)
