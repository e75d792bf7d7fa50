"""Complementarity of visibility and predictability in a lossy two-path interferometer."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ComplementarityError,
    ConfigError,
    DegenerateConfigurationError,
    DegenerateFitError,
    DomainError,
    InsufficientDataError,
    InsufficientStatisticsError,
)
from .interferometer import (  # noqa: E402
    InputPath,
    LossPlacement,
    LossSpec,
    OutcomeDistribution,
    PathState,
    SequenceConfig,
    apply_beam_splitter,
    apply_loss,
    apply_phase,
    pulse_area_from_reflectivity,
    reflectivity_from_pulse_area,
    run_sequence,
)
from .metrics import (  # noqa: E402
    Configuration,
    DualityMetrics,
    Fringe,
    Scenario,
    TwoTermReading,
    VisibilityMethod,
    closed_form_corrected,
    closed_form_metrics,
    corrected_metrics,
    measured_metrics,
    predictability_from_distribution,
    simulate_fringe,
    visibility_from_fringe,
)
from .montecarlo import (  # noqa: E402
    DetectionModel,
    EstimateWithCI,
    SeedSpec,
    ShotOutcome,
    estimate_distribution,
    estimate_fringe,
    estimate_metrics,
    sample_shot,
)
