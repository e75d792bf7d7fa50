import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from complementarity import (
    DetectionModel,
    DomainError,
    InputPath,
    InsufficientStatisticsError,
    LossSpec,
    Scenario,
    SeedSpec,
    SequenceConfig,
    ShotOutcome,
    closed_form_metrics,
    estimate_distribution,
    estimate_fringe,
    estimate_metrics,
    sample_shot,
)
from complementarity.metrics import fit_sinusoid
from complementarity.montecarlo import (
    ShotCounts,
    estimate_corrected_metrics,
    fraction_within,
    sample_shots,
    shot_uniforms,
)

IDEAL = DetectionModel()
SEED = SeedSpec(20240601, 7)
# T1 = 0 puts the whole population in path 1 without a second pulse
ALL_PATH1 = SequenceConfig(0.0, 0.5, False)
BALANCED = SequenceConfig(0.5, 0.5, False)


def within(est, exact, k=3.0):
    return abs(est.mean - exact) <= k * est.stderr


class TestDetectionModel:
    def test_reported(self):
        d = DetectionModel.reported()
        assert (d.survival, d.discrimination, d.damping) == (0.75, 0.99, 0.0004)

    @pytest.mark.parametrize(
        "kw", [{"survival": 1.2}, {"discrimination": 0.4}, {"damping": -0.1}]
    )
    def test_ranges(self, kw):
        with pytest.raises(DomainError):
            DetectionModel(**kw)

    @pytest.mark.parametrize("kw", [{"seed": -1}, {"stream": 2**64}, {"seed": 1.5}])
    def test_seed_range(self, kw):
        with pytest.raises(DomainError):
            SeedSpec(**kw)


class TestSampleShot:
    def test_certain_path_is_always_read_there(self):
        bright1 = DetectionModel(bright_path=InputPath.PATH1)
        for i in range(50):
            assert sample_shot(ALL_PATH1, bright1, SEED, i) is ShotOutcome.BRIGHT
            assert sample_shot(ALL_PATH1, IDEAL, SEED, i) is ShotOutcome.DARK

    def test_no_survival(self):
        det = DetectionModel(survival=0.0)
        assert all(
            sample_shot(ALL_PATH1, det, SEED, i) is ShotOutcome.LOST for i in range(50)
        )

    def test_interferometer_loss_is_lost(self):
        cfg = SequenceConfig(1.0, 0.5, False, loss=LossSpec.inside(0.0, 1.0))
        assert set(sample_shots(cfg, IDEAL, SEED, 200)) == {ShotOutcome.LOST}

    def test_balanced_fraction(self):
        counts = estimate_distribution(BALANCED, IDEAL, SEED, 100_000)
        assert abs(counts.p_bright.mean - 0.5) <= 3 * 0.5 / math.sqrt(1e5)

    def test_deterministic_per_index(self):
        a = [sample_shot(BALANCED, IDEAL, SEED, i) for i in range(100)]
        b = [sample_shot(BALANCED, IDEAL, SEED, i) for i in reversed(range(100))][::-1]
        assert a == b
        assert list(sample_shots(BALANCED, IDEAL, SEED, 100)) == [int(x) for x in a]

    @settings(max_examples=25)
    @given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1),
           st.integers(0, 10_000), st.integers(1, 300), st.integers(1, 300))
    def test_chunk_invariance(self, seed, stream, start, n1, n2):
        s = SeedSpec(seed, stream)
        whole = shot_uniforms(s, start, n1 + n2)
        parts = np.vstack([shot_uniforms(s, start, n1), shot_uniforms(s, start + n1, n2)])
        assert np.array_equal(whole, parts)

    def test_streams_differ(self):
        a = shot_uniforms(SeedSpec(1, 0), 0, 8)
        b = shot_uniforms(SeedSpec(1, 1), 0, 8)
        c = shot_uniforms(SeedSpec(2, 0), 0, 8)
        assert not np.array_equal(a, b) and not np.array_equal(a, c)

    def test_uniform_range(self):
        u = shot_uniforms(SEED, 0, 10_000)
        assert u.min() >= 0.0 and u.max() < 1.0
        assert abs(u.mean() - 0.5) < 0.01

    def test_substream_is_stable_and_distinct(self):
        assert SEED.substream(3, 1) == SEED.substream(3, 1)
        assert SEED.substream(3, 1) != SEED.substream(1, 3)
        assert SEED.substream(0).seed == SEED.seed


class TestEstimateDistribution:
    def test_three_quarters(self):
        cfg = SequenceConfig(0.25, 0.5, False)  # p_path1 = 0.75
        det = DetectionModel(bright_path=InputPath.PATH1)
        counts = estimate_distribution(cfg, det, SEED, 100_000)
        assert within(counts.p_bright, 0.75)

    def test_reported_survival_loses_a_quarter(self):
        counts = estimate_distribution(BALANCED, DetectionModel(survival=0.75), SEED, 100_000)
        assert within(counts.p_lost, 0.25)

    def test_single_shot(self):
        counts = estimate_distribution(BALANCED, IDEAL, SEED, 1)
        assert counts.n_total == 1
        assert counts.p_bright.mean in (0.0, 1.0)
        assert counts.p_bright.stderr == 0.0

    def test_counts_consistent(self):
        counts = estimate_distribution(BALANCED, DetectionModel.reported(), SEED, 5000)
        assert counts.n_detected <= counts.n_total == 5000
        total = counts.p_bright.mean + counts.p_dark.mean + counts.p_lost.mean
        assert total == pytest.approx(1.0)

    def test_no_detected(self):
        counts = estimate_distribution(BALANCED, DetectionModel(survival=0.0), SEED, 10)
        with pytest.raises(InsufficientStatisticsError):
            counts.postselected_bright()

    def test_rejects_zero_shots(self):
        with pytest.raises(DomainError):
            estimate_distribution(BALANCED, IDEAL, SEED, 0)

    def test_signed_difference(self):
        c = ShotCounts(n_bright=30, n_dark=10, n_lost=60, bright_path=InputPath.PATH2)
        assert c.signed_difference().mean == pytest.approx((10 - 30) / 40)
        assert c.p_path1.mean == pytest.approx(0.1)

    def test_stderr_scales_as_inverse_root_n(self):
        small = estimate_distribution(BALANCED, IDEAL, SEED, 10_000).p_bright.stderr
        large = estimate_distribution(BALANCED, IDEAL, SEED, 100_000).p_bright.stderr
        assert small / large == pytest.approx(math.sqrt(10), rel=0.1)

    def test_bright_path_flag_mirrors_counts(self):
        a = estimate_distribution(BALANCED, IDEAL, SEED, 1000)
        b = estimate_distribution(BALANCED, DetectionModel(bright_path=1), SEED, 1000)
        assert (a.n_bright, a.n_dark) == (b.n_dark, b.n_bright)
        assert a.n_path1 == b.n_path1


class TestEstimateFringe:
    def _fit(self, cfg, det, seed=SEED):
        return fit_sinusoid(estimate_fringe(cfg, det, seed, 24, 10_000))

    def test_balanced(self):
        fit = self._fit(SequenceConfig(0.5, 0.5), IDEAL)
        assert abs(fit.visibility - 1.0) <= 3 * fit.visibility_sigma

    def test_uniform_detection_loss(self):
        fit = self._fit(SequenceConfig(0.5, 0.5), DetectionModel(survival=0.75))
        assert abs(fit.visibility - 1.0) <= 3 * fit.visibility_sigma

    def test_r02(self):
        fit = self._fit(SequenceConfig(0.2, 0.5), IDEAL)
        assert abs(fit.visibility - 0.8) <= 3 * fit.visibility_sigma

    def test_sigma_set(self):
        f = estimate_fringe(SequenceConfig(0.3, 0.5), IDEAL, SEED, 6, 100)
        assert f.sigma is not None and np.all(f.sigma > 0)

    def test_zero_detected(self):
        with pytest.raises(InsufficientStatisticsError):
            estimate_fringe(SequenceConfig(), DetectionModel(survival=0.0), SEED, 4, 10)

    def test_bad_shots(self):
        with pytest.raises(DomainError):
            estimate_fringe(SequenceConfig(), IDEAL, SEED, 4, 0)


class TestEstimateMetrics:
    def test_lossless_balanced(self):
        m = estimate_metrics(Scenario(1, "none"), 0.5, LossSpec(), IDEAL, SEED)
        assert abs(m.sum - 1.0) <= 3 * m.sum_sigma

    def test_outside_violation_with_detection_loss(self):
        s, loss = Scenario(1, "outside"), LossSpec.outside(0.0, 0.5)
        m = estimate_metrics(s, 0.5, loss, DetectionModel(survival=0.75), SEED)
        assert abs(m.sum - 10 / 9) <= 3 * m.sum_sigma
        assert m.sum - 3 * m.sum_sigma > 1.0

    def test_discrimination_bias_law(self):
        s = Scenario(1, "none")
        exact = estimate_metrics(s, 0.0, LossSpec(), IDEAL, SEED)
        assert exact.p == 1.0
        m = estimate_metrics(s, 0.0, LossSpec(), DetectionModel(discrimination=0.99), SEED)
        assert abs(m.p - 0.98) <= 3 * m.p_sigma

    def test_post_selection_neutrality(self):
        s = Scenario(1, "none")
        for r in (0.2, 0.5, 0.7):
            a = estimate_metrics(s, r, LossSpec(), IDEAL, SEED.substream(1))
            b = estimate_metrics(s, r, LossSpec(), DetectionModel(survival=0.75), SEED.substream(2))
            assert abs(a.p - b.p) <= 3 * math.hypot(a.p_sigma, b.p_sigma) + 1e-12
            assert abs(a.v - b.v) <= 3 * math.hypot(a.v_sigma, b.v_sigma) + 1e-12

    def test_damping_reduces_visibility(self):
        s = Scenario(1, "none")
        m = estimate_metrics(s, 0.5, LossSpec(), DetectionModel(damping=0.3), SEED)
        assert abs(m.v - 0.7) <= 3 * m.v_sigma

    def test_reproducible(self):
        s, loss = Scenario(2, "inside"), LossSpec.inside(0.0, 0.5)
        a = estimate_metrics(s, 0.7, loss, DetectionModel.reported(), SEED, 20_000)
        b = estimate_metrics(s, 0.7, loss, DetectionModel.reported(), SEED, 20_000)
        assert a == b

    def test_budget_floor(self):
        with pytest.raises(DomainError):
            estimate_metrics(Scenario(1, "none"), 0.5, LossSpec(), IDEAL, SEED, 999)

    @pytest.mark.parametrize(
        "s, loss",
        [
            (Scenario(1, "inside"), LossSpec.inside(0.0, 0.5)),
            (Scenario(1, "outside"), LossSpec.outside(0.0, 0.5)),
            (Scenario(2, "inside"), LossSpec.inside(0.0, 0.5)),
        ],
    )
    def test_oracle_agreement(self, s, loss):
        rs = np.linspace(0.05, 0.95, 10)
        est, sig, ref = [], [], []
        for i, r in enumerate(rs):
            m = estimate_metrics(s, r, loss, IDEAL, SEED.substream(i), 20_000)
            est.append(m.sum)
            sig.append(m.sum_sigma)
            ref.append(closed_form_metrics(s, r, loss).sum)
        assert fraction_within(est, sig, ref) >= 0.9

    def test_corrected_restores_bound(self):
        s, loss = Scenario(1, "outside"), LossSpec.outside(0.0, 0.5)
        m = estimate_corrected_metrics(s, 0.5, loss, IDEAL, SEED)
        assert abs(m.sum - 1.0) <= 3 * m.sum_sigma


def test_fraction_within():
    assert fraction_within([1, 2, 3], [0.1, 0.1, 0.1], [1, 2.5, 3.2]) == pytest.approx(2 / 3)
