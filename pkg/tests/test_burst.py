"""
Tests for burst detection.
"""

import math
import pytest
from pathlib import Path
import tempfile

import numpy as np

from wikitrends.burst import (
    BurstConfig, BurstProfile, detect_bursts, load_bursts, rolling_stats, save_bursts, trending_pages,
)
from wikitrends.ingest import PageIndex, ViewMatrix
from wikitrends_core.errors import ConfigError, SeriesTooShort


def oracle_bursts(series, config):
    """Brute-force trailing-window z-scores from exact integer window moments."""
    w = config.window_hours
    values = [int(v) for v in series]
    sums, squares = [0], [0]
    for v in values:
        sums.append(sums[-1] + v)
        squares.append(squares[-1] + v * v)
    hours, scores = [], []
    for t in range(w, len(values)):
        total = sums[t] - sums[t - w]
        # w^2 times the population variance
        spread = w * (squares[t] - squares[t - w]) - total * total
        z = (values[t] - total / w) / (math.sqrt(spread) / w + config.epsilon)
        if z >= config.z_threshold and values[t] >= config.min_views:
            hours.append(t)
            scores.append(z)
    return hours, scores


class TestBurstConfig:
    """Test configuration bounds."""

    def test_defaults(self):
        config = BurstConfig()
        assert (config.window_hours, config.z_threshold, config.min_views) == (168, 3.0, 100)

    @pytest.mark.parametrize("kwargs", [
        {'window_hours': 1}, {'z_threshold': 0}, {'min_views': -1}, {'epsilon': 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            BurstConfig(**kwargs)


class TestRollingStats:
    """Test trailing-window statistics."""

    def test_constant(self):
        mean, std = rolling_stats([5] * 10, 4)
        assert mean.tolist() == [5.0] * 6
        assert std.tolist() == [0.0] * 6

    def test_zeros(self):
        mean, std = rolling_stats([0, 0, 0, 0], 2)
        assert mean.tolist() == [0.0, 0.0]

    def test_formula(self):
        mean, std = rolling_stats([1, 2, 3, 4, 5], 3)
        assert mean[1] == pytest.approx(3.0)
        assert std[1] == pytest.approx(math.sqrt(2 / 3))

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            rolling_stats([1, 2], 3)

    def test_large_counts_stay_exact(self):
        series = [10 ** 9] * 200
        _, std = rolling_stats(series, 168)
        assert std.max() == 0.0


class TestDetectBursts:
    """Test single-series detection."""

    def test_constant_series(self):
        assert detect_bursts([500] * 300).burst_hours == []

    def test_single_spike(self):
        series = [10] * 168 + [1000]
        profile = detect_bursts(series, BurstConfig(z_threshold=3, min_views=100))

        assert profile.burst_hours == [168]
        assert profile.peak_hour == 168
        assert profile.z_scores[0] == pytest.approx(990 / 1e-9)

    def test_floor(self):
        series = [10] * 168 + [50]
        assert detect_bursts(series).burst_hours == []

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            detect_bursts([1] * 10)

    def test_peak_ties_take_earliest(self):
        config = BurstConfig(window_hours=4, min_views=0)
        profile = detect_bursts([1, 1, 1, 1, 9, 1, 1, 1, 1, 9], config)
        assert profile.burst_hours == [4, 9]
        assert profile.peak_hour == 4

    def test_matches_oracle(self):
        rng = np.random.default_rng(2024)
        config = BurstConfig(window_hours=24, z_threshold=2.5, min_views=30)
        for _ in range(1000):
            T = int(rng.integers(24, 1001))
            series = rng.poisson(40, size=T)
            spikes = rng.integers(0, T, size=3)
            series[spikes] = rng.integers(0, 10 ** 6, size=3)

            profile = detect_bursts(series, config)
            hours, scores = oracle_bursts(series.tolist(), config)
            assert profile.burst_hours == hours
            assert profile.z_scores == pytest.approx(scores, rel=1e-9)
            if hours:
                assert profile.peak_hour in profile.burst_hours

    def test_profile_properties(self):
        rng = np.random.default_rng(5)
        config = BurstConfig(window_hours=12, z_threshold=2.0, min_views=20)
        series = rng.poisson(25, size=300)
        series[100] = 400
        profile = detect_bursts(series, config)

        for hour, z in zip(profile.burst_hours, profile.z_scores):
            assert z >= config.z_threshold
            assert series[hour] >= config.min_views

    def test_scaling_keeps_z_when_spread(self):
        rng = np.random.default_rng(8)
        config = BurstConfig(window_hours=24, min_views=0)
        series = rng.poisson(200, size=200)
        series[150] = 2000
        base = detect_bursts(series, config)
        scaled = detect_bursts(series * 3, config)
        assert scaled.burst_hours == base.burst_hours

    def test_scaling_can_cross_the_floor(self):
        config = BurstConfig(window_hours=4, min_views=100)
        series = np.array([10, 12, 10, 12, 60])
        assert detect_bursts(series, config).burst_hours == []
        assert detect_bursts(series * 2, config).burst_hours == [4]

    def test_raising_threshold_never_adds_hours(self):
        rng = np.random.default_rng(13)
        series = rng.poisson(30, size=500)
        series[rng.integers(0, 500, size=10)] *= 8
        previous = None
        for theta in (1.0, 2.0, 3.0, 5.0, 8.0):
            hours = set(detect_bursts(series, BurstConfig(window_hours=48, z_threshold=theta, min_views=0)).burst_hours)
            if previous is not None:
                assert hours <= previous
            previous = hours


class TestTrendingPages:
    """Test matrix-wide detection."""

    def _matrix(self, counts):
        counts = np.asarray(counts)
        return ViewMatrix(PageIndex([f"P{i}" for i in range(counts.shape[0])]), 0, counts)

    def test_all_zero(self):
        assert trending_pages(self._matrix(np.zeros((3, 200), dtype=int))) == {}

    def test_one_spiking_page(self):
        rng = np.random.default_rng(1)
        counts = rng.poisson(20, size=(5, 200))
        counts[3, 190] = 5000
        trending = trending_pages(self._matrix(counts))

        assert list(trending) == [3]
        assert 190 in trending[3].burst_hours

    def test_row_order_irrelevant(self):
        rng = np.random.default_rng(4)
        counts = rng.poisson(50, size=(6, 250))
        counts[[1, 4], 200] = 3000
        forward = trending_pages(self._matrix(counts))
        backward = trending_pages(self._matrix(counts[::-1]))

        assert sorted(forward) == [1, 4]
        assert sorted(backward) == [1, 4]
        assert forward[1].burst_hours == backward[4].burst_hours

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            trending_pages(self._matrix(np.zeros((1, 10), dtype=int)))


class TestBurstExport:
    """Test the JSONL export."""

    def test_save_load(self):
        bursts = {
            7: BurstProfile(7, [200, 201], [4.25, 9.5], 201),
            2: BurstProfile(2, [180], [3.0], 180),
        }
        with tempfile.TemporaryDirectory() as tmpdir:
            path = save_bursts(bursts, Path(tmpdir) / "bursts.jsonl")
            lines = path.read_text().splitlines()
            assert '"page_id": 2' in lines[0]
            assert load_bursts(path) == bursts
