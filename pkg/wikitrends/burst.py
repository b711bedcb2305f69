"""
Burst - Trailing-window z-score burst detection
Uses: core.asset_io

An hour t is a burst when its count stands ``z_threshold`` population
standard deviations above the mean of the trailing window ``[t-W, t)``
and is at least ``min_views``. Hours before ``W`` carry no statistic.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from wikitrends_core import asset_io
from wikitrends_core.errors import ConfigError, SeriesTooShort

from .ingest import ViewMatrix

logger = logging.getLogger(__name__)

_ROW_CHUNK = 4096
_INT64_SAFE = 2 ** 62


@dataclass(frozen=True)
class BurstConfig:
    window_hours: int = 168
    z_threshold: float = 3.0
    min_views: int = 100
    epsilon: float = 1e-9

    def __post_init__(self):
        problems = []
        if self.window_hours < 2:
            problems.append("burst.window_hours must be >= 2")
        if self.z_threshold <= 0:
            problems.append("burst.z_threshold must be > 0")
        if self.min_views < 0:
            problems.append("burst.min_views must be >= 0")
        if self.epsilon <= 0:
            problems.append("burst.epsilon must be > 0")
        if problems:
            raise ConfigError("; ".join(problems), problems)


@dataclass
class BurstProfile:
    """Burst hours of one page, with the z-score of each."""
    page_id: int
    burst_hours: List[int] = field(default_factory=list)
    z_scores: List[float] = field(default_factory=list)
    peak_hour: Optional[int] = None

    def __bool__(self) -> bool:
        return bool(self.burst_hours)

    def to_dict(self) -> Dict[str, object]:
        return {
            'page_id': self.page_id,
            'burst_hours': list(self.burst_hours),
            'z_scores': [round(z, 6) for z in self.z_scores],
            'peak_hour': self.peak_hour,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> 'BurstProfile':
        return cls(
            page_id=int(data['page_id']),
            burst_hours=[int(h) for h in data['burst_hours']],
            z_scores=[float(z) for z in data['z_scores']],
            peak_hour=None if data.get('peak_hour') is None else int(data['peak_hour']),
        )


def _window_sums(counts: np.ndarray, window: int) -> Tuple[np.ndarray, np.ndarray]:
    """Exact trailing sums of x and x**2 along the last axis."""
    peak = int(counts.max()) if counts.size else 0
    dtype = np.int64 if window * window * peak * peak < _INT64_SAFE else object
    x = counts.astype(dtype)
    pad = np.zeros(x.shape[:-1] + (1,), dtype=dtype)
    s = np.concatenate([pad, np.cumsum(x, axis=-1)], axis=-1)
    q = np.concatenate([pad, np.cumsum(x * x, axis=-1)], axis=-1)
    n = counts.shape[-1]
    return s[..., window:n] - s[..., :n - window], q[..., window:n] - q[..., :n - window]


def rolling_stats(series, window: int) -> Tuple[np.ndarray, np.ndarray]:
    """Trailing-window mean and population std for every hour ``t >= window``.

    Returns two arrays of length ``T - window``; entry ``i`` belongs to hour
    ``window + i``.
    """
    counts = np.asarray(series, dtype=np.int64)
    if counts.shape[-1] < window:
        raise SeriesTooShort(f"series of {counts.shape[-1]} hours is shorter than window {window}")
    sums, squares = _window_sums(counts, window)
    # W*Q - S^2 is an exact integer, so constant windows give std == 0 exactly
    spread = window * squares - sums * sums
    mean = (sums / window).astype(np.float64)
    std = np.sqrt(spread.astype(np.float64)) / window
    return mean, std


def _z_scores(counts: np.ndarray, config: BurstConfig) -> np.ndarray:
    mean, std = rolling_stats(counts, config.window_hours)
    current = counts[..., config.window_hours:].astype(np.float64)
    return (current - mean) / (std + config.epsilon)


def _profile(page_id: int, row: np.ndarray, z: np.ndarray, config: BurstConfig) -> BurstProfile:
    w = config.window_hours
    hits = np.flatnonzero((z >= config.z_threshold) & (row[w:] >= config.min_views))
    if hits.size == 0:
        return BurstProfile(page_id=page_id)
    scores = z[hits]
    # argmax returns the first maximum, i.e. the earliest hour
    return BurstProfile(
        page_id=page_id,
        burst_hours=[int(h) + w for h in hits],
        z_scores=[float(s) for s in scores],
        peak_hour=int(hits[int(np.argmax(scores))]) + w,
    )


def detect_bursts(series, config: Optional[BurstConfig] = None, page_id: int = -1) -> BurstProfile:
    """Burst hours of one series (hour indices relative to its first hour)."""
    config = config or BurstConfig()
    row = np.asarray(series, dtype=np.int64)
    return _profile(page_id, row, _z_scores(row, config), config)


def trending_pages(
    matrix: ViewMatrix,
    config: Optional[BurstConfig] = None,
) -> Dict[int, BurstProfile]:
    """Profiles of every page with at least one burst hour."""
    config = config or BurstConfig()
    if matrix.n_hours < config.window_hours:
        raise SeriesTooShort(
            f"{matrix.n_hours} hours of views are shorter than window {config.window_hours}"
        )
    trending: Dict[int, BurstProfile] = {}
    for lo in range(0, matrix.n_pages, _ROW_CHUNK):
        block = matrix.counts[lo:lo + _ROW_CHUNK]
        z = _z_scores(block, config)
        for offset, row in enumerate(block):
            profile = _profile(lo + offset, row, z[offset], config)
            if profile:
                trending[profile.page_id] = profile
    logger.info("%s: %d of %d pages trending", matrix.index.language, len(trending), matrix.n_pages)
    return trending


def save_bursts(bursts: Dict[int, BurstProfile], path: Union[str, Path]) -> Path:
    return asset_io.write_jsonl(path, (bursts[p].to_dict() for p in sorted(bursts)))


def load_bursts(path: Union[str, Path]) -> Dict[int, BurstProfile]:
    profiles = (BurstProfile.from_dict(row) for row in asset_io.read_jsonl(path))
    return {p.page_id: p for p in profiles}
