"""
Synthetic - Planted-partition fixtures for tests and demo runs
Uses: ingest, core.asset_io

Cluster pages share one burst window per cluster: a linear ramp from the
baseline up to ``(1 + burst_magnitude) * baseline_rate`` at the window's
last hour, drawn as Poisson noise on top of the Poisson baseline. Noise
pages only ever see the baseline.
"""

import gzip
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from wikitrends_core import asset_io
from wikitrends_core.errors import InvalidSpec

from .ingest import (
    EdgeList, PageIndex, SummaryStore, ViewMatrix, epoch_hour, hour_to_datetime, save_edges,
    save_summaries,
)

logger = logging.getLogger(__name__)

MIN_WINDOW_HOURS = 6
MAX_WINDOW_HOURS = 24
DEFAULT_START_HOUR = epoch_hour("2018-08-01T00")

Window = Tuple[int, int]

# Per-label vocabularies; the first three words of each list form the
# keyword rule for that label, the title suffix is its title rule.
TOPIC_VOCABULARY: Dict[str, List[str]] = {
    'football': ['goal', 'striker', 'league', 'midfielder', 'penalty', 'stadium',
                 'club', 'transfer', 'keeper', 'derby', 'cup', 'match'],
    'sports': ['tennis', 'olympic', 'athlete', 'medal', 'marathon', 'tournament',
               'race', 'sprint', 'cycling', 'boxing', 'champion', 'podium'],
    'politics': ['political', 'party', 'republican', 'election', 'senate', 'vote',
                 'minister', 'campaign', 'parliament', 'candidate', 'policy', 'government'],
    'movies': ['film', 'actor', 'director', 'premiere', 'cinema', 'screenplay',
               'oscar', 'cast', 'studio', 'sequel', 'trailer', 'blockbuster'],
    'music': ['album', 'song', 'band', 'singer', 'chart', 'guitar',
              'concert', 'lyrics', 'rapper', 'vinyl', 'chorus', 'drummer'],
    'conflicts': ['war', 'battle', 'army', 'troops', 'attack', 'siege',
                  'ceasefire', 'invasion', 'military', 'casualties', 'offensive', 'rebels'],
    'religion': ['church', 'pope', 'saint', 'bishop', 'prayer', 'cathedral',
                 'pilgrimage', 'clergy', 'faith', 'monastery', 'scripture', 'feast'],
    'science': ['physics', 'scientist', 'research', 'laboratory', 'theory', 'experiment',
                'nobel', 'genome', 'telescope', 'molecule', 'quantum', 'discovery'],
    'videogames': ['game', 'console', 'player', 'nintendo', 'gameplay', 'multiplayer',
                   'playstation', 'esports', 'developer', 'arcade', 'controller', 'sprite'],
}

TITLE_SUFFIXES: Dict[str, str] = {
    'football': 'footballer',
    'sports': 'athlete',
    'politics': 'politician',
    'movies': 'film',
    'music': 'album',
    'conflicts': 'battle',
    'religion': 'saint',
    'science': 'scientist',
    'videogames': 'video game',
}

FILLER_WORDS = ['the', 'is', 'a', 'an', 'of', 'and', 'in', 'on', 'was', 'with', 'for', 'to', 'by', 'at']

TOPIC_LABELS = list(TOPIC_VOCABULARY)


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape of a planted-partition fixture."""
    n_clusters: int = 3
    pages_per_cluster: int = 20
    n_noise_pages: int = 500
    T_hours: int = 1344
    baseline_rate: float = 20.0
    burst_magnitude: float = 50.0
    intra_cluster_edge_prob: float = 0.3
    inter_cluster_edge_prob: float = 0.005
    seed: int = 42
    warmup_hours: int = 168
    start_hour: int = DEFAULT_START_HOUR
    language: str = "en"

    @property
    def n_pages(self) -> int:
        return self.n_clusters * self.pages_per_cluster + self.n_noise_pages

    def validate(self) -> None:
        problems = []
        if self.n_clusters < 0:
            problems.append("n_clusters must be >= 0")
        if self.pages_per_cluster < 1:
            problems.append("pages_per_cluster must be >= 1")
        if self.n_noise_pages < 0:
            problems.append("n_noise_pages must be >= 0")
        if self.n_pages < 1:
            problems.append("the fixture needs at least one page")
        if self.T_hours < 1:
            problems.append("T_hours must be >= 1")
        if self.baseline_rate <= 0:
            problems.append("baseline_rate must be positive")
        if self.burst_magnitude < 0:
            problems.append("burst_magnitude must be >= 0")
        if not 0 <= self.warmup_hours < self.T_hours:
            problems.append("warmup_hours must lie in [0, T_hours)")
        for name in ('intra_cluster_edge_prob', 'inter_cluster_edge_prob'):
            if not 0.0 <= getattr(self, name) <= 1.0:
                problems.append(f"{name} must lie in [0, 1]")
        if problems:
            raise InvalidSpec("; ".join(problems))


def cluster_label(cluster_id: int) -> str:
    return TOPIC_LABELS[cluster_id % len(TOPIC_LABELS)]


def page_titles(spec: SyntheticSpec) -> List[str]:
    titles = []
    for c in range(spec.n_clusters):
        suffix = TITLE_SUFFIXES[cluster_label(c)].replace(' ', '_')
        for i in range(spec.pages_per_cluster):
            title = f"Cluster_{c}_Page_{i}"
            if i % 5 == 4:
                title += f"_({suffix})"
            titles.append(title)
    titles.extend(f"Noise_Page_{i}" for i in range(spec.n_noise_pages))
    return titles


def plan_windows(spec: SyntheticSpec) -> List[Window]:
    """One ``[start, end)`` burst window per cluster, in disjoint slots after the warm-up."""
    spec.validate()
    if spec.n_clusters == 0:
        return []
    slot = (spec.T_hours - spec.warmup_hours) // spec.n_clusters
    if slot < MIN_WINDOW_HOURS:
        raise InvalidSpec(
            f"{spec.T_hours - spec.warmup_hours} hours after warm-up cannot hold "
            f"{spec.n_clusters} windows of at least {MIN_WINDOW_HOURS} hours"
        )
    rng = np.random.default_rng([spec.seed, 0])
    windows = []
    for c in range(spec.n_clusters):
        length = int(rng.integers(MIN_WINDOW_HOURS, min(MAX_WINDOW_HOURS, slot) + 1))
        start = spec.warmup_hours + c * slot + int(rng.integers(0, slot - length + 1))
        windows.append((start, start + length))
    return windows


def _check_windows(spec: SyntheticSpec, windows: Sequence[Window]) -> List[Window]:
    windows = [(int(s), int(e)) for s, e in windows]
    if len(windows) != spec.n_clusters:
        raise InvalidSpec(f"expected {spec.n_clusters} windows, got {len(windows)}")
    for start, end in windows:
        if not 0 <= start < end <= spec.T_hours:
            raise InvalidSpec(f"window [{start}, {end}) outside [0, {spec.T_hours})")
    return windows


def generate_synthetic(
    spec: SyntheticSpec,
    windows: Optional[Sequence[Window]] = None,
) -> Tuple[ViewMatrix, EdgeList, Dict[int, int]]:
    """Build a planted-partition view matrix and hyperlink list.

    Returns the matrix, the edges and ``planted`` (cluster page id -> cluster
    id). Identical specs give bit-identical outputs.
    """
    spec.validate()
    windows = _check_windows(spec, windows) if windows is not None else plan_windows(spec)
    rng = np.random.default_rng(spec.seed)
    n = spec.n_pages
    per = spec.pages_per_cluster

    counts = rng.poisson(spec.baseline_rate, size=(n, spec.T_hours)).astype(np.int64)
    planted: Dict[int, int] = {}
    for c, (start, end) in enumerate(windows):
        length = end - start
        ramp = spec.burst_magnitude * spec.baseline_rate * np.arange(1, length + 1) / length
        rows = slice(c * per, (c + 1) * per)
        counts[rows, start:end] += rng.poisson(ramp, size=(per, length))
        for page_id in range(c * per, (c + 1) * per):
            planted[page_id] = c

    community = np.full(n, -1, dtype=np.int64)
    for page_id, c in planted.items():
        community[page_id] = c
    same = (community[:, None] == community[None, :]) & (community[:, None] >= 0)
    prob = np.where(same, spec.intra_cluster_edge_prob, spec.inter_cluster_edge_prob)
    draws = rng.random((n, n))
    np.fill_diagonal(draws, 1.0)
    sources, targets = np.nonzero(draws < prob)
    edges = EdgeList(edges=[(int(s), int(t)) for s, t in zip(sources, targets) if s != t])

    index = PageIndex(page_titles(spec), spec.language)
    matrix = ViewMatrix(index=index, start_hour=spec.start_hour, counts=counts)
    logger.debug("synthetic %s: %d pages, %d edges, windows %s", spec.language, n, len(edges), windows)
    return matrix, edges, planted


def generate_summaries(spec: SyntheticSpec, planted: Dict[int, int]) -> SummaryStore:
    """Topic-vocabulary summaries; every third page carries its label's keyword rule."""
    rng = np.random.default_rng([spec.seed, 1])
    store = SummaryStore()
    for page_id in range(spec.n_pages):
        if page_id in planted:
            label = cluster_label(planted[page_id])
        else:
            label = TOPIC_LABELS[int(rng.integers(len(TOPIC_LABELS)))]
        vocab = TOPIC_VOCABULARY[label]
        words = list(rng.choice(vocab[3:], size=8)) + list(rng.choice(FILLER_WORDS, size=5))
        if page_id % 3 == 0:
            words.extend(vocab[:3])
        rng.shuffle(words)
        store.set(page_id, ' '.join(words).capitalize() + '.')
    return store


def fixture_rules() -> Dict[str, object]:
    """Rules document matching the synthetic vocabularies."""
    return {
        'title_patterns': {suffix: label for label, suffix in TITLE_SUFFIXES.items()},
        'keyword_sets': [
            {'label': label, 'keywords': vocab[:3]} for label, vocab in TOPIC_VOCABULARY.items()
        ],
    }


def write_pageview_files(matrix: ViewMatrix, directory: Union[str, Path]) -> List[Path]:
    """Write one gzip hourly dump per hour (``pageviews-YYYYMMDD-HH0000.gz``)."""
    directory = Path(directory)
    written = []
    for t in range(matrix.n_hours):
        stamp = hour_to_datetime(matrix.start_hour + t).strftime("%Y%m%d-%H0000")
        lines = [
            f"{matrix.index.language} {matrix.index.title_of(p)} {int(matrix.counts[p, t])} 0\n"
            for p in np.flatnonzero(matrix.counts[:, t])
        ]
        data = gzip.compress(''.join(lines).encode('utf-8'), mtime=0)
        written.append(asset_io.write_bytes(directory / f"pageviews-{stamp}.gz", data))
    return written


def write_fixture(
    out_dir: Union[str, Path],
    languages: Sequence[str] = ("en", "fr", "ru"),
    spec: Optional[SyntheticSpec] = None,
    seed: int = 42,
    shared_windows: bool = True,
    as_dumps: bool = False,
) -> Path:
    """Write a ready-to-run multi-language fixture and return its config path.

    With ``shared_windows`` every language bursts in the same windows so
    cross-language alignment has matches to find.
    """
    from .config import derive_seed

    out_dir = Path(out_dir)
    base = spec or SyntheticSpec(
        n_clusters=3, pages_per_cluster=8, n_noise_pages=40, T_hours=504,
        intra_cluster_edge_prob=0.6, inter_cluster_edge_prob=0.01, seed=seed,
    )
    windows = plan_windows(base) if shared_windows else None
    entries = []
    for lang in languages:
        lang_spec = replace(base, language=lang, seed=derive_seed(seed, 'synth', lang))
        matrix, edges, planted = generate_synthetic(lang_spec, windows)
        lang_dir = out_dir / lang
        entry = {'code': lang}
        if as_dumps:
            write_pageview_files(matrix, lang_dir / 'pageviews')
            matrix.index.save(lang_dir / 'index.tsv')
            entry['pageviews'] = f"{lang}/pageviews/pageviews-*.gz"
            entry['index'] = f"{lang}/index.tsv"
        else:
            matrix.save(lang_dir / 'views.wkts')
            entry['matrix'] = f"{lang}/views.wkts"
            entry['index'] = f"{lang}/views.index.tsv"
        save_edges(edges, matrix.index, lang_dir / 'edges.tsv')
        save_summaries(generate_summaries(lang_spec, planted), matrix.index, lang_dir / 'summaries.jsonl')
        asset_io.write_file(lang_dir / 'stopwords.txt', ''.join(w + '\n' for w in sorted(FILLER_WORDS)))
        asset_io.write_file(lang_dir / 'rules.yaml', yaml.safe_dump(fixture_rules(), sort_keys=False))
        asset_io.write_json(lang_dir / 'planted.json', {
            'planted': {matrix.index.title_of(p): c for p, c in sorted(planted.items())},
            'windows': [list(w) for w in (windows or plan_windows(lang_spec))],
        })
        entry.update({
            'edges': f"{lang}/edges.tsv",
            'summaries': f"{lang}/summaries.jsonl",
            'stopwords': f"{lang}/stopwords.txt",
            'rules': f"{lang}/rules.yaml",
        })
        entries.append(entry)

    config = {
        'version': 1,
        'seed': seed,
        'output_dir': 'out',
        'time_range': {
            'start': hour_to_datetime(base.start_hour).strftime("%Y-%m-%dT%H"),
            'end': hour_to_datetime(base.start_hour + base.T_hours).strftime("%Y-%m-%dT%H"),
        },
        'languages': entries,
        'lda': {'enabled': True, 'topics': 3, 'iterations': 40},
    }
    path = asset_io.write_file(out_dir / 'config.yaml', yaml.safe_dump(config, sort_keys=False))
    logger.info("wrote %d-language fixture to %s", len(entries), out_dir)
    return path
