"""
Report - Trends, topic distributions, cross-language alignment and exports
Uses: graph, text, label, burst, core.content_transform, core.asset_io

Every artifact is written through a (kind, format) writer registered in
``content_transform``; writes are atomic and byte-deterministic (sorted
keys, floats rounded to 6 decimals).
"""

import io
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from networkx.readwrite.gexf import GEXFWriter

from wikitrends_core import asset_io
from wikitrends_core.content_transform import apply_transform, define_transform
from wikitrends_core.errors import InconsistentInputs, NoTrends

from .burst import save_bursts
from .graph import Partition, TrendGraph, central_page, graph_to_json
from .ingest import PageIndex, ViewMatrix, hour_to_datetime
from .label import LABEL_SET, Metrics
from .text import Keywords, LdaModel, keywords_to_json

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_DELTA_HOURS = 48


def run_stamp(hour: int) -> str:
    """Compact UTC stamp of an epoch hour, e.g. ``20181201T00``."""
    return hour_to_datetime(hour).strftime("%Y%m%dT%H")


def iso_hour(hour: int) -> str:
    return hour_to_datetime(hour).strftime("%Y-%m-%dT%H:00:00Z")


# ============================================================================
# TRENDS
# ============================================================================

@dataclass
class Trend:
    trend_id: str
    language: str
    cluster_id: int
    members: List[int]
    central_page: int
    label: str
    keywords: List[Tuple[str, float]]
    series: List[int]
    peak_hour: int
    start_hour: int

    @property
    def peak_epoch_hour(self) -> int:
        return self.start_hour + self.peak_hour

    @property
    def max_views(self) -> int:
        return max(self.series) if self.series else 0


@dataclass
class TrendReport:
    """Trends of one language run with what is needed to serialize them."""
    language: str
    generated_at: str
    start_hour: int
    index: PageIndex
    trends: List[Trend] = field(default_factory=list)


def assemble_trends(
    partition: Partition,
    matrix: ViewMatrix,
    scores: Mapping[int, float],
    keywords: Keywords,
    cluster_labels: Mapping[int, str],
    stamp: Optional[str] = None,
    top_n: Optional[int] = None,
) -> List[Trend]:
    """One trend per kept cluster, strongest peak first; ``top_n`` keeps
    only the most viewed."""
    if top_n is not None and top_n < 1:
        raise ValueError("top_n must be >= 1")
    language = matrix.index.language
    stamp = stamp or run_stamp(matrix.end_hour)
    trends = []
    for cluster_id in partition.kept_clusters():
        members = partition.members(cluster_id)
        outside = [p for p in members if not 0 <= p < matrix.n_pages]
        if outside:
            raise InconsistentInputs(f"cluster {cluster_id} has pages outside the view matrix: {outside}")
        missing = [p for p in members if p not in scores]
        if missing:
            raise InconsistentInputs(f"cluster {cluster_id} has pages without a pagerank score: {missing}")
        if cluster_id not in cluster_labels:
            raise InconsistentInputs(f"cluster {cluster_id} has no label")
        series = matrix.counts[members].sum(axis=0)
        central = central_page(members, scores)
        trends.append(Trend(
            trend_id=f"{language}-{cluster_id}-{stamp}",
            language=language,
            cluster_id=cluster_id,
            members=members,
            central_page=central,
            label=cluster_labels[cluster_id],
            keywords=[(t, round(s, 6)) for t, s in keywords.get(cluster_id, [])],
            series=[int(v) for v in series],
            peak_hour=int(np.argmax(series)),
            start_hour=matrix.start_hour,
        ))
    trends.sort(key=lambda t: (-t.max_views, t.cluster_id))
    if top_n is not None:
        trends = trends[:top_n]
    logger.info("%s: assembled %d trends", language, len(trends))
    return trends


@dataclass
class TopicDistribution:
    counts: Dict[str, int]
    shares: Dict[str, float]
    page_counts: Dict[str, int]

    def to_json(self) -> Dict[str, Any]:
        return {
            'counts': self.counts,
            'shares': {k: round(v, 6) for k, v in self.shares.items()},
            'page_counts': self.page_counts,
        }


def topic_distribution(trends: Sequence[Trend]) -> TopicDistribution:
    """Trends per label (and member pages per label, for comparison)."""
    if not trends:
        raise NoTrends("no trends to count")
    counts = Counter(t.label for t in trends)
    pages = Counter()
    for t in trends:
        pages[t.label] += len(t.members)
    total = len(trends)

    def order(label: str) -> Tuple[int, str]:
        return (LABEL_SET.index(label) if label in LABEL_SET else len(LABEL_SET), label)

    labels = sorted(counts, key=order)
    return TopicDistribution(
        counts={l: counts[l] for l in labels},
        shares={l: counts[l] / total for l in labels},
        page_counts={l: pages[l] for l in labels},
    )


# ============================================================================
# ALIGNMENT
# ============================================================================

@dataclass
class TrendAlignment:
    delta_hours: int
    groups: List[List[Tuple[str, str]]]

    def unique(self) -> List[Tuple[str, str]]:
        """Trends no other trend was aligned with."""
        return [g[0] for g in self.groups if len(g) == 1]

    def shared(self) -> List[List[Tuple[str, str]]]:
        return [g for g in self.groups if len({lang for lang, _ in g}) > 1]

    def to_json(self) -> Dict[str, Any]:
        return {
            'delta_hours': self.delta_hours,
            'groups': [[{'language': lang, 'trend_id': tid} for lang, tid in g] for g in self.groups],
        }


def align_trends(trends: Mapping[str, Sequence[Trend]], delta_hours: int = DEFAULT_DELTA_HOURS) -> TrendAlignment:
    """Greedy grouping by label and peak proximity.

    Trends are visited by absolute peak hour (then language, then id); each
    joins the earliest group with the same label whose every peak lies
    within ``delta_hours`` of its own, or opens a new group.
    """
    if len(trends) < 2:
        logger.warning("aligning fewer than two languages (%d)", len(trends))
    pool = sorted(
        (t for lang in sorted(trends) for t in trends[lang]),
        key=lambda t: (t.peak_epoch_hour, t.language, t.trend_id),
    )
    groups: List[Dict[str, Any]] = []
    for trend in pool:
        for group in groups:
            if group['label'] == trend.label and all(
                abs(peak - trend.peak_epoch_hour) <= delta_hours for peak in group['peaks']
            ):
                group['peaks'].append(trend.peak_epoch_hour)
                group['members'].append((trend.language, trend.trend_id))
                break
        else:
            groups.append({
                'label': trend.label,
                'peaks': [trend.peak_epoch_hour],
                'members': [(trend.language, trend.trend_id)],
            })
    alignment = TrendAlignment(delta_hours=delta_hours, groups=[g['members'] for g in groups])
    logger.info("aligned %d trends into %d groups (%d cross-language)",
                len(pool), len(groups), len(alignment.shared()))
    return alignment


# ============================================================================
# SERIALIZATION
# ============================================================================

def trend_to_json(trend: Trend, index: PageIndex) -> Dict[str, Any]:
    return {
        'id': trend.trend_id,
        'cluster_id': trend.cluster_id,
        'label': trend.label,
        'central_page_title': index.title_of(trend.central_page),
        'members': [index.title_of(p) for p in trend.members],
        'keywords': [{'token': t, 'score': round(s, 6)} for t, s in trend.keywords],
        'peak_hour': trend.peak_hour,
        'series': list(trend.series),
    }


def trends_to_json(report: TrendReport) -> Dict[str, Any]:
    return {
        'schema_version': SCHEMA_VERSION,
        'language': report.language,
        'generated_at': report.generated_at,
        'start_hour': report.start_hour,
        'trends': [trend_to_json(t, report.index) for t in report.trends],
    }


def trends_from_json(doc: Mapping[str, Any], index: PageIndex) -> TrendReport:
    language = doc['language']

    def resolve(title: str) -> int:
        page_id = index.id_of(title)
        if page_id is None:
            raise InconsistentInputs(f"trend page '{title}' is not in the {language} index")
        return page_id

    trends = [
        Trend(
            trend_id=row['id'],
            language=language,
            cluster_id=int(row['cluster_id']),
            members=[resolve(t) for t in row['members']],
            central_page=resolve(row['central_page_title']),
            label=row['label'],
            keywords=[(kw['token'], float(kw['score'])) for kw in row['keywords']],
            series=[int(v) for v in row['series']],
            peak_hour=int(row['peak_hour']),
            start_hour=int(doc['start_hour']),
        )
        for row in doc['trends']
    ]
    return TrendReport(language=language, generated_at=doc['generated_at'],
                       start_hour=int(doc['start_hour']), index=index, trends=trends)


def load_trends(path: Path, index: PageIndex) -> TrendReport:
    return trends_from_json(asset_io.read_json(path), index)


# ============================================================================
# WRITERS
# ============================================================================

def _fmt(value: Any) -> Any:
    return f"{value:.6f}" if isinstance(value, float) else value


def _write_trends_json(report: TrendReport, path: Path) -> List[Path]:
    return [asset_io.write_json(path, trends_to_json(report))]


def _write_trend_series(report: TrendReport, path: Path) -> List[Path]:
    """One ``<trend id>.csv`` per trend under directory ``path``."""
    written = []
    for trend in report.trends:
        rows = [
            {'hour': t, 'timestamp': iso_hour(trend.start_hour + t), 'views': v}
            for t, v in enumerate(trend.series)
        ]
        written.append(asset_io.write_csv(path / f"{trend.trend_id}.csv", rows, ['hour', 'timestamp', 'views']))
    return written


@dataclass
class GraphExport:
    graph: TrendGraph
    index: PageIndex
    partition: Optional[Partition] = None
    scores: Optional[Mapping[int, float]] = None
    cluster_labels: Mapping[int, str] = field(default_factory=dict)
    generated_on: str = "1970-01-01"


def _write_graph_json(artifact: GraphExport, path: Path) -> List[Path]:
    doc = graph_to_json(artifact.graph, artifact.index, artifact.partition, artifact.scores)
    return [asset_io.write_json(path, doc)]


def _write_graph_gexf(artifact: GraphExport, path: Path) -> List[Path]:
    """GEXF 1.2 with title, degree, cluster and pagerank node attributes."""
    tg = artifact.graph
    g = nx.Graph()
    for p in tg.nodes:
        attrs: Dict[str, Any] = {
            'label': artifact.index.title_of(p),
            'title': artifact.index.title_of(p),
            'degree': tg.degree(p),
        }
        if artifact.partition is not None:
            cluster = artifact.partition[p]
            attrs['cluster'] = int(cluster)
            attrs['filtered'] = cluster in artifact.partition.filtered
            attrs['topic'] = artifact.cluster_labels.get(cluster, '')
        if artifact.scores is not None:
            attrs['pagerank'] = round(float(artifact.scores[p]), 12)
        g.add_node(p, **attrs)
    for u, v, w in tg.edges():
        g.add_edge(u, v, weight=round(float(w), 6))

    writer = GEXFWriter(version="1.2draft")
    writer.add_graph(g)
    meta = writer.xml.find("meta")
    meta.set("lastmodifieddate", artifact.generated_on)
    meta.find("creator").text = "wikitrends"
    buffer = io.BytesIO()
    writer.write(buffer)
    return [asset_io.write_bytes(path, buffer.getvalue())]


def _write_keywords_json(artifact: Keywords, path: Path) -> List[Path]:
    return [asset_io.write_json(path, {'clusters': keywords_to_json(artifact)})]


def _write_lda_json(model: LdaModel, path: Path, top_k: int = 20) -> List[Path]:
    return [asset_io.write_json(path, model.to_json(top_k))]


def _write_metrics_csv(metrics: Metrics, path: Path) -> List[Path]:
    rows = [{k: _fmt(v) for k, v in row.items()} for row in metrics.table_rows()]
    return [asset_io.write_csv(path, rows, ['label', 'precision', 'recall', 'f1', 'support'])]


def _write_confusion_csv(metrics: Metrics, path: Path) -> List[Path]:
    labels = list(metrics.label_set)
    confusion = metrics.confusion if metrics.confusion is not None else np.zeros((len(labels), len(labels)), int)
    rows = [
        {'true': labels[i], **{labels[j]: int(confusion[i, j]) for j in range(len(labels))}}
        for i in range(len(labels))
    ]
    return [asset_io.write_csv(path, rows, ['true'] + labels)]


def _write_alignment_json(alignment: TrendAlignment, path: Path) -> List[Path]:
    return [asset_io.write_json(path, alignment.to_json())]


def _write_distribution_json(distribution: TopicDistribution, path: Path) -> List[Path]:
    return [asset_io.write_json(path, distribution.to_json())]


def _write_bursts_jsonl(bursts, path: Path) -> List[Path]:
    return [save_bursts(bursts, path)]


def register_report_transforms():
    """Register the (kind, format) writers for every exported artifact."""
    define_transform('trends', 'json', _write_trends_json, "Trends document")
    define_transform('trends', 'csv', _write_trend_series, "Per-trend hourly series")
    define_transform('graph', 'json', _write_graph_json, "Trend graph nodes, edges and arcs")
    define_transform('graph', 'gexf', _write_graph_gexf, "Trend graph for network viewers")
    define_transform('keywords', 'json', _write_keywords_json, "Word-cloud weights per cluster")
    define_transform('lda', 'json', _write_lda_json, "LDA topics and cluster mixtures")
    define_transform('metrics', 'csv', _write_metrics_csv, "Precision/recall/F1/support table")
    define_transform('confusion', 'csv', _write_confusion_csv, "Confusion matrix")
    define_transform('alignment', 'json', _write_alignment_json, "Cross-language trend groups")
    define_transform('distribution', 'json', _write_distribution_json, "Topic counts and shares")
    define_transform('bursts', 'jsonl', _write_bursts_jsonl, "Burst profiles")


# Initialize on import
register_report_transforms()


def export(kind: str, artifact: Any, fmt: str, path: Path, **options: Any) -> List[Path]:
    """Write ``artifact`` of ``kind`` in ``fmt``; raises ``UnsupportedFormat``."""
    return apply_transform(kind, fmt, artifact, Path(path), **options)
