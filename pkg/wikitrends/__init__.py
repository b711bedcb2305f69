"""
Wikitrends - Trending topics from Wikipedia pageviews and hyperlinks

Domain layer built on wikitrends_core:
- ingest     pageview dumps, view matrices, edges, summaries
- burst      rolling z-score burst detection
- graph      correlation-weighted trend graph, Louvain, PageRank
- text       tokenizing, TF-IDF keywords, LDA
- label      rule labels and the bag-of-words classifier
- report     trends, distributions, alignment, exports
- config     YAML pipeline configuration
- pipeline   per-language stages and the run manifest
- synthetic  planted-trend fixtures
"""

from .burst import BurstConfig, BurstProfile, detect_bursts, trending_pages
from .config import PipelineConfig, derive_seed, load_config, parse_config
from .graph import (
    GraphConfig, Partition, TrendGraph, build_trend_graph, central_page, edge_weight, louvain, modularity,
    pagerank, partition_ari,
)
from .ingest import EdgeList, PageIndex, SummaryStore, ViewMatrix, build_view_matrix, parse_pageview_line
from .label import (
    LABELS, Classifier, Metrics, evaluate, label_clusters, make_classifier, predict, rule_label, train_classifier,
)
from .pipeline import run_language_stages, run_pipeline
from .report import Trend, align_trends, assemble_trends, export, topic_distribution
from .synthetic import SyntheticSpec, generate_synthetic, write_fixture
from .text import LangConfig, lda_fit, lda_top_words, tfidf_keywords, tokenize

__version__ = "1.0.0"

__all__ = [
    'BurstConfig', 'BurstProfile', 'detect_bursts', 'trending_pages',
    'PipelineConfig', 'derive_seed', 'load_config', 'parse_config',
    'GraphConfig', 'Partition', 'TrendGraph', 'build_trend_graph', 'central_page', 'edge_weight',
    'louvain', 'modularity', 'pagerank', 'partition_ari',
    'EdgeList', 'PageIndex', 'SummaryStore', 'ViewMatrix', 'build_view_matrix', 'parse_pageview_line',
    'LABELS', 'Classifier', 'Metrics', 'evaluate', 'label_clusters', 'make_classifier', 'predict', 'rule_label',
    'train_classifier',
    'run_language_stages', 'run_pipeline',
    'Trend', 'align_trends', 'assemble_trends', 'export', 'topic_distribution',
    'SyntheticSpec', 'generate_synthetic', 'write_fixture',
    'LangConfig', 'lda_fit', 'lda_top_words', 'tfidf_keywords', 'tokenize',
]
