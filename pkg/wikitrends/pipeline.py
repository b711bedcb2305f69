"""
Pipeline - Per-language stages, cross-language comparison and the run manifest
Uses: core.stage_runner, core.job_identity, core.asset_io, every domain module

Stages communicate only through files under ``<output>/<language>/``, so
running the stage subcommands one after another produces exactly what
``run`` produces.

    ingest    views.wkts, views.index.tsv, edges.tsv
    detect    bursts.jsonl
    cluster   graph.json
    keywords  keywords.json, lda.json
    label     labels.json, metrics.csv, confusion.csv
    trends    trends.json, series/*.csv, graph.gexf, distribution.json
    compare   alignment.json, manifest.json
"""

import glob
import logging
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from wikitrends_core import asset_io, stage_runner
from wikitrends_core.errors import EmptyTestSet, NoTrends

from .burst import load_bursts, trending_pages
from .config import LanguageSource, PipelineConfig, derive_seed
from .graph import Partition, TrendGraph, build_trend_graph, cluster_pageranks, graph_from_json, louvain
from .ingest import (
    PageIndex, ViewMatrix, build_view_matrix_from_files, filter_pages, index_from_edge_file, load_edges,
    load_summaries, save_edges,
)
from .label import evaluate, label_clusters, load_rules, predict, rule_label, stratified_split, train_classifier
from .report import (
    GraphExport, TrendReport, align_trends, assemble_trends, export, iso_hour, load_trends, run_stamp,
    topic_distribution,
)
from .text import (
    LangConfig, build_cluster_docs, keywords_from_json, lda_fit, load_stopwords, tfidf_keywords, tokenize,
)

logger = logging.getLogger(__name__)

LANGUAGE_STAGES = ('ingest', 'detect', 'cluster', 'keywords', 'label', 'trends')
STAGES = LANGUAGE_STAGES + ('compare',)
MANIFEST = 'manifest.json'


class LanguagePaths:
    """File layout of one language's outputs."""

    def __init__(self, root: Path):
        self.root = root

    views = property(lambda self: self.root / 'views.wkts')
    index = property(lambda self: self.root / 'views.index.tsv')
    edges = property(lambda self: self.root / 'edges.tsv')
    bursts = property(lambda self: self.root / 'bursts.jsonl')
    graph = property(lambda self: self.root / 'graph.json')
    gexf = property(lambda self: self.root / 'graph.gexf')
    keywords = property(lambda self: self.root / 'keywords.json')
    lda = property(lambda self: self.root / 'lda.json')
    labels = property(lambda self: self.root / 'labels.json')
    metrics = property(lambda self: self.root / 'metrics.csv')
    confusion = property(lambda self: self.root / 'confusion.csv')
    trends = property(lambda self: self.root / 'trends.json')
    series = property(lambda self: self.root / 'series')
    distribution = property(lambda self: self.root / 'distribution.json')


def _context(context: Dict[str, Any]):
    config: PipelineConfig = context['config']
    source: LanguageSource = context['language']
    return config, source, LanguagePaths(config.language_dir(source.code))


def _load_views(paths: LanguagePaths, code: str) -> ViewMatrix:
    return ViewMatrix.load(paths.views, code, paths.index)


def _load_graph(paths: LanguagePaths):
    graph, partition, scores = graph_from_json(asset_io.read_json(paths.graph))
    return graph, partition or Partition({}), scores or {}


def _lang_config(config: PipelineConfig, source: LanguageSource) -> LangConfig:
    return LangConfig(source.code, load_stopwords(source.stopwords), config.classifier.min_token_length)


def restrict_hours(matrix: ViewMatrix, start_hour: int, end_hour: int) -> ViewMatrix:
    """Cut or zero-pad a cached matrix to ``[start_hour, end_hour)``."""
    if matrix.start_hour == start_hour and matrix.end_hour == end_hour:
        return matrix
    counts = np.zeros((matrix.n_pages, end_hour - start_hour), dtype=np.int64)
    lo, hi = max(start_hour, matrix.start_hour), min(end_hour, matrix.end_hour)
    if lo < hi:
        counts[:, lo - start_hour:hi - start_hour] = matrix.counts[:, lo - matrix.start_hour:hi - matrix.start_hour]
    return ViewMatrix(index=matrix.index, start_hour=start_hour, counts=counts)


# ============================================================================
# LANGUAGE STAGES
# ============================================================================

def stage_ingest(context: Dict[str, Any]) -> Dict[str, int]:
    config, source, paths = _context(context)
    if source.matrix:
        matrix = restrict_hours(ViewMatrix.load(source.matrix, source.code, source.index),
                                config.start_hour, config.end_hour)
    else:
        if source.index:
            index = PageIndex.load(source.index, source.code)
        else:
            index = index_from_edge_file(source.edges, source.code)
        files = sorted(glob.glob(source.pageviews))
        matrix = build_view_matrix_from_files(files, index, config.start_hour, config.end_hour, config.workers)
    edges = load_edges(source.edges, matrix.index)
    matrix, edges = filter_pages(matrix, edges, config.min_total_views, config.min_degree)
    matrix.save(paths.views)
    save_edges(edges, matrix.index, paths.edges)
    return {'pages': matrix.n_pages, 'hours': matrix.n_hours, 'edges': len(edges)}


def stage_detect(context: Dict[str, Any]) -> int:
    config, source, paths = _context(context)
    bursts = trending_pages(_load_views(paths, source.code), config.burst)
    export('bursts', bursts, 'jsonl', paths.bursts)
    return len(bursts)


def stage_cluster(context: Dict[str, Any]) -> int:
    config, source, paths = _context(context)
    matrix = _load_views(paths, source.code)
    edges = load_edges(paths.edges, matrix.index)
    graph = build_trend_graph(matrix, edges, load_bursts(paths.bursts), config.graph)
    if len(graph) == 0:
        logger.warning("%s: no trending pages, nothing to cluster", source.code)
        partition, scores = Partition({}), {}
    else:
        partition = louvain(graph, config.graph.resolution, config.graph.min_cluster_size)
        scores = cluster_pageranks(graph, partition, config.graph)
    export('graph', GraphExport(graph, matrix.index, partition, scores), 'json', paths.graph)
    return len(partition.kept_clusters())


def stage_keywords(context: Dict[str, Any]) -> int:
    config, source, paths = _context(context)
    index = PageIndex.load(paths.index, source.code)
    graph, partition, _ = _load_graph(paths)
    docs = build_cluster_docs(partition, load_summaries(source.summaries, index), graph,
                              _lang_config(config, source))
    keywords = tfidf_keywords(docs, config.keywords) if docs else {}
    export('keywords', keywords, 'json', paths.keywords)

    lda = config.lda
    if lda.enabled:
        if any(doc.term_counts for doc in docs):
            model = lda_fit(docs, lda.topics, lda.alpha, lda.beta, lda.iterations,
                            seed=derive_seed(config.seed, 'lda', source.code))
            export('lda', model, 'json', paths.lda, top_k=lda.top_words)
        else:
            logger.warning("%s: no cluster text, LDA skipped", source.code)
    return len(keywords)


def stage_label(context: Dict[str, Any]) -> int:
    config, source, paths = _context(context)
    index = PageIndex.load(paths.index, source.code)
    graph, partition, _ = _load_graph(paths)
    summaries = load_summaries(source.summaries, index)
    rules = load_rules(source.rules)
    lang_config = _lang_config(config, source)
    settings = config.classifier

    members = {p for p, c in partition.assignment.items() if c not in partition.filtered}
    rule_labels: Dict[int, str] = {}
    for page_id in sorted(members | {p for p, _ in summaries.items()}):
        label = rule_label(index.title_of(page_id), summaries.get(page_id), rules)
        if label:
            rule_labels[page_id] = label
    # pages matched on their title alone carry no text to train on
    examples = [
        (tokens, label) for tokens, label in
        ((tokenize(summaries.get(p), lang_config), label) for p, label in sorted(rule_labels.items()))
        if tokens
    ]
    logger.info("%s: %d rule-labeled pages, %d with text", source.code, len(rule_labels), len(examples))

    model = None
    if examples:
        train, test = stratified_split(examples, settings.test_fraction,
                                       seed=derive_seed(config.seed, 'split', source.code))
        try:
            metrics = evaluate(train_classifier(train, settings.smoothing, kind=settings.kind), test)
            export('metrics', metrics, 'csv', paths.metrics)
            export('confusion', metrics, 'csv', paths.confusion)
        except EmptyTestSet as e:
            logger.warning("%s: evaluation skipped: %s", source.code, e)
        model = train_classifier(examples, settings.smoothing, kind=settings.kind)
    else:
        logger.warning("%s: no rule-labeled page has text; the classifier is not trained", source.code)

    page_labels: Dict[int, str] = {}
    sources: Dict[int, str] = {}
    for page_id in sorted(members):
        if page_id in rule_labels:
            page_labels[page_id], sources[page_id] = rule_labels[page_id], 'rule'
        elif model is not None and summaries.get(page_id):
            page_labels[page_id], _ = predict(model, tokenize(summaries.get(page_id), lang_config))
            sources[page_id] = settings.kind

    docs = build_cluster_docs(partition, summaries, graph, lang_config)
    cluster_labels = label_clusters(partition, page_labels, docs, model)
    asset_io.write_json(paths.labels, {
        'classifier': settings.kind if model is not None else None,
        'clusters': {str(c): label for c, label in sorted(cluster_labels.items())},
        'pages': [
            {'id': p, 'title': index.title_of(p), 'label': page_labels[p], 'source': sources[p]}
            for p in sorted(page_labels)
        ],
    })
    return len(cluster_labels)


def stage_trends(context: Dict[str, Any]) -> int:
    config, source, paths = _context(context)
    matrix = _load_views(paths, source.code)
    graph, partition, scores = _load_graph(paths)
    keywords = keywords_from_json(asset_io.read_json(paths.keywords)['clusters'])
    labels = {int(c): label for c, label in asset_io.read_json(paths.labels)['clusters'].items()}

    trends = assemble_trends(partition, matrix, scores, keywords, labels,
                             stamp=run_stamp(config.end_hour), top_n=config.top_n)
    report = TrendReport(language=source.code, generated_at=iso_hour(config.end_hour),
                         start_hour=matrix.start_hour, index=matrix.index, trends=trends)
    export('trends', report, 'json', paths.trends)
    if paths.series.exists():
        shutil.rmtree(paths.series)
    export('trends', report, 'csv', paths.series)
    generated_on = iso_hour(config.end_hour)[:10]
    export('graph', GraphExport(graph, matrix.index, partition, scores, labels, generated_on), 'gexf', paths.gexf)
    try:
        distribution = topic_distribution(trends).to_json()
    except NoTrends:
        logger.warning("%s: no trends found", source.code)
        distribution = {'counts': {}, 'shares': {}, 'page_counts': {}}
    asset_io.write_json(paths.distribution, distribution)
    return len(trends)


def setup_language_plan():
    plan = stage_runner.stage_plan("language_pipeline", "Per-language trend detection")
    plan.add('ingest', stage_ingest, "Build the view matrix and edge list")
    plan.add('detect', stage_detect, "Find trending pages")
    plan.add('cluster', stage_cluster, "Trend graph, communities, PageRank")
    plan.add('keywords', stage_keywords, "TF-IDF keywords and LDA topics")
    plan.add('label', stage_label, "Rule and classifier labels")
    plan.add('trends', stage_trends, "Assemble and export trends")


# Initialize on import
setup_language_plan()


# ============================================================================
# RUNNERS
# ============================================================================

def run_language_stages(
    config: PipelineConfig,
    stages: Sequence[str] = LANGUAGE_STAGES,
    languages: Optional[Iterable[str]] = None,
) -> Dict[str, Dict[str, Any]]:
    """Run ``stages`` for each language; languages run concurrently.

    The first failure in configuration order is re-raised as ``StageError``.
    """
    codes = list(languages) if languages is not None else config.codes()

    def one(code: str) -> Dict[str, Any]:
        context = {'config': config, 'language': config.language(code)}
        stage_runner.run_plan("language_pipeline", context, scope=code, only=stages)
        return context['results']

    with ThreadPoolExecutor(max_workers=max(1, min(config.workers, len(codes) or 1))) as pool:
        futures = [(code, pool.submit(one, code)) for code in codes]
        return {code: future.result() for code, future in futures}


def compare_languages(config: PipelineConfig) -> List[Path]:
    """Align trends across languages and write ``alignment.json``."""
    per_language = {}
    for code in config.codes():
        paths = LanguagePaths(config.language_dir(code))
        index = PageIndex.load(paths.index, code)
        per_language[code] = load_trends(paths.trends, index).trends
    alignment = align_trends(per_language, config.delta_hours)
    return export('alignment', alignment, 'json', config.output_dir / 'alignment.json')


def write_manifest(config: PipelineConfig) -> Dict[str, Any]:
    """List every output file (relative path, sha256, size); written last."""
    root = config.output_dir
    files = sorted(
        p for p in root.rglob('*')
        if p.is_file() and p.name != MANIFEST and not p.name.startswith('.')
    )
    manifest = {
        'generated_at': iso_hour(config.end_hour),
        'languages': config.codes(),
        'seed': config.seed,
        'files': [
            {'path': p.relative_to(root).as_posix(), 'sha256': asset_io.sha256_file(p), 'bytes': p.stat().st_size}
            for p in files
        ],
    }
    asset_io.write_json(root / MANIFEST, manifest)
    return manifest


@dataclass
class RunResult:
    manifest: Dict[str, Any]
    manifest_path: Path
    results: Dict[str, Dict[str, Any]]


def run_compare(config: PipelineConfig) -> RunResult:
    compare_languages(config)
    manifest = write_manifest(config)
    return RunResult(manifest=manifest, manifest_path=config.output_dir / MANIFEST, results={})


def run_pipeline(config: PipelineConfig) -> RunResult:
    """Every language stage, then alignment, then the manifest."""
    logger.info("running %s into %s", ", ".join(config.codes()), config.output_dir)
    results = run_language_stages(config)
    result = run_compare(config)
    result.results = results
    return result
