"""
Text - Tokenizing summaries and describing clusters
Uses: ingest, graph

A cluster document is the bag of words of every member summary, each
page's counts multiplied by its degree in the trend graph (floored at 1).
Clusters are described by TF-IDF keywords and, optionally, by a collapsed
Gibbs LDA model over the same documents.
"""

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from wikitrends_core import asset_io
from wikitrends_core.errors import BadTopicIndex, ConfigError, EmptyCorpus, InvalidK

from .graph import Partition, TrendGraph
from .ingest import SummaryStore

logger = logging.getLogger(__name__)

_SPLIT_RE = re.compile(r"[\W_]+")


@dataclass(frozen=True)
class LangConfig:
    language: str = "en"
    stopwords: FrozenSet[str] = frozenset()
    min_length: int = 2

    def __post_init__(self):
        object.__setattr__(self, 'stopwords', frozenset(w.lower() for w in self.stopwords))


def load_stopwords(path: Union[str, Path]) -> FrozenSet[str]:
    """One word per line; blank lines and ``#`` comments ignored."""
    words = set()
    for line in asset_io.iter_lines(path):
        word = line.strip().lower()
        if word and not word.startswith('#'):
            words.add(word)
    return frozenset(words)


def tokenize(text: str, lang_config: Optional[LangConfig] = None) -> List[str]:
    """Lowercase, split on non-alphanumerics, drop short, numeric and stop tokens."""
    cfg = lang_config or LangConfig()
    return [
        token for token in _SPLIT_RE.split(text.lower())
        if len(token) >= cfg.min_length and not token.isnumeric() and token not in cfg.stopwords
    ]


# ============================================================================
# CLUSTER DOCUMENTS
# ============================================================================

@dataclass
class ClusterDoc:
    cluster_id: int
    term_counts: Dict[str, int] = field(default_factory=dict)
    source_pages: List[Tuple[int, int]] = field(default_factory=list)

    def tokens(self) -> List[str]:
        """Token instances in sorted token order, each repeated by its count."""
        return [t for t in sorted(self.term_counts) for _ in range(self.term_counts[t])]

    def __len__(self) -> int:
        return sum(self.term_counts.values())


def build_cluster_docs(
    partition: Partition,
    summaries: SummaryStore,
    graph: TrendGraph,
    lang_config: Optional[LangConfig] = None,
) -> List[ClusterDoc]:
    """One degree-weighted document per kept cluster, in cluster id order."""
    docs = []
    missing = 0
    for cluster_id in partition.kept_clusters():
        counts: Counter = Counter()
        sources = []
        for page_id in partition.members(cluster_id):
            degree = graph.degree(page_id) if page_id in graph else 0
            sources.append((page_id, degree))
            text = summaries.get(page_id)
            if not text:
                missing += 1
                logger.debug("page %d has no summary", page_id)
                continue
            weight = max(degree, 1)
            for token, n in Counter(tokenize(text, lang_config)).items():
                counts[token] += weight * n
        docs.append(ClusterDoc(cluster_id=cluster_id, term_counts=dict(sorted(counts.items())),
                               source_pages=sources))
    if missing:
        logger.info("%d cluster members without a summary", missing)
    return docs


# ============================================================================
# TF-IDF
# ============================================================================

@dataclass(frozen=True)
class KeywordConfig:
    k: int = 20

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("keywords.k must be >= 1", ["keywords.k must be >= 1"])


Keywords = Dict[int, List[Tuple[str, float]]]


def tfidf_keywords(docs: Sequence[ClusterDoc], cfg: Optional[KeywordConfig] = None) -> Keywords:
    """Top-k positive-score tokens per cluster, ties in token order.

    idf is ``ln(N / df)`` with no smoothing, so a token found in every
    cluster document scores 0 and is never listed.
    """
    cfg = cfg or KeywordConfig()
    if not docs:
        raise EmptyCorpus("no cluster documents to score")
    df: Counter = Counter()
    for doc in docs:
        df.update(doc.term_counts.keys())
    n_docs = len(docs)
    idf = {token: math.log(n_docs / count) for token, count in df.items()}

    keywords: Keywords = {}
    for doc in docs:
        scored = [(token, tf * idf[token]) for token, tf in doc.term_counts.items() if idf[token] > 0]
        scored.sort(key=lambda item: (-item[1], item[0]))
        keywords[doc.cluster_id] = scored[:cfg.k]
    return keywords


def keywords_to_json(keywords: Keywords) -> List[Dict[str, Any]]:
    return [
        {'cluster_id': cid, 'keywords': [{'token': t, 'score': round(s, 6)} for t, s in ranked]}
        for cid, ranked in sorted(keywords.items())
    ]


def keywords_from_json(rows: Iterable[Dict[str, Any]]) -> Keywords:
    return {
        int(row['cluster_id']): [(kw['token'], float(kw['score'])) for kw in row['keywords']]
        for row in rows
    }


# ============================================================================
# LDA
# ============================================================================

@dataclass
class LdaModel:
    """Collapsed Gibbs LDA fitted on cluster documents."""
    K: int
    alpha: float
    beta: float
    iterations: int
    seed: int
    vocabulary: List[str]
    doc_ids: List[int]
    topic_word_counts: np.ndarray
    doc_topic_counts: np.ndarray
    phi: np.ndarray
    theta: np.ndarray

    def top_words(self, topic: int, k: int) -> List[str]:
        return lda_top_words(self, topic, k)

    def dominant_topics(self) -> Dict[int, int]:
        return {cid: int(np.argmax(self.theta[d])) for d, cid in enumerate(self.doc_ids)}

    def to_json(self, top_k: int = 20) -> Dict[str, Any]:
        return {
            'K': self.K,
            'alpha': round(self.alpha, 6),
            'beta': round(self.beta, 6),
            'iterations': self.iterations,
            'topics': [
                {
                    'topic': z,
                    'words': [
                        {'token': t, 'weight': round(float(self.phi[z, self.vocabulary.index(t)]), 6)}
                        for t in lda_top_words(self, z, top_k)
                    ],
                }
                for z in range(self.K)
            ],
            'documents': [
                {
                    'cluster_id': cid,
                    'dominant_topic': int(np.argmax(self.theta[d])),
                    'mixture': [round(float(x), 6) for x in self.theta[d]],
                }
                for d, cid in enumerate(self.doc_ids)
            ],
        }


SweepCallback = Callable[[int, np.ndarray, np.ndarray], None]


def lda_fit(
    docs: Sequence[ClusterDoc],
    K: int,
    alpha: Optional[float] = None,
    beta: float = 0.01,
    iterations: int = 1000,
    seed: int = 0,
    on_sweep: Optional[SweepCallback] = None,
) -> LdaModel:
    """Collapsed Gibbs sampling over the expanded token instances.

    ``alpha`` defaults to ``50 / K``. ``on_sweep(iteration, topic_word,
    doc_topic)`` is called after every sweep.
    """
    if K < 1:
        raise InvalidK(f"number of topics must be >= 1, got {K}")
    alpha = 50.0 / K if alpha is None else alpha
    vocabulary = sorted({t for doc in docs for t in doc.term_counts})
    if not vocabulary:
        raise EmptyCorpus("LDA needs at least one token")
    word_id = {t: i for i, t in enumerate(vocabulary)}
    V, D = len(vocabulary), len(docs)

    words_list, docs_list = [], []
    for d, doc in enumerate(docs):
        for token in doc.tokens():
            words_list.append(word_id[token])
            docs_list.append(d)
    words = np.array(words_list, dtype=np.int64)
    doc_of = np.array(docs_list, dtype=np.int64)
    n_tokens = len(words)

    rng = np.random.default_rng(seed)
    topics = rng.integers(K, size=n_tokens)
    nwt = np.zeros((K, V), dtype=np.int64)
    ndt = np.zeros((D, K), dtype=np.int64)
    np.add.at(nwt, (topics, words), 1)
    np.add.at(ndt, (doc_of, topics), 1)
    nt = nwt.sum(axis=1)
    v_beta = V * beta

    for sweep in range(iterations):
        draws = rng.random(n_tokens)
        for i in range(n_tokens):
            w, d, z = words[i], doc_of[i], topics[i]
            nwt[z, w] -= 1
            ndt[d, z] -= 1
            nt[z] -= 1
            weights = (nwt[:, w] + beta) / (nt + v_beta) * (ndt[d] + alpha)
            cumulative = np.cumsum(weights)
            z = min(int(np.searchsorted(cumulative, draws[i] * cumulative[-1], side='right')), K - 1)
            topics[i] = z
            nwt[z, w] += 1
            ndt[d, z] += 1
            nt[z] += 1
        if nwt.sum() != n_tokens or ndt.sum() != n_tokens or not np.array_equal(nt, nwt.sum(axis=1)):
            raise RuntimeError(f"Gibbs bookkeeping inconsistent after sweep {sweep}")
        if on_sweep is not None:
            on_sweep(sweep, nwt, ndt)

    phi = (nwt + beta) / (nwt.sum(axis=1, keepdims=True) + v_beta)
    theta = (ndt + alpha) / (ndt.sum(axis=1, keepdims=True) + K * alpha)
    logger.info("LDA: K=%d over %d docs, %d tokens, %d sweeps", K, D, n_tokens, iterations)
    return LdaModel(
        K=K, alpha=alpha, beta=beta, iterations=iterations, seed=seed,
        vocabulary=vocabulary, doc_ids=[doc.cluster_id for doc in docs],
        topic_word_counts=nwt, doc_topic_counts=ndt, phi=phi, theta=theta,
    )


def lda_top_words(model: LdaModel, topic: int, k: int) -> List[str]:
    """Top-k tokens of a topic by probability, ties in token order."""
    if not 0 <= topic < model.K:
        raise BadTopicIndex(f"topic {topic} outside 0..{model.K - 1}")
    row = model.phi[topic]
    order = sorted(range(len(model.vocabulary)), key=lambda j: (-row[j], model.vocabulary[j]))
    return [model.vocabulary[j] for j in order[:k]]
