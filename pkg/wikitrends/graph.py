"""
Graph - Correlation-weighted trend graph, communities and centrality
Uses: ingest, burst

Hyperlinks between trending pages are weighted by the clipped Pearson
correlation of the two view series over the union of their burst hours.
The undirected weighted view feeds modularity and Louvain; the retained
arcs keep their direction for PageRank.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from scipy import sparse
from sklearn.metrics import adjusted_rand_score

from wikitrends_core.errors import ConfigError, EmptyCluster, EmptyGraph

from .burst import BurstProfile
from .ingest import EdgeList, PageIndex, ViewMatrix

logger = logging.getLogger(__name__)

MOVE_EPSILON = 1e-12


@dataclass(frozen=True)
class GraphConfig:
    w_min: float = 0.5
    min_overlap_hours: int = 6
    damping: float = 0.85
    tol: float = 1e-9
    max_iter: int = 100
    min_cluster_size: int = 5
    resolution: float = 1.0

    def __post_init__(self):
        problems = []
        if not 0.0 <= self.w_min <= 1.0:
            problems.append("graph.w_min must lie in [0, 1]")
        if not 0.0 < self.damping < 1.0:
            problems.append("graph.damping must lie in (0, 1)")
        if self.tol <= 0:
            problems.append("graph.tol must be > 0")
        if self.max_iter < 1:
            problems.append("graph.max_iter must be >= 1")
        if self.min_overlap_hours < 1:
            problems.append("graph.min_overlap_hours must be >= 1")
        if self.min_cluster_size < 1:
            problems.append("graph.min_cluster_size must be >= 1")
        if self.resolution <= 0:
            problems.append("graph.resolution must be > 0")
        if problems:
            raise ConfigError("; ".join(problems), problems)


# ============================================================================
# TREND GRAPH
# ============================================================================

@dataclass
class TrendGraph:
    """Trending pages joined by correlated hyperlinks.

    ``graph`` holds undirected weights in (0, 1]; ``arcs`` holds the
    hyperlink directions of the same retained pairs.
    """
    graph: nx.Graph
    arcs: nx.DiGraph

    @classmethod
    def empty(cls, nodes: Iterable[int] = ()) -> 'TrendGraph':
        graph, arcs = nx.Graph(), nx.DiGraph()
        nodes = sorted(nodes)
        graph.add_nodes_from(nodes)
        arcs.add_nodes_from(nodes)
        return cls(graph=graph, arcs=arcs)

    def add_edge(self, source: int, target: int, weight: float) -> None:
        self.graph.add_edge(source, target, weight=float(weight))
        self.arcs.add_edge(source, target)

    @property
    def nodes(self) -> List[int]:
        return sorted(self.graph.nodes)

    def __len__(self) -> int:
        return self.graph.number_of_nodes()

    def __contains__(self, page_id: object) -> bool:
        return page_id in self.graph

    def degree(self, page_id: int) -> int:
        return int(self.graph.degree(page_id))

    def weight(self, p: int, q: int) -> float:
        data = self.graph.get_edge_data(p, q)
        return data['weight'] if data else 0.0

    def edges(self) -> List[Tuple[int, int, float]]:
        """Undirected edges as ``(min id, max id, weight)`` in sorted order."""
        return sorted((min(u, v), max(u, v), w) for u, v, w in self.graph.edges(data='weight'))

    def arc_list(self) -> List[Tuple[int, int]]:
        return sorted(self.arcs.edges)

    def total_weight(self) -> float:
        return math.fsum(w for _, _, w in self.edges())


def edge_weight(
    p_series,
    q_series,
    p_burst: BurstProfile,
    q_burst: BurstProfile,
    config: Optional[GraphConfig] = None,
) -> float:
    """Clipped Pearson correlation over the union of both burst-hour sets."""
    config = config or GraphConfig()
    hours = sorted(set(p_burst.burst_hours) | set(q_burst.burst_hours))
    if len(hours) < config.min_overlap_hours:
        return 0.0
    a = np.asarray(p_series, dtype=np.float64)[hours]
    b = np.asarray(q_series, dtype=np.float64)[hours]
    a -= a.mean()
    b -= b.mean()
    saa = float(np.dot(a, a))
    sbb = float(np.dot(b, b))
    if saa == 0.0 or sbb == 0.0:
        return 0.0
    r = float(np.dot(a, b)) / math.sqrt(saa * sbb)
    return min(1.0, max(0.0, r))


def build_trend_graph(
    matrix: ViewMatrix,
    edges: EdgeList,
    bursts: Mapping[int, BurstProfile],
    config: Optional[GraphConfig] = None,
) -> TrendGraph:
    """Keep hyperlinks between trending pages whose weight reaches ``w_min``."""
    config = config or GraphConfig()
    tg = TrendGraph.empty(bursts)
    weights: Dict[Tuple[int, int], float] = {}
    for source, target in edges:
        if source not in bursts or target not in bursts:
            continue
        key = (min(source, target), max(source, target))
        if key not in weights:
            p, q = key
            weights[key] = edge_weight(matrix.row(p), matrix.row(q), bursts[p], bursts[q], config)
        w = weights[key]
        if w > 0.0 and w >= config.w_min:
            tg.add_edge(source, target, w)
    logger.info(
        "%s: trend graph with %d nodes, %d edges (%d candidate pairs)",
        matrix.index.language, len(tg), tg.graph.number_of_edges(), len(weights),
    )
    return tg


# ============================================================================
# PARTITIONS
# ============================================================================

@dataclass
class Partition:
    """Total assignment page id -> dense cluster id.

    Clusters in ``filtered`` are too small to become trends but stay
    assigned. ``levels`` records the modularity after each Louvain level.
    """
    assignment: Dict[int, int]
    filtered: Set[int] = field(default_factory=set)
    levels: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.assignment)

    def __getitem__(self, page_id: int) -> int:
        return self.assignment[page_id]

    def __contains__(self, page_id: object) -> bool:
        return page_id in self.assignment

    def clusters(self) -> Dict[int, List[int]]:
        out: Dict[int, List[int]] = defaultdict(list)
        for page_id in sorted(self.assignment):
            out[self.assignment[page_id]].append(page_id)
        return dict(sorted(out.items()))

    def members(self, cluster_id: int) -> List[int]:
        return sorted(p for p, c in self.assignment.items() if c == cluster_id)

    def cluster_ids(self) -> List[int]:
        return sorted(set(self.assignment.values()))

    def kept_clusters(self) -> List[int]:
        return [c for c in self.cluster_ids() if c not in self.filtered]

    def communities(self) -> List[Set[int]]:
        return [set(m) for m in self.clusters().values()]

    @classmethod
    def from_groups(cls, groups: Sequence[Iterable[int]], min_cluster_size: int = 1) -> 'Partition':
        """Dense ids numbered by each group's smallest member."""
        ordered = sorted((sorted(g) for g in groups if g), key=lambda g: g[0])
        assignment = {p: c for c, group in enumerate(ordered) for p in group}
        filtered = {c for c, group in enumerate(ordered) if len(group) < min_cluster_size}
        return cls(assignment=assignment, filtered=filtered)


def modularity(graph: TrendGraph, partition: Partition, resolution: float = 1.0) -> float:
    """Weighted modularity of ``partition`` over the undirected weights."""
    if len(graph) == 0:
        raise EmptyGraph("modularity of a graph with no nodes")
    m = 0.0
    internal: Dict[int, float] = defaultdict(float)
    half_degree: Dict[int, float] = defaultdict(float)
    for u, v, w in graph.edges():
        cu, cv = partition[u], partition[v]
        m += w
        if cu == cv:
            internal[cu] += w
            half_degree[cu] += w
        else:
            half_degree[cu] += w / 2
            half_degree[cv] += w / 2
    if m == 0.0:
        raise EmptyGraph("modularity of a graph with zero total weight")
    return sum(internal[c] / m - resolution * (half_degree[c] / m) ** 2 for c in sorted(half_degree))


class _Level:
    """One level of local moves over an aggregated graph of ``n`` supernodes."""

    def __init__(self, n: int, links: Dict[Tuple[int, int], float], loops: List[float],
                 resolution: float):
        self.n = n
        self.adj: List[Dict[int, float]] = [dict() for _ in range(n)]
        for (i, j), w in links.items():
            self.adj[i][j] = w
            self.adj[j][i] = w
        self.k = [sum(self.adj[i].values()) + 2 * loops[i] for i in range(n)]
        self.m2 = sum(self.k)
        self.resolution = resolution
        self.community = list(range(n))
        self.moved = False
        if self.m2 > 0:
            self._sweep()

    def _sweep(self) -> None:
        tot = list(self.k)
        while True:
            moved_node = False
            for i in range(self.n):
                ci = self.community[i]
                to_com: Dict[int, float] = defaultdict(float)
                for j, w in self.adj[i].items():
                    to_com[self.community[j]] += w
                tot[ci] -= self.k[i]
                scale = self.resolution * self.k[i] / self.m2
                best_c = ci
                best_gain = to_com.get(ci, 0.0) - tot[ci] * scale
                for c in sorted(to_com):
                    if c == ci:
                        continue
                    gain = to_com[c] - tot[c] * scale
                    if gain - best_gain > MOVE_EPSILON:
                        best_c, best_gain = c, gain
                tot[best_c] += self.k[i]
                if best_c != ci:
                    self.community[i] = best_c
                    moved_node = self.moved = True
            if not moved_node:
                break

    def groups(self) -> List[List[int]]:
        """Supernode groups, ordered by their smallest member."""
        by_com: Dict[int, List[int]] = defaultdict(list)
        for i in range(self.n):
            by_com[self.community[i]].append(i)
        return sorted(by_com.values(), key=lambda g: g[0])


def louvain(graph: TrendGraph, resolution: float = 1.0, min_cluster_size: int = 5) -> Partition:
    """Two-phase Louvain with an ascending-id sweep; fully deterministic."""
    nodes = graph.nodes
    if not nodes:
        raise EmptyGraph("louvain on a graph with no nodes")
    position = {p: i for i, p in enumerate(nodes)}
    links: Dict[Tuple[int, int], float] = {
        (position[u], position[v]): w for u, v, w in graph.edges()
    }
    loops = [0.0] * len(nodes)
    members: List[List[int]] = [[p] for p in nodes]
    levels: List[float] = []

    while True:
        level = _Level(len(members), links, loops, resolution)
        if not level.moved:
            break
        groups = level.groups()
        owner = {i: g for g, group in enumerate(groups) for i in group}
        next_links: Dict[Tuple[int, int], float] = defaultdict(float)
        next_loops = [0.0] * len(groups)
        for i, group in enumerate(groups):
            for node in group:
                next_loops[i] += loops[node]
        for (i, j), w in links.items():
            gi, gj = owner[i], owner[j]
            if gi == gj:
                next_loops[gi] += w
            else:
                next_links[(min(gi, gj), max(gi, gj))] += w
        members = [sorted(p for node in group for p in members[node]) for group in groups]
        links, loops = dict(next_links), next_loops
        levels.append(modularity(graph, Partition.from_groups(members), resolution))
        logger.debug("louvain level %d: %d communities, Q=%.6f", len(levels), len(members), levels[-1])

    partition = Partition.from_groups(members, min_cluster_size)
    partition.levels = levels
    logger.info(
        "louvain: %d communities, %d kept (min size %d)",
        len(partition.cluster_ids()), len(partition.kept_clusters()), min_cluster_size,
    )
    return partition


def partition_ari(partition: Partition, planted: Mapping[int, int]) -> float:
    """Adjusted Rand index over every page either side knows about.

    A page missing from one side counts as a singleton on that side.
    """
    pages = sorted(set(partition.assignment) | set(planted))
    found = [partition.assignment.get(p, -1 - p) for p in pages]
    truth = [planted.get(p, -1 - p) for p in pages]
    return float(adjusted_rand_score(truth, found))


# ============================================================================
# CENTRALITY
# ============================================================================

def power_iteration(
    n: int,
    arcs: Sequence[Tuple[int, int]],
    damping: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 100,
) -> Tuple[np.ndarray, int]:
    """PageRank over nodes ``0..n-1``; returns scores and iterations used.

    Dangling mass and teleport are spread uniformly; iteration stops when
    the L1 change drops below ``tol`` or after ``max_iter`` steps.
    """
    if n == 0:
        raise EmptyCluster("pagerank of an empty node set")
    out_degree = np.zeros(n, dtype=np.float64)
    for source, _ in arcs:
        out_degree[source] += 1
    if arcs:
        src = np.array([s for s, _ in arcs], dtype=np.int64)
        dst = np.array([t for _, t in arcs], dtype=np.int64)
        transition = sparse.csr_matrix((1.0 / out_degree[src], (dst, src)), shape=(n, n))
    else:
        transition = sparse.csr_matrix((n, n), dtype=np.float64)
    dangling = out_degree == 0

    scores = np.full(n, 1.0 / n)
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        spread = (damping * scores[dangling].sum() + (1.0 - damping)) / n
        updated = damping * (transition @ scores) + spread
        change = float(np.abs(updated - scores).sum())
        scores = updated
        if change < tol:
            break
    return scores / scores.sum(), iterations


def pagerank(graph: TrendGraph, cluster: Iterable[int], config: Optional[GraphConfig] = None) -> Dict[int, float]:
    """PageRank of the retained arcs inside one cluster."""
    config = config or GraphConfig()
    nodes = sorted(cluster)
    position = {p: i for i, p in enumerate(nodes)}
    arcs = [
        (position[s], position[t]) for s, t in graph.arc_list() if s in position and t in position
    ]
    scores, iterations = power_iteration(len(nodes), arcs, config.damping, config.tol, config.max_iter)
    if iterations >= config.max_iter:
        logger.debug("pagerank hit max_iter=%d on a cluster of %d pages", config.max_iter, len(nodes))
    return {p: float(scores[position[p]]) for p in nodes}


def central_page(cluster: Iterable[int], scores: Mapping[int, float]) -> int:
    """Highest-scoring page; ties go to the smallest id."""
    members = list(cluster)
    if not members:
        raise EmptyCluster("central page of an empty cluster")
    return min(members, key=lambda p: (-scores[p], p))


def cluster_pageranks(
    graph: TrendGraph, partition: Partition, config: Optional[GraphConfig] = None
) -> Dict[int, float]:
    """PageRank of every page within its own cluster."""
    scores: Dict[int, float] = {}
    for members in partition.clusters().values():
        scores.update(pagerank(graph, members, config))
    return scores


# ============================================================================
# SERIALIZATION
# ============================================================================

def graph_to_json(
    graph: TrendGraph,
    index: PageIndex,
    partition: Optional[Partition] = None,
    scores: Optional[Mapping[int, float]] = None,
) -> Dict[str, Any]:
    """``{nodes, edges, arcs}`` document with cluster and PageRank attributes."""
    nodes = []
    for p in graph.nodes:
        node: Dict[str, Any] = {'id': p, 'title': index.title_of(p), 'degree': graph.degree(p)}
        if partition is not None:
            node['cluster'] = partition[p]
            node['filtered'] = partition[p] in partition.filtered
        if scores is not None:
            node['pagerank'] = round(scores[p], 12)
        nodes.append(node)
    doc: Dict[str, Any] = {
        'nodes': nodes,
        'edges': [{'source': u, 'target': v, 'weight': round(w, 6)} for u, v, w in graph.edges()],
        'arcs': [{'source': s, 'target': t} for s, t in graph.arc_list()],
    }
    if partition is not None:
        doc['modularity_levels'] = [round(q, 6) for q in partition.levels]
    return doc


def graph_from_json(doc: Mapping[str, Any]) -> Tuple[TrendGraph, Optional[Partition], Optional[Dict[int, float]]]:
    """Inverse of ``graph_to_json`` (weights come back rounded to 6 decimals)."""
    graph = TrendGraph.empty(int(n['id']) for n in doc['nodes'])
    weights = {(int(e['source']), int(e['target'])): float(e['weight']) for e in doc['edges']}
    for (u, v), w in weights.items():
        graph.graph.add_edge(u, v, weight=w)
    for arc in doc.get('arcs', []):
        graph.arcs.add_edge(int(arc['source']), int(arc['target']))

    partition = None
    if doc['nodes'] and 'cluster' in doc['nodes'][0]:
        partition = Partition(
            assignment={int(n['id']): int(n['cluster']) for n in doc['nodes']},
            filtered={int(n['cluster']) for n in doc['nodes'] if n.get('filtered')},
            levels=[float(q) for q in doc.get('modularity_levels', [])],
        )
    scores = None
    if doc['nodes'] and 'pagerank' in doc['nodes'][0]:
        scores = {int(n['id']): float(n['pagerank']) for n in doc['nodes']}
    return graph, partition, scores
