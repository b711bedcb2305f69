"""
Ingest - Pageview dumps, hyperlink edge lists and article summaries
Uses: core.asset_io

Pageview lines follow the public hourly dump layout
``project title views bytes``; the hour comes from the file name
(``pageviews-YYYYMMDD-HH0000.gz``).
"""

import logging
import re
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union
from urllib.parse import quote

import numpy as np
import requests

from wikitrends_core import asset_io
from wikitrends_core.errors import (
    CacheFormatError, EmptyRange, MalformedLine, NotFound, ParseError, RateLimited, TransportError,
)

logger = logging.getLogger(__name__)

CACHE_MAGIC = b"WKTS1"
_CACHE_HEADER = struct.Struct("<IIq")
_U32_MAX = np.iinfo(np.uint32).max

FILENAME_HOUR_RE = re.compile(r"(\d{8})-(\d{2})")
_VIEWS_RE = re.compile(r"[0-9]+")

USER_AGENT = "wikitrends/1.0 (trend detection research)"
DEFAULT_ENDPOINT = "https://{lang}.wikipedia.org/api/rest_v1"


# ============================================================================
# PAGE INDEX
# ============================================================================

@dataclass
class PageIndex:
    """Bijection between page titles and dense ids 0..N-1."""
    titles: List[str]
    language: str = "en"
    _ids: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.titles = list(self.titles)
        self._ids = {}
        for i, title in enumerate(self.titles):
            if title in self._ids:
                raise ValueError(f"duplicate title in page index: {title!r}")
            if '\t' in title or '\n' in title:
                raise ValueError(f"title contains a tab or newline: {title!r}")
            self._ids[title] = i

    @classmethod
    def from_titles(cls, titles: Iterable[str], language: str = "en") -> 'PageIndex':
        """Build an index keeping the first occurrence of each title."""
        seen: Dict[str, None] = {}
        for t in titles:
            seen.setdefault(t, None)
        return cls(list(seen), language)

    def __len__(self) -> int:
        return len(self.titles)

    def __contains__(self, title: object) -> bool:
        return title in self._ids

    def id_of(self, title: str) -> Optional[int]:
        return self._ids.get(title)

    def title_of(self, page_id: int) -> str:
        return self.titles[page_id]

    def save(self, path: Union[str, Path]) -> Path:
        return asset_io.write_file(path, ''.join(f"{i}\t{t}\n" for i, t in enumerate(self.titles)))

    @classmethod
    def load(cls, path: Union[str, Path], language: str = "en") -> 'PageIndex':
        titles = []
        for lineno, line in enumerate(asset_io.iter_lines(path), start=1):
            if not line:
                continue
            page_id, sep, title = line.partition('\t')
            if not sep or not page_id.isdigit():
                raise ParseError(f"{path}:{lineno}: expected 'id<TAB>title'")
            if int(page_id) != len(titles):
                raise ParseError(f"{path}:{lineno}: ids must be contiguous from 0, got {page_id}")
            titles.append(title)
        return cls(titles, language)


# ============================================================================
# PAGEVIEW RECORDS
# ============================================================================

@dataclass(frozen=True)
class ViewRecord:
    """One line of an hourly pageview dump."""
    project: str
    title: str
    views: int
    hour: Optional[int] = None


def parse_pageview_line(line: str, hour: Optional[int] = None) -> ViewRecord:
    """Parse ``project title views bytes``; the bytes field is discarded."""
    fields = line.rstrip('\r\n').split(' ')
    if len(fields) != 4:
        raise MalformedLine(f"expected 4 space-separated fields, got {len(fields)}: {line!r}")
    project, title, views, _response_bytes = fields
    if not _VIEWS_RE.fullmatch(views):
        raise MalformedLine(f"views is not a non-negative integer: {views!r}")
    return ViewRecord(project=project, title=title, views=int(views), hour=hour)


def format_pageview_line(record: ViewRecord, response_bytes: int = 0) -> str:
    return f"{record.project} {record.title} {record.views} {response_bytes}"


def epoch_hour(value: Union[int, str, datetime]) -> int:
    """Hours since the Unix epoch for an int, ``YYYY-MM-DDTHH`` string or datetime."""
    if isinstance(value, bool):
        raise ValueError("hour must be an integer, string or datetime")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            value = datetime.strptime(value, "%Y-%m-%dT%H").replace(tzinfo=timezone.utc)
        except ValueError as e:
            raise ValueError(f"expected YYYY-MM-DDTHH, got {value!r}") from e
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return int(value.timestamp()) // 3600


def hour_to_datetime(hour: int) -> datetime:
    return datetime.fromtimestamp(hour * 3600, tz=timezone.utc)


def hour_from_filename(path: Union[str, Path]) -> int:
    """Epoch hour encoded as ``YYYYMMDD-HH`` in a dump file name."""
    match = FILENAME_HOUR_RE.search(Path(path).name)
    if not match:
        raise ParseError(f"no YYYYMMDD-HH stamp in file name: {path}")
    stamp = datetime.strptime(match.group(1) + match.group(2), "%Y%m%d%H").replace(tzinfo=timezone.utc)
    return epoch_hour(stamp)


def iter_pageview_file(
    path: Union[str, Path],
    project: Optional[str] = None,
    hour: Optional[int] = None,
) -> Iterator[ViewRecord]:
    """Yield records of one dump file (plain or gzip), skipping malformed lines.

    Only records whose project equals ``project`` are yielded when it is set.
    """
    if hour is None:
        hour = hour_from_filename(path)
    malformed = 0
    for line in asset_io.iter_lines(path):
        if not line:
            continue
        try:
            record = parse_pageview_line(line, hour)
        except MalformedLine:
            malformed += 1
            continue
        if project is None or record.project == project:
            yield record
    if malformed:
        logger.info("%s: skipped %d malformed lines", path, malformed)


# ============================================================================
# VIEW MATRIX
# ============================================================================

@dataclass
class ViewMatrix:
    """Dense pages x hours count matrix starting at ``start_hour``."""
    index: PageIndex
    start_hour: int
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != len(self.index):
            raise ValueError(
                f"counts shape {self.counts.shape} does not match index of {len(self.index)} pages"
            )
        if self.counts.shape[1] < 1:
            raise EmptyRange("a view matrix needs at least one hour")
        if self.counts.size and self.counts.min() < 0:
            raise ValueError("view counts must be non-negative")

    @property
    def n_pages(self) -> int:
        return self.counts.shape[0]

    @property
    def n_hours(self) -> int:
        return self.counts.shape[1]

    @property
    def end_hour(self) -> int:
        return self.start_hour + self.n_hours

    def total(self) -> int:
        return int(self.counts.sum())

    def row(self, page_id: int) -> np.ndarray:
        return self.counts[page_id]

    def save(self, path: Union[str, Path]) -> List[Path]:
        """Write the ``WKTS1`` cache and its ``.index.tsv`` companion."""
        path = Path(path)
        if self.counts.size and self.counts.max() > _U32_MAX:
            raise CacheFormatError("counts exceed the u32 range of the cache format")
        header = CACHE_MAGIC + _CACHE_HEADER.pack(self.n_pages, self.n_hours, self.start_hour)
        body = np.ascontiguousarray(self.counts, dtype='<u4').tobytes(order='C')
        asset_io.write_bytes(path, header + body)
        return [path, self.index.save(index_path_for(path))]

    @classmethod
    def load(cls, path: Union[str, Path], language: str = "en",
             index_path: Optional[Union[str, Path]] = None) -> 'ViewMatrix':
        path = Path(path)
        data = asset_io.read_bytes(path)
        offset = len(CACHE_MAGIC) + _CACHE_HEADER.size
        if len(data) < offset or data[:len(CACHE_MAGIC)] != CACHE_MAGIC:
            raise CacheFormatError(f"{path}: not a WKTS1 view matrix")
        n_pages, n_hours, start_hour = _CACHE_HEADER.unpack_from(data, len(CACHE_MAGIC))
        expected = offset + 4 * n_pages * n_hours
        if len(data) != expected:
            raise CacheFormatError(f"{path}: expected {expected} bytes, found {len(data)}")
        counts = np.frombuffer(data, dtype='<u4', offset=offset).reshape(n_pages, n_hours)
        index = PageIndex.load(index_path or index_path_for(path), language)
        if len(index) != n_pages:
            raise CacheFormatError(f"{path}: index has {len(index)} titles for {n_pages} rows")
        return cls(index=index, start_hour=start_hour, counts=counts.astype(np.int64))


def index_path_for(matrix_path: Union[str, Path]) -> Path:
    return Path(matrix_path).with_suffix('.index.tsv')


def build_view_matrix(
    records: Iterable[Tuple[ViewRecord, int]],
    index: PageIndex,
    start_hour: int,
    end_hour: int,
) -> ViewMatrix:
    """Sum views per (page, hour) over ``[start_hour, end_hour)``.

    Records outside the range or with titles missing from the index are
    skipped and counted.
    """
    if end_hour <= start_hour:
        raise EmptyRange(f"empty hour range [{start_hour}, {end_hour})")
    counts = np.zeros((len(index), end_hour - start_hour), dtype=np.int64)
    unknown = out_of_range = 0
    for record, hour in records:
        if not start_hour <= hour < end_hour:
            out_of_range += 1
            continue
        page_id = index.id_of(record.title)
        if page_id is None:
            unknown += 1
            continue
        counts[page_id, hour - start_hour] += record.views
    if unknown or out_of_range:
        logger.debug("skipped %d unknown-title and %d out-of-range records", unknown, out_of_range)
    return ViewMatrix(index=index, start_hour=start_hour, counts=counts)


def merge_view_matrices(parts: Sequence[ViewMatrix]) -> ViewMatrix:
    """Element-wise sum of partial matrices over the same index and range."""
    if not parts:
        raise EmptyRange("nothing to merge")
    first = parts[0]
    total = first.counts.copy()
    for part in parts[1:]:
        if part.index.titles != first.index.titles or part.start_hour != first.start_hour \
                or part.n_hours != first.n_hours:
            raise ValueError("partial matrices disagree on index or hour range")
        total += part.counts
    return ViewMatrix(index=first.index, start_hour=first.start_hour, counts=total)


def build_view_matrix_from_files(
    paths: Sequence[Union[str, Path]],
    index: PageIndex,
    start_hour: int,
    end_hour: int,
    workers: int = 1,
) -> ViewMatrix:
    """Parse dump files (one partial matrix per file) and merge them."""
    if end_hour <= start_hour:
        raise EmptyRange(f"empty hour range [{start_hour}, {end_hour})")

    def one_file(path: Union[str, Path]) -> ViewMatrix:
        hour = hour_from_filename(path)
        records = ((r, hour) for r in iter_pageview_file(path, project=index.language, hour=hour))
        return build_view_matrix(records, index, start_hour, end_hour)

    if not paths:
        return build_view_matrix([], index, start_hour, end_hour)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one_file, paths))
    else:
        parts = [one_file(p) for p in paths]
    logger.info("parsed %d pageview files for %s", len(parts), index.language)
    return merge_view_matrices(parts)


# ============================================================================
# HYPERLINKS
# ============================================================================

@dataclass
class EdgeList:
    """Directed hyperlinks between page ids; no self-loops, no duplicates."""
    edges: List[Tuple[int, int]]
    skipped: int = 0

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def undirected_degrees(self, n_pages: int) -> np.ndarray:
        pairs = {(min(s, t), max(s, t)) for s, t in self.edges}
        degrees = np.zeros(n_pages, dtype=np.int64)
        for s, t in pairs:
            degrees[s] += 1
            degrees[t] += 1
        return degrees


def _split_edge_line(path: Union[str, Path], lineno: int, line: str) -> Tuple[str, str]:
    source, sep, target = line.partition('\t')
    if not sep:
        raise ParseError(f"{path}:{lineno}: missing tab separator")
    return source, target


def load_edges(path: Union[str, Path], index: PageIndex) -> EdgeList:
    """Resolve a ``source<TAB>target`` title file through ``index``."""
    seen = set()
    edges: List[Tuple[int, int]] = []
    skipped = 0
    for lineno, line in enumerate(asset_io.iter_lines(path), start=1):
        if not line:
            continue
        source, target = _split_edge_line(path, lineno, line)
        s, t = index.id_of(source), index.id_of(target)
        if s is None or t is None:
            skipped += 1
            continue
        if s == t or (s, t) in seen:
            continue
        seen.add((s, t))
        edges.append((s, t))
    if skipped:
        logger.info("%s: skipped %d edges with unknown titles", path, skipped)
    return EdgeList(edges=edges, skipped=skipped)


def save_edges(edges: EdgeList, index: PageIndex, path: Union[str, Path]) -> Path:
    lines = [f"{index.title_of(s)}\t{index.title_of(t)}\n" for s, t in edges]
    return asset_io.write_file(path, ''.join(lines))


def index_from_edge_file(path: Union[str, Path], language: str = "en") -> PageIndex:
    """Page universe = sorted titles appearing in an edge file."""
    titles = set()
    for lineno, line in enumerate(asset_io.iter_lines(path), start=1):
        if line:
            titles.update(_split_edge_line(path, lineno, line))
    return PageIndex(sorted(titles), language)


def filter_pages(
    matrix: ViewMatrix,
    edges: EdgeList,
    min_total_views: int = 0,
    min_degree: int = 0,
) -> Tuple[ViewMatrix, EdgeList]:
    """Drop low-traffic or weakly linked pages and re-index what remains."""
    keep = np.ones(matrix.n_pages, dtype=bool)
    if min_total_views > 0:
        keep &= matrix.counts.sum(axis=1) >= min_total_views
    if min_degree > 0:
        keep &= edges.undirected_degrees(matrix.n_pages) >= min_degree
    if keep.all():
        return matrix, edges

    old_ids = np.flatnonzero(keep)
    remap = {int(old): new for new, old in enumerate(old_ids)}
    index = PageIndex([matrix.index.title_of(int(i)) for i in old_ids], matrix.index.language)
    kept_edges = [(remap[s], remap[t]) for s, t in edges if s in remap and t in remap]
    logger.info("filtered %d of %d pages", matrix.n_pages - len(old_ids), matrix.n_pages)
    return (
        ViewMatrix(index=index, start_hour=matrix.start_hour, counts=matrix.counts[keep]),
        EdgeList(edges=kept_edges, skipped=edges.skipped),
    )


# ============================================================================
# SUMMARIES
# ============================================================================

class SummaryStore:
    """Page id -> plain-text summary."""

    def __init__(self, summaries: Optional[Dict[int, str]] = None):
        self._summaries: Dict[int, str] = dict(summaries or {})

    def __len__(self) -> int:
        return len(self._summaries)

    def __contains__(self, page_id: object) -> bool:
        return page_id in self._summaries

    def get(self, page_id: int) -> str:
        return self._summaries.get(page_id, "")

    def set(self, page_id: int, text: str) -> None:
        self._summaries[page_id] = text

    def items(self):
        return sorted(self._summaries.items())


def load_summaries(path: Union[str, Path], index: PageIndex) -> SummaryStore:
    """Read JSONL objects ``{"id"|"title": ..., "summary": ...}``."""
    store = SummaryStore()
    unknown = 0
    for row in asset_io.read_jsonl(path):
        if 'id' in row:
            page_id = int(row['id'])
            if not 0 <= page_id < len(index):
                page_id = None
        else:
            page_id = index.id_of(row.get('title', ''))
        if page_id is None:
            unknown += 1
            continue
        store.set(page_id, row.get('summary') or "")
    if unknown:
        logger.debug("%s: %d summaries for pages outside the index", path, unknown)
    return store


def save_summaries(store: SummaryStore, index: PageIndex, path: Union[str, Path]) -> Path:
    return asset_io.write_jsonl(
        path, ({'title': index.title_of(pid), 'summary': text} for pid, text in store.items())
    )


def summary_url(title: str, lang: str, endpoint: str = DEFAULT_ENDPOINT) -> str:
    """Summary URL for ``title``.

    An endpoint holding ``{lang}`` is the per-edition REST base
    (``https://{lang}.wikipedia.org/api/rest_v1``); any other base gets
    ``/{lang}`` appended before the route.
    """
    base = endpoint.rstrip('/')
    if '{lang}' in base:
        base = base.replace('{lang}', lang)
    else:
        base = f"{base}/{lang}"
    return f"{base}/page/summary/{quote(title, safe='')}"


def fetch_summary(
    title: str,
    lang: str,
    endpoint: str = DEFAULT_ENDPOINT,
    session: Optional[requests.Session] = None,
    timeout: float = 10.0,
) -> str:
    """GET the page summary (see ``summary_url``) and return its ``extract``."""
    url = summary_url(title, lang, endpoint)
    http = session or requests
    try:
        response = http.get(url, timeout=timeout, headers={'User-Agent': USER_AGENT})
    except requests.RequestException as e:
        raise TransportError(f"request for {title!r} failed: {e}") from e

    if response.status_code == 404:
        raise NotFound(f"no summary for {title!r} ({lang})")
    if response.status_code == 429:
        raise RateLimited(f"rate limited fetching {title!r}", _retry_after(response))
    if response.status_code >= 400:
        raise TransportError(f"HTTP {response.status_code} for {title!r}")

    try:
        payload = response.json()
    except ValueError as e:
        raise TransportError(f"undecodable response for {title!r}") from e
    extract = payload.get('extract') if isinstance(payload, dict) else None
    if not isinstance(extract, str):
        raise TransportError(f"response for {title!r} has no text extract")
    return extract


def _retry_after(response) -> float:
    try:
        return max(0.0, float(response.headers.get('Retry-After', 1)))
    except (TypeError, ValueError):
        return 1.0


def fetch_summaries(
    titles: Iterable[str],
    lang: str,
    endpoint: str = DEFAULT_ENDPOINT,
    session: Optional[requests.Session] = None,
    max_retries: int = 3,
    sleep: Callable[[float], None] = time.sleep,
) -> Dict[str, str]:
    """Fetch many summaries, backing off on 429; missing pages map to ""."""
    out: Dict[str, str] = {}
    missing = 0
    for title in titles:
        attempt = 0
        while True:
            try:
                out[title] = fetch_summary(title, lang, endpoint, session)
                break
            except NotFound:
                logger.debug("no summary for %s", title)
                missing += 1
                out[title] = ""
                break
            except RateLimited as e:
                attempt += 1
                if attempt > max_retries:
                    raise
                logger.warning("rate limited, waiting %.1fs", e.retry_after)
                sleep(e.retry_after)
    if missing:
        logger.warning("%s: %d of %d titles have no summary at %s",
                       lang, missing, len(out), summary_url("", lang, endpoint).rstrip('/'))
    return out
