"""
Config - Versioned YAML pipeline configuration
Uses: core.section_schema, core.rule_checks

Each section has a typed schema with defaults; cross-field and
filesystem checks are ``config.*`` rules. Every problem found is reported
in a single ConfigError before any stage runs. Relative paths resolve
against the directory of the config file.
"""

import glob
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from wikitrends_core import asset_io, rule_checks, section_schema
from wikitrends_core.errors import ConfigError
from wikitrends_core.rule_checks import ValidationResult
from wikitrends_core.section_schema import Option

from .burst import BurstConfig
from .graph import GraphConfig
from .ingest import epoch_hour
from .label import CLASSIFIERS
from .text import KeywordConfig

logger = logging.getLogger(__name__)

CONFIG_VERSION = 1
_NUMBER = (int, float)
_HOUR = (str, int)

SECTIONS = ('filters', 'burst', 'graph', 'keywords', 'lda', 'classifier', 'trends', 'alignment')


def derive_seed(seed: int, stage: str, language: str = "") -> int:
    """Per-stage seed: first 8 bytes (little-endian) of sha256("seed:stage:language")."""
    digest = hashlib.sha256(f"{seed}:{stage}:{language}".encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'little')


def setup_config_sections():
    """Register one schema per config section."""
    section_schema.section("pipeline", [
        Option("version", int),
        Option("seed", int, 0),
        Option("output_dir", str, "out"),
        Option("time_range", dict),
        Option("languages", list),
        Option("workers", int, 1),
    ] + [Option(name, dict, None) for name in SECTIONS], doc="Pipeline configuration document")
    section_schema.section("time_range", [Option("start", _HOUR), Option("end", _HOUR)])
    section_schema.section("language", [
        Option("code", str),
        Option("pageviews", str, None, "Glob of hourly pageview dumps"),
        Option("matrix", str, None, "Cached view matrix, used instead of dumps"),
        Option("index", str, None),
        Option("edges", str),
        Option("summaries", str),
        Option("stopwords", str),
        Option("rules", str),
    ], doc="One language edition and its input files")
    section_schema.section("filters", [
        Option("min_total_views", int, 0),
        Option("min_degree", int, 0),
    ])
    section_schema.section("burst", [
        Option("window_hours", int, 168),
        Option("z_threshold", _NUMBER, 3.0),
        Option("min_views", int, 100),
        Option("epsilon", _NUMBER, 1e-9),
    ])
    section_schema.section("graph", [
        Option("w_min", _NUMBER, 0.5),
        Option("min_overlap_hours", int, 6),
        Option("damping", _NUMBER, 0.85),
        Option("tol", _NUMBER, 1e-9),
        Option("max_iter", int, 100),
        Option("min_cluster_size", int, 5),
        Option("resolution", _NUMBER, 1.0),
    ])
    section_schema.section("keywords", [Option("k", int, 20)])
    section_schema.section("lda", [
        Option("enabled", bool, False),
        Option("topics", int, 5),
        Option("alpha", _NUMBER, None, "Defaults to 50 / topics"),
        Option("beta", _NUMBER, 0.01),
        Option("iterations", int, 1000),
        Option("top_words", int, 20),
    ])
    section_schema.section("classifier", [
        Option("kind", str, "naive_bayes", "naive_bayes or linear_svm"),
        Option("smoothing", _NUMBER, 1.0),
        Option("test_fraction", _NUMBER, 0.2),
        Option("min_token_length", int, 2),
    ])
    section_schema.section("trends", [Option("top_n", int, None, "Keep the N strongest trends; all when unset")])
    section_schema.section("alignment", [Option("delta_hours", int, 48)])


# ============================================================================
# RULES
# ============================================================================

@rule_checks.rule("config.languages", "Non-empty, unique language codes")
def _check_languages(doc: Dict[str, Any]) -> ValidationResult:
    codes = [lang['code'] for lang in doc['languages']]
    if not codes:
        return ValidationResult.fail("languages: at least one language is required")
    duplicates = sorted({c for c in codes if codes.count(c) > 1})
    if duplicates:
        return ValidationResult.fail(f"languages: duplicate codes {duplicates}")
    return ValidationResult.ok()


@rule_checks.rule("config.view_source", "One pageview source per language")
def _check_view_source(doc: Dict[str, Any]) -> ValidationResult:
    errors = []
    for lang in doc['languages']:
        has_dumps, has_matrix = bool(lang.get('pageviews')), bool(lang.get('matrix'))
        if has_dumps == has_matrix:
            errors.append(f"languages[{lang['code']}]: set exactly one of 'pageviews' or 'matrix'")
    return ValidationResult(errors)


@rule_checks.rule("config.paths", "Input files exist")
def _check_paths(doc: Dict[str, Any]) -> ValidationResult:
    errors, warnings = [], []
    for lang in doc['languages']:
        for key in ('edges', 'summaries', 'stopwords', 'rules'):
            if not lang.get(key):
                errors.append(f"languages[{lang['code']}].{key}: a path is required")
        for key in ('edges', 'summaries', 'stopwords', 'rules', 'matrix', 'index'):
            value = lang.get(key)
            if value and not Path(value).is_file():
                errors.append(f"languages[{lang['code']}].{key}: file not found: {value}")
        if lang.get('pageviews') and not glob.glob(lang['pageviews']):
            warnings.append(f"languages[{lang['code']}].pageviews: no file matches {lang['pageviews']}")
    return ValidationResult(errors, warnings)


@rule_checks.rule("config.time_range", "Well-formed, ordered time range")
def _check_time_range(doc: Dict[str, Any]) -> ValidationResult:
    try:
        start = epoch_hour(doc['time_range']['start'])
        end = epoch_hour(doc['time_range']['end'])
    except ValueError as e:
        return ValidationResult.fail(f"time_range: {e}")
    if end <= start:
        return ValidationResult.fail("time_range: end must be after start")
    return ValidationResult.ok()


@rule_checks.rule("config.ranges", "Hyperparameters within range")
def _check_ranges(doc: Dict[str, Any]) -> ValidationResult:
    errors = []
    for build in (
        lambda: BurstConfig(**doc['burst']),
        lambda: GraphConfig(**doc['graph']),
        lambda: KeywordConfig(**doc['keywords']),
    ):
        try:
            build()
        except ConfigError as e:
            errors.extend(e.errors or [str(e)])
    lda, classifier = doc['lda'], doc['classifier']
    if lda['topics'] < 1:
        errors.append("lda.topics must be >= 1")
    if lda['iterations'] < 0:
        errors.append("lda.iterations must be >= 0")
    if lda['alpha'] is not None and lda['alpha'] <= 0:
        errors.append("lda.alpha must be > 0")
    if lda['beta'] <= 0:
        errors.append("lda.beta must be > 0")
    if classifier['kind'] not in CLASSIFIERS:
        errors.append(f"classifier.kind must be one of {sorted(CLASSIFIERS)}")
    if classifier['smoothing'] < 0:
        errors.append("classifier.smoothing must be >= 0")
    if not 0 <= classifier['test_fraction'] < 1:
        errors.append("classifier.test_fraction must lie in [0, 1)")
    if classifier['min_token_length'] < 1:
        errors.append("classifier.min_token_length must be >= 1")
    if doc['trends']['top_n'] is not None and doc['trends']['top_n'] < 1:
        errors.append("trends.top_n must be >= 1")
    if doc['alignment']['delta_hours'] < 0:
        errors.append("alignment.delta_hours must be >= 0")
    if doc['workers'] < 1:
        errors.append("workers must be >= 1")
    if not 0 <= doc['seed'] < 2 ** 64:
        errors.append("seed must be an unsigned 64-bit integer")
    if min(doc['filters'].values()) < 0:
        errors.append("filters must be >= 0")
    return ValidationResult(errors)


# Initialize on import
setup_config_sections()


# ============================================================================
# TYPED CONFIG
# ============================================================================

@dataclass
class LanguageSource:
    code: str
    edges: Path
    summaries: Path
    stopwords: Path
    rules: Path
    pageviews: Optional[str] = None
    matrix: Optional[Path] = None
    index: Optional[Path] = None


@dataclass(frozen=True)
class LdaSettings:
    enabled: bool = False
    topics: int = 5
    alpha: Optional[float] = None
    beta: float = 0.01
    iterations: int = 1000
    top_words: int = 20


@dataclass(frozen=True)
class ClassifierSettings:
    kind: str = "naive_bayes"
    smoothing: float = 1.0
    test_fraction: float = 0.2
    min_token_length: int = 2


@dataclass
class PipelineConfig:
    languages: List[LanguageSource]
    start_hour: int
    end_hour: int
    output_dir: Path
    seed: int = 0
    burst: BurstConfig = field(default_factory=BurstConfig)
    graph: GraphConfig = field(default_factory=GraphConfig)
    keywords: KeywordConfig = field(default_factory=KeywordConfig)
    lda: LdaSettings = field(default_factory=LdaSettings)
    classifier: ClassifierSettings = field(default_factory=ClassifierSettings)
    top_n: Optional[int] = None
    delta_hours: int = 48
    min_total_views: int = 0
    min_degree: int = 0
    workers: int = 1
    source: Optional[Path] = None

    def language(self, code: str) -> LanguageSource:
        for lang in self.languages:
            if lang.code == code:
                return lang
        raise ConfigError(f"language '{code}' is not configured")

    def codes(self) -> List[str]:
        return [lang.code for lang in self.languages]

    def language_dir(self, code: str) -> Path:
        return self.output_dir / code


def _resolve(base: Path, value: Optional[str]) -> Optional[str]:
    if not value:
        return value
    path = Path(value).expanduser()
    return str(path if path.is_absolute() else base / path)


def parse_config(
    data: Any,
    base_dir: Union[str, Path] = ".",
    output: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
) -> PipelineConfig:
    """Validate a loaded document and build the typed config."""
    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping", ["config document must be a mapping"])
    base = Path(base_dir)
    errors: List[str] = []

    errors.extend(section_schema.check_section("pipeline", data))
    if isinstance(data.get('version'), int) and data['version'] != CONFIG_VERSION:
        errors.append(f"pipeline: unsupported version {data['version']} (expected {CONFIG_VERSION})")
    if errors:
        raise ConfigError("invalid configuration: " + "; ".join(errors), errors)

    doc = section_schema.fill_section("pipeline", data)
    errors.extend(section_schema.check_section("time_range", doc['time_range']))
    for section in SECTIONS:
        doc[section] = doc[section] or {}
        errors.extend(section_schema.check_section(section, doc[section]))
        doc[section] = section_schema.fill_section(section, doc[section])
    languages = []
    for i, entry in enumerate(doc['languages']):
        if not isinstance(entry, dict):
            errors.append(f"languages[{i}]: expected a mapping")
            continue
        errors.extend(f"languages[{i}]: {e}" for e in
                      section_schema.check_section("language", entry))
        entry = section_schema.fill_section("language", entry)
        for key in ('pageviews', 'matrix', 'index', 'edges', 'summaries', 'stopwords', 'rules'):
            entry[key] = _resolve(base, entry.get(key))
        languages.append(entry)
    if errors:
        raise ConfigError("invalid configuration: " + "; ".join(errors), errors)

    doc['languages'] = languages
    if seed is not None:
        doc['seed'] = seed
    checked = rule_checks.run_rules(doc, "config.")
    for warning in checked.warnings:
        logger.warning(warning)
    checked.raise_for_errors()

    out = Path(output) if output is not None else Path(_resolve(base, doc['output_dir']))
    return PipelineConfig(
        languages=[
            LanguageSource(
                code=entry['code'],
                edges=Path(entry['edges']),
                summaries=Path(entry['summaries']),
                stopwords=Path(entry['stopwords']),
                rules=Path(entry['rules']),
                pageviews=entry.get('pageviews'),
                matrix=Path(entry['matrix']) if entry.get('matrix') else None,
                index=Path(entry['index']) if entry.get('index') else None,
            )
            for entry in languages
        ],
        start_hour=epoch_hour(doc['time_range']['start']),
        end_hour=epoch_hour(doc['time_range']['end']),
        output_dir=out,
        seed=doc['seed'],
        burst=BurstConfig(**doc['burst']),
        graph=GraphConfig(**doc['graph']),
        keywords=KeywordConfig(**doc['keywords']),
        lda=LdaSettings(**doc['lda']),
        classifier=ClassifierSettings(**doc['classifier']),
        top_n=doc['trends']['top_n'],
        delta_hours=doc['alignment']['delta_hours'],
        min_total_views=doc['filters']['min_total_views'],
        min_degree=doc['filters']['min_degree'],
        workers=doc['workers'],
    )


def load_config(
    path: Union[str, Path],
    output: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
) -> PipelineConfig:
    """Read and validate a YAML config file; ``output``/``seed`` override it."""
    path = Path(path)
    try:
        data = yaml.safe_load(asset_io.read_file(path))
    except FileNotFoundError as e:
        raise ConfigError(str(e), [str(e)]) from e
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: not valid YAML: {e}", [str(e)]) from e
    config = parse_config(data, path.parent, output, seed)
    config.source = path
    return config
