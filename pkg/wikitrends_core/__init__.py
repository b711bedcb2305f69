"""
Wikitrends Core - Frozen Foundation
===================================

7 stable modules the domain layer builds on:
- asset_io: Atomic file writes, JSON/JSONL/CSV, gzip-aware reading, hashes
- section_schema: Typed config sections with defaults
- rule_checks: Named document checks grouped by prefix
- stage_runner: Ordered stage plans with stage-tagged failures
- content_transform: Artifact writers keyed by (kind, format)
- job_identity: Run and stage tracking
- errors: Exception hierarchy shared by every layer
"""

__version__ = "1.0.0"

from .asset_io import atomic_write, read_json, write_json, read_jsonl, write_jsonl, write_csv, sha256_file
from .section_schema import Option, section, check_section, fill_section, get_section
from .rule_checks import ValidationResult, rule, run_rules, list_rules
from .stage_runner import StagePlan, stage_plan, run_plan, get_plan
from .content_transform import define_transform, apply_transform, list_transforms
from .job_identity import create_job, log_job_execution, get_job, list_jobs
from .errors import WikitrendsError, ConfigError, DataError, StageError, exit_code_for

__all__ = [
    # IO
    'atomic_write', 'read_json', 'write_json', 'read_jsonl', 'write_jsonl', 'write_csv', 'sha256_file',
    # Schema
    'Option', 'section', 'check_section', 'fill_section', 'get_section',
    # Checks
    'ValidationResult', 'rule', 'run_rules', 'list_rules',
    # Stages
    'StagePlan', 'stage_plan', 'run_plan', 'get_plan',
    # Transform
    'define_transform', 'apply_transform', 'list_transforms',
    # Identity
    'create_job', 'log_job_execution', 'get_job', 'list_jobs',
    # Errors
    'WikitrendsError', 'ConfigError', 'DataError', 'StageError', 'exit_code_for',
]
