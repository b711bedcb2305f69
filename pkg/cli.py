#!/usr/bin/env python3
"""
Wikitrends CLI - Trending topics from Wikipedia pageviews

Built on the wikitrends_core foundation:
- core modules for IO, schemas, validation, workflows and exports
- the wikitrends domain layer for the pipeline stages
"""

import logging
import sys
from pathlib import Path

import click

from wikitrends import __version__
from wikitrends.config import load_config
from wikitrends.ingest import DEFAULT_ENDPOINT, PageIndex, SummaryStore, fetch_summaries, save_summaries
from wikitrends.pipeline import run_compare, run_language_stages, run_pipeline
from wikitrends.synthetic import write_fixture
from wikitrends_core.errors import FetchError, exit_code_for

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_FIXTURE_SEED = 42


def _fail(error: BaseException):
    click.echo(f"✗ Error: {error}", err=True)
    sys.exit(exit_code_for(error))


def _config(ctx):
    obj = ctx.obj
    return load_config(obj['config_path'], output=obj['output'], seed=obj['seed'])


@click.group()
@click.version_option(version=__version__)
@click.option('--config', 'config_path', type=click.Path(), default='wikitrends.yaml',
              help='Pipeline config (YAML)')
@click.option('--output', type=click.Path(), help='Output directory (overrides the config)')
@click.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), help='Seed (overrides the config)')
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              default='WARNING', help='Logging level')
@click.pass_context
def cli(ctx, config_path, output, seed, log_level):
    """
    Wikitrends - detect, label and compare trending Wikipedia topics.

    Commands:
      run       - Every stage for every language, then compare
      ingest    - Build view matrices and edge lists
      detect    - Find trending pages
      cluster   - Trend graph, communities and PageRank
      keywords  - TF-IDF keywords (and LDA topics)
      label     - Label pages and clusters
      trends    - Assemble and export trends
      compare   - Align trends across languages, write the manifest
      synth     - Write a synthetic multi-language fixture
      fetch     - Download page summaries
    """
    logging.basicConfig(level=getattr(logging, log_level.upper()), format=LOG_FORMAT)
    ctx.obj = {'config_path': config_path, 'output': output, 'seed': seed}


# ============================================================================
# PIPELINE COMMANDS
# ============================================================================

@cli.command()
@click.pass_context
def run(ctx):
    """Run the full pipeline and write the manifest."""
    try:
        config = _config(ctx)
        result = run_pipeline(config)
    except Exception as e:
        _fail(e)
    click.echo(f"✓ Pipeline finished for {', '.join(config.codes())}")
    click.echo(f"  Files: {len(result.manifest['files'])}")
    click.echo(f"  Manifest: {result.manifest_path}")


def _run_stage(ctx, stage: str, languages):
    try:
        config = _config(ctx)
        results = run_language_stages(config, [stage], languages or None)
    except Exception as e:
        _fail(e)
    for code, outcome in results.items():
        click.echo(f"✓ {code}: {stage} -> {outcome.get(stage)}")


def _stage_command(stage: str, help_text: str):
    @click.option('--language', '-l', 'languages', multiple=True, help='Limit to these language codes')
    @click.pass_context
    def command(ctx, languages):
        _run_stage(ctx, stage, languages)

    command.__doc__ = help_text
    return cli.command(name=stage)(command)


ingest = _stage_command('ingest', "Build view matrices and edge lists.")
detect = _stage_command('detect', "Find trending pages.")
cluster = _stage_command('cluster', "Build the trend graph, find communities, rank pages.")
keywords = _stage_command('keywords', "Extract TF-IDF keywords and optional LDA topics.")
label = _stage_command('label', "Label pages by rule and classifier, then label clusters.")
trends = _stage_command('trends', "Assemble trends and write their exports.")


@cli.command()
@click.pass_context
def compare(ctx):
    """Align trends across languages and write the manifest."""
    try:
        config = _config(ctx)
        result = run_compare(config)
    except Exception as e:
        _fail(e)
    click.echo(f"✓ Alignment written: {config.output_dir / 'alignment.json'}")
    click.echo(f"  Manifest: {result.manifest_path}")


# ============================================================================
# FIXTURES AND DATA
# ============================================================================

@cli.command()
@click.argument('out_dir', type=click.Path())
@click.option('--languages', default='en,fr,ru', help='Language codes (comma-separated)')
@click.option('--dumps', is_flag=True, help='Write hourly pageview dumps instead of a matrix cache')
@click.option('--independent', is_flag=True, help='Plan burst windows per language')
@click.pass_context
def synth(ctx, out_dir, languages, dumps, independent):
    """Write a synthetic fixture with a ready-to-run config."""
    seed = ctx.obj['seed'] if ctx.obj['seed'] is not None else DEFAULT_FIXTURE_SEED
    codes = [c.strip() for c in languages.split(',') if c.strip()]
    try:
        path = write_fixture(out_dir, codes, seed=seed, shared_windows=not independent, as_dumps=dumps)
    except Exception as e:
        _fail(e)
    click.echo(f"✓ Fixture written: {Path(out_dir)}")
    click.echo(f"  Config: {path}")


@cli.command()
@click.argument('index_path', type=click.Path(exists=True))
@click.argument('out_path', type=click.Path())
@click.option('--language', '-l', required=True, help='Wikipedia language code')
@click.option('--endpoint', default=DEFAULT_ENDPOINT, show_default=True,
              help='REST base URL; {lang} is replaced by the language code')
@click.option('--retries', default=3, type=click.IntRange(0), help='Retries after rate limiting')
def fetch(index_path, out_path, language, endpoint, retries):
    """Download summaries for every page of an id/title index file."""
    try:
        index = PageIndex.load(index_path, language)
        fetched = fetch_summaries(index.titles, language, endpoint, max_retries=retries)
        store = SummaryStore({index.id_of(t): text for t, text in fetched.items() if text})
        if not store:
            raise FetchError(f"no summaries retrieved for {len(index)} titles from {endpoint}")
        save_summaries(store, index, out_path)
    except Exception as e:
        _fail(e)
    click.echo(f"✓ Summaries fetched: {len(store)}/{len(index)}")
    click.echo(f"  Saved to: {out_path}")


# ============================================================================
# MAIN
# ============================================================================

if __name__ == '__main__':
    cli()
