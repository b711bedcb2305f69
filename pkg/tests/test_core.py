"""
Tests for the core modules.
"""

import gzip
import pytest
from pathlib import Path
import tempfile

from wikitrends_core import (
    asset_io, content_transform, job_identity, rule_checks, section_schema, stage_runner
)
from wikitrends_core.errors import (
    ConfigError, DataError, EmptyGraph, StageError, UnsupportedFormat, exit_code_for
)
from wikitrends_core.rule_checks import ValidationResult
from wikitrends_core.section_schema import Option


class TestAssetIO:
    """Test asset_io module."""

    def test_read_write_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "nested" / "test.txt"
            content = "Тур де Франс"

            asset_io.write_file(path, content)
            assert asset_io.read_file(path) == content

    def test_read_write_json(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "test.json"
            data = {"name": "test", "value": 123}

            asset_io.write_json(path, data)
            assert asset_io.read_json(path) == data

    def test_json_is_deterministic(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            a = asset_io.write_json(Path(tmpdir) / "a.json", {"b": 1, "a": "é"})
            b = asset_io.write_json(Path(tmpdir) / "b.json", {"a": "é", "b": 1})

            assert a.read_bytes() == b.read_bytes()
            assert a.read_text(encoding="utf-8").endswith("}\n")
            assert "é" in a.read_text(encoding="utf-8")

    def test_read_write_csv(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "test.csv"
            data = [
                {"label": "music", "support": "288"},
                {"label": "science", "support": "70"}
            ]

            asset_io.write_csv(path, data)
            assert asset_io.read_csv(path) == data

    def test_csv_header_without_rows(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = asset_io.write_csv(Path(tmpdir) / "empty.csv", [], ["hour", "views"])
            assert path.read_text() == "hour,views\n"

    def test_jsonl(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "rows.jsonl"
            asset_io.write_jsonl(path, [{"id": 1}, {"id": 2}])

            assert list(asset_io.read_jsonl(path)) == [{"id": 1}, {"id": 2}]

    def test_iter_lines_reads_gzip(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "lines.gz"
            path.write_bytes(gzip.compress(b"en Main_Page 10 0\nen Foo 2 0\n"))

            assert list(asset_io.iter_lines(path)) == ["en Main_Page 10 0", "en Foo 2 0"]

    def test_atomic_write_leaves_no_temp_files(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            asset_io.write_bytes(Path(tmpdir) / "blob.bin", b"\x00\x01")
            assert [p.name for p in Path(tmpdir).iterdir()] == ["blob.bin"]

    def test_sha256(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = asset_io.write_bytes(Path(tmpdir) / "abc", b"abc")
            assert asset_io.sha256_file(path) == (
                "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
            )

    def test_missing_file(self):
        with pytest.raises(FileNotFoundError):
            asset_io.read_file("/nonexistent/file.txt")


class TestSectionSchema:
    """Test section_schema module."""

    def test_required_and_optional(self):
        section_schema.section("test_section", [
            Option("window_hours", int),
            Option("threshold", (int, float), 3.0),
        ])

        assert section_schema.check_section("test_section", {"window_hours": 168}) == []
        problems = section_schema.check_section("test_section", {"threshold": 2})
        assert problems == ["test_section: option 'window_hours' is required"]

    def test_unknown_options_and_wrong_types(self):
        section_schema.section("test_typed", [Option("k", int, 20)])

        problems = section_schema.check_section("test_typed", {"k": "20", "extra": 1})
        assert "test_typed: unknown option 'extra'" in problems
        assert "test_typed: option 'k' expects int, got str" in problems

    def test_bool_is_not_a_number(self):
        section_schema.section("test_bool", [Option("k", int), Option("flag", bool, False)])
        assert section_schema.check_section("test_bool", {"k": True}) != []
        assert section_schema.check_section("test_bool", {"k": 1, "flag": True}) == []

    def test_none_fits_any_option(self):
        section_schema.section("test_none", [Option("alpha", float, None)])
        assert section_schema.check_section("test_none", {"alpha": None}) == []

    def test_fill_section(self):
        section_schema.section("test_defaults", [Option("k", int, 20), Option("name", str)])
        assert section_schema.fill_section("test_defaults", {"name": "x"}) == {"name": "x", "k": 20}
        assert section_schema.fill_section("test_defaults", {"k": 3}) == {"k": 3}
        assert section_schema.get_section("test_defaults").option("k").required is False

    def test_unknown_section(self):
        with pytest.raises(KeyError):
            section_schema.check_section("test_never_defined", {})


class TestRuleChecks:
    """Test rule_checks module."""

    def test_errors_and_soft_rules(self):
        @rule_checks.rule("test.positive")
        def positive(d):
            return ValidationResult() if d['n'] > 0 else ValidationResult.fail("n must be positive")

        @rule_checks.rule("test.small", soft=True)
        def small(d):
            return ValidationResult.fail("n is small")

        result = rule_checks.run_rules({'n': -1}, "test.")
        assert result.valid is False
        assert result.errors == ["n must be positive"]
        assert result.warnings == ["n is small"]
        assert positive({'n': 2}).valid

    def test_list_rules_by_prefix(self):
        rule_checks.rule("test.listed")(lambda d: ValidationResult.ok())
        assert "test.listed" in rule_checks.list_rules("test.")
        assert "test.listed" not in rule_checks.list_rules("config.")
        assert rule_checks.get_rule("test.listed").soft is False

    def test_config_rules_registered(self):
        import wikitrends.config  # noqa: F401
        assert "config.paths" in rule_checks.list_rules("config.")

    def test_raise_for_errors(self):
        result = ValidationResult.fail("a", "b")
        with pytest.raises(ConfigError) as info:
            result.raise_for_errors("rules")
        assert info.value.errors == ["a", "b"]
        assert "invalid rules" in str(info.value)

        ValidationResult(warnings=["only a warning"]).raise_for_errors()


class TestContentTransform:
    """Test content_transform module."""

    def test_define_and_apply(self):
        def write_upper(artifact, path, suffix=""):
            return [asset_io.write_file(path, artifact.upper() + suffix)]

        content_transform.define_transform("test_text", "upper", write_upper)

        with tempfile.TemporaryDirectory() as tmpdir:
            written = content_transform.apply_transform(
                "test_text", "upper", "trend", Path(tmpdir) / "out.txt", suffix="!"
            )
            assert written[0].read_text() == "TREND!"
        assert "test_text:upper" in content_transform.list_transforms("test_text")

    def test_unknown_format(self):
        with pytest.raises(UnsupportedFormat):
            content_transform.apply_transform("test_text", "pdf", "x", Path("unused"))


class TestStageRunner:
    """Test stage_runner module."""

    def test_stages_run_in_order(self):
        def first(context):
            context['value'] = 1
            return 'one'

        def second(context):
            context['value'] += 1
            return context['value']

        stage_runner.stage_plan("test_plan").add('first', first, "First").add('second', second)

        context = stage_runner.run_plan("test_plan", {}, scope="en")
        assert context['value'] == 2
        assert context['results'] == {'first': 'one', 'second': 2}
        assert stage_runner.get_plan("test_plan").stage_names() == ['first', 'second']

    def test_only_runs_selected_stages(self):
        calls = []
        plan = stage_runner.stage_plan("test_selected")
        plan.add('a', lambda c: calls.append('a'))
        plan.add('b', lambda c: calls.append('b'))

        plan.run({}, only=['b'])
        assert calls == ['b']

    def test_duplicate_stage(self):
        plan = stage_runner.stage_plan("test_duplicate").add('a', lambda c: None)
        with pytest.raises(ValueError):
            plan.add('a', lambda c: None)

    def test_failure_is_stage_tagged(self):
        def broken(context):
            raise EmptyGraph("graph has no nodes")

        stage_runner.stage_plan("test_failing").add('cluster', broken)

        with pytest.raises(StageError) as info:
            stage_runner.run_plan("test_failing", {}, scope="fr")
        assert str(info.value) == "[fr:cluster] graph has no nodes"
        assert isinstance(info.value.__cause__, EmptyGraph)
        assert info.value.exit_code == 3

    def test_unknown_plan(self):
        with pytest.raises(KeyError):
            stage_runner.run_plan("test_missing", {})

    def test_language_plan_registered(self):
        import wikitrends.pipeline  # noqa: F401
        assert stage_runner.get_plan("language_pipeline").stage_names() == [
            'ingest', 'detect', 'cluster', 'keywords', 'label', 'trends',
        ]


class TestJobIdentity:
    """Test job_identity module."""

    def test_create_job(self):
        job = job_identity.create_job("test_job", {"scope": "en"})

        assert job.name == "test_job"
        assert job.params["scope"] == "en"
        assert job.id is not None
        assert job.status == "created"

    def test_log_execution(self):
        job = job_identity.create_job("test_job", {})

        assert job_identity.log_job_execution(job.id, "ingest", "started")
        assert job_identity.log_job_execution(job.id, "ingest", "completed", result={"pages": 3})

        job = job_identity.get_job(job.id)
        assert len(job.executions) == 2
        assert job.status == "completed"
        assert job.to_dict()['executions'][1]['result'] == {"pages": 3}

    def test_failed_status(self):
        job = job_identity.create_job("test_job", {})
        job_identity.log_job_execution(job.id, "detect", "failed", error="boom")
        assert job_identity.get_job(job.id).status == "failed"

    def test_unknown_job(self):
        assert job_identity.log_job_execution("nope", "ingest", "started") is False

    def test_plan_records_stages(self):
        stage_runner.stage_plan("test_tracked").add('only', lambda c: {"pages": 3})
        stage_runner.run_plan("test_tracked", {}, scope="ru")

        job = job_identity.list_jobs("test_tracked")[-1]
        assert job.params == {'scope': 'ru'}
        assert [(e.stage, e.status) for e in job.executions] == [("only", "started"), ("only", "completed")]
        assert job.executions[-1].result == {"size": 1}


class TestErrors:
    """Test exit code mapping."""

    def test_exit_codes(self):
        assert exit_code_for(ConfigError("bad")) == 2
        assert exit_code_for(DataError("bad")) == 3
        assert exit_code_for(FileNotFoundError("x")) == 3
        assert exit_code_for(RuntimeError("x")) == 4
        assert StageError("label", "en", ConfigError("x")).exit_code == 2
        assert StageError("label", "en", KeyError("x")).exit_code == 4
