"""
Stage Runner - Ordered stage plans with stage-tagged failures
FROZEN MODULE - Pure stdlib

A plan threads one mutable context dict through its stages. Each stage's
return value lands in ``context['results'][stage]``; a stage that raises is
re-raised as ``StageError`` tagged with the stage and the run's scope
(the language being processed).
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, Optional

from . import job_identity
from .errors import StageError

logger = logging.getLogger(__name__)

StageFunc = Callable[[Dict[str, Any]], Any]


@dataclass(frozen=True)
class Stage:
    name: str
    func: StageFunc
    description: str = ""


class StagePlan:
    """Stages in the order they were added."""

    def __init__(self, name: str, description: str = ""):
        self.name = name
        self.description = description
        self._stages: List[Stage] = []

    def add(self, name: str, func: StageFunc, description: str = "") -> 'StagePlan':
        if name in self.stage_names():
            raise ValueError(f"{self.name}: stage '{name}' added twice")
        self._stages.append(Stage(name, func, description))
        return self

    def stage_names(self) -> List[str]:
        return [s.name for s in self._stages]

    def run(
        self,
        context: Dict[str, Any],
        scope: str = "",
        only: Optional[Iterable[str]] = None,
    ) -> Dict[str, Any]:
        """Run the stages (those named in ``only`` when given) against ``context``."""
        wanted = None if only is None else set(only)
        tag = scope or self.name
        job = job_identity.create_job(self.name, {'scope': scope})
        results = context.setdefault('results', {})

        for stage in self._stages:
            if wanted is not None and stage.name not in wanted:
                continue
            job_identity.log_job_execution(job.id, stage.name, "started")
            try:
                value = stage.func(context)
            except Exception as e:
                job_identity.log_job_execution(job.id, stage.name, "failed", error=str(e))
                raise StageError(stage.name, tag, e) from e
            results[stage.name] = value
            job_identity.log_job_execution(job.id, stage.name, "completed", result=_brief(value))
            logger.info("%s: stage %s done", tag, stage.name)
        return context


def _brief(value: Any) -> Any:
    """JSON-friendly stand-in for a stage result in the run log."""
    if value is None or isinstance(value, (str, int, float, bool)):
        return value
    if isinstance(value, (list, tuple, set, dict)):
        return {'size': len(value)}
    return type(value).__name__


_plans: Dict[str, StagePlan] = {}


def stage_plan(name: str, description: str = "") -> StagePlan:
    """Create an empty plan registered under ``name``, replacing any previous one."""
    plan = StagePlan(name, description)
    _plans[name] = plan
    return plan


def get_plan(name: str) -> StagePlan:
    try:
        return _plans[name]
    except KeyError:
        raise KeyError(f"no stage plan named '{name}'") from None


def run_plan(name: str, context: Dict[str, Any], scope: str = "",
             only: Optional[Iterable[str]] = None) -> Dict[str, Any]:
    return get_plan(name).run(context, scope=scope, only=only)
