"""
Job Identity - Track pipeline runs and their stage executions
FROZEN MODULE - Pure stdlib

Records are kept in memory for the lifetime of the process; they feed
logging and the CLI summary, never the exported artifacts.
"""

import logging
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


def _now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class JobExecution:
    """One stage execution log entry."""
    stage: str
    timestamp: datetime
    status: str  # started, completed, failed
    result: Optional[Any] = None
    error: Optional[str] = None


@dataclass
class Job:
    """A tracked unit of work, e.g. one language of one pipeline run."""
    id: str
    name: str
    params: Dict[str, Any]
    created_at: datetime
    executions: List[JobExecution] = field(default_factory=list)

    @property
    def status(self) -> str:
        if any(e.status == "failed" for e in self.executions):
            return "failed"
        if self.executions and all(e.status == "completed" for e in self.latest().values()):
            return "completed"
        return "running" if self.executions else "created"

    def latest(self) -> Dict[str, JobExecution]:
        """Most recent execution entry per stage."""
        out: Dict[str, JobExecution] = {}
        for e in self.executions:
            out[e.stage] = e
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'name': self.name,
            'params': self.params,
            'created_at': self.created_at.isoformat(),
            'status': self.status,
            'executions': [
                {
                    'stage': e.stage,
                    'timestamp': e.timestamp.isoformat(),
                    'status': e.status,
                    'result': e.result,
                    'error': e.error,
                }
                for e in self.executions
            ],
        }


class JobRegistry:
    """Thread-safe registry for jobs; languages run in worker threads."""

    def __init__(self):
        self._jobs: Dict[str, Job] = {}
        self._lock = threading.Lock()

    def create(self, name: str, params: Dict[str, Any]) -> Job:
        job = Job(id=str(uuid.uuid4()), name=name, params=params, created_at=_now())
        with self._lock:
            self._jobs[job.id] = job
        return job

    def get(self, job_id: str) -> Optional[Job]:
        with self._lock:
            return self._jobs.get(job_id)

    def log_execution(
        self,
        job_id: str,
        stage: str,
        status: str,
        result: Optional[Any] = None,
        error: Optional[str] = None,
    ) -> bool:
        with self._lock:
            job = self._jobs.get(job_id)
            if not job:
                return False
            job.executions.append(JobExecution(
                stage=stage, timestamp=_now(), status=status, result=result, error=error
            ))
        if status == "failed":
            logger.error("%s/%s failed: %s", job.name, stage, error)
        else:
            logger.debug("%s/%s %s", job.name, stage, status)
        return True

    def list_all(self) -> List[Job]:
        with self._lock:
            return list(self._jobs.values())

    def list_by_name(self, name: str) -> List[Job]:
        return [j for j in self.list_all() if j.name == name]


# Global registry
_registry = JobRegistry()


def create_job(name: str, params: Dict[str, Any]) -> Job:
    """Create a new job."""
    return _registry.create(name, params)


def get_job(job_id: str) -> Optional[Job]:
    """Get job by ID."""
    return _registry.get(job_id)


def log_job_execution(
    job_id: str,
    stage: str,
    status: str,
    result: Optional[Any] = None,
    error: Optional[str] = None,
) -> bool:
    """Log a stage execution for a job."""
    return _registry.log_execution(job_id, stage, status, result, error)


def list_jobs(name: Optional[str] = None) -> List[Job]:
    """List all jobs, optionally filtered by name."""
    if name:
        return _registry.list_by_name(name)
    return _registry.list_all()
