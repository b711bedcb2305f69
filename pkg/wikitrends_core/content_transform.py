"""
Content Transform - Registry of artifact writers keyed by (kind, format)
FROZEN MODULE - Pure stdlib
"""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from .errors import UnsupportedFormat

Writer = Callable[..., List[Path]]


class Transform:
    """Writer for one artifact kind in one output format."""

    def __init__(self, kind: str, fmt: str, func: Writer, description: str = ""):
        self.kind = kind
        self.format = fmt
        self.func = func
        self.description = description

    @property
    def name(self) -> str:
        return f"{self.kind}:{self.format}"

    def apply(self, artifact: Any, path: Path, **options: Any) -> List[Path]:
        """Write ``artifact`` and return the files produced."""
        return self.func(artifact, Path(path), **options)


class TransformRegistry:
    """Registry for transforms."""

    def __init__(self):
        self._transforms: Dict[Tuple[str, str], Transform] = {}

    def register(self, transform: Transform) -> None:
        self._transforms[(transform.kind, transform.format)] = transform

    def get(self, kind: str, fmt: str) -> Optional[Transform]:
        return self._transforms.get((kind, fmt))

    def list(self, kind: Optional[str] = None) -> List[str]:
        return sorted(t.name for t in self._transforms.values() if kind is None or t.kind == kind)

    def apply(self, kind: str, fmt: str, artifact: Any, path: Path, **options: Any) -> List[Path]:
        transform = self.get(kind, fmt)
        if not transform:
            raise UnsupportedFormat(f"no writer for {kind} as '{fmt}'")
        return transform.apply(artifact, path, **options)


# Global registry
_registry = TransformRegistry()


def define_transform(kind: str, fmt: str, func: Writer, description: str = "") -> Transform:
    """
    Register a writer.

    Args:
        kind: Artifact kind (trends, graph, keywords, ...)
        fmt: Output format name (json, csv, gexf, ...)
        func: ``func(artifact, path, **options) -> [written paths]``
        description: Human readable description
    """
    transform = Transform(kind, fmt, func, description)
    _registry.register(transform)
    return transform


def apply_transform(kind: str, fmt: str, artifact: Any, path: Path, **options: Any) -> List[Path]:
    """Write an artifact in the requested format."""
    return _registry.apply(kind, fmt, artifact, path, **options)


def list_transforms(kind: Optional[str] = None) -> List[str]:
    """List registered ``kind:format`` names."""
    return _registry.list(kind)
