"""
Asset IO - File operations for pipeline artifacts
FROZEN MODULE - Pure stdlib, no external dependencies

Every writer goes through ``atomic_write`` (temp file in the target
directory, then ``os.replace``) so readers never observe half-written
artifacts.
"""

import csv
import gzip
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path
from typing import IO, Any, Dict, Iterable, Iterator, List, Optional, Sequence, Union

PathLike = Union[str, Path]


def atomic_write(path: PathLike, data: bytes) -> Path:
    """Write bytes to ``path`` atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def read_file(path: PathLike, encoding: str = 'utf-8') -> str:
    """Read text file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    return path.read_text(encoding=encoding)


def write_file(path: PathLike, content: str, encoding: str = 'utf-8') -> Path:
    """Write text file."""
    return atomic_write(path, content.encode(encoding))


def open_text(path: PathLike, encoding: str = 'utf-8') -> IO[str]:
    """Open a text file for reading, transparently decompressing ``.gz``."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    if path.suffix == '.gz':
        return io.TextIOWrapper(gzip.open(path, 'rb'), encoding=encoding, errors='replace')
    return path.open('r', encoding=encoding, newline='')


def iter_lines(path: PathLike, encoding: str = 'utf-8') -> Iterator[str]:
    """Yield lines with the trailing newline removed."""
    with open_text(path, encoding) as f:
        for line in f:
            yield line.rstrip('\r\n')


def read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    return path.read_bytes()


def write_bytes(path: PathLike, data: bytes) -> Path:
    return atomic_write(path, data)


def dumps_json(data: Any, indent: int = 2) -> str:
    """Deterministic JSON text: sorted keys, UTF-8 kept, trailing newline."""
    return json.dumps(data, indent=indent, ensure_ascii=False, sort_keys=True) + '\n'


def read_json(path: PathLike) -> Any:
    """Read JSON file."""
    return json.loads(read_file(path))


def write_json(path: PathLike, data: Any, indent: int = 2) -> Path:
    """Write JSON file."""
    return write_file(path, dumps_json(data, indent))


def read_jsonl(path: PathLike) -> Iterator[Dict[str, Any]]:
    """Yield one object per non-blank line."""
    for line in iter_lines(path):
        if line.strip():
            yield json.loads(line)


def write_jsonl(path: PathLike, rows: Iterable[Dict[str, Any]]) -> Path:
    lines = [json.dumps(row, ensure_ascii=False, sort_keys=True) for row in rows]
    return write_file(path, ''.join(line + '\n' for line in lines))


def read_csv(path: PathLike) -> List[Dict[str, Any]]:
    """Read CSV file as list of dictionaries."""
    with open_text(path) as f:
        reader = csv.DictReader(f)
        return list(reader)


def write_csv(
    path: PathLike,
    rows: Sequence[Dict[str, Any]],
    fieldnames: Optional[List[str]] = None,
) -> Path:
    """Write CSV file from list of dictionaries (header written even when empty)."""
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator='\n')
    writer.writeheader()
    writer.writerows(rows)
    return write_file(path, buffer.getvalue())


def sha256_file(path: PathLike) -> str:
    """Hex SHA-256 of a file's content."""
    digest = hashlib.sha256()
    with Path(path).open('rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()
