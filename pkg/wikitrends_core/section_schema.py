"""
Section Schema - Typed options for each config section
FROZEN MODULE - Pure stdlib

A section is a flat mapping of options. Checking a section reports every
problem at once so a config file can be fixed in one pass.
"""

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple, Type, Union

Kind = Union[Type, Tuple[Type, ...]]


class _Required:
    def __repr__(self) -> str:
        return "REQUIRED"


REQUIRED: Any = _Required()


@dataclass(frozen=True)
class Option:
    """One option of a section; ``default`` is ``REQUIRED`` when it has none."""
    name: str
    kind: Kind
    default: Any = REQUIRED
    doc: str = ""

    @property
    def required(self) -> bool:
        return self.default is REQUIRED

    @property
    def kinds(self) -> Tuple[Type, ...]:
        return self.kind if isinstance(self.kind, tuple) else (self.kind,)

    def problem(self, value: Any) -> Optional[str]:
        """Describe why ``value`` does not fit, or None. ``None`` always fits."""
        if value is None:
            return None
        fits = bool in self.kinds if isinstance(value, bool) else isinstance(value, self.kind)
        if fits:
            return None
        wanted = " or ".join(k.__name__ for k in self.kinds)
        return f"option '{self.name}' expects {wanted}, got {type(value).__name__}"


@dataclass(frozen=True)
class Section:
    name: str
    options: Tuple[Option, ...]
    doc: str = ""

    def option(self, name: str) -> Optional[Option]:
        return next((o for o in self.options if o.name == name), None)

    def problems(self, data: Dict[str, Any]) -> List[str]:
        found = [f"{self.name}: unknown option '{key}'" for key in data if self.option(key) is None]
        for opt in self.options:
            if opt.name not in data:
                if opt.required:
                    found.append(f"{self.name}: option '{opt.name}' is required")
                continue
            issue = opt.problem(data[opt.name])
            if issue:
                found.append(f"{self.name}: {issue}")
        return found

    def filled(self, data: Optional[Dict[str, Any]]) -> Dict[str, Any]:
        out = dict(data or {})
        for opt in self.options:
            if not opt.required:
                out.setdefault(opt.name, opt.default)
        return out


_sections: Dict[str, Section] = {}


def section(name: str, options: Iterable[Option], doc: str = "") -> Section:
    """Register (or replace) the section called ``name``."""
    defined = Section(name=name, options=tuple(options), doc=doc)
    _sections[name] = defined
    return defined


def get_section(name: str) -> Section:
    try:
        return _sections[name]
    except KeyError:
        raise KeyError(f"no config section named '{name}'") from None


def check_section(name: str, data: Dict[str, Any]) -> List[str]:
    """All problems of ``data`` as section ``name``; empty when it is valid."""
    return get_section(name).problems(data)


def fill_section(name: str, data: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """Copy of ``data`` with defaults for the optional options it leaves out."""
    return get_section(name).filled(data)
