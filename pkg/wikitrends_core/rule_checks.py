"""
Rule Checks - Named checks over a whole document
FROZEN MODULE - Pure stdlib
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from .errors import ConfigError


@dataclass
class ValidationResult:
    """Errors block a run, warnings are only logged."""
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.errors

    @classmethod
    def ok(cls) -> 'ValidationResult':
        return cls()

    @classmethod
    def fail(cls, *errors: str) -> 'ValidationResult':
        return cls(errors=list(errors))

    def merge(self, other: 'ValidationResult', soft: bool = False) -> None:
        """Fold ``other`` in; with ``soft`` its errors count as warnings."""
        (self.warnings if soft else self.errors).extend(other.errors)
        self.warnings.extend(other.warnings)

    def raise_for_errors(self, context: str = "configuration") -> None:
        if self.errors:
            raise ConfigError(f"invalid {context}: " + "; ".join(self.errors), self.errors)


Check = Callable[[Any], ValidationResult]


@dataclass(frozen=True)
class Rule:
    name: str
    check: Check
    description: str = ""
    soft: bool = False


_rules: Dict[str, Rule] = {}


def rule(name: str, description: str = "", soft: bool = False) -> Callable[[Check], Check]:
    """Decorator registering ``check`` under ``name``.

    Rules are grouped by dotted prefix, e.g. every ``config.*`` rule runs
    against a loaded pipeline config.
    """
    def register(check: Check) -> Check:
        _rules[name] = Rule(name, check, description, soft)
        return check
    return register


def get_rule(name: str) -> Optional[Rule]:
    return _rules.get(name)


def list_rules(prefix: str = "") -> List[str]:
    return sorted(n for n in _rules if n.startswith(prefix))


def run_rules(data: Any, prefix: str) -> ValidationResult:
    """Run every rule under ``prefix`` in name order and merge the results."""
    result = ValidationResult()
    for name in list_rules(prefix):
        found = _rules[name]
        result.merge(found.check(data), soft=found.soft)
    return result
