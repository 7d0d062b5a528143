"""Per-check records shared by certificates, the verifier and the suites."""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one exact inequality or identity check."""

    name: str
    passed: bool
    detail: str = ""
    values: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "values": dict(self.values)}


def check(name: str, condition: bool, detail: str = "", **values: Any) -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(condition),
        detail=detail,
        values={k: str(v) for k, v in values.items()},
    )


def failures(results: Iterable[CheckResult]) -> List[CheckResult]:
    return [r for r in results if not r.passed]
