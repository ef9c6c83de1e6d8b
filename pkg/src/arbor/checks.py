"""Named pass/fail bookkeeping shared by the validators."""
from __future__ import annotations

from dataclasses import dataclass, field


class ValidationFailure(AssertionError):
    pass


@dataclass
class Report:
    subject: str
    counts: dict[str, int] = field(default_factory=dict)
    failures: list[tuple[str, str]] = field(default_factory=list)

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.counts[name] = self.counts.get(name, 0) + 1
        if not ok:
            self.failures.append((name, detail))
        return ok

    @property
    def ok(self) -> bool:
        return not self.failures

    def failed(self, name: str) -> bool:
        return any(n == name for n, _ in self.failures)

    def merge(self, other: "Report") -> "Report":
        for k, v in other.counts.items():
            self.counts[k] = self.counts.get(k, 0) + v
        self.failures.extend(other.failures)
        return self

    def raise_if_failed(self) -> None:
        if self.failures:
            name, detail = self.failures[0]
            raise ValidationFailure(
                f"{self.subject}: {len(self.failures)} failed checks; first: {name}: {detail}")

    def summary(self) -> dict:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "checks": dict(sorted(self.counts.items())),
            "failures": [list(f) for f in self.failures[:20]],
        }
