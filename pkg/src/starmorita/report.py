"""Check reports shared by the verification routines and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"


@dataclass
class Check:
    name: str
    verdict: str
    witness: Any = None


@dataclass
class Report:
    """Ordered list of named checks.

    ``exit_code`` is 0 when every entry passes, 2 when something is unknown
    and nothing failed, and 1 otherwise.
    """

    title: str = ""
    checks: list = field(default_factory=list)

    def add(self, name: str, ok, witness=None) -> Check:
        if ok is None:
            verdict = UNKNOWN
        elif isinstance(ok, str):
            verdict = ok
        else:
            verdict = PASS if ok else FAIL
        c = Check(name, verdict, witness)
        self.checks.append(c)
        return c

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.verdict, c.witness))

    @property
    def ok(self) -> bool:
        return all(c.verdict == PASS for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if c.verdict == FAIL]

    @property
    def exit_code(self) -> int:
        verdicts = {c.verdict for c in self.checks}
        if FAIL in verdicts:
            return 1
        if UNKNOWN in verdicts:
            return 2
        return 0

    def verdict(self, name: str) -> str:
        for c in self.checks:
            if c.name == name:
                return c.verdict
        raise KeyError(name)

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        lines = [self.title] if self.title else []
        for c in self.checks:
            lines.append(f"{c.name}: {c.verdict}" + (f" ({c.witness})" if c.witness is not None else ""))
        return "\n".join(lines)
