"""Shared pytest wiring: acceptance criteria report one PASS/FAIL line each."""

import pytest

_CRITERIA = {}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.checks = []

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((name, bool(ok), detail))
        return bool(ok)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{name}={'ok' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
                 for name, ok, detail in self.checks]
        return f"criterion {self.number} [{status}] {self.title}: " + "; ".join(parts or ["did not complete"])

    def verify(self):
        failed = [f"{name}: {detail}" for name, ok, detail in self.checks if not ok]
        assert not failed, "; ".join(failed)


@pytest.fixture
def criterion():
    def make(number: int, title: str) -> Criterion:
        c = Criterion(number, title)
        _CRITERIA[number] = c
        return c
    return make


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number].line())
