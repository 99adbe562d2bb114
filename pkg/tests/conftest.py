import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[int, str] = {}


class Criterion:
    """Records one pass/fail line per acceptance criterion."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.details: list[str] = []
        _CRITERIA[number] = f"criterion {number} FAIL: {title} (did not finish)"

    def note(self, text: str) -> None:
        self.details.append(text)

    def done(self, ok: bool) -> None:
        tail = f" [{'; '.join(self.details)}]" if self.details else ""
        _CRITERIA[self.number] = f"criterion {self.number} {'PASS' if ok else 'FAIL'}: {self.title}{tail}"
        print(_CRITERIA[self.number])


@pytest.fixture
def criterion():
    return Criterion


@pytest.fixture
def rng():
    return random.Random(20240601)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[k])
