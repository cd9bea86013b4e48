from __future__ import annotations

import time
from contextlib import contextmanager

import pytest

_LINES: list = []


class _Recorder:
    """Records one PASS/FAIL line per acceptance criterion, with a runtime cap."""

    @contextmanager
    def __call__(self, number: int, title: str, limit: float):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            line = f"criterion {number:2d} FAIL  {title} ({time.perf_counter() - start:.1f}s): {exc!r}"
            _LINES.append(line)
            print(line)
            raise
        elapsed = time.perf_counter() - start
        ok = elapsed < limit
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title} ({elapsed:.2f}s, limit {limit:g}s)"
        _LINES.append(line)
        print(line)
        assert ok, f"runtime {elapsed:.1f}s exceeds {limit}s"


@pytest.fixture
def criterion():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES):
            terminalreporter.write_line(line)
