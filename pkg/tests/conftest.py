import time
from contextlib import contextmanager

import pytest

_RESULTS = {}


class _Recorder:
    def __init__(self, key):
        self.key = key
        self.details = []

    def note(self, text):
        self.details.append(text)

    @contextmanager
    def timed(self, budget):
        """Time the block; fail the criterion if it overruns ``budget`` seconds."""
        start = time.perf_counter()
        ok = False
        try:
            yield self
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            within = elapsed < budget
            self.note(f"{elapsed:.2f}s (budget {budget:g}s)")
            _RESULTS[self.key] = (ok and within, "; ".join(self.details))
        assert within, f"took {elapsed:.2f}s, budget {budget:g}s"


@pytest.fixture
def criterion(request):
    """Recorder for one acceptance criterion, keyed by the ``criterion`` marker."""
    marker = request.node.get_closest_marker("criterion")
    key = marker.args[0] if marker else request.node.name
    return _Recorder(key)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS, key=lambda k: (int(k.split()[0].rstrip("abc")), k)):
        ok, detail = _RESULTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  [{detail}]")
