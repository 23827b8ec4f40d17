import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_LINES = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LINES] = {}


@pytest.fixture
def acceptance(request):
    """record(n, ok, text) stores the verdict line of criterion n;
    note(n, text) adds an explanatory line under it."""
    store = request.config.stash[_LINES]

    class Recorder:
        @staticmethod
        def record(n, ok, text):
            store.setdefault(n, {"notes": []})["verdict"] = (bool(ok), text)

        @staticmethod
        def note(n, text):
            store.setdefault(n, {"notes": []})["notes"].append(text)

    return Recorder


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(_LINES, {})
    if not store:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(store):
        entry = store[n]
        if "verdict" in entry:
            ok, text = entry["verdict"]
            tr.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}")
        else:
            tr.write_line(f"criterion {n:>2}: NOT RUN")
        for t in entry["notes"]:
            tr.write_line(f"              {t}")
