import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from instboot.game import preset  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def fav():
    return preset("favourable")


@pytest.fixture
def unfav():
    return preset("unfavourable")


# --- acceptance report -------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    detail = dict(item.user_properties).get("detail", "")
    if not rep.passed and not detail:
        detail = rep.longreprtext.strip().splitlines()[-1] if rep.longreprtext else "error"
    _ACCEPTANCE[mark.args[0]] = (rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
