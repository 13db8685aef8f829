import os
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

# Full-scale tests read 10^8-digit files named <constant>.txt from here.
DIGIT_DIR = Path(os.environ.get("DIGITLAW_DATA_DIR", Path.home() / "digits"))
FULL_SCALE_DIGITS = 10**8


def digit_file(constant: str) -> Path:
    path = DIGIT_DIR / f"{constant}.txt"
    if not path.is_file():
        pytest.skip(f"{path} not present; run scripts/make_digit_files.py")
    return path


@pytest.fixture
def tmp_digit_file(tmp_path):
    def make(text, name="digits.txt"):
        p = tmp_path / name
        p.write_bytes(text.encode() if isinstance(text, str) else text)
        return p

    return make


# --- per-criterion report for the acceptance suite ----------------------------

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            num, title = mark.args
            _CRITERIA.setdefault(num, {"title": title, "outcomes": [], "notes": []})


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    mark = next((m for m in report.keywords if m.startswith("criterion_")), None)
    if mark is None:
        return
    num = int(mark.split("_")[1])
    entry = _CRITERIA[num]
    entry["outcomes"].append(report.outcome)
    for name, text in report.user_properties:
        if name == "detail":
            entry["notes"].append(text)


@pytest.fixture
def detail(request):
    """Record a one-line measurement shown next to the criterion verdict."""

    def add(text):
        request.node.user_properties.append(("detail", text))

    return add


def pytest_itemcollected(item):
    mark = item.get_closest_marker("criterion")
    if mark:
        item.keywords[f"criterion_{mark.args[0]}"] = True


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        entry = _CRITERIA[num]
        outs = entry["outcomes"]
        if not outs:
            verdict = "NOT RUN"
        elif "failed" in outs:
            verdict = "FAIL"
        elif all(o == "skipped" for o in outs):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        counts = ", ".join(f"{outs.count(o)} {o}" for o in ("passed", "failed", "skipped") if outs.count(o))
        tr.write_line(f"criterion {num}: {verdict}  {entry['title']}  ({counts})")
        for note in entry["notes"]:
            tr.write_line(f"    {note}")
