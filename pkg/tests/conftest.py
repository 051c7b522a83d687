import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from depfusion.config import load_config  # noqa: E402
from depfusion.ingest import parse_labels  # noqa: E402
from depfusion.pipeline import extract_dataset  # noqa: E402
from depfusion.synth import SynthConfig, synth_generate  # noqa: E402

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion covered by a test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    n = getattr(report, "criterion", None)
    if n is None:
        return
    key, text = n
    ok = _criteria.get(key, (text, True))[1] and report.outcome == "passed"
    _criteria[key] = (text, ok)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria):
        text, ok = _criteria[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {text}")


@pytest.fixture(scope="session")
def small_synth(tmp_path_factory):
    """A 40-session synthetic tree with audio informative, and its extracted Dataset."""
    root = tmp_path_factory.mktemp("synth_small")
    synth_generate(SynthConfig(n_sessions=40, seed=3, n_audio_frames=40, n_video_frames=5), root)
    cfg = load_config(root / "depfusion.cfg")
    records = parse_labels((root / "labels.csv").read_text())
    return root, cfg, extract_dataset(cfg, records)
