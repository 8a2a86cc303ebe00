import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import time
from importlib.resources import files
from pathlib import Path

import pytest

from tweetlens.cli import main

PIPELINE = ("ingest", "analyze", "topics", "train", "explain", "ablate", "report")


def run_pipeline(out: Path, source: Path, seed: int = 1) -> float:
    """Run every CLI stage into ``out``; returns wall-clock seconds."""
    start = time.perf_counter()
    for stage in PIPELINE:
        argv = [stage, "--out", str(out), "--seed", str(seed)]
        if stage == "ingest":
            argv.insert(1, str(source))
        code = main(argv)
        assert code == 0, f"{stage} exited with {code}"
    return time.perf_counter() - start


@pytest.fixture(scope="session")
def fixture_path() -> Path:
    return Path(str(files("tweetlens") / "data" / "fixture_tweets.jsonl"))


@pytest.fixture(scope="session")
def pipeline_run(tmp_path_factory, fixture_path):
    """One full pipeline run on the bundled fixture, shared across test modules."""
    out = tmp_path_factory.mktemp("pipeline") / "out"
    seconds = run_pipeline(out, fixture_path)
    return out, seconds


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for the acceptance summary, then return the verdict."""
    def record(number, ok, detail):
        verdict = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        line = f"criterion {number}: {verdict}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
