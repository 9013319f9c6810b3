from __future__ import annotations

import os

# Keep tests hermetic as early as possible (at import time), before any
# package module reads a local .env.
os.environ["BERGMAN_TUBE_DISABLE_DOTENV"] = "1"

import pytest  # noqa: E402

from bergman_tube.models import SamplingPlan  # noqa: E402

_OVERRIDES = (
    "BERGMAN_TUBE_SEED",
    "BERGMAN_TUBE_SAMPLES",
    "BERGMAN_TUBE_CHUNK_SIZE",
    "BERGMAN_TUBE_THREADS",
    "BERGMAN_TUBE_LOG_LEVEL",
    "BERGMAN_TUBE_LOG_PATH",
)


@pytest.fixture(autouse=True)
def _clear_overrides(monkeypatch: pytest.MonkeyPatch) -> None:
    """Every test starts from the published defaults."""
    monkeypatch.setenv("BERGMAN_TUBE_DISABLE_DOTENV", "1")
    for name in _OVERRIDES:
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def small_plan() -> SamplingPlan:
    return SamplingPlan(samples=20_000, seed=7, chunk_size=4096)
