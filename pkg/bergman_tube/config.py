import os
from functools import lru_cache
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load .env from the repository root (parent of the `bergman_tube` package) first,
# then the cwd .env if it is a different file. override=True so a project .env
# wins over stale shell exports when reproducing a published run.
_repo_root = Path(__file__).resolve().parent.parent
_disable_dotenv = os.getenv("BERGMAN_TUBE_DISABLE_DOTENV", "").strip().lower() in ("1", "true", "yes")
if not _disable_dotenv:
    _env_candidates = [_repo_root / ".env", Path.cwd() / ".env"]
    _seen: set[Path] = set()
    for _p in _env_candidates:
        _rp = _p.resolve()
        if _rp in _seen:
            continue
        _seen.add(_rp)
        if _p.is_file():
            load_dotenv(dotenv_path=_p, override=True)

# Published default seed; every report header repeats it.
DEFAULT_SEED = 271828

DEFAULT_PATH_PARAMETERS = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0]


class Settings(BaseModel):
    """Runtime configuration loaded from environment variables."""

    service_name: str = "bergman-tube"

    seed: int = Field(default=DEFAULT_SEED, ge=0)
    samples: int = Field(default=1_000_000, ge=1)
    # Samples per counter-based stream; fixes the reduction tree, so changing it
    # changes results (unlike `threads`).
    chunk_size: int = Field(default=65_536, ge=1)
    threads: int = Field(default=1, ge=1)

    # Defaults printed in every report header.
    n: int = 1
    alpha: float = 0.0
    x_bound: float = 2.0
    yprime_bound: float = 1.0
    h_min: float = 0.1
    h_max: float = 10.0
    lattice_r: float = 0.5
    probe_density: int = 20_000

    path_parameters: List[float] = Field(default_factory=lambda: list(DEFAULT_PATH_PARAMETERS))
    vanishing_epsilon: float = 1e-3
    growth_factor: float = 10.0
    verdict_berezin_t: float = 3.0

    # --quick: samples divided by quick_sample_divisor, tolerances multiplied.
    quick_sample_divisor: int = 10
    quick_tolerance_factor: float = 3.0

    log_level: str = "WARNING"
    log_path: Optional[str] = None


@lru_cache(maxsize=1)
def _base_settings() -> Settings:
    """
    Base settings lookup.

    NOTE: environment values are *not* cached here; `get_settings` below
    re-creates Settings each time from the current environment. This helper
    only stores defaults.
    """

    return Settings()


def _int_env(name: str, default: int) -> int:
    raw = (os.getenv(name) or "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        return default


def get_settings() -> Settings:
    """
    Return Settings built from the *current* environment.

    Tests mutate os.environ through monkeypatch, so we read directly from the
    environment on each call instead of caching.
    """

    base = _base_settings()
    seed = _int_env("BERGMAN_TUBE_SEED", base.seed)
    samples = _int_env("BERGMAN_TUBE_SAMPLES", base.samples)
    chunk_size = _int_env("BERGMAN_TUBE_CHUNK_SIZE", base.chunk_size)
    threads = max(1, _int_env("BERGMAN_TUBE_THREADS", base.threads))
    log_level = (os.getenv("BERGMAN_TUBE_LOG_LEVEL") or base.log_level).strip().upper()
    log_path = (os.getenv("BERGMAN_TUBE_LOG_PATH") or "").strip() or None

    return base.model_copy(
        update={
            "seed": seed,
            "samples": samples,
            "chunk_size": chunk_size,
            "threads": threads,
            "log_level": log_level,
            "log_path": log_path,
        }
    )
