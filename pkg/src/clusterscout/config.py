"""Runtime configuration, sourced from environment variables.

Every knob has a default that works for a desk-scale dataset; the service
reads this once at startup and individual sessions may override per call
where the API allows it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    return float(raw) if raw else default


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return int(raw) if raw else default


@dataclass(frozen=True)
class Config:
    bind_host: str = "127.0.0.1"
    bind_port: int = 8000
    max_upload_bytes: int = 10 * 1024 * 1024
    top_f: int = 5
    # Fraction of a numeric column's range used as the similarity threshold.
    eps_fraction: float = 0.05
    default_seed: int = 7
    # Spectral candidates need a dense eigendecomposition; past this many
    # rows they are dropped from the model space.
    spectral_max_rows: int = 500


def load_config() -> Config:
    return Config(
        bind_host=os.environ.get("CLUSTERSCOUT_HOST", Config.bind_host),
        bind_port=_env_int("CLUSTERSCOUT_PORT", Config.bind_port),
        max_upload_bytes=_env_int("CLUSTERSCOUT_MAX_UPLOAD_BYTES", Config.max_upload_bytes),
        top_f=_env_int("CLUSTERSCOUT_TOP_F", Config.top_f),
        eps_fraction=_env_float("CLUSTERSCOUT_EPS_FRACTION", Config.eps_fraction),
        default_seed=_env_int("CLUSTERSCOUT_SEED", Config.default_seed),
        spectral_max_rows=_env_int("CLUSTERSCOUT_SPECTRAL_MAX_ROWS", Config.spectral_max_rows),
    )
