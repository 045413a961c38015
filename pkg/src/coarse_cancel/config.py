"""Process-wide numeric settings: comparison tolerance and worker count."""

from __future__ import annotations

import contextlib
from dataclasses import dataclass


@dataclass
class Settings:
    tolerance: float = 1e-9
    threads: int = 1

    def validate(self) -> None:
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if int(self.threads) < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


SETTINGS = Settings()


def tol(value: float | None = None) -> float:
    """Return ``value`` if given, else the global comparison tolerance."""
    return SETTINGS.tolerance if value is None else float(value)


def threads(value: int | None = None) -> int:
    return SETTINGS.threads if value is None else max(1, int(value))


@contextlib.contextmanager
def override(*, tolerance: float | None = None, threads: int | None = None):
    old = Settings(SETTINGS.tolerance, SETTINGS.threads)
    if tolerance is not None:
        SETTINGS.tolerance = float(tolerance)
    if threads is not None:
        SETTINGS.threads = int(threads)
    try:
        SETTINGS.validate()
        yield SETTINGS
    finally:
        SETTINGS.tolerance, SETTINGS.threads = old.tolerance, old.threads


def named_rng(seed: int, name: str):
    """Independent numpy generator for the stream ``name`` under ``seed``.

    Streams are keyed by a CRC of the name so adding a new consumer never
    shifts the draws seen by existing ones.
    """
    import zlib

    import numpy as np

    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(key,))))


def parallel_map(fn, items, workers: int | None = None):
    """Ordered map over ``items``; uses a thread pool when more than one worker is configured."""
    items = list(items)
    workers = threads(workers)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
