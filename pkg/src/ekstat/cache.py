"""Disk + memory cache of joint histograms keyed by (x, w).

Directory resolution: explicit argument, then the EK_CACHE_DIR environment
variable, then ~/.cache/ekstat.  One file per key, named ekh_x{x}_w{w}.bin
in the binary cache format of the sieve module.
"""

from __future__ import annotations

import logging
import os
import threading
import time
from pathlib import Path

from .errors import CacheFormatError, CacheMissError
from .sieve import (
    DEFAULT_SEGMENT_LEN,
    JointHistogram,
    SieveConfig,
    build_histogram,
    load_histogram,
    save_histogram,
)

log = logging.getLogger(__name__)

ENV_CACHE_DIR = "EK_CACHE_DIR"


def cache_dir(explicit: str | os.PathLike | None = None) -> Path:
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get(ENV_CACHE_DIR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "ekstat"


def histogram_path(directory: Path, x: int, w: int) -> Path:
    return directory / f"ekh_x{x}_w{w}.bin"


class HistogramStore:
    """Loads, builds and memoizes histograms; safe for concurrent readers."""

    def __init__(self, directory: str | os.PathLike | None = None,
                 memory_slots: int = 16):
        self.directory = cache_dir(directory)
        self.memory_slots = memory_slots
        self._memory: dict[tuple[int, int], JointHistogram] = {}
        self._lock = threading.Lock()

    def path_for(self, x: int, w: int) -> Path:
        return histogram_path(self.directory, x, w)

    def get(self, x: int, w: int, build: bool = True,
            segment_len: int = DEFAULT_SEGMENT_LEN, threads: int = 1,
            rebuild: bool = False):
        """Return (histogram, built, elapsed_seconds, path).

        `build=False` turns a cold cache into a CacheMissError instead of a
        sieve run; `rebuild=True` forces a fresh sieve even on a warm cache.
        """
        key = (x, w)
        path = self.path_for(x, w)
        with self._lock:
            if not rebuild:
                hist = self._memory.get(key)
                if hist is not None:
                    return hist, False, 0.0, path
                if path.exists():
                    hist = load_histogram(path)
                    if (hist.x, hist.w) != key:
                        raise CacheFormatError(
                            f"{path}: file claims (x={hist.x}, w={hist.w})")
                    self._remember(key, hist)
                    return hist, False, 0.0, path
            if not build:
                raise CacheMissError(
                    f"no cached histogram for x={x}, w={w} at {path} "
                    "and building was not permitted")
            start = time.perf_counter()
            hist = build_histogram(SieveConfig(x=x, w=w, segment_len=segment_len,
                                               threads=threads))
            elapsed = time.perf_counter() - start
            self.directory.mkdir(parents=True, exist_ok=True)
            save_histogram(hist, path)
            log.info("sieved x=%d w=%d in %.2fs -> %s", x, w, elapsed, path)
            self._remember(key, hist)
            return hist, True, elapsed, path

    def _remember(self, key, hist) -> None:
        if len(self._memory) >= self.memory_slots:
            self._memory.pop(next(iter(self._memory)))
        self._memory[key] = hist
