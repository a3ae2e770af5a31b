"""Segmented streaming sieve producing the joint histogram of
(omega(n), omega(n-1, w), omega(n-1)) for 2 <= n <= x.

The sieve keeps a residual-cofactor array per segment and divides out full
prime powers, so every count is exact (no log-accumulation heuristics).
A completed histogram is a 64x64x64 table of 64-bit counters; everything
else in the package is a marginal or partial sum of it.
"""

from __future__ import annotations

import logging
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .crc64 import crc64
from .errors import (
    CacheChecksumError,
    CacheFormatError,
    CacheTruncatedError,
    ConfigurationError,
    PreconditionError,
)

log = logging.getLogger(__name__)

DIM = 64                      # histogram side length, fixed by the file format
X_MAX = 10 ** 10              # residual cofactors must fit comfortably in int64
BASIS_LIMIT_MAX = 10 ** 9
DEFAULT_SEGMENT_LEN = 1 << 22
MIN_SEGMENT_LEN = 1 << 10

MAGIC = b"EKH1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQQHHHH")   # magic, version, x, w, dims*3, reserved
_FILE_SIZE = _HEADER.size + DIM ** 3 * 8 + 8


@dataclass(frozen=True)
class PrimeBasis:
    """All primes up to `limit`, ascending, as an immutable int64 array."""

    limit: int
    primes: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)


@dataclass(frozen=True)
class SieveConfig:
    x: int
    w: int
    segment_len: int = DEFAULT_SEGMENT_LEN
    threads: int = 1

    def validate(self) -> None:
        if not 2 <= self.x <= X_MAX:
            raise ConfigurationError(f"x={self.x} out of range [2, {X_MAX}]")
        if not 2 <= self.w <= self.x:
            raise ConfigurationError(f"w={self.w} out of range [2, x={self.x}]")
        if self.segment_len < MIN_SEGMENT_LEN:
            raise ConfigurationError(
                f"segment_len={self.segment_len} below minimum {MIN_SEGMENT_LEN}")
        if self.threads < 1:
            raise ConfigurationError(f"threads={self.threads} must be >= 1")


@dataclass
class JointHistogram:
    """counts[k][l][m] = #{2 <= n <= x : omega(n)=k, omega(n-1,w)=l, omega(n-1)=m}."""

    x: int
    w: int
    counts: np.ndarray = field(repr=False)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointHistogram):
            return NotImplemented
        return (self.x == other.x and self.w == other.w
                and np.array_equal(self.counts, other.counts))


def build_prime_basis(limit: int) -> PrimeBasis:
    """Sieve of Eratosthenes over [2, limit]."""
    if not 2 <= limit <= BASIS_LIMIT_MAX:
        raise ConfigurationError(f"basis limit {limit} out of range [2, {BASIS_LIMIT_MAX}]")
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p::p] = False
    primes = np.flatnonzero(flags).astype(np.int64)
    primes.setflags(write=False)
    return PrimeBasis(limit=limit, primes=primes)


def paper_w(x: int) -> int:
    """Smoothness cutoff exp(log x / (log log x)^2), rounded and clamped to [16, x].

    At desk scale this lands on the lower clamp: the formula is asymptotic and
    only exceeds 16 once log x > 2.77 (log log x)^2.
    """
    if x < 16:
        raise ConfigurationError(f"x={x} too small for the w formula")
    lx = math.log(x)
    llx = math.log(lx)
    w = round(math.exp(lx / (llx * llx)))
    return max(16, min(w, x))


def _sieve_range(lo: int, hi: int, primes: np.ndarray, w: int):
    """Exact omega/omega_truncated arrays for n in [lo, hi), lo >= 1.

    Marks each small prime once for the distinct count and divides its full
    power out of a residual array; a residual exceeding 1 afterwards is a
    single prime > sqrt(hi-1).
    """
    size = hi - lo
    omega_full = np.zeros(size, dtype=np.uint8)
    omega_trunc = np.zeros(size, dtype=np.uint8)
    residual = np.arange(lo, hi, dtype=np.int64)
    top = math.isqrt(hi - 1)
    for p in primes[: int(np.searchsorted(primes, top, side="right"))]:
        p = int(p)
        start = ((lo + p - 1) // p) * p
        i0 = start - lo
        if i0 < size:
            omega_full[i0::p] += 1
            if p <= w:
                omega_trunc[i0::p] += 1
            residual[i0::p] //= p
        q = p * p
        while q <= hi - 1:
            s2 = ((lo + q - 1) // q) * q
            if s2 < hi:
                residual[s2 - lo::q] //= p
            q *= p
    big = residual > 1
    omega_full += big
    omega_trunc += big & (residual <= w)
    return omega_full, omega_trunc


def sieve_segment(lo: int, hi: int, basis: PrimeBasis, w: int):
    """Distinct prime factor counts (full and w-truncated) for n in [lo, hi)."""
    if not 2 <= lo < hi:
        raise PreconditionError(f"need 2 <= lo < hi, got [{lo}, {hi})")
    if basis.limit < math.isqrt(hi - 1):
        raise PreconditionError(
            f"basis limit {basis.limit} < isqrt({hi - 1}) = {math.isqrt(hi - 1)}")
    return _sieve_range(lo, hi, basis.primes, w)


def _range_histogram(lo: int, hi: int, primes: np.ndarray, w: int,
                     segment_len: int) -> np.ndarray:
    """Flat 64^3 histogram of the pairs (n, n-1) for n in [lo, hi).

    Sieves from lo-1 so the one-element lag across the range boundary is
    computed locally; n=2 pairs with omega(1) = 0.
    """
    hist = np.zeros(DIM ** 3, dtype=np.int64)
    seg_lo = lo
    while seg_lo < hi:
        seg_hi = min(seg_lo + segment_len, hi)
        omega, trunc = _sieve_range(seg_lo - 1, seg_hi, primes, w)
        if int(omega.max(initial=0)) >= DIM:
            raise PreconditionError("omega exceeds histogram dimension bound")
        k = omega[1:].astype(np.int32)
        ell = trunc[:-1].astype(np.int32)
        m = omega[:-1].astype(np.int32)
        cell = (k << 12) | (ell << 6) | m
        hist += np.bincount(cell, minlength=DIM ** 3)
        log.debug("segment [%d, %d) sieved", seg_lo, seg_hi)
        seg_lo = seg_hi
    return hist


def _range_histogram_task(args) -> np.ndarray:
    return _range_histogram(*args)


def build_histogram(cfg: SieveConfig) -> JointHistogram:
    """Sieve [2, x] and return the exact joint histogram.

    With threads > 1 the range splits into disjoint contiguous chunks whose
    partial histograms are merged by addition; the result is bit-identical
    to a single-threaded run for any segment_len.
    """
    cfg.validate()
    basis = build_prime_basis(max(2, math.isqrt(cfg.x)))
    lo, hi = 2, cfg.x + 1
    if cfg.threads == 1 or hi - lo <= cfg.segment_len:
        flat = _range_histogram(lo, hi, basis.primes, cfg.w, cfg.segment_len)
    else:
        chunks = []
        span = hi - lo
        per = -(-span // cfg.threads)
        per = max(per, cfg.segment_len)
        at = lo
        while at < hi:
            end = min(at + per, hi)
            chunks.append((at, end, basis.primes, cfg.w, cfg.segment_len))
            at = end
        flat = np.zeros(DIM ** 3, dtype=np.int64)
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            for part in pool.map(_range_histogram_task, chunks):
                flat += part
    counts = flat.reshape(DIM, DIM, DIM)
    counts.setflags(write=False)      # completed histograms are shareable
    return JointHistogram(x=cfg.x, w=cfg.w, counts=counts)


def save_histogram(h: JointHistogram, path) -> None:
    """Write the binary cache record: header, counts, CRC-64 trailer."""
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, h.x, h.w, DIM, DIM, DIM, 0)
    payload = np.ascontiguousarray(h.counts, dtype=np.int64).astype("<u8").tobytes()
    body = header + payload
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(struct.pack("<Q", crc64(body)))


def load_histogram(path) -> JointHistogram:
    """Read a cache record back, verifying layout and checksum."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _FILE_SIZE:
        raise CacheTruncatedError(
            f"{path}: {len(blob)} bytes, expected {_FILE_SIZE}")
    if len(blob) > _FILE_SIZE:
        raise CacheFormatError(f"{path}: trailing data beyond record")
    magic, version, x, w, d0, d1, d2, _ = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CacheFormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CacheFormatError(f"{path}: unsupported format version {version}")
    if (d0, d1, d2) != (DIM, DIM, DIM):
        raise CacheFormatError(f"{path}: unexpected dimensions {(d0, d1, d2)}")
    (stored,) = struct.unpack_from("<Q", blob, _FILE_SIZE - 8)
    if crc64(blob[:_FILE_SIZE - 8]) != stored:
        raise CacheChecksumError(f"{path}: checksum mismatch")
    counts = (np.frombuffer(blob, dtype="<u8", count=DIM ** 3, offset=_HEADER.size)
              .astype(np.int64).reshape(DIM, DIM, DIM))
    counts.setflags(write=False)
    return JointHistogram(x=x, w=w, counts=counts)
