import math

import numpy as np
import pytest

from ekstat.sieve import DIM, JointHistogram, SieveConfig, build_histogram

ORACLE_LIMIT = 10 ** 5


def distinct_prime_factors(n: int) -> list[int]:
    """Trial division, the independent oracle for everything sieve-shaped."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@pytest.fixture(scope="session")
def factor_table():
    """factor_table[n] = sorted distinct prime factors of n, for n <= 1e5."""
    table = [[] for _ in range(ORACLE_LIMIT + 1)]
    for n in range(2, ORACLE_LIMIT + 1):
        table[n] = distinct_prime_factors(n)
    return table


def oracle_histogram(x: int, w: int, table) -> np.ndarray:
    """Joint histogram straight from per-n factorizations."""
    counts = np.zeros((DIM, DIM, DIM), dtype=np.int64)
    for n in range(2, x + 1):
        k = len(table[n])
        prev = table[n - 1]
        m = len(prev)
        ell = sum(1 for p in prev if p <= w)
        counts[k][ell][m] += 1
    return counts


@pytest.fixture(scope="session")
def hist_cache():
    """Shared builder so tests reuse identical histograms."""
    cache: dict[tuple[int, int], JointHistogram] = {}

    def get(x: int, w: int, threads: int = 1) -> JointHistogram:
        key = (x, w)
        if key not in cache:
            cache[key] = build_histogram(
                SieveConfig(x=x, w=w, threads=threads))
        return cache[key]

    return get


@pytest.fixture(scope="session")
def hist_1e4_w100(hist_cache):
    return hist_cache(10 ** 4, 100)


@pytest.fixture(scope="session")
def euler_cfg():
    from ekstat import analytic
    return analytic.make_config(prime_cutoff=10 ** 5)


@pytest.fixture(scope="session")
def euler_cfg_double():
    from ekstat import analytic
    return analytic.make_config(prime_cutoff=2 * 10 ** 5)


def erf_series(x: float) -> float:
    """erf by its Taylor series with compensated summation; good to ~1e-15
    for |x| <= 3, which covers every use in these tests."""
    parts = []
    term = x
    n = 0
    while True:
        parts.append(term / (2 * n + 1))
        n += 1
        term = -term * x * x / n
        if abs(term) < 1e-22 or n > 80:
            break
    return 2.0 / math.sqrt(math.pi) * math.fsum(parts)


def phi_oracle(y: float) -> float:
    return 0.5 * (1.0 + erf_series(y / math.sqrt(2.0)))
