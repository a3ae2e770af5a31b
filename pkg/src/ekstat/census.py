"""Empirical statistics over a JointHistogram: class counts, threshold
counts, the normalized distribution of omega(n-1) with its KS distance to
the normal CDF, the large-prime tail statistic, and moments.

All of these are exact marginals or partial sums of the histogram; the
only floating point enters through thresholds and the KS comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import iterated_log2, iterated_log3, phi
from .errors import DomainError, EmptyClassError, PreconditionError
from .sieve import DIM, JointHistogram


@dataclass(frozen=True)
class EkDistribution:
    """CDF of the (possibly truncated) count of prime factors of n-1 on the
    class omega(n) = k, renormalized to the paper's Gaussian scale."""

    k: int
    x: int
    pi_k: int
    cdf_points: list[tuple[float, float]]
    ks_distance: float
    truncated: bool = False
    center: str = "x"


def _check_k(k: int) -> None:
    if not 1 <= k < DIM:
        raise PreconditionError(f"k={k} outside [1, {DIM})")


def pi_k(h: JointHistogram, k: int) -> int:
    """Number of n <= x with exactly k distinct prime factors."""
    _check_k(k)
    return int(h.counts[k].sum())


def pi_k_y(h: JointHistogram, k: int, y: float) -> int:
    """Count of class-k members with omega(n-1) <= loglog x + y sqrt(loglog x).

    The real threshold is compared against integer m directly; nothing is
    rounded.
    """
    _check_k(k)
    big2 = iterated_log2(h.x)
    threshold = big2 + y * math.sqrt(big2)
    marginal = h.counts[k].sum(axis=0)
    total = 0
    for m in range(DIM):
        if m <= threshold:
            total += int(marginal[m])
    return total


def pi_k_ell(h: JointHistogram, k: int, ell: int) -> int:
    """Count of class-k members with exactly ell prime factors of n-1 below w."""
    _check_k(k)
    if not 0 <= ell < DIM:
        raise PreconditionError(f"ell={ell} outside [0, {DIM})")
    return int(h.counts[k][ell].sum())


def ek_distribution(h: JointHistogram, k: int, truncated: bool = False,
                    center: str = "x") -> EkDistribution:
    """Empirical CDF of omega(n-1) (or omega(n-1, w) when truncated) on the
    class k, centered at loglog x or loglog w, with its KS distance to Phi.

    The empirical CDF is a step function; at each jump both one-sided values
    are compared against Phi, which is the whole content of the KS sup for a
    lattice-vs-continuous pair.
    """
    _check_k(k)
    if center not in ("x", "w"):
        raise PreconditionError(f"center={center!r} not in ('x', 'w')")
    total = pi_k(h, k)
    if total == 0:
        raise EmptyClassError(f"no n <= {h.x} with omega(n) = {k}")
    axis = 1 if truncated else 0
    marginal = h.counts[k].sum(axis=axis)
    big2 = iterated_log2(h.x if center == "x" else h.w)
    scale = math.sqrt(big2)
    points: list[tuple[float, float]] = []
    ks = 0.0
    acc = 0
    for v in range(DIM):
        c = int(marginal[v])
        if c == 0:
            continue
        y = (v - big2) / scale
        below = acc / total
        acc += c
        above = acc / total
        gauss = phi(y)
        ks = max(ks, abs(below - gauss), abs(above - gauss))
        points.append((y, above))
    return EkDistribution(k=k, x=h.x, pi_k=total, cdf_points=points,
                          ks_distance=ks, truncated=truncated, center=center)


def d_k(h: JointHistogram, k: int, C: float) -> int:
    """Count of class-k members whose prime factors of n-1 above w number
    more than C logloglog x."""
    _check_k(k)
    if h.x < 16:
        raise DomainError(f"x={h.x} < 16: logloglog x not usable")
    threshold = C * iterated_log3(h.x)
    slab = h.counts[k]
    total = 0
    for ell in range(DIM):
        for m in range(DIM):
            if m - ell > threshold:
                total += int(slab[ell][m])
    return total


def moments(h: JointHistogram, k: int, truncated: bool = False):
    """Exact mean and variance of omega(n-1) (or its truncation) on class k."""
    _check_k(k)
    total = pi_k(h, k)
    if total == 0:
        raise EmptyClassError(f"no n <= {h.x} with omega(n) = {k}")
    axis = 1 if truncated else 0
    marginal = h.counts[k].sum(axis=axis)
    values = np.arange(DIM, dtype=np.int64)
    s1 = int((values * marginal).sum())
    s2 = int((values * values * marginal).sum())
    mean = s1 / total
    variance = s2 / total - mean * mean
    return mean, variance
