"""Exact generating-function side of the distribution: the integer
polynomial whose l-th coefficient counts class-k members with l small prime
factors of n-1, its evaluation on the unit circle, coefficient recovery by
roots of unity, and the Berry-Esseen comparison integral against the
Gaussian characteristic function.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .analytic import EulerProductConfig, h_k, iterated_log2, xi
from .errors import AliasingError, DomainError, EmptyClassError, PreconditionError
from .sieve import DIM, JointHistogram

SIMPSON_MAX_DEPTH = 30
SIMPSON_REL_TOL = 1e-6
INNER_CUTOFF = 1e-6


@dataclass(frozen=True)
class GenPolynomial:
    """f(z) = sum_l coeffs[l] z^l with coeffs[l] the exact class-(k, l) count."""

    k: int
    x: int
    w: int
    coeffs: np.ndarray = field(repr=False)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def mass(self) -> int:
        return int(self.coeffs.sum())

    def eval(self, z: complex) -> complex:
        acc = 0j
        for c in self.coeffs[::-1]:
            acc = acc * z + int(c)
        return acc


@dataclass(frozen=True)
class CharFnSample:
    t: float
    exact: complex
    predicted: complex
    T: float


def gen_polynomial(h: JointHistogram, k: int) -> GenPolynomial:
    """Coefficient table of the class-k generating polynomial, trimmed."""
    if not 1 <= k < DIM:
        raise PreconditionError(f"k={k} outside [1, {DIM})")
    marginal = h.counts[k].sum(axis=1).astype(np.int64)
    nonzero = np.flatnonzero(marginal)
    top = int(nonzero[-1]) if nonzero.size else 0
    coeffs = marginal[:top + 1].copy()
    coeffs.setflags(write=False)
    return GenPolynomial(k=k, x=h.x, w=h.w, coeffs=coeffs)


def coeffs_by_roots_of_unity(poly: GenPolynomial, L: int) -> list[float]:
    """Recover the coefficients as (1/L) sum_j f(e^{2 pi i j/L}) e^{-2 pi i j l/L}.

    Needs L > degree or higher coefficients alias onto lower ones.
    """
    if L <= poly.degree:
        raise AliasingError(f"L={L} <= degree {poly.degree}")
    roots = np.exp(2j * np.pi * np.arange(L) / L)
    values = np.array([poly.eval(z) for z in roots])
    return [float(v) for v in (np.fft.fft(values) / L).real]


def charfn_samples(poly: GenPolynomial, T: float, ts, with_xi: bool = True,
                   cfg: EulerProductConfig | None = None) -> list[CharFnSample]:
    """Exact vs predicted normalized characteristic function at each t.

    exact(t)     = e^{-it sqrt(T)} f(e^{it/sqrt(T)})
    predicted(t) = pi_k (log w)^{z-1} (h_k(z) + r xi(z)/loglog x),  z = e^{it/sqrt(T)}

    with the xi correction optional.
    """
    if T <= 0:
        raise PreconditionError(f"T={T} must be positive")
    if poly.w < 16:
        raise DomainError(f"w={poly.w} < 16")
    if cfg is None:
        cfg = analytic.make_config()
    sqrt_t = math.sqrt(T)
    pk = poly.mass
    big2x = iterated_log2(poly.x)
    r = (poly.k - 1) / big2x
    loglogw = math.log(math.log(poly.w))
    out = []
    for t in ts:
        if abs(t) > sqrt_t + 1e-12:
            raise PreconditionError(f"|t|={abs(t)} exceeds sqrt(T)={sqrt_t}")
        z = cmath.exp(1j * t / sqrt_t)
        exact = cmath.exp(-1j * t * sqrt_t) * poly.eval(z)
        correction = r * xi(z, poly.x, poly.w, poly.k, cfg) / big2x if with_xi else 0j
        predicted = pk * cmath.exp((z - 1.0) * loglogw) * (h_k(r, z, cfg) + correction)
        out.append(CharFnSample(t=t, exact=exact, predicted=predicted, T=T))
    return out


def _adaptive_simpson(f, a: float, b: float, fa: float, fm: float, fb: float,
                      whole: float, tol: float, depth: int) -> float:
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return (_adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + _adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1))


def adaptive_simpson(f, a: float, b: float, rel_tol: float = SIMPSON_REL_TOL,
                     max_depth: int = SIMPSON_MAX_DEPTH) -> float:
    """Deterministic adaptive Simpson quadrature of f over [a, b]."""
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = rel_tol * max(abs(whole), 1e-300)
    return _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, max_depth)


def berry_esseen_integral(poly: GenPolynomial, T: float, pi_k: int) -> float:
    """Integral over [-sqrt(T), sqrt(T)] of

        | e^{-it sqrt(T)} f(e^{it/sqrt(T)}) - pi_k e^{-t^2/2} |  dt/|t|

    The integrand extends continuously through t=0 (the numerator vanishes
    there), so clipping (-eps, eps) costs O(eps); conjugate symmetry lets us
    integrate the positive half and double.
    """
    if T <= 0:
        raise PreconditionError(f"T={T} must be positive")
    if pi_k <= 0:
        raise EmptyClassError("pi_k = 0: no distribution to compare")
    sqrt_t = math.sqrt(T)

    def integrand(t: float) -> float:
        z = cmath.exp(1j * t / sqrt_t)
        exact = cmath.exp(-1j * t * sqrt_t) * poly.eval(z)
        return abs(exact - pi_k * math.exp(-0.5 * t * t)) / t

    return 2.0 * adaptive_simpson(integrand, INNER_CUTOFF, sqrt_t)
