"""Continuous mathematics: normal CDF, complex gamma, a convergence-
accelerated Euler-product engine, the singular series h_k, the
Sathe-Selberg function and its w-split variant, Cauchy-integral
derivatives, and the analytic predictors they feed.

Evaluation conventions shared by every product here:

* products are exponentials of summed logarithms; factor logs use a
  Kahan-corrected log1p so factors of the form 1 + O(1/p^2) keep full
  precision;
* an exactly-zero factor short-circuits the whole product to 0;
* primes beyond cfg.prime_cutoff are handled by the configured tail
  policy (fit the 1/p^2 coefficient of log(factor) on the last decade
  of basis primes, then integrate the prime-zeta tail).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import exp1

from .errors import (
    ConfigurationError,
    DivergenceError,
    DomainError,
    PoleError,
    PreconditionError,
)
from .sieve import PrimeBasis, build_prime_basis

EULER_GAMMA = 0.57721566490153286061
MERTENS = 0.26149721284764278375

DEFAULT_PRIME_CUTOFF = 10 ** 5
MIN_PRIME_CUTOFF = 10 ** 3
DERIVATIVE_RADIUS = 0.25
DERIVATIVE_NODES = 64


def iterated_log2(x: float) -> float:
    """log log x (natural logs; the usual log_2 of this literature)."""
    if x <= math.e:
        raise DomainError(f"log log x undefined or nonpositive for x={x}")
    return math.log(math.log(x))


def iterated_log3(x: float) -> float:
    """log log log x."""
    return math.log(iterated_log2(x))


def phi(y: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-y / math.sqrt(2.0))


_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == round(z.real)


def gamma_fn(z: complex) -> complex:
    """Gamma function on the complex plane (Lanczos; exact C library on the real axis)."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"gamma pole at z={z}")
    if z.imag == 0.0:
        return complex(math.gamma(z.real))
    if z.real < 0.5:
        # reflection: gamma(z) gamma(1-z) = pi / sin(pi z)
        return math.pi / (np.sin(np.pi * z) * gamma_fn(1.0 - z))
    zz = z - 1.0
    acc = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc = acc + c / (zz + i)
    t = zz + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (zz + 0.5) * np.exp(-t) * acc


def _rgamma(z: complex) -> complex:
    """1/gamma, entire: returns 0 at the poles of gamma."""
    if _is_nonpositive_integer(complex(z)):
        return 0.0j
    return 1.0 / gamma_fn(z)


@dataclass
class EulerProductConfig:
    basis: PrimeBasis
    prime_cutoff: int = DEFAULT_PRIME_CUTOFF
    tail_policy: str = "second_order_estimate"
    _prime_floats: np.ndarray | None = field(default=None, repr=False, compare=False)

    def validate(self) -> None:
        if self.prime_cutoff < MIN_PRIME_CUTOFF:
            raise ConfigurationError(
                f"prime_cutoff={self.prime_cutoff} below {MIN_PRIME_CUTOFF}")
        if self.basis.limit < self.prime_cutoff:
            raise ConfigurationError(
                f"basis limit {self.basis.limit} < prime_cutoff {self.prime_cutoff}")
        if self.tail_policy not in ("none", "second_order_estimate"):
            raise ConfigurationError(f"unknown tail_policy {self.tail_policy!r}")

    def prime_floats(self) -> np.ndarray:
        """Primes <= prime_cutoff as float64, cached."""
        if self._prime_floats is None:
            ps = self.basis.primes
            self._prime_floats = ps[ps <= self.prime_cutoff].astype(np.float64)
        return self._prime_floats


def make_config(prime_cutoff: int = DEFAULT_PRIME_CUTOFF,
                tail_policy: str = "second_order_estimate",
                basis: PrimeBasis | None = None) -> EulerProductConfig:
    if basis is None:
        basis = build_prime_basis(prime_cutoff)
    cfg = EulerProductConfig(basis=basis, prime_cutoff=prime_cutoff,
                             tail_policy=tail_policy)
    cfg.validate()
    return cfg


def _log1p_c(q: np.ndarray) -> np.ndarray:
    """log(1+q) for complex q with the Kahan rounding correction."""
    u = 1.0 + q
    out = np.log(np.where(u == 0.0, 1.0, u))
    ratio = np.where(u == 1.0, 1.0, q / np.where(u == 1.0, 1.0, u - 1.0))
    return out * ratio


def _check_convergent(factors: np.ndarray, ps: np.ndarray) -> None:
    t = np.abs(factors - 1.0) * ps * ps
    small = t[ps <= 100.0]
    large = t[ps > ps[-1] / 10.0]
    if small.size == 0 or large.size == 0:
        return
    med_small = float(np.median(small))
    med_large = float(np.median(large))
    if med_large > 10.0 and med_large > 20.0 * max(med_small, 1e-9):
        raise DivergenceError(
            f"|factor-1|*p^2 grows ({med_small:.3g} -> {med_large:.3g}); "
            "local factors are not 1 + O(1/p^2)")


def _second_order_tail(logs: np.ndarray, ps: np.ndarray, cutoff: int) -> complex:
    """Fitted c2 * sum_{p>cutoff} 1/p^2, the prime-zeta tail as E1(log cutoff)."""
    sel = ps > cutoff / 10.0
    c2 = (logs[sel] * ps[sel] ** 2).mean()
    return c2 * float(exp1(math.log(cutoff)))


def euler_product(local_factor: Callable[[np.ndarray], np.ndarray],
                  cfg: EulerProductConfig) -> complex:
    """Product of local_factor(p) over primes p <= cfg.prime_cutoff.

    `local_factor` receives the whole prime array (float64) and must return
    the complex factors, which the caller asserts behave like 1 + O(1/p^2).
    """
    ps = cfg.prime_floats()
    factors = np.asarray(local_factor(ps), dtype=np.complex128)
    if factors.shape != ps.shape:
        raise PreconditionError("local_factor must return one factor per prime")
    if not np.all(np.isfinite(factors)):
        raise PoleError("local factor is not finite at some prime")
    if np.any(factors == 0.0):
        return 0.0j
    _check_convergent(factors, ps)
    logs = _log1p_c(factors - 1.0)
    total = logs.sum()
    if cfg.tail_policy == "second_order_estimate":
        total += _second_order_tail(logs, ps, cfg.prime_cutoff)
    return complex(np.exp(total))


def h_k(r: float, z: complex, cfg: EulerProductConfig) -> complex:
    """Singular series of the pair (n, n-1) at class parameter r = (k-1)/loglog x:

        e^{gamma (z-1)} prod_p (1 + (z-1)/(p+r-1)) (1-1/p)^{z-1}

    Entire in z for r >= 0; a factor hitting exactly 0 (e.g. r=0, z=0 at p=2)
    makes the value exactly 0.
    """
    if r < 0 or r > 30:
        raise PreconditionError(f"r={r} outside [0, 30]")
    z = complex(z)
    ps = cfg.prime_floats()
    denom = ps + (r - 1.0)
    if np.any(denom == 0.0):
        raise PoleError(f"factor pole at p={int(ps[denom == 0.0][0])}")
    factors = (1.0 + (z - 1.0) / denom) * np.exp((z - 1.0) * np.log1p(-1.0 / ps))
    if np.any(factors == 0.0):
        return 0.0j
    if not np.all(np.isfinite(factors)):
        raise PoleError("h_k factor not finite")
    logs = _log1p_c(factors - 1.0)
    total = logs.sum()
    if cfg.tail_policy == "second_order_estimate":
        total += _second_order_tail(logs, ps, cfg.prime_cutoff)
    return complex(np.exp(EULER_GAMMA * (z - 1.0) + total))


def lambda_unit(z: complex, cfg: EulerProductConfig,
                gamma_normalized: bool = True) -> complex:
    """Sathe-Selberg function (1/Gamma(z+1)) prod_p (1 + z/(p-1)) (1-1/p)^z.

    The reciprocal gamma is entire, so gamma poles yield 0; an exactly-zero
    Euler factor (z = 1-p) is a precondition violation and raises.
    """
    z = complex(z)
    ps = cfg.prime_floats()
    factors = (1.0 + z / (ps - 1.0)) * np.exp(z * np.log1p(-1.0 / ps))
    zero = factors == 0.0
    if np.any(zero):
        raise PoleError(f"factor zero at p={int(ps[zero][0])} (z = 1-p)")
    if not np.all(np.isfinite(factors)):
        raise PoleError("lambda factor not finite")
    logs = _log1p_c(factors - 1.0)
    total = logs.sum()
    if cfg.tail_policy == "second_order_estimate":
        total += _second_order_tail(logs, ps, cfg.prime_cutoff)
    prod = complex(np.exp(total))
    return prod * _rgamma(z + 1.0) if gamma_normalized else prod


def lambda_w(z: complex, r_eval: complex, w: int, cfg: EulerProductConfig,
             gamma_normalized: bool = True) -> complex:
    """w-split Sathe-Selberg variant, evaluated at complex argument r_eval:

        (1/Gamma(r_eval+1)) prod_{p<=w} (1 + r_eval/(p+z-2)) (1-1/p)^{r_eval}
                            prod_{p>w}  (1 + r_eval/(p-1))  (1-1/p)^{r_eval}

    Entire in r_eval. `gamma_normalized=False` drops the 1/Gamma factor to
    match the bare product of the generating-series expansion.
    """
    z = complex(z)
    r_eval = complex(r_eval)
    ps = cfg.prime_floats()
    small = ps <= w
    denom = np.where(small, ps + (z - 2.0), ps - 1.0)
    bad = denom == 0.0
    if np.any(bad):
        raise PoleError(f"factor pole at p={int(ps[bad][0])} (p+z-2 = 0)")
    q = r_eval / denom
    zero = q == -1.0
    if np.any(zero):
        raise PoleError(f"factor zero at p={int(ps[zero][0])}")
    logs = _log1p_c(q) + r_eval * np.log1p(-1.0 / ps)
    total = logs.sum()
    total += _lambda_w_tail(logs, ps, z, r_eval, w, cfg)
    prod = complex(np.exp(total))
    return prod * _rgamma(r_eval + 1.0) if gamma_normalized else prod


def _lambda_w_tail(logs: np.ndarray, ps: np.ndarray, z: complex, r_eval: complex,
                   w: int, cfg: EulerProductConfig) -> complex:
    # The factor form switches at w, so the generic last-decade fit would mix
    # the two regimes whenever w falls near the cutoff; the analytic 1/p^2
    # coefficients of each regime are exact and stay smooth in r_eval.
    if cfg.tail_policy != "second_order_estimate":
        return 0.0j
    cutoff = cfg.prime_cutoff
    c2_unit = (r_eval - r_eval * r_eval) / 2.0
    e1_cut = float(exp1(math.log(cutoff)))
    if w <= cutoff:
        # every prime beyond the cutoff carries the (p-1)-form factor
        return c2_unit * e1_cut
    e1_w = float(exp1(math.log(w)))
    c2_split = -r_eval * (z - 2.0) - r_eval / 2.0 - r_eval * r_eval / 2.0
    return c2_split * (e1_cut - e1_w) + c2_unit * e1_w


def cauchy_derivative(f: Callable[[complex], complex], center: complex, order: int,
                      radius: float = DERIVATIVE_RADIUS,
                      nodes: int = DERIVATIVE_NODES) -> complex:
    """order-th derivative of f at center by trapezoidal quadrature of the
    Cauchy integral on a circle (spectrally accurate for analytic f)."""
    if nodes < 32:
        raise PreconditionError(f"nodes={nodes} < 32")
    if order < 0 or radius <= 0:
        raise PreconditionError("order must be >= 0 and radius > 0")
    angles = 2.0 * np.pi * np.arange(nodes) / nodes
    points = center + radius * np.exp(1j * angles)
    vals = np.array([f(zz) for zz in points], dtype=np.complex128)
    coeff = (vals * np.exp(-1j * order * angles)).mean()
    return complex(math.factorial(order) * coeff / radius ** order)


def derivative_radius(nearest_singularity: float | None,
                      default: float = DERIVATIVE_RADIUS) -> float:
    """Default quadrature radius, halved under the nearest singularity when
    one lies within twice the default."""
    if nearest_singularity is None or nearest_singularity > 2.0 * default:
        return default
    return nearest_singularity / 2.0


@dataclass(frozen=True)
class PiKPrediction:
    main: float
    correction: float
    range_warning: bool

    @property
    def value(self) -> float:
        return self.main + self.correction


@dataclass(frozen=True)
class PredictionReport:
    statistic_name: str
    empirical: float
    main_term: float
    correction: float
    relative_deviation: float

    @classmethod
    def build(cls, name: str, empirical: float, main_term: float,
              correction: float = 0.0) -> "PredictionReport":
        dev = abs(empirical - (main_term + correction)) / max(abs(empirical), 1.0)
        return cls(name, empirical, main_term, correction, dev)


def predict_pi_k(x: int, k: int, cfg: EulerProductConfig) -> PiKPrediction:
    """Two-term expansion of the count of n <= x with exactly k prime factors:

        main = (x/log x) (loglog x)^{k-1}/(k-1)! * lambda(r)
        corr = -main-prefactor * r lambda''(r) / (2 loglog x),  r = (k-1)/loglog x

    Outside k <= 3 loglog x the expansion degrades: flagged, not refused.
    """
    if x < 100:
        raise PreconditionError(f"x={x} < 100")
    if k < 1:
        raise PreconditionError(f"k={k} < 1")
    big2 = iterated_log2(x)
    r = (k - 1) / big2
    prefactor = x / math.log(x) * big2 ** (k - 1) / math.factorial(k - 1)
    lam = lambda_unit(complex(r), cfg).real
    radius = derivative_radius(None)
    lam_dd = cauchy_derivative(lambda zz: lambda_unit(zz, cfg), complex(r), 2,
                               radius=radius).real
    main = prefactor * lam
    correction = -prefactor * r * lam_dd / (2.0 * big2)
    return PiKPrediction(main=main, correction=correction,
                         range_warning=k > 3.0 * big2)


def predict_pi_k_ell(pi_k_value: float, x: int, w: int, k: int, ell: int,
                     cfg: EulerProductConfig) -> float:
    """Local-law main term pi_k * (loglog w)^l / (l! log w) * h_k(l/loglog w)."""
    if w < 16:
        raise DomainError(f"w={w} < 16")
    if ell < 0:
        raise PreconditionError(f"ell={ell} < 0")
    big2w = iterated_log2(w)
    r = (k - 1) / iterated_log2(x)
    hval = h_k(r, complex(ell / big2w), cfg).real
    return pi_k_value * big2w ** ell / (math.factorial(ell) * math.log(w)) * hval


_TAYLOR_NODES = 128
_taylor_memo: dict = {}


def _h_taylor_coeffs(r: float, count: int, cfg: EulerProductConfig) -> np.ndarray:
    """First `count` Taylor coefficients of z -> h_k(r, z) at 0, by FFT on |z|=1."""
    key = (r, cfg.prime_cutoff, cfg.tail_policy, id(cfg.basis))
    coeffs = _taylor_memo.get(key)
    if coeffs is None:
        angles = 2.0 * np.pi * np.arange(_TAYLOR_NODES) / _TAYLOR_NODES
        vals = np.array([h_k(r, complex(np.cos(a), np.sin(a)), cfg) for a in angles])
        coeffs = np.fft.fft(vals) / _TAYLOR_NODES
        if len(_taylor_memo) > 32:
            _taylor_memo.clear()
        _taylor_memo[key] = coeffs
    return coeffs[:count]


def predict_pi_k_ell_taylor(pi_k_value: float, x: int, w: int, k: int, ell: int,
                            cfg: EulerProductConfig) -> float:
    """Taylor-expanded local law: (pi_k/log w) sum_{a+b=l} h^(a)(0)/a! (loglog w)^b/b!."""
    if w < 16:
        raise DomainError(f"w={w} < 16")
    if not 0 <= ell <= 40:
        raise PreconditionError(f"ell={ell} outside [0, 40]")
    big2w = iterated_log2(w)
    r = (k - 1) / iterated_log2(x)
    coeffs = _h_taylor_coeffs(r, ell + 1, cfg)
    q = 0.0
    for a in range(ell + 1):
        b = ell - a
        q += coeffs[a].real * big2w ** b / math.factorial(b)
    return pi_k_value * q / math.log(w)


def _xi_split_product(z: complex, r_eval: complex, w: int,
                      cfg: EulerProductConfig,
                      gamma_normalized: bool) -> complex:
    """lambda_w(z, r_eval, w) times prod_{p<=w} (1 + (z-1)/(p-1)), with the
    per-prime factors merged before taking logs:

        p <= w: ((p+z-2+r_eval)/(p-1)) (1-1/p)^{r_eval}
        p >  w: (1 + r_eval/(p-1))     (1-1/p)^{r_eval}

    Merging cancels the p+z-2 denominators, so the function stays entire in
    r_eval even when some p+z-2 is at or near zero -- the special-prime
    handling that keeps the correction function finite at, e.g., z = 0.
    """
    z = complex(z)
    r_eval = complex(r_eval)
    ps = cfg.prime_floats()
    small = ps <= w
    a = z - 1.0 + r_eval
    q = np.where(small, a, r_eval) / (ps - 1.0)
    if np.any(q == -1.0):
        return 0.0j
    logs = _log1p_c(q) + r_eval * np.log1p(-1.0 / ps)
    total = logs.sum()
    if cfg.tail_policy == "second_order_estimate":
        cutoff = cfg.prime_cutoff
        c2_unit = (r_eval - r_eval * r_eval) / 2.0
        e1_cut = float(exp1(math.log(cutoff)))
        if w <= cutoff:
            total += c2_unit * e1_cut
        else:
            # merged factors keep a (z-1)/p term out to w: Mertens for the 1/p
            # sum, prime-zeta integrals for the 1/p^2 coefficients
            e1_w = float(exp1(math.log(w)))
            total += (z - 1.0) * (iterated_log2(w) - iterated_log2(cutoff))
            c2_merged = a - a * a / 2.0 - r_eval / 2.0
            total += c2_merged * (e1_cut - e1_w) + c2_unit * e1_w
    prod = complex(np.exp(total))
    return prod * _rgamma(r_eval + 1.0) if gamma_normalized else prod


def xi(z: complex, x: int, w: int, k: int, cfg: EulerProductConfig,
       gamma_normalized: bool = True) -> complex:
    """Bounded entire correction in the generating-polynomial expansion:

        xi(z) = h_k(z) lambda''(r) / (2 lambda(r))
              - (lambda_z . P_w)''(r) (log w)^{1-z} / (2 lambda(r))

    with r = (k-1)/loglog x and P_w the finite product over p <= w of
    1 + (z-1)/(p-1), folded into the differentiated product so the whole
    expression stays finite for every z (xi(1) = 0).
    """
    if w < 16:
        raise DomainError(f"w={w} < 16")
    z = complex(z)
    big2 = iterated_log2(x)
    r = (k - 1) / big2
    if r > 30:
        raise PreconditionError(f"r={r} > 30")
    lam1 = lambda_unit(complex(r), cfg, gamma_normalized)
    if lam1 == 0:
        raise PoleError("lambda(r) = 0; xi undefined")
    radius = derivative_radius(None)
    lam1_dd = cauchy_derivative(lambda zz: lambda_unit(zz, cfg, gamma_normalized),
                                complex(r), 2, radius=radius)
    merged_dd = cauchy_derivative(
        lambda re: _xi_split_product(z, re, w, cfg, gamma_normalized),
        complex(r), 2, radius=radius)
    hval = h_k(r, z, cfg)
    logw_pow = np.exp((1.0 - z) * math.log(math.log(w)))
    return complex(hval * lam1_dd / (2.0 * lam1)
                   - merged_dd * logw_pow / (2.0 * lam1))


def mertens_check(w: int, z: complex, cfg: EulerProductConfig) -> complex:
    """(e^gamma log w)^{z-1} prod_{p<=w} (1-1/p)^{z-1}; should be 1 + O(1/log w)."""
    if not 16 <= w <= cfg.basis.limit:
        raise PreconditionError(f"need 16 <= w <= basis limit {cfg.basis.limit}")
    z = complex(z)
    ps = cfg.basis.primes
    ps = ps[ps <= w].astype(np.float64)
    logsum = np.log1p(-1.0 / ps).sum()
    return complex(np.exp((z - 1.0) * (EULER_GAMMA + math.log(math.log(w)) + logsum)))
