"""Exact rational mean formulas and high-precision asymptotic constants.

All finite-n means are evaluated in exact rational arithmetic
(``fractions.Fraction``, aliased as ``Rational``); the closed forms are
linear combinations of n, the harmonic number H_n and the alternating
harmonic number H_n^alt with small parity corrections.  For n below 4 the
closed forms do not apply and the exact values obtained by exhausting all
permutations are stored directly.

Large-n work (normalization of Monte Carlo output, asymptotic gap sweeps)
uses mpmath evaluations of the same formulas at 40 significant digits, since
the exact rationals grow with lcm(1..n) and stop being practical somewhere in
the thousands.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp, mpf

Rational = Fraction

_DPS = 40

# growing caches of exact harmonic numbers, index = n; the lock keeps the
# append-only extension safe under concurrent callers
_HARMONIC: list[Fraction] = [Fraction(0)]
_HARMONIC_ALT: list[Fraction] = [Fraction(0)]
_CACHE_LOCK = threading.Lock()


def harmonic(n: int) -> Fraction:
    """Exact harmonic number H_n = sum_{k<=n} 1/k, with H_0 = 0."""
    if n < 0:
        raise ValueError("harmonic is defined for n >= 0")
    if len(_HARMONIC) <= n:
        with _CACHE_LOCK:
            while len(_HARMONIC) <= n:
                k = len(_HARMONIC)
                _HARMONIC.append(_HARMONIC[-1] + Fraction(1, k))
    return _HARMONIC[n]


def harmonic_alt(n: int) -> Fraction:
    """Exact alternating harmonic number sum_{k<=n} (-1)^k / k."""
    if n < 0:
        raise ValueError("harmonic_alt is defined for n >= 0")
    if len(_HARMONIC_ALT) <= n:
        with _CACHE_LOCK:
            while len(_HARMONIC_ALT) <= n:
                k = len(_HARMONIC_ALT)
                _HARMONIC_ALT.append(_HARMONIC_ALT[-1] + Fraction((-1) ** k, k))
    return _HARMONIC_ALT[n]


def _parity_correction(n: int) -> Fraction:
    # shared tail of both mean formulas: -1/320*(1/(n-3)+3/(n-1)) for even n,
    # +1/320*(3/(n-2)+1/n) for odd n
    if n % 2 == 0:
        return -Fraction(1, 320) * (Fraction(1, n - 3) + Fraction(3, n - 1))
    return Fraction(1, 320) * (Fraction(3, n - 2) + Fraction(1, n))


_SMALL_MEAN_COMPARISONS = (Fraction(0), Fraction(0), Fraction(1), Fraction(8, 3))
_SMALL_MEAN_SWAPS = (Fraction(0), Fraction(0), Fraction(2), Fraction(8, 3))


def mean_comparisons(n: int) -> Fraction:
    """Expected key comparisons of the dual-pivot sort on a random permutation."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n <= 3:
        return _SMALL_MEAN_COMPARISONS[n]
    h = harmonic(n)
    ha = harmonic_alt(n)
    return (Fraction(9, 5) * n * h - Fraction(1, 5) * n * ha - Fraction(89, 25) * n
            + Fraction(67, 40) * h - Fraction(3, 40) * ha - Fraction(83, 800)
            + Fraction((-1) ** n, 10) + _parity_correction(n))


def mean_swaps(n: int) -> Fraction:
    """Expected swap count (in swap units, rotate3 = 3/2) of the dual-pivot sort."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n <= 3:
        return _SMALL_MEAN_SWAPS[n]
    h = harmonic(n)
    ha = harmonic_alt(n)
    return (Fraction(3, 4) * n * h + Fraction(1, 20) * n * ha - Fraction(4, 5) * n
            + Fraction(3, 4) * h + Fraction(1, 20) * ha - Fraction(23, 160)
            - Fraction((-1) ** n, 40) + _parity_correction(n))


def mean_partition_swaps(n: int) -> Fraction:
    """Expected swap count of the first partition stage, (5/8)n + 13/16 - parity term."""
    if n < 2:
        raise ValueError("mean_partition_swaps requires n >= 2")
    even = 1 if n % 2 == 0 else 0
    return Fraction(5, 8) * n + Fraction(13, 16) - Fraction(1, 16 * (n - even))


def mean_splus(n: int) -> Fraction:
    """Expected number of small elements classified q-first in one partition.

    Equals n/12 - 7/24 + 1/(8(n - [n even])), and also the expected value of
    (large q-first) - (medium q-first).
    """
    if n < 2:
        raise ValueError("mean_splus requires n >= 2")
    even = 1 if n % 2 == 0 else 0
    return Fraction(n, 12) - Fraction(7, 24) + Fraction(1, 8 * (n - even))


@dataclass(frozen=True)
class AnalysisConstants:
    """Asymptotic constants at 40 significant digits (mpmath mpf values).

    sigma2_c, sigma2_s and sigma2_cs are the n^2 coefficients of the variance
    of comparisons, the variance of swaps and their covariance; corr_limit is
    the implied limiting correlation.  a_c and a_s are the linear-term
    coefficients of the two mean expansions.
    """

    gamma: mpf
    a_c: mpf
    a_s: mpf
    sigma2_c: mpf
    sigma2_s: mpf
    sigma2_cs: mpf
    corr_limit: mpf


@lru_cache(maxsize=1)
def analysis_constants() -> AnalysisConstants:
    with mp.workdps(_DPS):
        gamma = +mp.euler
        log2 = mp.log(2)
        pi2 = mp.pi ** 2
        a_c = mpf(9) / 5 * gamma + log2 / 5 - mpf(89) / 25
        a_s = mpf(3) / 4 * gamma - log2 / 20 - mpf(4) / 5
        sigma2_c = mpf(1609) / 300 - mpf(27) / 50 * pi2 + mpf(3) / 10 * log2
        sigma2_s = mpf(47) / 48 - mpf(3) / 32 * pi2 + mpf(3) / 32 * log2
        sigma2_cs = mpf(43) / 20 - mpf(9) / 40 * pi2 + mpf(7) / 40 * log2
        corr = sigma2_cs / mp.sqrt(sigma2_c * sigma2_s)
        return AnalysisConstants(gamma, a_c, a_s, sigma2_c, sigma2_s, sigma2_cs, corr)


def mean_comparisons_asymptotic(n: int) -> float:
    """Two-term expansion (9/5) n log n + a_c n + (67/40) log n."""
    if n < 4:
        raise ValueError("the expansion applies for n >= 4")
    c = analysis_constants()
    with mp.workdps(_DPS):
        return float(mpf(9) / 5 * n * mp.log(n) + c.a_c * n + mpf(67) / 40 * mp.log(n))


def mean_swaps_asymptotic(n: int) -> float:
    """Two-term expansion (3/4) n log n + a_s n + (3/4) log n."""
    if n < 4:
        raise ValueError("the expansion applies for n >= 4")
    c = analysis_constants()
    with mp.workdps(_DPS):
        return float(mpf(3) / 4 * n * mp.log(n) + c.a_s * n + mpf(3) / 4 * mp.log(n))


# --------------------------------------------------------------------------
# high-precision numeric evaluation of the exact formulas (any n)


def harmonic_mp(n: int) -> mpf:
    """H_n at 40 digits via the digamma function (constant time in n)."""
    with mp.workdps(_DPS):
        return +mpmath.harmonic(n)


def harmonic_alt_mp(n: int) -> mpf:
    """Alternating harmonic number at 40 digits, via H_m - H_2m identities."""
    with mp.workdps(_DPS):
        m = n // 2
        value = mpmath.harmonic(m) - mpmath.harmonic(2 * m)
        if n % 2 == 1:
            value -= mpf(1) / n
        return +value


def _to_mpf(q: Fraction) -> mpf:
    return mpf(q.numerator) / q.denominator


def mean_comparisons_mp(n: int) -> mpf:
    """The exact comparison mean evaluated numerically at 40 digits."""
    if n <= 3:
        return _to_mpf(_SMALL_MEAN_COMPARISONS[n])
    h = harmonic_mp(n)
    ha = harmonic_alt_mp(n)
    with mp.workdps(_DPS):
        return +(mpf(9) / 5 * n * h - mpf(1) / 5 * n * ha - mpf(89) / 25 * n
                 + mpf(67) / 40 * h - mpf(3) / 40 * ha - mpf(83) / 800
                 + mpf((-1) ** n) / 10 + _to_mpf(_parity_correction(n)))


def mean_swaps_mp(n: int) -> mpf:
    """The exact swap mean evaluated numerically at 40 digits."""
    if n <= 3:
        return _to_mpf(_SMALL_MEAN_SWAPS[n])
    h = harmonic_mp(n)
    ha = harmonic_alt_mp(n)
    with mp.workdps(_DPS):
        return +(mpf(3) / 4 * n * h + mpf(1) / 20 * n * ha - mpf(4) / 5 * n
                 + mpf(3) / 4 * h + mpf(1) / 20 * ha - mpf(23) / 160
                 - mpf((-1) ** n) / 40 + _to_mpf(_parity_correction(n)))
