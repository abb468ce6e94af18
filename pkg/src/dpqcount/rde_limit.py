"""Bivariate cost limit law: toll moments by quadrature and a tree sampler.

The normalized (comparisons, swaps) cost pair converges to the unique
centered fixed point (X_c, X_s) of a distributional recursion: X equals in
distribution the sum of three independent copies scaled by the uniform
spacings (D1, D2, D3) of two independent uniforms, plus the toll vector

    b1 = 1 + D2 + min(D1, D3) + (9/5) * sum D_r log D_r
    b2 = D1 + D3 + [D3 > D1] * (D1/2 + D2 - D3) + (3/4) * sum D_r log D_r

with the 0*log(0) = 0 convention and a strict indicator.  Both toll
coordinates are centered, and because E[sum D_r^2] = 1/2 the fixed-point
covariance matrix equals twice the toll second-moment matrix, which gives a
deterministic (non-statistical) route to the limit variances: they are
computed here by midpoint quadrature over the (u1, u2) unit square.

The sampler evaluates the recursion as a random tree with a fixed depth and
a scale-pruning threshold; leaves contribute zero, which is an L2-small
truncation since each level contracts second moments by 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from ._rng import CounterRng, fill_permutation, next_unit, stream_init
from .sort_core import _partition_kernel

__all__ = [
    "Spacings",
    "TollVector",
    "LimitSample",
    "MomentEstimate",
    "DiagnosticRow",
    "spacings_from_uniforms",
    "sample_spacings",
    "toll",
    "toll_first_moments",
    "toll_second_moments",
    "sample_limit",
    "sample_limit_batch",
    "estimate_moments",
    "qfirst_limit_diagnostic",
]


@dataclass(frozen=True)
class Spacings:
    """The three gaps two points cut out of [0, 1]; they add up to one."""

    d1: float
    d2: float
    d3: float

    def __post_init__(self):
        if min(self.d1, self.d2, self.d3) < 0.0:
            raise ValueError(f"negative spacing in {self}")
        if abs(self.d1 + self.d2 + self.d3 - 1.0) > 1e-12:
            raise ValueError(f"spacings {self} do not sum to 1")


@dataclass(frozen=True)
class TollVector:
    b1: float
    b2: float


@dataclass(frozen=True)
class LimitSample:
    x_c: float
    x_s: float


def spacings_from_uniforms(u1: float, u2: float) -> Spacings:
    """(min, gap, one minus max) of two points in [0, 1]."""
    lo, hi = (u1, u2) if u1 <= u2 else (u2, u1)
    return Spacings(lo, hi - lo, 1.0 - hi)


def sample_spacings(rng: CounterRng) -> Spacings:
    """Draw the spacings of two independent uniforms from the stream."""
    return spacings_from_uniforms(rng.uniform(), rng.uniform())


def _xlogx(x: float) -> float:
    return x * math.log(x) if x > 0.0 else 0.0


def toll(sp: Spacings) -> TollVector:
    """Toll vector of one recursion level for the given spacings."""
    ent = _xlogx(sp.d1) + _xlogx(sp.d2) + _xlogx(sp.d3)
    b1 = 1.0 + sp.d2 + min(sp.d1, sp.d3) + 1.8 * ent
    b2 = sp.d1 + sp.d3 + 0.75 * ent
    if sp.d3 > sp.d1:
        b2 += 0.5 * sp.d1 + sp.d2 - sp.d3
    return TollVector(b1, b2)


# --------------------------------------------------------------------------
# deterministic toll moments by midpoint quadrature


@lru_cache(maxsize=8)
def _toll_grid_sums(resolution: int) -> tuple[float, float, float, float, float]:
    """Midpoint-rule integrals (E[b1], E[b2], E[b1^2], E[b1 b2], E[b2^2]).

    b2 jumps across the anti-diagonal u1 + u2 = 1 (where d3 = d1).  The
    midpoint grid puts exactly one cell center on that line per row; the line
    bisects those cells, so their contribution is replaced by the average of
    the two one-sided values.  With that correction the rule converges at
    O(h^2) despite the jump.
    """
    n = resolution
    h = 1.0 / n
    centers = (np.arange(n) + 0.5) * h
    totals = np.zeros(5)
    block = max(1, 2_000_000 // n)
    for r0 in range(0, n, block):
        r1 = min(n, r0 + block)
        u1 = centers[r0:r1, None]
        u2 = centers[None, :]
        d1 = np.minimum(u1, u2)
        d3 = 1.0 - np.maximum(u1, u2)
        d2 = 1.0 - d1 - d3
        ent = (d1 * np.log(np.where(d1 > 0, d1, 1.0))
               + d2 * np.log(np.where(d2 > 0, d2, 1.0))
               + d3 * np.log(np.where(d3 > 0, d3, 1.0)))
        b1 = 1.0 + d2 + np.minimum(d1, d3) + 1.8 * ent
        base = d1 + d3 + 0.75 * ent
        jump = 0.5 * d1 + d2 - d3
        b2 = base + np.where(d3 > d1, jump, 0.0)
        b1b1 = b1 * b1
        b1b2 = b1 * b2
        b2b2 = b2 * b2
        for r_local in range(r1 - r0):
            col = n - 1 - (r0 + r_local)
            if 0 <= col < n:
                b2_hi = base[r_local, col] + jump[r_local, col]
                b2_lo = base[r_local, col]
                b1v = b1[r_local, col]
                b2[r_local, col] = 0.5 * (b2_hi + b2_lo)
                b1b2[r_local, col] = b1v * 0.5 * (b2_hi + b2_lo)
                b2b2[r_local, col] = 0.5 * (b2_hi * b2_hi + b2_lo * b2_lo)
        totals[0] += b1.sum()
        totals[1] += b2.sum()
        totals[2] += b1b1.sum()
        totals[3] += b1b2.sum()
        totals[4] += b2b2.sum()
    cell = h * h
    return tuple(float(t * cell) for t in totals)  # type: ignore[return-value]


def toll_second_moments(grid_resolution: int = 2000) -> tuple[float, float, float]:
    """(E[b1^2], E[b1 b2], E[b2^2]) by deterministic quadrature.

    Twice these values are the limit variance/covariance constants.
    """
    if grid_resolution < 1000:
        raise ValueError("grid_resolution must be at least 1000")
    sums = _toll_grid_sums(int(grid_resolution))
    return sums[2], sums[3], sums[4]


def toll_first_moments(grid_resolution: int = 2000) -> tuple[float, float]:
    """(E[b1], E[b2]) by the same quadrature; both vanish for the true tolls."""
    if grid_resolution < 1000:
        raise ValueError("grid_resolution must be at least 1000")
    sums = _toll_grid_sums(int(grid_resolution))
    return sums[0], sums[1]


# --------------------------------------------------------------------------
# tree sampler for the fixed point


@njit(cache=True, nogil=True)
def _limit_walk(state, depth, prune_eps):
    """One draw of (x_c, x_s): depth-first walk of the scaled toll tree."""
    stack = np.empty((3 * depth + 8, 2), np.float64)
    stack[0, 0] = 1.0
    stack[0, 1] = depth
    top = 1
    x_c = 0.0
    x_s = 0.0
    while top > 0:
        top -= 1
        scale = stack[top, 0]
        depth_left = stack[top, 1]
        state, u1 = next_unit(state)
        state, u2 = next_unit(state)
        # spacings exactly as in sample_spacings, bit for bit
        if u1 <= u2:
            d1 = u1
            d2 = u2 - u1
            d3 = 1.0 - u2
        else:
            d1 = u2
            d2 = u1 - u2
            d3 = 1.0 - u1
        ent = 0.0
        if d1 > 0.0:
            ent += d1 * np.log(d1)
        if d2 > 0.0:
            ent += d2 * np.log(d2)
        if d3 > 0.0:
            ent += d3 * np.log(d3)
        b1 = 1.0 + d2 + min(d1, d3) + 1.8 * ent
        b2 = d1 + d3 + 0.75 * ent
        if d3 > d1:
            b2 += 0.5 * d1 + d2 - d3
        x_c += scale * b1
        x_s += scale * b2
        if depth_left > 1.0:
            if scale * d1 >= prune_eps:
                stack[top, 0] = scale * d1
                stack[top, 1] = depth_left - 1.0
                top += 1
            if scale * d2 >= prune_eps:
                stack[top, 0] = scale * d2
                stack[top, 1] = depth_left - 1.0
                top += 1
            if scale * d3 >= prune_eps:
                stack[top, 0] = scale * d3
                stack[top, 1] = depth_left - 1.0
                top += 1
    return state, x_c, x_s


@njit(cache=True, nogil=True)
def _limit_batch(seed, start, stop, depth, prune_eps, out):
    for s in range(start, stop):
        state = stream_init(seed, s)
        _, x_c, x_s = _limit_walk(state, depth, prune_eps)
        out[s - start, 0] = x_c
        out[s - start, 1] = x_s


def sample_limit(rng: CounterRng, depth: int, prune_eps: float = 1e-4) -> LimitSample:
    """One sample of the limit pair from the given stream.

    Deterministic given (stream state, depth, prune_eps).  Subtrees whose
    accumulated scale falls below prune_eps, and all nodes past `depth`,
    contribute zero.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if not 0.0 <= prune_eps < 1.0:
        raise ValueError("prune_eps must lie in [0, 1)")
    state, x_c, x_s = _limit_walk(np.uint64(rng.state), np.int64(depth), float(prune_eps))
    rng.state = state
    return LimitSample(float(x_c), float(x_s))


def sample_limit_batch(seed: int, count: int, depth: int = 25,
                       prune_eps: float = 1e-4, start_index: int = 0) -> np.ndarray:
    """`count` samples as an (count, 2) array; sample i uses substream start_index+i.

    Because every sample derives its own stream from (seed, sample index),
    any partition of the index range produces identical output.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if not 0.0 <= prune_eps < 1.0:
        raise ValueError("prune_eps must lie in [0, 1)")
    out = np.empty((count, 2), np.float64)
    _limit_batch(np.int64(seed), np.int64(start_index), np.int64(start_index + count),
                 np.int64(depth), float(prune_eps), out)
    return out


# --------------------------------------------------------------------------
# moment estimation


@dataclass(frozen=True)
class MomentEstimate:
    """Sample moments of a bivariate sample with batch-means standard errors."""

    n: int
    var_c: float
    var_s: float
    cov: float
    corr: float
    corr_defined: bool
    se_var_c: float
    se_var_s: float
    se_cov: float
    se_corr: float


def _as_sample_array(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        arr = np.asarray(samples, dtype=np.float64)
    else:
        rows = [(s.x_c, s.x_s) if isinstance(s, LimitSample) else tuple(s) for s in samples]
        arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must form an (n, 2) array")
    return arr


def estimate_moments(samples: Iterable | np.ndarray, batches: int = 100) -> MomentEstimate:
    """Unbiased variances/covariance, correlation and batch-based stderrs.

    Requires at least 1000 samples.  When either variance vanishes the
    correlation is undefined and flagged.
    """
    arr = _as_sample_array(samples)
    if arr.shape[0] < 1000:
        raise ValueError("estimate_moments requires at least 1000 samples")
    return _moment_core(arr, batches)


def _moment_core(arr: np.ndarray, batches: int = 100) -> MomentEstimate:
    n = arr.shape[0]
    x = arr[:, 0]
    y = arr[:, 1]
    var_c = float(np.var(x, ddof=1))
    var_s = float(np.var(y, ddof=1))
    cov = float(np.cov(x, y, ddof=1)[0, 1])
    defined = var_c > 0.0 and var_s > 0.0
    corr = float(cov / math.sqrt(var_c * var_s)) if defined else float("nan")

    b = max(2, min(batches, n // 10))
    edges = np.linspace(0, n, b + 1, dtype=np.int64)
    bv_c = np.empty(b)
    bv_s = np.empty(b)
    bv_cov = np.empty(b)
    bv_corr = np.empty(b)
    for t in range(b):
        xs = x[edges[t]:edges[t + 1]]
        ys = y[edges[t]:edges[t + 1]]
        bv_c[t] = np.var(xs, ddof=1)
        bv_s[t] = np.var(ys, ddof=1)
        bv_cov[t] = np.cov(xs, ys, ddof=1)[0, 1]
        denom = math.sqrt(bv_c[t] * bv_s[t])
        bv_corr[t] = bv_cov[t] / denom if denom > 0 else np.nan
    scale = 1.0 / math.sqrt(b)

    def _se(values: np.ndarray) -> float:
        good = values[np.isfinite(values)]
        if good.size < 2:
            return float("nan")
        return float(np.std(good, ddof=1) * scale)

    return MomentEstimate(n, var_c, var_s, cov, corr, defined,
                          _se(bv_c), _se(bv_s), _se(bv_cov), _se(bv_corr))


# --------------------------------------------------------------------------
# finite-n diagnostic for the q-first classification fractions


@dataclass(frozen=True)
class DiagnosticRow:
    """Mean squared gaps between q-first fractions and their spacing limits."""

    n: int
    samples: int
    mse_small: float
    mse_medium: float
    mse_large: float


@njit(cache=True, nogil=True)
def _qfirst_mse_kernel(n, samples, seed):
    buf = np.empty(n, np.int64)
    counters = np.zeros(3, np.int64)
    no_trace = np.empty(0, np.int8)
    acc_s = 0.0
    acc_m = 0.0
    acc_l = 0.0
    for s in range(samples):
        state = stream_init(seed, n * 4294967296 + s)
        fill_permutation(state, buf)
        counters[0] = 0
        counters[1] = 0
        counters[2] = 0
        res = _partition_kernel(buf, 0, n - 1, counters, no_trace, no_trace)
        i1 = res[2]
        i2 = res[3]
        i3 = res[4]
        s_plus = res[5]
        m_plus = res[6]
        l_plus = res[7]
        ind = 1.0 if i3 > i1 else 0.0
        acc_s += (s_plus / n - ind * i1 / n) ** 2
        acc_m += (m_plus / n - ind * i2 / n) ** 2
        acc_l += (l_plus / n - ind * i3 / n) ** 2
    return acc_s / samples, acc_m / samples, acc_l / samples


def qfirst_limit_diagnostic(n_values: Sequence[int], samples_per_n: int,
                            rng: CounterRng) -> list[DiagnosticRow]:
    """Monte Carlo check that the q-first class fractions approach their limits.

    For each n, runs the first partition on `samples_per_n` random
    permutations and reports E[(S+/n - [I3 > I1] I1/n)^2] and the medium and
    large analogues.  The values shrink as n grows.
    """
    rows = []
    for n in n_values:
        if n < 10:
            raise ValueError("diagnostic sizes must be at least 10")
        mse_s, mse_m, mse_l = _qfirst_mse_kernel(np.int64(n), np.int64(samples_per_n),
                                                 np.int64(rng.seed))
        rows.append(DiagnosticRow(int(n), int(samples_per_n),
                                  float(mse_s), float(mse_m), float(mse_l)))
    return rows
