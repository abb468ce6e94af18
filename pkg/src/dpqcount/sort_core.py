"""Dual-pivot quicksort with exact cost instrumentation, plus a classic baseline.

The dual-pivot sort picks the first and last element of the range as pivots
p < q and classifies the remaining elements as small (< p), medium (between)
or large (> q).  A running counter d = (#small seen) - (#large seen) decides
the comparison order for the next element: while d >= 0 the element at the
left scan pointer is compared to p first, otherwise the element at the right
end is compared to q first.  A small element discovered in the q-first branch
is moved by a cyclic three-element rotation (rotate3) instead of a swap.

Cost accounting conventions (these define the numbers everything else in the
package reproduces):

* every key comparison site increments ``comparisons`` by one;
* a swap increments ``plain_swaps`` even when both indices coincide;
* a rotate3 increments ``rotate3_ops`` and is charged as 3/2 swaps;
* the two pivot placement steps that end a partition count as one plain swap
  each, although they are implemented as two array writes;
* swap totals are kept in integer half-swap units,
  ``half_swaps = 2 * plain_swaps + 3 * rotate3_ops``.

The classic baseline is a single-pivot quicksort with crossing pointers and
the first element as pivot; it counts comparisons and plain swaps only.

Cost claims assume pairwise distinct keys.  Sorting itself is correct for any
keys, duplicates included.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

__all__ = [
    "CostProfile",
    "PartitionOutcome",
    "as_keys",
    "rotate3",
    "partition_count",
    "sort_count",
    "sort_count_recorded",
    "sort_classic",
]

BRANCH_P_FIRST = 0
BRANCH_Q_FIRST = 1
CLASS_SMALL = 0
CLASS_MEDIUM = 1
CLASS_LARGE = 2


@dataclass
class CostProfile:
    """Accumulated operation counts of one or more sort/partition runs."""

    comparisons: int = 0
    plain_swaps: int = 0
    rotate3_ops: int = 0

    @property
    def half_swaps(self) -> int:
        """Weighted swap total in half-swap units (rotate3 counts as 3/2 swaps)."""
        return 2 * self.plain_swaps + 3 * self.rotate3_ops

    def _absorb(self, counters: np.ndarray) -> None:
        self.comparisons += int(counters[0])
        self.plain_swaps += int(counters[1])
        self.rotate3_ops += int(counters[2])


@dataclass(frozen=True)
class PartitionOutcome:
    """Statistics of a single partition call.

    i1/i2/i3 are the small/medium/large sublist sizes, s_plus/m_plus/l_plus
    count elements classified in the q-first branch by class, and t_c and
    t_s_half are the raw comparison and half-swap tallies of the call.
    """

    i1: int
    i2: int
    i3: int
    s_plus: int
    m_plus: int
    l_plus: int
    t_c: int
    t_s_half: int

    def t_c_closed_form(self, n: int) -> int:
        """Comparison count implied by the classification tallies."""
        return (n - 1) + self.i2 + self.i3 + self.s_plus - self.l_plus

    def t_s_half_closed_form(self) -> int:
        """Half-swap count implied by the classification tallies."""
        return 2 * (2 + self.i1 + self.i3 + self.m_plus - self.l_plus) + self.s_plus

    def check_reconciliation(self, n: int) -> None:
        """Raise if the raw tallies disagree with their closed forms."""
        if self.i1 + self.i2 + self.i3 != n - 2:
            raise AssertionError(f"sublist sizes {self} do not add up to n-2={n - 2}")
        if self.t_c != self.t_c_closed_form(n):
            raise AssertionError(f"comparison tally mismatch: {self}")
        if self.t_s_half != self.t_s_half_closed_form():
            raise AssertionError(f"half-swap tally mismatch: {self}")


def as_keys(values: Sequence) -> np.ndarray:
    """Coerce a sequence to a key array (int64 when all values are integral)."""
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError("key input must be one-dimensional")
    if arr.dtype.kind in "iu":
        return arr.astype(np.int64)
    arr = arr.astype(np.float64)
    if arr.size and np.all(arr == np.floor(arr)) and np.all(np.abs(arr) < 2**62):
        return arr.astype(np.int64)
    return arr


# --------------------------------------------------------------------------
# jitted kernels


@njit(cache=True, nogil=True)
def _partition_kernel(a, left, right, counters, branch_trace, class_trace):
    """One partition step of the dual-pivot sort.

    Mutates a[left..right], adds this call's operation counts to `counters`
    (comparisons, plain_swaps, rotate3_ops) and returns

        (i, k, i1, i2, i3, s_plus, m_plus, l_plus, t_c, t_s_half)

    where recursion continues on [left, i-2], [i, k] and [k+2, right] and the
    t_* entries are the raw tallies of this call alone.  When the trace
    arrays are non-empty the active branch and the class of every classified
    element are recorded in order.
    """
    comparisons = np.int64(1)
    plain = np.int64(0)
    rot = np.int64(0)
    trace = branch_trace.shape[0] > 0
    if a[right] < a[left]:
        p = a[right]
        q = a[left]
    else:
        p = a[left]
        q = a[right]
    i = left + 1
    k = right - 1
    j = i
    d = np.int64(0)
    i1 = np.int64(0)
    i2 = np.int64(0)
    i3 = np.int64(0)
    s_plus = np.int64(0)
    m_plus = np.int64(0)
    l_plus = np.int64(0)
    step = 0
    while j <= k:
        if d >= 0:
            # p-first: classify the element under the left scan pointer
            if trace:
                branch_trace[step] = BRANCH_P_FIRST
            comparisons += 1
            if a[j] < p:
                tmp = a[i]
                a[i] = a[j]
                a[j] = tmp
                plain += 1  # counted even when i == j
                i += 1
                j += 1
                d += 1
                i1 += 1
                if trace:
                    class_trace[step] = CLASS_SMALL
            else:
                comparisons += 1
                if a[j] < q:
                    j += 1
                    i2 += 1
                    if trace:
                        class_trace[step] = CLASS_MEDIUM
                else:
                    tmp = a[j]
                    a[j] = a[k]
                    a[k] = tmp
                    plain += 1
                    k -= 1
                    d -= 1
                    i3 += 1
                    if trace:
                        class_trace[step] = CLASS_LARGE
        else:
            # q-first: classify the element under the right scan pointer
            if trace:
                branch_trace[step] = BRANCH_Q_FIRST
            comparisons += 1
            if a[k] > q:
                k -= 1
                d -= 1
                i3 += 1
                l_plus += 1
                if trace:
                    class_trace[step] = CLASS_LARGE
            else:
                comparisons += 1
                if a[k] < p:
                    # rotate3: tmp <- a[k]; a[k] <- a[j]; a[j] <- a[i]; a[i] <- tmp
                    tmp = a[k]
                    a[k] = a[j]
                    a[j] = a[i]
                    a[i] = tmp
                    rot += 1
                    i += 1
                    d += 1
                    i1 += 1
                    s_plus += 1
                    if trace:
                        class_trace[step] = CLASS_SMALL
                else:
                    tmp = a[j]
                    a[j] = a[k]
                    a[k] = tmp
                    plain += 1
                    i2 += 1
                    m_plus += 1
                    if trace:
                        class_trace[step] = CLASS_MEDIUM
                j += 1
        step += 1
    # pivot placement, one counted swap each (two array writes per line)
    a[left] = a[i - 1]
    a[i - 1] = p
    plain += 1
    a[right] = a[k + 1]
    a[k + 1] = q
    plain += 1
    counters[0] += comparisons
    counters[1] += plain
    counters[2] += rot
    t_c = comparisons
    t_s_half = 2 * plain + 3 * rot
    return i, k, i1, i2, i3, s_plus, m_plus, l_plus, t_c, t_s_half


@njit(cache=True, nogil=True)
def _sort_count_kernel(a, counters, outcomes):
    """Full dual-pivot sort with an explicit range stack.

    When `outcomes` has room, every partition call appends a row
    (n, i1, i2, i3, s_plus, m_plus, l_plus, t_c, t_s_half).  Returns the
    number of partition calls.
    """
    n = a.shape[0]
    record = outcomes.shape[0] > 0
    no_trace = np.empty(0, np.int8)
    stack = np.empty((2 * n + 16, 2), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = n - 1
    top = 1
    calls = np.int64(0)
    while top > 0:
        top -= 1
        left = stack[top, 0]
        right = stack[top, 1]
        if right <= left:
            continue
        i, k, i1, i2, i3, s_plus, m_plus, l_plus, t_c, t_s_half = _partition_kernel(
            a, left, right, counters, no_trace, no_trace)
        if record:
            outcomes[calls, 0] = right - left + 1
            outcomes[calls, 1] = i1
            outcomes[calls, 2] = i2
            outcomes[calls, 3] = i3
            outcomes[calls, 4] = s_plus
            outcomes[calls, 5] = m_plus
            outcomes[calls, 6] = l_plus
            outcomes[calls, 7] = t_c
            outcomes[calls, 8] = t_s_half
        calls += 1
        stack[top, 0] = left
        stack[top, 1] = i - 2
        top += 1
        stack[top, 0] = i
        stack[top, 1] = k
        top += 1
        stack[top, 0] = k + 2
        stack[top, 1] = right
        top += 1
    return calls


@njit(cache=True, nogil=True)
def _sort_classic_kernel(a, counters):
    """Single-pivot quicksort, crossing pointers, first element as pivot.

    Counts one comparison per key test of either scan pointer and one plain
    swap per exchange, including the final pivot placement swap.
    """
    n = a.shape[0]
    stack = np.empty((2 * n + 16, 2), np.int64)
    stack[0, 0] = 0
    stack[0, 1] = n - 1
    top = 1
    comparisons = np.int64(0)
    plain = np.int64(0)
    while top > 0:
        top -= 1
        left = stack[top, 0]
        right = stack[top, 1]
        if right <= left:
            continue
        v = a[left]
        i = left
        j = right + 1
        while True:
            i += 1
            while i <= right:
                comparisons += 1
                if a[i] < v:
                    i += 1
                else:
                    break
            j -= 1
            while True:
                # the pivot at a[left] stops this scan, no bounds check needed
                comparisons += 1
                if a[j] > v:
                    j -= 1
                else:
                    break
            if i >= j:
                break
            tmp = a[i]
            a[i] = a[j]
            a[j] = tmp
            plain += 1
        tmp = a[left]
        a[left] = a[j]
        a[j] = tmp
        plain += 1
        stack[top, 0] = left
        stack[top, 1] = j - 1
        top += 1
        stack[top, 0] = j + 1
        stack[top, 1] = right
        top += 1
    counters[0] += comparisons
    counters[1] += plain


# --------------------------------------------------------------------------
# public operations


def rotate3(array, k: int, j: int, i: int, profile: CostProfile) -> None:
    """Cyclic left rotation tmp<-a[k]; a[k]<-a[j]; a[j]<-a[i]; a[i]<-tmp."""
    for idx in (k, j, i):
        if not 0 <= idx < len(array):
            raise IndexError(f"rotate3 index {idx} out of bounds")
    tmp = array[k]
    array[k] = array[j]
    array[j] = array[i]
    array[i] = tmp
    profile.rotate3_ops += 1


def _partition_impl(arr: np.ndarray, left: int, right: int, profile: CostProfile,
                    trace: bool):
    n = right - left + 1
    if trace:
        branch_trace = np.empty(n - 2 if n > 2 else 0, np.int8)
        class_trace = np.empty(n - 2 if n > 2 else 0, np.int8)
    else:
        branch_trace = np.empty(0, np.int8)
        class_trace = np.empty(0, np.int8)
    counters = np.zeros(3, np.int64)
    res = _partition_kernel(arr, left, right, counters, branch_trace, class_trace)
    profile._absorb(counters)
    outcome = PartitionOutcome(*(int(x) for x in res[2:]))
    outcome.check_reconciliation(n)
    return outcome, branch_trace, class_trace


def partition_count(array, left: int, right: int, profile: CostProfile) -> PartitionOutcome:
    """Run one partition step on array[left..right] and tally its costs.

    Requires left < right and in-bounds indices.  Keys in the range should be
    pairwise distinct for the cost figures to be meaningful (sorting still
    works with duplicates, but the cost model does not cover them).
    """
    arr = array if isinstance(array, np.ndarray) else as_keys(array)
    if not (0 <= left < right < len(arr)):
        raise IndexError(f"invalid partition range [{left}, {right}] for size {len(arr)}")
    outcome, _, _ = _partition_impl(arr, left, right, profile, trace=False)
    if arr is not array:
        array[:] = arr.tolist()
    return outcome


def partition_count_traced(array, left: int, right: int, profile: CostProfile):
    """partition_count plus per-step branch and class traces (test support).

    Returns (outcome, branches, classes) where branches[t] is 0 for p-first
    and 1 for q-first at classification step t, and classes[t] is 0/1/2 for
    small/medium/large.
    """
    arr = array if isinstance(array, np.ndarray) else as_keys(array)
    if not (0 <= left < right < len(arr)):
        raise IndexError(f"invalid partition range [{left}, {right}] for size {len(arr)}")
    outcome, branches, classes = _partition_impl(arr, left, right, profile, trace=True)
    if arr is not array:
        array[:] = arr.tolist()
    return outcome, branches, classes


def _prepare_inplace(array):
    if isinstance(array, np.ndarray):
        if array.dtype not in (np.dtype(np.int64), np.dtype(np.float64)):
            raise TypeError("key arrays must be int64 or float64")
        return array, None
    arr = as_keys(array)
    return arr, array


def sort_count(array) -> CostProfile:
    """Sort in place with the dual-pivot scheme; returns the cost profile."""
    arr, original = _prepare_inplace(array)
    profile = CostProfile()
    if len(arr) > 1:
        counters = np.zeros(3, np.int64)
        _sort_count_kernel(arr, counters, np.empty((0, 9), np.int64))
        profile._absorb(counters)
    if original is not None:
        original[:] = arr.tolist()
    return profile


def sort_count_recorded(array) -> tuple[CostProfile, list[tuple[int, PartitionOutcome]]]:
    """Like sort_count, but also returns (subarray size, outcome) per partition."""
    arr, original = _prepare_inplace(array)
    profile = CostProfile()
    records: list[tuple[int, PartitionOutcome]] = []
    if len(arr) > 1:
        counters = np.zeros(3, np.int64)
        buf = np.empty((len(arr) // 2 + 2, 9), np.int64)
        calls = _sort_count_kernel(arr, counters, buf)
        profile._absorb(counters)
        for row in range(int(calls)):
            records.append((int(buf[row, 0]),
                            PartitionOutcome(*(int(x) for x in buf[row, 1:]))))
    if original is not None:
        original[:] = arr.tolist()
    return profile, records


def sort_classic(array) -> CostProfile:
    """Sort in place with the single-pivot baseline; returns the cost profile."""
    arr, original = _prepare_inplace(array)
    profile = CostProfile()
    if len(arr) > 1:
        counters = np.zeros(3, np.int64)
        _sort_classic_kernel(arr, counters)
        profile._absorb(counters)
    if original is not None:
        original[:] = arr.tolist()
    return profile
