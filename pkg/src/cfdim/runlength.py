"""Maximal run-length function R_n and finite-scale liminf/limsup estimators.

R_n(x) is the length of the longest block of equal consecutive partial
quotients among the first n digits.  The level sets of liminf R_n/n and
limsup R_n/n are the run-length fractals this package targets; at finite
scale both limits are estimated by the min/max of R_n/n over a tail window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .cf_core import DigitSeq
from .errors import EmptyWindow


@dataclass(frozen=True)
class RunProfile:
    """R_1..R_{n_max} plus the maximal constant blocks (start, length, digit).

    `start` is the number of digits preceding the block, so the block covers
    positions start+1 .. start+length (1-based).
    """

    n_max: int
    R: np.ndarray
    blocks: Tuple[Tuple[int, int, int], ...]


@dataclass(frozen=True)
class RatioEstimate:
    liminf_est: float
    limsup_est: float
    window: Tuple[int, int]


def _as_array(d: Sequence[int] | DigitSeq) -> np.ndarray:
    if isinstance(d, DigitSeq):
        return np.asarray(d.digits, dtype=np.int64)
    return np.asarray(d, dtype=np.int64)


def run_profile(d: Sequence[int] | DigitSeq) -> RunProfile:
    """Single left-to-right pass: R_n = max(R_{n-1}, current run length)."""
    a = _as_array(d)
    n = a.size
    if n == 0:
        raise ValueError("empty digit sequence")
    new_run = np.empty(n, dtype=bool)
    new_run[0] = True
    new_run[1:] = a[1:] != a[:-1]
    starts = np.flatnonzero(new_run)
    # run length ending at each position: position index minus its run start
    idx = np.arange(n, dtype=np.int64)
    run_start = starts[np.searchsorted(starts, idx, side="right") - 1]
    ending = idx - run_start + 1
    R = np.maximum.accumulate(ending)
    lengths = np.diff(np.append(starts, n))
    blocks = tuple((int(s), int(l), int(a[s])) for s, l in zip(starts, lengths))
    return RunProfile(n_max=n, R=R, blocks=blocks)


def ratio_estimates(rp: RunProfile, tail_fraction: float = 0.5) -> RatioEstimate:
    """Min/max of R_n/n over the last `tail_fraction` of the profile.

    These are finite-scale estimators of liminf and limsup R_n/n, not limits;
    the window must span at least one full plateau cycle of R_n to be
    meaningful.
    """
    if not (0 < tail_fraction <= 1):
        raise ValueError("tail_fraction must lie in (0, 1]")
    n = rp.n_max
    k_min = n - int(tail_fraction * n) + 1
    if k_min > n:
        raise EmptyWindow(f"window ({k_min}, {n}) is empty")
    ns = np.arange(k_min, n + 1, dtype=np.float64)
    ratios = rp.R[k_min - 1 :] / ns
    return RatioEstimate(
        liminf_est=float(ratios.min()),
        limsup_est=float(ratios.max()),
        window=(k_min, n),
    )


def run_profile_oracle(d: Sequence[int] | DigitSeq) -> np.ndarray:
    """Quadratic brute force: R_n by checking every (start, length) pair."""
    a = list(_as_array(d))
    n = len(a)
    R = np.zeros(n, dtype=np.int64)
    for m in range(1, n + 1):
        best = 1
        for i in range(m):
            l = 1
            while i + l < m and a[i + l] == a[i]:
                l += 1
            best = max(best, l)
        R[m - 1] = best
    return R
