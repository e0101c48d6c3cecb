"""Uniform and asymptotic approximation exponents against y = [i, i, ...].

The orbit distance |T^n(x) - y| is controlled exactly through the length m of
the common digit prefix of T^n(x) with the constant sequence (i, i, ...):

    |I_m(y)| / (2 (i+2)^2)  <=  |T^n(x) - y|  <  |I_m(y)|.

Block decomposition extracts the maximal i-runs of x and the subsequence of
"record" runs of strictly increasing length; the exponents are finite-scale
liminf/limsup of the record ratios (m_k - n_k)/n_{k+1} and (m_k - n_k)/n_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .cf_core import DigitSeq, QuadraticTarget, gauss_shift
from .errors import Exhausted, InsufficientBlocks, NoBlocks


@dataclass(frozen=True)
class BlockDecomposition:
    """Maximal i-runs of a digit string.

    A raw block (n, m) means a_{n+1} = ... = a_m = i, maximal.  Record blocks
    are selected greedily: the first raw block, then each next raw block
    strictly longer than the last selected one.
    """

    i: int
    raw_blocks: Tuple[Tuple[int, int], ...]
    record_blocks: Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class ExponentEstimate:
    nu_hat_est: float
    nu_est: float
    k_used: int


def _digits_array(d: Sequence[int] | DigitSeq) -> np.ndarray:
    if isinstance(d, DigitSeq):
        return np.asarray(d.digits, dtype=np.int64)
    return np.asarray(d, dtype=np.int64)


def _raw_runs(a: np.ndarray, i: int) -> List[Tuple[int, int]]:
    hit = a == i
    if not hit.any():
        return []
    h = hit.astype(np.int8)
    d = np.diff(h)
    starts = list(np.flatnonzero(d == 1) + 1)
    ends = list(np.flatnonzero(d == -1) + 1)
    if h[0]:
        starts.insert(0, 0)
    if h[-1]:
        ends.append(a.size)
    return [(int(s), int(e)) for s, e in zip(starts, ends)]


def select_records(raw: Sequence[Tuple[int, int]]) -> List[Tuple[int, int]]:
    """First block, then each next block strictly longer than the last pick."""
    records: List[Tuple[int, int]] = []
    best = 0
    for n, m in raw:
        if not records or m - n > best:
            records.append((n, m))
            best = m - n
    return records


def decompose(d: Sequence[int] | DigitSeq, i: int) -> BlockDecomposition:
    a = _digits_array(d)
    if a.size == 0:
        raise ValueError("empty digit sequence")
    raw = _raw_runs(a, i)
    if not raw:
        raise NoBlocks(f"digit {i} never occurs")
    return BlockDecomposition(i=i, raw_blocks=tuple(raw), record_blocks=tuple(select_records(raw)))


def decompose_oracle(d: Sequence[int] | DigitSeq, i: int) -> BlockDecomposition:
    """Brute-force reference: scan positions one by one."""
    a = list(_digits_array(d))
    raw = []
    pos = 0
    while pos < len(a):
        if a[pos] == i:
            start = pos
            while pos < len(a) and a[pos] == i:
                pos += 1
            raw.append((start, pos))
        else:
            pos += 1
    if not raw:
        raise NoBlocks(f"digit {i} never occurs")
    return BlockDecomposition(i=i, raw_blocks=tuple(raw), record_blocks=tuple(select_records(raw)))


def exponent_estimates(bd: BlockDecomposition, horizon: int) -> ExponentEstimate:
    """Finite-scale exponents from record blocks within the horizon.

    nu_hat_est: min over the tail half of records k (with the next record
    start n_{k+1} known and <= horizon) of (m_k - n_k)/n_{k+1}.
    nu_est: max over the tail half of records with m_k <= horizon of
    (m_k - n_k)/n_k.
    """
    recs = [(n, m) for (n, m) in bd.record_blocks if m <= horizon]
    if len(recs) < 2:
        raise InsufficientBlocks(f"need >= 2 record blocks within horizon, have {len(recs)}")
    nu_pairs = recs
    tail_nu = nu_pairs[len(nu_pairs) // 2 :]
    nu_est = max((m - n) / n for n, m in tail_nu)

    hat_pairs = [
        (recs[k], recs[k + 1][0])
        for k in range(len(recs) - 1)
        if recs[k + 1][0] <= horizon
    ]
    if not hat_pairs:
        raise InsufficientBlocks("no record pair with next start inside horizon")
    tail_hat = hat_pairs[len(hat_pairs) // 2 :]
    nu_hat_est = min((m - n) / nxt for (n, m), nxt in tail_hat)
    return ExponentEstimate(nu_hat_est=nu_hat_est, nu_est=nu_est, k_used=len(recs))


# ---------------------------------------------------------------------------
# exact distance brackets
# ---------------------------------------------------------------------------


def forward_run_lengths(a: np.ndarray, i: int) -> np.ndarray:
    """f[j] = length of the i-run starting at 0-based position j (f[size]=0)."""
    n = a.size
    rev = (a == i)[::-1]
    idx = np.arange(n, dtype=np.int64)
    last_miss = np.where(~rev, idx, np.int64(-1))
    np.maximum.accumulate(last_miss, out=last_miss)
    f = np.zeros(n + 1, dtype=np.int64)
    f[:n] = (idx - last_miss)[::-1]
    return f


def common_prefix_with_target(d: DigitSeq, n: int, i: int) -> int:
    """Length m of the maximal common prefix of T^n(x)'s digits with (i,i,...).

    Raises Exhausted when the run of i's reaches the end of the certified
    digits of a sequence that might continue.
    """
    shifted = gauss_shift(d, n)
    m = 0
    for a in shifted.digits:
        if a != i:
            return m
        m += 1
    if shifted.complete:
        return m
    raise Exhausted("common prefix with target runs past certified digits")


def distance_bracket(
    d: DigitSeq, n: int, t: QuadraticTarget
) -> Tuple[Fraction, Fraction]:
    """Exact rational bracket (lower, upper) for |T^n(x) - y|.

    With m the common-prefix length of T^n(x) with (i, i, ...):
    lower = |I_m(y)| / (2 (i+2)^2), upper = |I_m(y)|.
    """
    m = common_prefix_with_target(d, n, t.i)
    im = t.cylinder_length(m)
    return im / (2 * (t.i + 2) ** 2), im


@dataclass(frozen=True)
class HitCheck:
    """Outcome of a uniform-approximation hit test over a window [1, N].

    certain: bracket-proved hit (some upper bound < threshold).
    possible: not bracket-excluded (some lower bound < threshold).
    verdict: True / False when both agree, None when indeterminate.
    """

    certain: bool
    possible: bool

    @property
    def verdict(self) -> Optional[bool]:
        if self.certain:
            return True
        if not self.possible:
            return False
        return None


def _mpf_to_fraction(x: mpmath.mpf) -> Fraction:
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    val = Fraction(man) * (Fraction(2) ** exp)
    return -val if sign else val


def _threshold_interval(t: QuadraticTarget, N: int, nu_hat: float, precision_bits: int = 256):
    """Enclosure of |I_N(y)|^{nu_hat} as (lo, hi) Fractions.

    Computed at `precision_bits` working precision and widened by a relative
    guard of 2^{-precision_bits//2}, which dominates the few-ulp error of the
    exp/log chain by hundreds of bits.
    """
    length = t.cylinder_length(N)
    with mpmath.workprec(precision_bits):
        val = mpmath.exp(
            mpmath.mpf(nu_hat)
            * (mpmath.log(mpmath.mpf(length.numerator)) - mpmath.log(mpmath.mpf(length.denominator)))
        )
        center = _mpf_to_fraction(val)
    guard = Fraction(1, 2 ** (precision_bits // 2))
    return center * (1 - guard), center * (1 + guard)


def uniform_hit_check(
    d: DigitSeq,
    t: QuadraticTarget,
    N: int,
    nu_hat: float,
    precision_bits: int = 256,
) -> HitCheck:
    """Does some n in [1, N] bring the orbit within |I_N(y)|^{nu_hat} of y?

    Decisions are made from the exact distance brackets only; float logs are
    used for screening and every near-threshold comparison is re-done in
    exact arithmetic, so `certain`/`possible` are rigorous.
    """
    nu_hat = float(nu_hat)
    if nu_hat < 0:
        raise ValueError("nu_hat must be >= 0")
    if nu_hat == 0:
        # threshold |I_N|^0 = 1 strictly exceeds any distance inside [0,1)
        return HitCheck(certain=True, possible=True)
    a = np.asarray(d.digits, dtype=np.int64)
    if a.size < N + 1:
        raise Exhausted(f"need at least {N + 1} certified digits, have {a.size}")
    f = forward_run_lengths(a, t.i)
    # m at shift n is the run length starting at position n (0-based index n)
    ms = f[1 : N + 1]
    boundary = ms + np.arange(1, N + 1) >= a.size
    if not d.complete and boundary.any():
        raise Exhausted("a common prefix inside the window runs past certified digits")

    log_thr = nu_hat * t.log_cylinder_length(N)
    uniq = np.unique(ms)
    log_im = {int(m): t.log_cylinder_length(int(m)) for m in uniq}
    log_lower_off = -math.log(2 * (t.i + 2) ** 2)
    margin = 1e-6

    certain = False
    possible = False
    thr_cache = None
    for m in uniq:
        m = int(m)
        lu = log_im[m]
        ll = lu + log_lower_off
        up_hit = lu < log_thr - margin
        up_no = lu > log_thr + margin
        lo_hit = ll < log_thr - margin
        lo_no = ll > log_thr + margin
        if not (up_hit or up_no) or not (lo_hit or lo_no):
            if thr_cache is None:
                thr_cache = _threshold_interval(t, N, nu_hat, precision_bits)
            thr_lo, thr_hi = thr_cache
            lower, upper = t.cylinder_length(m) / (2 * (t.i + 2) ** 2), t.cylinder_length(m)
            if upper < thr_lo:
                certain = True
            if lower < thr_hi:
                possible = True
        else:
            if up_hit:
                certain = True
            if lo_hit:
                possible = True
        if certain:
            return HitCheck(certain=True, possible=True)
    return HitCheck(certain=certain, possible=possible)
