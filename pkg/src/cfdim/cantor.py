"""Cantor-set constructions with prescribed constant-run structure.

A construction is a pair of index sequences {n_k}, {m_k} (runs of the digit i
occupy positions n_k+1 .. m_k) together with an alphabet bound B for the free
positions.  This module builds the standard sequence schedules for prescribed
uniform/asymptotic exponents and run-length densities, distributes a
probability measure over the admissible digit tree segment by segment (the
per-segment exponent is the root of that segment's partition sum), samples
from the measure, probes local dimensions, and applies the marker-digit
insertion map that pins the exponents of the image points.

Masses and conditional sampling run on per-segment transfer-operator stacks
(see cfdim.transfer), so depths far beyond enumeration range stay cheap.
"""

from __future__ import annotations

import logging
import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from . import dim_solver, transfer
from .cf_core import DigitSeq, continuants, digit_seq
from .dim_solver import DimEstimate, to_fraction
from .errors import Inadmissible, NoConvergence, OutOfRange

log = logging.getLogger(__name__)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def log_int(n: int) -> float:
    """float log of an arbitrary-size positive integer."""
    if n <= 0:
        raise ValueError("need a positive integer")
    b = n.bit_length()
    if b <= 512:
        return math.log(n)
    shift = b - 64
    return math.log(n >> shift) + shift * math.log(2.0)


# ---------------------------------------------------------------------------
# sequence schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeqPair:
    """Run-position sequences: the k-th forced run covers n_k+1 .. m_k.

    For the unbounded-exponent variant, `B_k` carries per-block alphabet
    bounds for the free stretches (m_k, n_{k+1}] and all other positions are
    forced; in the plain variant every non-run position uses one global bound.
    """

    n: Tuple[int, ...]
    m: Tuple[int, ...]
    params: Tuple[Tuple[str, str], ...] = ()
    B_k: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        assert len(self.n) == len(self.m)
        for k in range(len(self.n)):
            assert self.n[k] < self.m[k], (k, self.n[k], self.m[k])
            if k + 1 < len(self.n):
                assert self.m[k] < self.n[k + 1]
            if k:
                assert self.m[k] - self.n[k] >= self.m[k - 1] - self.n[k - 1]

    @property
    def k_max(self) -> int:
        return len(self.n)

    def run_length(self, k: int) -> int:
        """Length of the k-th run (1-based k)."""
        return self.m[k - 1] - self.n[k - 1]

    def run_index_of(self, pos: int) -> Optional[int]:
        """1-based k with n_k < pos <= m_k, or None for a free position."""
        j = bisect_left(self.m, pos)
        if j < len(self.m) and self.n[j] < pos <= self.m[j]:
            return j + 1
        return None


def construct_sequences(nu_hat, nu, k_max: int = 12) -> SeqPair:
    """Schedule with (m_k-n_k)/n_k -> nu and (m_k-n_k)/n_{k+1} -> nu_hat.

    nu_hat > 0:  n_1 = 2, n_{k+1} = floor((nu/nu_hat)(n_k + 1/nu)) + 2,
                 m_k = floor((1+nu) n_k) + 1.
    nu_hat = 0:  n_k = floor((1+nu) 2^(2^(2k))) + 2, same m_k formula.
    """
    nv = to_fraction(nu)
    nh = to_fraction(nu_hat)
    if not (nv > 0):
        raise OutOfRange("need 0 < nu < infinity")
    if not (0 <= nh <= nv / (1 + nv)):
        raise OutOfRange(f"need 0 <= nu_hat <= nu/(1+nu) = {nv/(1+nv)}")
    ns: List[int] = []
    ms: List[int] = []
    if nh > 0:
        nk = 2
        for _ in range(k_max):
            ns.append(nk)
            ms.append(int((1 + nv) * nk) + 1)
            nk = int((nv / nh) * (nk + Fraction(1) / nv)) + 2
    else:
        for k in range(1, k_max + 1):
            nk = int((1 + nv) * 2 ** (2 ** (2 * k))) + 2
            ns.append(nk)
            ms.append(int((1 + nv) * nk) + 1)
    return SeqPair(tuple(ns), tuple(ms), params=(("nu_hat", str(nh)), ("nu", str(nv))))


def construct_sequences_infinite(nu_hat, k_max: int = 6) -> SeqPair:
    """Schedules with (m_k-n_k)/n_k unbounded and per-block alphabet bounds.

    0 < nu_hat < 1:  n_1 = 2, n_{k+1} = n_k^k + 2 n_k,
                     m_k = floor(nu_hat n_k^k) + n_k,  B_k = floor(m_k log m_k).
    nu_hat = 0:      n_k = 2^(2^(2k)), m_k = n_k^2, B_k = 2^(n_k).
    nu_hat = 1:      m_k = (k+1)!, n_1 = 1, n_{k+1} = m_k + floor(m_k/log m_k),
                     B_k = floor(2^sqrt(m_k)).
    """
    nh = to_fraction(nu_hat)
    if not (0 <= nh <= 1):
        raise OutOfRange("need 0 <= nu_hat <= 1")
    ns: List[int] = []
    ms: List[int] = []
    bs: List[int] = []
    if nh == 0:
        for k in range(1, k_max + 1):
            nk = 2 ** (2 ** (2 * k))
            ns.append(nk)
            ms.append(nk * nk)
            bs.append(2**nk)
    elif nh == 1:
        nk = 1
        for k in range(1, k_max + 1):
            mk = math.factorial(k + 1)
            ns.append(nk)
            ms.append(mk)
            bs.append(_floor_pow2_sqrt(mk))
            nk = mk + int(mk / log_int(mk))
    else:
        nk = 2
        for k in range(1, k_max + 1):
            ns.append(nk)
            mk = int(nh * nk**k) + nk
            ms.append(mk)
            bs.append(int(Fraction(mk) * Fraction(log_int(mk))))
            nk = nk**k + 2 * nk
    return SeqPair(tuple(ns), tuple(ms), params=(("nu_hat", str(nh)), ("nu", "inf")), B_k=tuple(bs))


def _floor_pow2_sqrt(m: int) -> int:
    """floor(2^sqrt(m)) with enough working precision to trust the floor."""
    with mpmath.workprec(max(64, 4 * int(math.isqrt(m)) + 64)):
        return int(mpmath.floor(mpmath.power(2, mpmath.sqrt(m))))


def construct_sequences_runlength(alpha, beta, k_max: int = 12) -> SeqPair:
    """Schedule meeting the run-length density limits
    (m_k-n_k)/n_{k+1} -> alpha/(1-alpha) and (m_k-n_k)/m_k -> beta.

    One valid choice (implementation-defined): n_1 = 2,
    m_k = floor(n_k/(1-beta)) + 1, n_{k+1} = floor(((1-alpha)/alpha)(m_k-n_k)) + 2.
    """
    a = to_fraction(alpha)
    b = to_fraction(beta)
    if not (0 < a <= b / (1 + b) < b < 1):
        raise OutOfRange(f"need 0 < alpha <= beta/(1+beta) < beta < 1, got alpha={a}, beta={b}")
    ns: List[int] = []
    ms: List[int] = []
    nk = 2
    for _ in range(k_max):
        ns.append(nk)
        mk = int(nk / (1 - b)) + 1
        ms.append(mk)
        nk = int(((1 - a) / a) * (mk - nk)) + 2
    return SeqPair(tuple(ns), tuple(ms), params=(("alpha", str(a)), ("beta", str(b))))


# ---------------------------------------------------------------------------
# the constrained digit set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CantorSpec:
    """Alphabet bound B, run digit i, run schedule, and the insertion digit d
    (a marker larger than every admissible digit)."""

    B: int
    i: int
    sp: SeqPair
    d: Optional[int] = None

    def __post_init__(self):
        if self.B < self.i + 1:
            raise OutOfRange(f"need B >= i+1, got B={self.B}, i={self.i}")
        if self.d is not None and self.d <= self.B:
            raise OutOfRange(f"insertion digit must exceed B, got d={self.d}")

    @property
    def marker(self) -> int:
        return self.d if self.d is not None else self.B + 1


def _bound_at(spec: CantorSpec, pos: int) -> Optional[int]:
    """Alphabet bound at a free position, or None if the position is forced."""
    sp = spec.sp
    if sp.run_index_of(pos) is not None:
        return None
    if sp.B_k is None:
        return spec.B
    # unbounded variant: free only on (m_k, n_{k+1}]; everything else forced
    j = bisect_left(sp.m, pos)
    if j >= 1 and sp.m[j - 1] < pos and (j >= len(sp.n) or pos <= sp.n[j]):
        return sp.B_k[j - 1]
    return None


def admissible_children(spec: CantorSpec, prefix: Sequence[int]) -> Tuple[int, ...]:
    """Digits allowed at the next position given an admissible prefix."""
    validate_prefix(spec, prefix)
    pos = len(prefix) + 1
    bound = _bound_at(spec, pos)
    if bound is None:
        return (spec.i,)
    return tuple(range(1, bound + 1))


def validate_prefix(spec: CantorSpec, prefix: Sequence[int]) -> None:
    for idx, a in enumerate(prefix):
        pos = idx + 1
        bound = _bound_at(spec, pos)
        if bound is None:
            if a != spec.i:
                raise Inadmissible(f"position {pos} must carry the run digit {spec.i}, got {a}")
        elif not (1 <= a <= bound):
            raise Inadmissible(f"position {pos} must lie in 1..{bound}, got {a}")


def designed_records(spec: CantorSpec, k_max: Optional[int] = None) -> Tuple[Tuple[int, int], ...]:
    sp = spec.sp
    k = sp.k_max if k_max is None else min(k_max, sp.k_max)
    return tuple((sp.n[j], sp.m[j]) for j in range(k))


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureNode:
    """A digit prefix with its measure mass (kept in log scale) and the number
    of completed run-block boundaries m_k it crosses."""

    digits: Tuple[int, ...]
    log_mass: float
    boundaries_crossed: int

    @property
    def mass(self) -> float:
        return math.exp(self.log_mass)


class MeasureContext:
    """Per-spec cache: segment exponents s~_{l_k} and operator stacks.

    Segment k covers positions (m_{k-1}, m_k]: free part (m_{k-1}, n_k],
    forced i-run (n_k, m_k].  The segment exponent is the root of the
    segment partition sum; the stack holds the log completion sums G_j at
    every free depth, which yields node masses and conditional digit laws.
    """

    def __init__(self, spec: CantorSpec, degree: int = transfer.DEFAULT_DEGREE):
        if spec.sp.B_k is not None:
            raise OutOfRange("measure machinery supports the bounded-alphabet variant only")
        self.spec = spec
        self.degree = degree
        self._s_tilde: Dict[int, DimEstimate] = {}
        self._stacks: Dict[int, transfer.SegmentStack] = {}

    def seg_bounds(self, k: int) -> Tuple[int, int, int]:
        """(m_{k-1}, n_k, m_k) for 1-based segment k."""
        sp = self.spec.sp
        m_prev = sp.m[k - 2] if k >= 2 else 0
        return m_prev, sp.n[k - 1], sp.m[k - 1]

    def s_tilde(self, k: int) -> DimEstimate:
        est = self._s_tilde.get(k)
        if est is None:
            m_prev, n_k, m_k = self.seg_bounds(k)
            est = dim_solver.predim_tilde(
                self.spec.B, 0, self.spec.i, (m_k - m_prev, m_k - n_k), degree=self.degree
            )
            self._s_tilde[k] = est
        return est

    def stack(self, k: int) -> transfer.SegmentStack:
        st = self._stacks.get(k)
        if st is None:
            m_prev, n_k, m_k = self.seg_bounds(k)
            st = transfer.segment_stack(
                self.spec.B, self.spec.i, n_k - m_prev, m_k - n_k,
                self.s_tilde(k).value, self.degree, keep_levels=True,
            )
            self._stacks[k] = st
        return st


_context_cache: Dict[Tuple[CantorSpec, int], MeasureContext] = {}


def measure_context(spec: CantorSpec, degree: int = transfer.DEFAULT_DEGREE) -> MeasureContext:
    key = (spec, degree)
    ctx = _context_cache.get(key)
    if ctx is None:
        ctx = MeasureContext(spec, degree)
        _context_cache[key] = ctx
    return ctx


def _segment_log_factor(ctx: MeasureContext, k: int, seg_digits: Sequence[int]) -> float:
    """-2 s~_k log q_{l_k}(segment digits) for a complete segment."""
    q = continuants(seg_digits).qk(len(seg_digits))
    return -2.0 * ctx.s_tilde(k).value * log_int(q)


def measure_mass(
    spec: CantorSpec,
    prefix: Sequence[int],
    s_tilde: Optional[Dict[int, float]] = None,
    degree: int = transfer.DEFAULT_DEGREE,
) -> MeasureNode:
    """Mass of the cylinder of an admissible prefix.

    Complete segments contribute q_{l_k}^{-2 s~_k} of their own continuants;
    a partially seen segment contributes its partial continuant power times
    the operator-stack completion sum at the current continuant ratio.
    `s_tilde` may override the per-segment exponents (keyed by k).
    """
    digits = tuple(int(a) for a in prefix)
    validate_prefix(spec, digits)
    if s_tilde:
        # supplied exponents get a private context so the shared cache stays
        # tied to the solved segment roots
        ctx = MeasureContext(spec, degree)
        for k, v in s_tilde.items():
            ctx._s_tilde[k] = DimEstimate(v, (v, v), method="supplied")
    else:
        ctx = measure_context(spec, degree)
    lm = 0.0
    L = len(digits)
    k = 1
    crossed = 0
    while True:
        m_prev, n_k, m_k = ctx.seg_bounds(k)
        if L >= m_k:
            lm += _segment_log_factor(ctx, k, digits[m_prev:m_k])
            crossed += 1
            if L == m_k:
                break
            k += 1
            continue
        if L <= m_prev:
            break
        seg = digits[m_prev:L]
        if L > n_k:
            # inside the forced run: single admissible completion
            full = seg + (spec.i,) * (m_k - L)
            lm += _segment_log_factor(ctx, k, full)
        else:
            t = continuants(seg) if seg else None
            if t is None:
                q, q1 = 1, 0
            else:
                q, q1 = t.qk(len(seg)), t.qk(len(seg) - 1)
            r = float(Fraction(q1, q))
            st = ctx.stack(k)
            remaining = n_k - L
            lm += -2.0 * ctx.s_tilde(k).value * log_int(q) + st.eval_log(remaining, r)
        break
    return MeasureNode(digits=digits, log_mass=lm, boundaries_crossed=crossed)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _allowed_run(spec: CantorSpec, k: int) -> int:
    """Max accidental i-run length tolerated in segment k's free part."""
    if k == 1:
        return spec.sp.run_length(1) - 1
    return spec.sp.run_length(k - 1)


def _sample_segment_free(
    ctx: MeasureContext, k: int, rng: np.random.Generator, reject: bool
) -> Tuple[int, ...]:
    """Free digits of segment k, drawn from the conditional measure law."""
    spec = ctx.spec
    m_prev, n_k, _ = ctx.seg_bounds(k)
    free = n_k - m_prev
    if free == 0:
        return ()
    st = ctx.stack(k)
    s = ctx.s_tilde(k).value
    grid = transfer.get_grid(ctx.degree)
    B, i = spec.B, spec.i
    a_vec = np.arange(1, B + 1, dtype=np.float64)
    cap = _allowed_run(spec, k)
    guard_last = True  # no digit i adjacent to the run start
    guard_first = k >= 2  # no digit i adjacent to the previous run end
    for attempt in range(200):
        out: List[int] = []
        r = 0.0
        run = 0
        ok = True
        for j in range(free):
            rem = free - j - 1
            y = 1.0 / (a_vec + r)
            logw = -2.0 * s * np.log(a_vec + r) + grid.interp_matrix(y) @ st.levels[rem]
            w = np.exp(logw - logw.max())
            w /= w.sum()
            a = int(rng.choice(B, p=w)) + 1
            out.append(a)
            r = 1.0 / (a + r)
            if reject:
                run = run + 1 if a == i else 0
                if a == i and (
                    (j == 0 and guard_first)
                    or (j == free - 1 and guard_last)
                    or run > cap
                ):
                    ok = False
                    break
        if ok:
            if attempt:
                log.debug("segment %d free part redrawn %d times", k, attempt)
            return tuple(out)
    raise NoConvergence(f"segment {k} rejection cap reached")


def sample_measure(
    spec: CantorSpec,
    depth: int,
    seed: int,
    reject_accidental: bool = True,
    degree: int = transfer.DEFAULT_DEGREE,
) -> DigitSeq:
    """Draw a depth-digit admissible prefix with the measure's conditional
    probabilities; deterministic for a fixed seed.

    With `reject_accidental` the free parts are redrawn until no accidental
    i-run can disturb the designed record blocks (runs capped below the
    previous designed run length and never adjacent to a designed run), so
    record extraction reproduces the designed blocks exactly; switch it off
    for unconditioned measure-fidelity checks.
    """
    sp = spec.sp
    if depth > sp.m[-1]:
        raise OutOfRange(f"depth {depth} beyond materialized schedule (m_{sp.k_max} = {sp.m[-1]})")
    ctx = measure_context(spec, degree)
    rng = np.random.default_rng(seed)
    out: List[int] = []
    k = 1
    while len(out) < depth:
        m_prev, n_k, m_k = ctx.seg_bounds(k)
        out.extend(_sample_segment_free(ctx, k, rng, reject_accidental))
        out.extend([spec.i] * (m_k - n_k))
        k += 1
    return digit_seq(out[:depth])


def local_dimension(spec: CantorSpec, prefix: Sequence[int], degree: int = transfer.DEFAULT_DEGREE) -> float:
    """log mu(I_n) / log |I_n| with the exact cylinder length."""
    digits = tuple(int(a) for a in prefix)
    if not digits:
        raise ValueError("need a nonempty prefix")
    node = measure_mass(spec, digits, degree=degree)
    t = continuants(digits)
    n = len(digits)
    qn, qn1 = t.qk(n), t.qk(n - 1)
    log_len = -(log_int(qn) + log_int(qn + qn1))
    return node.log_mass / log_len


def local_dimension_series(
    spec: CantorSpec, prefix: Sequence[int], degree: int = transfer.DEFAULT_DEGREE
) -> Tuple[Tuple[int, float], ...]:
    """Local dimension at every completed block boundary m_k in the prefix."""
    out = []
    for m_k in spec.sp.m:
        if m_k <= len(prefix):
            out.append((m_k, local_dimension(spec, prefix[:m_k], degree)))
    return tuple(out)


# ---------------------------------------------------------------------------
# insertion map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InsertResult:
    digits: DigitSeq
    marked: Tuple[int, ...]  # 1-based positions of the inserted marker digit

    def marked_density(self, N: int) -> float:
        return sum(1 for p in self.marked if p <= N) / N


def insert_map(spec: CantorSpec, x_digits: Sequence[int]) -> InsertResult:
    """Insert the marker digit d before every chunk of m_k - n_k digits of
    each block (n_k, n_{k+1}]; the prefix 1..n_1 is copied unchanged.

    Deleting the marked positions recovers the input exactly.
    """
    digits = [int(a) for a in x_digits]
    validate_prefix(spec, digits)
    sp = spec.sp
    d = spec.marker
    out: List[int] = []
    marked: List[int] = []
    n1 = sp.n[0]
    out.extend(digits[:n1])
    pos = n1
    k = 1
    while pos < len(digits):
        if k > sp.k_max:
            raise OutOfRange(f"input longer than the materialized schedule (n_{sp.k_max+1})")
        chunk = sp.run_length(k)
        block_end = sp.n[k] if k < sp.k_max else len(digits)
        stop = min(block_end, len(digits))
        while pos < stop:
            marked.append(len(out) + 1)
            out.append(d)
            take = min(chunk, stop - pos)
            out.extend(digits[pos : pos + take])
            pos += take
        k += 1
    return InsertResult(digits=digit_seq(out), marked=tuple(marked))


def delete_marked(res: InsertResult) -> Tuple[int, ...]:
    marked = set(res.marked)
    return tuple(a for j, a in enumerate(res.digits.digits, start=1) if j not in marked)


def inserted_record_blocks(spec: CantorSpec, k_max: Optional[int] = None) -> Tuple[Tuple[int, int], ...]:
    """Record blocks of the image points f(x), computed from the schedule.

    The marker digit insulates each designed run, and accidental i-runs in
    free chunks are bounded by the chunk length m_k - n_k, so they are never
    strictly longer than the last record; the record structure of any image
    point is therefore the designed one, shifted by the insertion counts.
    """
    sp = spec.sp
    km = sp.k_max if k_max is None else min(k_max, sp.k_max)
    out = []
    cum = 0
    for k in range(1, km + 1):
        out.append((sp.n[k - 1] + cum + 1, sp.m[k - 1] + cum + 1))
        if k < sp.k_max:
            chunk = sp.run_length(k)
            cum += 1 + _ceil_div(sp.n[k] - sp.m[k - 1], chunk)
    return tuple(out)
