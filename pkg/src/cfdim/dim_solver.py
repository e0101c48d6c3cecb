"""Pre-dimensional numbers, pressure roots, and the theorem dimension formulas.

Two independent routes to the same dimension values s(A_B, alpha, tau(i)):

  * enumeration: the n-th pre-dimensional numbers are roots rho of

        sum over free digit strings of (scale * q_total)^{-2 rho} = 1,

    computed by exhaustive vectorized enumeration of the free digits with the
    log-space continuant recursion  log q_{k+1} = log q_k + log(a + r_k),
    r_{k+1} = 1/(a + r_k), and bisection in rho;

  * spectral: the root s of  P_B(s) = 2 s (alpha/(1-alpha)) log tau(i),
    where P_B(s) is the log leading eigenvalue of the transfer operator on
    {1..B} with weight (a+x)^{-2s}.

The 2s coefficient is forced by the large-n balance of the enumeration sums
(the constant-run continuant grows like tau^n, and each summand carries the
full -2 rho power); pressure-equation displays that drop the factor 2 are
measuring the orbit speed through q_n instead of |I_n| ~ q_n^{-2}.

Theorem-level formulas map exponent/run-length parameters onto an
alpha-argument for the B -> infinity dimension value, with the closure
conventions  s(0) = 1  and  s(1) = 1/2  applied exactly at the endpoints.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from . import transfer
from .errors import BudgetExceeded, NoConvergence, OutOfRange
from .transfer import DEFAULT_DEGREE

DEFAULT_NODE_BUDGET = 200_000_000
_CACHE_LIMIT = 2**23  # max leaves kept as a cached table
_CHUNK = 2**20

Number = Union[int, float, Fraction]


def to_fraction(x: Number) -> Fraction:
    """Exact rationals pass through; floats are rationalized at 1e-15."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if x == float("inf"):
            raise ValueError("cannot rationalize infinity")
        if x != x:
            raise ValueError("nan")
        return Fraction(x).limit_denominator(10**15)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def log_tau(i: int) -> float:
    return math.log((i + math.sqrt(i * i + 4)) / 2.0)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DimQuery:
    """Inputs of a per-n dimension number: alphabet bound B (None marks the
    full alphabet), ratio parameter alpha in [0,1], run digit i, order n."""

    B: Optional[int]
    alpha: Number
    i: int
    n: int = 0
    method: str = "enumerate"


@dataclass(frozen=True)
class DimEstimate:
    value: float
    bracket: Tuple[float, float]
    n_used: Optional[int] = None
    B_used: Optional[int] = None
    method: str = ""
    trace: Tuple[float, ...] = ()
    degenerate: bool = False

    def __post_init__(self):
        lo, hi = self.bracket
        assert lo <= self.value + 1e-15 and self.value <= hi + 1e-15


@dataclass(frozen=True)
class SumKernelSpec:
    """Shape of one constrained partition sum: `free_length` enumerated
    digits, a trailing run of `tail_i` copies of `tail_digit`, and a
    log-scale added to log q before the -2 rho power."""

    free_length: int
    tail_i: int = 0
    tail_digit: int = 1
    scale_log: float = 0.0

    def __post_init__(self):
        if self.free_length < 0 or self.tail_i < 0 or self.tail_digit < 1:
            raise ValueError("invalid kernel spec")


# ---------------------------------------------------------------------------
# enumeration engine
# ---------------------------------------------------------------------------

_state_cache: Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray]] = {}
_qtotal_cache: Dict[Tuple[int, int, int, int], np.ndarray] = {}


def _grow_level(logq: np.ndarray, r: np.ndarray, B: int) -> Tuple[np.ndarray, np.ndarray]:
    n = logq.size
    new_logq = np.empty(B * n)
    new_r = np.empty(B * n)
    for k, a in enumerate(range(1, B + 1)):
        ar = a + r
        new_logq[k * n : (k + 1) * n] = logq + np.log(ar)
        new_r[k * n : (k + 1) * n] = 1.0 / ar
    return new_logq, new_r


def _free_state_tables(B: int, f: int) -> Tuple[np.ndarray, np.ndarray]:
    """(log q_f, q_{f-1}/q_f) over all B^f free strings, cached when small."""
    key = (B, f)
    hit = _state_cache.get(key)
    if hit is not None:
        return hit
    logq = np.zeros(1)
    r = np.zeros(1)
    for _ in range(f):
        logq, r = _grow_level(logq, r, B)
    if B**f <= _CACHE_LIMIT:
        _state_cache[key] = (logq, r)
    return logq, r


def _iter_state_chunks(B: int, f: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Stream (log q, ratio) tables in first-digit-partition chunks."""
    if B**f <= _CHUNK or f == 0:
        yield _free_state_tables(B, f)
        return
    # prefix length j such that the remaining subtree fits in a chunk
    sub = f
    while B**sub > _CHUNK:
        sub -= 1
    j = f - sub
    for prefix_idx in range(B**j):
        # decode prefix digits (most-significant digit first)
        logq0, r0 = 0.0, 0.0
        idx = prefix_idx
        digits = []
        for _ in range(j):
            digits.append(idx % B + 1)
            idx //= B
        for a in reversed(digits):
            ar = a + r0
            logq0 += math.log(ar)
            r0 = 1.0 / ar
        logq = np.array([logq0])
        r = np.array([r0])
        for _ in range(sub):
            logq, r = _grow_level(logq, r, B)
        yield logq, r


def _log_qtotal_arrays(B: int, spec: SumKernelSpec) -> Iterator[np.ndarray]:
    """log of the full continuant (free digits + forced tail), chunked."""
    f, t, i = spec.free_length, spec.tail_i, spec.tail_digit
    if t == 0:
        for logq, _ in _iter_state_chunks(B, f):
            yield logq
        return
    key = (B, f, i, t)
    hit = _qtotal_cache.get(key)
    if hit is not None:
        yield hit
        return
    log_u, v_over_u = transfer.run_tail_logs(i, t)
    pieces = []
    cacheable = B**f <= _CACHE_LIMIT
    for logq, r in _iter_state_chunks(B, f):
        arr = logq + log_u + np.log1p(v_over_u * r)
        if cacheable:
            pieces.append(arr)
        yield arr
    if cacheable:
        _qtotal_cache[key] = np.concatenate(pieces) if len(pieces) > 1 else pieces[0]


def sum_power(
    B: int,
    spec: SumKernelSpec,
    rho: float,
    node_budget: int = DEFAULT_NODE_BUDGET,
    threads: int = 1,
) -> float:
    """log of  sum over free strings of (exp(scale_log) * q_total)^(-2 rho).

    Chunked, with per-chunk pairwise summation merged by a compensated
    (fsum) reduction in a fixed order, so results do not depend on the chunk
    schedule or thread count.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    if rho < 0:
        raise ValueError("rho must be >= 0")
    leaves = B**spec.free_length
    if leaves > node_budget:
        raise BudgetExceeded(f"{B}^{spec.free_length} = {leaves} leaves exceed budget {node_budget}")

    key = (B, spec.free_length, spec.tail_digit, spec.tail_i)
    cached = _qtotal_cache.get(key) if spec.tail_i else _state_cache.get((B, spec.free_length))
    if cached is not None:
        arr = cached if spec.tail_i else cached[0]
        terms = -2.0 * rho * (spec.scale_log + arr)
        m = float(terms.max())
        return m + math.log(float(np.exp(terms - m).sum()))

    def chunk_stats(arr: np.ndarray) -> Tuple[float, float, float]:
        terms = -2.0 * rho * (spec.scale_log + arr)
        m = float(terms.max())
        return m, float(np.exp(terms - m).sum())

    stats = []
    if threads > 1:
        chunks = list(_log_qtotal_arrays(B, spec))
        with ThreadPoolExecutor(max_workers=threads) as ex:
            stats = list(ex.map(chunk_stats, chunks))
    else:
        for arr in _log_qtotal_arrays(B, spec):
            stats.append(chunk_stats(arr))
    m = max(s[0] for s in stats)
    total = math.fsum(s1 * math.exp(m1 - m) for m1, s1 in stats)
    return m + math.log(total)


# ---------------------------------------------------------------------------
# root solving
# ---------------------------------------------------------------------------


def solve_decreasing_root(
    F: Callable[[float], float],
    width: float,
    lo: float = 0.0,
    hi: float = 2.0,
    hi_cap: float = 64.0,
) -> Tuple[float, Tuple[float, float]]:
    """Bisection root of a strictly decreasing F with F(root) = 0.

    Returns (midpoint, certified bracket).  F(0) <= 0 short-circuits to 0.
    """
    f_lo = F(lo)
    if f_lo <= 0:
        return 0.0, (0.0, 0.0)
    f_hi = F(hi)
    while f_hi > 0:
        lo = hi
        hi *= 2
        if hi > hi_cap:
            raise NoConvergence(f"no sign change up to rho = {hi_cap}")
        f_hi = F(hi)
    if not f_hi < 0:
        # hit a float plateau at 0: the sum has a term pinned at 1 and never
        # drops strictly below it, so no root exists (e.g. order-1 sums)
        raise NoConvergence("sum never drops strictly below 1; no finite root")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if F(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), (lo, hi)


def aitken(values: Sequence[float]) -> float:
    """Aitken delta-squared applied to the last three values."""
    if len(values) < 3:
        return values[-1]
    x0, x1, x2 = values[-3], values[-2], values[-1]
    denom = (x2 - x1) - (x1 - x0)
    if abs(denom) < 1e-15:
        return x2
    return x2 - (x2 - x1) ** 2 / denom


# ---------------------------------------------------------------------------
# pre-dimensional numbers
# ---------------------------------------------------------------------------


def _alpha_fraction(alpha: Number) -> Fraction:
    af = to_fraction(alpha)
    if not (0 <= af <= 1):
        raise OutOfRange(f"alpha = {af} outside [0,1]")
    return af


def _finite_bound(B) -> int:
    # None marks the full alphabet, which only the B -> infinity limit handles
    if B is None:
        raise OutOfRange("per-n numbers need a finite alphabet bound; use dim_full for the limit")
    return int(B)


def predim_hat(
    q: DimQuery,
    node_budget: int = DEFAULT_NODE_BUDGET,
    tol: float = 1e-12,
    threads: int = 1,
) -> DimEstimate:
    """Root of  sum (tau^{n alpha/(1-alpha)} q_n)^{-2 rho} = 1  over {1..B}^n."""
    B = _finite_bound(q.B)
    af = _alpha_fraction(q.alpha)
    if af == 1:
        return DimEstimate(0.0, (0.0, 0.0), n_used=q.n, B_used=B, method="degenerate", degenerate=True)
    scale = float(af / (1 - af)) * q.n * log_tau(q.i)
    spec = SumKernelSpec(free_length=q.n, tail_i=0, tail_digit=q.i, scale_log=scale)
    root, bracket = solve_decreasing_root(
        lambda rho: sum_power(B, spec, rho, node_budget, threads), width=tol
    )
    return DimEstimate(root, bracket, n_used=q.n, B_used=B, method="enumerate-hat")


def predim_s(
    q: DimQuery,
    node_budget: int = DEFAULT_NODE_BUDGET,
    tol: float = 1e-12,
    threads: int = 1,
) -> DimEstimate:
    """Root of  sum q_n(free digits, i, ..., i)^{-2 rho} = 1  with floor(n alpha)
    forced trailing digits."""
    B = _finite_bound(q.B)
    af = _alpha_fraction(q.alpha)
    if af == 1:
        return DimEstimate(0.0, (0.0, 0.0), n_used=q.n, B_used=B, method="degenerate", degenerate=True)
    tail = int(q.n * af)  # exact floor: Fraction arithmetic
    spec = SumKernelSpec(free_length=q.n - tail, tail_i=tail, tail_digit=q.i)
    root, bracket = solve_decreasing_root(
        lambda rho: sum_power(B, spec, rho, node_budget, threads), width=tol
    )
    return DimEstimate(root, bracket, n_used=q.n, B_used=B, method="enumerate-s")


def predim_tilde(
    B: int,
    xi: Number,
    i: int,
    segment: Tuple[int, int],
    node_budget: int = DEFAULT_NODE_BUDGET,
    tol: float = 1e-12,
    degree: int = DEFAULT_DEGREE,
    method: str = "auto",
) -> DimEstimate:
    """Root of the one-segment sum with free digits l - tail_len and a forced
    trailing i-run; `xi` is carried for bookkeeping only.

    Falls back to the log-space operator iteration when the free part is too
    large to enumerate (same sum, evaluated as an iterated transfer operator),
    with a near-machine bisection width so the root residual stays tiny even
    for very long segments.
    """
    l_k, tail_len = segment
    if tail_len > l_k or tail_len < 0:
        raise OutOfRange("tail length exceeds segment length")
    free = l_k - tail_len
    use_enum = method == "enumerate" or (method == "auto" and B**free <= min(node_budget, _CACHE_LIMIT))
    if method not in ("auto", "enumerate", "operator"):
        raise ValueError(f"unknown method {method!r}")
    if use_enum:
        spec = SumKernelSpec(free_length=free, tail_i=tail_len, tail_digit=i)
        root, bracket = solve_decreasing_root(
            lambda rho: sum_power(B, spec, rho, node_budget), width=min(tol, 1e-14)
        )
        tag = "enumerate-tilde"
    else:
        if method == "enumerate":
            raise BudgetExceeded(f"{B}^{free} free strings exceed the enumeration budget")
        root, bracket = solve_decreasing_root(
            lambda s: transfer.segment_log_sum(B, i, free, tail_len, s, degree), width=4e-16
        )
        tag = "operator-tilde"
    return DimEstimate(root, bracket, n_used=l_k, B_used=B, method=tag)


def dim_limit(
    B: int,
    alpha: Number,
    i: int,
    n_schedule: Sequence[int],
    node_budget: int = DEFAULT_NODE_BUDGET,
    tol: float = 1e-12,
    threads: int = 1,
) -> DimEstimate:
    """Pre-dimensional numbers along an increasing n-schedule plus Aitken
    extrapolation; the bracket is the last raw value +- its distance to the
    extrapolated one."""
    if list(n_schedule) != sorted(set(n_schedule)):
        raise ValueError("n_schedule must be strictly increasing")
    raw = [
        predim_hat(DimQuery(B=B, alpha=alpha, i=i, n=n), node_budget, tol, threads).value
        for n in n_schedule
    ]
    extrap = aitken(raw)
    last = raw[-1]
    r = abs(last - extrap)
    value = min(max(extrap, 0.0), 1.0)
    lo = max(min(last - r, value), 0.0)
    hi = min(max(last + r, value), 1.0)
    return DimEstimate(
        value, (lo, hi), n_used=list(n_schedule)[-1], B_used=B, method="enumerate-limit", trace=tuple(raw)
    )


# ---------------------------------------------------------------------------
# spectral route
# ---------------------------------------------------------------------------


def spectral_pressure(B: int, s: float, degree: int = DEFAULT_DEGREE, tol: float = 1e-12) -> float:
    """P_B(s): log leading eigenvalue of the weighted transfer operator.

    Defined for any s >= 0 on a finite alphabet (the branch sums are finite);
    conditioning is excellent on [0, ~4] which covers every root this package
    solves for.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    return transfer.pressure(B, s, degree=degree, tol=tol)


def spectral_dim(
    B: int,
    alpha: Number,
    i: int,
    bracket_tol: float = 1e-8,
    degree: int = DEFAULT_DEGREE,
) -> DimEstimate:
    """Root of  P_B(s) = 2 s (alpha/(1-alpha)) log tau(i)  by bisection."""
    af = _alpha_fraction(alpha)
    if af == 1:
        raise OutOfRange("alpha = 1 is handled by the closure convention, not the solver")
    coeff = 2.0 * float(af / (1 - af)) * log_tau(i)
    F = lambda s: spectral_pressure(B, s, degree) - coeff * s
    root, bracket = solve_decreasing_root(F, width=bracket_tol, hi=1.0, hi_cap=8.0)
    return DimEstimate(root, bracket, B_used=B, method="spectral")


DEFAULT_B_SCHEDULE = (16, 32, 64, 128)


def dim_full(
    alpha: Number,
    i: int,
    B_schedule: Sequence[int] = DEFAULT_B_SCHEDULE,
    bracket_tol: float = 1e-8,
    degree: int = DEFAULT_DEGREE,
) -> DimEstimate:
    """Full-alphabet dimension value s(alpha, tau(i)) by B -> infinity
    extrapolation of spectral roots, with the exact closure conventions
    s(0) = 1 and s(1) = 1/2.

    The endpoint values are returned exactly as the labelled limits; the
    finite-B trend along the schedule is attached as `trace` either way.
    Away from the endpoints the truncation error decays like B^{1-2s}, so a
    geometric schedule makes Aitken extrapolation effective; for alpha close
    to 1 the full-alphabet value (> 1/2) is out of reach of any feasible
    truncation and the bracket honestly reflects that.
    """
    af = _alpha_fraction(alpha)
    if af == 0 or af == 1:
        value = 1.0 if af == 0 else 0.5
        trace = tuple(
            spectral_dim(B, af, i, bracket_tol, degree).value for B in B_schedule
        ) if af == 0 else ()
        return DimEstimate(value, (value, value), B_used=list(B_schedule)[-1], method="convention", trace=trace)
    if list(B_schedule) != sorted(set(B_schedule)):
        raise ValueError("B_schedule must be strictly increasing")
    raw = [spectral_dim(B, af, i, bracket_tol, degree).value for B in B_schedule]
    extrap = aitken(raw)
    last = raw[-1]
    r = abs(last - extrap) + bracket_tol
    value = min(max(extrap, 0.0), 1.0)
    lo = max(min(last - r, value), 0.0)
    hi = min(max(last + r, value), 1.0)
    return DimEstimate(value, (lo, hi), B_used=list(B_schedule)[-1], method="spectral-extrapolated", trace=tuple(raw))


# ---------------------------------------------------------------------------
# theorem formulas
# ---------------------------------------------------------------------------

_INF = float("inf")


def _exact_or_none(v) -> Optional[Fraction]:
    if v is None:
        return None
    if isinstance(v, float) and math.isinf(v):
        return None
    return to_fraction(v)


def _dim_of_argument(xi: Fraction, i: int, B_schedule, **kw) -> DimEstimate:
    return dim_full(xi, i, B_schedule, **kw) if B_schedule else dim_full(xi, i, **kw)


def theorem_argument(
    kind: str,
    nu_hat: Optional[Number] = None,
    nu: Optional[Number] = None,
    alpha: Optional[Number] = None,
    beta: Optional[Number] = None,
) -> Optional[Fraction]:
    """The alpha-argument of a theorem's dimension formula, or None on the
    zero branches ("otherwise" cases).  Raises OutOfRange outside every
    branch.  The endpoint arguments 0 and 1 stand for the exact values 1 and
    1/2 under the closure convention."""
    if kind in ("U_set", "E_hat"):
        if nu_hat is None:
            raise OutOfRange("nu_hat required")
        if isinstance(nu_hat, float) and math.isinf(nu_hat):
            return None
        nh = to_fraction(nu_hat)
        if nh < 0:
            raise OutOfRange("nu_hat must be >= 0")
        if nh > 1:
            return None
        return 4 * nh / (1 + nh) ** 2

    if kind == "E_joint":
        if nu_hat is None or nu is None:
            raise OutOfRange("nu_hat and nu required")
        nh = _exact_or_none(nu_hat)
        nv = _exact_or_none(nu)
        if nh is None:
            raise OutOfRange("nu_hat must be finite")
        if nh < 0:
            raise OutOfRange("nu_hat must be >= 0")
        if nv is None:  # nu = infinity; the argument is 1 by convention
            return Fraction(1) if nh <= 1 else None
        if nv < 0 or nh > nv:
            raise OutOfRange("need 0 <= nu_hat <= nu")
        if nv == 0:
            return Fraction(0)
        if nh > nv / (1 + nv):
            return None
        return nv**2 / ((1 + nv) * (nv - nh))

    if kind == "nu_level":
        if nu is None:
            raise OutOfRange("nu required")
        nv = _exact_or_none(nu)
        if nv is None:
            return Fraction(1)
        if nv < 0:
            raise OutOfRange("nu must be >= 0")
        return nv / (1 + nv)

    if kind == "FG":
        if alpha is None or beta is None:
            raise OutOfRange("alpha and beta required")
        a = to_fraction(alpha)
        b = to_fraction(beta)
        if not (0 <= a <= b <= 1):
            raise OutOfRange("need 0 <= alpha <= beta <= 1")
        if b == 0:
            return Fraction(0)
        if a > b / (1 + b):
            return None
        return b**2 * (1 - a) / (b - a)

    if kind == "F":
        if alpha is None:
            raise OutOfRange("alpha required")
        a = to_fraction(alpha)
        if not (0 <= a <= 1):
            raise OutOfRange("alpha must lie in [0,1]")
        if a > Fraction(1, 2):
            return None
        return 4 * a * (1 - a)

    raise OutOfRange(f"unknown kind {kind!r}")


def theorem_dims(
    kind: str,
    nu_hat: Optional[Number] = None,
    nu: Optional[Number] = None,
    alpha: Optional[Number] = None,
    beta: Optional[Number] = None,
    i: int = 1,
    B_schedule: Optional[Sequence[int]] = None,
) -> DimEstimate:
    """Piecewise dimension formulas for the uniform/asymptotic exponent and
    run-length level sets.

    kind:
      U_set    - uniform-approximation set, parameter nu_hat in [0,1]
      E_hat    - level set of the uniform exponent (same formula as U_set)
      E_joint  - joint level set of (nu_hat, nu)
      nu_level - level set of the asymptotic exponent, nu in [0, inf]
      FG       - intersection of liminf/limsup run-length level sets (i = 1)
      F        - liminf run-length level set (i = 1)

    The run-length kinds are golden-ratio scaled (runs of the digit 1), so i
    is forced to 1 there.  Degenerate branches return exactly 1, 1/2, or 0;
    interior arguments are passed to the full-alphabet solver.
    """
    if kind in ("FG", "F"):
        i = 1
    xi = theorem_argument(kind, nu_hat=nu_hat, nu=nu, alpha=alpha, beta=beta)
    if xi is None:
        return DimEstimate(0.0, (0.0, 0.0), method="piecewise-zero")
    if xi == 0:
        return DimEstimate(1.0, (1.0, 1.0), method="convention")
    if xi == 1:
        return DimEstimate(0.5, (0.5, 0.5), method="convention")
    return _dim_of_argument(xi, i, B_schedule)
