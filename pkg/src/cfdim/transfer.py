"""Chebyshev-collocation engine for Gauss-map transfer operators.

The weighted operator on the alphabet {1..B} with exponent s acts as

    (L_s f)(x) = sum_{a=1}^{B} (a + x)^{-2s} f(1/(a + x)),  x in [0, 1].

Functions are represented by their values on Chebyshev-Lobatto nodes and
evaluated elsewhere by barycentric interpolation; the inverse branches map
[0,1] into itself, so one application of L_s is a dense matrix product.

Two consumers:
  * the leading eigenvalue of L_s (log of which is the pressure), and
  * finite products L_s^f applied to a run-tail seed function, which evaluate
    constrained partition sums with forced trailing digits without
    enumerating the free digits.  Those iterations run in log-space to
    survive thousands of applications.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .errors import NoConvergence

DEFAULT_DEGREE = 32


class ChebyshevGrid:
    """Chebyshev-Lobatto nodes on [0,1] with barycentric interpolation."""

    def __init__(self, degree: int = DEFAULT_DEGREE):
        if degree < 2:
            raise ValueError("degree must be >= 2")
        self.degree = degree
        j = np.arange(degree + 1)
        self.nodes = 0.5 * (1.0 - np.cos(np.pi * j / degree))
        w = np.ones(degree + 1)
        w[1::2] = -1.0
        w[0] *= 0.5
        w[-1] *= 0.5
        self.weights = w
        self._digit_rows: Dict[int, np.ndarray] = {}

    def interp_matrix(self, points: np.ndarray) -> np.ndarray:
        """Rows of barycentric interpolation weights at the given points."""
        pts = np.asarray(points, dtype=np.float64)
        diff = pts[:, None] - self.nodes[None, :]
        exact = diff == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = self.weights[None, :] / diff
            out = terms / terms.sum(axis=1, keepdims=True)
        hit_rows = exact.any(axis=1)
        if hit_rows.any():
            out[hit_rows] = exact[hit_rows].astype(np.float64)
        return out

    def digit_matrix(self, a: int) -> np.ndarray:
        """Interpolation rows at the branch images 1/(a + nodes)."""
        m = self._digit_rows.get(a)
        if m is None:
            m = self.interp_matrix(1.0 / (a + self.nodes))
            self._digit_rows[a] = m
        return m

    def interp_value(self, values: np.ndarray, r: float) -> float:
        row = self.interp_matrix(np.array([r]))[0]
        return float(row @ values)


_GRIDS: Dict[int, ChebyshevGrid] = {}


def get_grid(degree: int = DEFAULT_DEGREE) -> ChebyshevGrid:
    g = _GRIDS.get(degree)
    if g is None:
        g = ChebyshevGrid(degree)
        _GRIDS[degree] = g
    return g


def transfer_matrix(B: int, s: float, degree: int = DEFAULT_DEGREE) -> np.ndarray:
    if B < 1:
        raise ValueError("alphabet bound must be >= 1")
    grid = get_grid(degree)
    x = grid.nodes
    M = np.zeros((x.size, x.size))
    for a in range(1, B + 1):
        M += (a + x)[:, None] ** (-2.0 * s) * grid.digit_matrix(a)
    return M


def leading_eigenvalue(M: np.ndarray, tol: float = 1e-12, maxiter: int = 100_000) -> float:
    """Dominant eigenvalue by power iteration with Rayleigh quotients."""
    v = np.ones(M.shape[0])
    lam_prev = np.inf
    stable = 0
    for _ in range(maxiter):
        w = M @ v
        lam = float(v @ w) / float(v @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            raise NoConvergence("operator annihilated the iterate")
        v = w / nw
        if lam != 0 and abs(lam - lam_prev) <= tol * abs(lam):
            stable += 1
            if stable >= 3:
                return lam
        else:
            stable = 0
        lam_prev = lam
    raise NoConvergence(f"power iteration did not reach rel tol {tol}")


def pressure(B: int, s: float, degree: int = DEFAULT_DEGREE, tol: float = 1e-12) -> float:
    """log of the leading eigenvalue of L_s on {1..B}."""
    lam = leading_eigenvalue(transfer_matrix(B, s, degree), tol=tol)
    if lam <= 0:
        raise NoConvergence(f"non-positive leading eigenvalue {lam}")
    return math.log(lam)


# ---------------------------------------------------------------------------
# log-space finite iteration with a run tail
# ---------------------------------------------------------------------------


def run_tail_logs(i: int, t: int) -> Tuple[float, float]:
    """(log q_t(i..i), q_{t-1}/q_t) via the closed form, stable for huge t."""
    if t == 0:
        return 0.0, 0.0
    D = i * i + 4
    tau = (i + math.sqrt(D)) / 2.0

    def logq(k: int) -> float:
        ratio = -1.0 / tau**2
        corr = math.log1p(-(ratio ** (k + 1))) if k < 600 else 0.0
        return (k + 1) * math.log(tau) + corr - math.log(math.sqrt(D))

    lq, lq1 = logq(t), logq(t - 1)
    return lq, math.exp(lq1 - lq)


@dataclass
class SegmentStack:
    """Log-values of the constrained completion sums of one segment.

    levels[j] holds log G_j at the grid nodes, where G_j(r) is the sum of
    (relative continuant)^{-2s} over all completions with j free digits left
    followed by the forced run tail; G_0 is the tail seed.
    """

    B: int
    i: int
    tail: int
    s: float
    degree: int
    levels: List[np.ndarray]

    def log_total(self) -> float:
        """log of the full segment sum (start state r = 0, all digits free)."""
        return float(self.levels[-1][0])  # node 0 is r = 0

    def eval_log(self, free_remaining: int, r: float) -> float:
        if free_remaining >= len(self.levels):
            raise IndexError("stack was built without keep_levels; per-depth values unavailable")
        grid = get_grid(self.degree)
        return float(grid.interp_matrix(np.array([r]))[0] @ self.levels[free_remaining])


def _stacked_digit_matrix(B: int, degree: int) -> np.ndarray:
    grid = get_grid(degree)
    return np.stack([grid.digit_matrix(a) for a in range(1, B + 1)])


def segment_stack(
    B: int, i: int, free: int, tail: int, s: float, degree: int = DEFAULT_DEGREE, keep_levels: bool = True
) -> SegmentStack:
    """Iterate the log-space operator `free` times from the run-tail seed."""
    grid = get_grid(degree)
    x = grid.nodes
    log_u, v_over_u = run_tail_logs(i, tail)
    g = -2.0 * s * (log_u + np.log1p(v_over_u * x))
    levels = [g.copy()]
    if free:
        C = _stacked_digit_matrix(B, degree)  # (B, n, n)
        a_col = np.arange(1, B + 1, dtype=np.float64)[:, None]
        W = -2.0 * s * np.log(a_col + x[None, :])  # (B, n)
        Cflat = C.reshape(B * x.size, x.size)
        for _ in range(free):
            interp = (Cflat @ g).reshape(B, x.size)
            g = _logsumexp_axis0(W + interp)
            if keep_levels:
                levels.append(g.copy())
        if not keep_levels:
            levels.append(g.copy())
    return SegmentStack(B=B, i=i, tail=tail, s=s, degree=degree, levels=levels)


def _logsumexp_axis0(arr: np.ndarray) -> np.ndarray:
    m = arr.max(axis=0)
    return m + np.log(np.exp(arr - m[None, :]).sum(axis=0))


def segment_log_sum(B: int, i: int, free: int, tail: int, s: float, degree: int = DEFAULT_DEGREE) -> float:
    """log of sum over free digit strings of q(free digits + i-run tail)^{-2s}."""
    return segment_stack(B, i, free, tail, s, degree, keep_levels=False).log_total()
