"""Dimension solver tests: enumeration kernels, spectral route, theorem formulas."""

import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from cfdim import dim_solver as ds
from cfdim.cf_core import continuants
from cfdim.dim_solver import (
    DimQuery,
    SumKernelSpec,
    aitken,
    dim_full,
    dim_limit,
    predim_hat,
    predim_s,
    predim_tilde,
    spectral_dim,
    spectral_pressure,
    sum_power,
    theorem_dims,
    to_fraction,
)
from cfdim.errors import BudgetExceeded, NoConvergence, OutOfRange

PHI = (1 + math.sqrt(5)) / 2


# ---------------------------------------------------------------------------
# sum_power
# ---------------------------------------------------------------------------


def _exact_free_sum(B, n, rho2, tail=()):
    """Oracle: exact rational sum of q^(-2 rho) over {1..B}^n with rho2 = 2 rho int."""
    tot = Fraction(0)
    for digs in itertools.product(range(1, B + 1), repeat=n):
        q = continuants(list(digs) + list(tail)).qk(n + len(tail))
        tot += Fraction(1, q**rho2)
    return tot


def test_sum_power_single_term():
    assert sum_power(1, SumKernelSpec(free_length=3), 0.0) == pytest.approx(0.0, abs=1e-14)


def test_sum_power_exact_small_cases():
    # q_2 over {1,2}^2 is the multiset {2,3,3,5} by the recursion
    # (continuants are symmetric under digit reversal, so q(1,2) = q(2,1) = 3)
    exact = _exact_free_sum(2, 2, 2)
    assert exact == Fraction(1, 4) + Fraction(2, 9) + Fraction(1, 25)
    got = sum_power(2, SumKernelSpec(free_length=2), 1.0)
    assert got == pytest.approx(math.log(float(exact)), abs=1e-12)


def test_sum_power_tail_kernel_exact():
    exact = _exact_free_sum(2, 2, 2, tail=(1, 1))
    got = sum_power(2, SumKernelSpec(free_length=2, tail_i=2, tail_digit=1), 1.0)
    assert got == pytest.approx(math.log(float(exact)), abs=1e-12)


def test_sum_power_monotone_decreasing_in_rho():
    spec = SumKernelSpec(free_length=6, tail_i=3, tail_digit=2, scale_log=0.7)
    vals = [sum_power(3, spec, r) for r in np.linspace(0.05, 2.0, 15)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_sum_power_budget():
    with pytest.raises(BudgetExceeded):
        sum_power(3, SumKernelSpec(free_length=30), 1.0, node_budget=10**6)


def test_sum_power_chunked_matches_cached(monkeypatch):
    spec = SumKernelSpec(free_length=9, tail_i=1, tail_digit=1)
    cached = sum_power(4, spec, 1.0)
    exact = _exact_free_sum(4, 9, 2, tail=(1,))
    assert cached == pytest.approx(math.log(float(exact)), rel=1e-12)
    # force the streaming path and compare
    monkeypatch.setattr(ds, "_CACHE_LIMIT", 64)
    monkeypatch.setattr(ds, "_CHUNK", 256)
    monkeypatch.setattr(ds, "_state_cache", {})
    monkeypatch.setattr(ds, "_qtotal_cache", {})
    streamed = sum_power(4, spec, 1.0)
    assert streamed == pytest.approx(math.log(float(exact)), rel=5e-13)


def test_sum_power_threads_deterministic():
    spec = SumKernelSpec(free_length=8, tail_i=2, tail_digit=1)
    a = sum_power(3, spec, 0.7, threads=1)
    b = sum_power(3, spec, 0.7, threads=4)
    assert a == b


# ---------------------------------------------------------------------------
# pre-dimensional numbers
# ---------------------------------------------------------------------------


def test_predim_b1_is_zero():
    for n in (2, 5, 9):
        for alpha in (0, Fraction(1, 3), 0.7):
            assert predim_hat(DimQuery(B=1, alpha=alpha, i=1, n=n)).value == 0.0
            assert predim_s(DimQuery(B=1, alpha=alpha, i=1, n=n)).value == 0.0


def test_predim_hat_matches_brute_force_root():
    # independent mpmath root of the exact sum at B=2, n=10
    qs = [continuants(list(d)).qk(10) for d in itertools.product((1, 2), repeat=10)]
    f = lambda rho: mpmath.fsum(mpmath.mpf(q) ** (-2 * rho) for q in qs) - 1
    ref = float(mpmath.findroot(f, 0.55))
    est = predim_hat(DimQuery(B=2, alpha=0, i=1, n=10))
    assert est.value == pytest.approx(ref, abs=1e-10)


def test_predim_hat_root_residual():
    # the returned rho satisfies |log-sum| <= 1e-9 (finite-alphabet equality)
    q = DimQuery(B=3, alpha=Fraction(1, 2), i=1, n=10)
    est = predim_hat(q)
    scale = float(Fraction(1, 2) / Fraction(1, 2)) * q.n * ds.log_tau(1)
    res = sum_power(3, SumKernelSpec(free_length=10, scale_log=scale), est.value)
    assert abs(res) <= 1e-9


def test_predim_alpha_zero_coincide():
    for B in (2, 3):
        h = predim_hat(DimQuery(B=B, alpha=0, i=1, n=9)).value
        s = predim_s(DimQuery(B=B, alpha=0, i=1, n=9)).value
        assert h == s


def test_predim_alpha_one_degenerate():
    est = predim_s(DimQuery(B=3, alpha=1, i=1, n=8))
    assert est.value == 0.0 and est.degenerate


def test_predim_s_close_to_hat():
    a = predim_s(DimQuery(B=3, alpha=Fraction(1, 2), i=1, n=12)).value
    b = predim_hat(DimQuery(B=3, alpha=Fraction(1, 2), i=1, n=12)).value
    assert abs(a - b) <= 0.05


def test_predim_order_one_has_no_root():
    with pytest.raises(NoConvergence):
        predim_hat(DimQuery(B=2, alpha=0, i=1, n=1))


def test_predim_tilde_identities():
    # tail_len = 0 coincides with the hat number at alpha = 0
    t0 = predim_tilde(3, 0, 1, (8, 0)).value
    h0 = predim_hat(DimQuery(B=3, alpha=0, i=1, n=8)).value
    assert t0 == pytest.approx(h0, abs=1e-11)
    assert predim_tilde(1, 0.5, 1, (9, 4)).value == 0.0
    # same sum as predim_s(alpha=1/2, n=12)
    t = predim_tilde(3, Fraction(1, 2), 1, (12, 6)).value
    s = predim_s(DimQuery(B=3, alpha=Fraction(1, 2), i=1, n=12)).value
    assert t == pytest.approx(s, abs=1e-9)


def test_predim_tilde_operator_backend_agrees():
    for seg in ((20, 12), (30, 20)):
        e = predim_tilde(3, 0.7, 1, seg, method="enumerate").value
        o = predim_tilde(3, 0.7, 1, seg, method="operator").value
        assert o == pytest.approx(e, abs=1e-10)


def test_predim_tilde_budget_error():
    with pytest.raises(BudgetExceeded):
        predim_tilde(3, 0.7, 1, (60, 10), method="enumerate", node_budget=10**6)


# ---------------------------------------------------------------------------
# spectral route
# ---------------------------------------------------------------------------


def test_pressure_single_branch_closed_form():
    # one inverse branch: pressure is -2 s log(phi), the value at the golden
    # fixed point x = 1/(1+x)
    for s in (0.2, 0.5, 1.0, 1.7):
        assert spectral_pressure(1, s) == pytest.approx(-2 * s * math.log(PHI), abs=1e-11)


def test_pressure_strictly_decreasing_in_s():
    for B in (2, 5):
        vals = [spectral_pressure(B, s) for s in np.linspace(0.05, 1.6, 12)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_pressure_at_zero_is_log_alphabet():
    for B in (1, 2, 7):
        assert spectral_pressure(B, 0.0) == pytest.approx(math.log(B), abs=1e-11)


def test_spectral_dim_b2_bounded_type_value():
    est = spectral_dim(2, 0, 1)
    assert abs(est.value - 0.5313) <= 5e-4
    assert est.bracket[1] - est.bracket[0] <= 1e-8


def test_spectral_dim_alpha_monotone():
    for B in (2, 4):
        v1 = spectral_dim(B, Fraction(1, 5), 1).value
        v2 = spectral_dim(B, Fraction(2, 5), 1).value
        assert v1 >= v2


def test_spectral_dim_b1_zero():
    for alpha in (0, 0.3):
        assert spectral_dim(1, alpha, 1).value == 0.0


# ---------------------------------------------------------------------------
# limits and cross-validation
# ---------------------------------------------------------------------------


def test_dim_limit_b1():
    est = dim_limit(1, 0.3, 1, (3, 6, 12))
    assert est.value == 0.0 and all(v == 0.0 for v in est.trace)


def test_dim_limit_b2_alpha0_extrapolation():
    est = dim_limit(2, 0, 1, (3, 6, 12))
    assert 0.525 <= est.value <= 0.537
    # successive raw values drift slowly (empirical Cauchy check)
    diffs = [abs(a - b) for a, b in zip(est.trace, est.trace[1:])]
    assert all(d < 0.06 for d in diffs)


def test_dim_limit_agrees_with_spectral_grid():
    for B in (1, 2, 3):
        for alpha in (0, Fraction(1, 4), Fraction(1, 2)):
            for i in (1, 2):
                e = dim_limit(B, alpha, i, (3, 6, 12))
                s = spectral_dim(B, alpha, i)
                gap = abs(e.value - s.value)
                half_e = (e.bracket[1] - e.bracket[0]) / 2
                half_s = (s.bracket[1] - s.bracket[0]) / 2
                assert gap <= 0.01
                assert gap <= half_e + half_s + 1e-12


def test_dim_limit_raw_trend_small_steps():
    est = dim_limit(3, Fraction(1, 2), 1, (8, 10, 12, 14))
    diffs = [abs(a - b) for a, b in zip(est.trace, est.trace[1:])]
    assert all(d < 0.02 for d in diffs)


def test_dim_full_conventions():
    assert dim_full(0, 1).value == 1.0
    assert dim_full(1, 1).value == 0.5
    assert dim_full(Fraction(1), 2).value == 0.5


def test_dim_full_interior_range_and_monotone():
    vals = []
    for num in (1, 3, 5, 7, 9):
        e = dim_full(Fraction(num, 10), 1)
        w = e.bracket[1] - e.bracket[0]
        assert 0 < e.value <= 1
        assert e.value > 0.5 - w
        vals.append(e.value)
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# theorem formulas
# ---------------------------------------------------------------------------


def test_theorem_conventions_exact():
    assert theorem_dims("U_set", nu_hat=0).value == 1.0
    assert theorem_dims("U_set", nu_hat=1).value == 0.5
    assert theorem_dims("E_hat", nu_hat=1, i=1).value == 0.5
    assert theorem_dims("F", alpha=0).value == 1.0
    assert theorem_dims("F", alpha=Fraction(1, 2)).value == 0.5
    assert theorem_dims("nu_level", nu=0).value == 1.0
    assert theorem_dims("nu_level", nu=float("inf")).value == 0.5
    assert theorem_dims("E_joint", nu_hat=0, nu=0).value == 1.0
    assert theorem_dims("E_joint", nu_hat=Fraction(1, 2), nu=float("inf")).value == 0.5
    assert theorem_dims("FG", alpha=0, beta=0).value == 1.0
    assert theorem_dims("FG", alpha=Fraction(1, 2), beta=1).value == 0.5


def test_theorem_zero_branches():
    assert theorem_dims("U_set", nu_hat=1.5).value == 0.0
    assert theorem_dims("E_hat", nu_hat=2).value == 0.0
    assert theorem_dims("E_joint", nu_hat=Fraction(2, 3), nu=1).value == 0.0
    assert theorem_dims("E_joint", nu_hat=1.2, nu=float("inf")).value == 0.0
    assert theorem_dims("FG", alpha=Fraction(1, 2), beta=Fraction(3, 5)).value == 0.0
    assert theorem_dims("F", alpha=0.7).value == 0.0


def test_theorem_out_of_range():
    with pytest.raises(OutOfRange):
        theorem_dims("U_set", nu_hat=-0.1)
    with pytest.raises(OutOfRange):
        theorem_dims("E_joint", nu_hat=2, nu=1)
    with pytest.raises(OutOfRange):
        theorem_dims("FG", alpha=0.8, beta=0.5)
    with pytest.raises(OutOfRange):
        theorem_dims("F", alpha=1.2)
    with pytest.raises(OutOfRange):
        theorem_dims("banana", nu=1)


def test_theorem_interior_calls_solver():
    e = theorem_dims("nu_level", nu=1, i=1, B_schedule=(8, 16, 32))
    # argument nu/(1+nu) = 1/2; same as dim_full(1/2, 1)
    ref = dim_full(Fraction(1, 2), 1, (8, 16, 32))
    assert e.value == pytest.approx(ref.value, abs=1e-12)


def test_minimizer_identities_exact():
    # 4 nh/(1+nh)^2 == nu^2/((1+nu)(nu-nh)) at nu = 2 nh/(1-nh), exact rationals
    for k in range(1, 1000):
        nh = Fraction(k, 1001)
        nu = 2 * nh / (1 - nh)
        lhs = 4 * nh / (1 + nh) ** 2
        rhs = nu**2 / ((1 + nu) * (nu - nh))
        assert lhs == rhs
    # 4 a (1-a) == b^2 (1-a)/(b-a) at b = 2a
    for k in range(1, 1000):
        a = Fraction(k, 2001)
        b = 2 * a
        assert 4 * a * (1 - a) == b**2 * (1 - a) / (b - a)


def test_theorem_consistency_on_minimizers():
    nh = Fraction(1, 3)
    nu = 2 * nh / (1 - nh)
    e1 = theorem_dims("E_hat", nu_hat=nh, B_schedule=(8, 16, 32))
    e2 = theorem_dims("E_joint", nu_hat=nh, nu=nu, B_schedule=(8, 16, 32))
    assert e1.value == pytest.approx(e2.value, abs=1e-12)


def test_to_fraction():
    assert to_fraction(Fraction(1, 3)) == Fraction(1, 3)
    assert to_fraction(2) == 2
    assert to_fraction(0.5) == Fraction(1, 2)
    assert abs(float(to_fraction(0.333)) - 0.333) < 1e-15
    with pytest.raises(ValueError):
        to_fraction(float("inf"))


def test_predim_rejects_infinite_alphabet_marker():
    with pytest.raises(OutOfRange):
        predim_hat(DimQuery(B=None, alpha=0, i=1, n=6))
    with pytest.raises(OutOfRange):
        predim_s(DimQuery(B=None, alpha=0.5, i=1, n=6))


def test_pressure_matches_partition_sum_growth():
    # the log partition sums grow by P_B(s) per level: an independent
    # consistency check between the enumeration route and the eigenvalue
    for B, s in ((2, 0.6), (3, 0.4)):
        l10 = sum_power(B, SumKernelSpec(free_length=10), s)
        l11 = sum_power(B, SumKernelSpec(free_length=11), s)
        p = spectral_pressure(B, s)
        assert abs((l11 - l10) - p) <= 2e-3
