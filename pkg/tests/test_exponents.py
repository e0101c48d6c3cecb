"""Block decomposition, exponent estimates, exact distance brackets."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfdim.cf_core import RealInput, continuants, digit_seq, expand, target
from cfdim.errors import Exhausted, InsufficientBlocks, NoBlocks
from cfdim.exponents import (
    HitCheck,
    common_prefix_with_target,
    decompose,
    decompose_oracle,
    distance_bracket,
    exponent_estimates,
    uniform_hit_check,
)
from cfdim.surd import Surd

digit_lists = st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=120)


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------


def test_decompose_example():
    bd = decompose([3, 1, 1, 3, 1, 1, 1, 3], i=1)
    assert bd.raw_blocks == ((1, 3), (4, 7))
    assert bd.record_blocks == ((1, 3), (4, 7))


def test_decompose_all_i_single_block():
    bd = decompose([2] * 9, i=2)
    assert bd.raw_blocks == ((0, 9),)
    assert bd.record_blocks == ((0, 9),)


def test_decompose_no_blocks():
    with pytest.raises(NoBlocks):
        decompose([2, 3, 4], i=1)


def test_record_selection_skips_non_increasing():
    # runs of lengths 2, 1, 2, 4: records are the first and the length-4 run
    bd = decompose([1, 1, 3, 1, 3, 1, 1, 3, 1, 1, 1, 1], i=1)
    lengths = [m - n for n, m in bd.record_blocks]
    assert lengths == [2, 4]


@given(digit_lists)
def test_decompose_matches_oracle(digits):
    if 1 not in digits:
        return
    a = decompose(digits, 1)
    b = decompose_oracle(digits, 1)
    assert a.raw_blocks == b.raw_blocks
    assert a.record_blocks == b.record_blocks


def test_exponent_estimates_order():
    # designed blocks with known ratios
    digits = []
    pos = 0
    blocks = [(2, 5), (8, 17), (26, 53)]
    for n, m in blocks:
        digits += [3] * (n - pos) + [1] * (m - n)
        pos = m
    digits += [3] * 10
    bd = decompose(digits, 1)
    assert bd.record_blocks == tuple(blocks)
    est = exponent_estimates(bd, horizon=len(digits))
    assert est.k_used == 3
    assert est.nu_hat_est <= est.nu_est


def test_exponent_estimates_insufficient():
    with pytest.raises(InsufficientBlocks):
        exponent_estimates(decompose([1, 1, 1], i=1), horizon=3)


@given(digit_lists)
def test_nu_hat_below_nu(digits):
    if 1 not in digits:
        return
    bd = decompose(digits, 1)
    try:
        est = exponent_estimates(bd, horizon=len(digits))
    except InsufficientBlocks:
        return
    assert est.nu_hat_est <= est.nu_est + 1e-15


def test_random_digits_nu_small():
    rng = np.random.default_rng(42)
    digits = rng.integers(1, 10, size=1_000_000)
    bd = decompose(digits, 1)
    est = exponent_estimates(bd, horizon=digits.size)
    assert est.nu_est <= 0.05


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------


def test_distance_bracket_upper_example():
    # i = 1, common prefix m = 5: upper = |I_5(y)| = 1/(8*13) = 1/104
    t = target(1)
    d = digit_seq([1, 1, 1, 1, 1, 2, 1], complete=True)
    lo, up = distance_bracket(d, 0, t)
    assert up == Fraction(1, 104)
    assert lo == Fraction(1, 104) / 18


def test_distance_bracket_m0():
    t = target(2)
    d = digit_seq([3, 2, 2], complete=True)
    lo, up = distance_bracket(d, 0, t)
    assert up == Fraction(1)
    assert lo == Fraction(1, 2 * 16)


def test_common_prefix_exhaustion():
    t = target(2)
    d = digit_seq([2, 2, 2])  # might continue
    with pytest.raises(Exhausted):
        common_prefix_with_target(d, 0, 2)
    done = digit_seq([2, 2, 2], complete=True)
    assert common_prefix_with_target(done, 0, 2) == 3


def _orbit_distance_exact(x: Surd, digits, n: int, y: Surd) -> Surd:
    """|T^n(x) - y| in exact field arithmetic (same radicand)."""
    z = x
    for k in range(n):
        z = 1 / z - digits[k]
    diff = z - y
    return abs(diff)


def test_bracket_soundness_exact_random():
    # x in the same quadratic field as y: T^n(x) stays in the field, so the
    # true distance is exactly comparable with the rational bracket
    rng = np.random.default_rng(99)
    for i in (1, 2):
        t = target(i)
        D = i * i + 4
        base = Surd(-int(np.floor((D**0.5))), 1, D)  # sqrt(D) - floor(sqrt(D))
        checked = 0
        trials = 0
        while checked < 500 and trials < 5000:
            trials += 1
            k = int(rng.integers(1, 9))
            prefix = [int(a) for a in rng.integers(1, 6, size=k)]
            # x = [prefix..., then digits of base]: exact field element
            x = base
            for a in reversed(prefix):
                x = 1 / (a + x)
            digits = prefix + _surd_digits(base, 25)
            n = int(rng.integers(0, k + 3))
            m = 0
            j = n
            while j < len(digits) and digits[j] == i:
                m += 1
                j += 1
            if j >= len(digits):
                continue
            d = digit_seq(digits, complete=False)
            try:
                lo, up = distance_bracket(d, n, t)
            except Exhausted:
                continue
            dist = _orbit_distance_exact(x, digits, n, t.y)
            assert (dist - Fraction(lo)).sign() >= 0
            assert (dist - Fraction(up)).sign() < 0
            checked += 1
        assert checked >= 400


def _surd_digits(x: Surd, n: int):
    out = []
    z = x
    for _ in range(n):
        inv = 1 / z
        a = inv.floor()
        out.append(a)
        z = inv - a
    return out


# ---------------------------------------------------------------------------
# hit checks
# ---------------------------------------------------------------------------


def test_hit_check_zero_exponent_always_true():
    t = target(1)
    d = digit_seq([2, 3, 4, 5, 2, 3], complete=True)
    res = uniform_hit_check(d, t, N=3, nu_hat=0.0)
    assert res.verdict is True


def test_hit_check_monotone_in_exponent():
    t = target(1)
    rng = np.random.default_rng(5)
    digits = [int(a) for a in rng.integers(1, 4, size=400)]
    d = digit_seq(digits, complete=True)
    exps = [0.1, 0.3, 0.5, 0.8, 1.2]
    results = [uniform_hit_check(d, t, N=200, nu_hat=v) for v in exps]
    # once a hit fails at some exponent it cannot succeed at a larger one
    seen_false = False
    for r in results:
        if seen_false:
            assert r.verdict is not True
        if r.verdict is False:
            seen_false = True


def test_hit_check_long_run_hits():
    # a long i-run right at the start gives a very close approach
    t = target(1)
    digits = [1] * 60 + [2] + [3, 2] * 40
    d = digit_seq(digits, complete=True)
    assert uniform_hit_check(d, t, N=20, nu_hat=1.0).verdict is True


def test_hit_check_no_close_approach_fails():
    # digits avoiding i entirely except trivially short runs
    t = target(1)
    digits = [2, 3] * 100
    d = digit_seq(digits, complete=True)
    assert uniform_hit_check(d, t, N=50, nu_hat=1.5).verdict is False


def test_designed_point_hit_examples():
    # image points of the (1/2, 1) construction: hits at exponents below the
    # designed uniform rate, certified misses well above the asymptotic rate
    from fractions import Fraction

    from cfdim.cantor import CantorSpec, construct_sequences, insert_map, inserted_record_blocks, sample_measure

    spec = CantorSpec(B=3, i=1, sp=construct_sequences(Fraction(1, 2), 1, k_max=9), d=4)
    t = target(1)
    d = sample_measure(spec, depth=spec.sp.m[8], seed=77)
    res = insert_map(spec, d.digits)
    recs = inserted_record_blocks(spec, 9)
    N = recs[7][0]  # marker position before run 8: block 7 fully inside
    assert uniform_hit_check(res.digits, t, N=N, nu_hat=0.3).verdict is True
    assert uniform_hit_check(res.digits, t, N=N, nu_hat=1.5).verdict is False
