"""Exact continued-fraction kernels.

Expansion of rationals / quadratic surds / uncertainty-budgeted decimals into
partial quotients, continuant tables p_k, q_k, exact cylinder intervals, the
digit shift realizing the Gauss map, and quadratic targets y = [i, i, ...].

Everything here is exact: rationals are `fractions.Fraction`, surds live in
`cfdim.surd.Surd`, continuants are arbitrary-precision integers.  Floating
point appears only in convenience accessors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

import mpmath

from .errors import Exhausted, InputOutOfRange, Overflow
from .surd import Surd, is_square

MAX_DIGIT = 2**63 - 1  # machine-word cap on a single partial quotient

DEFAULT_PRECISION_BITS = 256


# ---------------------------------------------------------------------------
# inputs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealInput:
    """A number x in (0,1) given exactly (rational, surd) or with a precision
    budget (decimal string).

    kind: "rational" | "surd" | "decimal"
    """

    kind: str
    frac: Optional[Fraction] = None
    surd_u: int = 0
    surd_v: int = 0
    surd_w: int = 1
    surd_d: int = 0
    decimal: str = ""
    precision_bits: Optional[int] = None

    @staticmethod
    def rational(p: int, q: int) -> "RealInput":
        if q < 1 or not (0 < p < q):
            raise InputOutOfRange(f"rational {p}/{q} not in (0,1)")
        return RealInput(kind="rational", frac=Fraction(p, q))

    @staticmethod
    def surd(u: int, v: int, w: int, d: int) -> "RealInput":
        """(u + v*sqrt(d)) / w, must be irrational and inside (0,1)."""
        if d <= 0 or is_square(d):
            raise InputOutOfRange(f"radicand {d} must be a positive non-square")
        if v == 0 or w == 0:
            raise InputOutOfRange("surd must be irrational with nonzero denominator")
        x = Surd(Fraction(u, w), Fraction(v, w), d)
        if not (x.sign() > 0 and (x - 1).sign() < 0):
            raise InputOutOfRange("surd does not lie in (0,1)")
        return RealInput(kind="surd", surd_u=u, surd_v=v, surd_w=w, surd_d=d)

    @staticmethod
    def decimal_input(s: str, precision_bits: Optional[int] = None) -> "RealInput":
        if precision_bits is not None and precision_bits < 64:
            raise InputOutOfRange("precision budget must be at least 64 bits")
        try:
            v = Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputOutOfRange(f"cannot parse decimal {s!r}") from exc
        if not (0 < v < 1):
            raise InputOutOfRange(f"decimal {s} not in (0,1)")
        return RealInput(kind="decimal", frac=v, decimal=s, precision_bits=precision_bits)

    def as_surd(self) -> Surd:
        if self.kind != "surd":
            raise ValueError("not a surd input")
        return Surd(Fraction(self.surd_u, self.surd_w), Fraction(self.surd_v, self.surd_w), self.surd_d)


@dataclass(frozen=True)
class DigitSeq:
    """Certified partial quotients a_1..a_n.

    `exhausted` is True when no further digit is certified: the rational
    expansion terminated, or the input's uncertainty interval no longer fits
    inside a single cylinder.  `complete` additionally marks sequences whose
    expansion genuinely terminated (rationals), so that a run touching the
    end of the digits is known to end there rather than being uncertain.
    """

    digits: Tuple[int, ...]
    exhausted: bool = False
    source: Optional[RealInput] = None
    complete: bool = False

    def __post_init__(self):
        for a in self.digits:
            if a < 1:
                raise ValueError("partial quotients must be >= 1")
            if a > MAX_DIGIT:
                raise Overflow(f"digit {a} exceeds machine word")

    def __len__(self):
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __getitem__(self, k):
        return self.digits[k]


def digit_seq(
    digits: Iterable[int],
    exhausted: bool = False,
    source: Optional[RealInput] = None,
    complete: bool = False,
) -> DigitSeq:
    return DigitSeq(tuple(int(a) for a in digits), exhausted=exhausted, source=source, complete=complete)


# ---------------------------------------------------------------------------
# continuants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuantTable:
    """Numerators p_{-1}..p_n and denominators q_{-1}..q_n of the convergents,
    stored with an index offset of 1 (list position k+1 holds index k)."""

    p: Tuple[int, ...]
    q: Tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.q) - 2

    def pk(self, k: int) -> int:
        return self.p[k + 1]

    def qk(self, k: int) -> int:
        return self.q[k + 1]

    def convergent(self, k: int) -> Fraction:
        return Fraction(self.pk(k), self.qk(k))


def continuants(d: Sequence[int] | DigitSeq) -> ContinuantTable:
    """Run the two-term recursion p_{n+1} = a_{n+1} p_n + p_{n-1} (same for q)
    from p_{-1}=1, q_{-1}=0, p_0=0, q_0=1."""
    digits = d.digits if isinstance(d, DigitSeq) else tuple(d)
    if not digits:
        raise ValueError("empty digit sequence")
    p = [1, 0]
    q = [0, 1]
    for a in digits:
        a = int(a)
        p.append(a * p[-1] + p[-2])
        q.append(a * q[-1] + q[-2])
    return ContinuantTable(tuple(p), tuple(q))


def run_continuant(i: int, n: int) -> int:
    """q_n(i, ..., i): continuant of a constant run, by the exact recursion."""
    if i < 1 or n < 0:
        raise ValueError("need i >= 1, n >= 0")
    prev, cur = 0, 1  # q_{-1}, q_0
    for _ in range(n):
        prev, cur = cur, i * cur + prev
    return cur


def run_continuant_closed_form(i: int, n: int) -> int:
    """Same value via (tau^{n+1} - zeta^{n+1}) / (tau - zeta) in exact surd
    arithmetic; used as an independent cross-check of the recursion."""
    D = i * i + 4
    tau = Surd(Fraction(i, 2), Fraction(1, 2), D)
    zeta = Surd(Fraction(i, 2), Fraction(-1, 2), D)
    val = (tau ** (n + 1) - zeta ** (n + 1)) / (tau - zeta)
    f = val.as_fraction()
    if f.denominator != 1:
        raise ArithmeticError("closed form did not produce an integer")
    return f.numerator


# ---------------------------------------------------------------------------
# cylinder intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasicInterval:
    """Cylinder of all x sharing a digit prefix, normalized to [left, right).

    length == 1/(q_n (q_n + q_{n-1})) exactly.  Some sources print the
    denominator as q_n (q_n + q_{n+1}); that contradicts the standard bound
    1/(2 q_n^2) <= |I_n| (q_{n+1} > q_n), so the q_{n-1} identity is used and
    verified against the exact endpoints.
    """

    order: int
    digits: Tuple[int, ...]
    left: Fraction
    right: Fraction
    length: Fraction


def basic_interval(d: Sequence[int] | DigitSeq) -> BasicInterval:
    digits = d.digits if isinstance(d, DigitSeq) else tuple(int(a) for a in d)
    t = continuants(digits)
    n = len(digits)
    qn, qn1 = t.qk(n), t.qk(n - 1)
    pn, pn1 = t.pk(n), t.pk(n - 1)
    e1 = Fraction(pn, qn)
    e2 = Fraction(pn + pn1, qn + qn1)
    left, right = (e1, e2) if e1 < e2 else (e2, e1)
    length = Fraction(1, qn * (qn + qn1))
    assert right - left == length
    return BasicInterval(order=n, digits=digits, left=left, right=right, length=length)


def gauss_shift(d: DigitSeq, n: int) -> DigitSeq:
    """Digit sequence of T^n(x): drop the first n partial quotients."""
    if n < 0:
        raise ValueError("shift must be >= 0")
    if len(d.digits) < n + 1:
        raise Exhausted(f"need at least {n + 1} certified digits, have {len(d.digits)}")
    return DigitSeq(d.digits[n:], exhausted=d.exhausted, source=d.source, complete=d.complete)


# ---------------------------------------------------------------------------
# expansion
# ---------------------------------------------------------------------------


def _check_digit(a: int) -> int:
    if a > MAX_DIGIT:
        raise Overflow(f"partial quotient {a} exceeds machine word")
    return a


def _expand_rational(x: Fraction, n: int) -> Tuple[Tuple[int, ...], bool]:
    # Euclid on (p, q): a = q // p, then (p, q) <- (q mod p, p)
    p, q = x.numerator, x.denominator
    digits = []
    while p != 0 and len(digits) < n:
        a, r = divmod(q, p)
        digits.append(_check_digit(a))
        p, q = r, p
    return tuple(digits), p == 0


def _expand_surd_digits(x: RealInput, n: int) -> Tuple[int, ...]:
    """PQa algorithm on (P + sqrt(D))/Q with the invariant Q | (D - P^2)."""
    u, v, w, dd = x.surd_u, x.surd_v, x.surd_w, x.surd_d
    if v < 0:
        u, v, w = -u, -v, -w
    P = u * abs(w)
    D = v * v * dd * w * w
    Q = w * abs(w)
    s = math.isqrt(D)

    def fl(P, Q):
        if Q > 0:
            return (P + s) // Q
        return -((P + s) // (-Q)) - 1

    if fl(P, Q) != 0:
        raise InputOutOfRange("surd not in (0,1)")
    digits = []
    a = 0
    for _ in range(n):
        P = a * Q - P
        Q = (D - P * P) // Q
        a = fl(P, Q)
        digits.append(_check_digit(a))
    return tuple(digits)


def _expand_decimal(x: RealInput, n: int) -> Tuple[Tuple[int, ...], bool]:
    """Certify digits while [v - eps, v + eps] sits strictly inside one cylinder.

    Default budget 4n + 64 bits: an expected ~3.5 bits of information per
    digit plus guard, so uniform samples certify n digits with overwhelming
    probability.
    """
    bits = x.precision_bits if x.precision_bits is not None else 4 * n + 64
    eps = Fraction(1, 2**bits)
    v = x.frac
    lo, hi = v - eps, v + eps
    if not (0 < lo and hi < 1):
        return (), True
    digits: list[int] = []
    p = [1, 0]
    q = [0, 1]
    rem = v
    for _ in range(n):
        if rem == 0:
            return tuple(digits), True
        a = rem.denominator // rem.numerator
        pn = a * p[-1] + p[-2]
        qn = a * q[-1] + q[-2]
        e1 = Fraction(pn, qn)
        e2 = Fraction(pn + p[-1], qn + q[-1])
        left, right = (e1, e2) if e1 < e2 else (e2, e1)
        if not (left < lo and hi < right):
            return tuple(digits), True
        digits.append(_check_digit(a))
        p.append(pn)
        q.append(qn)
        rem = Fraction(rem.denominator, rem.numerator) - a
    return tuple(digits), False


def expand(x: RealInput, n: int) -> DigitSeq:
    """First n partial quotients of x, with certification semantics per kind.

    Rational inputs give the exact finite expansion (exhausted once it
    terminates); surd inputs always yield n digits; decimal inputs yield the
    certified prefix and exhausted=True if certification stops early.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if x.kind == "rational":
        digits, done = _expand_rational(x.frac, n)
        return DigitSeq(digits, exhausted=done, source=x, complete=done)
    if x.kind == "surd":
        return DigitSeq(_expand_surd_digits(x, n), exhausted=False, source=x)
    if x.kind == "decimal":
        digits, ex = _expand_decimal(x, n)
        return DigitSeq(digits, exhausted=ex, source=x)
    raise ValueError(f"unknown input kind {x.kind!r}")


# ---------------------------------------------------------------------------
# quadratic targets y = [i, i, ...]
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticTarget:
    """The point y = (sqrt(i^2+4) - i)/2 = [i, i, ...] with its growth data:
    tau = (i + sqrt(i^2+4))/2 > 1, zeta = (i - sqrt(i^2+4))/2, g = log tau
    (the exponential growth rate of log q_n(y) / n)."""

    i: int
    y: Surd
    tau: mpmath.mpf
    zeta: mpmath.mpf
    g: mpmath.mpf
    precision_bits: int = DEFAULT_PRECISION_BITS

    @property
    def tau_exact(self) -> Surd:
        D = self.i * self.i + 4
        return Surd(Fraction(self.i, 2), Fraction(1, 2), D)

    @property
    def zeta_exact(self) -> Surd:
        D = self.i * self.i + 4
        return Surd(Fraction(self.i, 2), Fraction(-1, 2), D)

    def cylinder_length(self, m: int) -> Fraction:
        """|I_m(y)| = 1/(q_m (q_m + q_{m-1})) with constant-run continuants."""
        if m == 0:
            return Fraction(1)
        qm = run_continuant(self.i, m)
        qm1 = run_continuant(self.i, m - 1)
        return Fraction(1, qm * (qm + qm1))

    def log_run_continuant(self, m: int) -> float:
        """float log q_m(i,...,i) via the closed form; avoids bignum logs.

        log q_m = (m+1) log tau + log1p(-(zeta/tau)^{m+1}) - log(tau - zeta),
        with zeta/tau = -1/tau^2.
        """
        logtau = float(self.g)
        ratio = -1.0 / float(self.tau) ** 2
        corr = math.log1p(-(ratio ** (m + 1))) if m < 600 else 0.0
        return (m + 1) * logtau + corr - math.log(float(self.tau) - float(self.zeta))

    def log_cylinder_length(self, m: int) -> float:
        """float log |I_m(y)| = -(log q_m + log(q_m + q_{m-1}))."""
        if m == 0:
            return 0.0
        lq, lq1 = self.log_run_continuant(m), self.log_run_continuant(m - 1)
        return -(lq + _logaddexp(lq, lq1))


def _logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def target(i: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> QuadraticTarget:
    if i < 1:
        raise ValueError("i must be >= 1")
    D = i * i + 4
    with mpmath.workprec(precision_bits):
        root = mpmath.sqrt(D)
        tau = (i + root) / 2
        zeta = (i - root) / 2
        g = mpmath.log(tau)
    y = Surd(Fraction(-i, 2), Fraction(1, 2), D)
    return QuadraticTarget(i=i, y=y, tau=tau, zeta=zeta, g=g, precision_bits=precision_bits)
