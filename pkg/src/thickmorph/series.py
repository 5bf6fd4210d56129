"""Truncated formal power series over the polynomial ring.

A grading assigns integer weights to the formal parameters (eps, hbar) and,
optionally, to momentum degree in excess of one.  A :class:`GradedSeries` is a
polynomial kept truncated at a fixed grade; arithmetic re-truncates eagerly.
The module also provides the order-by-order fixed-point solver that both the
pullback and the composition of thick morphisms reduce to.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .poly import MOMENTUM_FAMILIES, Monomial, Polynomial, VarName


class GradingMismatchError(ValueError):
    """Arithmetic between series with different grading or order."""


class FixedPointDivergenceError(RuntimeError):
    """The Picard iteration failed to stabilize within the allowed sweeps."""


@dataclass(frozen=True)
class Grading:
    """Weights defining the filtration used for truncation.

    Each power of eps (any index) contributes ``eps_weight``, each power of
    hbar contributes ``hbar_weight``, and a monomial of momentum degree m >= 2
    contributes ``momentum_excess_weight * (m - 1)``.
    """

    eps_weight: int = 1
    hbar_weight: int = 1
    momentum_excess_weight: int = 0

    def __post_init__(self) -> None:
        for w in (self.eps_weight, self.hbar_weight, self.momentum_excess_weight):
            if w < 0:
                raise ValueError("grading weights must be nonnegative")
        if self.eps_weight == 0 and self.hbar_weight == 0 \
                and self.momentum_excess_weight == 0:
            raise ValueError("at least one grading weight must be positive")

    def grade(self, m: Monomial) -> int:
        g = 0
        if self.eps_weight or self.hbar_weight:
            for v, e in m.exps:
                if v.family == "eps":
                    g += self.eps_weight * e
                elif v.family == "hbar":
                    g += self.hbar_weight * e
        if self.momentum_excess_weight:
            mdeg = m.degree(MOMENTUM_FAMILIES)
            if mdeg >= 2:
                g += self.momentum_excess_weight * (mdeg - 1)
        return g


DEFAULT_GRADING = Grading()


@dataclass(frozen=True)
class GradedSeries:
    """A polynomial truncated at ``order`` in the given grading."""

    body: Polynomial
    grading: Grading = DEFAULT_GRADING
    order: int = 0

    def __post_init__(self) -> None:
        if self.order < 0:
            raise ValueError("truncation order must be nonnegative")
        kept = {m: c for m, c in self.body.terms()
                if self.grading.grade(m) <= self.order}
        if len(kept) != sum(1 for _ in self.body.terms()):
            object.__setattr__(self, "body", Polynomial(kept))

    # -- helpers -------------------------------------------------------------

    def _check_compatible(self, other: "GradedSeries") -> None:
        if self.grading != other.grading or self.order != other.order:
            raise GradingMismatchError(
                f"incompatible series: {self.grading}@{self.order} vs "
                f"{other.grading}@{other.order}")

    def with_body(self, body: Polynomial) -> "GradedSeries":
        return GradedSeries(body, self.grading, self.order)

    def grade_zero_part(self) -> Polynomial:
        return Polynomial({m: c for m, c in self.body.terms()
                           if self.grading.grade(m) == 0})

    def is_zero(self) -> bool:
        return self.body.is_zero()

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other) -> "GradedSeries":
        other = self._coerce(other)
        self._check_compatible(other)
        return self.with_body(self.body + other.body)

    def __sub__(self, other) -> "GradedSeries":
        other = self._coerce(other)
        self._check_compatible(other)
        return self.with_body(self.body - other.body)

    def __neg__(self) -> "GradedSeries":
        return self.with_body(-self.body)

    def __mul__(self, other) -> "GradedSeries":
        other = self._coerce(other)
        self._check_compatible(other)
        return self.with_body(self.body * other.body)

    def _coerce(self, other) -> "GradedSeries":
        if isinstance(other, GradedSeries):
            return other
        if isinstance(other, (int, Fraction, Polynomial)):
            return GradedSeries(
                other if isinstance(other, Polynomial) else Polynomial.constant(other),
                self.grading, self.order)
        raise TypeError(f"cannot combine GradedSeries with {type(other).__name__}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return (self.grading == other.grading and self.order == other.order
                and self.body == other.body)

    def __hash__(self) -> int:
        return hash((self.body, self.grading, self.order))

    def substitute(self, bindings: Mapping[VarName, "GradedSeries | Polynomial"]) \
            -> "GradedSeries":
        polyized = {v: (b.body if isinstance(b, GradedSeries) else b)
                    for v, b in bindings.items()}
        for v, b in bindings.items():
            if isinstance(b, GradedSeries):
                self._check_compatible(b)
        return self.with_body(self.body.substitute(polyized))

    def eval_numeric(self, point: Mapping[VarName, complex]) -> complex:
        return self.body.eval_numeric(point)

    def __str__(self) -> str:
        return str(self.body)


def truncate(p: Polynomial, grading: Grading = DEFAULT_GRADING,
             order: int = 0) -> GradedSeries:
    """Drop every term of grade above ``order``."""
    return GradedSeries(p, grading, order)


def series_add(a: GradedSeries, b: GradedSeries) -> GradedSeries:
    return a + b


def series_mul(a: GradedSeries, b: GradedSeries) -> GradedSeries:
    return a * b


def geometric_inverse(a: GradedSeries) -> GradedSeries:
    """Multiplicative inverse of a series whose grade-0 part is a nonzero
    constant, via the geometric series in the positive-grade remainder."""
    head = a.grade_zero_part()
    c = head.constant_term()
    if head != Polynomial.constant(c) or c == 0:
        raise ValueError("series is not invertible: grade-0 part must be a "
                         f"nonzero constant, got {head}")
    rest = a.with_body(a.body - Polynomial.constant(c))
    inv_c = Fraction(1) / c
    # 1/a = (1/c) * sum_k (-rest/c)^k
    minus_scaled = rest.with_body(rest.body * (-inv_c))
    acc = GradedSeries(Polynomial.constant(1), a.grading, a.order)
    power = acc
    for _ in range(a.order):
        power = power * minus_scaled
        if power.is_zero():
            break
        acc = acc + power
    return acc.with_body(acc.body * inv_c)


def log_series(a: GradedSeries) -> GradedSeries:
    """log of a series with grade-0 part exactly 1: u - u^2/2 + u^3/3 - ..."""
    if a.grade_zero_part() != Polynomial.constant(1):
        raise ValueError("log requires grade-0 part exactly 1, got "
                         f"{a.grade_zero_part()}")
    u = a.with_body(a.body - Polynomial.constant(1))
    acc = GradedSeries(Polynomial.zero(), a.grading, a.order)
    power = GradedSeries(Polynomial.constant(1), a.grading, a.order)
    for k in range(1, a.order + 1):
        power = power * u
        if power.is_zero():
            break
        sign = Fraction(1 if k % 2 else -1, k)
        acc = acc + power.with_body(power.body * sign)
    return acc


def exp_series(a: GradedSeries) -> GradedSeries:
    """exp of a series with zero grade-0 part: sum_k a^k / k!."""
    if not a.grade_zero_part().is_zero():
        raise ValueError("exp requires zero grade-0 part, got "
                         f"{a.grade_zero_part()}")
    acc = GradedSeries(Polynomial.constant(1), a.grading, a.order)
    power = acc
    fact = 1
    for k in range(1, a.order + 1):
        power = power * a
        if power.is_zero():
            break
        fact *= k
        acc = acc + power.with_body(power.body * Fraction(1, fact))
    return acc


@dataclass(frozen=True)
class FixedPointSolution:
    values: dict[VarName, GradedSeries]
    iterations: int


def solve_fixed_point(unknowns: Sequence[VarName],
                      rhs: Mapping[VarName, GradedSeries],
                      seed: Mapping[VarName, GradedSeries],
                      strategy: str = "gauss_seidel") -> FixedPointSolution:
    """Solve u_i = rhs_i(u_1, ..., u_k) order by order in the filtration.

    Requires the sweep map to be a filtration contraction: substituting the
    unknowns into the right-hand sides must strictly raise the grade of any
    error, so that sweep k is exact through grade k.  Sweeps update unknowns
    in ascending variable order; ``strategy="gauss_seidel"`` (the default)
    makes updates visible within a sweep, ``"jacobi"`` evaluates every
    right-hand side at the previous iterate.  Termination is detected by two
    consecutive identical iterates.
    """
    if strategy not in ("gauss_seidel", "jacobi"):
        raise ValueError(f"unknown strategy {strategy!r}")
    names = sorted(unknowns, key=lambda v: v.sort_key)
    if len(set(names)) != len(names):
        raise ValueError("duplicate unknowns")
    for u in names:
        if u not in rhs or u not in seed:
            raise ValueError(f"missing rhs or seed for unknown {u}")
    ref = rhs[names[0]]
    current: dict[VarName, GradedSeries] = {}
    for u in names:
        ref._check_compatible(rhs[u])
        ref._check_compatible(seed[u])
        current[u] = seed[u]

    order = ref.order
    # Gauss-Seidel gains one grade per sweep; Jacobi alternates gains between
    # the halves of a coupled system, so it is allowed twice the budget.
    cap = order + 2 if strategy == "gauss_seidel" else 2 * order + 4
    for sweep in range(1, cap + 1):
        previous = dict(current)
        if strategy == "jacobi":
            current = {u: rhs[u].substitute(previous) for u in names}
        else:
            for u in names:
                current[u] = rhs[u].substitute(current)
        if current == previous:
            return FixedPointSolution(current, sweep)
    raise FixedPointDivergenceError(
        f"no stabilization after {cap} sweeps; the system is not a "
        "filtration contraction (ill-graded generating function?)")


@dataclass(frozen=True)
class ComplexSeries:
    """A series with coefficients in Q(i), stored as real and imaginary parts."""

    re: GradedSeries
    im: GradedSeries

    def __post_init__(self) -> None:
        self.re._check_compatible(self.im)

    @staticmethod
    def from_real(re: GradedSeries) -> "ComplexSeries":
        return ComplexSeries(re, re.with_body(Polynomial.zero()))

    def __add__(self, other: "ComplexSeries") -> "ComplexSeries":
        return ComplexSeries(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexSeries") -> "ComplexSeries":
        return ComplexSeries(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "ComplexSeries") -> "ComplexSeries":
        return ComplexSeries(self.re * other.re - self.im * other.im,
                             self.re * other.im + self.im * other.re)

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def eval_numeric(self, point: Mapping[VarName, complex]) -> complex:
        return self.re.eval_numeric(point) + 1j * self.im.eval_numeric(point)

    def __str__(self) -> str:
        if self.im.is_zero():
            return str(self.re)
        return f"({self.re}) + i*({self.im})"
