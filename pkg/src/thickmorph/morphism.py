"""Thick morphisms between coordinate patches and their nonlinear pullback.

A thick morphism from an n1-dimensional source to an n2-dimensional target is
specified by a generating function S(x, q) in the source positions x1..x_{n1}
and the target momenta q1..q_{n2}, kept as a truncated graded series.  The
q-linear part phi^i(x) q_i plays the role of an ordinary map; all higher
momentum terms must carry at least one power of eps so that the stationary
system defining the pullback,

    y^i = dS/dq_i(x, q),        q_i = dg/dy^i(y),

is a filtration contraction and can be solved order by order.  The pullback
of g is then g(y*) + S(x, q*) - y*.q*, and the composition of two thick
morphisms eliminates the intermediate (y, q) pair through the same solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .poly import (MOMENTUM_FAMILIES, Monomial, Polynomial, VarName,
                   rename_family)
from .series import (DEFAULT_GRADING, FixedPointSolution, GradedSeries,
                     Grading, solve_fixed_point, truncate)


class AdmissibilityError(ValueError):
    """Generating function violates the filtration rule or uses bad variables."""


def epsilonize(p: Polynomial) -> Polynomial:
    """Multiply each momentum-degree >= 2 monomial lacking eps by eps, making
    an arbitrary generating-function candidate admissible."""
    eps = Polynomial.variable(VarName("eps"))
    out = Polynomial.zero()
    for m, c in p.terms():
        needs = m.degree(MOMENTUM_FAMILIES) >= 2 and not any(
            v.family == "eps" for v in m.variables())
        piece = Polynomial({m: c})
        out = out + (piece * eps if needs else piece)
    return out


def _check_admissible(body: Polynomial, context: str) -> None:
    for m, _ in body.terms():
        if m.degree(MOMENTUM_FAMILIES) >= 2 and m.degree(frozenset({"eps"})) == 0:
            raise AdmissibilityError(
                f"{context}: monomial {m} has momentum degree >= 2 "
                "but no eps factor")


def _check_variables(body: Polynomial, source_dim: int, target_dim: int,
                     context: str, allow_hbar: bool = False) -> None:
    for v in body.variables():
        ok = ((v.family == "x" and v.index <= source_dim)
              or (v.family == "q" and v.index <= target_dim)
              or v.family == "eps"
              or (allow_hbar and v.family == "hbar"))
        if not ok:
            raise AdmissibilityError(
                f"{context}: variable {v} is outside x1..x{source_dim}, "
                f"q1..q{target_dim}" + (", eps, hbar" if allow_hbar else ", eps"))


@dataclass(frozen=True)
class ThickMorphism:
    """Generating-function data of a thick morphism source -> target."""

    source_dim: int
    target_dim: int
    s: GradedSeries

    def __post_init__(self) -> None:
        if self.source_dim < 1 or self.target_dim < 1:
            raise ValueError("dimensions must be positive")
        _check_variables(self.s.body, self.source_dim, self.target_dim,
                         "generating function")
        _check_admissible(self.s.body, "generating function")

    def map_part(self) -> list[Polynomial]:
        """The coefficients phi^i(x) of the q-linear terms, i = 1..target_dim."""
        out = []
        for i in range(1, self.target_dim + 1):
            qi = VarName("q", i)
            coeff = Polynomial.zero()
            for m, c in self.s.body.terms():
                if m.exponent(qi) == 1 and m.degree(MOMENTUM_FAMILIES) == 1:
                    rest = Monomial([(v, e) for v, e in m.exps if v != qi])
                    coeff = coeff + Polynomial({rest: c})
            out.append(coeff)
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ThickMorphism):
            return NotImplemented
        return (self.source_dim == other.source_dim
                and self.target_dim == other.target_dim
                and self.s == other.s)

    def __hash__(self) -> int:
        return hash((self.source_dim, self.target_dim, self.s))


def identity_morphism(n: int, order: int,
                      grading: Grading = DEFAULT_GRADING) -> ThickMorphism:
    """S = sum_i x_i q_i, the unit of the formal category."""
    body = Polynomial.zero()
    for i in range(1, n + 1):
        body = body + Polynomial.variable(VarName("x", i)) \
            * Polynomial.variable(VarName("q", i))
    return ThickMorphism(n, n, truncate(body, grading, order))


def from_map(components: Sequence[Polynomial], order: int,
             grading: Grading = DEFAULT_GRADING,
             source_dim: int | None = None) -> ThickMorphism:
    """Embed an ordinary polynomial map as S = sum_i phi^i(x) q_i.

    Each component must involve x-variables only; the source dimension is
    inferred from the highest x index unless given.
    """
    n2 = len(components)
    if n2 < 1:
        raise ValueError("need at least one component")
    body = Polynomial.zero()
    max_x = 1
    for i, comp in enumerate(components, start=1):
        for v in comp.variables():
            if v.family != "x":
                raise AdmissibilityError(
                    f"map component {i} contains non-position variable {v}")
            max_x = max(max_x, v.index)
        body = body + comp * Polynomial.variable(VarName("q", i))
    n1 = source_dim if source_dim is not None else max_x
    return ThickMorphism(n1, n2, truncate(body, grading, order))


@dataclass(frozen=True)
class PullbackResult:
    """Pullback value f(x) plus the solved stationary point as series."""

    f: GradedSeries
    y_sol: dict[VarName, GradedSeries]
    q_sol: dict[VarName, GradedSeries]
    iterations: int


def _stationary_solve(s: GradedSeries, target_dim: int,
                      dgdy: Sequence[Polynomial],
                      phi: Sequence[Polynomial]) -> FixedPointSolution:
    """Shared stationary system: y_i = dS/dq_i, q_i = (outer derivative)_i."""
    grading, order = s.grading, s.order
    unknowns, rhs, seed = [], {}, {}
    phi_bind = {VarName("y", i + 1): phi[i] for i in range(target_dim)}
    for i in range(1, target_dim + 1):
        yi, qi = VarName("y", i), VarName("q", i)
        unknowns += [yi, qi]
        rhs[yi] = s.with_body(s.body.partial(qi))
        rhs[qi] = truncate(dgdy[i - 1], grading, order)
        seed[yi] = truncate(phi[i - 1], grading, order)
        seed[qi] = truncate(dgdy[i - 1].substitute(phi_bind), grading, order)
    return solve_fixed_point(unknowns, rhs, seed)


def pullback(morphism: ThickMorphism, g: Polynomial) -> PullbackResult:
    """Nonlinear pullback of g(y) through the morphism.

    g may involve y1..y_{target_dim} and eps-family parameters only.  Returns
    the pullback as a series in x (and eps) together with the stationary
    solution (y*, q*) and the sweep count of the solver.
    """
    n2 = morphism.target_dim
    for v in g.variables():
        if not ((v.family == "y" and v.index <= n2) or v.family == "eps"):
            raise AdmissibilityError(
                f"pullback argument contains {v}; expected y1..y{n2} and eps")
    dgdy = [g.partial(VarName("y", i)) for i in range(1, n2 + 1)]
    sol = _stationary_solve(morphism.s, n2, dgdy, morphism.map_part())
    y_sol = {v: sv for v, sv in sol.values.items() if v.family == "y"}
    q_sol = {v: sv for v, sv in sol.values.items() if v.family == "q"}

    s = morphism.s
    f = truncate(g, s.grading, s.order).substitute(y_sol) + s.substitute(q_sol)
    for i in range(1, n2 + 1):
        f = f - y_sol[VarName("y", i)] * q_sol[VarName("q", i)]
    bad = {v for v in f.body.variables() if v.family in ("y", "q")}
    if bad:
        raise AssertionError(f"pullback failed to eliminate {sorted(map(str, bad))}")
    return PullbackResult(f, y_sol, q_sol, sol.iterations)


@dataclass(frozen=True)
class CompositionResult:
    morphism: ThickMorphism
    y_sol: dict[VarName, GradedSeries]
    q_sol: dict[VarName, GradedSeries]
    iterations: int


def compose_full(outer: ThickMorphism, inner: ThickMorphism) -> CompositionResult:
    """Composition outer . inner (inner applied first), with the stationary
    data of the intermediate (y, q) elimination.

    The composed generating function is
    S(x, r) = S_inner(x, q*) + S_outer(y*, r) - y*.q*  with
    y^i = dS_inner/dq_i(x, q) and q_i = dS_outer/dy^i(y, r), then r renamed
    back to the q family.
    """
    if inner.target_dim != outer.source_dim:
        raise ValueError(
            f"dimension mismatch: inner target {inner.target_dim} != "
            f"outer source {outer.source_dim}")
    n_mid = inner.target_dim
    s1 = inner.s
    # move the outer morphism to intermediate positions y and final momenta r
    outer_body = rename_family(rename_family(outer.s.body, "q", "r"), "x", "y")
    douter_dy = [outer_body.partial(VarName("y", i)) for i in range(1, n_mid + 1)]
    sol = _stationary_solve(s1, n_mid, douter_dy, inner.map_part())
    y_sol = {v: sv for v, sv in sol.values.items() if v.family == "y"}
    q_sol = {v: sv for v, sv in sol.values.items() if v.family == "q"}

    s = s1.substitute(q_sol) + truncate(outer_body, s1.grading, s1.order).substitute(y_sol)
    for i in range(1, n_mid + 1):
        s = s - y_sol[VarName("y", i)] * q_sol[VarName("q", i)]
    composed = ThickMorphism(inner.source_dim, outer.target_dim,
                             s.with_body(rename_family(s.body, "r", "q")))
    return CompositionResult(composed, y_sol, q_sol, sol.iterations)


def compose(outer: ThickMorphism, inner: ThickMorphism) -> ThickMorphism:
    """Composition outer . inner (inner applied first)."""
    return compose_full(outer, inner).morphism


def hj_action(hamiltonian: Polynomial, f: Polynomial) -> Polynomial:
    """The infinitesimal action f -> f + eps * H(x, df/dx).

    H may involve the x and q families; f must involve x only.  Exact: every
    momentum q_a in H is replaced by the partial derivative df/dx_a.
    """
    for v in f.variables():
        if v.family != "x":
            raise AdmissibilityError(f"function must be in x only, found {v}")
    bindings = {}
    for v in hamiltonian.variables():
        if v.family == "q":
            bindings[v] = f.partial(VarName("x", v.index))
        elif v.family != "x":
            raise AdmissibilityError(
                f"hamiltonian must be in x and q only, found {v}")
    eps = Polynomial.variable(VarName("eps"))
    return f + eps * hamiltonian.substitute(bindings)


def poisson_bracket(f: Polynomial, g: Polynomial) -> Polynomial:
    """Canonical bracket {f, g} = sum_a (df/dq_a dg/dx_a - df/dx_a dg/dq_a)."""
    indices = {v.index for v in (f.variables() | g.variables())
               if v.family in ("x", "q")}
    out = Polynomial.zero()
    for a in sorted(indices):
        xa, qa = VarName("x", a), VarName("q", a)
        out = out + f.partial(qa) * g.partial(xa) - f.partial(xa) * g.partial(qa)
    return out


@dataclass(frozen=True)
class LieCheckReport:
    """Outcome of the second-order commutator test of the bracket action."""

    sigma: int | None
    passed: bool
    commutator_coeff: Polynomial
    bracket_at_f: Polynomial

    def __str__(self) -> str:
        sig = "0" if self.sigma is None else f"{self.sigma:+d}"
        return f"sigma={sig} result={'pass' if self.passed else 'fail'}"


def _near_identity(hamiltonian: Polynomial, eps_index: int, n: int,
                   grading: Grading, order: int) -> ThickMorphism:
    body = Polynomial.zero()
    for i in range(1, n + 1):
        body = body + Polynomial.variable(VarName("x", i)) \
            * Polynomial.variable(VarName("q", i))
    body = body + Polynomial.variable(VarName("eps", eps_index)) * hamiltonian
    return ThickMorphism(n, n, truncate(body, grading, order))


def lie_algebra_check(h1: Polynomial, h2: Polynomial, f: Polynomial,
                      order: int = 2,
                      grading: Grading = DEFAULT_GRADING) -> LieCheckReport:
    """Check that the commutator of two near-identity pullbacks realizes the
    Poisson bracket through the infinitesimal action.

    Builds the morphisms generated by eps1*h1 and eps2*h2, computes the
    eps1*eps2 coefficient of the pullback commutator applied to f, and
    compares it with sigma * {h1, h2}(x, df/dx) for a global sign sigma.
    """
    n = max((v.index for v in (h1.variables() | h2.variables() | f.variables())
             if v.index is not None), default=1)
    phi1 = _near_identity(h1, 1, n, grading, order)
    phi2 = _near_identity(h2, 2, n, grading, order)

    def pull_through(first: ThickMorphism, second: ThickMorphism) -> Polynomial:
        g = rename_family(f, "x", "y")
        inner = pullback(first, g).f
        outer = pullback(second, rename_family(inner.body, "x", "y"))
        return outer.f.body

    commutator = (pull_through(phi2, phi1)
                  - pull_through(phi1, phi2))
    coeff = commutator.coefficient_of(VarName("eps", 1), 1) \
        .coefficient_of(VarName("eps", 2), 1)

    bracket = poisson_bracket(h1, h2)
    target = bracket.substitute(
        {v: f.partial(VarName("x", v.index))
         for v in bracket.variables() if v.family == "q"})

    if coeff.is_zero() and target.is_zero():
        return LieCheckReport(None, True, coeff, target)
    if coeff == target:
        return LieCheckReport(1, True, coeff, target)
    if coeff == -target:
        return LieCheckReport(-1, True, coeff, target)
    return LieCheckReport(None, False, coeff, target)
