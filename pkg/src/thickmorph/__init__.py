"""Thick morphisms of manifolds and their quantum (oscillatory-integral)
counterparts: exact truncated-series pullbacks and compositions, the
Hamilton-Jacobi infinitesimal action, and semiclassical verification of the
classical limit."""

from .poly import (EPS, HBAR, Monomial, ParseError, Polynomial, VarName,
                   parse, rename_family, rename_variables, var)
from .series import (ComplexSeries, DEFAULT_GRADING, FixedPointDivergenceError,
                     FixedPointSolution, GradedSeries, Grading,
                     GradingMismatchError, exp_series, geometric_inverse,
                     log_series, series_add, series_mul, solve_fixed_point,
                     truncate)
from .morphism import (AdmissibilityError, CompositionResult, LieCheckReport,
                       PullbackResult, ThickMorphism, compose, compose_full,
                       epsilonize, from_map, hj_action, identity_morphism,
                       lie_algebra_check, poisson_bracket, pullback)
from .quantum import (DegenerateHessianError, PhaseResult, QuantumMorphism,
                      StationaryPointError, SweepRecord, SweepResult,
                      classical_limit_sweep, exact_gaussian_value,
                      numeric_oscillatory_integral, quantum_compose,
                      quantum_pullback_formal, sweep_csv_lines,
                      write_sweep_csv)

__all__ = [
    "EPS", "HBAR", "Monomial", "ParseError", "Polynomial", "VarName",
    "parse", "rename_family", "rename_variables", "var",
    "ComplexSeries", "DEFAULT_GRADING", "FixedPointDivergenceError",
    "FixedPointSolution", "GradedSeries", "Grading", "GradingMismatchError",
    "exp_series", "geometric_inverse", "log_series", "series_add",
    "series_mul", "solve_fixed_point", "truncate",
    "AdmissibilityError", "CompositionResult", "LieCheckReport",
    "PullbackResult", "ThickMorphism", "compose", "compose_full",
    "epsilonize", "from_map", "hj_action", "identity_morphism",
    "lie_algebra_check", "poisson_bracket", "pullback",
    "DegenerateHessianError", "PhaseResult", "QuantumMorphism",
    "StationaryPointError", "SweepRecord", "SweepResult",
    "classical_limit_sweep", "exact_gaussian_value",
    "numeric_oscillatory_integral", "quantum_compose",
    "quantum_pullback_formal", "sweep_csv_lines", "write_sweep_csv",
]

__version__ = "0.1.0"
