"""Quantum pullbacks: formal stationary phase in hbar and direct quadrature.

A quantum morphism carries a generating function S_hbar(x, q) that may depend
on hbar; its hbar-degree-0 part must be an admissible classical generating
function.  Acting on an oscillatory function exp((i/hbar) g(y)), the pullback
integral

    (2 pi hbar)^(-n2) * Integral dy dq exp((i/hbar)(g(y) + S_hbar(x,q) - y.q))

is evaluated two ways: formally, by expanding around the stationary point of
the hbar-independent phase (leading phase f0 plus the order-hbar correction
f1 built from S_1 and the fluctuation determinant), and numerically, by
windowed trapezoid quadrature over a box centered at the real stationary
point.  A sweep over decreasing hbar extracts phases from the numeric values
with branch tracking and fits the convergence rates toward f0 and f0+hbar*f1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .morphism import ThickMorphism, compose_full, pullback
from .poly import HBAR, Polynomial, VarName, rename_family
from .series import ComplexSeries, GradedSeries, log_series, truncate


class DegenerateHessianError(ValueError):
    """Fluctuation determinant has no unit leading part."""


class StationaryPointError(RuntimeError):
    """Newton iteration for the real stationary point did not converge."""


@dataclass(frozen=True)
class QuantumMorphism:
    """A thick morphism whose generating function carries an hbar expansion.

    ``s_hbar`` holds the rational part S_0 + hbar*S_1 + ...; ``s1_imag`` is an
    optional imaginary component of the hbar^1 coefficient (produced by
    quantum composition, where the fluctuation determinant contributes
    (i/2) log det to the composed generating function).
    """

    source_dim: int
    target_dim: int
    s_hbar: GradedSeries
    s1_imag: GradedSeries | None = None

    def __post_init__(self) -> None:
        from .morphism import _check_variables  # shared validation
        _check_variables(self.s_hbar.body, self.source_dim, self.target_dim,
                         "quantum generating function", allow_hbar=True)
        if self.s1_imag is None:
            object.__setattr__(
                self, "s1_imag",
                GradedSeries(Polynomial.zero(), self.s_hbar.grading,
                             self.s_hbar.order))
        _check_variables(self.s1_imag.body, self.source_dim, self.target_dim,
                         "imaginary hbar^1 part")
        self.s_hbar._check_compatible(self.s1_imag)
        # hbar-degree-0 part must define a valid classical morphism
        self.classical()

    @staticmethod
    def from_classical(morphism: ThickMorphism) -> "QuantumMorphism":
        return QuantumMorphism(morphism.source_dim, morphism.target_dim,
                               morphism.s)

    def s0(self) -> GradedSeries:
        return self.s_hbar.with_body(self.s_hbar.body.coefficient_of(HBAR, 0))

    def s1(self) -> GradedSeries:
        return self.s_hbar.with_body(self.s_hbar.body.coefficient_of(HBAR, 1))

    def classical(self) -> ThickMorphism:
        return ThickMorphism(self.source_dim, self.target_dim, self.s0())


@dataclass(frozen=True)
class PhaseResult:
    """Pullback phase f0 + hbar*f1 and the stationary point it came from."""

    f0: GradedSeries
    f1: ComplexSeries
    provenance: str
    y_sol: dict[VarName, GradedSeries]
    q_sol: dict[VarName, GradedSeries]


def _series_det(mat: list[list[GradedSeries]]) -> GradedSeries:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    acc = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        term = mat[0][j] * _series_det(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def _fluctuation_log_det(s0: GradedSeries, g: Polynomial, n2: int,
                         y_sol: Mapping[VarName, GradedSeries],
                         q_sol: Mapping[VarName, GradedSeries]) -> GradedSeries:
    """log det(I - G A) with G = d2g/dy2 at y*, A = d2S0/dq2 at q*."""
    grading, order = s0.grading, s0.order
    gmat = [[truncate(g.partial(VarName("y", i)).partial(VarName("y", j)),
                      grading, order).substitute(y_sol)
             for j in range(1, n2 + 1)] for i in range(1, n2 + 1)]
    amat = [[s0.with_body(s0.body.partial(VarName("q", i)).partial(VarName("q", j)))
             .substitute(q_sol)
             for j in range(1, n2 + 1)] for i in range(1, n2 + 1)]
    m = []
    for i in range(n2):
        row = []
        for j in range(n2):
            acc = GradedSeries(Polynomial.constant(1 if i == j else 0),
                               grading, order)
            for k in range(n2):
                acc = acc - gmat[i][k] * amat[k][j]
            row.append(acc)
        m.append(row)
    det = _series_det(m)
    if det.grade_zero_part() != Polynomial.constant(1):
        raise DegenerateHessianError(
            "fluctuation determinant has grade-0 part "
            f"{det.grade_zero_part()}, expected 1 (degenerate leading Hessian)")
    return log_series(det)


def quantum_pullback_formal(q_morphism: QuantumMorphism, g: Polynomial,
                            hbar_order: int = 1) -> PhaseResult:
    """Stationary-phase expansion of the quantum pullback of exp((i/hbar) g).

    The leading phase f0 is the classical pullback of g through the
    hbar-degree-0 part of the generating function.  At ``hbar_order=1`` the
    correction is f1 = S_1(x, q*) + (i/2) log det(I - G A), where G and A are
    the second derivatives of g and S_0 at the stationary point; the constant
    signature factor of the leading hyperbolic Hessian is normalized away.
    """
    if hbar_order not in (0, 1):
        raise ValueError("hbar_order must be 0 or 1")
    classical = q_morphism.classical()
    pb = pullback(classical, g)
    zero = pb.f.with_body(Polynomial.zero())
    if hbar_order == 0:
        f1 = ComplexSeries(zero, zero)
    else:
        s1_at = q_morphism.s1().substitute(pb.q_sol)
        im = q_morphism.s1_imag.substitute(pb.q_sol)
        halflog = _fluctuation_log_det(q_morphism.s0(), g,
                                       q_morphism.target_dim,
                                       pb.y_sol, pb.q_sol)
        im = im + halflog.with_body(halflog.body * Fraction(1, 2))
        f1 = ComplexSeries(s1_at, im)
    return PhaseResult(pb.f, f1, "formal", pb.y_sol, pb.q_sol)


def quantum_compose(outer: QuantumMorphism, inner: QuantumMorphism,
                    hbar_order: int = 1) -> QuantumMorphism:
    """Composition of quantum morphisms by stationary phase over the
    intermediate pair.

    The hbar^0 part is exactly the classical composition.  At order 1 the
    composed hbar coefficient collects the factors' own S_1 terms at the
    stationary point plus (i/2) log det(I - B A), B = d2S0_outer/dy2 at y*,
    A = d2S0_inner/dq2 at q*.
    """
    if hbar_order not in (0, 1):
        raise ValueError("hbar_order must be 0 or 1")
    comp = compose_full(outer.classical(), inner.classical())
    s0c = comp.morphism.s
    if hbar_order == 0:
        return QuantumMorphism(comp.morphism.source_dim,
                               comp.morphism.target_dim, s0c)

    grading, order = s0c.grading, s0c.order
    n_mid = inner.target_dim
    outer_body = rename_family(rename_family(outer.s0().body, "q", "r"), "x", "y")

    # real hbar^1 parts of both factors at the stationary point
    re1 = inner.s1().substitute(comp.q_sol)
    outer_s1 = rename_family(rename_family(outer.s1().body, "q", "r"), "x", "y")
    re1 = re1 + truncate(outer_s1, grading, order).substitute(comp.y_sol)

    im1 = inner.s1_imag.substitute(comp.q_sol)
    outer_im = rename_family(rename_family(outer.s1_imag.body, "q", "r"), "x", "y")
    im1 = im1 + truncate(outer_im, grading, order).substitute(comp.y_sol)

    # fluctuation determinant of the intermediate (y, q) integral
    inner_s0 = inner.s0()
    bmat = [[truncate(outer_body.partial(VarName("y", i)).partial(VarName("y", j)),
                      grading, order).substitute(comp.y_sol)
             for j in range(1, n_mid + 1)] for i in range(1, n_mid + 1)]
    amat = [[inner_s0.with_body(
                inner_s0.body.partial(VarName("q", i)).partial(VarName("q", j)))
             .substitute(comp.q_sol)
             for j in range(1, n_mid + 1)] for i in range(1, n_mid + 1)]
    m = []
    for i in range(n_mid):
        row = []
        for j in range(n_mid):
            acc = GradedSeries(Polynomial.constant(1 if i == j else 0),
                               grading, order)
            for k in range(n_mid):
                acc = acc - bmat[i][k] * amat[k][j]
            row.append(acc)
        m.append(row)
    det = _series_det(m)
    if det.grade_zero_part() != Polynomial.constant(1):
        raise DegenerateHessianError(
            "composition fluctuation determinant has grade-0 part "
            f"{det.grade_zero_part()}, expected 1")
    halflog = log_series(det)
    im1 = im1 + halflog.with_body(halflog.body * Fraction(1, 2))

    def back(series: GradedSeries) -> GradedSeries:
        return series.with_body(rename_family(series.body, "r", "q"))

    re1 = back(re1)
    s_hbar = s0c + re1.with_body(re1.body * Polynomial.variable(HBAR))
    return QuantumMorphism(comp.morphism.source_dim, comp.morphism.target_dim,
                           s_hbar, back(im1))


# ---------------------------------------------------------------------------
# Numeric path
# ---------------------------------------------------------------------------

# flat-top taper: exp(-16 ln10 * t^10) is 1 - 3e-10 at |t| = 0.1 and 1e-16 at
# the box edge |t| = 1, so the integrand is numerically compactly supported
# while all derivatives stay tame inside the box.
_EDGE_DECAY = 16.0 * math.log(10.0)
_TAPER_POWER = 10


def _taper(t: np.ndarray) -> np.ndarray:
    return np.exp(-_EDGE_DECAY * np.abs(t) ** _TAPER_POWER)


def _eval_grid(p: Polynomial, binding: Mapping[VarName, object]):
    """Evaluate a polynomial with numpy-array or scalar bindings."""
    missing = [v for v in p.variables() if v not in binding]
    if missing:
        raise KeyError("unbound variable(s): "
                       + ", ".join(sorted(map(str, missing))))
    total = None
    for m, c in p.terms():
        piece = float(c)
        for v, e in m.exps:
            piece = piece * np.asarray(binding[v]) ** e
        total = piece if total is None else total + piece
    return total if total is not None else 0.0


def _numeric_parameter_binding(q_morphism: QuantumMorphism,
                               x_point: Sequence[float], hbar: float,
                               eps) -> dict[VarName, float]:
    binding: dict[VarName, float] = {HBAR: float(hbar)}
    for v in (q_morphism.s_hbar.body.variables()
              | q_morphism.s1_imag.body.variables()):
        if v.family == "eps":
            binding[v] = float(eps)
        elif v.family == "x":
            if v.index > len(x_point):
                raise ValueError(f"x_point has no coordinate for {v}")
            binding[v] = float(x_point[v.index - 1])
    for i in range(1, q_morphism.source_dim + 1):
        binding.setdefault(VarName("x", i), float(x_point[i - 1]))
    return binding


def _stationary_point_numeric(q_morphism: QuantumMorphism, g: Polynomial,
                              x_point: Sequence[float], eps) -> np.ndarray:
    """Real stationary point of g(y) + S_0(x,q) - y.q by Newton iteration,
    warm-started from the formal series solution."""
    n2 = q_morphism.target_dim
    pb = pullback(q_morphism.classical(), g)
    scalar_bind: dict[VarName, complex] = {}
    for v in set().union(*(s.body.variables() for s in pb.y_sol.values()),
                         *(s.body.variables() for s in pb.q_sol.values())):
        if v.family == "eps":
            scalar_bind[v] = float(eps)
        elif v.family == "x":
            scalar_bind[v] = float(x_point[v.index - 1])
    z = np.empty(2 * n2)
    for i in range(n2):
        z[i] = pb.y_sol[VarName("y", i + 1)].eval_numeric(scalar_bind).real
        z[n2 + i] = pb.q_sol[VarName("q", i + 1)].eval_numeric(scalar_bind).real

    s0 = q_morphism.s0().body
    param = _numeric_parameter_binding(q_morphism, x_point, 1.0, eps)
    dg = [g.partial(VarName("y", i + 1)) for i in range(n2)]
    ds = [s0.partial(VarName("q", i + 1)) for i in range(n2)]
    gsecond = [[dg[i].partial(VarName("y", j + 1)) for j in range(n2)]
               for i in range(n2)]
    ssecond = [[ds[i].partial(VarName("q", j + 1)) for j in range(n2)]
               for i in range(n2)]

    def bind(zvec) -> dict[VarName, complex]:
        b = dict(param)
        for i in range(n2):
            b[VarName("y", i + 1)] = zvec[i]
            b[VarName("q", i + 1)] = zvec[n2 + i]
        return b

    for _ in range(50):
        b = bind(z)
        resid = np.empty(2 * n2)
        for i in range(n2):
            resid[i] = z[n2 + i] - _eval_grid(dg[i], b).real
            resid[n2 + i] = z[i] - _eval_grid(ds[i], b).real
        if np.max(np.abs(resid)) < 1e-12:
            return z
        jac = np.zeros((2 * n2, 2 * n2))
        for i in range(n2):
            for j in range(n2):
                jac[i, j] = -_eval_grid(gsecond[i][j], b).real
                jac[n2 + i, n2 + j] = -_eval_grid(ssecond[i][j], b).real
            jac[i, n2 + i] += 1.0
            jac[n2 + i, i] += 1.0
        try:
            z = z - np.linalg.solve(jac, resid)
        except np.linalg.LinAlgError as exc:
            raise StationaryPointError(f"singular Newton system: {exc}") from exc
    raise StationaryPointError(
        "stationary point Newton iteration did not reach 1e-12 in 50 steps")


def _axis(center: float, window: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    npts = int(math.ceil(2.0 * window / step)) + 1
    d = 2.0 * window / (npts - 1) if npts > 1 else step
    pts = center - window + d * np.arange(npts)
    w = np.full(npts, d)
    w[0] *= 0.5
    w[-1] *= 0.5
    return pts, w


def _chirp_sum(ay: np.ndarray, y: np.ndarray, cq: np.ndarray,
               q: np.ndarray, hbar: float) -> complex:
    """sum_j cq[j] sum_i ay[i] exp(-i y_i q_j / hbar) for uniform grids,
    via the chirp factorization ij = (i^2 + j^2 - (i-j)^2)/2 and an FFT
    convolution (O(N log N) instead of the direct O(N^2) double sum)."""
    ny, nq = y.size, q.size
    dy = y[1] - y[0] if ny > 1 else 0.0
    dq = q[1] - q[0] if nq > 1 else 0.0
    alpha = dy * dq / hbar
    i_idx = np.arange(ny)
    j_idx = np.arange(nq)
    a_t = ay * np.exp(-1j * (q[0] * dy / hbar) * i_idx
                      - 0.5j * alpha * i_idx.astype(float) ** 2)
    c_t = cq * np.exp(-1j * (y[0] * dq / hbar) * j_idx
                      - 0.5j * alpha * j_idx.astype(float) ** 2)
    m_idx = np.arange(-(ny - 1), nq)
    kern = np.exp(0.5j * alpha * m_idx.astype(float) ** 2)
    size = 1
    while size < ny + kern.size - 1:
        size *= 2
    conv = np.fft.ifft(np.fft.fft(a_t, size) * np.fft.fft(kern, size))
    inner = conv[ny - 1: ny - 1 + nq]
    return complex(np.exp(-1j * y[0] * q[0] / hbar) * np.sum(c_t * inner))


def _direct_sum(ay: np.ndarray, y: np.ndarray, cq: np.ndarray,
                q: np.ndarray, hbar: float) -> complex:
    """Reference O(N^2) evaluation of the same double sum (testing aid)."""
    total = 0.0 + 0.0j
    for j0 in range(0, q.size, 2048):
        qs = q[j0:j0 + 2048]
        cols = np.exp(-1j / hbar * np.outer(y, qs))
        total += np.sum(cq[j0:j0 + 2048] * (ay @ cols))
    return complex(total)


def numeric_oscillatory_integral(q_morphism: QuantumMorphism, g: Polynomial,
                                 x_point: Sequence[float], hbar: float,
                                 window: float, step: float,
                                 eps=Fraction(0), *,
                                 method: str = "auto") -> complex:
    """Windowed trapezoid quadrature of the quantum pullback integral at one
    point, for target dimension 1 or 2.

    The box of half-width ``window`` is centered per coordinate at the real
    stationary point; the integrand carries a flat-top taper so the truncation
    is smooth.  ``eps`` gives the numeric value substituted for the formal
    deformation parameter.  Steps coarser than hbar/4 are rejected as
    under-resolved.
    """
    n2 = q_morphism.target_dim
    if n2 not in (1, 2):
        raise ValueError("numeric path supports target dimension 1 or 2")
    if len(x_point) < q_morphism.source_dim:
        raise ValueError("x_point shorter than the source dimension")
    if hbar <= 0 or window <= 0 or step <= 0:
        raise ValueError("hbar, window and step must be positive")
    if step > hbar / 4:
        raise ValueError(f"step {step} > hbar/4 = {hbar / 4}: under-resolved")
    for v in g.variables():
        if v.family != "y" or v.index > n2:
            raise ValueError(f"g must be a polynomial in y1..y{n2}, found {v}")

    z_star = _stationary_point_numeric(q_morphism, g, x_point, eps)
    param = _numeric_parameter_binding(q_morphism, x_point, hbar, eps)
    s_body = q_morphism.s_hbar.body
    damp_body = q_morphism.s1_imag.body

    axes = [_axis(z_star[k], window, step) for k in range(2 * n2)]
    if n2 == 1:
        y, wy = axes[0]
        q, wq = axes[1]
        gy = _eval_grid(g, {VarName("y", 1): y}) if not g.is_zero() else np.zeros_like(y)
        sq = _eval_grid(s_body, {**param, VarName("q", 1): q})
        ay = wy * _taper((y - z_star[0]) / window) * np.exp(1j / hbar * np.asarray(gy))
        cq = wq * _taper((q - z_star[1]) / window) * np.exp(1j / hbar * np.asarray(sq))
        if not damp_body.is_zero():
            # i*hbar*s1_imag in the phase contributes exp(-s1_imag) exactly
            cq = cq * np.exp(-np.asarray(
                _eval_grid(damp_body, {**param, VarName("q", 1): q})))
        use_fft = method == "fft" or (method == "auto" and y.size > 64)
        total = (_chirp_sum if use_fft else _direct_sum)(ay, y, cq, q, hbar)
        return total / (2 * math.pi * hbar)

    # n2 == 2: two matmul contractions against the coupling kernels
    (y1, w1), (y2, w2), (q1, w3), (q2, w4) = axes
    if y1.size > 2048:
        raise ValueError("2D grid too large; increase step or reduce window")
    ymesh = {VarName("y", 1): y1[:, None], VarName("y", 2): y2[None, :]}
    qmesh = {VarName("q", 1): q1[:, None], VarName("q", 2): q2[None, :]}
    gy = _eval_grid(g, ymesh) if not g.is_zero() else 0.0
    sq = _eval_grid(s_body, {**param, **qmesh})
    taper_y = (_taper((y1[:, None] - z_star[0]) / window)
               * _taper((y2[None, :] - z_star[1]) / window))
    taper_q = (_taper((q1[:, None] - z_star[2]) / window)
               * _taper((q2[None, :] - z_star[3]) / window))
    amat = (w1[:, None] * w2[None, :]) * taper_y * np.exp(1j / hbar * np.asarray(gy))
    cmat = (w3[:, None] * w4[None, :]) * taper_q * np.exp(1j / hbar * np.asarray(sq))
    if not damp_body.is_zero():
        cmat = cmat * np.exp(-np.asarray(_eval_grid(damp_body, {**param, **qmesh})))
    e1 = np.exp(-1j / hbar * np.outer(y1, q1))
    e2 = np.exp(-1j / hbar * np.outer(y2, q2))
    f = e1.T @ amat @ e2
    return complex(np.sum(cmat * f)) / (2 * math.pi * hbar) ** 2


def exact_gaussian_value(q_morphism: QuantumMorphism, g: Polynomial,
                         x_point: Sequence[float], hbar: float,
                         eps=Fraction(0)) -> complex:
    """Closed-form value of the pullback integral for quadratic phases.

    Requires the total phase g(y) + S_hbar(x,q) - y.q to be quadratic in
    (y, q) with a real (rational) coefficient field; serves as the oracle the
    quadrature path is validated against.
    """
    n2 = q_morphism.target_dim
    if not q_morphism.s1_imag.body.is_zero():
        raise ValueError("gaussian oracle requires a real generating function")
    fiber = frozenset({"y", "q"})
    for m, _ in list(g.terms()) + list(q_morphism.s_hbar.body.terms()):
        if m.degree(fiber) > 2:
            raise ValueError(f"phase is not quadratic: monomial {m}")

    phase = g + q_morphism.s_hbar.body
    for i in range(1, n2 + 1):
        phase = phase - Polynomial.variable(VarName("y", i)) \
            * Polynomial.variable(VarName("q", i))
    param = _numeric_parameter_binding(q_morphism, x_point, hbar, eps)
    zvars = [VarName("y", i) for i in range(1, n2 + 1)] \
        + [VarName("q", i) for i in range(1, n2 + 1)]
    zero = {v: 0.0 for v in zvars}
    d = 2 * n2
    mmat = np.empty((d, d))
    bvec = np.empty(d)
    for i, vi in enumerate(zvars):
        di = phase.partial(vi)
        bvec[i] = _eval_grid(di, {**param, **zero}).real
        for j, vj in enumerate(zvars):
            mmat[i, j] = _eval_grid(di.partial(vj), {**param, **zero}).real
    c0 = _eval_grid(phase, {**param, **zero}).real

    evals, _ = np.linalg.eigh(mmat)
    if np.min(np.abs(evals)) < 1e-12:
        raise DegenerateHessianError("quadratic phase has a singular Hessian")
    signature = int(np.sum(evals > 0) - np.sum(evals < 0))
    det = float(np.prod(evals))
    crit_value = c0 - 0.5 * float(bvec @ np.linalg.solve(mmat, bvec))
    return (abs(det) ** -0.5 * cmath.exp(1j * math.pi * signature / 4)
            * cmath.exp(1j / hbar * crit_value))


# ---------------------------------------------------------------------------
# Classical-limit sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRecord:
    hbar: float
    x_point: tuple[float, ...]
    value: complex
    extracted_phase: complex
    err0: float
    err1: float
    branch_ok: bool


@dataclass(frozen=True)
class SweepResult:
    records: list[SweepRecord]
    err0_slope: float
    err1_slope: float
    f0_value: float
    f1_value: complex


def classical_limit_sweep(q_morphism: QuantumMorphism, g: Polynomial,
                          x_point: Sequence[float],
                          hbar_list: Sequence[float],
                          window: float, step: float,
                          eps=Fraction(0)) -> SweepResult:
    """Evaluate the pullback numerically along a descending hbar sequence and
    compare the extracted phases against the formal f0 and f0 + hbar*f1.

    The window stays fixed across the sweep while the step scales
    proportionally to hbar from its value at the largest hbar, keeping the
    resolution constant in oscillation units.  The phase of the first record
    is anchored to the nearest branch of the formal prediction f0(x); each
    later record continues the branch from its predecessor, and a record is
    flagged when the branch correction approaches the ambiguous half-turn.
    """
    hbars = list(hbar_list)
    if not hbars or any(h <= 0 for h in hbars):
        raise ValueError("hbar_list must contain positive values")
    if any(b >= a for a, b in zip(hbars, hbars[1:])):
        raise ValueError("hbar_list must be strictly descending")

    formal = quantum_pullback_formal(q_morphism, g, hbar_order=1)
    scalar_bind: dict[VarName, complex] = {}
    for v in formal.f0.body.variables() | formal.f1.re.body.variables() \
            | formal.f1.im.body.variables():
        if v.family == "eps":
            scalar_bind[v] = float(eps)
        elif v.family == "x":
            scalar_bind[v] = float(x_point[v.index - 1])
    f0_value = formal.f0.eval_numeric(scalar_bind).real
    f1_value = formal.f1.eval_numeric(scalar_bind)

    records: list[SweepRecord] = []
    prev_phase: complex | None = None
    base_hbar = hbars[0]
    for hb in hbars:
        value = numeric_oscillatory_integral(
            q_morphism, g, x_point, hb, window, step * hb / base_hbar, eps)
        theta = cmath.phase(value)
        predicted = (f0_value if prev_phase is None else prev_phase.real) / hb
        wraps = round((predicted - theta) / (2 * math.pi))
        correction = abs(predicted - (theta + 2 * math.pi * wraps))
        phase = hb * (theta + 2 * math.pi * wraps) - 1j * hb * math.log(abs(value))
        prev_phase = phase
        err0 = abs(phase - f0_value)
        err1 = abs(phase - f0_value - hb * f1_value)
        records.append(SweepRecord(hb, tuple(float(c) for c in x_point),
                                   value, phase, err0, err1,
                                   correction < math.pi * 0.999))

    logs = np.log([r.hbar for r in records])
    err0_slope = float(np.polyfit(
        logs, np.log([max(r.err0, 5e-17) for r in records]), 1)[0])
    err1_slope = float(np.polyfit(
        logs, np.log([max(r.err1, 5e-17) for r in records]), 1)[0])
    return SweepResult(records, err0_slope, err1_slope, f0_value, f1_value)


SWEEP_CSV_HEADER = "hbar,x,re_value,im_value,re_phase,im_phase,err0,err1"


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def sweep_csv_lines(records: Sequence[SweepRecord]) -> list[str]:
    """CSV rows (descending hbar), floats printed with 17 significant digits."""
    rows = sorted(records, key=lambda r: -r.hbar)
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        xtext = ";".join(_fmt(c) for c in r.x_point)
        lines.append(",".join([
            _fmt(r.hbar), xtext,
            _fmt(r.value.real), _fmt(r.value.imag),
            _fmt(r.extracted_phase.real), _fmt(r.extracted_phase.imag),
            _fmt(r.err0), _fmt(r.err1),
        ]))
    return lines


def write_sweep_csv(records: Sequence[SweepRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(sweep_csv_lines(records)) + "\n")
