"""Exact multivariate polynomials over the rationals, with a small expression
language.

A polynomial is a finite map from monomials to nonzero Fraction coefficients;
the zero polynomial is the empty map.  Variables come from a fixed set of
indexed families:

    x, y        positions (source / target)
    q, r, p     momenta
    eps         deformation parameter (optionally indexed: eps, eps1, eps2, ...)
    hbar        semiclassical parameter (never indexed)

All arithmetic is exact; equality of polynomials is equality of term maps.
The text format produced by ``str()`` is canonical (graded-lex term order)
and round-trips through :func:`parse`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

FAMILIES = ("x", "y", "q", "r", "p", "eps", "hbar")
POSITION_FAMILIES = frozenset({"x", "y"})
MOMENTUM_FAMILIES = frozenset({"q", "r", "p"})
PARAMETER_FAMILIES = frozenset({"eps", "hbar"})

_FAMILY_RANK = {fam: i for i, fam in enumerate(FAMILIES)}


class ParseError(ValueError):
    """Syntax error in the expression language, with a byte offset."""

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected " + " | ".join(expected) + ")"
        super().__init__(detail)
        self.offset = offset
        self.expected = expected


@dataclass(frozen=True)
class VarName:
    """A variable: a family plus a 1-based index (parameters may omit it)."""

    family: str
    index: int | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown variable family {self.family!r}")
        if self.family == "hbar":
            if self.index is not None:
                raise ValueError("hbar takes no index")
        elif self.family == "eps":
            if self.index is not None and self.index < 1:
                raise ValueError("eps index must be >= 1 when present")
        elif self.index is None or self.index < 1:
            raise ValueError(f"{self.family} requires an index >= 1")

    @property
    def sort_key(self) -> tuple[int, int]:
        return (_FAMILY_RANK[self.family], -1 if self.index is None else self.index)

    def __str__(self) -> str:
        return self.family if self.index is None else f"{self.family}{self.index}"


EPS = VarName("eps")
HBAR = VarName("hbar")


def var(name: str) -> VarName:
    """Parse a single variable name such as ``x1``, ``eps`` or ``eps2``."""
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return VarName(head, int(tail) if tail else None)


class Monomial:
    """A product of variable powers; exponents are strictly positive."""

    __slots__ = ("_exps",)

    def __init__(self, exps: Iterable[tuple[VarName, int]] = ()):
        merged: dict[VarName, int] = {}
        for v, e in exps:
            if e < 0:
                raise ValueError("negative exponent")
            if e:
                merged[v] = merged.get(v, 0) + e
        self._exps = tuple(sorted(merged.items(), key=lambda it: it[0].sort_key))

    @property
    def exps(self) -> tuple[tuple[VarName, int], ...]:
        return self._exps

    def exponent(self, v: VarName) -> int:
        for w, e in self._exps:
            if w == v:
                return e
        return 0

    def degree(self, families: frozenset[str] | None = None) -> int:
        """Total degree, optionally restricted to the given families."""
        return sum(e for v, e in self._exps
                   if families is None or v.family in families)

    def variables(self) -> tuple[VarName, ...]:
        return tuple(v for v, _ in self._exps)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self._exps + other._exps)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Monomial) and self._exps == other._exps

    def __hash__(self) -> int:
        return hash(self._exps)

    def __str__(self) -> str:
        if not self._exps:
            return "1"
        return "*".join(str(v) if e == 1 else f"{v}^{e}" for v, e in self._exps)

    def __repr__(self) -> str:
        return f"Monomial({self})"

    def sort_key(self) -> tuple:
        # graded lex: total degree first, then exponent vector in variable order.
        # Keys compare across monomials of the same polynomial only.
        return (self.degree(), self._lex_key())

    def _lex_key(self) -> tuple:
        return tuple((v.sort_key, -e) for v, e in self._exps)


_ONE = Monomial()


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected int or Fraction coefficient, got {type(value).__name__}")


class Polynomial:
    """Immutable polynomial in canonical form (no zero coefficients stored)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        self._terms: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = _as_fraction(c)
                if c:
                    self._terms[m] = c

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "Polynomial":
        return Polynomial()

    @staticmethod
    def constant(c) -> "Polynomial":
        return Polynomial({_ONE: _as_fraction(c)})

    @staticmethod
    def variable(v: VarName) -> "Polynomial":
        return Polynomial({Monomial([(v, 1)]): Fraction(1)})

    # -- inspection --------------------------------------------------------

    def terms(self) -> Iterable[tuple[Monomial, Fraction]]:
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def variables(self) -> set[VarName]:
        out: set[VarName] = set()
        for m in self._terms:
            out.update(m.variables())
        return out

    def constant_term(self) -> Fraction:
        return self._terms.get(_ONE, Fraction(0))

    def degree(self, families: frozenset[str] | None = None) -> int:
        """Max degree over terms (0 for the zero polynomial)."""
        return max((m.degree(families) for m in self._terms), default=0)

    def coefficient_of(self, v: VarName, power: int) -> "Polynomial":
        """The polynomial coefficient of v**power (v removed from the result)."""
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            if m.exponent(v) == power:
                rest = Monomial([(w, e) for w, e in m.exps if w != v])
                out[rest] = out.get(rest, Fraction(0)) + c
        return Polynomial(out)

    def degree_in(self, v: VarName) -> int:
        return max((m.exponent(v) for m in self._terms), default=0)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, Fraction(0)) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return _wrap(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return _wrap({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[Monomial, Fraction] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = ma * mb
                s = out.get(m, Fraction(0)) + ca * cb
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return _wrap(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial power requires a nonnegative integer")
        result = Polynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    # -- calculus ----------------------------------------------------------

    def partial(self, v: VarName) -> "Polynomial":
        """Exact partial derivative with respect to v."""
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            e = m.exponent(v)
            if not e:
                continue
            lowered = Monomial([(w, k - 1 if w == v else k) for w, k in m.exps])
            out[lowered] = out.get(lowered, Fraction(0)) + c * e
        return Polynomial(out)

    def substitute(self, bindings: Mapping[VarName, "Polynomial"]) -> "Polynomial":
        """Simultaneous substitution; unbound variables stay fixed."""
        if not bindings:
            return self
        # precompute the powers of each bound value that actually occur
        needed: dict[VarName, int] = {}
        for m in self._terms:
            for v, e in m.exps:
                if v in bindings:
                    needed[v] = max(needed.get(v, 0), e)
        powers: dict[VarName, list[Polynomial]] = {}
        for v, top in needed.items():
            row = [Polynomial.constant(1)]
            for _ in range(top):
                row.append(row[-1] * bindings[v])
            powers[v] = row
        total = Polynomial.zero()
        for m, c in self._terms.items():
            fixed: list[tuple[VarName, int]] = []
            piece = Polynomial.constant(c)
            for v, e in m.exps:
                if v in powers:
                    piece = piece * powers[v][e]
                else:
                    fixed.append((v, e))
            if fixed:
                piece = piece * Polynomial({Monomial(fixed): Fraction(1)})
            total = total + piece
        return total

    def eval_numeric(self, point: Mapping[VarName, complex]) -> complex:
        """Evaluate at a numeric point (Horner per variable); all variables
        of the polynomial must be bound."""
        unbound = [v for v in self.variables() if v not in point]
        if unbound:
            names = ", ".join(str(v) for v in sorted(unbound, key=lambda w: w.sort_key))
            raise KeyError(f"unbound variable(s): {names}")
        return _horner(self, point)

    # -- text --------------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        ordered = sorted(self._terms.items(), key=lambda it: it[0].sort_key(),
                         reverse=True)
        pieces: list[str] = []
        for i, (m, c) in enumerate(ordered):
            sign = "-" if c < 0 else "+"
            mag = _coeff_text(abs(c))
            if m.exps:
                body = str(m) if abs(c) == 1 else f"{mag}*{m}"
            else:
                body = mag
            if i == 0:
                pieces.append(body if sign == "+" else "-" + body)
            else:
                pieces.append(f" {sign} {body}")
        return "".join(pieces)

    def __repr__(self) -> str:
        return f"Polynomial({self})"


def _wrap(terms: dict[Monomial, Fraction]) -> Polynomial:
    p = Polynomial()
    p._terms = terms
    return p


def _coerce(value):
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, Fraction)):
        return Polynomial.constant(value)
    return NotImplemented


def _coeff_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"({c.numerator}/{c.denominator})"


def _horner(p: Polynomial, point: Mapping[VarName, complex]) -> complex:
    if p.is_zero():
        return 0j
    vs = sorted(p.variables(), key=lambda w: w.sort_key)
    if not vs:
        return complex(p.constant_term())
    v = vs[0]
    top = p.degree_in(v)
    # Horner in v with polynomial coefficients evaluated recursively
    acc = 0j
    for k in range(top, -1, -1):
        acc = acc * point[v] + _horner(p.coefficient_of(v, k), point)
    return acc


def rename_variables(p: Polynomial, mapping: Mapping[VarName, VarName]) -> Polynomial:
    """Rename variables (injective on the variables actually present)."""
    targets = list(mapping.values())
    if len(set(targets)) != len(targets):
        raise ValueError("renaming is not injective")
    return p.substitute({src: Polynomial.variable(dst) for src, dst in mapping.items()})


def rename_family(p: Polynomial, src: str, dst: str) -> Polynomial:
    """Rename every variable of one family to the same index in another."""
    mapping = {v: VarName(dst, v.index) for v in p.variables() if v.family == src}
    clashes = set(mapping.values()) & p.variables()
    if clashes:
        raise ValueError(f"renaming {src}->{dst} would capture {sorted(str(v) for v in clashes)}")
    return rename_variables(p, mapping)


# --------------------------------------------------------------------------
# Expression language
#
#   expr     := term (('+'|'-') term)*
#   term     := factor ('*' factor)*
#   factor   := base ('^' uint)?
#   base     := rational | var | '(' expr ')' | '-' base
#   rational := int | int '/' uint
#   var      := ('x'|'y'|'q'|'r'|'p') uint | 'eps' uint? | 'hbar'
#
# Whitespace is insignificant between tokens; indices are 1-based.
# --------------------------------------------------------------------------

class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take_uint(self, what: str) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ParseError(f"malformed {what}", start, ("digit",))
        return int(self.text[start:self.pos])

    def take_name(self) -> tuple[str, int]:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        return self.text[start:self.pos], start


class _Parser:
    def __init__(self, text: str):
        self.lex = _Lexer(text)

    def parse(self) -> Polynomial:
        result = self.expr()
        self.lex.skip_ws()
        if self.lex.pos != len(self.lex.text):
            raise ParseError("trailing input", self.lex.pos,
                             ("'+'", "'-'", "'*'", "'^'", "end of input"))
        return result

    def expr(self) -> Polynomial:
        acc = self.term()
        while True:
            ch = self.lex.peek()
            if ch == "+":
                self.lex.pos += 1
                acc = acc + self.term()
            elif ch == "-":
                self.lex.pos += 1
                acc = acc - self.term()
            else:
                return acc

    def term(self) -> Polynomial:
        acc = self.factor()
        while self.lex.peek() == "*":
            self.lex.pos += 1
            acc = acc * self.factor()
        return acc

    def factor(self) -> Polynomial:
        base = self.base()
        if self.lex.peek() == "^":
            self.lex.pos += 1
            return base ** self.lex.take_uint("exponent")
        return base

    def base(self) -> Polynomial:
        ch = self.lex.peek()
        if ch == "-":
            self.lex.pos += 1
            return -self.base()
        if ch == "(":
            self.lex.pos += 1
            inner = self.expr()
            if self.lex.peek() != ")":
                raise ParseError("unbalanced parenthesis", self.lex.pos, ("')'",))
            self.lex.pos += 1
            return inner
        if ch.isdigit():
            return self.rational()
        if ch.isalpha():
            return Polynomial.variable(self.variable())
        raise ParseError("unexpected input", self.lex.pos,
                         ("rational", "variable", "'('", "'-'"))

    def rational(self) -> Polynomial:
        num = self.lex.take_uint("integer")
        if self.lex.peek() == "/":
            at = self.lex.pos
            self.lex.pos += 1
            den = self.lex.take_uint("denominator")
            if den == 0:
                raise ParseError("division by zero in rational literal", at)
            return Polynomial.constant(Fraction(num, den))
        return Polynomial.constant(num)

    def variable(self) -> VarName:
        name, at = self.lex.take_name()
        if name == "hbar":
            if self.lex.peek().isdigit():
                raise ParseError("hbar takes no index", self.lex.pos)
            return HBAR
        if name == "eps":
            if self.lex.peek().isdigit():
                idx = self.lex.take_uint("index")
                if idx < 1:
                    raise ParseError("indices are 1-based", at)
                return VarName("eps", idx)
            return EPS
        if name in ("x", "y", "q", "r", "p"):
            if not self.lex.peek().isdigit():
                raise ParseError(f"variable {name!r} requires an index",
                                 self.lex.pos, ("digit",))
            idx = self.lex.take_uint("index")
            if idx < 1:
                raise ParseError("indices are 1-based", at)
            return VarName(name, idx)
        raise ParseError(f"unknown variable family {name!r}", at,
                         ("x", "y", "q", "r", "p", "eps", "hbar"))


def parse(text: str) -> Polynomial:
    """Parse an expression into a canonical polynomial."""
    return _Parser(text).parse()
