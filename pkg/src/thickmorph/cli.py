"""Command-line front end.

Reads a declaration file of morphisms and functions, then runs one of the
engine operations against it.  Declaration grammar (comments start with '#'):

    order <uint>
    morphism <name> { source <uint> ; target <uint> ; S <expr> }
    quantum  <name> { source <uint> ; target <uint> ; S <expr> }
    function <name> { <expr> }

Exit codes: 0 on success, 1 on a domain error (bad declaration file, unknown
name, admissibility or numeric failure), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .morphism import (AdmissibilityError, ThickMorphism, compose, hj_action,
                       lie_algebra_check, pullback)
from .poly import ParseError, Polynomial, parse
from .quantum import QuantumMorphism, classical_limit_sweep, write_sweep_csv
from .series import truncate

DEFAULT_ORDER = 6


class SpecError(ValueError):
    """Invalid declaration file."""


@dataclass
class MorphismDecl:
    kind: str               # "morphism" | "quantum"
    source: int
    target: int
    body: Polynomial


@dataclass
class SpecFile:
    order: int = DEFAULT_ORDER
    morphisms: dict[str, MorphismDecl] = field(default_factory=dict)
    functions: dict[str, Polynomial] = field(default_factory=dict)

    def thick(self, name: str, order: int | None = None) -> ThickMorphism:
        decl = self._morphism(name)
        if decl.kind != "morphism":
            raise SpecError(f"{name!r} is a quantum morphism; this command "
                            "needs a classical one")
        return ThickMorphism(decl.source, decl.target,
                             truncate(decl.body, order=order or self.order))

    def quantum(self, name: str, order: int | None = None) -> QuantumMorphism:
        decl = self._morphism(name)
        return QuantumMorphism(decl.source, decl.target,
                               truncate(decl.body, order=order or self.order))

    def function(self, name: str) -> Polynomial:
        if name not in self.functions:
            raise SpecError(f"unknown function {name!r}")
        return self.functions[name]

    def _morphism(self, name: str) -> MorphismDecl:
        if name not in self.morphisms:
            raise SpecError(f"unknown morphism {name!r}")
        return self.morphisms[name]


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _line_col(self, pos: int) -> str:
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return f"line {line}, column {col}"

    def error(self, message: str, pos: int | None = None) -> SpecError:
        return SpecError(f"{message} at {self._line_col(self.pos if pos is None else pos)}")

    def skip(self) -> None:
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl + 1
            elif ch.isspace():
                self.pos += 1
            else:
                return

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def word(self, what: str) -> str:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] == "_"):
            self.pos += 1
        if self.pos == start:
            raise self.error(f"expected {what}")
        return self.text[start:self.pos]

    def uint(self, what: str) -> int:
        token = self.word(what)
        if not token.isdigit():
            raise self.error(f"expected {what}, got {token!r}")
        return int(token)

    def expect(self, symbol: str) -> None:
        self.skip()
        if not self.text.startswith(symbol, self.pos):
            raise self.error(f"expected {symbol!r}")
        self.pos += len(symbol)

    def until(self, stops: str) -> tuple[str, int]:
        """Raw text (comments stripped) up to one of the stop characters."""
        self.skip()
        start = self.pos
        pieces = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in stops:
                return "".join(pieces), start
            if ch == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl
                continue
            pieces.append(ch)
            self.pos += 1
        raise self.error(f"unterminated block (expected one of {stops!r})",
                         start)


def _parse_expr(scanner: _Scanner, text: str, at: int) -> Polynomial:
    try:
        return parse(text)
    except ParseError as exc:
        raise scanner.error(f"bad expression: {exc}", at + exc.offset) from exc


def load_spec(path: str) -> SpecFile:
    """Parse and validate a declaration file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    sc = _Scanner(text)
    spec = SpecFile()
    seen: set[str] = set()
    while not sc.at_end():
        at = sc.pos
        keyword = sc.word("declaration keyword")
        if keyword == "order":
            spec.order = sc.uint("truncation order")
            continue
        if keyword in ("morphism", "quantum"):
            name = sc.word("morphism name")
            if name in seen:
                raise sc.error(f"duplicate name {name!r}", at)
            seen.add(name)
            sc.expect("{")
            source = target = None
            body = None
            while True:
                fieldname = sc.word("field (source/target/S)")
                if fieldname == "source":
                    source = sc.uint("source dimension")
                elif fieldname == "target":
                    target = sc.uint("target dimension")
                elif fieldname == "S":
                    raw, rawat = sc.until(";}")
                    body = _parse_expr(sc, raw, rawat)
                else:
                    raise sc.error(f"unknown field {fieldname!r}")
                sc.skip()
                if sc.text.startswith(";", sc.pos):
                    sc.pos += 1
                    sc.skip()
                if sc.text.startswith("}", sc.pos):
                    sc.pos += 1
                    break
            if source is None or target is None or body is None:
                raise sc.error(f"morphism {name!r} needs source, target and S",
                               at)
            decl = MorphismDecl(keyword, source, target, body)
            _validate_morphism(sc, at, name, decl, spec.order)
            spec.morphisms[name] = decl
            continue
        if keyword == "function":
            name = sc.word("function name")
            if name in seen:
                raise sc.error(f"duplicate name {name!r}", at)
            seen.add(name)
            sc.expect("{")
            raw, rawat = sc.until("}")
            sc.pos += 1
            spec.functions[name] = _parse_expr(sc, raw, rawat)
            continue
        raise sc.error(f"unknown declaration {keyword!r}", at)
    return spec


def _validate_morphism(sc: _Scanner, at: int, name: str, decl: MorphismDecl,
                       order: int) -> None:
    try:
        if decl.kind == "morphism":
            ThickMorphism(decl.source, decl.target,
                          truncate(decl.body, order=order))
        else:
            QuantumMorphism(decl.source, decl.target,
                            truncate(decl.body, order=order))
    except (AdmissibilityError, ValueError) as exc:
        raise SpecError(f"morphism {name!r}: {exc}") from exc


def _eps_substituted(body: Polynomial, eps: Fraction | None) -> Polynomial:
    if eps is None:
        return body
    bindings = {v: Polynomial.constant(eps)
                for v in body.variables() if v.family == "eps"}
    return body.substitute(bindings)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad rational {text!r}: {exc}")


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="thickmorph",
        description="pullbacks, compositions and quantum sweeps of thick "
                    "morphisms declared in a spec file")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("spec", help="declaration file")
        p.add_argument("--order", type=int, default=None,
                       help="truncation order (overrides the file)")
        p.add_argument("--eps", type=_fraction, default=None,
                       help="rational value substituted for eps")

    p = sub.add_parser("pullback", help="pull a function back through a morphism")
    common(p)
    p.add_argument("morphism")
    p.add_argument("function", help="function of y1..yn")

    p = sub.add_parser("compose", help="compose two morphisms (inner first)")
    common(p)
    p.add_argument("outer")
    p.add_argument("inner")

    p = sub.add_parser("hj", help="Hamilton-Jacobi action f + eps*H(x, df/dx)")
    common(p)
    p.add_argument("hamiltonian", help="function of x and q")
    p.add_argument("function", help="function of x")

    p = sub.add_parser("liecheck",
                       help="second-order commutator vs Poisson bracket")
    common(p)
    p.add_argument("h1")
    p.add_argument("h2")
    p.add_argument("function", help="function of x")

    p = sub.add_parser("qsweep", help="classical-limit sweep, CSV output")
    common(p)
    p.add_argument("morphism")
    p.add_argument("function", help="function of y1..yn")
    p.add_argument("--x", required=True,
                   help="evaluation point, comma-separated floats")
    p.add_argument("--hbar-start", type=float, required=True)
    p.add_argument("--hbar-factor", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--window", type=float, required=True)
    p.add_argument("--step", type=float, required=True,
                   help="trapezoid step at hbar-start (scales with hbar)")
    p.add_argument("--out", required=True, help="CSV output path")
    return top


def _cmd_pullback(args) -> int:
    spec = load_spec(args.spec)
    morphism = spec.thick(args.morphism, args.order)
    result = pullback(morphism, spec.function(args.function))
    print(_eps_substituted(result.f.body, args.eps))
    return 0


def _cmd_compose(args) -> int:
    spec = load_spec(args.spec)
    outer = spec.thick(args.outer, args.order)
    inner = spec.thick(args.inner, args.order)
    composed = compose(outer, inner)
    print(_eps_substituted(composed.s.body, args.eps))
    return 0


def _cmd_hj(args) -> int:
    spec = load_spec(args.spec)
    result = hj_action(spec.function(args.hamiltonian),
                       spec.function(args.function))
    print(_eps_substituted(result, args.eps))
    return 0


def _cmd_liecheck(args) -> int:
    spec = load_spec(args.spec)
    report = lie_algebra_check(spec.function(args.h1), spec.function(args.h2),
                               spec.function(args.function),
                               order=args.order or 2)
    print(report)
    return 0 if report.passed else 1


def _cmd_qsweep(args) -> int:
    spec = load_spec(args.spec)
    morphism = spec.quantum(args.morphism, args.order)
    g = spec.function(args.function)
    x_point = [float(part) for part in args.x.split(",")]
    if args.count < 2:
        raise SpecError("--count must be at least 2")
    if not (0 < args.hbar_factor < 1):
        raise SpecError("--hbar-factor must be in (0, 1)")
    hbars = [args.hbar_start * args.hbar_factor ** k for k in range(args.count)]
    result = classical_limit_sweep(morphism, g, x_point, hbars,
                                   args.window, args.step,
                                   eps=args.eps if args.eps is not None else 0)
    write_sweep_csv(result.records, args.out)
    print(f"err0_slope={result.err0_slope:.6g} "
          f"err1_slope={result.err1_slope:.6g}")
    return 0


_COMMANDS = {
    "pullback": _cmd_pullback,
    "compose": _cmd_compose,
    "hj": _cmd_hj,
    "liecheck": _cmd_liecheck,
    "qsweep": _cmd_qsweep,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (SpecError, AdmissibilityError, ParseError, ValueError,
            OSError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
