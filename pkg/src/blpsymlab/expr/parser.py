"""Text grammar for expressions, and the canonical printer.

Grammar (stable; catalog files use it):

    expr    :=  term (('+'|'-') term)*
    term    :=  unary (('*'|'/') unary)*
    unary   :=  '-' unary | power
    power   :=  atom ('^' unary)?          -- right-associative
    atom    :=  NUMBER | IDENT | call | '(' expr ')'
    call    :=  ELEM '(' expr ')'
             |  'Int' '(' expr ',' IDENT ')'
             |  'D' '(' IDENT (',' INT)+ ')' '(' expr (',' expr)* ')'
             |  FUNC '(' expr (',' expr)* ')'

NUMBER is an integer or decimal literal (decimals are exact: 0.5 = 1/2).
ELEM is one of exp, ln, sqrt, sin, cos, sinh, cosh, tanh.  FUNC must be a
registered opaque function name; unknown names applied to arguments are a
parse error.  Everything else is a symbol.  '^' accepts a parenthesized
rational exponent, e.g. t^(1/2); D(F,k) denotes the k-th formal derivative
of F (one order per argument for multivariate atoms, e.g. D(U,1,2)(m,n)).
"""

from __future__ import annotations

import re
from fractions import Fraction

from .core import (
    AntiAtom,
    Atom,
    ElemAtom,
    ExpAtom,
    ExprError,
    F1,
    FunAtom,
    NumPowAtom,
    Poly,
    RatFun,
    SurdAtom,
    SymAtom,
    rf_const,
    rf_sym,
    sym_atom,
)
from . import build

ELEM_NAMES = ("exp", "ln", "sqrt", "sin", "cos", "sinh", "cosh", "tanh")

#: opaque function names known to the artifact's catalogs and tables
DEFAULT_FUNCS = frozenset(
    ["F1", "F2", "U", "V", "W", "g1", "g2", "f3", "g3", "f5"]
    + [f"f{i}" for i in range(8, 16)]
    + ["alpha", "beta", "gamma", "mu", "kA", "kB"]
    + [f"H{i}" for i in range(1, 7)]
)


class ParseError(ExprError):
    def __init__(self, msg: str, text: str, pos: int):
        self.pos = pos
        caret = text[:pos] + ">>>" + text[pos:pos + 1] + "<<<" + text[pos + 1:]
        super().__init__(f"{msg} at position {pos}: {caret}")


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ParseError("unexpected character", text, pos)
        if m.lastgroup is None:
            break
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, funcs):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.funcs = funcs

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val: str):
        kind, v, pos = self.next()
        if v != val:
            raise ParseError(f"expected '{val}'", self.text, pos)

    def parse(self) -> RatFun:
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError("trailing input", self.text, pos)
        return e

    def expr(self) -> RatFun:
        e = self.term()
        while True:
            kind, v, pos = self.peek()
            if v == "+":
                self.next()
                e = e + self.term()
            elif v == "-":
                self.next()
                e = e - self.term()
            else:
                return e

    def term(self) -> RatFun:
        e = self.unary()
        while True:
            kind, v, pos = self.peek()
            if v == "*":
                self.next()
                e = e * self.unary()
            elif v == "/":
                self.next()
                pos2 = self.peek()[2]
                rhs = self.unary()
                if rhs.is_zero_poly():
                    raise ParseError("division by zero", self.text, pos2)
                e = e / rhs
            else:
                return e

    def unary(self) -> RatFun:
        kind, v, pos = self.peek()
        if v == "-":
            self.next()
            return -self.unary()
        return self.power()

    def power(self) -> RatFun:
        base = self.atom()
        kind, v, pos = self.peek()
        if v == "^":
            self.next()
            expos = self.peek()[2]
            ex = self.unary()
            c = ex.is_const()
            if c is None:
                raise ParseError(
                    "exponent must be an exact rational", self.text, expos
                )
            return base.pow(c)
        return base

    def atom(self) -> RatFun:
        kind, v, pos = self.next()
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "num":
            return rf_const(Fraction(v))
        if kind == "ident":
            if self.peek()[1] != "(":
                return rf_sym(v)
            if v in ELEM_NAMES:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return build.make_elem(v, arg)
            if v == "Int":
                self.expect("(")
                integrand = self.expr()
                self.expect(",")
                k2, v2, p2 = self.next()
                if k2 != "ident":
                    raise ParseError("Int variable must be a symbol",
                                     self.text, p2)
                self.expect(")")
                return build.make_anti(integrand, sym_atom(v2))
            if v == "D":
                self.expect("(")
                k2, name, p2 = self.next()
                if k2 != "ident" or name not in self.funcs:
                    raise ParseError("unknown function name in D()",
                                     self.text, p2)
                orders = []
                while self.peek()[1] == ",":
                    self.next()
                    k3, v3, p3 = self.next()
                    if k3 != "num" or "." in v3:
                        raise ParseError("derivative order must be an integer",
                                         self.text, p3)
                    orders.append(int(v3))
                self.expect(")")
                self.expect("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                if len(orders) != len(args):
                    raise ParseError(
                        "derivative order count must match argument count",
                        self.text, pos)
                return build.make_fun(name, args, tuple(orders))
            if v in self.funcs:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                return build.make_fun(name if False else v, args)
            raise ParseError(f"unknown function name '{v}'", self.text, pos)
        raise ParseError("expected a value", self.text, pos)


def parse_ratfun(text: str, funcs=None) -> RatFun:
    registry = DEFAULT_FUNCS if funcs is None else frozenset(funcs)
    return _Parser(text, registry).parse()


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def _fmt_fraction(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _fmt_exponent(e: Fraction) -> str:
    if e.denominator == 1:
        if e >= 0:
            return f"^{e.numerator}"
        return f"^(-{-e.numerator})"
    return f"^({e.numerator}/{e.denominator})"


def _fmt_atom_pow(a: Atom, e: Fraction) -> str:
    if isinstance(a, ExpAtom):
        inner = a.arg.scale(e) if e != 1 else a.arg
        return f"exp({format_ratfun(inner)})"
    s = _fmt_atom(a)
    if e == 1:
        return s
    return s + _fmt_exponent(e)


def _fmt_atom(a: Atom) -> str:
    if isinstance(a, SymAtom):
        return a.name
    if isinstance(a, NumPowAtom):
        b = a.base
        if b.denominator == 1:
            return str(b.numerator)
        return f"({_fmt_fraction(b)})"
    if isinstance(a, ElemAtom):
        return f"{a.head}({format_ratfun(a.arg)})"
    if isinstance(a, FunAtom):
        args = ", ".join(format_ratfun(x) for x in a.args)
        if any(a.dorder):
            orders = ",".join(str(k) for k in a.dorder)
            return f"D({a.head},{orders})({args})"
        return f"{a.head}({args})"
    if isinstance(a, AntiAtom):
        return f"Int({format_ratfun(a.integrand)}, {a.var.name})"
    if isinstance(a, SurdAtom):
        return f"({_fmt_poly(a.base)})"
    raise ExprError(f"unprintable atom {a!r}")


def _fmt_term(mono, coeff: Fraction) -> str:
    parts = []
    if not mono:
        return _fmt_fraction(abs(coeff))
    ac = abs(coeff)
    if ac != 1:
        parts.append(_fmt_fraction(ac))
    for a, e in mono:
        parts.append(_fmt_atom_pow(a, e))
    return "*".join(parts)


def _fmt_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    out = []
    for i, (m, c) in enumerate(p.sorted_terms()):
        piece = _fmt_term(m, c)
        if i == 0:
            out.append(("-" if c < 0 else "") + piece)
        else:
            out.append((" - " if c < 0 else " + ") + piece)
    return "".join(out)


def format_ratfun(r: RatFun) -> str:
    num, den = r.as_pq()
    ns = _fmt_poly(num)
    if den.is_const() == 1:
        return ns
    ds = _fmt_poly(den)
    nw = f"({ns})" if (" + " in ns or " - " in ns or ns.startswith("-")) else ns
    dneeds = (" + " in ds or " - " in ds or "*" in ds or "^" in ds
              or ds.startswith("-"))
    dw = f"({ds})" if dneeds else ds
    return f"{nw}/{dw}"
