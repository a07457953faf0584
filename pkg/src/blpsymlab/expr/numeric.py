"""Numeric evaluation: direct tree walk plus a small compiler.

Double precision uses plain IEEE arithmetic (or numpy arrays through the
compiled form); extended precision uses mpmath at >= 40 working digits.
Function atoms must be instantiated before evaluation; domain violations
report the offending subexpression.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .core import (
    AntiAtom,
    Atom,
    DomainError,
    ElemAtom,
    ExpAtom,
    ExprError,
    FunAtom,
    NumPowAtom,
    Poly,
    RatFun,
    SurdAtom,
    SymAtom,
)

EXTENDED_DPS = 40

_MATH_FUNCS = {
    "ln": math.log, "sin": math.sin, "cos": math.cos,
    "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh,
}


def _mp_funcs():
    return {
        "ln": mpmath.log, "sin": mpmath.sin, "cos": mpmath.cos,
        "sinh": mpmath.sinh, "cosh": mpmath.cosh, "tanh": mpmath.tanh,
    }


class _Evaluator:
    def __init__(self, env: dict, extended: bool):
        self.env = env
        self.extended = extended
        self.cache: dict = {}
        if extended:
            self.funcs = _mp_funcs()
            self.exp = mpmath.exp
            self.conv = lambda q: mpmath.mpf(q.numerator) / q.denominator
        else:
            self.funcs = _MATH_FUNCS
            self.exp = math.exp
            self.conv = lambda q: q.numerator / q.denominator

    def atom(self, a: Atom):
        v = self.cache.get(a)
        if v is not None:
            return v
        if isinstance(a, SymAtom):
            try:
                v = self.env[a.name]
            except KeyError:
                raise ExprError(f"no value assigned for symbol '{a.name}'")
            if isinstance(v, Fraction):
                v = self.conv(v)
        elif isinstance(a, NumPowAtom):
            v = self.conv(a.base)
        elif isinstance(a, ExpAtom):
            v = self.exp(self.ratfun(a.arg))
        elif isinstance(a, ElemAtom):
            x = self.ratfun(a.arg)
            if a.head == "ln" and x <= 0:
                raise DomainError(f"ln of non-positive value in {a!r}")
            v = self.funcs[a.head](x)
        elif isinstance(a, SurdAtom):
            v = self.poly(a.base)
        elif isinstance(a, (FunAtom, AntiAtom)):
            raise ExprError(
                f"cannot evaluate uninstantiated function atom {a!r}"
            )
        else:
            raise ExprError(f"cannot evaluate atom {a!r}")
        self.cache[a] = v
        return v

    def _pow(self, base, e: Fraction):
        if e.denominator == 1:
            if base == 0 and e < 0:
                raise DomainError("division by zero in monomial")
            return base ** e.numerator
        if base < 0:
            raise DomainError(
                f"negative base {base} under fractional power {e}"
            )
        ev = self.conv(e) if self.extended else e.numerator / e.denominator
        return base ** ev

    def mono(self, m, c: Fraction):
        v = self.conv(c)
        for a, e in m:
            v = v * self._pow(self.atom(a), e)
        return v

    def poly(self, p: Poly):
        total = self.conv(Fraction(0))
        for m, c in p.terms.items():
            total += self.mono(m, c)
        return total

    def poly_mag(self, p: Poly):
        total = self.conv(Fraction(0))
        for m, c in p.terms.items():
            total += abs(self.mono(m, c))
        return total

    def ratfun(self, r: RatFun):
        v = self.poly(r.num)
        for p, mult in r.den:
            d = self.poly(p)
            if d == 0:
                raise DomainError(f"denominator factor vanishes: {p!r}")
            v = v / d ** mult
        return v


def eval_ratfun(r: RatFun, env: dict, precision: str = "double"):
    """Evaluate at a point.  precision: 'double' or 'extended'."""
    if precision == "double":
        return _Evaluator(env, extended=False).ratfun(r)
    if precision == "extended":
        with mpmath.workdps(EXTENDED_DPS):
            return _Evaluator(env, extended=True).ratfun(r)
    raise ExprError(f"unknown precision mode '{precision}'")


def eval_with_scale(r: RatFun, env: dict):
    """Extended-precision (value, scale): scale is the sum of absolute
    numerator term magnitudes over the denominator magnitude, used for
    relative comparisons."""
    with mpmath.workdps(EXTENDED_DPS):
        ev = _Evaluator(env, extended=True)
        num = ev.poly(r.num)
        mag = ev.poly_mag(r.num)
        den = mpmath.mpf(1)
        for p, mult in r.den:
            d = ev.poly(p)
            if d == 0:
                raise DomainError(f"denominator factor vanishes: {p!r}")
            den *= d ** mult
        return num / den, mag / abs(den)


# ---------------------------------------------------------------------------
# Compilation to python source (scalar math or numpy arrays)
# ---------------------------------------------------------------------------


def _frac_src(c: Fraction) -> str:
    if c.denominator == 1:
        return repr(c.numerator)
    return f"({c.numerator}/{c.denominator})"


class _Compiler:
    def __init__(self, varnames, backend: str):
        self.varnames = list(varnames)
        self.backend = backend
        self.lines: list = []
        self.names: dict = {}
        self.counter = 0

    def fn(self, name: str) -> str:
        if self.backend == "numpy":
            return f"np.{'log' if name == 'ln' else name}"
        return f"mp.{'log' if name == 'ln' else name}"

    def _pow_src(self, base: str, e: Fraction) -> str:
        if e == 1:
            return base
        if e.denominator == 1:
            return f"{base}**{e.numerator}"
        if self.backend == "numpy":
            return f"{base}**{float(e)!r}"
        return f"{base}**(mp.mpf({e.numerator})/{e.denominator})"

    def atom(self, a: Atom) -> str:
        got = self.names.get(a)
        if got is not None:
            return got
        if isinstance(a, SymAtom):
            if a.name not in self.varnames:
                raise ExprError(
                    f"free symbol '{a.name}' is not a compiled variable"
                )
            src = a.name
        elif isinstance(a, NumPowAtom):
            src = _frac_src(a.base)
        elif isinstance(a, ExpAtom):
            src = f"{self.fn('exp')}({self.ratfun(a.arg)})"
        elif isinstance(a, ElemAtom):
            src = f"{self.fn(a.head)}({self.ratfun(a.arg)})"
        elif isinstance(a, SurdAtom):
            src = self.poly(a.base)
        else:
            raise ExprError(f"cannot compile atom {a!r}")
        name = f"a{self.counter}"
        self.counter += 1
        self.lines.append(f"    {name} = {src}")
        self.names[a] = name
        return name

    def mono(self, m, c: Fraction) -> str:
        parts = [] if c == 1 and m else [_frac_src(c)]
        for a, e in m:
            parts.append(self._pow_src(self.atom(a), e))
        return "*".join(parts) if parts else "1"

    def poly(self, p: Poly) -> str:
        if p.is_zero():
            return "0.0"
        return "(" + " + ".join(
            self.mono(m, c) for m, c in p.sorted_terms()
        ) + ")"

    def ratfun(self, r: RatFun) -> str:
        src = self.poly(r.num)
        for p, mult in r.den:
            src = f"{src}/({self.poly(p)})**{mult}"
        return f"({src})"


def compile_ratfun(r: RatFun, varnames, backend: str = "numpy"):
    """Compile to a callable f(*vars).  backend 'numpy' broadcasts over
    arrays (invalid points become nan/inf); backend 'mpmath' is scalar."""
    comp = _Compiler(varnames, backend)
    body = comp.ratfun(r)
    argsrc = ", ".join(comp.varnames)
    src = f"def _f({argsrc}):\n" + "\n".join(comp.lines) + \
          f"\n    return {body}\n"
    ns: dict = {}
    if backend == "numpy":
        import numpy as np

        ns["np"] = np
    else:
        ns["mp"] = mpmath
    exec(src, ns)  # noqa: S102 - generated from a closed expression grammar
    return ns["_f"]
