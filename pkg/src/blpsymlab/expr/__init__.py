"""Public expression API: immutable, always-canonical expressions.

An Expr is kept in rational normal form (a fraction of multivariate
polynomials over the atom basis) at all times, so `normalize` is a
projection onto the public p/q view and is idempotent by construction.
Printing emits the documented grammar; parse(str(e)) == e.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .core import (
    DomainError,
    ExprError,
    F1 as _F1,
    RatFun,
    RF_ONE,
    RF_ZERO,
    SubstitutionCycleError,
    as_fraction,
    rf_const,
    rf_sym,
    sym_atom,
)
from . import build as _build
from . import parser as _parser
from . import numeric as _numeric
from . import zerotest as _zerotest
from .zerotest import Verdict, NONZERO, UNDECIDED, ZERO

__all__ = [
    "Expr", "sym", "num", "parse", "normalize", "diff", "substitute",
    "eval_numeric", "is_zero", "zero_verdict", "exp", "ln", "sqrt", "sin",
    "cos", "sinh", "cosh", "tanh", "func", "anti", "hyper_expand",
    "Verdict", "ZERO", "NONZERO", "UNDECIDED",
    "ExprError", "DomainError", "SubstitutionCycleError", "ParseError",
]

ParseError = _parser.ParseError


def _coerce(x) -> RatFun:
    if isinstance(x, Expr):
        return x.rf
    if isinstance(x, RatFun):
        return x
    if isinstance(x, (int, Fraction)):
        return rf_const(as_fraction(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


class Expr:
    """Immutable symbolic expression in rational normal form."""

    __slots__ = ("rf",)

    def __init__(self, rf: RatFun):
        object.__setattr__(self, "rf", rf)

    def __setattr__(self, *a):
        raise AttributeError("Expr is immutable")

    # arithmetic ------------------------------------------------------------

    def __add__(self, other):
        return Expr(self.rf + _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Expr(self.rf - _coerce(other))

    def __rsub__(self, other):
        return Expr(_coerce(other) - self.rf)

    def __mul__(self, other):
        return Expr(self.rf * _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Expr(self.rf / _coerce(other))

    def __rtruediv__(self, other):
        return Expr(_coerce(other) / self.rf)

    def __neg__(self):
        return Expr(-self.rf)

    def __pow__(self, e):
        if isinstance(e, Expr):
            c = e.rf.is_const()
            if c is None:
                raise ExprError("exponent must be an exact rational")
            e = c
        return Expr(self.rf.pow(as_fraction(e)))

    # structure ---------------------------------------------------------------

    def __eq__(self, other):
        try:
            rhs = _coerce(other)
        except TypeError:
            return NotImplemented
        return (self.rf - rhs).num.is_zero()

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __hash__(self):
        return hash(self.rf.key())

    def __str__(self):
        return _parser.format_ratfun(self.rf)

    __repr__ = __str__

    @property
    def free_symbols(self) -> set:
        return {a.name for a in self.rf.free_syms()}

    def is_constant(self):
        return self.rf.is_const()

    # operations ---------------------------------------------------------------

    def diff(self, *syms) -> "Expr":
        r = self.rf
        for s in syms:
            if isinstance(s, Expr):
                a = s.rf.single_sym_atom()
                if a is None:
                    raise ExprError("can only differentiate by a symbol")
                r = r.diff(a)
            else:
                r = r.diff(sym_atom(str(s)))
        return Expr(r)

    def subs(self, mapping: dict) -> "Expr":
        atom_map: dict = {}
        fun_map: dict = {}
        for k, v in mapping.items():
            if isinstance(v, tuple):
                formals, body = v
                if isinstance(formals, (str, Expr)):
                    formals = (formals,)
                fa = []
                for f in formals:
                    if isinstance(f, Expr):
                        a = f.rf.single_sym_atom()
                        if a is None:
                            raise ExprError("template formal must be a symbol")
                        fa.append(a)
                    else:
                        fa.append(sym_atom(str(f)))
                fun_map[str(k)] = (tuple(fa), _coerce(body))
            else:
                if isinstance(k, Expr):
                    a = k.rf.single_sym_atom()
                    if a is None:
                        raise ExprError("substitution key must be a symbol")
                else:
                    a = sym_atom(str(k))
                atom_map[a] = _coerce(v)
        _check_cycles(atom_map, fun_map)
        return Expr(self.rf.subs(atom_map, fun_map))

    def eval(self, env: dict, precision: str = "double"):
        clean = {}
        for k, v in env.items():
            name = k if isinstance(k, str) else str(k)
            clean[name] = v if isinstance(v, (int, float, Fraction)) else v
        missing = self.free_symbols - set(clean)
        if missing:
            raise ExprError(
                f"assignment missing symbols: {sorted(missing)}"
            )
        return _numeric.eval_ratfun(self.rf, clean, precision)

    def zero_verdict(self, rng=None) -> Verdict:
        return _zerotest.zero_verdict(self.rf, rng=rng)

    def is_zero(self, rng=None) -> bool:
        return _zerotest.is_zero(self.rf, rng=rng)

    def equals(self, other) -> bool:
        return bool((self - other).is_zero())

    def normalized(self) -> "Expr":
        return self

    def as_pq(self):
        n, d = self.rf.as_pq()
        return Expr(RatFun(n, ())), Expr(RatFun(d, ()))


def _check_cycles(atom_map, fun_map):
    """Symbol bindings are simultaneous, so self-reference like x -> x - eps
    is fine; only function templates expand recursively and must be acyclic
    (a template whose body reaches its own head would never terminate)."""
    from .core import FunAtom

    graph = {}
    for head, (_, body) in fun_map.items():
        graph[head] = {a.head for a in body.atoms() if isinstance(a, FunAtom)}
    for start in graph:
        seen = set()
        stack = [start]
        while stack:
            for nxt in graph.get(stack.pop(), ()):
                if nxt == start:
                    raise SubstitutionCycleError(
                        f"function template cycle through '{start}'"
                    )
                if nxt not in seen and nxt in graph:
                    seen.add(nxt)
                    stack.append(nxt)


# -- constructors --------------------------------------------------------------


def sym(name: str) -> Expr:
    return Expr(rf_sym(name))


def num(p, q=1) -> Expr:
    return Expr(rf_const(Fraction(p, q)))


def parse(text: str, funcs=None) -> Expr:
    return Expr(_parser.parse_ratfun(text, funcs))


def exp(e) -> Expr:
    return Expr(_build.make_exp(_coerce(e)))


def _elem(head):
    def f(e):
        return Expr(_build.make_elem(head, _coerce(e)))

    f.__name__ = head
    return f


ln = _elem("ln")
sin = _elem("sin")
cos = _elem("cos")
sinh = _elem("sinh")
cosh = _elem("cosh")
tanh = _elem("tanh")


def sqrt(e) -> Expr:
    return Expr(_coerce(e).pow(Fraction(1, 2)))


def func(head: str, *args, d=None) -> Expr:
    if d is None:
        d = (0,) * len(args)
    elif isinstance(d, int):
        d = (d,) + (0,) * (len(args) - 1)
    return Expr(_build.make_fun(head, [_coerce(a) for a in args], tuple(d)))


def anti(integrand, var) -> Expr:
    v = var.rf.single_sym_atom() if isinstance(var, Expr) else sym_atom(
        str(var))
    if v is None:
        raise ExprError("antiderivative variable must be a symbol")
    return Expr(_build.make_anti(_coerce(integrand), v))


def hyper_expand(e) -> Expr:
    """Rewrite sinh/cosh/tanh atoms via exp (the zero-test rewrite)."""
    return Expr(_build.hyper_to_exp(_coerce(e)))


# -- spec-level operation aliases -----------------------------------------------


def normalize(e) -> Expr:
    """Canonical rational form; idempotent (expressions stay normalized)."""
    return e if isinstance(e, Expr) else Expr(_coerce(e))


def diff(e, s) -> Expr:
    return normalize(e).diff(s)


def substitute(e, mapping: dict) -> Expr:
    return normalize(e).subs(mapping)


def eval_numeric(e, assignment: dict, precision: str = "double"):
    return normalize(e).eval(assignment, precision)


def is_zero(e, rng=None) -> bool:
    return normalize(e).is_zero(rng=rng)


def zero_verdict(e, rng=None) -> Verdict:
    return normalize(e).zero_verdict(rng=rng)


ZERO_EXPR = Expr(RF_ZERO)
ONE_EXPR = Expr(RF_ONE)
