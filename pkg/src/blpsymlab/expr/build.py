"""Smart constructors on top of the rational kernel.

make_exp implements the exp group canonicalization: polynomial arguments are
split per term, rational coefficients become exponents of a content-free
ExpAtom, and exp(c*ln(w)) collapses to w^c.  make_elem keeps ln and the
trigonometric/hyperbolic heads opaque (apart from exact special values at 0);
hyper_to_exp rewrites sinh/cosh/tanh atoms into exp atoms of the same
argument so that mixed hyperbolic identities cancel polynomially.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .core import (
    AntiAtom,
    DomainError,
    ElemAtom,
    ExprError,
    ExpAtom,
    F0,
    F1,
    FunAtom,
    Poly,
    RatFun,
    RF_ONE,
    RF_ZERO,
    SymAtom,
    _KIND_ELEM,
    _KIND_EXP,
    mono_make,
    poly_atom,
    rf_atom,
    rf_const,
    sym_atom,
)

from . import antideriv


def make_exp(arg: RatFun) -> RatFun:
    if arg.is_zero_poly():
        return RF_ONE
    if not arg.den:
        out = RF_ONE
        for m, c in arg.num.terms.items():
            if len(m) == 1 and m[0][1] == 1 and m[0][0].kind == _KIND_ELEM \
                    and m[0][0].head == "ln":
                # exp(c * ln w) -> w^c
                out = out * m[0][0].arg.pow(c)
                continue
            base = RatFun(Poly({m: F1}), ())
            out = out * rf_atom(ExpAtom(base)).pow(c)
        return out
    # quotient argument: extract rational content via the leading coefficient
    lm, lc = arg.num.leading()
    prim = arg.scale(F1 / lc)
    return rf_atom(ExpAtom(prim)).pow(lc)


def make_elem(head: str, arg: RatFun) -> RatFun:
    if head == "exp":
        return make_exp(arg)
    if head == "sqrt":
        return arg.pow(Fraction(1, 2))
    c = arg.is_const()
    if c is not None:
        if head == "ln":
            if c == 1:
                return RF_ZERO
            if c <= 0:
                raise DomainError(f"ln of non-positive constant {c}")
        elif c == 0:
            if head in ("sin", "sinh", "tanh"):
                return RF_ZERO
            if head in ("cos", "cosh"):
                return RF_ONE
    if head not in ("ln", "sin", "cos", "sinh", "cosh", "tanh"):
        raise ExprError(f"unknown elementary function {head}")
    return rf_atom(ElemAtom(head, arg))


def make_fun(head: str, args, dorder=None) -> RatFun:
    args = tuple(args)
    if dorder is None:
        dorder = (0,) * len(args)
    return rf_atom(FunAtom(head, args, tuple(dorder)))


def make_anti(integrand: RatFun, var: SymAtom, fun_map=None) -> RatFun:
    """Formal antiderivative; resolved through the table when possible."""
    hit = antideriv.lookup(integrand, var)
    if hit is not None:
        return hit
    return rf_atom(AntiAtom(integrand, var))


def hyper_to_exp(r: RatFun) -> RatFun:
    """Rewrite sinh/cosh/tanh atoms via exp of the same argument.

    sinh w -> (E^2-1)/(2E), cosh w -> (E^2+1)/(2E), tanh w -> (E^2-1)/(E^2+1)
    with E = exp(w); exp atoms already share the canonical argument, so all
    standard hyperbolic identities reduce to polynomial cancellation.
    """
    targets = [
        a for a in r.atoms()
        if a.kind == _KIND_ELEM and a.head in ("sinh", "cosh", "tanh")
    ]
    if not targets:
        return r
    amap = {}
    two = rf_const(Fraction(2))
    for a in targets:
        e = make_exp(a.arg)
        e2 = e * e
        if a.head == "sinh":
            val = (e2 - RF_ONE) / (two * e)
        elif a.head == "cosh":
            val = (e2 + RF_ONE) / (two * e)
        else:
            val = (e2 - RF_ONE) / (e2 + RF_ONE)
        amap[a] = val
    # Substitute at the atom level: walk the structure once.
    return _replace_atoms(r, amap)


def _replace_atoms(r: RatFun, amap: dict) -> RatFun:
    def sub_poly(p: Poly) -> RatFun:
        total = RF_ZERO
        for m, c in p.terms.items():
            term = rf_const(c)
            for a, e in m:
                v = amap.get(a)
                if v is None:
                    nested = _replace_atoms_in_atom(a, amap)
                    term = term * (nested if nested is not None
                                   else rf_atom(a)).pow(e)
                else:
                    term = term * v.pow(e)
            total = total + term
        return total

    out = sub_poly(r.num)
    for p, m in r.den:
        out = out * sub_poly(p).pow(Fraction(-m))
    return out


def _replace_atoms_in_atom(a, amap) -> Optional[RatFun]:
    """Descend into atom arguments (tanh inside a Fun arg, etc.)."""
    if a.kind == _KIND_ELEM:
        new_arg = _replace_atoms(a.arg, amap)
        if new_arg.key() != a.arg.key():
            return make_elem(a.head, new_arg)
        return None
    if a.kind == _KIND_EXP:
        new_arg = _replace_atoms(a.arg, amap)
        if new_arg.key() != a.arg.key():
            return make_exp(new_arg)
        return None
    return None
