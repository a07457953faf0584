"""Small antiderivative table for instantiating formal Int(...) atoms.

Covers sums of:  c*R*var^k (k rational, including k = -1 -> ln),
c*R*exp(lam*var)-type exp atoms, c*R*sin/cos(lam*var+mu), and c*R/f with f
linear in var.  Here R and lam are var-free.  Anything else stays formal.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .core import (
    ElemAtom,
    ExpAtom,
    F0,
    F1,
    Poly,
    RatFun,
    RF_ZERO,
    SymAtom,
    _KIND_ELEM,
    _KIND_EXP,
    mono_make,
    rf_atom,
    rf_const,
)


def _var_free(r: RatFun, var: SymAtom) -> bool:
    return var not in r.free_syms()


def _integrate_term(mono, coeff: Fraction, var: SymAtom) -> Optional[RatFun]:
    var_exp = F0
    special = None  # (atom, exponent)
    rest: list = []
    for a, e in mono:
        if a.kind == 0 and a == var:  # SymAtom
            var_exp = e
            continue
        if var in a.free_syms():
            if special is not None:
                return None
            special = (a, e)
        else:
            rest.append((a, e))
    base = RatFun(Poly({mono_make(rest): coeff}), ())
    if special is None:
        if var_exp == -1:
            return base * rf_atom(ElemAtom("ln", rf_atom(var)))
        vnext = var_exp + 1
        return base.scale(F1 / vnext) * rf_atom(var).pow(vnext)
    if var_exp != 0:
        return None
    a, e = special
    if a.kind == _KIND_EXP:
        lam = a.arg.diff(var).scale(Fraction(e))
        if lam.is_zero_poly() or not _var_free(lam, var):
            return None
        return base * rf_atom(a).pow(e) / lam
    if a.kind == _KIND_ELEM and a.head in ("sin", "cos") and e == 1:
        lam = a.arg.diff(var)
        if lam.is_zero_poly() or not _var_free(lam, var):
            return None
        if a.head == "sin":
            return -(base * rf_atom(ElemAtom("cos", a.arg)) / lam)
        return base * rf_atom(ElemAtom("sin", a.arg)) / lam
    return None


def lookup(integrand: RatFun, var: SymAtom) -> Optional[RatFun]:
    """Antiderivative of `integrand` with respect to `var`, or None."""
    if _var_free(integrand, var):
        return integrand * rf_atom(var)
    if integrand.den:
        if len(integrand.den) == 1 and integrand.den[0][1] == 1:
            f, _ = integrand.den[0]
            frf = RatFun(f, ())
            lam = frf.diff(var)
            num = RatFun(integrand.num, ())
            if (not lam.is_zero_poly() and _var_free(lam, var)
                    and _var_free(num, var)):
                return (num / lam) * rf_atom(ElemAtom("ln", frf))
        return None
    total = RF_ZERO
    for m, c in integrand.num.terms.items():
        t = _integrate_term(m, c, var)
        if t is None:
            return None
        total = total + t
    return total
