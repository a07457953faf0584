"""Three-valued zero testing.

A normal form that is the zero polynomial is a proof of zero.  A nonzero
normal form whose atoms are algebraically independent is a proof of nonzero.
When atoms may hide relations (mixed transcendental arguments, surds,
antiderivatives), the verdict falls back to probabilistic evaluation at
random rational points in [-97, 97] x [1, 97], avoiding singular sets; the
result is then 'zero' (probabilistic, logged), 'nonzero', or 'undecided'.
"""

from __future__ import annotations

import logging
import random
from fractions import Fraction

import mpmath

from . import build
from .core import (
    AntiAtom,
    DomainError,
    ElemAtom,
    ExpAtom,
    ExprError,
    FunAtom,
    NumPowAtom,
    RatFun,
    SurdAtom,
    poly_atom,
    rf_atom,
    rf_const,
    rf_sym,
    sym_atom,
)
from .numeric import eval_with_scale

log = logging.getLogger("blpsymlab.zerotest")

ZERO = "zero"
NONZERO = "nonzero"
UNDECIDED = "undecided"

NONZERO_REL = Fraction(1, 10**10)
ZERO_REL = Fraction(1, 10**22)


class Verdict:
    __slots__ = ("status", "certain", "reason")

    def __init__(self, status: str, certain: bool, reason: str):
        self.status = status
        self.certain = certain
        self.reason = reason

    def __bool__(self):
        return self.status == ZERO

    def __repr__(self):
        kind = "certain" if self.certain else "probabilistic"
        return f"Verdict({self.status}, {kind}: {self.reason})"


def _dependent_args(args) -> bool:
    """True if two canonical arguments are rationally dependent."""
    for i in range(len(args)):
        for j in range(i + 1, len(args)):
            q = args[i] - args[j]
            c = q.is_const()
            if c is not None:
                return True
            try:
                ratio = (args[i] / args[j]).is_const()
            except ZeroDivisionError:
                return True
            if ratio is not None:
                return True
    return False


def _relation_risk(r: RatFun) -> str:
    atoms = r.atoms()
    lns = []
    exp_quot = 0
    numpow = set()
    trig: dict = {}
    for a in atoms:
        if isinstance(a, SurdAtom):
            return "surd atoms present"
        if isinstance(a, NumPowAtom):
            numpow.add(a.base)
        elif isinstance(a, ExpAtom):
            if a.arg.den or len(a.arg.num.terms) > 1:
                exp_quot += 1
        elif isinstance(a, ElemAtom):
            if a.head == "ln":
                lns.append(a.arg)
            elif a.head in ("sin", "cos"):
                trig.setdefault("circ", []).append(a.arg)
            else:
                return "hyperbolic atoms after rewrite"
    if exp_quot:
        return "exp atoms with non-polynomial arguments"
    if len(numpow) > 1:
        return "multiple surd constants"
    if len(lns) > 1:
        return "multiple ln atoms"
    circ = trig.get("circ", [])
    if len(circ) > 1 and _dependent_args(circ):
        return "dependent circular-function arguments"
    if len(circ) > 1:
        # sin and cos of the same argument satisfy sin^2+cos^2=1
        keys = set()
        for a in atoms:
            if isinstance(a, ElemAtom) and a.head in ("sin", "cos"):
                keys.add(a.arg.key())
        if len(keys) < len([a for a in atoms if isinstance(a, ElemAtom)
                            and a.head in ("sin", "cos")]):
            return "sin and cos share an argument"
    return ""


def _sample_fraction(rng: random.Random) -> Fraction:
    num = rng.randint(-97, 97)
    den = rng.randint(1, 97)
    if num == 0:
        num = 1
    return Fraction(num, den)


def _instantiate_opaque(r: RatFun, rng: random.Random):
    """Replace opaque function atoms by random small polynomials.

    Heads that appear inside a formal antiderivative are instantiated as
    single monomials so the antiderivative table applies.
    """
    heads: dict = {}
    anti_heads = set()
    for a in r.atoms():
        if isinstance(a, FunAtom):
            heads.setdefault(a.head, len(a.args))
        elif isinstance(a, AntiAtom):
            for b in a.integrand.atoms():
                if isinstance(b, FunAtom):
                    anti_heads.add(b.head)
                    heads.setdefault(b.head, len(b.args))
    if not heads:
        return r
    fun_map = {}
    for head, arity in heads.items():
        formals = tuple(sym_atom(f"_z{i}") for i in range(arity))
        if head in anti_heads:
            c = Fraction(rng.randint(1, 7))
            k = rng.randint(0, 2)
            body = rf_const(c) * rf_sym("_z0").pow(Fraction(k))
        else:
            body = rf_const(Fraction(rng.randint(-5, 5)))
            for f in formals:
                fa = rf_atom(f)
                for k in range(1, 4):
                    body = body + rf_const(
                        Fraction(rng.randint(-5, 5))
                    ) * fa.pow(Fraction(k))
        fun_map[head] = (formals, body)
    return r.subs({}, fun_map)


def zero_verdict(r: RatFun, rng=None, points: int = 20) -> Verdict:
    if r.num.is_zero():
        return Verdict(ZERO, True, "normal form is the zero polynomial")
    rewritten = build.hyper_to_exp(r)
    if rewritten.num.is_zero():
        return Verdict(ZERO, True, "zero after hyperbolic-to-exp rewrite")
    risk = _relation_risk(rewritten)
    if not risk:
        return Verdict(NONZERO, True,
                       "nonzero normal form over independent atoms")
    rng = rng or random.Random(987654321)
    target = rewritten
    try:
        target = _instantiate_opaque(target, rng)
    except ExprError:
        return Verdict(UNDECIDED, False,
                       f"{risk}; opaque atoms not instantiable")
    if any(isinstance(a, (FunAtom, AntiAtom)) for a in target.atoms()):
        return Verdict(UNDECIDED, False,
                       f"{risk}; formal antiderivative not in table")
    syms = sorted(a.name for a in target.free_syms())
    good = 0
    nonzero_hits = 0
    gray = 0
    attempts = 0
    while good < points and attempts < 20 * points:
        attempts += 1
        env = {s: _sample_fraction(rng) for s in syms}
        try:
            val, scale = eval_with_scale(target, env)
        except (DomainError, ZeroDivisionError, OverflowError,
                mpmath.libmp.NoConvergence):
            continue
        except ExprError:
            return Verdict(UNDECIDED, False, f"{risk}; evaluation failed")
        if scale == 0:
            continue
        rel = abs(val) / scale
        good += 1
        if rel > float(NONZERO_REL):
            nonzero_hits += 1
        elif rel > float(ZERO_REL):
            gray += 1
    if good < points:
        return Verdict(UNDECIDED, False,
                       f"{risk}; insufficient valid sample points")
    if nonzero_hits:
        return Verdict(NONZERO, True,
                       f"{risk}; nonzero at {nonzero_hits}/{good} points")
    if gray:
        return Verdict(UNDECIDED, False,
                       f"{risk}; {gray} points in the gray zone")
    v = Verdict(ZERO, False, f"{risk}; vanishes at {good} random points")
    log.info("probabilistic zero verdict: %s", v.reason)
    return v


def is_zero(r: RatFun, rng=None) -> bool:
    v = zero_verdict(r, rng=rng)
    if v.status == UNDECIDED:
        log.warning("undecided zero test treated as false: %s", v.reason)
    return v.status == ZERO
