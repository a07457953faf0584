"""The generalized BLP water-wave system, its symmetry generators, the
determining-equation verifier and the one-parameter group transforms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .expr import Expr, ExprError, exp, func, ln, num, parse, sym
from .jet import (
    Generator,
    MultiIndex,
    apply_prolonged,
    jet,
    jet_symbols_in,
    prolong,
    total_derivative_multi,
)

T, X, Y, U, V = sym("t"), sym("x"), sym("y"), sym("u"), sym("v")


@dataclass(frozen=True)
class BLPParams:
    a: Expr = field(default_factory=lambda: sym("a"))
    b: Expr = field(default_factory=lambda: sym("b"))
    c: Expr = field(default_factory=lambda: sym("c"))
    g: Expr = field(default_factory=lambda: sym("g"))

    @staticmethod
    def numeric(a, b, c, g) -> "BLPParams":
        conv = lambda v: v if isinstance(v, Expr) else num(v)
        return BLPParams(conv(a), conv(b), conv(c), conv(g))

    def as_dict(self) -> Dict[str, Expr]:
        return {"a": self.a, "b": self.b, "c": self.c, "g": self.g}


def residual_forms(params: Optional[BLPParams] = None) -> Tuple[Expr, Expr]:
    """Expanded residuals:
    R1 = u_ty - 2a u_x u_y - 2a u u_xy + a u_xxy - b v_xxx
    R2 = v_t - c v_xx - g u v_x
    """
    p = params or BLPParams()
    r1 = (jet("u", "ty") - 2 * p.a * jet("u", "x") * jet("u", "y")
          - 2 * p.a * jet("u") * jet("u", "xy") + p.a * jet("u", "xxy")
          - p.b * jet("v", "xxx"))
    r2 = jet("v", "t") - p.c * jet("v", "xx") - p.g * jet("u") * jet("v", "x")
    return r1, r2


def leading_solved(params: Optional[BLPParams] = None) -> Dict[str, Expr]:
    """Leading derivatives isolated from R1 = 0, R2 = 0."""
    p = params or BLPParams()
    r1, r2 = residual_forms(p)
    uty = jet("u", "ty") - r1  # u_ty = RHS1
    vt = jet("v", "t") - r2
    return {"u_ty": uty, "v_t": vt}


def _reducible(dep: str, mi: MultiIndex) -> bool:
    if dep == "v":
        return mi.t >= 1
    if dep == "u":
        return mi.t >= 1 and mi.y >= 1
    return False


def manifold_reduce(e: Expr, params: Optional[BLPParams] = None) -> Expr:
    """Substitute u_ty, v_t and their differential consequences.

    v_J with at least one t-derivative and u_J with t- and y-derivatives are
    replaced by total derivatives of the solved leading forms.  Each
    substitution only introduces coordinates with strictly fewer
    t-derivatives, so the loop terminates.
    """
    solved = leading_solved(params)
    rhs1 = solved["u_ty"]
    rhs2 = solved["v_t"]
    while True:
        target = None
        for dep, mi, name in jet_symbols_in(e):
            if _reducible(dep, mi):
                if target is None or (mi.t, mi.order) > (target[1].t,
                                                         target[1].order):
                    target = (dep, mi, name)
        if target is None:
            return e
        dep, mi, name = target
        if dep == "v":
            rest = MultiIndex(mi.t - 1, mi.x, mi.y)
            value = total_derivative_multi(rhs2, rest)
        else:
            rest = MultiIndex(mi.t - 1, mi.x, mi.y - 1)
            value = total_derivative_multi(rhs1, rest)
        e = e.subs({name: value})


# ---------------------------------------------------------------------------
# The published generators
# ---------------------------------------------------------------------------

ZERO = num(0)
ONE = num(1)

F_FAMILY = ("1", "y", "y^2", "exp(y)", "sin(y)")


def _fexpr(spec) -> Expr:
    if isinstance(spec, Expr):
        return spec
    return parse(str(spec))


def X1() -> Generator:
    return Generator(ZERO, ONE, ZERO, ZERO, ZERO, label="X1")


def X2() -> Generator:
    return Generator(ZERO, ZERO, ONE, ZERO, ZERO, label="X2")


def X3() -> Generator:
    return Generator(ONE, ZERO, ZERO, ZERO, ZERO, label="X3")


def X4() -> Generator:
    return Generator(-2 * T, -X, ZERO, U, ZERO, label="X4")


def X5(f2: Optional[Expr] = None) -> Generator:
    f2 = func("F2", Y) if f2 is None else _fexpr(f2)
    return Generator(ZERO, ZERO, ZERO, ZERO, f2, label="X5")


def X6(f1: Optional[Expr] = None) -> Generator:
    f1 = func("F1", Y) if f1 is None else _fexpr(f1)
    return Generator(ZERO, ZERO, -f1, ZERO, V * f1.diff(Y), label="X6")


ALL_GENERATORS = ("X1", "X2", "X3", "X4", "X5", "X6")


def generator(name: str, f: Optional[Expr] = None) -> Generator:
    if name == "X5":
        return X5(f)
    if name == "X6":
        return X6(f)
    if f is not None:
        raise ExprError(f"{name} takes no function argument")
    return {"X1": X1, "X2": X2, "X3": X3, "X4": X4}[name]()


# ---------------------------------------------------------------------------
# Determining-equation check
# ---------------------------------------------------------------------------


@dataclass
class SymmetryReport:
    label: str
    passed: bool
    undecided: bool
    details: List[dict]

    def as_dict(self):
        return {
            "id": self.label,
            "verdict": "pass" if self.passed else (
                "undecided" if self.undecided else "fail"),
            "checks": self.details,
        }


def _verdict_entry(tag: str, residual: Expr):
    v = residual.zero_verdict()
    return {
        "instantiation": tag,
        "status": v.status,
        "reason": v.reason,
        "residual_digest": None if v.status == "zero" else str(residual)[:400],
    }, v.status


def check_symmetry(g: Generator, params: Optional[BLPParams] = None,
                   instantiate: bool = True) -> SymmetryReport:
    """Pass iff the prolonged action on R1, R2 vanishes modulo the system.

    Arbitrary functions in the coefficients are checked opaquely and, when
    `instantiate` is set, with F1/F2 drawn from {1, y, y^2, e^y, sin y}.
    """
    p = params or BLPParams()
    r1, r2 = residual_forms(p)
    variants: List[Tuple[str, Generator]] = [("opaque", g)]
    heads = set()
    for cexpr in g.coeffs():
        for name in ("F1", "F2"):
            if _mentions_head(cexpr, name):
                heads.add(name)
    if instantiate and heads:
        for fam in F_FAMILY:
            mapping = {h: ("y", parse(fam)) for h in heads}
            inst = Generator(*(c.subs(mapping) for c in g.coeffs()),
                             label=g.label)
            variants.append((f"F={fam}", inst))
    details = []
    statuses = []
    for tag, gen in variants:
        table = prolong(gen, 3)
        for eqname, r in (("R1", r1), ("R2", r2)):
            acted = apply_prolonged(gen, r, table)
            reduced = manifold_reduce(acted, p)
            entry, status = _verdict_entry(f"{tag}:{eqname}", reduced)
            details.append(entry)
            statuses.append(status)
    passed = all(s == "zero" for s in statuses)
    undecided = any(s == "undecided" for s in statuses)
    return SymmetryReport(g.label or "candidate", passed, undecided, details)


def _mentions_head(e: Expr, head: str) -> bool:
    from .expr.core import FunAtom

    return any(isinstance(a, FunAtom) and a.head == head
               for a in e.rf.atoms())


# ---------------------------------------------------------------------------
# Theorem 1 group transforms and the discrete reflection
# ---------------------------------------------------------------------------


def group_transform(which: str, eps, sol: Tuple[Expr, Expr]) -> Tuple[Expr, Expr]:
    """One-parameter family of transformed solutions (Theorem 1)."""
    u0, v0 = sol
    e = eps if isinstance(eps, Expr) else num(eps)
    if which == "G1":
        return u0.subs({"x": X - e}), v0.subs({"x": X - e})
    if which == "G2":
        return u0.subs({"y": Y - e}), v0.subs({"y": Y - e})
    if which == "G3":
        return u0.subs({"t": T - e}), v0.subs({"t": T - e})
    if which == "G4":
        m = {"t": T * exp(2 * e), "x": X * exp(e)}
        return exp(e) * u0.subs(m), v0.subs(m)
    raise ExprError(f"unknown group transform '{which}'")


def discrete_reflection(sol: Tuple[Expr, Expr]) -> Tuple[Expr, Expr]:
    """(t,x,y,u,v) -> (t,x,-y,u,-v) maps solutions to solutions."""
    u0, v0 = sol
    return u0.subs({"y": -Y}), -v0.subs({"y": -Y})


def solution_residuals(u0: Expr, v0: Expr,
                       params: Optional[BLPParams] = None) -> Tuple[Expr, Expr]:
    """Residuals of closed forms u(t,x,y), v(t,x,y) plugged into the system."""
    p = params or BLPParams()
    ux = u0.diff("x")
    r1 = (u0.diff("t", "y")
          - p.a * (u0 * u0 - ux).diff("x", "y")
          - p.b * v0.diff("x", "x", "x"))
    r2 = (v0.diff("t") - p.c * v0.diff("x", "x")
          - p.g * u0 * v0.diff("x"))
    return r1, r2
