"""Jet coordinates, total derivatives and third-order prolongation.

Jet coordinates are plain symbols named ``<dep>_<suffix>`` where the suffix
lists derivative directions in the fixed order t, x, y (e.g. ``u_txy``,
``v_xxx``); the bare dependent name is the order-zero coordinate.  Dependent
variables are u, v and the potentials psi1..psi3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .expr import Expr, ExprError, sym

DIRECTIONS = ("t", "x", "y")
DEPENDENTS = ("u", "v", "psi1", "psi2", "psi3")
JET_ORDER_CAP = 4


class JetOrderError(ExprError):
    """A total derivative pushed past the supported jet order."""


@dataclass(frozen=True, order=True)
class MultiIndex:
    t: int = 0
    x: int = 0
    y: int = 0

    @property
    def order(self) -> int:
        return self.t + self.x + self.y

    def bump(self, direction: str) -> "MultiIndex":
        d = {"t": self.t, "x": self.x, "y": self.y}
        d[direction] += 1
        return MultiIndex(**d)

    def drop(self, direction: str) -> "MultiIndex":
        d = {"t": self.t, "x": self.x, "y": self.y}
        if d[direction] == 0:
            raise ValueError(f"no {direction}-derivative to remove")
        d[direction] -= 1
        return MultiIndex(**d)

    def suffix(self) -> str:
        return "t" * self.t + "x" * self.x + "y" * self.y

    @staticmethod
    def from_suffix(s: str) -> "MultiIndex":
        return MultiIndex(s.count("t"), s.count("x"), s.count("y"))


def jet_name(dep: str, mi: MultiIndex) -> str:
    sfx = mi.suffix()
    return dep if not sfx else f"{dep}_{sfx}"


def jet(dep: str, spec="") -> Expr:
    """Jet coordinate as an expression: jet('u', 'ty') -> u_ty."""
    if dep not in DEPENDENTS:
        raise ExprError(f"unknown dependent variable '{dep}'")
    mi = spec if isinstance(spec, MultiIndex) else MultiIndex.from_suffix(spec)
    if mi.order > JET_ORDER_CAP:
        raise JetOrderError(f"jet order {mi.order} exceeds cap {JET_ORDER_CAP}")
    return sym(jet_name(dep, mi))


def parse_jet(name: str) -> Optional[Tuple[str, MultiIndex]]:
    if name in DEPENDENTS:
        return name, MultiIndex()
    if "_" not in name:
        return None
    dep, _, sfx = name.partition("_")
    if dep not in DEPENDENTS or not sfx:
        return None
    if any(ch not in "txy" for ch in sfx):
        return None
    if sorted(sfx, key="txy".index) != list(sfx):
        return None
    return dep, MultiIndex.from_suffix(sfx)


def jet_symbols_in(e: Expr):
    """All (dep, MultiIndex, name) triples whose symbols occur in e."""
    out = []
    for name in e.free_symbols:
        hit = parse_jet(name)
        if hit is not None:
            out.append((hit[0], hit[1], name))
    return out


def total_derivative(e: Expr, direction: str) -> Expr:
    """D_i e = de/di + sum over jets w_J of w_{J+e_i} * de/dw_J."""
    if direction not in DIRECTIONS:
        raise ExprError(f"direction must be one of {DIRECTIONS}")
    out = e.diff(direction)
    for dep, mi, name in jet_symbols_in(e):
        partial = e.diff(name)
        bumped = mi.bump(direction)
        if bumped.order > JET_ORDER_CAP:
            raise JetOrderError(
                f"total derivative exceeds jet order cap at {name}"
            )
        out = out + sym(jet_name(dep, bumped)) * partial
    return out


def total_derivative_multi(e: Expr, mi: MultiIndex) -> Expr:
    for d, n in (("x", mi.x), ("y", mi.y), ("t", mi.t)):
        for _ in range(n):
            e = total_derivative(e, d)
    return e


@dataclass(frozen=True)
class Generator:
    """Point-symmetry vector field with coefficients (tau, xi, pi, eta, phi)
    for (d/dt, d/dx, d/dy, d/du, d/dv)."""

    tau: Expr
    xi: Expr
    pi: Expr
    eta: Expr
    phi: Expr
    label: str = ""

    def __post_init__(self):
        for c in (self.tau, self.xi, self.pi, self.eta, self.phi):
            for dep, mi, name in jet_symbols_in(c):
                if mi.order > 0:
                    raise ExprError(
                        f"non-point generator: coefficient contains {name}"
                    )

    def coeffs(self):
        return (self.tau, self.xi, self.pi, self.eta, self.phi)

    def __add__(self, other: "Generator") -> "Generator":
        return Generator(
            self.tau + other.tau, self.xi + other.xi, self.pi + other.pi,
            self.eta + other.eta, self.phi + other.phi,
        )

    def scale(self, c) -> "Generator":
        return Generator(self.tau * c, self.xi * c, self.pi * c,
                         self.eta * c, self.phi * c)

    def apply_to(self, f: Expr) -> Expr:
        """First-order action on a function of (t, x, y, u, v)."""
        return (self.tau * f.diff("t") + self.xi * f.diff("x")
                + self.pi * f.diff("y") + self.eta * f.diff("u")
                + self.phi * f.diff("v"))


def prolong(g: Generator, order: int = 3) -> Dict:
    """Prolongation coefficients {(dep, MultiIndex): Expr} for u and v.

    Standard recursion: zeta^{J+e_i} = D_i zeta^J - (D_i tau) w_{J+e_t}
    - (D_i xi) w_{J+e_x} - (D_i pi) w_{J+e_y}.
    """
    if order > 3:
        raise ExprError("prolongation supported up to order 3")
    table: Dict = {("u", MultiIndex()): g.eta, ("v", MultiIndex()): g.phi}
    dts = {d: total_derivative for d in DIRECTIONS}
    frontier = [MultiIndex()]
    for _ in range(order):
        new = []
        for mi in frontier:
            for d in DIRECTIONS:
                tgt = mi.bump(d)
                if ("u", tgt) in table or tgt.order > order:
                    continue
                dtau = total_derivative(g.tau, d)
                dxi = total_derivative(g.xi, d)
                dpi = total_derivative(g.pi, d)
                for dep in ("u", "v"):
                    zeta = table[(dep, mi)]
                    val = total_derivative(zeta, d)
                    val = val - dtau * sym(jet_name(dep, mi.bump("t")))
                    val = val - dxi * sym(jet_name(dep, mi.bump("x")))
                    val = val - dpi * sym(jet_name(dep, mi.bump("y")))
                    table[(dep, tgt)] = val
                new.append(tgt)
        frontier = new
    return table


def apply_prolonged(g: Generator, e: Expr, table: Optional[Dict] = None) -> Expr:
    """Action of the prolonged field on a jet expression."""
    needed = jet_symbols_in(e)
    max_order = max((mi.order for _, mi, _ in needed), default=0)
    if table is None:
        table = prolong(g, min(3, max_order) if max_order else 1)
    out = (g.tau * e.diff("t") + g.xi * e.diff("x") + g.pi * e.diff("y"))
    for dep, mi, name in needed:
        coeff = table.get((dep, mi))
        if coeff is None:
            raise ExprError(
                f"prolongation table lacks coefficient for {name}"
            )
        out = out + coeff * e.diff(name)
    return out
