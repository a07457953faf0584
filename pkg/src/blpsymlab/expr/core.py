"""Exact expression kernel: atoms, Puiseux monomials, polynomials and
factored rational functions.

Everything is kept in a rational normal form at all times: an expression is a
fraction  num / prod(f_i^m_i)  where `num` is a polynomial over an atom basis
with Fraction coefficients and each denominator factor f_i is a monic,
content-free polynomial with at least two terms (single-term denominators are
folded into the numerator as negative monomial exponents).  Atoms are symbols,
elementary-function applications, exp-group atoms, opaque function atoms with
a formal derivative order, formal antiderivatives and fractional powers of
composite polynomials.

Monomial exponents are Fractions, so t^(1/2), x^-3 and exp(w)^(1/2) live in
ordinary monomials; exp is canonicalized as a group homomorphism
(exp(2w) -> E(w)^2, exp(w+v) -> E(w)*E(v), exp(c*ln w) -> w^c), which makes
cancellations like exp(w)*exp(-w) = 1 purely polynomial.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional

F0 = Fraction(0)
F1 = Fraction(1)

ELEM_HEADS = ("ln", "sin", "cos", "sinh", "cosh", "tanh")


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}")


class ExprError(Exception):
    """Base class for kernel errors."""


class DomainError(ExprError):
    """Numeric evaluation left the real domain (ln of non-positive, etc.)."""


class SubstitutionCycleError(ExprError):
    """Substitution bindings form a cycle."""


# ---------------------------------------------------------------------------
# Atoms
# ---------------------------------------------------------------------------

_KIND_SYM = 0
_KIND_NUMPOW = 1
_KIND_EXP = 2
_KIND_ELEM = 3
_KIND_FUN = 4
_KIND_ANTI = 5
_KIND_SURD = 6


def _flat(obj) -> str:
    """Deterministic string rendering of a nested structural key."""
    if isinstance(obj, tuple):
        return "(" + ",".join(_flat(x) for x in obj) + ")"
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, Atom):
        return _flat(obj.sort_key())
    return str(obj)


class Atom:
    """A generator of the polynomial ring.  Immutable and totally ordered."""

    __slots__ = ("_key", "_hash")

    kind = -1

    def sort_key(self):
        return self._key

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Atom) and self._key == other._key
        )

    def __lt__(self, other):
        return self._key < other._key

    def derivative(self, sym: "SymAtom") -> "RatFun":
        """d(atom)/d(sym); the monomial power rule is applied by the caller."""
        raise NotImplementedError

    def free_syms(self) -> frozenset:
        raise NotImplementedError


class SymAtom(Atom):
    __slots__ = ("name",)
    kind = _KIND_SYM

    def __init__(self, name: str):
        self.name = name
        self._key = (_KIND_SYM, name)
        self._hash = hash(self._key)

    def derivative(self, sym):
        return rf_const(F1) if sym is self or sym == self else rf_const(F0)

    def free_syms(self):
        return frozenset((self,))

    def __repr__(self):
        return f"Sym({self.name})"


_sym_cache: dict = {}


def sym_atom(name: str) -> SymAtom:
    a = _sym_cache.get(name)
    if a is None:
        a = SymAtom(name)
        _sym_cache[name] = a
    return a


class NumPowAtom(Atom):
    """A positive rational constant used with a fractional exponent."""

    __slots__ = ("base",)
    kind = _KIND_NUMPOW

    def __init__(self, base: Fraction):
        self.base = base
        self._key = (_KIND_NUMPOW, _flat((base.numerator, base.denominator)))
        self._hash = hash(self._key)

    def derivative(self, sym):
        return rf_const(F0)

    def free_syms(self):
        return frozenset()

    def __repr__(self):
        return f"NumPow({self.base})"


class ExpAtom(Atom):
    """exp(arg) for a content-free argument (see make_exp)."""

    __slots__ = ("arg",)
    kind = _KIND_EXP

    def __init__(self, arg: "RatFun"):
        self.arg = arg
        self._key = (_KIND_EXP, _flat(arg.key()))
        self._hash = hash(self._key)

    def derivative(self, sym):
        return rf_atom(self) * self.arg.diff(sym)

    def free_syms(self):
        return self.arg.free_syms()

    def __repr__(self):
        return f"Exp({self.arg})"


class ElemAtom(Atom):
    """ln / sin / cos / sinh / cosh / tanh applied to a canonical argument."""

    __slots__ = ("head", "arg")
    kind = _KIND_ELEM

    def __init__(self, head: str, arg: "RatFun"):
        self.head = head
        self.arg = arg
        self._key = (_KIND_ELEM, head + ":" + _flat(arg.key()))
        self._hash = hash(self._key)

    def derivative(self, sym):
        da = self.arg.diff(sym)
        if da.is_zero_poly():
            return rf_const(F0)
        h = self.head
        if h == "ln":
            return da / self.arg
        if h == "sin":
            return rf_atom(ElemAtom("cos", self.arg)) * da
        if h == "cos":
            return -(rf_atom(ElemAtom("sin", self.arg)) * da)
        if h == "sinh":
            return rf_atom(ElemAtom("cosh", self.arg)) * da
        if h == "cosh":
            return rf_atom(ElemAtom("sinh", self.arg)) * da
        if h == "tanh":
            t = rf_atom(self)
            return (rf_const(F1) - t * t) * da
        raise ExprError(f"unknown elementary head {h}")

    def free_syms(self):
        return self.arg.free_syms()

    def __repr__(self):
        return f"{self.head}({self.arg})"


class FunAtom(Atom):
    """Opaque function atom with a formal derivative multi-index."""

    __slots__ = ("head", "args", "dorder")
    kind = _KIND_FUN

    def __init__(self, head: str, args: tuple, dorder: tuple):
        if len(args) != len(dorder):
            raise ExprError("deriv_order length must match argument count")
        if any(k < 0 for k in dorder):
            raise ExprError("deriv_order components must be non-negative")
        self.head = head
        self.args = args
        self.dorder = dorder
        self._key = (_KIND_FUN, _flat((head, dorder, tuple(a.key() for a in args))))
        self._hash = hash(self._key)

    def derivative(self, sym):
        total = rf_const(F0)
        for i, a in enumerate(self.args):
            da = a.diff(sym)
            if da.is_zero_poly():
                continue
            bumped = tuple(
                k + 1 if j == i else k for j, k in enumerate(self.dorder)
            )
            total = total + rf_atom(FunAtom(self.head, self.args, bumped)) * da
        return total

    def free_syms(self):
        out = frozenset()
        for a in self.args:
            out |= a.free_syms()
        return out

    def __repr__(self):
        return f"Fun({self.head},{self.dorder})"


class AntiAtom(Atom):
    """Formal antiderivative Int(g, var): d/dvar Int(g, var) = g."""

    __slots__ = ("integrand", "var")
    kind = _KIND_ANTI

    def __init__(self, integrand: "RatFun", var: SymAtom):
        self.integrand = integrand
        self.var = var
        self._key = (_KIND_ANTI, _flat((var.name, integrand.key())))
        self._hash = hash(self._key)

    def derivative(self, sym):
        if sym == self.var:
            return self.integrand
        if sym in self.integrand.free_syms():
            raise ExprError(
                "differentiation under a formal antiderivative with respect "
                f"to a parameter ({sym.name}) is not supported"
            )
        return rf_const(F0)

    def free_syms(self):
        return self.integrand.free_syms() | frozenset((self.var,))

    def __repr__(self):
        return f"Int({self.integrand},{self.var.name})"


class SurdAtom(Atom):
    """A multi-term polynomial base carried at fractional exponents.

    Exponents are kept in (-1, 1); integer spill-over is expanded back into
    ordinary polynomial factors by the multiplication routines.
    """

    __slots__ = ("base",)
    kind = _KIND_SURD

    def __init__(self, base: "Poly"):
        self.base = base
        self._key = (_KIND_SURD, _flat(base.key()))
        self._hash = hash(self._key)

    def derivative(self, sym):
        return self.base.as_ratfun().diff(sym)

    def free_syms(self):
        return self.base.free_syms()

    def __repr__(self):
        return f"Surd({self.base})"


# ---------------------------------------------------------------------------
# Monomials: sorted tuples of (atom, exponent)
# ---------------------------------------------------------------------------

MONO_ONE: tuple = ()


def mono_make(pairs: Iterable) -> tuple:
    items = [(a, e) for a, e in pairs if e != 0]
    items.sort(key=lambda p: p[0].sort_key())
    return tuple(items)


def mono_mul(m1: tuple, m2: tuple):
    """Multiply monomials.  Returns (mono, coeff, num_spill, den_spill).

    Spill lists hold (Poly, positive int) pairs produced when a SurdAtom or
    NumPowAtom exponent crosses an integer.
    """
    if not m1:
        m = m2
    elif not m2:
        m = m1
    else:
        d: dict = {}
        for a, e in m1:
            d[a] = e
        for a, e in m2:
            e0 = d.get(a)
            if e0 is None:
                d[a] = e
            else:
                e0 += e
                if e0 == 0:
                    del d[a]
                else:
                    d[a] = e0
        m = mono_make(d.items())
    coeff = F1
    num_spill = None
    den_spill = None
    fixed = None
    for a, e in m:
        if a.kind == _KIND_SURD and (e >= 1 or e <= -1):
            n = int(e)  # truncates toward zero
            r = e - n
            if fixed is None:
                fixed = dict(m)
            if r == 0:
                del fixed[a]
            else:
                fixed[a] = r
            if n > 0:
                num_spill = (num_spill or []) + [(a.base, n)]
            else:
                den_spill = (den_spill or []) + [(a.base, -n)]
        elif a.kind == _KIND_NUMPOW:
            c, rest = numpow_reduce(a.base, e)
            if c != F1 or rest is None or rest[1] != e:
                if fixed is None:
                    fixed = dict(m)
                coeff *= c
                if rest is None:
                    del fixed[a]
                else:
                    fixed[rest[0]] = rest[1]
    if fixed is not None:
        m = mono_make(fixed.items())
    return m, coeff, num_spill, den_spill


def _iroot(n: int, k: int) -> Optional[int]:
    if n < 0:
        return None
    r = round(n ** (1.0 / k)) if n > 1 else n
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def numpow_reduce(base: Fraction, e: Fraction):
    """Reduce base^e to coeff * optional (NumPowAtom, residual exponent)."""
    if base <= 0:
        raise DomainError(f"negative or zero base {base} under fractional power")
    if base == 1:
        return F1, None
    n = e.numerator // e.denominator  # floor
    r = e - n
    coeff = base**n
    if r == 0:
        return coeff, None
    root = None
    p, q = base.numerator, base.denominator
    rp = _iroot(p, r.denominator)
    rq = _iroot(q, r.denominator)
    if rp is not None and rq is not None:
        root = Fraction(rp, rq)
    if root is not None:
        return coeff * root**r.numerator, None
    return coeff, (NumPowAtom(base), r)


def mono_cmp(m1: tuple, m2: tuple) -> int:
    """Graded lexicographic order (largest atom most significant).

    A proper multiplicative monomial order over rational exponent vectors;
    required for exact multivariate division to terminate correctly.
    """
    if m1 == m2:
        return 0
    d1 = sum((e for _, e in m1), F0)
    d2 = sum((e for _, e in m2), F0)
    if d1 != d2:
        return 1 if d1 > d2 else -1
    i, j = len(m1) - 1, len(m2) - 1
    while i >= 0 or j >= 0:
        if i >= 0 and j >= 0:
            a1, e1 = m1[i]
            a2, e2 = m2[j]
            k1, k2 = a1.sort_key(), a2.sort_key()
            if k1 == k2:
                if e1 != e2:
                    return 1 if e1 > e2 else -1
                i -= 1
                j -= 1
            elif k1 > k2:
                return 1 if e1 > 0 else -1
            else:
                return -1 if e2 > 0 else 1
        elif i >= 0:
            return 1 if m1[i][1] > 0 else -1
        else:
            return -1 if m2[j][1] > 0 else 1
    return 0


import functools as _functools

_MONO_SORT_KEY = _functools.cmp_to_key(mono_cmp)


def mono_key(m: tuple):
    """Sortable key object realizing mono_cmp."""
    return _MONO_SORT_KEY(m)


def mono_free_syms(m: tuple):
    out = frozenset()
    for a, _ in m:
        out |= a.free_syms()
    return out


def mono_has_surd(m: tuple) -> bool:
    return any(a.kind == _KIND_SURD or a.kind == _KIND_NUMPOW for a, _ in m)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class Poly:
    """Polynomial over atoms: dict monomial -> Fraction coefficient."""

    __slots__ = ("terms", "_key", "_free")

    def __init__(self, terms: dict):
        self.terms = terms
        self._key = None
        self._free = None

    def key(self):
        if self._key is None:
            self._key = tuple(
                sorted(
                    ((mono_key(m), m, c) for m, c in self.terms.items()),
                    key=lambda t: t[0],
                    reverse=True,
                )
            )
            self._key = tuple((k[1], k[2]) for k in self._key)
        return self._key

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(self.key())

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> Optional[Fraction]:
        if not self.terms:
            return F0
        if len(self.terms) == 1 and MONO_ONE in self.terms:
            return self.terms[MONO_ONE]
        return None

    def sorted_terms(self):
        return sorted(
            self.terms.items(), key=lambda t: mono_key(t[0]), reverse=True
        )

    def leading(self):
        m = max(self.terms, key=mono_key)
        return m, self.terms[m]

    def free_syms(self):
        if self._free is None:
            out = frozenset()
            for m in self.terms:
                out |= mono_free_syms(m)
            self._free = out
        return self._free

    def atoms(self):
        out = set()
        for m in self.terms:
            for a, _ in m:
                out.add(a)
        return out

    def __add__(self, other):
        t = dict(self.terms)
        for m, c in other.terms.items():
            c0 = t.get(m)
            if c0 is None:
                t[m] = c
            else:
                c0 += c
                if c0 == 0:
                    del t[m]
                else:
                    t[m] = c0
        return Poly(t)

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: Fraction):
        if c == 0:
            return POLY_ZERO
        if c == 1:
            return self
        return Poly({m: v * c for m, v in self.terms.items()})

    def mul_plain(self, other: "Poly") -> "Poly":
        """Fast product; only valid when no spill can occur (checked)."""
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m, k, ns, ds = mono_mul(m1, m2)
                if ns or ds:
                    raise ExprError("unexpected radical spill in mul_plain")
                c = c1 * c2 * k
                c0 = t.get(m)
                if c0 is None:
                    t[m] = c
                else:
                    c0 += c
                    if c0 == 0:
                        del t[m]
                    else:
                        t[m] = c0
        return Poly(t)

    def has_radicals(self) -> bool:
        for m in self.terms:
            for a, _ in m:
                if a.kind == _KIND_SURD or a.kind == _KIND_NUMPOW:
                    return True
        return False

    def as_ratfun(self) -> "RatFun":
        return RatFun(self, ())

    def content_split(self):
        """Write self = coeff * mono * primitive with monic primitive.

        Returns (coeff, mono, primitive Poly).  Primitive has leading
        coefficient 1 and no monomial common factor.
        """
        if not self.terms:
            return F0, MONO_ONE, POLY_ZERO
        common: Optional[dict] = None
        for m in self.terms:
            d = dict(m)
            if common is None:
                common = d
                continue
            for a in list(common):
                e = min(common[a], d.get(a, F0))
                if e == 0:
                    del common[a]
                else:
                    common[a] = e
            for a, e in d.items():
                if a not in common and e < 0:
                    common[a] = e
        gmono = mono_make((common or {}).items())
        inv = mono_make(((a, -e) for a, e in gmono))
        stripped = {}
        for m, c in self.terms.items():
            mm, k, ns, ds = mono_mul(m, inv)
            if ns or ds or k != F1:
                # Surd bookkeeping would be disturbed; refuse extraction.
                return self._content_coeff_only()
            stripped[mm] = c
        p = Poly(stripped)
        lm, lc = p.leading()
        if lc != 1:
            p = p.scale(F1 / lc)
        return lc, gmono, p

    def _content_coeff_only(self):
        lm, lc = self.leading()
        p = self.scale(F1 / lc) if lc != 1 else self
        return lc, MONO_ONE, p

    def exact_div(self, divisor: "Poly") -> Optional["Poly"]:
        """Exact multivariate division; None if not divisible.

        Both sides are first cleared of monomial content (handling Laurent
        exponents), then ordinary division with a leading-term divisibility
        fail-fast is performed; for exact quotients lt(q)*lt(d) = lt(r), so
        the fail-fast is sound.
        """
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return POLY_ZERO
        c1, m1, p1 = self.content_split()
        c2, m2, p2 = divisor.content_split()
        dm, dc = p2.leading()
        dinv = mono_make(((a, -e) for a, e in dm))
        rem = p1
        qt: dict = {}
        limit = 8 * (len(self.terms) + len(divisor.terms) + 10)
        steps = 0
        while not rem.is_zero():
            steps += 1
            if steps > limit:
                return None
            rm, rc = rem.leading()
            qm, k, ns, ds = mono_mul(rm, dinv)
            if ns or ds or any(e < 0 for _, e in qm):
                return None
            qc = rc / dc * k
            qt[qm] = qt.get(qm, F0) + qc
            try:
                prod = p2.mul_plain(Poly({qm: qc}))
            except ExprError:
                return None
            rem = rem - prod
        q = Poly({m: c for m, c in qt.items() if c != 0})
        inv2 = mono_make(((a, -e) for a, e in m2))
        try:
            q = q.mul_plain(Poly({m1: c1 / c2}))
            q = q.mul_plain(Poly({inv2: F1}))
        except ExprError:
            return None
        return q

    def diff(self, s: SymAtom) -> "RatFun":
        total = rf_const(F0)
        for m, c in self.terms.items():
            for i, (a, e) in enumerate(m):
                da = a.derivative(s)
                if da.is_zero_poly():
                    continue
                rest = mono_make(
                    [(b, f) for j, (b, f) in enumerate(m) if j != i]
                    + [(a, e - 1)]
                )
                piece = poly_mul_rf(Poly({rest: c * e}), POLY_ONE)
                total = total + piece * da
        return total

    def __repr__(self):
        return f"Poly({len(self.terms)} terms)"


POLY_ZERO = Poly({})
POLY_ONE = Poly({MONO_ONE: F1})


def poly_const(c: Fraction) -> Poly:
    return POLY_ZERO if c == 0 else Poly({MONO_ONE: c})


def poly_atom(a: Atom, e: Fraction = F1) -> Poly:
    return Poly({mono_make([(a, e)]): F1})


# ---------------------------------------------------------------------------
# Rational functions with factored denominators
# ---------------------------------------------------------------------------


def _den_insert(dens: dict, poly: Poly, mult: int):
    """Normalize a factor and merge it into dens; returns numerator fix-up
    (coeff, mono) that must multiply the numerator (inverse of extraction)."""
    coeff, gmono, prim = poly.content_split()
    fix_coeff = F1 / coeff**mult
    fix_mono = mono_make(((a, -e * mult) for a, e in gmono))
    c = prim.is_const()
    if c is not None:
        if c == 0:
            raise ZeroDivisionError("division by zero polynomial")
        fix_coeff /= c**mult
        return fix_coeff, fix_mono
    k = prim.key()
    ent = dens.get(k)
    if ent is None:
        dens[k] = (prim, mult)
    else:
        dens[k] = (ent[0], ent[1] + mult)
    return fix_coeff, fix_mono


class RatFun:
    """num / prod(factor^mult) with monic multi-term factors."""

    __slots__ = ("num", "den", "_key", "_free")

    def __init__(self, num: Poly, den: tuple):
        self.num = num
        self.den = den if not num.is_zero() else ()
        self._key = None
        self._free = None

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def build(num: Poly, den_factors: Iterable) -> "RatFun":
        dens: dict = {}
        coeff = F1
        mono = MONO_ONE
        for p, m in den_factors:
            if m == 0:
                continue
            fc, fm = _den_insert(dens, p, m)
            coeff *= fc
            mono, k2, ns, ds = mono_mul(mono, fm)
            coeff *= k2
            if ns or ds:
                raise ExprError("unexpected surd spill in denominator fix-up")
        if coeff != F1 or mono != MONO_ONE:
            fixed = poly_mul_rf(num, Poly({mono: coeff}))
            num = fixed.num
            for p, m in fixed.den:
                fc, fm = _den_insert(dens, p, m)
                if fc != F1 or fm != MONO_ONE:
                    raise ExprError("non-normalized spill factor")
        out = RatFun(num, tuple(sorted(dens.values(), key=lambda t: t[0].key())))
        return out._cancel()

    def _cancel(self) -> "RatFun":
        if not self.den or self.num.is_zero():
            return self
        num = self.num
        dens = []
        changed = False
        for p, m in self.den:
            while m > 0:
                q = num.exact_div(p)
                if q is None:
                    break
                num = q
                m -= 1
                changed = True
            if m:
                dens.append((p, m))
        if not changed:
            return self
        return RatFun(num, tuple(dens))

    def key(self):
        if self._key is None:
            self._key = (
                self.num.key(),
                tuple((p.key(), m) for p, m in self.den),
            )
        return self._key

    def __eq__(self, other):
        if not isinstance(other, RatFun):
            return NotImplemented
        if self.key() == other.key():
            return True
        return (self - other).num.is_zero()

    def __hash__(self):
        raise TypeError("RatFun is not hashable; use .key()")

    def free_syms(self):
        if self._free is None:
            out = self.num.free_syms()
            for p, _ in self.den:
                out |= p.free_syms()
            self._free = out
        return self._free

    def atoms(self):
        out = self.num.atoms()
        for p, _ in self.den:
            out |= p.atoms()
        return out

    def is_zero_poly(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> Optional[Fraction]:
        if self.den:
            return None
        return self.num.is_const()

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other: "RatFun") -> "RatFun":
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        if self.den == other.den:
            return RatFun(self.num + other.num, self.den)._cancel()
        d1 = {p.key(): (p, m) for p, m in self.den}
        d2 = {p.key(): (p, m) for p, m in other.den}
        lcm: dict = dict(d1)
        for k, (p, m) in d2.items():
            if k in lcm:
                lcm[k] = (p, max(lcm[k][1], m))
            else:
                lcm[k] = (p, m)

        def side(num: Poly, own: dict) -> "RatFun":
            rf = RatFun(num, ())
            for k, (p, m) in lcm.items():
                need = m - own.get(k, (None, 0))[1]
                if need:
                    rf = rf * rf_poly_pow(p, need)
            return rf

        s1 = side(self.num, d1)
        s2 = side(other.num, d2)
        if s1.den or s2.den:
            tot = s1 + s2  # radical spill path; dens are small factor sets
        else:
            tot = RatFun(s1.num + s2.num, ())
        return tot * RatFun.build(POLY_ONE, list(lcm.values()))

    def __neg__(self):
        return RatFun(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "RatFun") -> "RatFun":
        if self.num.is_zero() or other.num.is_zero():
            return RF_ZERO
        prod = poly_mul_rf(self.num, other.num)
        dens = list(self.den) + list(other.den) + list(prod.den)
        return RatFun.build(prod.num, dens)

    def inv(self) -> "RatFun":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero expression")
        acc = RF_ONE
        for p, m in self.den:
            acc = acc * rf_poly_pow(p, m)
        return acc * RatFun.build(POLY_ONE, [(self.num, 1)])

    def __truediv__(self, other: "RatFun") -> "RatFun":
        return self * other.inv()

    def scale(self, c: Fraction) -> "RatFun":
        return RatFun(self.num.scale(c), self.den)

    def pow(self, e) -> "RatFun":
        e = as_fraction(e)
        if e == 0:
            if self.num.is_zero():
                raise ExprError("0^0 is undefined")
            return rf_const(F1)
        if e == 1:
            return self
        if e.denominator == 1:
            n = e.numerator
            base = self if n > 0 else self.inv()
            n = abs(n)
            out = RF_ONE
            while n:
                if n & 1:
                    out = out * base
                n >>= 1
                if n:
                    base = base * base
            return out
        # fractional exponent
        if self.den:
            numpart = RatFun(self.num, ()).pow(e)
            denpart = RatFun.build(POLY_ONE, list(self.den)).inv().pow(-e).inv()
            return numpart * denpart
        p = self.num
        if p.is_zero():
            return RF_ZERO
        c = p.is_const()
        if c is not None:
            if c < 0:
                raise DomainError(f"negative constant {c} under fractional power")
            coeff, rest = numpow_reduce(c, e)
            out = poly_const(coeff)
            if rest is not None:
                out = out.mul_plain(poly_atom(rest[0], rest[1]))
            return RatFun(out, ())
        if len(p.terms) == 1:
            (m, c), = p.terms.items()
            if c < 0:
                raise DomainError(
                    "negative coefficient under fractional power "
                    "(principal real branch only)"
                )
            coeff, rest = numpow_reduce(c, e) if c != 1 else (F1, None)
            pairs = [(a, ex * e) for a, ex in m]
            if rest is not None:
                pairs.append(rest)
            mono = mono_make(pairs)
            return poly_mul_rf(Poly({mono: coeff}), POLY_ONE)
        coeff, gmono, prim = p.content_split()
        if coeff < 0:
            raise DomainError(
                "negative leading coefficient under fractional power"
            )
        head = RatFun(Poly({gmono: coeff}), ()).pow(e)
        surd = poly_atom(SurdAtom(prim), e)
        return head * RatFun(surd, ())

    # -- calculus -------------------------------------------------------------

    def diff(self, s) -> "RatFun":
        if isinstance(s, str):
            s = sym_atom(s)
        if s not in self.free_syms():
            return RF_ZERO
        dnum = self.num.diff(s)
        base = RatFun.build(POLY_ONE, list(self.den))
        total = dnum * base
        for p, m in self.den:
            dp = p.diff(s)
            if dp.is_zero_poly():
                continue
            term = RatFun(self.num, ()) * dp * base
            term = term * RatFun.build(POLY_ONE, [(p, 1)])
            total = total - term.scale(Fraction(m))
        return total

    # -- substitution ----------------------------------------------------------

    def subs(self, atom_map: dict, fun_map: Optional[dict] = None) -> "RatFun":
        """Rebuild with atoms substituted.

        atom_map: Atom -> RatFun for symbol replacements.
        fun_map: head name -> (formal arg syms tuple, body RatFun) templates.
        """
        from . import build  # late import: constructors live one level up

        fun_map = fun_map or {}

        def sub_atom(a: Atom) -> RatFun:
            if a.kind == _KIND_SYM:
                r = atom_map.get(a)
                return r if r is not None else rf_atom(a)
            if a.kind == _KIND_NUMPOW:
                return rf_atom(a)
            if a.kind == _KIND_EXP:
                return build.make_exp(rec(a.arg))
            if a.kind == _KIND_ELEM:
                return build.make_elem(a.head, rec(a.arg))
            if a.kind == _KIND_FUN:
                new_args = tuple(rec(x) for x in a.args)
                tpl = fun_map.get(a.head)
                if tpl is not None:
                    formals, body = tpl
                    if len(formals) != len(a.args):
                        raise ExprError(
                            f"template arity mismatch for {a.head}"
                        )
                    val = body
                    for fs, k in zip(formals, a.dorder):
                        for _ in range(k):
                            val = val.diff(fs)
                    return val.subs(dict(zip(formals, new_args)), fun_map)
                return rf_atom(FunAtom(a.head, new_args, a.dorder))
            if a.kind == _KIND_ANTI:
                integ = rec(a.integrand)
                var_r = atom_map.get(a.var)
                var = a.var
                if var_r is not None:
                    va = var_r.single_sym_atom()
                    if va is None:
                        raise ExprError(
                            "antiderivative variable must substitute to a symbol"
                        )
                    var = va
                return build.make_anti(integ, var, fun_map)
            if a.kind == _KIND_SURD:
                return rec(a.base.as_ratfun()).pow(F1)._resurd()
            raise ExprError(f"cannot substitute into atom {a!r}")

        cache: dict = {}

        def sub_atom_cached(a: Atom) -> RatFun:
            r = cache.get(a)
            if r is None:
                r = sub_atom(a)
                cache[a] = r
            return r

        def sub_poly(p: Poly) -> RatFun:
            total = RF_ZERO
            for m, c in p.terms.items():
                term = rf_const(c)
                for a, e in m:
                    term = term * sub_atom_cached(a).pow(e)
                total = total + term
            return total

        def rec(r: RatFun) -> RatFun:
            out = sub_poly(r.num)
            for p, m in r.den:
                out = out * sub_poly(p).pow(Fraction(-m))
            return out

        return rec(self)

    def _resurd(self):
        return self

    def single_sym_atom(self) -> Optional[SymAtom]:
        if self.den or len(self.num.terms) != 1:
            return None
        (m, c), = self.num.terms.items()
        if c != 1 or len(m) != 1:
            return None
        a, e = m[0]
        if a.kind == _KIND_SYM and e == 1:
            return a
        return None

    # -- canonical p/q view -----------------------------------------------------

    def as_pq(self):
        """Cleared canonical (p, q) polynomial pair with monic q and
        non-negative exponents (for printing and the public normal form)."""
        acc = RF_ONE
        for p, m in self.den:
            acc = acc * rf_poly_pow(p, m)
        if acc.den:
            raise ExprError("denominator expansion produced a fraction")
        den = acc.num
        num = self.num
        neg: dict = {}
        for poly in (num, den):
            for m in poly.terms:
                for a, e in m:
                    if e < 0:
                        neg[a] = min(neg.get(a, F0), e)
        if neg:
            clear = Poly({mono_make(((a, -e) for a, e in neg.items())): F1})
            nrf = poly_mul_rf(num, clear)
            drf = poly_mul_rf(den, clear)
            if nrf.den or drf.den:
                raise ExprError("exponent clearing produced a fraction")
            num, den = nrf.num, drf.num
        c = den.is_const()
        if c is not None:
            if c != 1:
                num = num.scale(F1 / c)
            return num, POLY_ONE
        lm, lc = den.leading()
        if lc != 1:
            num = num.scale(F1 / lc)
            den = den.scale(F1 / lc)
        return num, den

    def __repr__(self):
        from .parser import format_ratfun

        return format_ratfun(self)


RF_ZERO = RatFun(POLY_ZERO, ())
RF_ONE = RatFun(POLY_ONE, ())


def poly_mul_rf(p: Poly, q: Poly) -> RatFun:
    """Exact product of two polynomials as a RatFun.

    Radical exponents crossing an integer spill per term: positive crossings
    expand the surd base into the piece, negative crossings put the base
    under the piece's own denominator (never globally)."""
    if not (p.has_radicals() or q.has_radicals()):
        return RatFun(p.mul_plain(q), ())
    plain: dict = {}
    buckets: dict = {}
    pending: list = []
    for m1, c1 in p.terms.items():
        for m2, c2 in q.terms.items():
            m, k, ns, ds = mono_mul(m1, m2)
            c = c1 * c2 * k
            if ns:
                pending.append((m, c, ns, ds))
                continue
            if ds:
                sig = tuple(sorted((b.key(), mm) for b, mm in ds))
                bucket = buckets.get(sig)
                if bucket is None:
                    buckets[sig] = [{m: c}, ds]
                else:
                    d = bucket[0]
                    d[m] = d.get(m, F0) + c
                continue
            c0 = plain.get(m)
            if c0 is None:
                plain[m] = c
            else:
                c0 += c
                if c0 == 0:
                    del plain[m]
                else:
                    plain[m] = c0
    out = RatFun(Poly(plain), ())
    for _, (terms, ds) in buckets.items():
        terms = {m: c for m, c in terms.items() if c != 0}
        if terms:
            out = out + RatFun.build(Poly(terms), ds)
    for m, c, ns, ds in pending:
        piece = RatFun(Poly({m: c}), ())
        for base, n in ns:
            brf = RatFun(base, ())
            for _ in range(n):
                piece = piece * brf
        if ds:
            piece = piece * RatFun.build(POLY_ONE, ds)
        out = out + piece
    return out


def rf_poly_pow(p: Poly, n: int) -> RatFun:
    """p^n (n >= 0) as a RatFun."""
    if n < 0:
        raise ExprError("rf_poly_pow expects a non-negative exponent")
    out = RF_ONE
    base = RatFun(p, ())
    while n:
        if n & 1:
            out = out * base
        n >>= 1
        if n:
            base = base * base
    return out


def rf_const(c: Fraction) -> RatFun:
    if c == 0:
        return RF_ZERO
    if c == 1:
        return RF_ONE
    return RatFun(poly_const(c), ())


def rf_atom(a: Atom) -> RatFun:
    return RatFun(poly_atom(a), ())


def rf_sym(name: str) -> RatFun:
    return rf_atom(sym_atom(name))
