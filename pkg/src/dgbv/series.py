"""Truncated super power series with algebra or scalar coefficients.

A term is ``c t^m``: the coefficient ``c`` sits to the LEFT of the
parameter monomial ``t^m``, whose variables are in ascending order.  With
this normal form an operator acts coefficientwise with no sign, while
moving ``t^m`` past a coefficient of parity q costs (-1)^{q p(m)}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .algebra import GradedAlgebra, LinearOperator, StructureError, format_rational, format_vector, monomial_product
from .linalg import Vector, as_rational, vadd_into, vscale

DEFAULT_ORDER = 6


@dataclass(frozen=True)
class ParamSpec:
    names: tuple
    parities: tuple
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if len(self.names) != len(self.parities):
            raise StructureError("parameter names and parities differ in length")
        if len(set(self.names)) != len(self.names):
            raise StructureError("duplicate parameter names")
        if self.order < 0:
            raise StructureError("truncation order must be nonnegative")

    @classmethod
    def even(cls, name="t", order=DEFAULT_ORDER):
        return cls((name,), (0,), order)

    @classmethod
    def epsilon(cls, name="eps"):
        return cls((name,), (1,), 1)

    def with_order(self, order: int) -> "ParamSpec":
        return ParamSpec(self.names, self.parities, order)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def odd(self) -> tuple:
        return tuple(bool(p & 1) for p in self.parities)

    def zero_monomial(self) -> tuple:
        return (0,) * self.n

    def var(self, a: int) -> tuple:
        m = [0] * self.n
        m[a] = 1
        return tuple(m)

    def parity(self, m: tuple) -> int:
        return sum(e for e, p in zip(m, self.parities) if p) & 1

    def monomials(self, degree: int) -> list:
        """All normal monomials of the given total degree, canonical order."""
        out = [m for m in _compositions(degree, self.n)
               if all(e <= 1 for e, o in zip(m, self.odd) if o)]
        return out

    def all_monomials(self, max_degree: Optional[int] = None) -> list:
        top = self.order if max_degree is None else max_degree
        out = []
        for d in range(top + 1):
            out.extend(self.monomials(d))
        return out

    def format_monomial(self, m: tuple) -> str:
        parts = []
        for e, nm in zip(m, self.names):
            if e == 1:
                parts.append(nm)
            elif e > 1:
                parts.append(f"{nm}^{e}")
        return "*".join(parts) if parts else "1"


def _compositions(total: int, n: int):
    if n == 0:
        if total == 0:
            yield ()
        return
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _mono_mul(m1: tuple, m2: tuple, odd: tuple):
    return monomial_product(m1, m2, odd)


def monomial_key(m: tuple):
    return (sum(m), tuple(-e for e in m))


class SuperSeries:
    """Immutable-by-convention truncated series.

    ``algebra`` is None for scalar series (coefficients are rationals);
    otherwise coefficients are sparse algebra vectors.
    """

    __slots__ = ("spec", "algebra", "terms")

    def __init__(self, spec: ParamSpec, algebra: Optional[GradedAlgebra] = None,
                 terms: Optional[dict] = None, _trusted: bool = False):
        self.spec = spec
        self.algebra = algebra
        if _trusted:
            self.terms = terms if terms is not None else {}
            return
        clean = {}
        for m, c in (terms or {}).items():
            m = tuple(m)
            if len(m) != spec.n:
                raise StructureError("monomial length does not match parameters")
            if sum(m) > spec.order:
                continue
            if any(e > 1 for e, o in zip(m, spec.odd) if o):
                continue
            if algebra is None:
                c = as_rational(c)
                if c:
                    clean[m] = c
            else:
                c = {k: as_rational(x) for k, x in c.items() if x}
                if c:
                    clean[m] = c
        self.terms = clean

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, spec, algebra=None):
        return cls(spec, algebra, {}, True)

    @classmethod
    def constant(cls, spec, algebra, value):
        if algebra is None:
            return cls(spec, None, {spec.zero_monomial(): value})
        return cls(spec, algebra, {spec.zero_monomial(): value})

    @classmethod
    def monomial(cls, spec, algebra, m, coeff):
        return cls(spec, algebra, {tuple(m): coeff})

    @property
    def is_scalar(self) -> bool:
        return self.algebra is None

    # -- basic arithmetic --------------------------------------------------

    def _like(self, terms) -> "SuperSeries":
        return SuperSeries(self.spec, self.algebra, terms, True)

    def _check(self, other: "SuperSeries"):
        if self.spec != other.spec:
            raise StructureError("series have different parameter specifications")
        if self.algebra is not other.algebra:
            raise StructureError("series have different coefficient rings")

    def __add__(self, other: "SuperSeries") -> "SuperSeries":
        self._check(other)
        return self._like(_add_terms(self.terms, other.terms, 1, self.is_scalar))

    def __sub__(self, other: "SuperSeries") -> "SuperSeries":
        self._check(other)
        return self._like(_add_terms(self.terms, other.terms, -1, self.is_scalar))

    def __neg__(self) -> "SuperSeries":
        return self.scale(-1)

    def scale(self, c) -> "SuperSeries":
        c = as_rational(c)
        if not c:
            return self._like({})
        if self.is_scalar:
            return self._like({m: c * x for m, x in self.terms.items()})
        return self._like({m: vscale(v, c) for m, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, SuperSeries):
            return NotImplemented
        return (self.spec == other.spec and self.algebra is other.algebra
                and self.terms == other.terms)

    def __hash__(self):
        return id(self)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    # -- structure --------------------------------------------------------

    def truncate(self, order: int) -> "SuperSeries":
        return self._like({m: c for m, c in self.terms.items() if sum(m) <= order})

    def order_part(self, n: int) -> "SuperSeries":
        return self._like({m: c for m, c in self.terms.items() if sum(m) == n})

    def coefficient(self, m):
        m = tuple(m)
        c = self.terms.get(m)
        if c is None:
            return 0 if self.is_scalar else {}
        return c if self.is_scalar else dict(c)

    def min_order(self) -> Optional[int]:
        return min((sum(m) for m in self.terms), default=None)

    def max_order(self) -> Optional[int]:
        return max((sum(m) for m in self.terms), default=None)

    def term_parities(self) -> set:
        ps = set()
        for m, c in self.terms.items():
            pm = self.spec.parity(m)
            if self.is_scalar:
                ps.add(pm)
            else:
                for k in c:
                    ps.add((self.algebra.parities[k] + pm) & 1)
        return ps

    def parity(self) -> Optional[int]:
        """Total parity if homogeneous (zero counts as even), else None."""
        ps = self.term_parities()
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def map_coefficients(self, f) -> "SuperSeries":
        """Apply a linear map coefficientwise (no sign; coefficients are left)."""
        out = {}
        for m, c in self.terms.items():
            v = f(c)
            if v:
                out[m] = v
        return self._like(out)

    def with_spec(self, spec: ParamSpec) -> "SuperSeries":
        if spec.names != self.spec.names or spec.parities != self.spec.parities:
            raise StructureError("cannot change parameters, only the order")
        return SuperSeries(spec, self.algebra, self.terms)

    def format(self) -> str:
        return format_series(self)

    def __repr__(self):
        return f"SuperSeries({format_series(self)})"


def _add_terms(a: dict, b: dict, scale, scalar: bool) -> dict:
    out = dict(a)
    for m, c in b.items():
        if scalar:
            s = out.get(m, 0) + scale * c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        else:
            v = dict(out.get(m, {}))
            vadd_into(v, c, scale)
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def series_sum(items: Iterable[SuperSeries], spec: ParamSpec, algebra=None) -> SuperSeries:
    acc: dict = {}
    scalar = algebra is None
    for s in items:
        acc = _add_terms(acc, s.terms, 1, scalar)
    return SuperSeries(spec, algebra, acc, True)


def _split_parity(alg: GradedAlgebra, v: Vector):
    even, odd = {}, {}
    par = alg.parities
    for k, c in v.items():
        (odd if par[k] else even)[k] = c
    return even, odd


def series_multiply(f: SuperSeries, g: SuperSeries, degree: Optional[int] = None) -> SuperSeries:
    """Koszul product; ``degree`` keeps only that total degree."""
    if f.spec != g.spec:
        raise StructureError("series have different parameter specifications")
    spec = f.spec
    odd = spec.odd
    N = spec.order
    alg = f.algebra if f.algebra is not None else g.algebra
    if f.algebra is not None and g.algebra is not None and f.algebra is not g.algebra:
        raise StructureError("series have different coefficient algebras")
    out: dict = {}
    if alg is None:
        for m1, c1 in f.terms.items():
            d1 = sum(m1)
            for m2, c2 in g.terms.items():
                d = d1 + sum(m2)
                if d > N or (degree is not None and d != degree):
                    continue
                r = _mono_mul(m1, m2, odd)
                if r is None:
                    continue
                s, m = r
                v = out.get(m, 0) + s * c1 * c2
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return SuperSeries(spec, None, out, True)

    g_split = {}
    for m2, c2 in g.terms.items():
        g_split[m2] = _split_parity(alg, c2) if g.algebra is not None else None
    for m1, c1 in f.terms.items():
        d1 = sum(m1)
        p1 = spec.parity(m1)
        for m2, c2 in g.terms.items():
            d = d1 + sum(m2)
            if d > N or (degree is not None and d != degree):
                continue
            r = _mono_mul(m1, m2, odd)
            if r is None:
                continue
            s, m = r
            if f.algebra is not None and g.algebra is not None:
                ev, od = g_split[m2]
                prod = alg.multiply(c1, ev) if ev else {}
                if od:
                    vadd_into(prod, alg.multiply(c1, od), -1 if p1 else 1)
            elif f.algebra is not None:
                prod = vscale(c1, c2)
            else:
                ev, od = _split_parity(alg, c2)
                prod = vscale(ev, c1)
                if od:
                    vadd_into(prod, od, -c1 if p1 else c1)
            if not prod:
                continue
            acc = out.setdefault(m, {})
            vadd_into(acc, prod, s)
            if not acc:
                del out[m]
    return SuperSeries(spec, alg, out, True)


def apply_operator(op, f: SuperSeries) -> SuperSeries:
    """Extend a linear operator coefficientwise.

    Because coefficients sit to the left of the parameters the operator
    never crosses a parameter, so no sign appears in this normal form.
    The Koszul rule shows up when a parameter is moved to the left:
    op(t^a f) = (-1)^{|op| p(a)} t^a op(f).
    """
    if f.is_scalar:
        raise StructureError("operators act on algebra-valued series")
    fn = op if callable(op) else op.apply
    return f.map_coefficients(fn)


def bracket_series(D, f: SuperSeries, g: SuperSeries, degree: Optional[int] = None) -> SuperSeries:
    """Derived bracket extended with [a t^m . b t^n] = (-1)^{p(m)(1+|b|)} [a.b] t^m t^n."""
    if f.spec != g.spec:
        raise StructureError("series have different parameter specifications")
    spec = f.spec
    odd = spec.odd
    N = spec.order
    alg = D.algebra
    Br = D.bracket_table
    out: dict = {}
    g_split = {m2: _split_parity(alg, c2) for m2, c2 in g.terms.items()}
    for m1, c1 in f.terms.items():
        d1 = sum(m1)
        p1 = spec.parity(m1)
        for m2, c2 in g.terms.items():
            d = d1 + sum(m2)
            if d > N or (degree is not None and d != degree):
                continue
            r = _mono_mul(m1, m2, odd)
            if r is None:
                continue
            s, m = r
            ev, od = g_split[m2]
            # sign (-1)^{p1} for even b, +1 for odd b
            val: Vector = {}
            for part, sg in ((ev, -1 if p1 else 1), (od, 1)):
                if not part:
                    continue
                for i, x in c1.items():
                    row = Br[i]
                    for j, y in part.items():
                        br = row[j]
                        if br:
                            vadd_into(val, br, sg * x * y)
            if not val:
                continue
            acc = out.setdefault(m, {})
            vadd_into(acc, val, s)
            if not acc:
                del out[m]
    return SuperSeries(spec, alg, out, True)


def bracket_series_direct(D, f: SuperSeries, g: SuperSeries) -> SuperSeries:
    """Bracket from the defining formula with total parities (oracle)."""
    out = SuperSeries.zero(f.spec, D.algebra)
    Dop = D.Delta
    for m1, c1 in f.terms.items():
        for part in _split_parity(D.algebra, c1):
            if not part:
                continue
            F = SuperSeries(f.spec, D.algebra, {m1: part}, True)
            pf = F.parity()
            s = -1 if pf else 1
            t = apply_operator(Dop, series_multiply(F, g))
            t = t - series_multiply(apply_operator(Dop, F), g)
            t = t - series_multiply(F, apply_operator(Dop, g)).scale(s)
            out = out + t.scale(s)
    return out


def left_partial(f: SuperSeries, a: int) -> SuperSeries:
    """Left derivative in parameter a: bring t^a to the front, then remove it."""
    if not f.is_scalar:
        raise StructureError("left_partial is defined on scalar series")
    spec = f.spec
    odd = spec.odd
    out: dict = {}
    for m, c in f.terms.items():
        e = m[a]
        if not e:
            continue
        s = 1
        if odd[a]:
            s = -1 if sum(m[i] for i in range(a) if odd[i]) & 1 else 1
        mm = list(m)
        mm[a] -= 1
        mm = tuple(mm)
        out[mm] = out.get(mm, 0) + s * e * c
        if not out[mm]:
            del out[mm]
    return SuperSeries(spec, None, out, True)


def truncate(f: SuperSeries, order: int) -> SuperSeries:
    return f.truncate(order)


def coefficient(f: SuperSeries, m):
    return f.coefficient(m)


def integrate(f: SuperSeries, integral: Vector) -> SuperSeries:
    """Apply a linear functional coefficientwise, giving a scalar series."""
    out = {}
    for m, c in f.terms.items():
        v = sum((x * integral[k] for k, x in c.items() if k in integral), 0)
        if v:
            out[m] = as_rational(v)
    return SuperSeries(f.spec, None, out, True)


def scalar_times(f: SuperSeries, c) -> SuperSeries:
    return f.scale(c)


def format_series(f: SuperSeries) -> str:
    if not f.terms:
        return "0"
    out = ""
    for m in sorted(f.terms, key=monomial_key):
        c = f.terms[m]
        mono = f.spec.format_monomial(m)
        neg = False
        if f.is_scalar:
            neg = c < 0
            mag = -c if neg else c
            if mono == "1":
                term = format_rational(mag)
            else:
                term = mono if mag == 1 else f"{format_rational(mag)}*{mono}"
        else:
            coeff = "(" + format_vector(c, f.algebra.basis.labels) + ")"
            term = coeff if mono == "1" else f"{coeff}*{mono}"
        if not out:
            out = ("-" if neg else "") + term
        else:
            out += (" - " if neg else " + ") + term
    return out
