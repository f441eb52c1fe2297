"""Integrals, the pairing on cohomology, the potential and WDVV."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebra import StructureError
from .linalg import Matrix, Vector, as_rational, inverse
from .mc import MCSolution, cup_product, extend_class, lifts
from .series import (ParamSpec, SuperSeries, apply_operator, integrate, left_partial,
                     monomial_key, series_multiply, series_sum)
from .structure import CohomologyBasis, ConsistencyError, DGBVStructure, cohomology_basis

SIXTH = Fraction(1, 6)
HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


def integral_vector(D: DGBVStructure, I=None) -> Vector:
    if I is None:
        I = D.integral
    if I is None:
        raise StructureError(f"{D.name or 'structure'} has no integral")
    for k in I:
        if not 0 <= k < D.dim:
            raise StructureError(f"integral index {k} out of range")
    return {k: as_rational(c) for k, c in I.items() if c}


def apply_integral(I: Vector, v: Vector):
    return sum((c * I[k] for k, c in v.items() if k in I), Fraction(0))


@dataclass
class IntegralReport:
    passed: bool
    checked: int
    witness: Optional[tuple] = None
    detail: str = ""

    def as_dict(self):
        return {"passed": self.passed, "checked": self.checked,
                "witness": list(self.witness) if self.witness else None, "detail": self.detail}


def validate_integral(D: DGBVStructure, I=None) -> IntegralReport:
    """int delta a b = (-1)^{|a|+1} int a delta b and int Delta a b = (-1)^{|a|} int a Delta b."""
    I = integral_vector(D, I)
    alg = D.algebra
    labels = alg.basis.labels
    n = D.dim
    checked = 0
    for i in range(n):
        ei = {i: 1}
        pi = alg.parities[i]
        di, Di = D.d(ei), D.D(ei)
        for j in range(n):
            ej = {j: 1}
            checked += 1
            lhs = apply_integral(I, alg.multiply(di, ej))
            rhs = apply_integral(I, alg.multiply(ei, D.d(ej)))
            if lhs != (rhs if pi else -rhs):
                return IntegralReport(False, checked, (labels[i], labels[j]), "delta adjointness")
            lhs = apply_integral(I, alg.multiply(Di, ej))
            rhs = apply_integral(I, alg.multiply(ei, D.D(ej)))
            if lhs != (-rhs if pi else rhs):
                return IntegralReport(False, checked, (labels[i], labels[j]), "Delta adjointness")
    return IntegralReport(True, checked)


@dataclass
class GramData:
    basis: CohomologyBasis
    g: list
    ginv: Optional[list]
    supersymmetric: bool

    @property
    def nice(self) -> bool:
        return self.ginv is not None

    @property
    def n(self) -> int:
        return len(self.g)

    def as_dict(self):
        fmt = lambda M: [[str(x) for x in row] for row in M] if M is not None else None
        return {"g": fmt(self.g), "ginv": fmt(self.ginv), "nice": self.nice,
                "supersymmetric": self.supersymmetric}


def gram(D: DGBVStructure, I=None, basis: Optional[CohomologyBasis] = None) -> GramData:
    I = integral_vector(D, I)
    basis = basis or cohomology_basis(D)
    reps, par = basis.representatives, basis.parities
    n = len(basis)
    g = [[apply_integral(I, D.multiply(reps[a], reps[b])) for b in range(n)] for a in range(n)]
    sym = all(g[a][b] == (-g[b][a] if par[a] and par[b] else g[b][a])
              for a in range(n) for b in range(n))
    ginv = None
    M = Matrix.from_rows(g)
    inv = inverse(M)
    if inv is not None:
        rows = inv.rows()
        ginv = [[rows[a].get(b, Fraction(0)) for b in range(n)] for a in range(n)]
    return GramData(basis, g, ginv, sym)


def pairing_well_defined(D: DGBVStructure, I=None, basis=None) -> bool:
    """int (a + delta Delta c) b = int a b for harmonic a, b and every basis c."""
    I = integral_vector(D, I)
    basis = basis or cohomology_basis(D)
    for a in basis.representatives:
        for b in basis.representatives:
            base = apply_integral(I, D.multiply(a, b))
            for k in range(D.dim):
                ddc = D.d(D.D({k: 1}))
                if not ddc:
                    continue
                if apply_integral(I, D.multiply(ddc, b)) or apply_integral(I, D.multiply(a, ddc)):
                    return False
            if base != apply_integral(I, D.multiply(a, b)):
                return False
    return True


def frobenius_compatibility(D: DGBVStructure, G: GramData) -> Optional[tuple]:
    """Return None if g(a*b, c) = g(a, b*c) on cohomology, else a witness triple."""
    basis = G.basis
    n = G.n
    cup = [[cup_product(D, basis, a, b) for b in range(n)] for a in range(n)]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                lhs = sum(cup[a][b][m] * G.g[m][c] for m in range(n))
                rhs = sum(G.g[a][m] * cup[b][c][m] for m in range(n))
                if lhs != rhs:
                    return (basis.names[a], basis.names[b], basis.names[c])
    return None


# ---------------------------------------------------------------------------
# pairing of deformed classes


@dataclass
class InvarianceReport:
    passed: bool
    constant: Fraction
    pairing: SuperSeries
    cross_terms_vanish: bool

    def as_dict(self):
        return {"passed": self.passed, "constant": str(self.constant),
                "pairing": self.pairing.format(), "cross_terms_vanish": self.cross_terms_vanish}


def invariance_on_deformed_classes(D: DGBVStructure, sol: MCSolution, I, y1: Vector, y2: Vector,
                                   z1: Optional[SuperSeries] = None,
                                   z2: Optional[SuperSeries] = None) -> InvarianceReport:
    """int (y1 + Delta z1)(y2 + Delta z2) = int y1 y2 through the chain of cross terms."""
    I = integral_vector(D, I)
    spec, alg = sol.spec, D.algebra
    if z1 is None:
        _, z1 = extend_class(D, sol, y1, return_z=True)
    if z2 is None:
        _, z2 = extend_class(D, sol, y2, return_z=True)
    Y1c = SuperSeries.constant(spec, alg, y1)
    Y2c = SuperSeries.constant(spec, alg, y2)
    Dz1, Dz2 = apply_operator(D.Delta, z1), apply_operator(D.Delta, z2)
    Y1, Y2 = Y1c + Dz1, Y2c + Dz2
    full = integrate(series_multiply(Y1, Y2), I)
    base = apply_integral(I, D.multiply(y1, y2))
    t1 = integrate(series_multiply(Y1c, Dz2), I)
    t2 = integrate(series_multiply(Dz1, Y2), I)
    cross = not t1 and not t2
    const = SuperSeries.constant(spec, None, base)
    return InvarianceReport(full == const and cross, base, full, cross)


def deformed_gram(D: DGBVStructure, sol: MCSolution, I=None) -> list:
    """int phi(e_a) phi(e_b) as scalar series."""
    I = integral_vector(D, I)
    L = lifts(D, sol)
    return [[integrate(series_multiply(La, Lb), I) for Lb in L] for La in L]


# ---------------------------------------------------------------------------
# potential


@dataclass
class PotentialReport:
    Phi: SuperSeries
    form1: SuperSeries
    form2: SuperSeries
    forms_agree: bool
    first_difference: Optional[str] = None
    cubic_matches: Optional[bool] = None
    unit_axiom_pass: Optional[bool] = None
    unit_witness: Optional[tuple] = None
    wdvv_pass: Optional[bool] = None
    wdvv_witness: Optional[tuple] = None
    wdvv_checked: int = 0

    def as_dict(self):
        return {"Phi": self.Phi.format(), "forms_agree": self.forms_agree,
                "first_difference": self.first_difference, "cubic_matches": self.cubic_matches,
                "unit_axiom_pass": self.unit_axiom_pass,
                "unit_witness": list(self.unit_witness) if self.unit_witness else None,
                "wdvv_pass": self.wdvv_pass,
                "wdvv_witness": list(self.wdvv_witness) if self.wdvv_witness else None,
                "wdvv_checked": self.wdvv_checked}


def potential_form1(D: DGBVStructure, gamma: SuperSeries, B: SuperSeries, I) -> SuperSeries:
    G2 = series_multiply(gamma, gamma)
    G3 = series_multiply(G2, gamma)
    dB = apply_operator(D.delta, B)
    DB = apply_operator(D.Delta, B)
    return integrate(G3.scale(SIXTH) - series_multiply(dB, DB).scale(HALF), I)


def potential_form2(D: DGBVStructure, gamma: SuperSeries, gamma1: SuperSeries, I) -> SuperSeries:
    G2 = series_multiply(gamma, gamma)
    G3 = series_multiply(G2, gamma)
    return integrate(G3.scale(SIXTH) - series_multiply(gamma - gamma1, G2).scale(QUARTER), I)


def _first_diff(a: SuperSeries, b: SuperSeries) -> Optional[str]:
    d = a - b
    if not d:
        return None
    m = min(d.terms, key=monomial_key)
    return d.spec.format_monomial(m)


def potential(D: DGBVStructure, sol: MCSolution, I=None, strict: bool = True) -> PotentialReport:
    """Phi from both closed forms; they must agree monomial by monomial."""
    I = integral_vector(D, I)
    f1 = potential_form1(D, sol.gamma, sol.B, I)
    f2 = potential_form2(D, sol.gamma, sol.gamma1, I)
    diff = _first_diff(f1, f2)
    if diff is not None and strict:
        raise ConsistencyError(f"the two expressions for Phi differ at {diff}")
    rep = PotentialReport(f1, f1, f2, diff is None, diff)
    if sol.basis is not None:
        cub = cubic_term_oracle(D, sol.basis, I, sol.spec)
        rep.cubic_matches = f1.order_part(3) == cub
    return rep


def _sorted_sign(idx: list, odd: tuple):
    """Sort a word of parameter indices; return (sign, exponent tuple) or None."""
    arr = list(idx)
    s = 1
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                if odd[arr[j]] and odd[arr[j + 1]]:
                    s = -s
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
    for i in range(len(arr) - 1):
        if arr[i] == arr[i + 1] and odd[arr[i]]:
            return None
    exps = [0] * len(odd)
    for a in arr:
        exps[a] += 1
    return s, tuple(exps)


def cubic_term_oracle(D: DGBVStructure, basis: CohomologyBasis, I, spec: ParamSpec) -> SuperSeries:
    """(1/6) int Gamma_1^3 by explicit sign counting over index triples."""
    I = integral_vector(D, I)
    reps, par = basis.representatives, basis.parities
    n = len(basis)
    odd = tuple(bool(p) for p in par)
    out: dict = {}
    for a in range(n):
        for b in range(n):
            ab = D.multiply(reps[a], reps[b])
            if not ab:
                continue
            for c in range(n):
                val = apply_integral(I, D.multiply(ab, reps[c]))
                if not val:
                    continue
                # e_a t^a e_b t^b e_c t^c -> e_a e_b e_c t^a t^b t^c
                s = -1 if (par[a] * (par[b] + par[c]) + par[b] * par[c]) & 1 else 1
                r = _sorted_sign([a, b, c], odd)
                if r is None:
                    continue
                s2, m = r
                out[m] = out.get(m, 0) + SIXTH * s * s2 * val
    clean = {m: c for m, c in out.items() if c}
    return SuperSeries(spec, None, clean).truncate(spec.order)


def third_derivatives(Phi: SuperSeries) -> list:
    """T[a][b][c] = d_a d_b d_c Phi with left derivatives (d_c applied first)."""
    n = Phi.spec.n
    d1 = [left_partial(Phi, c) for c in range(n)]
    d2 = [[left_partial(d1[c], b) for c in range(n)] for b in range(n)]
    return [[[left_partial(d2[b][c], a) for c in range(n)] for b in range(n)] for a in range(n)]


def check_unit_axiom(Phi: SuperSeries, G: GramData, T: Optional[list] = None):
    """d_0 d_a d_b Phi = g_ab exactly; returns (passed, witness)."""
    T = T or third_derivatives(Phi)
    spec = Phi.spec
    n = G.n
    for a in range(n):
        for b in range(n):
            want = SuperSeries.constant(spec, None, G.g[a][b])
            if T[0][a][b] != want:
                return False, (G.basis.names[a], G.basis.names[b])
    return True, None


def check_wdvv(Phi: SuperSeries, G: GramData, T: Optional[list] = None, signed: bool = True):
    """Both sides of WDVV to order N - 3 for every index quadruple.

    Returns (passed, witness, checked) where the witness is
    (alpha, beta, gamma, delta, monomial).  ``signed=False`` drops the super
    sign, which only exists to exercise the check.
    """
    if not G.nice:
        raise StructureError("the integral is not nice; WDVV needs the inverse pairing")
    T = T or third_derivatives(Phi)
    spec = Phi.spec
    n = G.n
    par = G.basis.parities
    top = spec.order - 3
    if top < 0:
        return True, None, 0
    ginv = G.ginv
    # M[a][b][v] = sum_mu T[a][b][mu] g^{mu v}
    M = [[[series_sum([T[a][b][mu].scale(ginv[mu][v]) for mu in range(n) if ginv[mu][v]],
                      spec) for v in range(n)] for b in range(n)] for a in range(n)]
    Tt = [[[T[v][c][d].truncate(top) for d in range(n)] for c in range(n)] for v in range(n)]
    Mt = [[[M[a][b][v].truncate(top) for v in range(n)] for b in range(n)] for a in range(n)]

    def side(a, b, c, d):
        parts = [series_multiply(Mt[a][b][v], Tt[v][c][d]) for v in range(n)
                 if Mt[a][b][v] and Tt[v][c][d]]
        return series_sum(parts, spec).truncate(top)

    checked = 0
    names = G.basis.names
    for a in range(n):
        for b in range(n):
            for c in range(n):
                sgn = -1 if signed and (par[a] * (par[b] + par[c])) & 1 else 1
                for d in range(n):
                    checked += 1
                    lhs = side(a, b, c, d)
                    rhs = side(b, c, a, d).scale(sgn)
                    if lhs != rhs:
                        diff = lhs - rhs
                        m = min(diff.terms, key=monomial_key)
                        return False, (names[a], names[b], names[c], names[d],
                                       spec.format_monomial(m)), checked
    return True, None, checked


def frobenius_report(D: DGBVStructure, sol: MCSolution, I=None, wdvv: bool = True) -> PotentialReport:
    """Potential with unit axiom and, when the integral is nice, WDVV."""
    rep = potential(D, sol, I)
    G = gram(D, I, sol.basis)
    T = third_derivatives(rep.Phi)
    rep.unit_axiom_pass, rep.unit_witness = check_unit_axiom(rep.Phi, G, T)
    if wdvv and G.nice:
        rep.wdvv_pass, rep.wdvv_witness, rep.wdvv_checked = check_wdvv(rep.Phi, G, T)
    return rep
