"""DGBV homomorphisms, induced maps on cohomology and transport of Frobenius data.

A morphism is a degree-preserving unital ring map intertwining both delta and
Delta.  Requiring f Delta = Delta f is the reading under which normalized
solutions push forward to normalized solutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import AxiomResult, StructureError
from .frobenius import apply_integral, gram, integral_vector, potential
from .linalg import Matrix, Vector, inverse, vadd_into
from .mc import (MCSolution, class_coords, deformed_product_coords, solve_mc_one_param,
                 solve_mc_universal, verify_solution)
from .series import SuperSeries, monomial_key
from .structure import CohomologyBasis, ContractError, DGBVStructure, cohomology_basis, require_q


class DGBVMorphism:
    """Linear map source -> target given by the images of the source basis."""

    def __init__(self, source: DGBVStructure, target: DGBVStructure, columns: Sequence[Vector],
                 name: str = "f"):
        if len(columns) != source.dim:
            raise StructureError(f"morphism needs {source.dim} columns, got {len(columns)}")
        for j, c in enumerate(columns):
            for k in c:
                if not 0 <= k < target.dim:
                    raise StructureError(f"column {j} has out-of-range index {k}")
        self.source = source
        self.target = target
        self.columns = [{k: Fraction(v) for k, v in c.items() if v} for c in columns]
        self.name = name

    @classmethod
    def identity(cls, D: DGBVStructure) -> "DGBVMorphism":
        return cls(D, D, [{i: 1} for i in range(D.dim)], "id")

    @property
    def matrix(self) -> Matrix:
        return Matrix(self.target.dim, self.source.dim, self.columns)

    def __call__(self, v: Vector) -> Vector:
        out: Vector = {}
        for j, c in v.items():
            vadd_into(out, self.columns[j], c)
        return out

    def apply_series(self, f: SuperSeries) -> SuperSeries:
        terms = {}
        for m, c in f.terms.items():
            img = self(c)
            if img:
                terms[m] = img
        return SuperSeries(f.spec, self.target.algebra, terms, True)

    def __repr__(self):
        return f"DGBVMorphism({self.name}: {self.source.name} -> {self.target.name})"


@dataclass
class MorphismReport:
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    def as_dict(self):
        return {"pass": self.passed, "checks": [r.as_dict() for r in self.results]}


def _first(name, items) -> AxiomResult:
    n = 0
    for wit, ok in items:
        n += 1
        if not ok:
            return AxiomResult(name, False, n, wit)
    return AxiomResult(name, True, n)


def validate_morphism(f: DGBVMorphism) -> MorphismReport:
    S, T = f.source, f.target
    sa, ta = S.algebra, T.algebra
    n = S.dim
    sd, td = sa.basis.degrees, ta.basis.degrees
    out = []
    out.append(_first("degree_zero", (((j,), all(td[k] == sd[j] for k in f.columns[j]))
                                      for j in range(n))))
    out.append(_first("unit", [((sa.unit_index,), f(sa.unit()) == ta.unit())]))
    fm = [f.columns[j] for j in range(n)]
    out.append(_first("multiplicative", (((i, j), f(S.multiply({i: 1}, {j: 1})) ==
                                          T.multiply(fm[i], fm[j]))
                                         for i in range(n) for j in range(n))))
    out.append(_first("commutes_delta", (((j,), f(S.d({j: 1})) == T.d(fm[j])) for j in range(n))))
    out.append(_first("commutes_Delta", (((j,), f(S.D({j: 1})) == T.D(fm[j])) for j in range(n))))
    out.append(_first("preserves_bracket", (((i, j), f(S.bracket({i: 1}, {j: 1})) ==
                                             T.bracket(fm[i], fm[j]))
                                            for i in range(n) for j in range(n))))
    return MorphismReport(out)


def require_morphism(f: DGBVMorphism) -> None:
    rep = validate_morphism(f)
    if not rep.passed:
        bad = rep.failures()[0]
        raise ContractError(f"not a DGBV morphism: {bad.name} fails at {bad.witness}")


@dataclass
class QuasiIsoCertificate:
    """f_* in the chosen cohomology bases (columns = images of source classes)."""

    source_basis: CohomologyBasis
    target_basis: CohomologyBasis
    matrix: list
    inverse: Optional[list]
    maps_harmonic: bool
    maps_im_dD: bool

    @property
    def is_quasi_iso(self) -> bool:
        return self.inverse is not None

    def apply(self, coords: Sequence) -> list:
        return [sum((self.matrix[b][a] * coords[a] for a in range(len(coords))), Fraction(0))
                for b in range(len(self.matrix))]

    def as_dict(self):
        return {"matrix": [[str(c) for c in row] for row in self.matrix],
                "quasi_isomorphism": self.is_quasi_iso,
                "maps_harmonic": self.maps_harmonic, "maps_im_dD": self.maps_im_dD}


def induced_map(f: DGBVMorphism, source_basis: Optional[CohomologyBasis] = None,
                target_basis: Optional[CohomologyBasis] = None) -> QuasiIsoCertificate:
    require_morphism(f)
    S, T = f.source, f.target
    qs, qt = require_q(S), require_q(T)
    sb = source_basis or cohomology_basis(S)
    tb = target_basis or cohomology_basis(T)
    harm = all(not T.d(f(e)) and not T.D(f(e)) for e in sb.representatives)
    im = all(f(v) in qt.im_dD for v in qs.im_dD.basis)
    if not harm:
        raise ContractError("f does not map harmonic elements to harmonic elements")
    cols = [tb.project(f(e)) for e in sb.representatives]
    k, l = len(tb), len(sb)
    M = [[cols[a][b] for a in range(l)] for b in range(k)]
    inv = None
    if k == l:
        Minv = inverse(Matrix.from_rows(M))
        if Minv is not None:
            rows = Minv.rows()
            inv = [[rows[a].get(b, Fraction(0)) for b in range(k)] for a in range(k)]
    return QuasiIsoCertificate(sb, tb, M, inv, harm, im)


def image_basis(f: DGBVMorphism, source_basis: Optional[CohomologyBasis] = None) -> CohomologyBasis:
    """Target cohomology basis f(e_a); needs f to be a quasi-isomorphism."""
    sb = source_basis or cohomology_basis(f.source)
    cert = induced_map(f, sb)
    if not cert.is_quasi_iso:
        raise ContractError("f is not a quasi-isomorphism")
    q = require_q(f.target)
    return CohomologyBasis(f.target, [f(e) for e in sb.representatives], list(sb.degrees),
                           q.im_dD, list(sb.names))


def pushforward_solution(f: DGBVMorphism, sol: MCSolution,
                         basis: Optional[CohomologyBasis] = None) -> MCSolution:
    """f(x(t)) as a solution downstream, checked to be normalized."""
    T = f.target
    g = f.apply_series(sol.gamma)
    g1 = f.apply_series(sol.gamma1)
    B = f.apply_series(sol.B)
    out = MCSolution(T, sol.spec, g, g1, B, sol.kind, basis, sol.pivot)
    chk = verify_solution(out)
    if not chk.passed:
        raise ContractError(f"pushed-forward solution is not normalized: {chk}")
    return out


@dataclass
class FunctorialityReport:
    passed: bool
    normalized_downstream: bool
    checked: int
    witness: Optional[str] = None

    def as_dict(self):
        return {"pass": self.passed, "normalized_downstream": self.normalized_downstream,
                "checked": self.checked, "witness": self.witness}


def check_functoriality(f: DGBVMorphism, class_x, pairs=None, order: int = 5) -> FunctorialityReport:
    """f_*(a *_x b) = f_*(a) *_{f_* x} f_*(b) with the product from x(t) and f(x(t)).

    ``pairs`` defaults to all ordered pairs of source basis classes.
    """
    S, T = f.source, f.target
    sb = cohomology_basis(S)
    cert = induced_map(f, sb)
    sol = solve_mc_one_param(S, class_x, order, basis=sb)
    try:
        down = pushforward_solution(f, sol)
    except ContractError as e:
        return FunctorialityReport(False, False, 0, str(e))
    tb = cert.target_basis
    down.basis = tb
    spec = sol.spec
    k = len(sb)
    pairs = pairs if pairs is not None else [(a, b) for a in range(k) for b in range(k)]
    checked = 0

    def push(coords):
        """f_* on H[[t]]: coordinates in the target basis."""
        return [sum((c.scale(cert.matrix[b][a]) for a, c in enumerate(coords)),
                    SuperSeries.zero(spec)) for b in range(len(tb))]

    for a, b in pairs:
        checked += 1
        up = deformed_product_coords(S, sol, class_coords(sol, a), class_coords(sol, b))
        ea, eb = push(class_coords(sol, a)), push(class_coords(sol, b))
        dn = deformed_product_coords(T, down, ea, eb)
        lhs = push(up)
        if lhs != dn:
            for i, (u, v) in enumerate(zip(lhs, dn)):
                if u != v:
                    m = min((u - v).terms, key=monomial_key)
                    return FunctorialityReport(False, True, checked,
                                               f"pair {a},{b}: coordinate {i} differs at "
                                               f"{spec.format_monomial(m)}")
    return FunctorialityReport(True, True, checked)


@dataclass
class IdentificationReport:
    integrals_compatible: bool
    pairing_discrepancy: list
    normalized_downstream: bool
    phi_equal: bool
    phi_resolved_equal: bool
    source_phi: Optional[SuperSeries] = None
    target_phi: Optional[SuperSeries] = None
    witness: Optional[str] = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.phi_equal and self.phi_resolved_equal and self.normalized_downstream

    def as_dict(self):
        return {"pass": self.passed, "integrals_compatible": self.integrals_compatible,
                "pairing_discrepancy": [[str(c) for c in r] for r in self.pairing_discrepancy],
                "normalized_downstream": self.normalized_downstream,
                "phi_equal": self.phi_equal, "phi_resolved_equal": self.phi_resolved_equal,
                "witness": self.witness, "note": self.note}


def identify_frobenius(f: DGBVMorphism, I_source=None, I_target=None,
                       order: int = 5) -> IdentificationReport:
    """Compare Phi upstream with Phi of the pushed-forward universal solution.

    Coordinates are identified through f_*: the parameter of e_a upstream is
    the parameter of f(e_a) downstream.  The downstream potential is also
    recomputed from a fresh universal solution in the basis f(e_a).
    """
    S, T = f.source, f.target
    Is, It = integral_vector(S, I_source), integral_vector(T, I_target)
    sb = cohomology_basis(S)
    tb = image_basis(f, sb)
    compatible = all(apply_integral(It, f({j: 1})) == Is.get(j, 0) for j in range(S.dim))
    gs, gt = gram(S, Is, sb).g, gram(T, It, tb).g
    disc = [[gt[a][b] - gs[a][b] for b in range(len(sb))] for a in range(len(sb))]
    note = "" if compatible else "identification holds up to pairing rescaling"
    sol = solve_mc_universal(S, sb, order)
    try:
        down = pushforward_solution(f, sol, tb)
    except ContractError as e:
        return IdentificationReport(compatible, disc, False, False, False, witness=str(e), note=note)
    phs = potential(S, sol, Is).Phi
    pht = potential(T, down, It).Phi
    fresh = solve_mc_universal(T, tb, order)
    phr = potential(T, fresh, It).Phi
    witness = None
    if phs != pht:
        m = min((phs - pht).terms, key=monomial_key)
        witness = f"Phi differs at {sol.spec.format_monomial(m)}"
    elif phs != phr:
        m = min((phs - phr).terms, key=monomial_key)
        witness = f"re-solved Phi differs at {sol.spec.format_monomial(m)}"
    return IdentificationReport(compatible, disc, True, phs == pht, phs == phr, phs, pht,
                                witness, note)


def augmented_inclusion(A: DGBVStructure, B: DGBVStructure):
    """(A x B, f) with f(a) = (a, eps(a) 1_B), eps = coefficient of 1 in A.

    eps must be multiplicative and kill Im delta and Im Delta; this holds when
    the unit spans the degree-0 part and the operators raise degree.
    """
    from .fixtures import direct_sum
    u = A.algebra.unit_index
    for j in range(A.dim):
        for k in range(A.dim):
            if j != u and k != u and A.multiply({j: 1}, {k: 1}).get(u, 0):
                raise ContractError("coefficient of 1 is not multiplicative")
        if A.d({j: 1}).get(u, 0) or A.D({j: 1}).get(u, 0):
            raise ContractError("coefficient of 1 does not vanish on Im delta, Im Delta")
    T, embed = direct_sum(A, B)
    ub = B.algebra.unit_index
    cols = []
    for j in range(A.dim):
        v = dict(embed(0, {j: 1}))
        if j == u:
            vadd_into(v, embed(1, {ub: 1}))
        cols.append({k: c for k, c in v.items() if c})
    return T, DGBVMorphism(A, T, cols, f"incl({A.name})")


def mutate_morphism(f: DGBVMorphism, j: int, k: int, c=1) -> DGBVMorphism:
    """Copy of f with column j perturbed by c e_k: used to exercise rejection."""
    cols = [dict(x) for x in f.columns]
    cols[j][k] = cols[j].get(k, 0) + c
    return DGBVMorphism(f.source, f.target, cols, f.name + "'")
