"""Maurer-Cartan solutions, the extension map and the deformed product.

Every "there exists" step is a deterministic linear solve: an order-n
right-hand side r is first checked to lie in Ker delta and Im Delta, then
delta Delta w = r is solved and the new coefficient is Delta w.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import StructureError
from .linalg import Vector, vadd_into, vsub
from .series import (DEFAULT_ORDER, ParamSpec, SuperSeries, apply_operator, bracket_series,
                     monomial_key, series_multiply, series_sum)
from .structure import (CohomologyBasis, ConsistencyError, ContractError, DGBVStructure,
                        cohomology_basis, decompose, require_q)

HALF = Fraction(1, 2)


@dataclass
class MCSolution:
    structure: DGBVStructure
    spec: ParamSpec
    gamma: SuperSeries
    gamma1: SuperSeries
    B: SuperSeries
    kind: str
    basis: Optional[CohomologyBasis] = None
    pivot: str = "left"
    _lifts: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return self.spec.order

    def coefficient_orders(self) -> dict:
        out: dict = {}
        for m in self.gamma.terms:
            out.setdefault(sum(m), []).append(m)
        return out

    def format(self) -> str:
        return self.gamma.format()


def mc_residual(D: DGBVStructure, x: SuperSeries) -> SuperSeries:
    """delta x + 1/2 [x . x], truncated."""
    return apply_operator(D.delta, x) + bracket_series(D, x, x).scale(HALF)


def _solve_dD(D: DGBVStructure, r: Vector, pivot: str, where: str) -> Vector:
    """Check r in Ker delta and Im Delta, then solve delta Delta w = r."""
    if D.d(r):
        raise ConsistencyError(f"{where}: right-hand side is not delta-closed")
    if D.solver("D", pivot).solve(r) is None:
        raise ConsistencyError(f"{where}: right-hand side is not in Im Delta")
    w = D.solver("dD", pivot).solve(r)
    if w is None:
        raise ConsistencyError(f"{where}: right-hand side is not in Im delta Delta")
    return w


def _solve_mc(D: DGBVStructure, spec: ParamSpec, gamma1: SuperSeries, kind: str,
              basis=None, pivot: str = "left") -> MCSolution:
    require_q(D)
    alg = D.algebra
    G = gamma1
    Bterms: dict = {}
    for n in range(2, spec.order + 1):
        rhs = bracket_series(D, G, G, degree=n).scale(-HALF)
        new: dict = {}
        for m in sorted(rhs.terms, key=monomial_key):
            w = _solve_dD(D, rhs.terms[m], pivot, f"order {n}, monomial {spec.format_monomial(m)}")
            if w:
                Bterms[m] = w
                x = D.D(w)
                if x:
                    new[m] = x
        if new:
            G = G + SuperSeries(spec, alg, new, True)
    B = SuperSeries(spec, alg, Bterms, True)
    sol = MCSolution(D, spec, G, gamma1, B, kind, basis, pivot)
    if kind == "universal":
        for m in sol.gamma.terms:
            if sum(m) >= 2 and m[0]:
                raise ConsistencyError(
                    f"t0 appears beyond the linear term at {spec.format_monomial(m)}")
    return sol


def _harmonic(D: DGBVStructure, x1: Vector, basis: Optional[CohomologyBasis]):
    if D.d(x1) or D.D(x1):
        raise ContractError("class representative is not in Ker delta and Ker Delta", x1)
    return x1


def _resolve_class(D, cls, basis: Optional[CohomologyBasis]) -> Vector:
    if isinstance(cls, dict):
        return _harmonic(D, cls, basis)
    basis = basis or cohomology_basis(D)
    if isinstance(cls, (list, tuple)):
        return basis.element(cls)
    return dict(basis.representatives[basis.class_index(cls)])


def solve_mc_one_param(D: DGBVStructure, class_x, order: int = DEFAULT_ORDER,
                       basis: Optional[CohomologyBasis] = None, pivot: str = "left",
                       name: str = "t") -> MCSolution:
    """x(t) = x1 t + ... with x1 harmonic and x_n in Im Delta for n > 1."""
    require_q(D)
    x1 = _resolve_class(D, class_x, basis)
    alg = D.algebra
    if any(alg.parities[k] for k in x1):
        raise StructureError("one-parameter deformations need an even class")
    spec = ParamSpec.even(name, order)
    g1 = SuperSeries(spec, alg, {spec.var(0): x1})
    return _solve_mc(D, spec, g1, "one_param", basis, pivot)


def solve_mc_epsilon(D: DGBVStructure, class_x, basis: Optional[CohomologyBasis] = None,
                     name: str = "eps") -> MCSolution:
    """x(eps) = x1 eps for an odd harmonic x1."""
    require_q(D)
    x1 = _resolve_class(D, class_x, basis)
    alg = D.algebra
    if any(not alg.parities[k] for k in x1):
        raise StructureError("the odd-parameter deformation needs an odd class")
    spec = ParamSpec.epsilon(name)
    g1 = SuperSeries(spec, alg, {spec.var(0): x1})
    sol = _solve_mc(D, spec, g1, "epsilon", basis)
    if mc_residual(D, sol.gamma):
        raise ConsistencyError("x1 eps does not solve the MC equation")
    return sol


def universal_spec(basis: CohomologyBasis, order: int = DEFAULT_ORDER, prefix: str = "t") -> ParamSpec:
    return ParamSpec(tuple(f"{prefix}{a}" for a in range(len(basis))),
                     tuple(basis.parities), order)


def solve_mc_universal(D: DGBVStructure, basis: Optional[CohomologyBasis] = None,
                       order: int = DEFAULT_ORDER, pivot: str = "left",
                       gamma1: Optional[SuperSeries] = None) -> MCSolution:
    """Gamma = sum e_a t^a + (Im Delta)-corrections; t0 stays in the linear term.

    ``gamma1`` may supply another linear term with the same classes, e.g. with
    representatives shifted by elements of Im delta Delta.
    """
    require_q(D)
    if D.D(D.algebra.unit()):
        raise StructureError("Delta 1 is nonzero; universal normalization impossible")
    basis = basis or cohomology_basis(D)
    spec = universal_spec(basis, order)
    if gamma1 is None:
        gamma1 = SuperSeries(spec, D.algebra,
                             {spec.var(a): e for a, e in enumerate(basis.representatives)})
    return _solve_mc(D, spec, gamma1, "universal", basis, pivot)


def shifted_gamma1(D: DGBVStructure, basis: Optional[CohomologyBasis] = None,
                   order: int = DEFAULT_ORDER, seed: int = 0,
                   coeff_range: int = 2) -> SuperSeries:
    """Linear term sum (e_a + delta Delta u_a) t^a with seeded shifts of equal degree.

    The unit representative is kept, so t0 still multiplies 1.  Returns the
    unshifted term when Im delta Delta meets no class degree.
    """
    basis = basis or cohomology_basis(D)
    spec = universal_spec(basis, order)
    alg = D.algebra
    rng = random.Random(seed)
    dD = lambda u: D.d(D.D(u))
    terms = {}
    for a, e in enumerate(basis.representatives):
        e = dict(e)
        if a:
            degs = alg.basis.degrees
            for i in range(alg.dim):
                img = dD({i: 1})
                if not img or any(degs[k] != basis.degrees[a] for k in img):
                    continue
                c = rng.randint(-coeff_range, coeff_range)
                if c:
                    for k, v in img.items():
                        e[k] = e.get(k, 0) + c * v
            e = {k: v for k, v in e.items() if v}
        terms[spec.var(a)] = e
    return SuperSeries(spec, alg, terms)


@dataclass
class SolutionCheck:
    residual_zero: bool
    linear_harmonic: bool
    higher_in_im_Delta: bool
    B_consistent: bool
    t0_linear_only: bool
    witness: Optional[str] = None

    @property
    def passed(self) -> bool:
        return all((self.residual_zero, self.linear_harmonic, self.higher_in_im_Delta,
                    self.B_consistent, self.t0_linear_only))


def verify_solution(sol: MCSolution) -> SolutionCheck:
    D = sol.structure
    spec = sol.spec
    res = mc_residual(D, sol.gamma)
    witness = None
    if res:
        m = min(res.terms, key=monomial_key)
        witness = f"residual at {spec.format_monomial(m)}"
    lin = all(not D.d(c) and not D.D(c) for m, c in sol.gamma.terms.items() if sum(m) == 1)
    lin = lin and sol.gamma.order_part(1) == sol.gamma1.order_part(1)
    imD = D.solver("D")
    higher = all(imD.solve(c) is not None for m, c in sol.gamma.terms.items() if sum(m) >= 2)
    bcons = (sol.gamma - sol.gamma1) == apply_operator(D.Delta, sol.B)
    t0 = True
    if sol.kind == "universal":
        t0 = all(not m[0] for m in sol.gamma.terms if sum(m) >= 2)
    return SolutionCheck(not res, lin, higher, bcons, t0, witness)


# ---------------------------------------------------------------------------
# deformed differential


class DeformedDifferential:
    """delta_G = delta + [G . -] on algebra-valued series."""

    def __init__(self, D: DGBVStructure, gamma: SuperSeries):
        self.structure = D
        self.gamma = gamma

    def __call__(self, f: SuperSeries) -> SuperSeries:
        return apply_operator(self.structure.delta, f) + bracket_series(self.structure, self.gamma, f)


def deformed_differential(D: DGBVStructure, sol) -> DeformedDifferential:
    gamma = sol.gamma if isinstance(sol, MCSolution) else sol
    return DeformedDifferential(D, gamma)


@dataclass
class DeformedQReport:
    square_zero: bool
    anticommutes: bool
    trials: int
    im_Delta_case: bool
    im_delta_case: bool
    witness: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.square_zero and self.anticommutes and self.im_Delta_case and self.im_delta_case

    def as_dict(self) -> dict:
        return {"square_zero": self.square_zero, "anticommutes": self.anticommutes,
                "trials": self.trials, "im_Delta_case": self.im_Delta_case,
                "im_delta_case": self.im_delta_case, "witness": self.witness}


def _order_part_terms(f: SuperSeries, n: int) -> dict:
    return {m: c for m, c in f.terms.items() if sum(m) == n}


def preimage_im_Delta(D: DGBVStructure, gamma: SuperSeries, z: SuperSeries) -> SuperSeries:
    """For y = Delta z with delta_G y = 0 return V with y = delta_G Delta V.

    Inductive scheme: z'_n = z_n - sum_{i+j=n} [x_i . v_j] is delta-Delta-closed;
    decompose z'_n = h_n + Delta u_n + delta v_n; then y = -delta_G Delta v.
    """
    spec, alg = z.spec, D.algebra
    v = SuperSeries.zero(spec, alg)
    for n in range(spec.order + 1):
        corr = bracket_series(D, gamma, v, degree=n)
        zp = _order_part_terms(z - corr, n)
        new = {}
        for m, c in zp.items():
            if D.d(D.D(c)):
                raise ConsistencyError(f"order {n}: z'_n is not delta-Delta-closed")
            _, _, vn = decompose(D, c)
            if vn:
                new[m] = vn
        if new:
            v = v + SuperSeries(spec, alg, new, True)
    return -v


def preimage_im_delta(D: DGBVStructure, gamma: SuperSeries, z: SuperSeries) -> SuperSeries:
    """For y = delta_G z with Delta y = 0 return V with y = delta_G Delta V.

    Inductive scheme: z'_n = z_n - sum [x_i . v_j] = h_n + Delta u_n + delta v_n,
    then delta Delta w_n = sum_{i+j=n, i>=1} [x_i . (h_j - Delta w_j)] and V = u + w.
    """
    spec, alg = z.spec, D.algebra
    zero = SuperSeries.zero(spec, alg)
    u, v, h, w = zero, zero, zero, zero
    for n in range(spec.order + 1):
        corr = bracket_series(D, gamma, v, degree=n)
        zp = _order_part_terms(z - corr, n)
        nh, nu, nv = {}, {}, {}
        for m, c in zp.items():
            if D.d(D.D(c)):
                raise ConsistencyError(f"order {n}: z'_n is not delta-Delta-closed")
            hn, un, vn = decompose(D, c)
            if hn:
                nh[m] = hn
            if un:
                nu[m] = un
            if vn:
                nv[m] = vn
        u = u + SuperSeries(spec, alg, nu, True)
        v = v + SuperSeries(spec, alg, nv, True)
        h = h + SuperSeries(spec, alg, nh, True)
        rhs = bracket_series(D, gamma, h - apply_operator(D.Delta, w), degree=n)
        nw = {}
        for m in sorted(rhs.terms, key=monomial_key):
            wn = _solve_dD(D, rhs.terms[m], "left", f"order {n}: w-step")
            if wn:
                nw[m] = wn
        if nw:
            w = w + SuperSeries(spec, alg, nw, True)
    return u + w


def random_series(rng: random.Random, spec: ParamSpec, alg, terms: int = 6,
                  parity: Optional[int] = None, coeff_range: int = 3,
                  min_order: int = 0) -> SuperSeries:
    monos = [m for m in spec.all_monomials() if sum(m) >= min_order]
    out: dict = {}
    for _ in range(terms):
        m = rng.choice(monos)
        pm = spec.parity(m)
        ks = [k for k in range(alg.dim) if parity is None or (alg.parities[k] + pm) % 2 == parity]
        if not ks:
            continue
        k = rng.choice(ks)
        c = rng.randint(-coeff_range, coeff_range)
        if c:
            v = out.setdefault(m, {})
            v[k] = v.get(k, 0) + c
            if not v[k]:
                del v[k]
            if not v:
                del out[m]
    return SuperSeries(spec, alg, out)


def check_deformed_q(D: DGBVStructure, sol, trials: int = 5, seed: int = 0) -> DeformedQReport:
    """Check (A[[t]], delta_G, Delta) order by order on sampled elements."""
    gamma = sol.gamma if isinstance(sol, MCSolution) else sol
    spec, alg = gamma.spec, D.algebra
    dG = DeformedDifferential(D, gamma)
    Dl = lambda f: apply_operator(D.Delta, f)
    witness = None
    sq = anti = True
    for k in range(alg.dim):
        e = SuperSeries(spec, alg, {spec.zero_monomial(): {k: 1}}, True)
        if dG(dG(e)):
            sq = False
            witness = witness or f"delta_G^2 nonzero on {alg.basis.labels[k]}"
        if dG(Dl(e)) + Dl(dG(e)):
            anti = False
            witness = witness or f"delta_G Delta + Delta delta_G nonzero on {alg.basis.labels[k]}"
    rng = random.Random(seed)
    basis = getattr(sol, "basis", None)
    lifts = []
    if isinstance(sol, MCSolution) and basis is not None:
        lifts = [extend_class(D, sol, e) for e in basis.representatives]
    okA = okB = True
    for trial in range(trials):
        s = random_series(rng, spec, alg, terms=5)
        extra = SuperSeries.zero(spec, alg)
        for lift in lifts:
            c = rng.randint(-2, 2)
            if c:
                m = rng.choice(spec.all_monomials(2))
                extra = extra + series_multiply(SuperSeries(spec, None, {m: c}), lift)
        # case y in Im Delta and Ker delta_G, with y = Delta z
        z = -dG(s) + extra + Dl(random_series(rng, spec, alg, terms=3))
        y = Dl(z)
        if dG(y):
            raise ConsistencyError("sampled element is not delta_G-closed")
        try:
            V = preimage_im_Delta(D, gamma, z)
            if dG(Dl(V)) != y:
                okA = False
                witness = witness or f"trial {trial}: Im Delta preimage does not reproduce y"
        except ConsistencyError as exc:
            okA = False
            witness = witness or f"trial {trial}: {exc}"
        # case y in Im delta_G and Ker Delta, with y = delta_G z
        z2 = Dl(s) + extra
        y2 = dG(z2)
        if Dl(y2):
            raise ConsistencyError("sampled element is not Delta-closed")
        try:
            V2 = preimage_im_delta(D, gamma, z2)
            if dG(Dl(V2)) != y2:
                okB = False
                witness = witness or f"trial {trial}: Im delta preimage does not reproduce y"
        except ConsistencyError as exc:
            okB = False
            witness = witness or f"trial {trial}: {exc}"
    return DeformedQReport(sq, anti, trials, okA, okB, witness)


# ---------------------------------------------------------------------------
# extension map and its inverse


def extend_class(D: DGBVStructure, sol, y0: Vector, pivot: str = "left",
                 return_z: bool = False):
    """Lift a harmonic y0 to y(t) = y0 + Delta z(t) with delta_G y(t) = 0."""
    gamma = sol.gamma if isinstance(sol, MCSolution) else sol
    spec, alg = gamma.spec, D.algebra
    if D.d(y0) or D.D(y0):
        raise ContractError("y0 must lie in Ker delta and Ker Delta", y0)
    y = SuperSeries(spec, alg, {spec.zero_monomial(): dict(y0)})
    zterms: dict = {}
    for n in range(1, spec.order + 1):
        rhs = bracket_series(D, gamma, y, degree=n).scale(-1)
        new = {}
        for m in sorted(rhs.terms, key=monomial_key):
            w = _solve_dD(D, rhs.terms[m], pivot, f"extension order {n}")
            if w:
                zterms[m] = w
                x = D.D(w)
                if x:
                    new[m] = x
        if new:
            y = y + SuperSeries(spec, alg, new, True)
    if return_z:
        return y, SuperSeries(spec, alg, zterms, True)
    return y


def lifts(D: DGBVStructure, sol: MCSolution) -> list:
    """phi(e_a) for every basis class, cached on the solution."""
    basis = sol.basis or cohomology_basis(D)
    key = id(basis)
    if key not in sol._lifts:
        sol._lifts[key] = [extend_class(D, sol, e) for e in basis.representatives]
    return sol._lifts[key]


def phi(D: DGBVStructure, sol: MCSolution, coords: Sequence[SuperSeries]) -> SuperSeries:
    """sum_a c_a(t) phi(e_a) with scalar series acting from the left."""
    L = lifts(D, sol)
    parts = [series_multiply(c, L[a]) for a, c in enumerate(coords) if c]
    return series_sum(parts, sol.spec, D.algebra)


def phi_inverse(D: DGBVStructure, sol: MCSolution, w: SuperSeries, pivot: str = "left"):
    """Coordinates c_a(t) and a witness z with w = sum c_a phi(e_a) + delta_G z."""
    basis = sol.basis or cohomology_basis(D)
    spec, alg = sol.spec, D.algebra
    dG = DeformedDifferential(D, sol.gamma)
    closed = dG(w)
    if closed:
        m = min(closed.terms, key=monomial_key)
        raise ContractError(f"input is not delta_G-closed (at {spec.format_monomial(m)})",
                            closed.terms[m])
    L = lifts(D, sol)
    k = len(basis)
    coords = [dict() for _ in range(k)]
    zterms: dict = {}
    rho = w
    par = basis.parities
    dsolve = D.solver("d", pivot)
    for n in range(spec.order + 1):
        lead = _order_part_terms(rho, n)
        if not lead:
            continue
        corr_terms: dict = {}
        sub = []
        for m in sorted(lead, key=monomial_key):
            r = lead[m]
            if D.d(r):
                raise ContractError(f"leading coefficient at {spec.format_monomial(m)} is not delta-closed", r)
            lam = basis.classify(r)
            pm = spec.parity(m)
            rest = dict(r)
            for a, c in enumerate(lam):
                if c:
                    vadd_into(rest, basis.representatives[a], -c)
                    # (c t^m) phi(e_a) has leading coefficient (-1)^{p(m)|e_a|} c e_a
                    ca = -c if (pm and par[a]) else c
                    coords[a][m] = ca
                    sub.append(series_multiply(SuperSeries(spec, None, {m: ca}, True), L[a]))
            s = dsolve.solve(rest)
            if s is None:
                raise ConsistencyError(f"order {n}: residual is not delta-exact")
            if s:
                zterms[m] = s
                corr_terms[m] = s
        rho = rho - series_sum(sub, spec, alg)
        if corr_terms:
            rho = rho - dG(SuperSeries(spec, alg, corr_terms, True))
    if rho:
        raise ConsistencyError("phi_inverse left a nonzero remainder")
    c_series = [SuperSeries(spec, None, c, True) for c in coords]
    return c_series, SuperSeries(spec, alg, zterms, True)


def deformed_product_coords(D: DGBVStructure, sol: MCSolution, a: Sequence[SuperSeries],
                            b: Sequence[SuperSeries]) -> list:
    """a *_G b for elements of H[[t]] given by coordinate series."""
    prod = series_multiply(phi(D, sol, a), phi(D, sol, b))
    c, _ = phi_inverse(D, sol, prod)
    return c


def class_coords(sol: MCSolution, a: int) -> list:
    basis = sol.basis or cohomology_basis(sol.structure)
    spec = sol.spec
    return [SuperSeries(spec, None, {spec.zero_monomial(): 1} if i == a else {}, True)
            for i in range(len(basis))]


def deformed_product(D: DGBVStructure, sol: MCSolution, alpha, beta) -> list:
    """Coordinates of e_alpha *_G e_beta in H[[t]]."""
    basis = sol.basis or cohomology_basis(D)
    a, b = basis.class_index(alpha), basis.class_index(beta)
    L = lifts(D, sol)
    c, _ = phi_inverse(D, sol, series_multiply(L[a], L[b]))
    return c


def cup_product(D: DGBVStructure, basis: CohomologyBasis, a: int, b: int) -> list:
    return basis.classify(D.multiply(basis.representatives[a], basis.representatives[b]))
