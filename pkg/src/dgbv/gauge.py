"""Gauge calculus on the shifted Lie algebra A[-1].

Parity in L = A[-1] is (algebra parity + 1), so a gauge parameter A
("shifted-even") is an algebra-odd series; mc elements are algebra-even.
Every exponential is a finite sum because A has no constant term and
series are truncated at the order N.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Optional

from .algebra import StructureError
from .frobenius import integral_vector, potential_form2
from .mc import MCSolution, mc_residual, random_series
from .series import (SuperSeries, apply_operator, bracket_series, integrate, monomial_key,
                     series_multiply, series_sum)
from .structure import ConsistencyError, ContractError, DGBVStructure, require_q

# ---------------------------------------------------------------------------
# shifted view


class ShiftedDGLA:
    """(A[-1], delta, derived bracket): degrees shifted down by one."""

    def __init__(self, D: DGBVStructure):
        self.structure = D
        self.degrees = [d - 1 for d in D.algebra.basis.degrees]
        self.parities = [(p + 1) & 1 for p in D.parities]

    def bracket(self, a, b):
        return self.structure.bracket(a, b)

    def differential(self, a):
        return self.structure.d(a)

    def check(self) -> list:
        """Antisymmetry, Jacobi and the derivation rule of delta, in shifted parity."""
        from .structure import check_dgbv_axioms, check_gbv_axioms
        keep = {"bracket_antisymmetry", "odd_jacobi", "delta_bracket_derivation"}
        res = check_gbv_axioms(self.structure) + check_dgbv_axioms(self.structure)
        return [r for r in res if r.name in keep]


# ---------------------------------------------------------------------------
# ad calculus


def shifted_parity(f: SuperSeries) -> Optional[int]:
    p = f.parity()
    return None if p is None else (p + 1) & 1


def check_gauge_element(A: SuperSeries, D: Optional[DGBVStructure] = None) -> None:
    if A.is_zero():
        return
    if A.terms and min(sum(m) for m in A.terms) < 1:
        raise ContractError("gauge elements must have no constant term")
    if shifted_parity(A) != 0:
        raise ContractError("gauge elements must be shifted-even (algebra-odd)")
    if D is not None:
        imD = D.solver("D")
        for m, c in A.terms.items():
            if imD.solve(c) is None:
                raise ContractError("gauge element has a coefficient outside Im Delta", c)


def ad(D: DGBVStructure, A: SuperSeries, X: SuperSeries) -> SuperSeries:
    return bracket_series(D, A, X)


def ad_power(D: DGBVStructure, A: SuperSeries, n: int, X: SuperSeries) -> SuperSeries:
    for _ in range(n):
        if not X:
            break
        X = bracket_series(D, A, X)
    return X


def exp_ad(D: DGBVStructure, A: SuperSeries, X: SuperSeries, sign: int = 1) -> SuperSeries:
    """e^{sign ad_A} X as a finite sum."""
    out = X
    term = X
    k = 1
    while True:
        term = bracket_series(D, A, term).scale(Fraction(sign, k))
        if not term:
            break
        out = out + term
        k += 1
    return out


def _one_minus_exp_over_x(D, A: SuperSeries, X: SuperSeries) -> SuperSeries:
    """((1 - e^{ad_A}) / ad_A) X = -sum_{q>=0} ad_A^q X / (q+1)!."""
    out = SuperSeries.zero(X.spec, X.algebra)
    term = X
    q = 0
    while term:
        out = out - term.scale(Fraction(1, factorial(q + 1)))
        term = bracket_series(D, A, term)
        q += 1
    return out


def gauge_action(D: DGBVStructure, A: SuperSeries, omega: SuperSeries) -> SuperSeries:
    """e^A . omega = e^{ad_A} omega + ((1 - e^{ad_A}) / ad_A) delta A."""
    dA = apply_operator(D.delta, A)
    return exp_ad(D, A, omega) + _one_minus_exp_over_x(D, A, dA)


# ---------------------------------------------------------------------------
# CBH


def _block_decompositions(word: str):
    """Splittings of a word over {a, b} into blocks a^r b^s with r + s >= 1."""
    n = len(word)
    forced = {i for i in range(1, n) if word[i - 1] == "b" and word[i] == "a"}
    optional = [i for i in range(1, n) if i not in forced]
    for k in range(len(optional) + 1):
        for extra in itertools.combinations(optional, k):
            cuts = sorted(forced | set(extra))
            bounds = [0] + cuts + [n]
            blocks = []
            for lo, hi in zip(bounds, bounds[1:]):
                seg = word[lo:hi]
                r = seg.count("a")
                blocks.append((r, len(seg) - r))
            yield blocks


@lru_cache(maxsize=None)
def dynkin_coefficients(n: int) -> dict:
    """Coefficient of each right-nested bracket word of length n in log(e^a e^b)."""
    out = {}
    for letters in itertools.product("ab", repeat=n):
        w = "".join(letters)
        if n >= 2 and w[-1] == w[-2]:
            continue  # [.., u, u] = 0 for an even element u
        c = Fraction(0)
        for blocks in _block_decompositions(w):
            m = len(blocks)
            den = n
            for r, s in blocks:
                den *= factorial(r) * factorial(s)
            c += Fraction((-1) ** (m - 1), m * den)
        if c:
            out[w] = c
    return out


def _word_value(D, A, B, word: str, cache: dict) -> SuperSeries:
    """Right-nested bracket ad_{w1} ... ad_{w_{k-1}} (w_k)."""
    if word in cache:
        return cache[word]
    last = A if word[-1] == "a" else B
    if len(word) == 1:
        val = last
    else:
        inner = _word_value(D, A, B, word[1:], cache)
        op = A if word[0] == "a" else B
        val = bracket_series(D, op, inner) if inner else inner
    cache[word] = val
    return val


def _max_order(A: SuperSeries, B: SuperSeries) -> int:
    lo = min([sum(m) for m in A.terms] + [sum(m) for m in B.terms], default=1)
    return A.spec.order // max(lo, 1)


def cbh(D: DGBVStructure, A: SuperSeries, B: SuperSeries) -> SuperSeries:
    """C with e^A e^B = e^C, from Dynkin's coefficients on right-nested words."""
    for X in (A, B):
        check_gauge_element(X)
    spec, alg = A.spec, A.algebra
    out = SuperSeries.zero(spec, alg)
    cache: dict = {}
    for n in range(1, _max_order(A, B) + 1):
        for w, c in dynkin_coefficients(n).items():
            v = _word_value(D, A, B, w, cache)
            if v:
                out = out + v.scale(c)
    return out


def _serre_terms(p: int, q: int, ends_in_b: bool, strict_last: bool = False):
    """Block data for C'_{p,q} (ends in b) or C''_{p,q} (ends in a).

    ``strict_last`` keeps the condition p_m >= 1 on C'; that drops the order one
    term B, so the default allows p_m = 0.
    """
    if ends_in_b:
        # p_1..p_m sum to p, q_1..q_{m-1} sum to q - 1
        if q < 1:
            return
        for m in range(1, p + q + 1):
            for ps in _compositions_nonneg(p, m):
                if strict_last and ps[-1] < 1:
                    continue
                for qs in _compositions_nonneg(q - 1, m - 1):
                    if all(ps[i] + qs[i] >= 1 for i in range(m - 1)):
                        yield m, ps, list(qs)
    else:
        # p_1..p_{m-1} sum to p - 1, q_1..q_{m-1} sum to q
        if p < 1:
            return
        for m in range(1, p + q + 1):
            for ps in _compositions_nonneg(p - 1, m - 1):
                for qs in _compositions_nonneg(q, m - 1):
                    if all(ps[i] + qs[i] >= 1 for i in range(m - 1)):
                        yield m, list(ps), list(qs)


def _compositions_nonneg(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions_nonneg(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def serre_coefficients(n: int, strict_last: bool = False) -> dict:
    """Word coefficients of C_n = (1/n) sum_{p+q=n} (C'_{p,q} + C''_{p,q}).

    The denominator of C'' is (p_1)!(q_1)!...(q_{m-1})!, the pattern that
    matches the word actually being bracketed.
    """
    out: dict = {}
    for p in range(n + 1):
        q = n - p
        for ends_in_b in (True, False):
            for m, ps, qs in _serre_terms(p, q, ends_in_b, strict_last):
                word = ""
                den = 1
                for i in range(m - 1):
                    word += "a" * ps[i] + "b" * qs[i]
                    den *= factorial(ps[i]) * factorial(qs[i])
                if ends_in_b:
                    word += "a" * ps[m - 1] + "b"
                    den *= factorial(ps[m - 1])
                else:
                    word += "a"
                c = Fraction((-1) ** (m + 1), m * den * n)
                out[word] = out.get(word, 0) + c
    return {w: c for w, c in out.items() if c}


def cbh_serre(D: DGBVStructure, A: SuperSeries, B: SuperSeries,
              strict_last: bool = False) -> SuperSeries:
    """CBH from the C'/C'' block sums (Serre's arrangement of Dynkin's series)."""
    spec, alg = A.spec, A.algebra
    out = SuperSeries.zero(spec, alg)
    cache: dict = {}
    for n in range(1, _max_order(A, B) + 1):
        for w, c in serre_coefficients(n, strict_last).items():
            v = _word_value(D, A, B, w, cache)
            if v:
                out = out + v.scale(c)
    return out


# ---------------------------------------------------------------------------
# oracle: log(exp a exp b) in the truncated free associative algebra


def _free_mul(x: dict, y: dict, top: int) -> dict:
    out: dict = {}
    for u, c in x.items():
        for v, d in y.items():
            if len(u) + len(v) > top:
                continue
            w = u + v
            out[w] = out.get(w, 0) + c * d
    return {w: c for w, c in out.items() if c}


def _free_exp(letter: str, top: int) -> dict:
    return {letter * k: Fraction(1, factorial(k)) for k in range(top + 1)}


def free_log_exp_exp(top: int) -> dict:
    """Words of log(e^a e^b) up to length ``top`` (associative coefficients)."""
    P = _free_mul(_free_exp("a", top), _free_exp("b", top), top)
    X = {w: c for w, c in P.items() if w}
    out: dict = {}
    power = {"": Fraction(1)}
    for k in range(1, top + 1):
        power = _free_mul(power, X, top)
        for w, c in power.items():
            out[w] = out.get(w, 0) + Fraction((-1) ** (k + 1), k) * c
    return {w: c for w, c in out.items() if c}


def cbh_oracle(D: DGBVStructure, A: SuperSeries, B: SuperSeries) -> SuperSeries:
    """Free-algebra log(e^a e^b) mapped to brackets by Dynkin-Specht-Wever."""
    spec, alg = A.spec, A.algebra
    top = _max_order(A, B)
    words = free_log_exp_exp(top)
    out = SuperSeries.zero(spec, alg)
    cache: dict = {}
    for w, c in words.items():
        v = _word_value(D, A, B, w, cache)
        if v:
            out = out + v.scale(c / len(w))
    return out


def group_law_check(D: DGBVStructure, A, B, generators) -> Optional[int]:
    """e^{ad_C} X = e^{ad_A} e^{ad_B} X for C = cbh(A, B); returns a failing index."""
    C = cbh(D, A, B)
    for k, X in enumerate(generators):
        if exp_ad(D, C, X) != exp_ad(D, A, exp_ad(D, B, X)):
            return k
    return None


def cbh_associativity_check(D, A, B, C) -> bool:
    return cbh(D, cbh(D, A, B), C) == cbh(D, A, cbh(D, B, C))


def action_law_check(D, A, B, omega) -> bool:
    """e^{cbh(A,B)} . omega = e^A . (e^B . omega)."""
    return gauge_action(D, cbh(D, A, B), omega) == gauge_action(D, A, gauge_action(D, B, omega))


def exp_inverse_check(D, A, generators) -> Optional[int]:
    """e^{ad_A} e^{-ad_A} = 1 on generators; returns a failing index."""
    for k, X in enumerate(generators):
        if exp_ad(D, A, exp_ad(D, A, X, -1)) != X:
            return k
    return None


# ---------------------------------------------------------------------------
# conjugation identities


@dataclass
class IdentityReport:
    name: str
    passed: bool
    checked: int
    witness: Optional[str] = None

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "checked": self.checked,
                "witness": self.witness}


def basis_generators(D: DGBVStructure, spec, monomials=None) -> list:
    """Constant basis series, and basis elements times the given monomials."""
    alg = D.algebra
    monos = [spec.zero_monomial()] + list(monomials or [])
    return [SuperSeries(spec, alg, {m: {k: 1}}, True) for m in monos for k in range(alg.dim)
            if sum(m) <= spec.order]


def conjugation_identity_check(D, A, B, generators, n_max: int = 3) -> IdentityReport:
    """ad_B ad_A^n = sum_j C(n,j) ad_A^j ad_{(-ad_A)^{n-j} B} and e^{ad_A} ad_B e^{-ad_A} = ad_{e^{ad_A} B}."""
    checked = 0
    negA = A.scale(-1)
    for n in range(1, n_max + 1):
        inner = [ad_power(D, negA, n - j, B) for j in range(n + 1)]
        for k, X in enumerate(generators):
            checked += 1
            lhs = ad(D, B, ad_power(D, A, n, X))
            rhs = series_sum([ad_power(D, A, j, ad(D, inner[j], X)).scale(comb(n, j))
                              for j in range(n + 1)], X.spec, X.algebra)
            if lhs != rhs:
                return IdentityReport("binomial", False, checked, f"n={n}, generator {k}")
    eB = exp_ad(D, A, B)
    for k, X in enumerate(generators):
        checked += 1
        lhs = exp_ad(D, A, ad(D, B, exp_ad(D, A, X, -1)))
        if lhs != ad(D, eB, X):
            return IdentityReport("conjugation", False, checked, f"generator {k}")
    return IdentityReport("ad_conjugation", True, checked)


def differential_conjugation_check(D, A, generators, naive_sum: bool = False) -> IdentityReport:
    """e^{ad_A} d e^{-ad_A} = d + ad_{((1 - e^{ad_A})/ad_A) delta A}.

    With ``naive_sum`` the series d + sum_q ad_{ad_A^q delta A}/(q+1)!
    is tested instead.
    """
    dA = apply_operator(D.delta, A)
    if naive_sum:
        spec, alg = A.spec, A.algebra
        K = SuperSeries.zero(spec, alg)
        term, q = dA, 0
        while term:
            K = K + term.scale(Fraction(1, factorial(q + 1)))
            term = bracket_series(D, A, term)
            q += 1
    else:
        K = _one_minus_exp_over_x(D, A, dA)
    checked = 0
    for k, X in enumerate(generators):
        checked += 1
        lhs = exp_ad(D, A, apply_operator(D.delta, exp_ad(D, A, X, -1)))
        rhs = apply_operator(D.delta, X) + ad(D, K, X)
        if lhs != rhs:
            return IdentityReport("differential_conjugation", False, checked, f"generator {k}")
    return IdentityReport("differential_conjugation", True, checked)


def conjugate_differential_check(D, A, omega, generators) -> IdentityReport:
    """e^A delta_omega e^{-A} = delta_{e^A . omega} on the given generators."""
    w2 = gauge_action(D, A, omega)
    checked = 0
    for k, X in enumerate(generators):
        checked += 1
        Y = exp_ad(D, A, X, -1)
        lhs = exp_ad(D, A, apply_operator(D.delta, Y) + ad(D, omega, Y))
        rhs = apply_operator(D.delta, X) + ad(D, w2, X)
        if lhs != rhs:
            return IdentityReport("conjugate_differential", False, checked, f"generator {k}")
    return IdentityReport("conjugate_differential", True, checked)


# ---------------------------------------------------------------------------
# random admissible elements


def random_gauge_element(rng: random.Random, D: DGBVStructure, spec, terms: int = 4,
                         in_im_Delta: bool = True) -> SuperSeries:
    """Algebra-odd series without constant term, in (Im Delta)[[t]] by default."""
    alg = D.algebra
    for _ in range(50):
        if in_im_Delta:
            s = random_series(rng, spec, alg, terms=terms, parity=0, min_order=1)
            A = apply_operator(D.Delta, s)
        else:
            A = random_series(rng, spec, alg, terms=terms, parity=1, min_order=1)
        if A:
            return A
    return SuperSeries.zero(spec, alg)


# ---------------------------------------------------------------------------
# gauge equivalence and invariance of the potential


def construct_gauge_equivalence(D: DGBVStructure, x: MCSolution, xbar: MCSolution,
                                pivot: str = "left") -> SuperSeries:
    """A in (Im Delta)[[t]] with e^A . x = xbar, built order by order."""
    require_q(D)
    if x.spec != xbar.spec or x.kind != xbar.kind:
        raise ContractError("solutions must share parameters and kind")
    spec, alg = x.spec, D.algebra
    lin = x.gamma1.order_part(1) - xbar.gamma1.order_part(1)
    dD = D.solver("dD", pivot)
    for m, c in lin.terms.items():
        if dD.solve(c) is None:
            raise ContractError(f"linear terms represent different classes at "
                                f"{spec.format_monomial(m)}", c)
    A = SuperSeries.zero(spec, alg)
    for n in range(1, spec.order + 1):
        cur = gauge_action(D, A, x.gamma) if A else x.gamma
        diff = (cur - xbar.gamma).order_part(n)
        if not diff:
            continue
        low = (cur - xbar.gamma).truncate(n - 1)
        if low:
            raise ConsistencyError(f"order {n}: lower orders do not agree")
        zt = {}
        for m in sorted(diff.terms, key=monomial_key):
            z = dD.solve(diff.terms[m])
            if z is None:
                raise ConsistencyError(f"order {n}: difference not in Im delta Delta")
            zt[m] = z
        An = apply_operator(D.Delta, SuperSeries(spec, alg, zt, True))
        A = cbh(D, An, A) if A else An
    if gauge_action(D, A, x.gamma) != xbar.gamma:
        raise ConsistencyError("constructed gauge element does not map x to xbar")
    return A


def linear_part(f: SuperSeries) -> SuperSeries:
    return f.order_part(1)


@dataclass
class GaugeInvarianceReport:
    finite: bool
    mc_preserved: bool
    linearized: bool
    chain: dict
    witness: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.finite and self.mc_preserved and self.linearized

    def as_dict(self):
        return {"finite": self.finite, "mc_preserved": self.mc_preserved,
                "linearized": self.linearized, "chain": dict(self.chain),
                "witness": self.witness}


def potential_of(D, gamma: SuperSeries, I) -> SuperSeries:
    """Second form of the potential, with the linear part of gamma itself."""
    return potential_form2(D, gamma, linear_part(gamma), I)


def check_phi_gauge_invariance(D: DGBVStructure, sol: MCSolution, A: SuperSeries,
                               I=None) -> GaugeInvarianceReport:
    I = integral_vector(D, I)
    check_gauge_element(A, D)
    G = sol.gamma
    G1 = sol.gamma1
    spec, alg = G.spec, D.algebra
    mul = series_multiply
    Gt = gauge_action(D, A, G)
    phi0 = potential_of(D, G, I)
    phi1 = potential_of(D, Gt, I)
    finite = phi0 == phi1
    mc_ok = not mc_residual(D, Gt)
    # linearized chain
    AG = bracket_series(D, A, G)
    dA = apply_operator(D.delta, A)
    L = AG - dA
    G2 = mul(G, G)
    ig = lambda f: integrate(f, I)
    variation = ig(mul(G2, L).scale(Fraction(1, 2))
                   - mul(L - linear_part(L), G2).scale(Fraction(1, 4))
                   - mul(mul(G - G1, G), L).scale(Fraction(1, 2)))
    chain = {
        "int G^2 [A.G] = 0": not ig(mul(G2, AG)),
        "int G^2 dA = 0": not ig(mul(G2, dA)),
        "int G [G.G] A = 0": not ig(mul(mul(G, bracket_series(D, G, G)), A)),
        "int G^2 dA_1 = 0": not ig(mul(G2, apply_operator(D.delta, linear_part(A)))),
        "int G_1 G ([A.G] - dA) = 0": not ig(mul(mul(G1, G), L)),
        "[A.G] has no linear term": not linear_part(AG),
        "variation = 0": not variation,
    }
    witness = None
    if not finite:
        d = phi1 - phi0
        witness = f"Phi changes at {spec.format_monomial(min(d.terms, key=monomial_key))}"
    elif not all(chain.values()):
        witness = next(k for k, v in chain.items() if not v)
    return GaugeInvarianceReport(finite, mc_ok, all(chain.values()), chain, witness)
