import random

import pytest

from dgbv.algebra import StructureError
from dgbv.mc import (DeformedDifferential, check_deformed_q, class_coords, cup_product,
                     deformed_product, deformed_product_coords, extend_class, mc_residual,
                     phi, phi_inverse, random_series, shifted_gamma1, solve_mc_epsilon,
                     solve_mc_one_param, solve_mc_universal, verify_solution)
from dgbv.series import SuperSeries, apply_operator
from dgbv.structure import ContractError, cohomology_basis

from conftest import structure, universal

Q_FIX = [("pd4()", 6), ("ddbar(2)", 6), ("tensor(pd4(),trivial(1))", 4), ("trivial(2)", 6)]


@pytest.mark.parametrize("expr,N", Q_FIX)
def test_universal_solution_normalized(expr, N):
    sol = universal(expr, N)
    chk = verify_solution(sol)
    assert chk.passed, chk
    assert not mc_residual(sol.structure, sol.gamma)


def test_pd4_gamma_terms(pd4_sol):
    assert pd4_sol.gamma.format() == ("(1*1)*t0 + (1*x)*t1 + (1*y)*t2 + (1*X)*t3 + (1*Y)*t4"
                                      " + (1*w)*t5 + (-1*b)*t1*t2")


def test_one_param_and_epsilon(pd4):
    sol = solve_mc_one_param(pd4, "x", 6)
    assert verify_solution(sol).passed
    sol0 = solve_mc_one_param(pd4, "1", 6)
    assert sol0.gamma == sol0.gamma1   # x = 1 is undeformed
    T = structure("tensor(pd4(),trivial(1))")
    cb = cohomology_basis(T)
    odd = next(a for a, p in enumerate(cb.parities) if p)
    eps = solve_mc_epsilon(T, odd)
    assert verify_solution(eps).passed
    with pytest.raises(StructureError):
        solve_mc_one_param(T, odd, 4)
    with pytest.raises(StructureError):
        solve_mc_epsilon(pd4, "x")


def test_non_harmonic_class_rejected(pd4):
    i = pd4.algebra.basis.index
    with pytest.raises(ContractError):
        solve_mc_one_param(pd4, {i("v"): 1}, 3)


def test_bv24_rejected():
    with pytest.raises(StructureError):
        solve_mc_universal(structure("bv(2,4)"), order=6)


@pytest.mark.parametrize("expr,N", Q_FIX[:3])
def test_deformed_q(expr, N):
    rep = check_deformed_q(structure(expr), universal(expr, N), trials=3, seed=1)
    assert rep.passed, rep.as_dict()


def test_extension_is_closed(pd4, pd4_sol):
    dG = DeformedDifferential(pd4, pd4_sol.gamma)
    for e in pd4_sol.basis.representatives:
        y, z = extend_class(pd4, pd4_sol, e, return_z=True)
        assert not dG(y)
        assert y - SuperSeries(pd4_sol.spec, pd4.algebra, {pd4_sol.spec.zero_monomial(): e}) \
            == apply_operator(pd4.Delta, z)


def _random_coords(rng, spec, k):
    out = []
    for _ in range(k):
        terms = {}
        for _ in range(3):
            m = rng.choice(spec.all_monomials())
            terms[m] = rng.randint(-3, 3)
        out.append(SuperSeries(spec, None, terms))
    return out


@pytest.mark.parametrize("expr,N", [("pd4()", 6), ("tensor(pd4(),trivial(1))", 4)])
def test_phi_round_trip(expr, N):
    D, sol = structure(expr), universal(expr, N)
    rng = random.Random(11)
    k = len(sol.basis)
    for _ in range(15):
        c = _random_coords(rng, sol.spec, k)
        back, _ = phi_inverse(D, sol, phi(D, sol, c))
        assert back == c


def test_phi_inverse_contract(pd4, pd4_sol):
    i = pd4.algebra.basis.index
    w = SuperSeries(pd4_sol.spec, pd4.algebra, {pd4_sol.spec.zero_monomial(): {i("v"): 1}})
    with pytest.raises(ContractError):
        phi_inverse(pd4, pd4_sol, w)


def test_pd4_deformed_products(pd4, pd4_sol):
    x = deformed_product(pd4, pd4_sol, "x", "x")
    assert [c.format() for c in x] == ["0", "0", "0", "0", "2*t2", "0"]
    xy = deformed_product(pd4, pd4_sol, "x", "y")
    assert [c.format() for c in xy] == ["0", "0", "0", "2*t2", "2*t1", "0"]


@pytest.mark.parametrize("expr,N", [("pd4()", 6), ("tensor(pd4(),trivial(1))", 4)])
def test_product_laws(expr, N):
    D, sol = structure(expr), universal(expr, N)
    k = len(sol.basis)
    par = sol.basis.parities
    P = {(a, b): deformed_product(D, sol, a, b) for a in range(k) for b in range(k)}
    for a in range(k):
        assert P[0, a] == class_coords(sol, a)
        for b in range(k):
            s = -1 if par[a] and par[b] else 1
            assert P[a, b] == [c.scale(s) for c in P[b, a]]
            base = [c.order_part(0).coefficient(sol.spec.zero_monomial()) for c in P[a, b]]
            assert base == cup_product(D, sol.basis, a, b)
    for a in range(1, k):
        for b in range(1, k):
            for c in range(1, k):
                lhs = deformed_product_coords(D, sol, P[a, b], class_coords(sol, c))
                rhs = deformed_product_coords(D, sol, class_coords(sol, a), P[b, c])
                assert lhs == rhs


def test_shifted_gamma1_gives_other_solution():
    T = structure("tensor(pd4(),trivial(1))")
    s1 = universal("tensor(pd4(),trivial(1))", 4)
    s2 = solve_mc_universal(T, order=4, pivot="right", gamma1=shifted_gamma1(T, order=4, seed=1))
    assert verify_solution(s2).passed
    assert s1.gamma != s2.gamma
