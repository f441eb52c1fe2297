import random
from fractions import Fraction

import pytest

from dgbv.gauge import (ShiftedDGLA, action_law_check, basis_generators, bracket_series, cbh,
                        cbh_associativity_check, cbh_oracle, cbh_serre, check_gauge_element,
                        check_phi_gauge_invariance, conjugate_differential_check,
                        conjugation_identity_check, construct_gauge_equivalence,
                        differential_conjugation_check, dynkin_coefficients, exp_ad,
                        exp_inverse_check, free_log_exp_exp, gauge_action, group_law_check,
                        random_gauge_element, serre_coefficients)
from dgbv.mc import mc_residual, random_series, shifted_gamma1, solve_mc_universal
from dgbv.series import ParamSpec, SuperSeries, apply_operator
from dgbv.structure import ContractError

from conftest import structure, universal

SPEC = ParamSpec(("s", "u"), (0, 0), 4)


def pair(rng, D, spec=SPEC, in_im_Delta=False):
    return (random_gauge_element(rng, D, spec, in_im_Delta=in_im_Delta),
            random_gauge_element(rng, D, spec, in_im_Delta=in_im_Delta))


def test_dynkin_low_orders():
    # right-nested words: [a, b] appears as both ab and -ba
    c = dynkin_coefficients(2)
    assert c["ab"] - c.get("ba", 0) == Fraction(1, 2)
    assert all(not w.endswith(w[-1] * 2) for n in range(2, 6) for w in dynkin_coefficients(n))


def test_free_log_low_orders():
    w = free_log_exp_exp(2)
    assert w["a"] == w["b"] == 1
    assert w["ab"] == Fraction(1, 2) and w["ba"] == Fraction(-1, 2)


def test_cbh_basic(pd4):
    rng = random.Random(1)
    A, B = pair(rng, pd4)
    zero = SuperSeries.zero(SPEC, pd4.algebra)
    assert cbh(pd4, A, zero) == A and cbh(pd4, zero, B) == B
    second = A + B + bracket_series(pd4, A, B).scale(Fraction(1, 2))
    assert cbh(pd4, A, B).truncate(2) == second.truncate(2)


@pytest.mark.parametrize("expr", ["pd4()", "tensor(pd4(),trivial(1))"])
def test_cbh_matches_oracle(expr):
    D = structure(expr)
    rng = random.Random(7)
    for _ in range(5):
        A, B = pair(rng, D)
        C = cbh(D, A, B)
        assert C == cbh_oracle(D, A, B)
        assert C == cbh_serre(D, A, B)
        gens = basis_generators(D, SPEC)
        assert group_law_check(D, A, B, gens) is None


def test_serre_strict_last_block_differs():
    # requiring p_m >= 1 on the last block loses terms
    assert serre_coefficients(4) != serre_coefficients(4, strict_last=True)
    D = structure("pd4()")
    rng = random.Random(3)
    misses = 0
    for _ in range(5):
        A, B = pair(rng, D)
        misses += cbh_serre(D, A, B, strict_last=True) != cbh_oracle(D, A, B)
    assert misses > 0


def test_conjugation_identities_on_generators(pd4):
    rng = random.Random(11)
    gens = basis_generators(pd4, SPEC, [(1, 0)])
    for _ in range(3):
        A, B = pair(rng, pd4)
        assert conjugation_identity_check(pd4, A, B, gens).passed
        assert differential_conjugation_check(pd4, A, gens).passed
        omega = random_series(rng, SPEC, pd4.algebra, terms=4, parity=0, min_order=1)
        assert conjugate_differential_check(pd4, A, omega, gens).passed


def test_naive_sum_fails(pd4):
    # the series without alternating signs fails; the closed form holds
    rng = random.Random(5)
    gens = basis_generators(pd4, SPEC)
    fails = 0
    for _ in range(5):
        A, _ = pair(rng, pd4)
        fails += not differential_conjugation_check(pd4, A, gens, naive_sum=True).passed
    assert fails > 0


def test_gauge_action_trivial_cases(pd4, pd4_sol):
    G = pd4_sol.gamma
    zero = SuperSeries.zero(G.spec, pd4.algebra)
    assert gauge_action(pd4, zero, G) == G
    rng = random.Random(2)
    A = random_gauge_element(rng, pd4, G.spec, in_im_Delta=False)
    # kernel of delta: delta A = 0 leaves only the adjoint action
    dA = apply_operator(pd4.delta, A)
    if not dA:
        assert gauge_action(pd4, A, G) == exp_ad(pd4, A, G)
    assert gauge_action(pd4, A, zero) == gauge_action(pd4, A, zero)


def test_gauge_element_contract(pd4, pd4_sol):
    spec = pd4_sol.spec
    const = SuperSeries.constant(spec, pd4.algebra, {pd4.algebra.basis.index("b"): 1})
    with pytest.raises(ContractError):
        check_gauge_element(const, pd4)
    even = random_series(random.Random(0), spec, pd4.algebra, terms=3, parity=0, min_order=1)
    with pytest.raises(ContractError):
        check_gauge_element(even, pd4)


def test_group_structure(pd4):
    rng = random.Random(13)
    gens = basis_generators(pd4, SPEC)
    omega = random_series(rng, SPEC, pd4.algebra, terms=4, parity=0, min_order=1)
    for _ in range(3):
        A, B = pair(rng, pd4)
        C = random_gauge_element(rng, pd4, SPEC, in_im_Delta=False)
        assert cbh_associativity_check(pd4, A, B, C)
        assert action_law_check(pd4, A, B, omega)
        assert exp_inverse_check(pd4, A, gens) is None


@pytest.mark.parametrize("expr", ["pd4()", "tensor(pd4(),trivial(1))", "bv(1,3)"])
def test_shifted_dgla(expr):
    res = ShiftedDGLA(structure(expr)).check()
    assert res and all(r.passed for r in res)


@pytest.mark.parametrize("expr,N", [("pd4()", 5), ("tensor(pd4(),trivial(1))", 4)])
def test_mc_preserved_and_phi_invariant(expr, N):
    D = structure(expr)
    sol = universal(expr, N)
    rng = random.Random(17)
    for _ in range(3):
        A = random_gauge_element(rng, D, sol.spec)
        assert not mc_residual(D, gauge_action(D, A, sol.gamma))
        rep = check_phi_gauge_invariance(D, sol, A)
        assert rep.passed, rep.witness
        assert all(rep.chain.values())


def test_equivalence_of_normalized_solutions():
    expr, N = "tensor(pd4(),trivial(1))", 4
    T = structure(expr)
    x = universal(expr, N)
    xbar = solve_mc_universal(T, order=N, pivot="right",
                              gamma1=shifted_gamma1(T, order=N, seed=3))
    assert x.gamma != xbar.gamma
    A = construct_gauge_equivalence(T, x, xbar)
    check_gauge_element(A, T)
    assert gauge_action(T, A, x.gamma) == xbar.gamma
    assert not construct_gauge_equivalence(T, x, x)


def test_equivalence_rejects_different_classes(pd4):
    x = universal("pd4()", 4)
    cb = x.basis
    # swap two class representatives so the linear terms differ in cohomology
    reps = list(cb.representatives)
    i, j = cb.names.index("x"), cb.names.index("y")
    g1 = dict(x.gamma1.terms)
    mi = next(m for m, v in g1.items() if v == reps[i])
    mj = next(m for m, v in g1.items() if v == reps[j])
    g1[mi], g1[mj] = g1[mj], g1[mi]
    other = solve_mc_universal(pd4, order=4, gamma1=SuperSeries(x.spec, pd4.algebra, g1, True))
    with pytest.raises(ContractError):
        construct_gauge_equivalence(pd4, x, other)
