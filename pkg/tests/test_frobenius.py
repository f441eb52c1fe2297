from fractions import Fraction

import pytest

from dgbv.algebra import StructureError
from dgbv.frobenius import (check_unit_axiom, check_wdvv, cubic_term_oracle, deformed_gram,
                            frobenius_compatibility, frobenius_report, gram, pairing_well_defined,
                            potential, third_derivatives, validate_integral)
from dgbv.series import SuperSeries, integrate, series_multiply

from conftest import structure, universal

NICE = [("trivial(2)", 6), ("pd4()", 6), ("ddbar(2)", 5), ("tensor(pd4(),trivial(1))", 4),
        ("tensor(ddbar(1),trivial(2))", 5)]


@pytest.mark.parametrize("expr,N", NICE)
def test_frobenius_manifold(expr, N):
    D = structure(expr)
    rep = frobenius_report(D, universal(expr, N))
    assert rep.forms_agree and rep.cubic_matches
    assert rep.unit_axiom_pass, rep.unit_witness
    assert rep.wdvv_pass, rep.wdvv_witness
    assert rep.wdvv_checked == len(rep.Phi.spec.odd) ** 4


@pytest.mark.parametrize("expr", ["pd4()", "ddbar(2)", "tensor(pd4(),trivial(1))"])
def test_integral_adjointness(expr):
    D = structure(expr)
    assert validate_integral(D).passed


def test_integral_rejection(pd4):
    # an integral seeing c = delta b breaks adjointness
    bad = dict(pd4.integral)
    bad[pd4.algebra.basis.index("c")] = 1
    rep = validate_integral(pd4, bad)
    assert not rep.passed and rep.witness is not None


def test_gram_and_pairing(pd4):
    G = gram(pd4)
    assert G.nice and G.supersymmetric
    assert pairing_well_defined(pd4)
    assert frobenius_compatibility(pd4, G) is None


def test_deformed_gram_constant(pd4_sol, pd4):
    # the pairing on deformed classes is the flat metric
    G = gram(pd4, None, pd4_sol.basis)
    dg = deformed_gram(pd4, pd4_sol)
    for a in range(G.n):
        for b in range(G.n):
            assert dg[a][b] == SuperSeries.constant(pd4_sol.spec, None, G.g[a][b])


def test_cubic_term_oracle(pd4, pd4_sol):
    cub = cubic_term_oracle(pd4, pd4_sol.basis, pd4.integral, pd4_sol.spec)
    g1 = pd4_sol.gamma1
    direct = integrate(series_multiply(series_multiply(g1, g1), g1), pd4.integral)
    assert cub == direct.scale(Fraction(1, 6)).truncate(pd4_sol.spec.order)


def test_pd4_potential_terms(pd4_sol, pd4):
    Phi = potential(pd4, pd4_sol).Phi
    assert Phi.order_part(3), "cubic term present"
    assert Phi.order_part(4), "the first quantum correction is quartic"


def test_perturbed_potential_fails_wdvv(pd4, pd4_sol):
    rep = potential(pd4, pd4_sol)
    spec = pd4_sol.spec
    G = gram(pd4, None, pd4_sol.basis)
    m = (0, 2, 0, 1, 0, 0)   # t1^2 t3
    bad = rep.Phi + SuperSeries(spec, None, {m: 1})
    ok, witness, _ = check_wdvv(bad, G)
    assert not ok and witness is not None
    assert check_wdvv(rep.Phi, G)[0]


def test_perturbed_potential_fails_unit_axiom(pd4, pd4_sol):
    rep = potential(pd4, pd4_sol)
    G = gram(pd4, None, pd4_sol.basis)
    bad = rep.Phi + SuperSeries(pd4_sol.spec, None, {(1, 1, 1, 0, 0, 0): 1})
    assert not check_unit_axiom(bad, G)[0]


def test_dropped_sign_fails_on_odd_classes():
    expr, N = "tensor(ddbar(1),trivial(2))", 5
    D = structure(expr)
    sol = universal(expr, N)
    Phi = potential(D, sol).Phi
    G = gram(D, None, sol.basis)
    T = third_derivatives(Phi)
    assert check_wdvv(Phi, G, T)[0]
    ok, witness, _ = check_wdvv(Phi, G, T, signed=False)
    assert not ok and witness is not None


def test_wdvv_needs_nice_integral(pd4, pd4_sol):
    rep = potential(pd4, pd4_sol)
    G = gram(pd4, {0: 1}, pd4_sol.basis)
    if G.nice:
        pytest.skip("degenerate pairing expected")
    with pytest.raises(StructureError):
        check_wdvv(rep.Phi, G)
