import pytest

from dgbv.algebra import LinearOperator
from dgbv.morphisms import (DGBVMorphism, augmented_inclusion, check_functoriality,
                            identify_frobenius, image_basis, induced_map, mutate_morphism,
                            pushforward_solution, require_morphism, validate_morphism)
from dgbv.mc import solve_mc_universal, verify_solution
from dgbv.structure import ContractError, DGBVStructure, cohomology_basis

from conftest import structure, universal


@pytest.fixture(scope="module")
def inclusion():
    return augmented_inclusion(structure("pd4()"), structure("acyclic(2)"))


def doubled_Delta(D):
    basis = D.algebra.basis
    imgs = {i: {k: 2 * c for k, c in D.D({i: 1}).items()} for i in range(D.dim)}
    Delta2 = LinearOperator.from_images(basis, imgs, D.Delta.degree_shift, "2Delta")
    return DGBVStructure(D.algebra, D.delta, Delta2, D.name + "'", D.integral)


@pytest.mark.parametrize("expr", ["pd4()", "ddbar(2)", "tensor(pd4(),trivial(1))"])
def test_identity_is_quasi_iso(expr):
    D = structure(expr)
    f = DGBVMorphism.identity(D)
    assert validate_morphism(f).passed
    cert = induced_map(f)
    assert cert.is_quasi_iso and cert.maps_harmonic and cert.maps_im_dD


def test_inclusion_quasi_iso(inclusion):
    T, f = inclusion
    assert validate_morphism(f).passed
    cert = induced_map(f)
    assert cert.is_quasi_iso
    tb = image_basis(f)
    assert len(tb) == len(cohomology_basis(T))


def test_doubled_Delta_rejected(pd4):
    P = doubled_Delta(pd4)
    f = DGBVMorphism(pd4, P, [{i: 1} for i in range(pd4.dim)], "id'")
    rep = validate_morphism(f)
    assert not rep.passed
    assert "commutes_Delta" in [r.name for r in rep.failures()]
    with pytest.raises(ContractError):
        require_morphism(f)


def test_mutated_morphism_rejected(inclusion):
    T, f = inclusion
    lab = f.source.algebra.basis.labels
    # send x to x + y: degrees no longer match
    g = mutate_morphism(f, lab.index("x"), next(iter(f.columns[lab.index("y")])))
    rep = validate_morphism(g)
    assert not rep.passed and rep.failures()


def test_pushforward_normalized(inclusion):
    T, f = inclusion
    sol = universal("pd4()", 5)
    down = pushforward_solution(f, sol, image_basis(f, sol.basis))
    assert verify_solution(down).passed


@pytest.mark.parametrize("cls", ["x", "y", "1"])
def test_functoriality_inclusion(inclusion, cls):
    T, f = inclusion
    rep = check_functoriality(f, cls, order=5)
    assert rep.passed, rep.witness
    assert rep.normalized_downstream and rep.checked == 36


def test_functoriality_ddbar():
    _, f = augmented_inclusion(structure("ddbar(2)"), structure("acyclic(2)"))
    rep = check_functoriality(f, "1.x", order=4)
    assert rep.passed, rep.witness


def test_identify_frobenius(inclusion):
    T, f = inclusion
    rep = identify_frobenius(f, order=5)
    assert rep.integrals_compatible and not rep.note
    assert rep.phi_equal and rep.phi_resolved_equal, rep.witness
    assert rep.source_phi == rep.target_phi
    assert all(not c for row in rep.pairing_discrepancy for c in row)


def test_identify_incompatible_integral(inclusion):
    T, f = inclusion
    I2 = {k: 2 * c for k, c in T.integral.items()}
    rep = identify_frobenius(f, I_target=I2, order=4)
    assert not rep.integrals_compatible
    assert rep.note == "identification holds up to pairing rescaling"
    assert any(c for row in rep.pairing_discrepancy for c in row)
    assert not rep.phi_equal
