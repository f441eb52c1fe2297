"""Command-line driver.

Exit codes: 0 when every check passes, 1 when checks ran and some failed,
2 when the input could not be used.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from importlib import resources

from . import __version__
from .algebra import StructureError
from .document import DocumentError, load, parse, structure_to_text
from .fixtures import parse_fixture
from .frobenius import frobenius_report, gram, potential, validate_integral
from .gauge import (basis_generators, cbh, cbh_oracle, check_phi_gauge_invariance,
                    conjugate_differential_check, conjugation_identity_check,
                    differential_conjugation_check, random_gauge_element)
from .mc import solve_mc_one_param, solve_mc_universal, verify_solution
from .morphisms import check_functoriality, identify_frobenius, induced_map, validate_morphism
from .report import RunReport, emit_report
from .structure import ConsistencyError, ContractError, check_q_condition, cohomology_basis, validate_dgbv

ORDER_ENV = "DGBV_ORDER"
DEFAULT_ORDER = 6
EXAMPLES = ("trivial(2)", "bv(1,3)", "bv(2,4)", "koszul(x1^2,x2^2)", "acyclic(2)", "ddbar(2)",
            "pd4()", "tensor(pd4(),trivial(1))", "sum(pd4(),acyclic(2))")


class InputError(Exception):
    pass


def data_file(name: str) -> str:
    """Path of a document shipped with the package (e.g. ``pd4.dgbv``)."""
    return str(resources.files("dgbv") / "data" / name)


# ---------------------------------------------------------------------------
# input resolution


def _document(args):
    if args.fixture and args.input:
        raise InputError("give either a document path or --fixture, not both")
    if args.fixture:
        try:
            D = parse_fixture(args.fixture)
        except (StructureError, ValueError) as e:
            raise InputError(f"bad fixture expression: {e}") from None
        return parse(structure_to_text(D))
    if not args.input:
        raise InputError("no input: give a document path or --fixture EXPR")
    if args.input == "-":
        return parse(sys.stdin.read())
    if not os.path.exists(args.input):
        raise InputError(f"no such file: {args.input}")
    return load(args.input)


def _order(args, doc) -> int:
    if args.order is not None:
        return args.order
    if "order" in doc.directives:
        return doc.directives["order"]
    env = os.environ.get(ORDER_ENV)
    if env:
        if not env.isdigit() or not 1 <= int(env) <= 64:
            raise InputError(f"{ORDER_ENV} must be an integer between 1 and 64")
        return int(env)
    return DEFAULT_ORDER


def _structure(args, doc):
    return doc.structure(getattr(args, "algebra", None))


def _class(args, doc):
    return getattr(args, "cls", None) or doc.directives.get("class")


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, doc, rep: RunReport):
    D = _structure(args, doc)
    v = validate_dgbv(D, with_q=False)
    for a in v.axioms:
        rep.add("axiom " + a.name, a.passed, checked=a.checked,
                witness=list(a.witness) if a.witness is not None else None)
    if D.integral is not None:
        ir = validate_integral(D)
        rep.add("integral", ir.passed, **ir.as_dict())


def cmd_qcheck(args, doc, rep):
    D = _structure(args, doc)
    q = check_q_condition(D)
    d = q.as_dict()
    rep.add("q_condition", q.equalities_hold and q.consistent, **d)


def cmd_cohomology(args, doc, rep):
    D = _structure(args, doc)
    cb = cohomology_basis(D)
    classes = [{"name": n, "degree": g, "representative": r} for n, g, r in cb.describe()]
    rep.add("cohomology", None, dimension=len(cb), classes=classes)
    if D.integral is not None:
        G = gram(D, None, cb)
        rep.add("pairing", G.nice, **G.as_dict())


def cmd_solve_mc(args, doc, rep):
    D = _structure(args, doc)
    order = rep.header["order"]
    cls = _class(args, doc)
    if cls:
        sol = solve_mc_one_param(D, cls, order)
    else:
        sol = solve_mc_universal(D, order=order)
    chk = verify_solution(sol)
    terms = {}
    for n, ms in sorted(sol.coefficient_orders().items()):
        part = sol.gamma.order_part(n)
        terms[str(n)] = part.format()
    rep.add("solution", None, kind=sol.kind, parameters=list(sol.spec.names), gamma=terms)
    rep.add("verification", chk.passed, residual_zero=chk.residual_zero,
            linear_harmonic=chk.linear_harmonic, higher_in_im_Delta=chk.higher_in_im_Delta,
            B_consistent=chk.B_consistent, t0_linear_only=chk.t0_linear_only, witness=chk.witness)


def _frobenius(args, doc, rep, wdvv: bool):
    D = _structure(args, doc)
    if D.integral is None:
        raise InputError("the algebra declares no integral")
    sol = solve_mc_universal(D, order=rep.header["order"])
    r = frobenius_report(D, sol, wdvv=wdvv) if wdvv else potential(D, sol, strict=False)
    rep.add("potential", r.forms_agree and r.cubic_matches is not False, Phi=r.Phi.format(),
            parameters=list(sol.spec.names), forms_agree=r.forms_agree,
            first_difference=r.first_difference, cubic_matches=r.cubic_matches)
    if wdvv:
        rep.add("unit_axiom", r.unit_axiom_pass,
                witness=list(r.unit_witness) if r.unit_witness else None)
        rep.add("wdvv", r.wdvv_pass, quadruples=r.wdvv_checked,
                witness=list(r.wdvv_witness) if r.wdvv_witness else None)


def cmd_potential(args, doc, rep):
    _frobenius(args, doc, rep, wdvv=False)


def cmd_wdvv(args, doc, rep):
    _frobenius(args, doc, rep, wdvv=True)


def cmd_gauge_check(args, doc, rep):
    D = _structure(args, doc)
    seed, trials = rep.header["seed"], rep.header["trials"]
    rng = random.Random(seed)
    sol = solve_mc_universal(D, order=rep.header["order"])
    spec = sol.spec
    inv, mc_ok, lin = [], [], []
    for _ in range(trials):
        A = random_gauge_element(rng, D, spec)
        g = check_phi_gauge_invariance(D, sol, A) if D.integral is not None else None
        if g is not None:
            inv.append(g.finite)
            mc_ok.append(g.mc_preserved)
            lin.append(g.linearized)
    if D.integral is not None:
        rep.add("phi_invariance", all(inv), trials=trials, finite=inv)
        rep.add("linearized_chain", all(lin), trials=trials, passed=lin)
    else:
        from .gauge import gauge_action
        from .mc import mc_residual
        rng2 = random.Random(seed)
        mc_ok = [not mc_residual(D, gauge_action(D, random_gauge_element(rng2, D, spec), sol.gamma))
                 for _ in range(trials)]
    rep.add("mc_preserved", all(mc_ok), trials=trials, passed=mc_ok)
    agree = []
    for _ in range(trials):
        A = random_gauge_element(rng, D, spec, in_im_Delta=False)
        B = random_gauge_element(rng, D, spec, in_im_Delta=False)
        agree.append(cbh(D, A, B) == cbh_oracle(D, A, B))
    rep.add("cbh_oracle", all(agree), trials=trials, passed=agree)
    gens = basis_generators(D, spec)
    A = random_gauge_element(rng, D, spec, in_im_Delta=False)
    B = random_gauge_element(rng, D, spec, in_im_Delta=False)
    for r in (conjugation_identity_check(D, A, B, gens), differential_conjugation_check(D, A, gens),
              conjugate_differential_check(D, A, sol.gamma, gens)):
        rep.add(r.name, r.passed, checked=r.checked, witness=r.witness)


def cmd_functoriality(args, doc, rep):
    f = doc.morphism(args.morphism)
    v = validate_morphism(f)
    rep.add("morphism", v.passed, **v.as_dict())
    if not v.passed:
        return
    cls = _class(args, doc)
    cb = cohomology_basis(f.source)
    if cls:
        classes = [cb.class_index(cls)]
    else:
        classes = [a for a, p in enumerate(cb.parities) if p == 0]
    for a in classes:
        r = check_functoriality(f, a, order=rep.header["order"])
        rep.add(f"functoriality {cb.names[a]}", r.passed, **r.as_dict())


def cmd_identify(args, doc, rep):
    f = doc.morphism(args.morphism)
    v = validate_morphism(f)
    rep.add("morphism", v.passed, **v.as_dict())
    if not v.passed:
        return
    cert = induced_map(f)
    rep.add("induced_map", cert.is_quasi_iso, **cert.as_dict())
    if not cert.is_quasi_iso:
        return
    r = identify_frobenius(f, order=rep.header["order"])
    d = r.as_dict()
    d["source_phi"] = r.source_phi.format() if r.source_phi is not None else None
    d["target_phi"] = r.target_phi.format() if r.target_phi is not None else None
    rep.add("identification", r.passed, **d)


COMMANDS = {
    "validate": cmd_validate, "qcheck": cmd_qcheck, "cohomology": cmd_cohomology,
    "solve-mc": cmd_solve_mc, "potential": cmd_potential, "wdvv": cmd_wdvv,
    "gauge-check": cmd_gauge_check, "functoriality": cmd_functoriality,
    "identify": cmd_identify,
}


# ---------------------------------------------------------------------------
# argument parsing


def _positive(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _nonneg(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("expected a nonnegative integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dgbv", description="Exact DGBV deformation computations.")
    p.add_argument("--version", action="version", version=f"dgbv {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("input", nargs="?", help="document path, or - for stdin")
        s.add_argument("--fixture", help="built-in structure expression, e.g. 'pd4()'")
        s.add_argument("--algebra", help="algebra name inside the document")
        s.add_argument("--order", type=_positive, help=f"truncation order (env {ORDER_ENV})")
        s.add_argument("--format", choices=("text", "jsonl"), default="text")
        if name in ("solve-mc", "functoriality"):
            s.add_argument("--class", dest="cls", help="class label to deform along")
        if name == "gauge-check":
            s.add_argument("--trials", type=_positive, default=None)
            s.add_argument("--seed", type=_nonneg, default=None)
        if name in ("functoriality", "identify"):
            s.add_argument("--morphism", help="morphism name inside the document")
    e = sub.add_parser("examples", help="list or print built-in structures as documents")
    e.add_argument("expr", nargs="?", help="structure expression to print")
    return p


def run(argv=None) -> tuple:
    """Returns (exit code, stdout bytes, stderr text)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (int(e.code) if e.code is not None else 0), b"", ""
    if args.command == "examples":
        if not args.expr:
            return 0, ("".join(x + "\n" for x in EXAMPLES)).encode(), ""
        try:
            return 0, structure_to_text(parse_fixture(args.expr)).encode(), ""
        except (StructureError, ValueError) as e:
            return 2, b"", f"dgbv: {e}\n"
    try:
        doc = _document(args)
        order = _order(args, doc)
        header = {"order": order, "source": args.fixture or args.input}
        if args.command == "gauge-check":
            header["seed"] = args.seed if args.seed is not None else doc.directives.get("seed", 0)
            header["trials"] = (args.trials if args.trials is not None
                                else doc.directives.get("trials", 10))
        rep = RunReport(args.command, header)
        try:
            COMMANDS[args.command](args, doc, rep)
        except (ContractError, ConsistencyError) as e:
            rep.add("error", False, message=str(e))
        except StructureError as e:
            rep.add("error", False, message=str(e))
    except (DocumentError, InputError) as e:
        return 2, b"", f"dgbv: {e}\n"
    return rep.exit_code(), emit_report(rep, args.format), ""


def main(argv=None) -> int:
    code, out, err = run(argv)
    if out:
        sys.stdout.buffer.write(out)
        sys.stdout.flush()
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
