"""Built-in finite-dimensional DGBV examples and the constructions on them.

Names accepted by :func:`builtin_example` / :func:`parse_fixture`:

``trivial(k)``      exterior algebra on k degree-1 generators, delta = Delta = 0
``exterior(k)``     alias of ``trivial(k)``
``bv(n, m)``        polyvector fields on Q^n, weights 0..m-1, Delta = sum d/dx_i d/dtheta_i
``koszul(f1, ...)`` the bv(n, m) algebra with delta = sum f_i d/dtheta_i
``acyclic(k)``      a 2k-dimensional unital algebra that is contractible for both operators
``ddbar(n)``        n-fold tensor power of the six-dimensional model ``ddbar(1)``
``tensor(X, Y)``    graded tensor product
``sum(X, Y)``       direct product with unit (1, 1)

The weight of x^a theta_I is |a| - |I|.  Delta preserves it and products add
it, so the span of weights 0..m-1 is a genuine BV algebra (a subquotient of
the polyvector fields).  Degrees: x_i has degree 0, theta_i degree -1, and
both operators raise degree by one.
"""

from __future__ import annotations

import itertools
import re
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import (GradedAlgebra, GradedBasis, LinearOperator, StructureError,
                      direct_sum_algebra, exterior_algebra, monomial_algebra,
                      tensor_algebra, tensor_operator)
from .linalg import Matrix, Vector, as_rational, vadd_into
from .structure import DGBVStructure, check_dgbv_axioms


def zero_operators(alg: GradedAlgebra, degree: int = 1):
    z = LinearOperator.zero(alg.basis, degree, "delta")
    Z = LinearOperator.zero(alg.basis, degree, "Delta")
    return z, Z


def trivial(k_or_algebra=2, degree: int = 1) -> DGBVStructure:
    """delta = Delta = 0 on an exterior algebra (or on a given algebra)."""
    if isinstance(k_or_algebra, GradedAlgebra):
        alg = k_or_algebra
        name = "trivial"
        integral = None
    else:
        k = int(k_or_algebra)
        if k < 0:
            raise StructureError("trivial(k) needs k >= 0")
        names = [f"t{i + 1}" for i in range(k)]
        alg = exterior_algebra(names, degree)
        name = f"trivial({k})"
        # integral = coefficient of the top form
        integral = {alg.dim - 1: 1}
    d, D = zero_operators(alg)
    return DGBVStructure(alg, d, D, name, integral)


# ---------------------------------------------------------------------------
# polyvector fields


def _left_partial_mono(m: tuple, g: int, odd: Sequence[bool]):
    """Left derivative of a monomial in generator g: (coef, monomial) or None."""
    e = m[g]
    if not e:
        return None
    s = 1
    if odd[g]:
        s = -1 if sum(m[i] for i in range(g) if odd[i]) & 1 else 1
    out = list(m)
    out[g] -= 1
    return s * e, tuple(out)


def _polyvector(n: int, m: int):
    if n < 1 or m < 1:
        raise StructureError("bv(n, m) needs n >= 1 and m >= 1")
    gens = [f"x{i + 1}" for i in range(n)] + [f"th{i + 1}" for i in range(n)]
    degs = [0] * n + [-1] * n
    mons = []
    for I in itertools.product((0, 1), repeat=n):
        k = sum(I)
        for total in range(k, k + m):
            for a in _compositions(total, n):
                mons.append(tuple(a) + I)
    alg = monomial_algebra(gens, degs, mons)
    return alg, gens, degs


def _compositions(total: int, n: int):
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


def _monomials_of(alg: GradedAlgebra, ngen: int, gens):
    """Recover exponent tuples from monomial labels."""
    mons = []
    for lab in alg.basis.labels:
        e = [0] * ngen
        if lab != "1":
            for part in lab.split("*"):
                g, _, p = part.partition("^")
                e[gens.index(g)] = int(p) if p else 1
        mons.append(tuple(e))
    return mons


def _operator_from_rule(alg, mons, rule, degree, name):
    index = {mo: i for i, mo in enumerate(mons)}
    cols = []
    for mo in mons:
        v: Vector = {}
        for c, out in rule(mo):
            k = index.get(out)
            if k is not None and c:
                vadd_into(v, {k: c})
        cols.append(v)
    n = alg.dim
    return LinearOperator(alg.basis, Matrix(n, n, cols), degree, name)


def _bv_laplacian(n, odd):
    def rule(mo):
        for i in range(n):
            r = _left_partial_mono(mo, n + i, odd)
            if r is None:
                continue
            c1, m1 = r
            r2 = _left_partial_mono(m1, i, odd)
            if r2 is None:
                continue
            c2, m2 = r2
            yield c1 * c2, m2
    return rule


def bv(n: int = 2, m: int = 4) -> DGBVStructure:
    """Weight-truncated polyvector fields with the BV Laplacian and delta = 0."""
    alg, gens, degs = _polyvector(n, m)
    odd = [d & 1 == 1 for d in degs]
    mons = _monomials_of(alg, 2 * n, gens)
    Delta = _operator_from_rule(alg, mons, _bv_laplacian(n, odd), 1, "Delta")
    delta = LinearOperator.zero(alg.basis, 1, "delta")
    return DGBVStructure(alg, delta, Delta, f"bv({n},{m})")


_TERM = re.compile(r"\s*([+-]?)\s*([^+-]+)")


def parse_polynomial(text: str, variables: Sequence[str]) -> dict:
    """Parse ``"2*x1^2 - x1*x2 + 1/2"`` into ``{exponents: coefficient}``."""
    text = text.strip()
    if not text:
        raise StructureError("empty polynomial")
    poly: dict = {}
    pos = 0
    while pos < len(text):
        mt = _TERM.match(text, pos)
        if not mt or mt.end() == pos:
            raise StructureError(f"cannot parse polynomial {text!r} at {pos}")
        sign = -1 if mt.group(1) == "-" else 1
        coef = Fraction(sign)
        e = [0] * len(variables)
        for factor in mt.group(2).strip().split("*"):
            factor = factor.strip()
            if not factor:
                raise StructureError(f"empty factor in {text!r}")
            name, _, power = factor.partition("^")
            if name in variables:
                try:
                    e[variables.index(name)] += int(power) if power else 1
                except ValueError:
                    raise StructureError(f"bad exponent in {factor!r}") from None
            else:
                try:
                    coef *= Fraction(factor)
                except (ValueError, ZeroDivisionError):
                    raise StructureError(f"unknown variable or bad number {factor!r}") from None
        key = tuple(e)
        poly[key] = poly.get(key, 0) + coef
        pos = mt.end()
    return {k: as_rational(c) for k, c in poly.items() if c}


def koszul(fs: Sequence, m: int = 4) -> DGBVStructure:
    """bv(n, m) with delta = sum_i f_i(x) d/dtheta_i.

    ``fs`` holds polynomials (strings or exponent dicts) in x1..xn.  The
    anticommutation with Delta is checked and a failure raises with a witness.
    """
    n = len(fs)
    alg, gens, degs = _polyvector(n, m)
    odd = [d & 1 == 1 for d in degs]
    xs = gens[:n]
    polys = [parse_polynomial(f, xs) if isinstance(f, str) else dict(f) for f in fs]
    mons = _monomials_of(alg, 2 * n, gens)

    def rule(mo):
        for i in range(n):
            r = _left_partial_mono(mo, n + i, odd)
            if r is None:
                continue
            c1, m1 = r
            for e, c in polys[i].items():
                out = tuple(m1[k] + (e[k] if k < n else 0) for k in range(2 * n))
                yield c1 * c, out

    delta = _operator_from_rule(alg, mons, rule, 1, "delta")
    Delta = _operator_from_rule(alg, mons, _bv_laplacian(n, odd), 1, "Delta")
    label = ",".join(f if isinstance(f, str) else "poly" for f in fs)
    D = DGBVStructure(alg, delta, Delta, f"koszul({label})")
    for ax in check_dgbv_axioms(D):
        if ax.name == "anticommutator_zero" and not ax.passed:
            raise StructureError(
                f"koszul: delta Delta + Delta delta != 0 at {ax.witness}; "
                "the partial derivatives d f_j / d x_i must be symmetric")
    return D


# ---------------------------------------------------------------------------
# q-class models


def ddbar_model() -> DGBVStructure:
    """Six-dimensional model: one harmonic class x with a nonzero self-bracket.

    Basis 1, x (degree 0), v (-1), a (0), b (0), c (1) with x*x = -a,
    delta v = a, delta b = c, Delta v = b, Delta a = -c.  All other products
    of non-unit elements vanish.  The square v, a, b, c absorbs x*x.
    """
    labels = ("1", "x", "v", "a", "b", "c")
    degrees = (0, 0, -1, 0, 0, 1)
    alg = GradedAlgebra(GradedBasis(labels, degrees), {(1, 1): {3: -1}}, 0)
    delta = LinearOperator.from_images(alg.basis, {2: {3: 1}, 4: {5: 1}}, 1, "delta")
    Delta = LinearOperator.from_images(alg.basis, {2: {4: 1}, 3: {5: -1}}, 1, "Delta")
    return DGBVStructure(alg, delta, Delta, "ddbar(1)", {1: 1})


def ddbar(n: int = 1) -> DGBVStructure:
    if n < 1:
        raise StructureError("ddbar(n) needs n >= 1")
    D = ddbar_model()
    for _ in range(n - 1):
        D = tensor_product(D, ddbar_model())
    D.name = f"ddbar({n})"
    return D


def pd4() -> DGBVStructure:
    """Ten-dimensional model with a degree-8 duality and a non-cubic potential.

    Harmonic part 1, x, y (degree 2), X, Y (degree 6), w (degree 8) with
    x*X = y*Y = w.  A square v (3), a = delta v, b = Delta v (4),
    c = delta b = -Delta a (5) absorbs the exact product x*y = -a, while
    a*b = v*c = w and x*b = -Y, y*b = -X make the correction terms pair
    nontrivially.  The integral is the coefficient of w.
    """
    labels = ("1", "x", "y", "X", "Y", "w", "v", "a", "b", "c")
    degrees = (0, 2, 2, 6, 6, 8, 3, 4, 4, 5)
    i = {l: k for k, l in enumerate(labels)}
    prods = {}

    def put(p, q, r, c=1):
        prods[(i[p], i[q])] = {i[r]: c}
        s = -c if (degrees[i[p]] & 1 and degrees[i[q]] & 1) else c
        prods[(i[q], i[p])] = {i[r]: s}

    put("x", "y", "a", -1)
    put("x", "X", "w")
    put("y", "Y", "w")
    put("a", "b", "w")
    put("v", "c", "w")
    put("x", "b", "Y", -1)
    put("y", "b", "X", -1)
    alg = GradedAlgebra(GradedBasis(labels, degrees), prods, 0)
    delta = LinearOperator.from_images(alg.basis, {i["v"]: {i["a"]: 1}, i["b"]: {i["c"]: 1}}, 1, "delta")
    Delta = LinearOperator.from_images(alg.basis, {i["v"]: {i["b"]: 1}, i["a"]: {i["c"]: -1}}, 1, "Delta")
    return DGBVStructure(alg, delta, Delta, "pd4", {i["w"]: 1})


def acyclic(k: int = 2) -> DGBVStructure:
    """Lambda(a, b) (x) Q[u]/(u^(k/2)) with delta = d/db, Delta = d/da.

    Cohomology is zero; the unit equals delta Delta (b a).  Only even k give
    a decomposition into squares, which the q-conditions require.
    """
    if k < 2 or k % 2:
        raise StructureError("acyclic(k) needs an even k >= 2")
    j = k // 2
    gens = ["a", "b", "u"]
    degs = [-1, -1, 0]
    odd = [True, True, False]
    mons = [(p, q, e) for p in (0, 1) for q in (0, 1) for e in range(j)]
    alg = monomial_algebra(gens, degs, mons)
    ms = _monomials_of(alg, 3, gens)

    def partial(g):
        def rule(mo):
            r = _left_partial_mono(mo, g, odd)
            if r is not None:
                yield r
        return rule

    delta = _operator_from_rule(alg, ms, partial(1), 1, "delta")
    Delta = _operator_from_rule(alg, ms, partial(0), 1, "Delta")
    return DGBVStructure(alg, delta, Delta, f"acyclic({k})", {})


# ---------------------------------------------------------------------------
# constructions


def _integral_parity(D: DGBVStructure) -> Optional[int]:
    if not D.integral:
        return 0
    ps = {D.parities[k] for k, c in D.integral.items() if c}
    if len(ps) != 1:
        return None
    return ps.pop()


def tensor_product(A: DGBVStructure, B: DGBVStructure) -> DGBVStructure:
    """Koszul-signed tensor product; integrals multiply with sign (-1)^{|a| p_B}."""
    if A.delta.degree_shift != B.delta.degree_shift or A.Delta.degree_shift != B.Delta.degree_shift:
        raise StructureError("tensor factors have operators of different degrees")
    alg = tensor_algebra(A.algebra, B.algebra)
    d = tensor_operator(A.algebra, B.algebra, A.delta, B.delta, alg.basis, "delta")
    D = tensor_operator(A.algebra, B.algebra, A.Delta, B.Delta, alg.basis, "Delta")
    integral = None
    if A.integral is not None and B.integral is not None:
        pb = _integral_parity(B)
        if pb is not None:
            nb = B.dim
            integral = {}
            for i, ci in A.integral.items():
                s = -1 if (pb and A.parities[i]) else 1
                for j, cj in B.integral.items():
                    if ci * cj:
                        integral[i * nb + j] = s * ci * cj
    return DGBVStructure(alg, d, D, f"tensor({A.name},{B.name})", integral)


def direct_sum(A: DGBVStructure, B: DGBVStructure):
    """Direct product with unit (1, 1); the integral is the sum of the two.

    Returns ``(structure, embed)`` with ``embed(side, v)`` as in
    :func:`direct_sum_algebra`.
    """
    if A.delta.degree_shift != B.delta.degree_shift or A.Delta.degree_shift != B.Delta.degree_shift:
        raise StructureError("summands have operators of different degrees")
    alg, embed, origins = direct_sum_algebra(A.algebra, B.algebra)
    n = alg.dim

    def op(opA, opB, name):
        cols = []
        for o in origins:
            if o is None:
                v = dict(embed(0, opA({A.algebra.unit_index: 1})))
                vadd_into(v, embed(1, opB({B.algebra.unit_index: 1})))
            elif o[0] == 0:
                v = embed(0, opA({o[1]: 1}))
            else:
                v = embed(1, opB({o[1]: 1}))
            cols.append(v)
        return LinearOperator(alg.basis, Matrix(n, n, cols), opA.degree_shift, name)

    d = op(A.delta, B.delta, "delta")
    D = op(A.Delta, B.Delta, "Delta")
    integral = None
    if A.integral is not None and B.integral is not None:
        integral = {}
        for i, o in enumerate(origins):
            if o is None:
                c = A.integral.get(A.algebra.unit_index, 0) + B.integral.get(B.algebra.unit_index, 0)
            else:
                c = (A if o[0] == 0 else B).integral.get(o[1], 0)
            if c:
                integral[i] = c
    return DGBVStructure(alg, d, D, f"sum({A.name},{B.name})", integral), embed


# ---------------------------------------------------------------------------
# names


def builtin_example(name: str, *params) -> DGBVStructure:
    name = name.strip()
    if name in ("trivial", "exterior"):
        return trivial(*(int(p) for p in params)) if params else trivial(2)
    if name == "bv":
        return bv(*(int(p) for p in params))
    if name == "koszul":
        if not params:
            raise StructureError("koszul needs at least one polynomial")
        return koszul([str(p) for p in params])
    if name == "acyclic":
        return acyclic(*(int(p) for p in params))
    if name == "ddbar":
        return ddbar(*(int(p) for p in params))
    if name == "pd4":
        if params:
            raise StructureError("pd4 takes no parameters")
        return pd4()
    raise StructureError(f"unknown example {name!r}")


FIXTURE_NAMES = ("trivial", "exterior", "bv", "koszul", "acyclic", "ddbar", "pd4", "tensor", "sum")


def parse_fixture(expr: str) -> DGBVStructure:
    """Build a structure from an expression like ``tensor(ddbar(1),trivial(2))``."""
    node, pos = _parse_call(expr, 0)
    if expr[pos:].strip():
        raise StructureError(f"trailing text in fixture expression at column {pos + 1}")
    return _build(node)


def _parse_call(s: str, pos: int):
    m = re.compile(r"\s*([A-Za-z_]\w*)\s*").match(s, pos)
    if not m:
        raise StructureError(f"expected a fixture name at column {pos + 1}")
    name, pos = m.group(1), m.end()
    args = []
    if pos < len(s) and s[pos] == "(":
        pos += 1
        while True:
            while pos < len(s) and s[pos] == " ":
                pos += 1
            if pos < len(s) and s[pos] == ")":
                pos += 1
                break
            if name in ("tensor", "sum"):
                arg, pos = _parse_call(s, pos)
            else:
                start = pos
                depth = 0
                while pos < len(s) and (depth or s[pos] not in ",)"):
                    depth += {"(": 1, ")": -1}.get(s[pos], 0)
                    pos += 1
                arg = s[start:pos].strip()
                if not arg:
                    raise StructureError(f"empty argument at column {start + 1}")
            args.append(arg)
            while pos < len(s) and s[pos] == " ":
                pos += 1
            if pos < len(s) and s[pos] == ",":
                pos += 1
                continue
            if pos < len(s) and s[pos] == ")":
                pos += 1
                break
            raise StructureError(f"expected ',' or ')' at column {pos + 1}")
    return (name, args), pos


def _build(node) -> DGBVStructure:
    name, args = node
    if name in ("tensor", "sum"):
        if len(args) != 2:
            raise StructureError(f"{name} takes two arguments")
        a, b = _build(args[0]), _build(args[1])
        return tensor_product(a, b) if name == "tensor" else direct_sum(a, b)[0]
    if name not in FIXTURE_NAMES:
        raise StructureError(f"unknown example {name!r}")
    try:
        return builtin_example(name, *args)
    except (TypeError, ValueError) as e:
        if isinstance(e, StructureError):
            raise
        raise StructureError(f"bad parameters for {name}: {e}") from None


# ---------------------------------------------------------------------------
# random operator pairs


# indecomposable pieces as (size, delta images, Delta images) on local indices
_PIECES = {
    "square": (4, {0: 1, 2: 3}, {0: 2, 1: -3}),   # v, dv, Dv, dDv
    "point": (1, {}, {}),
    "d_pair": (2, {0: 1}, {}),
    "D_pair": (2, {}, {0: 1}),
    "wedge": (3, {0: 1}, {0: 2}),                 # d e0 = e1, D e0 = e2
    "vee": (3, {0: 2}, {1: 2}),                   # d e0 = e2, D e1 = e2
}


def random_operator_pair(rng, max_dim: int = 8, q_class: Optional[bool] = None,
                         coeff_range: int = 2):
    """Seeded (d, D) on Q^n with d^2 = D^2 = dD + Dd = 0.

    Built from squares, points and zigzag pieces, then conjugated by a random
    invertible unitriangular matrix times a permutation.  ``q_class`` forces
    only squares and points (True) or at least one zigzag (False).
    Returns ``(d, D, pieces)``.
    """
    good = ["square", "point"]
    bad = ["d_pair", "D_pair", "wedge", "vee"]
    pieces = []
    size = 0
    if q_class is False:
        p = rng.choice(bad)
        pieces.append(p)
        size += _PIECES[p][0]
    pool = good if q_class else good + bad
    while True:
        p = rng.choice(pool)
        if size + _PIECES[p][0] > max_dim:
            break
        pieces.append(p)
        size += _PIECES[p][0]
        if rng.random() < 0.25:
            break
    n = size
    dcols = [dict() for _ in range(n)]
    Dcols = [dict() for _ in range(n)]
    off = 0
    for p in pieces:
        k, dm, Dm = _PIECES[p]
        for cols, img in ((dcols, dm), (Dcols, Dm)):
            for src, tgt in img.items():
                cols[off + src] = {off + abs(tgt): (1 if tgt > 0 else -1)} if tgt else {off: 1}
        off += k
    # conjugate: P = permutation * unitriangular
    perm = list(range(n))
    rng.shuffle(perm)
    U = [[Fraction(1) if i == j else (Fraction(rng.randint(-coeff_range, coeff_range)) if j > i else Fraction(0))
          for j in range(n)] for i in range(n)]
    P = [[U[perm[i]][j] for j in range(n)] for i in range(n)]
    from .linalg import inverse
    Pm = Matrix.from_rows(P)
    Pinv = inverse(Pm)
    d = Pm @ Matrix(n, n, dcols) @ Pinv
    D = Pm @ Matrix(n, n, Dcols) @ Pinv
    return d, D, pieces


def mutate_product(D: DGBVStructure, seed: int = 0) -> DGBVStructure:
    """Copy of D with one product coefficient b_i b_j changed (i != j, neither the unit).

    The mirror entry b_j b_i is left alone, so graded commutativity breaks.
    """
    import random
    alg = D.algebra
    n, u = alg.dim, alg.unit_index
    degs = alg.basis.degrees
    cands = [(i, j, k) for i in range(n) for j in range(n) for k in range(n)
             if i != j and u not in (i, j) and degs[k] == degs[i] + degs[j]]
    if not cands:
        raise StructureError("no product coefficient can be mutated")
    i, j, k = random.Random(seed).choice(cands)
    prods = {(a, b): dict(alg.table[a][b]) for a in range(n) for b in range(n) if alg.table[a][b]}
    v = prods.setdefault((i, j), {})
    v[k] = v.get(k, 0) + 1
    if not v[k]:
        del v[k]
    new = GradedAlgebra(alg.basis, prods, u)
    ops = [LinearOperator(new.basis, op.matrix, op.degree_shift, op.name) for op in (D.delta, D.Delta)]
    return DGBVStructure(new, ops[0], ops[1], D.name + "~", D.integral)
