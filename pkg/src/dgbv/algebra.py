"""Graded commutative algebras given by structure constants.

An element is a sparse coordinate vector over the algebra basis.  All
objects here are treated as immutable once built.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .linalg import (Matrix, Subspace, Vector, as_rational, image_of, kernel_of,
                     solve_linear, vadd_into, vscale)


class StructureError(ValueError):
    """Malformed algebraic data (bad shapes, indices, degrees)."""


def sign(k: int) -> int:
    return -1 if k & 1 else 1


def monomial_product(m1: tuple, m2: tuple, odd: Sequence[bool]):
    """Multiply two normal-ordered supercommutative monomials.

    Monomials are exponent tuples over ordered generators; odd generators
    have exponent 0 or 1.  Returns ``(sign, m)`` or ``None`` when an odd
    generator would be squared.  The sign counts the transpositions needed
    to bring the concatenation back to ascending generator order.
    """
    s = 0
    seen_odd_after = 0
    # walk generators right to left: each odd generator of m2 must pass the
    # odd generators of m1 that have a larger index
    n = len(m1)
    out = [0] * n
    for i in range(n - 1, -1, -1):
        a, b = m1[i], m2[i]
        if odd[i]:
            if a and b:
                return None
            if b:
                s += seen_odd_after
            if a:
                seen_odd_after += 1
        out[i] = a + b
    return (-1 if s & 1 else 1), tuple(out)


@dataclass(frozen=True)
class GradedBasis:
    labels: tuple
    degrees: tuple

    def __post_init__(self):
        if not self.labels:
            raise StructureError("basis must be nonempty")
        if len(self.labels) != len(self.degrees):
            raise StructureError("labels and degrees differ in length")
        if len(set(self.labels)) != len(self.labels):
            dup = next(l for l in self.labels if self.labels.count(l) > 1)
            raise StructureError(f"duplicate basis label {dup!r}")
        for d in self.degrees:
            if not isinstance(d, int) or isinstance(d, bool):
                raise StructureError("degrees must be integers")

    def __len__(self):
        return len(self.labels)

    def parity(self, i: int) -> int:
        return self.degrees[i] & 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise StructureError(f"unknown basis label {label!r}") from None


class GradedAlgebra:
    """Finite-dimensional graded commutative unital algebra over Q.

    ``products`` maps index pairs ``(i, j)`` to the sparse vector ``b_i b_j``.
    Missing pairs are zero; products with the unit are implied.
    Construction only checks shapes and degree additivity; the algebra laws
    are checked by :func:`check_algebra_axioms`.
    """

    def __init__(self, basis: GradedBasis, products: dict, unit_index: int = 0):
        self.basis = basis
        self.dim = n = len(basis)
        if not 0 <= unit_index < n:
            raise StructureError("unit index out of range")
        if basis.degrees[unit_index] != 0:
            raise StructureError("the unit must have degree 0")
        self.unit_index = unit_index
        self.parities = tuple(d & 1 for d in basis.degrees)
        table = [[{} for _ in range(n)] for _ in range(n)]
        for (i, j), v in products.items():
            if not (0 <= i < n and 0 <= j < n):
                raise StructureError(f"product index ({i}, {j}) out of range")
            v = {k: as_rational(c) for k, c in v.items() if c}
            for k in v:
                if not 0 <= k < n:
                    raise StructureError(f"product result index {k} out of range")
                if basis.degrees[k] != basis.degrees[i] + basis.degrees[j]:
                    raise StructureError(
                        f"degree additivity fails for {basis.labels[i]}*{basis.labels[j]}"
                        f" -> {basis.labels[k]}")
            table[i][j] = v
        u = unit_index
        for i in range(n):
            if (u, i) not in products:
                table[u][i] = {i: 1}
            if (i, u) not in products:
                table[i][u] = {i: 1}
        self.table = table

    # -- elements ---------------------------------------------------------

    def unit(self) -> Vector:
        return {self.unit_index: 1}

    def element(self, *terms) -> Vector:
        """``element(("x", 2), ("y", "1/2"))`` -> sparse vector."""
        v: Vector = {}
        for label, c in terms:
            vadd_into(v, {self.basis.index(label): as_rational(c)})
        return v

    def check_vector(self, v: Vector) -> None:
        for k in v:
            if not (isinstance(k, int) and 0 <= k < self.dim):
                raise StructureError(f"coordinate {k!r} outside algebra of dimension {self.dim}")

    def multiply(self, x: Vector, y: Vector) -> Vector:
        out: Vector = {}
        t = self.table
        for i, a in x.items():
            row = t[i]
            for j, b in y.items():
                p = row[j]
                if p:
                    vadd_into(out, p, a * b)
        return out

    def parity_parts(self, x: Vector):
        even, odd = {}, {}
        for k, c in x.items():
            (odd if self.parities[k] else even)[k] = c
        return even, odd

    def degree_of(self, x: Vector) -> Optional[int]:
        """Degree of a homogeneous nonzero element, else None."""
        ds = {self.basis.degrees[k] for k in x}
        return ds.pop() if len(ds) == 1 else None

    def homogeneous_parts(self, x: Vector) -> dict:
        parts: dict = {}
        for k, c in x.items():
            parts.setdefault(self.basis.degrees[k], {})[k] = c
        return parts

    def degree_subspace(self, d: int) -> list:
        return [i for i, e in enumerate(self.basis.degrees) if e == d]

    def format(self, x: Vector) -> str:
        return format_vector(x, self.basis.labels)

    def __repr__(self):
        return f"GradedAlgebra(dim={self.dim})"


def format_rational(c) -> str:
    c = as_rational(c)
    return str(c)


def format_vector(x: Vector, labels) -> str:
    if not x:
        return "0"
    parts = []
    for k in sorted(x):
        c = x[k]
        parts.append(f"{format_rational(c)}*{labels[k]}")
    return " + ".join(parts)


class LinearOperator:
    """A degree-homogeneous endomorphism of a graded basis."""

    def __init__(self, basis: GradedBasis, matrix: Matrix, degree_shift: int, name: str = "op"):
        n = len(basis)
        if matrix.nrows != n or matrix.ncols != n:
            raise StructureError(f"{name}: matrix shape does not match basis")
        self.basis = basis
        self.matrix = matrix
        self.degree_shift = degree_shift
        self.name = name
        for i, col in enumerate(matrix.cols):
            for k in col:
                if basis.degrees[k] != basis.degrees[i] + degree_shift:
                    raise StructureError(
                        f"{name} is not homogeneous of degree {degree_shift}:"
                        f" {basis.labels[i]} -> {basis.labels[k]}")

    @classmethod
    def zero(cls, basis: GradedBasis, degree_shift: int = 1, name: str = "op"):
        n = len(basis)
        return cls(basis, Matrix(n, n), degree_shift, name)

    @classmethod
    def from_images(cls, basis: GradedBasis, images: dict, degree_shift: int, name="op"):
        n = len(basis)
        cols = [dict(images.get(i, {})) for i in range(n)]
        return cls(basis, Matrix(n, n, cols), degree_shift, name)

    @property
    def parity(self) -> int:
        return self.degree_shift & 1

    def __call__(self, v: Vector) -> Vector:
        return self.matrix.apply(v)

    def compose(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix @ other.matrix,
                              self.degree_shift + other.degree_shift,
                              f"{self.name}{other.name}")

    def image(self) -> Subspace:
        return image_of(self.matrix)

    def kernel(self) -> Subspace:
        return kernel_of(self.matrix)

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def __repr__(self):
        return f"LinearOperator({self.name}, degree={self.degree_shift})"


def image(op: LinearOperator) -> Subspace:
    return op.image()


def kernel(op: LinearOperator) -> Subspace:
    return op.kernel()


def multiply(alg: GradedAlgebra, x: Vector, y: Vector) -> Vector:
    alg.check_vector(x)
    alg.check_vector(y)
    return alg.multiply(x, y)


# ---------------------------------------------------------------------------
# axiom checks


@dataclass
class AxiomResult:
    name: str
    passed: bool
    checked: int = 0
    witness: Optional[tuple] = None
    detail: str = ""

    def as_dict(self) -> dict:
        d = {"axiom": self.name, "pass": self.passed, "checked": self.checked}
        if self.witness is not None:
            d["witness"] = list(self.witness)
        if self.detail:
            d["detail"] = self.detail
        return d


def check_algebra_axioms(alg: GradedAlgebra) -> list:
    """Exhaustive unit, graded commutativity and associativity checks."""
    n = alg.dim
    lab = alg.basis.labels
    par = alg.parities
    t = alg.table
    out = []

    u = alg.unit_index
    bad = next((i for i in range(n) if t[u][i] != {i: 1} or t[i][u] != {i: 1}), None)
    out.append(AxiomResult("unit", bad is None, n,
                           None if bad is None else (lab[u], lab[bad])))

    bad = None
    for i in range(n):
        for j in range(i, n):
            s = -1 if (par[i] and par[j]) else 1
            if t[j][i] != vscale(t[i][j], s):
                bad = (lab[i], lab[j])
                break
        if bad:
            break
    out.append(AxiomResult("graded_commutativity", bad is None, n * (n + 1) // 2, bad))

    bad = None
    count = 0
    for i in range(n):
        ti = t[i]
        for j in range(n):
            ij = ti[j]
            for k in range(n):
                count += 1
                left: Vector = {}
                for m, c in ij.items():
                    vadd_into(left, t[m][k], c)
                right: Vector = {}
                for m, c in t[j][k].items():
                    vadd_into(right, ti[m], c)
                if left != right:
                    bad = (lab[i], lab[j], lab[k])
                    break
            if bad:
                break
        if bad:
            break
    out.append(AxiomResult("associativity", bad is None, count, bad))
    return out


# ---------------------------------------------------------------------------
# constructors


def monomial_algebra(generators: Sequence, degrees: Sequence[int],
                     monomials: Iterable[tuple], unit_first: bool = True) -> GradedAlgebra:
    """Algebra spanned by a set of supercommutative monomials.

    A product whose monomial is not in the set is zero.  This covers
    quotients by monomial ideals and graded subquotients such as weight
    windows; the laws are checked by :func:`check_algebra_axioms`, not
    assumed.  Labels are built from generator names, e.g. ``x1^2*t1``.
    """
    odd = [d & 1 == 1 for d in degrees]
    mons = []
    for m in monomials:
        m = tuple(m)
        if any(o and e > 1 for o, e in zip(odd, m)):
            continue
        if m not in mons:
            mons.append(m)
    zero = tuple(0 for _ in generators)
    if zero not in mons:
        raise StructureError("the empty monomial must survive")
    mons.sort(key=lambda m: (sum(m), tuple(-e for e in m)))
    index = {m: i for i, m in enumerate(mons)}
    labels = tuple(monomial_label(m, generators) for m in mons)
    degs = tuple(sum(e * d for e, d in zip(m, degrees)) for m in mons)
    products = {}
    for i, a in enumerate(mons):
        for j, b in enumerate(mons):
            r = monomial_product(a, b, odd)
            if r is None:
                continue
            s, m = r
            k = index.get(m)
            if k is not None:
                products[(i, j)] = {k: s}
    return GradedAlgebra(GradedBasis(labels, degs), products, index[zero])


def monomial_label(m: tuple, generators: Sequence) -> str:
    parts = []
    for e, g in zip(m, generators):
        if e == 1:
            parts.append(g)
        elif e > 1:
            parts.append(f"{g}^{e}")
    return "*".join(parts) if parts else "1"


def exterior_algebra(names: Sequence[str], degree: int = 1) -> GradedAlgebra:
    """Exterior algebra on odd generators of the given degree."""
    if degree % 2 == 0:
        raise StructureError("exterior generators must have odd degree")
    k = len(names)
    mons = list(itertools.product((0, 1), repeat=k))
    return monomial_algebra(names, [degree] * k, mons)


def change_of_basis(alg_products: Callable, n: int, new_basis: Sequence[Vector],
                    labels: Sequence[str], degrees: Sequence[int], unit_index: int):
    """Structure constants of an algebra in a new basis.

    ``alg_products(x, y)`` multiplies vectors in the old coordinates;
    ``new_basis`` are old-coordinate vectors.  Returns ``(algebra, to_new)``
    where ``to_new`` converts old coordinates to new ones.
    """
    m = Matrix(n, len(new_basis), list(new_basis))

    def to_new(v: Vector) -> Vector:
        x = solve_linear(m, v)
        if x is None:
            raise StructureError("vector outside the new basis span")
        return x

    products = {}
    for i, a in enumerate(new_basis):
        for j, b in enumerate(new_basis):
            p = alg_products(a, b)
            if p:
                products[(i, j)] = to_new(p)
    alg = GradedAlgebra(GradedBasis(tuple(labels), tuple(degrees)), products, unit_index)
    return alg, to_new


def tensor_algebra(a: GradedAlgebra, b: GradedAlgebra, sep: str = ".") -> GradedAlgebra:
    """Graded tensor product with the Koszul sign (a⊗b)(c⊗d) = ±(ac)⊗(bd)."""
    na, nb = a.dim, b.dim
    labels = []
    degrees = []
    for i in range(na):
        for j in range(nb):
            labels.append(f"{a.basis.labels[i]}{sep}{b.basis.labels[j]}")
            degrees.append(a.basis.degrees[i] + b.basis.degrees[j])
    products = {}
    for i1 in range(na):
        for j1 in range(nb):
            for i2 in range(na):
                if not a.table[i1][i2]:
                    continue
                for j2 in range(nb):
                    q = b.table[j1][j2]
                    if not q:
                        continue
                    s = -1 if (b.parities[j1] and a.parities[i2]) else 1
                    v: Vector = {}
                    for k, c in a.table[i1][i2].items():
                        for l, d in q.items():
                            v[k * nb + l] = s * c * d
                    products[(i1 * nb + j1, i2 * nb + j2)] = v
    unit = a.unit_index * nb + b.unit_index
    return GradedAlgebra(GradedBasis(tuple(labels), tuple(degrees)), products, unit)


def tensor_operator(a: GradedAlgebra, b: GradedAlgebra, opa: LinearOperator,
                    opb: LinearOperator, basis: GradedBasis, name: str) -> LinearOperator:
    """op⊗1 + 1⊗op with the Koszul sign (-1)^{|op||a|}."""
    if opa.degree_shift != opb.degree_shift:
        raise StructureError(f"{name}: factors have different degrees")
    na, nb = a.dim, b.dim
    cols = []
    for i in range(na):
        for j in range(nb):
            v: Vector = {}
            for k, c in opa.matrix.cols[i].items():
                vadd_into(v, {k * nb + j: c})
            s = -1 if (opb.parity and a.parities[i]) else 1
            for l, c in opb.matrix.cols[j].items():
                vadd_into(v, {i * nb + l: s * c})
            cols.append(v)
    n = na * nb
    return LinearOperator(basis, Matrix(n, n, cols), opa.degree_shift, name)


def direct_sum_algebra(a: GradedAlgebra, b: GradedAlgebra, prefixes=("L_", "R_")):
    """Product algebra A × B with unit (1, 1).

    Returns ``(algebra, embed, origins)``.  ``embed(side, v)`` maps a vector
    of summand ``side`` (0 or 1) into the new coordinates; ``origins[i]`` is
    ``(side, index)`` for basis vector i, or None for the unit (1, 1).
    """
    na, nb = a.dim, b.dim
    n = na + nb

    def prod(x: Vector, y: Vector) -> Vector:
        xa = {k: c for k, c in x.items() if k < na}
        ya = {k: c for k, c in y.items() if k < na}
        xb = {k - na: c for k, c in x.items() if k >= na}
        yb = {k - na: c for k, c in y.items() if k >= na}
        out = dict(a.multiply(xa, ya))
        for k, c in b.multiply(xb, yb).items():
            out[k + na] = c
        return out

    new = [{a.unit_index: 1, na + b.unit_index: 1}]
    origins = [None]
    labels = ["1"]
    degrees = [0]
    for i in range(na):
        if i != a.unit_index:
            new.append({i: 1})
            origins.append((0, i))
            labels.append(prefixes[0] + a.basis.labels[i])
            degrees.append(a.basis.degrees[i])
    for j in range(nb):
        new.append({na + j: 1})
        origins.append((1, j))
        labels.append(prefixes[1] + b.basis.labels[j])
        degrees.append(b.basis.degrees[j])
    if len(set(labels)) != len(labels):
        raise StructureError("direct sum labels collide; choose other prefixes")
    alg, to_new = change_of_basis(prod, n, new, labels, degrees, 0)

    def embed(side: int, v: Vector) -> Vector:
        if side == 0:
            return to_new(dict(v))
        return to_new({k + na: c for k, c in v.items()})

    return alg, embed, origins
