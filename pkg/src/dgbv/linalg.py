"""Exact sparse linear algebra over the rationals.

Vectors are ``dict[int, coeff]`` with no zero entries; coefficients are
``int`` or ``fractions.Fraction``.  Matrices are stored column-wise
(``cols[i]`` is the image of the i-th coordinate vector), which is the
natural layout for operators given on a basis.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

Vector = dict


def as_rational(x):
    """Return ``x`` as an exact rational; ints stay ints."""
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, str):
        return as_rational(Fraction(x))
    raise TypeError(f"not an exact rational: {x!r}")


def vadd(u: Vector, v: Vector, scale=1) -> Vector:
    out = dict(u)
    for k, c in v.items():
        s = out.get(k, 0) + scale * c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def vadd_into(out: Vector, v: Vector, scale=1) -> None:
    if not scale:
        return
    for k, c in v.items():
        s = out.get(k, 0) + scale * c
        if s:
            out[k] = s
        else:
            out.pop(k, None)


def vscale(v: Vector, c) -> Vector:
    if not c:
        return {}
    return {k: c * x for k, x in v.items()}


def vsub(u: Vector, v: Vector) -> Vector:
    return vadd(u, v, -1)


def vdot(u: Vector, v: Vector):
    if len(u) > len(v):
        u, v = v, u
    return sum((c * v[k] for k, c in u.items() if k in v), 0)


def unit_vector(i: int) -> Vector:
    return {i: 1}


def to_dense(v: Vector, n: int) -> list:
    return [v.get(i, 0) for i in range(n)]


def from_dense(xs: Sequence) -> Vector:
    return {i: as_rational(x) for i, x in enumerate(xs) if x}


class Matrix:
    """Sparse rectangular matrix stored by columns."""

    def __init__(self, nrows: int, ncols: int, cols: Optional[Sequence[Vector]] = None):
        self.nrows = nrows
        self.ncols = ncols
        if cols is None:
            cols = [{} for _ in range(ncols)]
        if len(cols) != ncols:
            raise ValueError("column count mismatch")
        self.cols = [dict(c) for c in cols]
        for c in self.cols:
            for k in c:
                if not 0 <= k < nrows:
                    raise ValueError(f"row index {k} out of range")

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, [{i: 1} for i in range(n)])

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "Matrix":
        return cls(nrows, ncols)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "Matrix":
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        cols = [{} for _ in range(ncols)]
        for r, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged rows")
            for c, x in enumerate(row):
                if x:
                    cols[c][r] = as_rational(x)
        return cls(nrows, ncols, cols)

    def rows(self) -> list:
        out = [{} for _ in range(self.nrows)]
        for j, col in enumerate(self.cols):
            for i, x in col.items():
                out[i][j] = x
        return out

    def dense(self) -> list:
        return [to_dense(r, self.ncols) for r in self.rows()]

    def apply(self, v: Vector) -> Vector:
        out: Vector = {}
        for j, x in v.items():
            if j >= self.ncols:
                raise ValueError("vector does not fit matrix")
            vadd_into(out, self.cols[j], x)
        return out

    __call__ = apply

    def compose(self, other: "Matrix") -> "Matrix":
        """Return ``self @ other``."""
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch in composition")
        return Matrix(self.nrows, other.ncols, [self.apply(c) for c in other.cols])

    __matmul__ = compose

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix(self.nrows, self.ncols, [vadd(a, b) for a, b in zip(self.cols, other.cols)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix(self.nrows, self.ncols, [vsub(a, b) for a, b in zip(self.cols, other.cols)])

    def scaled(self, c) -> "Matrix":
        return Matrix(self.nrows, self.ncols, [vscale(col, c) for col in self.cols])

    def transpose(self) -> "Matrix":
        return Matrix(self.ncols, self.nrows, self.rows())

    def is_zero(self) -> bool:
        return not any(self.cols)

    def _check_same(self, other):
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.nrows, self.ncols, self.cols) == (other.nrows, other.ncols, other.cols)

    def __repr__(self):
        return f"Matrix({self.nrows}x{self.ncols}, nnz={sum(map(len, self.cols))})"


# ---------------------------------------------------------------------------
# row reduction


def _order(ncols: int, pivot: str) -> list:
    if pivot == "left":
        return list(range(ncols))
    if pivot == "right":
        return list(range(ncols - 1, -1, -1))
    raise ValueError(f"unknown pivot rule {pivot!r}")


def rref(rows: Iterable[Vector], ncols: int, pivot: str = "left"):
    """Reduced row echelon form of a list of sparse rows.

    Returns ``(basis, pivots)`` with ``basis[r][pivots[r]] == 1`` and every
    other basis row zero in column ``pivots[r]``.  With ``pivot="left"`` the
    rows are ordered by increasing pivot column; ``"right"`` scans columns
    from the right, giving a different (still deterministic) echelon basis.
    """
    rank_of = {c: r for r, c in enumerate(_order(ncols, pivot))}
    reduced: list = []
    piv: list = []
    for row in rows:
        v = dict(row)
        for p, b in zip(piv, reduced):
            c = v.get(p)
            if c:
                vadd_into(v, b, -c)
        if not v:
            continue
        p = min(v, key=rank_of.__getitem__)
        inv = Fraction(1) / v[p]
        v = {k: as_rational(x * inv) for k, x in v.items()}
        for i, b in enumerate(reduced):
            c = b.get(p)
            if c:
                vadd_into(b, v, -c)
        reduced.append(v)
        piv.append(p)
    order = sorted(range(len(piv)), key=lambda i: rank_of[piv[i]])
    return [reduced[i] for i in order], [piv[i] for i in order]


def rank(m: Matrix) -> int:
    return len(rref(m.cols, m.nrows)[0])


def rank_bareiss(dense_rows: Sequence[Sequence]) -> int:
    """Rank by fraction-free (Bareiss) elimination.

    Kept deliberately separate from :func:`rref` so it can serve as an
    independent oracle.
    """
    if not dense_rows:
        return 0
    denom = 1
    for row in dense_rows:
        for x in row:
            denom = denom * Fraction(x).denominator // _gcd(denom, Fraction(x).denominator)
    a = [[int(Fraction(x) * denom) for x in row] for row in dense_rows]
    nr, nc = len(a), len(a[0])
    prev = 1
    r = 0
    for c in range(nc):
        pr = next((i for i in range(r, nr) if a[i][c] != 0), None)
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        for i in range(r + 1, nr):
            for j in range(c + 1, nc):
                a[i][j] = (a[i][j] * a[r][c] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        r += 1
        if r == nr:
            break
    return r


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


# ---------------------------------------------------------------------------
# subspaces


class Subspace:
    """A subspace of Q^n held as an RREF basis (leftmost pivots)."""

    __slots__ = ("n", "basis", "pivots")

    def __init__(self, n: int, vectors: Iterable[Vector] = ()):
        self.n = n
        vecs = list(vectors)
        for v in vecs:
            if any(not 0 <= k < n for k in v):
                raise ValueError("vector does not live in ambient space")
        self.basis, self.pivots = rref(vecs, n)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, [{i: 1} for i in range(n)])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: Vector) -> Vector:
        """Remainder of ``v`` after clearing this subspace's pivot columns."""
        v = dict(v)
        for p, b in zip(self.pivots, self.basis):
            c = v.get(p)
            if c:
                vadd_into(v, b, -c)
        return v

    def coordinates(self, v: Vector) -> Optional[list]:
        """Coefficients of ``v`` in the RREF basis, or None if not a member."""
        coords = [v.get(p, 0) for p in self.pivots]
        if self.reduce(v):
            return None
        return coords

    def contains(self, v: Vector) -> bool:
        return not self.reduce(v)

    __contains__ = contains

    def contains_space(self, other: "Subspace") -> bool:
        self._check(other)
        return all(self.contains(b) for b in other.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace(self.n, self.basis + other.basis)

    sum = __add__

    def intersection(self, other: "Subspace") -> "Subspace":
        """Intersection via the kernel of [B_self | -B_other]."""
        self._check(other)
        if not self.basis or not other.basis:
            return Subspace(self.n)
        cols = list(self.basis) + [vscale(b, -1) for b in other.basis]
        ker = kernel_of(Matrix(self.n, len(cols), cols))
        out = []
        k = self.dim
        for z in ker.basis:
            w: Vector = {}
            for i, c in z.items():
                if i < k:
                    vadd_into(w, self.basis[i], c)
            out.append(w)
        return Subspace(self.n, out)

    __and__ = intersection

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.n == other.n and self.basis == other.basis

    def __hash__(self):
        return hash((self.n, tuple(tuple(sorted(b.items())) for b in self.basis)))

    def quotient_dim(self, sub: "Subspace") -> int:
        """dim(self / sub); ``sub`` must be contained in ``self``."""
        if not self.contains_space(sub):
            raise ValueError("quotient by a non-subspace")
        return self.dim - sub.dim

    def complement_in(self, sub: "Subspace") -> list:
        """Vectors of this basis completing ``sub`` to a basis of ``self``.

        Scanning order is the RREF order, so the choice is deterministic.
        """
        if not self.contains_space(sub):
            raise ValueError("complement of a non-subspace")
        acc = Subspace(self.n, sub.basis)
        chosen = []
        for b in self.basis:
            if not acc.contains(b):
                chosen.append(b)
                acc = Subspace(self.n, acc.basis + [b])
        return chosen

    def _check(self, other):
        if self.n != other.n:
            raise ValueError("ambient dimension mismatch")

    def __repr__(self):
        return f"Subspace(n={self.n}, dim={self.dim})"


def image_of(m: Matrix) -> Subspace:
    return Subspace(m.nrows, m.cols)


def kernel_of(m: Matrix) -> Subspace:
    rows, piv = rref(m.rows(), m.ncols)
    pivset = set(piv)
    out = []
    for f in range(m.ncols):
        if f in pivset:
            continue
        v = {f: 1}
        for p, r in zip(piv, rows):
            c = r.get(f)
            if c:
                v[p] = -c
        out.append(v)
    return Subspace(m.ncols, out)


# ---------------------------------------------------------------------------
# solving


class LinearSolver:
    """Reusable exact solver for ``M x = b``.

    The row reduction of ``M`` is done once, recording the row operations, so
    each solve is a sparse mat-vec.  Free variables are set to zero and pivots
    are chosen by the given rule, which makes the returned solution a
    deterministic function of ``(M, b, pivot)``.  When ``restrict_to`` is
    given the solution is sought inside that subspace.
    """

    def __init__(self, m: Matrix, restrict_to: Optional[Subspace] = None, pivot: str = "left"):
        self.matrix = m
        self.restrict = restrict_to
        if restrict_to is not None:
            if restrict_to.n != m.ncols:
                raise ValueError("restriction lives in the wrong space")
            work = Matrix(m.nrows, restrict_to.dim, [m.apply(b) for b in restrict_to.basis])
        else:
            work = m
        self._ncols = work.ncols
        rank_of = {c: r for r, c in enumerate(_order(work.ncols, pivot))}
        # each working row carries its combination of original rows
        rows = [(r, {i: 1}) for i, r in enumerate(work.rows())]
        red: list = []
        self._zero_rows: list = []
        for v, comb in rows:
            v, comb = dict(v), dict(comb)
            for p, (b, bc) in red:
                c = v.get(p)
                if c:
                    vadd_into(v, b, -c)
                    vadd_into(comb, bc, -c)
            if not v:
                # left null vector: b must be orthogonal to it
                self._zero_rows.append(comb)
                continue
            p = min(v, key=rank_of.__getitem__)
            inv = Fraction(1) / v[p]
            v = {k: as_rational(x * inv) for k, x in v.items()}
            comb = {k: as_rational(x * inv) for k, x in comb.items()}
            for _, (b, bc) in red:
                c = b.get(p)
                if c:
                    vadd_into(b, v, -c)
                    vadd_into(bc, comb, -c)
            red.append((p, (v, comb)))
        self._pivots = red
        self.rank = len(red)

    def solve(self, b: Vector) -> Optional[Vector]:
        for comb in self._zero_rows:
            if vdot(comb, b):
                return None
        y: Vector = {}
        for p, (_, comb) in self._pivots:
            c = vdot(comb, b)
            if c:
                y[p] = as_rational(c)
        if self.restrict is None:
            return y
        x: Vector = {}
        for i, c in y.items():
            vadd_into(x, self.restrict.basis[i], c)
        return x


def solve_linear(m: Matrix, b: Vector, restrict_to: Optional[Subspace] = None,
                 pivot: str = "left") -> Optional[Vector]:
    """Solve ``M x = b`` exactly; None when ``b`` is outside the image."""
    return LinearSolver(m, restrict_to, pivot).solve(b)


def inverse(m: Matrix) -> Optional[Matrix]:
    """Exact inverse of a square matrix, or None if singular."""
    if m.nrows != m.ncols:
        raise ValueError("inverse of a non-square matrix")
    s = LinearSolver(m)
    if s.rank != m.nrows:
        return None
    return Matrix(m.nrows, m.ncols, [s.solve({i: 1}) for i in range(m.nrows)])
