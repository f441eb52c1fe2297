"""DGBV structures: derived bracket, axiom validation, q-conditions, cohomology."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .algebra import (AxiomResult, GradedAlgebra, LinearOperator, StructureError,
                      check_algebra_axioms, format_vector)
from .linalg import (LinearSolver, Matrix, Subspace, Vector, image_of, kernel_of,
                     vadd, vadd_into, vscale, vsub)


class ContractError(ValueError):
    """A documented precondition failed; carries the offending residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConsistencyError(RuntimeError):
    """An internal identity that the theory guarantees did not hold."""


class DGBVStructure:
    """An algebra with odd operators ``delta`` (differential) and ``Delta`` (BV)."""

    def __init__(self, algebra: GradedAlgebra, delta: LinearOperator,
                 Delta: LinearOperator, name: str = "", integral: Optional[Vector] = None):
        for op, nm in ((delta, "delta"), (Delta, "Delta")):
            if op.basis != algebra.basis:
                raise StructureError(f"{nm} is defined on a different basis")
            if op.degree_shift % 2 == 0:
                raise StructureError(f"{nm} must have odd degree")
        self.algebra = algebra
        self.delta = delta
        self.Delta = Delta
        self.name = name
        # optional default integral (value on each basis element)
        self.integral = integral
        self._bracket_table = None
        self._solvers: dict = {}
        self._cohomology = None
        self._q = None

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def parities(self):
        return self.algebra.parities

    def d(self, v: Vector) -> Vector:
        return self.delta(v)

    def D(self, v: Vector) -> Vector:
        return self.Delta(v)

    def multiply(self, x: Vector, y: Vector) -> Vector:
        return self.algebra.multiply(x, y)

    # -- bracket ----------------------------------------------------------

    @property
    def bracket_table(self):
        if self._bracket_table is None:
            self._bracket_table = _bracket_table(self.algebra, self.Delta)
        return self._bracket_table

    def bracket(self, a: Vector, b: Vector) -> Vector:
        t = self.bracket_table
        out: Vector = {}
        for i, x in a.items():
            row = t[i]
            for j, y in b.items():
                p = row[j]
                if p:
                    vadd_into(out, p, x * y)
        return out

    def bracket_direct(self, a: Vector, b: Vector) -> Vector:
        """Evaluate the derived bracket from its definition (no table)."""
        alg = self.algebra
        out: Vector = {}
        for pa, part in enumerate(alg.parity_parts(a)):
            if not part:
                continue
            s = -1 if pa else 1
            v = vsub(self.Delta(alg.multiply(part, b)), alg.multiply(self.Delta(part), b))
            v = vadd(v, alg.multiply(part, self.Delta(b)), -s)
            vadd_into(out, v, s)
        return out

    # -- cached linear algebra -------------------------------------------

    def solver(self, which: str, pivot: str = "left") -> LinearSolver:
        key = (which, pivot)
        if key not in self._solvers:
            m = self.operator_matrix(which)
            self._solvers[key] = LinearSolver(m, pivot=pivot)
        return self._solvers[key]

    def operator_matrix(self, which: str) -> Matrix:
        d, D = self.delta.matrix, self.Delta.matrix
        return {"d": d, "D": D, "dD": d @ D, "Dd": D @ d}[which]

    def __repr__(self):
        return f"DGBVStructure({self.name or 'unnamed'}, dim={self.dim})"


def _bracket_table(alg: GradedAlgebra, Delta: LinearOperator):
    n = alg.dim
    t = alg.table
    Dcols = Delta.matrix.cols
    Dprod = [[Delta(t[i][j]) if t[i][j] else {} for j in range(n)] for i in range(n)]
    table = []
    for i in range(n):
        s = -1 if alg.parities[i] else 1
        row = []
        Di = Dcols[i]
        for j in range(n):
            v = dict(Dprod[i][j])
            for k, c in Di.items():
                vadd_into(v, t[k][j], -c)
            for k, c in Dcols[j].items():
                vadd_into(v, t[i][k], -s * c)
            row.append(vscale(v, s) if s == -1 else v)
        table.append(row)
    return table


def derived_bracket(D: DGBVStructure, a: Vector, b: Vector) -> Vector:
    D.algebra.check_vector(a)
    D.algebra.check_vector(b)
    return D.bracket(a, b)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    name: str
    axioms: list = field(default_factory=list)
    q_condition: Optional["QConditionReport"] = None

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.axioms)

    def failures(self) -> list:
        return [a for a in self.axioms if not a.passed]

    def get(self, axiom: str) -> AxiomResult:
        for a in self.axioms:
            if a.name == axiom:
                return a
        raise KeyError(axiom)


def _first_failure(name, items, labels):
    count = 0
    for idx, ok in items:
        count += 1
        if not ok:
            return AxiomResult(name, False, count, tuple(labels[i] for i in idx))
    return AxiomResult(name, True, count)


def _mul_right(t, v: Vector, k: int) -> Vector:
    out: Vector = {}
    for m, c in v.items():
        p = t[m][k]
        if p:
            vadd_into(out, p, c)
    return out


def _mul_left(t, j: int, v: Vector) -> Vector:
    out: Vector = {}
    row = t[j]
    for m, c in v.items():
        p = row[m]
        if p:
            vadd_into(out, p, c)
    return out


def _lin(rows, v: Vector) -> Vector:
    """Sum of ``c * rows[m]`` over ``v``; rows indexed by basis."""
    out: Vector = {}
    for m, c in v.items():
        r = rows[m]
        if r:
            vadd_into(out, r, c)
    return out


def check_gbv_axioms(D: DGBVStructure) -> list:
    alg = D.algebra
    n = alg.dim
    lab = alg.basis.labels
    par = alg.parities
    t = alg.table
    Br = D.bracket_table
    Dm = D.Delta.matrix
    out = []

    out.append(_first_failure(
        "Delta_squared_zero",
        (((i,), not D.Delta(Dm.cols[i])) for i in range(n)), lab))

    def eq2():
        for i in range(n):
            bi = Br[i]
            for j in range(n):
                s = -1 if ((par[i] + 1) * par[j]) & 1 else 1
                bij = bi[j]
                tj = t[j]
                for k in range(n):
                    lhs = _lin(bi, tj[k])
                    rhs = _mul_right(t, bij, k)
                    vadd_into(rhs, _mul_left(t, j, bi[k]), s)
                    yield (i, j, k), lhs == rhs

    out.append(_first_failure("poisson_identity", eq2(), lab))

    def antisym():
        for i in range(n):
            for j in range(i, n):
                s = 1 if ((par[i] + 1) * (par[j] + 1)) & 1 else -1
                yield (i, j), Br[i][j] == vscale(Br[j][i], s)

    out.append(_first_failure("bracket_antisymmetry", antisym(), lab))

    def jacobi():
        for i in range(n):
            for j in range(n):
                s = -1 if ((par[i] + 1) * (par[j] + 1)) & 1 else 1
                bij = Br[i][j]
                for k in range(n):
                    lhs = _lin(Br[i], Br[j][k])
                    rhs = {}
                    for m, c in bij.items():
                        vadd_into(rhs, Br[m][k], c)
                    vadd_into(rhs, _lin(Br[j], Br[i][k]), s)
                    yield (i, j, k), lhs == rhs

    out.append(_first_failure("odd_jacobi", jacobi(), lab))
    out.append(_first_failure("Delta_bracket_derivation",
                              _op_bracket_derivation(D, D.Delta), lab))
    return out


def _op_bracket_derivation(D: DGBVStructure, op: LinearOperator):
    """op[a.b] = [op a . b] + (-1)^{|a|+1} [a . op b] on basis pairs."""
    n = D.dim
    par = D.parities
    Br = D.bracket_table
    cols = op.matrix.cols
    BrT = [[Br[m][j] for m in range(n)] for j in range(n)]
    for i in range(n):
        s = 1 if par[i] else -1
        for j in range(n):
            lhs = op(Br[i][j])
            rhs = _lin(BrT[j], cols[i])
            vadd_into(rhs, _lin(Br[i], cols[j]), s)
            yield (i, j), lhs == rhs


def check_dgbv_axioms(D: DGBVStructure) -> list:
    alg = D.algebra
    n = alg.dim
    lab = alg.basis.labels
    par = alg.parities
    t = alg.table
    dm, Dm = D.delta.matrix, D.Delta.matrix
    out = []
    out.append(_first_failure(
        "delta_squared_zero", (((i,), not D.delta(dm.cols[i])) for i in range(n)), lab))
    out.append(_first_failure(
        "anticommutator_zero",
        (((i,), not vadd(D.delta(Dm.cols[i]), D.Delta(dm.cols[i]))) for i in range(n)), lab))

    def leibniz():
        dcols = dm.cols
        for i in range(n):
            s = -1 if par[i] else 1
            for j in range(n):
                lhs = D.delta(t[i][j])
                rhs = _mul_right(t, dcols[i], j)
                vadd_into(rhs, _mul_left(t, i, dcols[j]), s)
                yield (i, j), lhs == rhs

    out.append(_first_failure("delta_derivation", leibniz(), lab))
    out.append(_first_failure("delta_bracket_derivation",
                              _op_bracket_derivation(D, D.delta), lab))
    return out


def validate_gbv(D: DGBVStructure) -> ValidationReport:
    rep = ValidationReport(D.name)
    rep.axioms = check_algebra_axioms(D.algebra) + check_gbv_axioms(D)
    return rep


def validate_dgbv(D: DGBVStructure, with_q: bool = True) -> ValidationReport:
    rep = validate_gbv(D)
    rep.axioms += check_dgbv_axioms(D)
    if with_q and rep.passed:
        rep.q_condition = check_q_condition(D)
    return rep


# ---------------------------------------------------------------------------
# q-conditions


@dataclass
class QConditionReport:
    im_dD: Subspace
    im_Dd: Subspace
    im_d_cap_ker_D: Subspace
    im_D_cap_ker_d: Subspace
    ker_d_cap_ker_D: Subspace
    im_d: Subspace
    equalities_hold: bool
    homology_dims: dict
    inclusions_iso: bool
    detail: dict

    @property
    def consistent(self) -> bool:
        return self.equalities_hold == self.inclusions_iso

    def as_dict(self) -> dict:
        return {
            "equalities_hold": self.equalities_hold,
            "inclusions_iso": self.inclusions_iso,
            "consistent": self.consistent,
            "subspace_dims": {
                "im_dD": self.im_dD.dim, "im_Dd": self.im_Dd.dim,
                "im_d_cap_ker_D": self.im_d_cap_ker_D.dim,
                "im_D_cap_ker_d": self.im_D_cap_ker_d.dim,
                "ker_d_cap_ker_D": self.ker_d_cap_ker_D.dim,
                "im_d": self.im_d.dim,
            },
            "homology_dims": dict(self.homology_dims),
            "maps": dict(self.detail),
        }


def q_condition(d: Matrix, D: Matrix) -> QConditionReport:
    """Both sides of the equivalence for two square-zero anticommuting maps.

    Condition (ii) compares images and kernels directly.  Condition (i) is
    decided separately from injectivity and surjectivity of the maps on
    homology induced by the inclusions Ker D -> A (for d) and Ker d -> A
    (for D).
    """
    n = d.ncols
    if d.nrows != n or D.nrows != n or D.ncols != n:
        raise StructureError("operators must be square of equal size")
    im_d, im_D = image_of(d), image_of(D)
    ker_d, ker_D = kernel_of(d), kernel_of(D)
    im_dD, im_Dd = image_of(d @ D), image_of(D @ d)
    a1 = im_d & ker_D
    a2 = im_D & ker_d
    kk = ker_d & ker_D
    eq = im_dD == im_Dd and im_dD == a1 and im_dD == a2

    def induced(op, ker_other, ker_op, im_op):
        # H(Ker other, op) -> H(A, op)
        boundaries = image_of(op.compose(_basis_matrix(ker_other)))
        cycles = ker_op & ker_other
        inj = (cycles & im_op) == boundaries
        surj = (cycles + im_op) == ker_op
        return inj, surj, cycles.dim - boundaries.dim

    inj_i, surj_i, h_kerD = induced(d, ker_D, ker_d, im_d)
    inj_j, surj_j, h_kerd = induced(D, ker_d, ker_D, im_D)
    dims = {
        "H(KerDelta,delta)": h_kerD,
        "H(A,delta)": ker_d.dim - im_d.dim,
        "H(Kerdelta,Delta)": h_kerd,
        "H(A,Delta)": ker_D.dim - im_D.dim,
        "harmonic": kk.dim - im_dD.dim,
    }
    iso = inj_i and surj_i and inj_j and surj_j
    detail = {"i_injective": inj_i, "i_surjective": surj_i,
              "j_injective": inj_j, "j_surjective": surj_j}
    return QConditionReport(im_dD, im_Dd, a1, a2, kk, im_d, eq, dims, iso, detail)


def _basis_matrix(s: Subspace) -> Matrix:
    return Matrix(s.n, max(len(s.basis), 0), [dict(v) for v in s.basis])


def check_q_condition(D: DGBVStructure) -> QConditionReport:
    if D._q is None:
        D._q = q_condition(D.delta.matrix, D.Delta.matrix)
    return D._q


def require_q(D: DGBVStructure) -> QConditionReport:
    q = check_q_condition(D)
    if not q.equalities_hold:
        raise StructureError(
            f"{D.name or 'structure'} does not satisfy the q-conditions "
            f"(dims: {q.as_dict()['subspace_dims']})")
    return q


# ---------------------------------------------------------------------------
# decomposition and cohomology


def decompose(D: DGBVStructure, z: Vector, pivot: str = "left"):
    """Split a dD-closed ``z`` as ``h + Delta u + delta v`` with h harmonic."""
    require_q(D)
    r = D.d(D.D(z))
    if r:
        raise ContractError("decompose needs delta Delta z = 0", r)
    Dz = D.D(z)
    v = D.solver("Dd", pivot).solve(Dz)
    if v is None:
        raise ConsistencyError("Delta z is not in Im Delta delta")
    z1 = vsub(z, D.d(v))
    dz1 = D.d(z1)
    u = D.solver("dD", pivot).solve(dz1)
    if u is None:
        raise ConsistencyError("delta z' is not in Im delta Delta")
    h = vsub(z1, D.D(u))
    if D.d(h) or D.D(h):
        raise ConsistencyError("harmonic part is not harmonic")
    return h, u, v


@dataclass
class CohomologyBasis:
    structure: DGBVStructure
    representatives: list
    degrees: list
    complement_of: Subspace  # Im dD inside Ker d & Ker D
    names: list

    def __post_init__(self):
        n = self.structure.dim
        cols = [dict(e) for e in self.representatives] + [dict(b) for b in self.complement_of.basis]
        self._k = len(self.representatives)
        self._solver = LinearSolver(Matrix(n, len(cols), cols))

    def __len__(self):
        return self._k

    @property
    def parities(self):
        return [d & 1 for d in self.degrees]

    def project(self, h: Vector) -> list:
        """Coordinates of an element of Ker d & Ker D modulo Im dD."""
        x = self._solver.solve(h)
        if x is None:
            raise ContractError("element is not harmonic", h)
        return [x.get(a, 0) for a in range(self._k)]

    def classify(self, z: Vector) -> list:
        """Coordinates of the class of a delta-closed element."""
        D = self.structure
        r = D.d(z)
        if r:
            raise ContractError("element is not delta-closed", r)
        h, _, _ = decompose(D, z)
        return self.project(h)

    def element(self, coords) -> Vector:
        out: Vector = {}
        for a, c in enumerate(coords):
            if c:
                vadd_into(out, self.representatives[a], c)
        return out

    def class_index(self, label_or_index) -> int:
        if isinstance(label_or_index, int):
            if not 0 <= label_or_index < self._k:
                raise StructureError(f"class index {label_or_index} out of range")
            return label_or_index
        if label_or_index in self.names:
            return self.names.index(label_or_index)
        raise StructureError(f"unknown cohomology class {label_or_index!r}")

    def describe(self) -> list:
        labels = self.structure.algebra.basis.labels
        return [(self.names[a], self.degrees[a], format_vector(e, labels))
                for a, e in enumerate(self.representatives)]


def cohomology_basis(D: DGBVStructure) -> CohomologyBasis:
    if D._cohomology is not None:
        return D._cohomology
    q = require_q(D)
    alg = D.algebra
    u = alg.unit_index
    one = {u: 1}
    if D.D(one):
        raise StructureError("Delta 1 is nonzero; no normalized cohomology basis")
    I = q.im_dD
    if one in I:
        raise StructureError("1 lies in Im delta Delta; cohomology has no unit")
    K = q.ker_d_cap_ker_D
    reps = [one]
    degs = [0]
    span = I + Subspace(alg.dim, [one])
    candidates = []
    for d in sorted(set(alg.basis.degrees)):
        idx = set(alg.degree_subspace(d))
        coord = Subspace(alg.dim, [{i: 1} for i in idx])
        Kd = K & coord
        for v in Kd.basis:
            candidates.append((d, v))
    for d, v in candidates:
        if v in span:
            continue
        reps.append(dict(v))
        degs.append(d)
        span = span + Subspace(alg.dim, [v])
    names = _class_names(alg, reps)
    cb = CohomologyBasis(D, reps, degs, I, names)
    D._cohomology = cb
    return cb


def _class_names(alg: GradedAlgebra, reps) -> list:
    names = []
    for a, e in enumerate(reps):
        if len(e) == 1 and next(iter(e.values())) == 1:
            cand = alg.basis.labels[next(iter(e))]
        else:
            cand = f"e{a}"
        if cand in names:
            cand = f"e{a}"
        names.append(cand)
    return names
