"""Line-oriented text format for algebras, morphisms and run directives.

Example::

    # comments start with '#'
    algebra A
      basis 1:0 x:2 y:2 X:6 Y:6 w:8 v:3 a:4 b:4 c:5
      product x y = -a          # y x is filled in with the Koszul sign
      delta v = a
      Delta v = b
      Delta a = -c
      integral w
    end
    fixture T = sum(pd4(),acyclic(2))
    morphism f : A -> T
      map x = L_x
    end
    order 6
    class x

Linear combinations are ``c*label`` terms joined by ``+``/``-`` with integer
or ``p/q`` coefficients.  Unlisted products, operator images and morphism
columns are zero (products with the unit ``1`` are implied).  Operators have
degree 1 unless a ``shift delta k`` line says otherwise; the unit is the first
basis element unless a ``unit LABEL`` line names another.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .algebra import GradedAlgebra, GradedBasis, LinearOperator, StructureError, format_rational
from .linalg import Matrix
from .structure import DGBVStructure

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
LABEL_RE = re.compile(r"[A-Za-z0-9_.^'*]+$")
COEF_RE = re.compile(r"[0-9]+(/[0-9]+)?$")
DIRECTIVES = ("order", "class", "seed", "trials")


class DocumentError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass
class AlgebraSpec:
    name: str
    labels: list = field(default_factory=list)
    degrees: list = field(default_factory=list)
    products: dict = field(default_factory=dict)   # (i, j) -> {k: c}
    delta: dict = field(default_factory=dict)      # i -> {k: c}
    Delta: dict = field(default_factory=dict)
    shifts: dict = field(default_factory=lambda: {"delta": 1, "Delta": 1})
    integral: Optional[dict] = None
    unit: int = 0
    fixture: Optional[str] = None
    line: int = 1


@dataclass
class MorphismSpec:
    name: str
    source: str
    target: str
    columns: dict = field(default_factory=dict)    # source label -> {target label: c}
    line: int = 1


@dataclass
class AlgebraDocument:
    algebras: list = field(default_factory=list)
    morphisms: list = field(default_factory=list)
    directives: dict = field(default_factory=dict)
    _built: dict = field(default_factory=dict, repr=False)

    def algebra_names(self) -> list:
        return [a.name for a in self.algebras]

    def algebra_spec(self, name: Optional[str] = None) -> AlgebraSpec:
        if not self.algebras:
            raise DocumentError("document declares no algebra")
        if name is None:
            return self.algebras[0]
        for a in self.algebras:
            if a.name == name:
                return a
        raise DocumentError(f"unknown algebra {name!r}")

    def structure(self, name: Optional[str] = None) -> DGBVStructure:
        spec = self.algebra_spec(name)
        if spec.name not in self._built:
            self._built[spec.name] = build_structure(spec)
        return self._built[spec.name]

    def morphism(self, name: Optional[str] = None):
        from .morphisms import DGBVMorphism
        if not self.morphisms:
            raise DocumentError("document declares no morphism")
        ms = self.morphisms[0] if name is None else next(
            (m for m in self.morphisms if m.name == name), None)
        if ms is None:
            raise DocumentError(f"unknown morphism {name!r}")
        S, T = self.structure(ms.source), self.structure(ms.target)
        sl, tl = S.algebra.basis.labels, T.algebra.basis.labels
        cols = [dict() for _ in range(S.dim)]
        for lab, img in ms.columns.items():
            if lab not in sl:
                raise DocumentError(f"morphism {ms.name}: unknown source label {lab!r}", ms.line)
            v = {}
            for t, c in img.items():
                if t not in tl:
                    raise DocumentError(f"morphism {ms.name}: unknown target label {t!r}", ms.line)
                v[tl.index(t)] = c
            cols[sl.index(lab)] = v
        try:
            return DGBVMorphism(S, T, cols, ms.name)
        except StructureError as e:
            raise DocumentError(f"morphism {ms.name}: {e}", ms.line) from None


def build_structure(spec: AlgebraSpec) -> DGBVStructure:
    try:
        if spec.fixture is not None:
            from .fixtures import parse_fixture
            D = parse_fixture(spec.fixture)
            D.name = spec.name
            return D
        basis = GradedBasis(tuple(spec.labels), tuple(spec.degrees))
        alg = GradedAlgebra(basis, dict(spec.products), spec.unit)
        n = len(basis)
        ops = {}
        for nm in ("delta", "Delta"):
            cols = [dict(getattr(spec, nm).get(i, {})) for i in range(n)]
            ops[nm] = LinearOperator(basis, Matrix(n, n, cols), spec.shifts[nm], nm)
        return DGBVStructure(alg, ops["delta"], ops["Delta"], spec.name, spec.integral)
    except (StructureError, ValueError, ZeroDivisionError) as e:
        raise DocumentError(f"algebra {spec.name}: {e}", spec.line) from None


# ---------------------------------------------------------------------------
# parsing


class _Line:
    def __init__(self, num: int, text: str):
        self.num = num
        self.text = text

    def err(self, msg: str, col: int = 1) -> DocumentError:
        return DocumentError(msg, self.num, col)

    def col_of(self, token: str, start: int = 0) -> int:
        k = self.text.find(token, start)
        return (k if k >= 0 else 0) + 1


def _parse_coefficient(tok: str, line: _Line, col: int) -> Fraction:
    if not COEF_RE.match(tok):
        raise line.err(f"non-rational coefficient {tok!r}", col)
    c = Fraction(tok)
    return c


def parse_lincomb(text: str, line: _Line, offset: int, labels: Optional[list] = None) -> dict:
    """``-3/2*a + b - c`` -> {label: Fraction}; ``0`` is the empty combination."""
    s = text.strip()
    base = offset + (len(text) - len(text.lstrip()))
    if not s:
        raise line.err("expected a linear combination", base + 1)
    if s == "0":
        return {}
    out: dict = {}
    pos = 0
    first = True
    n = len(s)
    while pos < n:
        while pos < n and s[pos] == " ":
            pos += 1
        sign = 1
        if pos < n and s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
        elif not first:
            raise line.err("expected '+' or '-'", base + pos + 1)
        while pos < n and s[pos] == " ":
            pos += 1
        start = pos
        while pos < n and s[pos] not in "+-":
            pos += 1
        term = s[start:pos].strip()
        col = base + start + 1
        if not term:
            raise line.err("empty term", col)
        head, star, tail = term.partition("*")
        if star and re.match(r"[0-9./]+$", head.strip()):
            c = _parse_coefficient(head.strip(), line, col)
            lab = tail.strip()
        else:
            c, lab = Fraction(1), term
        if not LABEL_RE.match(lab.replace("*", "")) or " " in lab:
            raise line.err(f"bad basis label {lab!r}", col)
        if labels is not None and lab not in labels:
            raise line.err(f"unknown basis label {lab!r}", col)
        out[lab] = out.get(lab, 0) + sign * c
        first = False
    return {k: v for k, v in out.items() if v}


def parse(text: str) -> AlgebraDocument:
    """Parse a document; every rejection is a DocumentError with a location."""
    try:
        return _parse(text)
    except DocumentError:
        raise
    except Exception as e:  # parser totality: never leak a bare exception
        raise DocumentError(f"unreadable input ({type(e).__name__}: {e})") from None


def _parse(text: str) -> AlgebraDocument:
    if not isinstance(text, str):
        raise DocumentError("document must be text")
    doc = AlgebraDocument()
    block = None          # AlgebraSpec or MorphismSpec being read
    pending_products = {}  # explicit (i, j) entries of the current algebra
    names = set()
    for num, raw in enumerate(text.splitlines(), 1):
        line = _Line(num, raw)
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        if "\t" in body:
            body = body.replace("\t", " ")
        stripped = body.lstrip()
        indent = len(body) - len(stripped)
        head, _, rest = stripped.partition(" ")
        rest_off = indent + len(head) + 1
        if block is None:
            if head == "algebra":
                nm = rest.strip()
                if not NAME_RE.match(nm):
                    raise line.err(f"bad algebra name {nm!r}", rest_off + 1)
                if nm in names:
                    raise line.err(f"duplicate name {nm!r}", rest_off + 1)
                names.add(nm)
                block = AlgebraSpec(nm, line=num)
                pending_products = {}
            elif head == "fixture":
                m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S.*)$", rest)
                if not m:
                    raise line.err("expected 'fixture NAME = EXPR'", rest_off + 1)
                nm, expr = m.group(1), m.group(2).replace(" ", "")
                if nm in names:
                    raise line.err(f"duplicate name {nm!r}", rest_off + 1)
                from .fixtures import parse_fixture
                try:
                    parse_fixture(expr)
                except (StructureError, ValueError) as e:
                    raise line.err(f"bad fixture expression: {e}", line.col_of(m.group(2))) from None
                names.add(nm)
                doc.algebras.append(AlgebraSpec(nm, fixture=expr, line=num))
            elif head == "morphism":
                m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*:\s*([A-Za-z_][A-Za-z0-9_]*)\s*->\s*"
                             r"([A-Za-z_][A-Za-z0-9_]*)\s*$", rest)
                if not m:
                    raise line.err("expected 'morphism NAME : SOURCE -> TARGET'", rest_off + 1)
                nm, src, tgt = m.groups()
                for x in (src, tgt):
                    if x not in {a.name for a in doc.algebras}:
                        raise line.err(f"unknown algebra {x!r}", line.col_of(x, rest_off))
                if nm in names:
                    raise line.err(f"duplicate name {nm!r}", rest_off + 1)
                names.add(nm)
                block = MorphismSpec(nm, src, tgt, line=num)
            elif head in DIRECTIVES:
                _directive(doc, head, rest, line, rest_off)
            elif head == "end":
                raise line.err("'end' without an open block", indent + 1)
            else:
                raise line.err(f"unknown statement {head!r}", indent + 1)
            continue
        if head == "end":
            if rest.strip():
                raise line.err("unexpected text after 'end'", rest_off + 1)
            if isinstance(block, AlgebraSpec):
                _finish_algebra(block, pending_products, line)
                doc.algebras.append(block)
            else:
                doc.morphisms.append(block)
            block = None
            continue
        if isinstance(block, AlgebraSpec):
            _algebra_line(block, head, rest, line, rest_off, pending_products)
        else:
            _morphism_line(doc, block, head, rest, line, rest_off)
    if block is not None:
        kind = "algebra" if isinstance(block, AlgebraSpec) else "morphism"
        raise DocumentError(f"{kind} {block.name} is missing 'end'", block.line)
    for a in doc.algebras:
        doc.structure(a.name)
    for m in doc.morphisms:
        doc.morphism(m.name)
    return doc


def _directive(doc, head, rest, line, off):
    val = rest.strip()
    if head in doc.directives:
        raise line.err(f"duplicate directive {head!r}")
    if head in ("order", "seed", "trials"):
        if not re.match(r"[0-9]+$", val):
            raise line.err(f"{head} needs a nonnegative integer", off + 1)
        v = int(val)
        if head == "order" and not 1 <= v <= 64:
            raise line.err("order must be between 1 and 64", off + 1)
        doc.directives[head] = v
    else:
        if not LABEL_RE.match(val):
            raise line.err("class needs a basis label", off + 1)
        doc.directives[head] = val


def _label_index(block: AlgebraSpec, lab: str, line: _Line, col: int) -> int:
    if lab not in block.labels:
        raise line.err(f"unknown basis label {lab!r}", col)
    return block.labels.index(lab)


def _vec(block: AlgebraSpec, comb: dict) -> dict:
    return {block.labels.index(k): c for k, c in comb.items()}


def _algebra_line(block: AlgebraSpec, head, rest, line, off, explicit):
    if head == "basis":
        if block.products or block.delta or block.Delta or block.integral is not None:
            raise line.err("basis must come before products, operators and integral")
        pos = off
        for tok in rest.split():
            col = line.col_of(tok, pos) if pos < len(line.text) else pos + 1
            pos = col + len(tok) - 1
            lab, sep, deg = tok.rpartition(":")
            if not sep or not lab:
                raise line.err(f"expected LABEL:DEGREE, got {tok!r}", col)
            if (not LABEL_RE.match(lab) or (COEF_RE.match(lab) and lab != "1")
                    or re.match(r"[0-9./]+\*", lab)):
                raise line.err(f"bad basis label {lab!r}", col)
            if not re.match(r"-?[0-9]+$", deg):
                raise line.err(f"degree of {lab!r} must be an integer", col + len(lab) + 1)
            if lab in block.labels:
                raise line.err(f"duplicate basis label {lab!r}", col)
            block.labels.append(lab)
            block.degrees.append(int(deg))
        return
    if not block.labels:
        raise line.err("basis must be nonempty", 1)
    if head == "product":
        m = re.match(r"\s*(\S+)\s+(\S+)\s*=(.*)$", rest)
        if not m:
            raise line.err("expected 'product A B = COMBINATION'", off + 1)
        i = _label_index(block, m.group(1), line, line.col_of(m.group(1), off))
        j = _label_index(block, m.group(2), line, line.col_of(m.group(2), off + len(m.group(1))))
        if (i, j) in explicit:
            raise line.err(f"product {m.group(1)} {m.group(2)} given twice", off + 1)
        comb = parse_lincomb(m.group(3), line, off + m.start(3), block.labels)
        explicit[(i, j)] = _vec(block, comb)
        return
    if head in ("delta", "Delta"):
        m = re.match(r"\s*(\S+)\s*=(.*)$", rest)
        if not m:
            raise line.err(f"expected '{head} A = COMBINATION'", off + 1)
        i = _label_index(block, m.group(1), line, line.col_of(m.group(1), off))
        tab = getattr(block, head)
        if i in tab:
            raise line.err(f"{head} {m.group(1)} given twice", off + 1)
        tab[i] = _vec(block, parse_lincomb(m.group(2), line, off + m.start(2), block.labels))
        return
    if head == "unit":
        lab = rest.strip()
        block.unit = _label_index(block, lab, line, line.col_of(lab, off))
        return
    if head == "shift":
        m = re.match(r"\s*(delta|Delta)\s+(-?[0-9]+)\s*$", rest)
        if not m:
            raise line.err("expected 'shift delta|Delta INTEGER'", off + 1)
        block.shifts[m.group(1)] = int(m.group(2))
        return
    if head == "integral":
        if block.integral is not None:
            raise line.err("integral given twice", 1)
        block.integral = _vec(block, parse_lincomb(rest, line, off, block.labels))
        return
    raise line.err(f"unknown algebra statement {head!r}", line.col_of(head))


def _finish_algebra(block: AlgebraSpec, explicit: dict, line: _Line):
    if not block.labels:
        raise DocumentError("basis must be nonempty", block.line)
    par = [d & 1 for d in block.degrees]
    prods = dict(explicit)
    for (i, j), v in explicit.items():
        if (j, i) not in explicit:
            s = -1 if par[i] and par[j] else 1
            prods[(j, i)] = {k: s * c for k, c in v.items()}
    block.products = prods


def _morphism_line(doc, block: MorphismSpec, head, rest, line, off):
    if head != "map":
        raise line.err(f"unknown morphism statement {head!r}", line.col_of(head))
    m = re.match(r"\s*(\S+)\s*=(.*)$", rest)
    if not m:
        raise line.err("expected 'map A = COMBINATION'", off + 1)
    lab = m.group(1)
    src = doc.structure(block.source).algebra.basis.labels
    tgt = doc.structure(block.target).algebra.basis.labels
    if lab not in src:
        raise line.err(f"unknown source label {lab!r}", line.col_of(lab, off))
    if lab in block.columns:
        raise line.err(f"map {lab} given twice", off + 1)
    block.columns[lab] = parse_lincomb(m.group(2), line, off + m.start(2), list(tgt))


# ---------------------------------------------------------------------------
# serialization


def _fmt_comb(v: dict, labels) -> str:
    if not v:
        return "0"
    out = []
    for k in sorted(v):
        c = Fraction(v[k])
        lab = labels[k]
        mag = abs(c)
        term = lab if mag == 1 else f"{format_rational(mag)}*{lab}"
        if not out:
            out.append(("-" if c < 0 else "") + term)
        else:
            out.append(("- " if c < 0 else "+ ") + term)
    return " ".join(out)


def structure_to_text(D: DGBVStructure, name: Optional[str] = None) -> str:
    """Canonical algebra block for a structure."""
    alg = D.algebra
    labels = alg.basis.labels
    degs = alg.basis.degrees
    par = alg.parities
    n = alg.dim
    u = alg.unit_index
    lines = [f"algebra {name or _safe_name(D.name)}",
             "  basis " + " ".join(f"{l}:{d}" for l, d in zip(labels, degs))]
    if u:
        lines.append(f"  unit {labels[u]}")
    for nm, op in (("delta", D.delta), ("Delta", D.Delta)):
        if op.degree_shift != 1:
            lines.append(f"  shift {nm} {op.degree_shift}")
    t = alg.table
    for i in range(n):
        for j in range(n):
            v = t[i][j]
            if i == u or j == u:
                k = j if i == u else i
                if v != {k: 1}:
                    lines.append(f"  product {labels[i]} {labels[j]} = {_fmt_comb(v, labels)}")
                continue
            if i > j:
                s = -1 if par[i] and par[j] else 1
                if v == {k: s * c for k, c in t[j][i].items()}:
                    continue
                lines.append(f"  product {labels[i]} {labels[j]} = {_fmt_comb(v, labels)}")
            elif v:
                lines.append(f"  product {labels[i]} {labels[j]} = {_fmt_comb(v, labels)}")
    for nm, op in (("delta", D.delta), ("Delta", D.Delta)):
        for i, col in enumerate(op.matrix.cols):
            if col:
                lines.append(f"  {nm} {labels[i]} = {_fmt_comb(col, labels)}")
    if D.integral:
        lines.append(f"  integral {_fmt_comb(D.integral, labels)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def _safe_name(name: str) -> str:
    s = re.sub(r"[^A-Za-z0-9_]", "_", name or "A").strip("_") or "A"
    if not NAME_RE.match(s):
        s = "A_" + s
    return s


def serialize(doc: AlgebraDocument) -> str:
    """Canonical text of a document: spacing, ordering and coefficients normalized."""
    parts = []
    for a in doc.algebras:
        if a.fixture is not None:
            parts.append(f"fixture {a.name} = {a.fixture}\n")
        else:
            parts.append(structure_to_text(doc.structure(a.name), a.name))
    for m in doc.morphisms:
        parts.append(morphism_to_text(doc.morphism(m.name), m.name, m.source, m.target))
    for k in DIRECTIVES:
        if k in doc.directives:
            parts.append(f"{k} {doc.directives[k]}\n")
    return "".join(parts)


def morphism_to_text(f, name: str, source: str, target: str) -> str:
    sl, tl = f.source.algebra.basis.labels, f.target.algebra.basis.labels
    lines = [f"morphism {name} : {source} -> {target}"]
    for j, col in enumerate(f.columns):
        if col:
            lines.append(f"  map {sl[j]} = {_fmt_comb(col, tl)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def load(path) -> AlgebraDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError as e:
        raise DocumentError(f"input is not UTF-8 ({e.reason})") from None
    return parse(text)
