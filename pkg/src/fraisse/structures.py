"""Finite metric structures over relational Lipschitz signatures.

Every numeric value is a :class:`fractions.Fraction`. A structure is a
finite point set with a distance matrix, one value table per predicate and
an assignment of constants to points. Construction only checks that the
data is well formed; :func:`validate` reports the metric and Lipschitz
axioms as a list of diagnostics.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels

__all__ = [
    "Predicate",
    "Signature",
    "MetricStructure",
    "PointedStructure",
    "StructureSyntaxError",
    "as_rational",
    "parse_rational",
    "validate",
    "generated_substructure",
    "canonicalize",
    "parse",
    "parse_pointed",
    "serialize",
    "serialize_pointed",
    "metric_space",
]

Rational = Fraction

_LABEL_RE = re.compile(r"^[A-Za-z0-9_.,'()\[\]{}+\-*/<>|@$%^&!?~]+$")
_RATIONAL_RE = re.compile(r"^-?[0-9]+(/[0-9]+)?$")


def parse_rational(text: str) -> Fraction:
    """Parse an integer or ``p/q`` literal. Decimals are rejected."""
    text = text.strip()
    if not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational numeral: {text!r}")
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, float):
        raise TypeError(f"floating point value {value!r} is not accepted; use a Fraction")
    try:
        # gmpy2.mpq and similar exact types
        return Fraction(int(value.numerator), int(value.denominator))
    except AttributeError:
        raise TypeError(f"cannot interpret {value!r} as a rational") from None


@dataclass(frozen=True)
class Predicate:
    name: str
    arity: int
    lipschitz: Fraction
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"predicate {self.name}: arity must be positive")
        object.__setattr__(self, "lipschitz", as_rational(self.lipschitz))
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if self.lipschitz < 0:
            raise ValueError(f"predicate {self.name}: negative Lipschitz constant")
        if self.lo > self.hi:
            raise ValueError(f"predicate {self.name}: empty range [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Signature:
    """Relational vocabulary. The distance symbol is implicit."""

    predicates: tuple[Predicate, ...] = ()
    constants: tuple[str, ...] = ()
    diameter: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "predicates", tuple(self.predicates))
        object.__setattr__(self, "constants", tuple(self.constants))
        names = [p.name for p in self.predicates] + list(self.constants)
        if len(set(names)) != len(names):
            raise ValueError("signature symbol names must be pairwise distinct")
        for name in names:
            if not _LABEL_RE.match(name):
                raise ValueError(f"invalid symbol name {name!r}")
        if self.diameter is not None:
            cap = as_rational(self.diameter)
            if cap <= 0:
                raise ValueError("diameter cap must be positive")
            object.__setattr__(self, "diameter", cap)

    def predicate(self, name: str) -> Predicate:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def unary(self) -> tuple[Predicate, ...]:
        return tuple(p for p in self.predicates if p.arity == 1)


EMPTY_SIGNATURE = Signature()


@dataclass(frozen=True, eq=False)
class MetricStructure:
    """A finite structure with exact distances and predicate tables.

    ``tables`` holds one tuple per predicate (in signature order), listing the
    values of every point tuple in ``itertools.product`` order over point
    indices. Use :meth:`build` to construct from mappings.
    """

    signature: Signature
    points: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]
    tables: tuple[tuple[Fraction, ...], ...] = ()
    constants: tuple[tuple[str, str], ...] = ()
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        points = tuple(self.points)
        n = len(points)
        if len(set(points)) != n:
            raise ValueError("point labels must be distinct")
        for p in points:
            if not isinstance(p, str) or not _LABEL_RE.match(p):
                raise ValueError(f"invalid point label {p!r}")
        dist = tuple(tuple(as_rational(v) for v in row) for row in self.dist)
        if len(dist) != n or any(len(row) != n for row in dist):
            raise ValueError("distance matrix must be square and match the point list")
        preds = self.signature.predicates
        tables = tuple(tuple(as_rational(v) for v in t) for t in self.tables)
        if len(tables) != len(preds):
            raise ValueError("one table per predicate is required")
        for p, t in zip(preds, tables):
            if len(t) != n ** p.arity:
                raise ValueError(f"table for {p.name} is not total")
        consts = dict(self.constants)
        if set(consts) != set(self.signature.constants):
            raise ValueError("every signature constant needs exactly one point")
        for c, pt in consts.items():
            if pt not in points:
                raise ValueError(f"constant {c} assigned to unknown point {pt!r}")
        constants = tuple((c, consts[c]) for c in self.signature.constants)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "constants", constants)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(points)})

    @classmethod
    def build(
        cls,
        signature: Signature,
        points: Sequence[str],
        dist,
        predicates: Mapping[str, Mapping] | None = None,
        constants: Mapping[str, str] | None = None,
    ) -> "MetricStructure":
        """Build from a full matrix (or a ``{(x, y): d}`` mapping) and value maps.

        Unary predicate maps may be keyed by labels; higher arity maps are keyed
        by label tuples.
        """
        points = tuple(points)
        n = len(points)
        idx = {p: i for i, p in enumerate(points)}
        if isinstance(dist, Mapping):
            mat = [[Fraction(0)] * n for _ in range(n)]
            for (x, y), v in dist.items():
                v = as_rational(v)
                mat[idx[x]][idx[y]] = v
                mat[idx[y]][idx[x]] = v
        else:
            mat = [[as_rational(v) for v in row] for row in dist]
        predicates = predicates or {}
        tables = []
        for p in signature.predicates:
            values = predicates.get(p.name)
            if values is None:
                raise ValueError(f"missing table for predicate {p.name}")
            table = []
            for tup in itertools.product(points, repeat=p.arity):
                key = tup[0] if p.arity == 1 and tup[0] in values else tup
                if key not in values:
                    raise ValueError(f"table for {p.name} missing entry {tup}")
                table.append(as_rational(values[key]))
            tables.append(tuple(table))
        return cls(signature, points, tuple(tuple(r) for r in mat), tuple(tables),
                   tuple((constants or {}).items()))

    # -- access -----------------------------------------------------------
    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, MetricStructure):
            return NotImplemented
        return (self.signature == other.signature and self.points == other.points
                and self.dist == other.dist and self.tables == other.tables
                and self.constants == other.constants)

    def __hash__(self):
        return hash((self.signature, self.points, self.dist, self.tables, self.constants))

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown point {label!r}") from None

    def distance(self, x: str, y: str) -> Fraction:
        return self.dist[self.index(x)][self.index(y)]

    def value(self, name: str, labels: Sequence[str] | str) -> Fraction:
        if isinstance(labels, str):
            labels = (labels,)
        return self.value_at(self._pred_position(name), tuple(self.index(x) for x in labels))

    def value_at(self, k: int, ids: Sequence[int]) -> Fraction:
        n = len(self.points)
        pos = 0
        for i in ids:
            pos = pos * n + i
        return self.tables[k][pos]

    def _pred_position(self, name: str) -> int:
        for k, p in enumerate(self.signature.predicates):
            if p.name == name:
                return k
        raise KeyError(f"unknown predicate {name!r}")

    @property
    def constant_map(self) -> dict[str, str]:
        return dict(self.constants)

    @property
    def constant_points(self) -> tuple[str, ...]:
        seen = []
        for _, p in self.constants:
            if p not in seen:
                seen.append(p)
        return tuple(seen)

    def diameter(self) -> Fraction:
        return max((max(row) for row in self.dist), default=Fraction(0))

    def induced(self, labels: Sequence[str]) -> "MetricStructure":
        """Induced structure on ``labels`` (in that order). Constants must be kept."""
        ids = [self.index(x) for x in labels]
        n = len(self.points)
        tables = []
        for p, table in zip(self.signature.predicates, self.tables):
            sub = []
            for tup in itertools.product(ids, repeat=p.arity):
                pos = 0
                for i in tup:
                    pos = pos * n + i
                sub.append(table[pos])
            tables.append(tuple(sub))
        dist = tuple(tuple(self.dist[i][j] for j in ids) for i in ids)
        return MetricStructure(self.signature, tuple(labels), dist, tuple(tables), self.constants)

    def relabel(self, mapping: Mapping[str, str]) -> "MetricStructure":
        points = tuple(mapping.get(p, p) for p in self.points)
        consts = tuple((c, mapping.get(p, p)) for c, p in self.constants)
        return MetricStructure(self.signature, points, self.dist, self.tables, consts)


@dataclass(frozen=True)
class PointedStructure:
    """A structure together with an ordered generating tuple."""

    structure: MetricStructure
    generators: tuple[str, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        s = self.structure
        for g in gens:
            s.index(g)
        covered = set(gens) | set(s.constant_points)
        missing = [p for p in s.points if p not in covered]
        if missing:
            raise ValueError(f"points {missing} are neither generators nor constants")

    @classmethod
    def full(cls, s: MetricStructure) -> "PointedStructure":
        return cls(s, s.points)

    @property
    def signature(self) -> Signature:
        return self.structure.signature

    @property
    def arity(self) -> int:
        return len(self.generators)


class StructureSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# -- validation ----------------------------------------------------------

def validate(s: MetricStructure) -> list[str]:
    """Return one diagnostic per violated structure axiom (empty if valid)."""
    out: list[str] = []
    pts = s.points
    n = len(pts)
    D = s.dist
    if n == 0:
        return out
    ints, den = kernels.scale(D)
    Di = _int_array(ints)
    cap = s.signature.diameter
    for i in np.flatnonzero(np.diagonal(Di) != 0):
        out.append(f"nonzero self-distance at {pts[i]}")
    bad = (Di != Di.T) | (Di < 0) | (Di.T < 0) | (Di == 0)
    if cap is not None:
        cap = Fraction(cap)
        bad |= Di * cap.denominator > cap.numerator * den
    for i, j in np.argwhere(np.triu(bad, 1)):
        i, j = int(i), int(j)
        if D[i][j] != D[j][i]:
            out.append(f"asymmetric distance between ({pts[i]}, {pts[j]})")
        if D[i][j] < 0 or D[j][i] < 0:
            out.append(f"negative distance between ({pts[i]}, {pts[j]})")
        elif D[i][j] == 0:
            out.append(f"indiscernible points ({pts[i]}, {pts[j]})")
        if cap is not None and D[i][j] > cap:
            out.append(f"distance exceeds diameter cap {cap} at ({pts[i]}, {pts[j]})")
    for i, j, k in kernels.triangle_violations(D):
        out.append(f"triangle inequality violated at ({pts[i]}, {pts[j]}, {pts[k]})")
    for p, table in zip(s.signature.predicates, s.tables):
        tuples = list(itertools.product(range(n), repeat=p.arity))
        for t, v in zip(tuples, table):
            if not (p.lo <= v <= p.hi):
                out.append(f"value {v} of {p.name} at {_fmt(pts, t)} outside [{p.lo}, {p.hi}]")
        for a, b in _lipschitz_violations(Di, den, table, tuples, p):
            out.append(f"Lipschitz violated for {p.name} at "
                       f"{_fmt(pts, tuples[a])}, {_fmt(pts, tuples[b])}")
    return out


def _int_array(ints) -> np.ndarray:
    top = max((abs(v) for row in ints for v in row), default=0)
    # headroom for the products formed in the Lipschitz check
    return np.array(ints, dtype=np.int64 if top < 2 ** 30 else object)


def _lipschitz_violations(Di, den, table, tuples, p, block_cells=1 << 22):
    """Pairs a < b with |v_a - v_b| > L * max_c d(t_a[c], t_b[c]), in row-major order."""
    if not tuples:
        return
    vals, vden = kernels.scale(list(table))
    L = Fraction(p.lipschitz)
    # gap/vden > L * sup/den  <=>  gap * den * L.den > L.num * vden * sup
    left_mul, right_mul = den * L.denominator, L.numerator * vden
    V = np.array(vals, dtype=object)
    small = (max(abs(v) for v in vals) * 2 * left_mul < 2 ** 62
             and Di.dtype != object and int(Di.max(initial=0)) * right_mul < 2 ** 62)
    if small:
        V = V.astype(np.int64)
    T = np.array(tuples, dtype=np.int64).reshape(len(tuples), p.arity)
    M = len(tuples)
    rows = max(1, block_cells // M)
    for start in range(0, M, rows):
        stop = min(M, start + rows)
        gap = np.abs(V[start:stop, None] - V[None, :])
        if p.arity == 0:
            sup = np.zeros((stop - start, M), dtype=Di.dtype)
        else:
            sup = Di[T[start:stop, None, 0], T[None, :, 0]]
            for c in range(1, p.arity):
                sup = np.maximum(sup, Di[T[start:stop, None, c], T[None, :, c]])
        viol = (gap != 0) & (gap * left_mul > sup * right_mul)
        viol &= np.arange(start, stop)[:, None] < np.arange(M)[None, :]
        for a, b in np.argwhere(viol):
            yield start + int(a), int(b)


def _fmt(pts, ids) -> str:
    return "(" + ", ".join(pts[i] for i in ids) + ")"


# -- substructures and quotients -------------------------------------------

def generated_substructure(s: MetricStructure, generators: Sequence[str]) -> PointedStructure:
    """Induced structure on the generators plus the constants, in that order."""
    gens = tuple(generators)
    for g in gens:
        s.index(g)
    labels = list(dict.fromkeys(gens))
    for p in s.points:
        if p in s.constant_points and p not in labels:
            labels.append(p)
    return PointedStructure(s.induced(labels), gens)


def canonicalize(s: MetricStructure) -> MetricStructure:
    """Quotient by zero distances, keeping the first occurrence of each class."""
    n = len(s.points)
    rep = list(range(n))
    for i in range(n):
        if rep[i] != i:
            continue
        for j in range(i + 1, n):
            if rep[j] == j and s.dist[i][j] == 0:
                rep[j] = i
    if all(rep[i] == i for i in range(n)):
        return s
    keep = [i for i in range(n) if rep[i] == i]
    out = s.induced([s.points[i] for i in keep])
    consts = tuple((c, s.points[rep[s.index(p)]]) for c, p in s.constants)
    return MetricStructure(out.signature, out.points, out.dist, out.tables, consts)


def metric_space(points: Sequence[str], dist, signature: Signature = EMPTY_SIGNATURE,
                 **kwargs) -> MetricStructure:
    """Shorthand for :meth:`MetricStructure.build`."""
    return MetricStructure.build(signature, points, dist, **kwargs)


# -- text format -------------------------------------------------------------
#
#   fraisse-structure 1
#   pred <name> <arity> <lipschitz> <lo> <hi>     (zero or more)
#   const <name>                                  (zero or more)
#   diameter <cap>                                (optional)
#   points <label> ...
#   dist                                          (then n-1 rows, row i lists d(i,0..i-1))
#   table <name>                                  (then n^arity rows "<labels> : <value>")
#   const <name> = <label>                        (one per constant)
#   generators <label> ...                        (optional)
#   end

HEADER = "fraisse-structure 1"


def serialize(s: MetricStructure, generators: Sequence[str] | None = None) -> str:
    lines = [HEADER]
    sig = s.signature
    for p in sig.predicates:
        lines.append(f"pred {p.name} {p.arity} {p.lipschitz} {p.lo} {p.hi}")
    for c in sig.constants:
        lines.append(f"const {c}")
    if sig.diameter is not None:
        lines.append(f"diameter {sig.diameter}")
    lines.append("points" + "".join(" " + p for p in s.points))
    lines.append("dist")
    for i in range(1, len(s.points)):
        lines.append(" ".join(str(s.dist[i][j]) for j in range(i)))
    for p, table in zip(sig.predicates, s.tables):
        lines.append(f"table {p.name}")
        for tup, v in zip(itertools.product(s.points, repeat=p.arity), table):
            lines.append(" ".join(tup) + f" : {v}")
    for c, pt in s.constants:
        lines.append(f"const {c} = {pt}")
    if generators is not None:
        lines.append("generators" + "".join(" " + g for g in generators))
    lines.append("end")
    return "\n".join(lines) + "\n"


def serialize_pointed(ps: PointedStructure) -> str:
    return serialize(ps.structure, ps.generators)


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self) -> tuple[int, list[tuple[int, str]]]:
        """Next non-blank, non-comment line as (line number, [(column, token)])."""
        while self.pos < len(self.lines):
            raw = self.lines[self.pos].rstrip("\r")
            self.pos += 1
            body = raw.split("#", 1)[0]
            toks = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", body)]
            if toks:
                return self.pos, toks
        raise StructureSyntaxError("unexpected end of input", self.pos + 1, 1)

    def peek_keyword(self) -> str | None:
        save = self.pos
        try:
            _, toks = self.next()
            return toks[0][1]
        except StructureSyntaxError:
            return None
        finally:
            self.pos = save


def _rat(tok: tuple[int, str], line: int) -> Fraction:
    try:
        return parse_rational(tok[1])
    except ValueError as exc:
        raise StructureSyntaxError(str(exc), line, tok[0]) from None


def _int(tok: tuple[int, str], line: int) -> int:
    if not tok[1].isdigit():
        raise StructureSyntaxError(f"expected a natural number, got {tok[1]!r}", line, tok[0])
    return int(tok[1])


def _parse_document(text: str) -> tuple[MetricStructure, tuple[str, ...] | None]:
    r = _Reader(text)
    line, toks = r.next()
    if " ".join(t for _, t in toks) != HEADER:
        raise StructureSyntaxError(f"expected header {HEADER!r}", line, toks[0][0])
    preds: list[Predicate] = []
    const_names: list[str] = []
    cap = None
    while True:
        line, toks = r.next()
        kw = toks[0][1]
        if kw == "pred":
            if len(toks) != 6:
                raise StructureSyntaxError("pred needs: name arity lipschitz lo hi", line, toks[0][0])
            try:
                preds.append(Predicate(toks[1][1], _int(toks[2], line), _rat(toks[3], line),
                                       _rat(toks[4], line), _rat(toks[5], line)))
            except StructureSyntaxError:
                raise
            except ValueError as exc:
                raise StructureSyntaxError(str(exc), line, toks[1][0]) from None
        elif kw == "const" and len(toks) == 2:
            const_names.append(toks[1][1])
        elif kw == "diameter":
            if len(toks) != 2:
                raise StructureSyntaxError("diameter needs one value", line, toks[0][0])
            cap = _rat(toks[1], line)
        elif kw == "points":
            labels = [t for _, t in toks[1:]]
            break
        else:
            raise StructureSyntaxError(f"unexpected keyword {kw!r}", line, toks[0][0])
    try:
        sig = Signature(tuple(preds), tuple(const_names), cap)
    except ValueError as exc:
        raise StructureSyntaxError(str(exc), line, 1) from None
    n = len(labels)
    line, toks = r.next()
    if toks[0][1] != "dist" or len(toks) != 1:
        raise StructureSyntaxError("expected 'dist'", line, toks[0][0])
    mat = [[Fraction(0)] * n for _ in range(n)]
    for i in range(1, n):
        line, toks = r.next()
        if len(toks) != i:
            raise StructureSyntaxError(f"distance row {i} needs {i} entries, got {len(toks)}",
                                       line, toks[0][0])
        for j, tok in enumerate(toks):
            mat[i][j] = mat[j][i] = _rat(tok, line)
    index = {p: i for i, p in enumerate(labels)}
    tables = []
    for p in preds:
        line, toks = r.next()
        if [t for _, t in toks] != ["table", p.name]:
            raise StructureSyntaxError(f"expected 'table {p.name}'", line, toks[0][0])
        table = [None] * (n ** p.arity)
        for _ in range(n ** p.arity):
            line, toks = r.next()
            if len(toks) != p.arity + 2 or toks[p.arity][1] != ":":
                raise StructureSyntaxError(f"table row needs {p.arity} labels, ':' and a value",
                                           line, toks[0][0])
            pos = 0
            for col, lab in toks[:p.arity]:
                if lab not in index:
                    raise StructureSyntaxError(f"unknown point {lab!r}", line, col)
                pos = pos * n + index[lab]
            if table[pos] is not None:
                raise StructureSyntaxError("duplicate table row", line, toks[0][0])
            table[pos] = _rat(toks[-1], line)
        tables.append(tuple(table))
    consts = []
    for c in const_names:
        line, toks = r.next()
        if len(toks) != 4 or toks[0][1] != "const" or toks[1][1] != c or toks[2][1] != "=":
            raise StructureSyntaxError(f"expected 'const {c} = <point>'", line, toks[0][0])
        if toks[3][1] not in index:
            raise StructureSyntaxError(f"unknown point {toks[3][1]!r}", line, toks[3][0])
        consts.append((c, toks[3][1]))
    generators = None
    line, toks = r.next()
    if toks[0][1] == "generators":
        generators = tuple(t for _, t in toks[1:])
        for col, g in toks[1:]:
            if g not in index:
                raise StructureSyntaxError(f"unknown point {g!r}", line, col)
        line, toks = r.next()
    if [t for _, t in toks] != ["end"]:
        raise StructureSyntaxError("expected 'end'", line, toks[0][0])
    try:
        s = MetricStructure(sig, tuple(labels), tuple(tuple(r_) for r_ in mat), tuple(tables),
                            tuple(consts))
    except ValueError as exc:
        raise StructureSyntaxError(str(exc), 1, 1) from None
    return s, generators


class StructureValidationError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


def parse(text: str, check: bool = True) -> MetricStructure:
    """Parse the text format. With ``check`` the result must pass :func:`validate`."""
    s, _ = _parse_document(text)
    if check:
        diags = validate(s)
        if diags:
            raise StructureValidationError(diags)
    return s


def parse_pointed(text: str, check: bool = True) -> PointedStructure:
    """Parse a structure; generators default to all points in order."""
    s, gens = _parse_document(text)
    if check:
        diags = validate(s)
        if diags:
            raise StructureValidationError(diags)
    return PointedStructure(s, gens if gens is not None else s.points)


__all__.append("StructureValidationError")
