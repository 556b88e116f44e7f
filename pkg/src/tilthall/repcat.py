"""Algebras given by quivers with relations or by multiplication tables, and
their finite-dimensional left modules.

A module is stored as a representation of the algebra's generator quiver:
one vector space per vertex (a single vertex for table algebras) and one
block matrix per generator.  For quiver algebras the generators are the
arrows and the vertex idempotents act as coordinate projections; for table
algebras every basis element is a generator acting on the single space.

Paths are written in traversal order, so the path [a, b] means "first a,
then b"; as algebra elements the product u * v means "v first, then u",
which makes X(u * v) = X(u) X(v) for left modules.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from . import ffla
from .errors import (AlgebraMismatch, AlgebraTooLarge, CapExceeded,
                     InfiniteDimensional, InvalidModule, MalformedRelation,
                     NonAssociative, ParseError)
from .ffla import Field

PATH_LENGTH_CAP = 32
PATH_COUNT_CAP = 20000
DEFAULT_EXHAUST_CAP = 2 ** 16
DEFAULT_RETRY_CAP = 256
DEFAULT_SEED = 20240601


def default_submodule_cap(q: int) -> int:
    return {2: 8, 3: 6}.get(q, 4)


def _canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Gen:
    label: str
    src: int
    tgt: int
    vec: tuple          # coordinates in the algebra basis


class BoundAlgebra:
    """A finite-dimensional algebra over a finite field."""

    def __init__(self, field: Field, kind: str, basis_labels, mult, unit,
                 vertex_labels, gens, doc, basis_paths=None, relations=None,
                 arrows=None, basis_ends=None, hom_gen_idx=None):
        self.field = field
        self.kind = kind
        self.basis_labels = list(basis_labels)
        self.dim = len(self.basis_labels)
        self.mult = mult                    # mult[i, j, k]: b_i * b_j -> b_k
        self.unit = np.asarray(unit, dtype=np.int64)
        self.vertex_labels = list(vertex_labels)
        self.nverts = len(self.vertex_labels)
        self.gens = list(gens)
        self.doc = doc
        self.basis_paths = basis_paths      # quiver: (start, arrows tuple)
        self.relations = relations or []
        self.arrows = arrows or []
        self.basis_ends = basis_ends        # quiver: (start, end) per basis elt
        self.hom_gen_idx = list(hom_gen_idx) if hom_gen_idx is not None else list(range(len(self.gens)))
        self.hash = hashlib.sha256(_canonical_json(doc).encode()).hexdigest()[:16]
        self._opposite = None
        self._cache = {}

    def __repr__(self):
        return f"BoundAlgebra({self.kind}, dim={self.dim}, {self.field}, {self.hash})"

    @property
    def is_quiver(self) -> bool:
        return self.kind == "quiver"

    def same_as(self, other) -> bool:
        return self is other or (isinstance(other, BoundAlgebra) and self.hash == other.hash
                                 and self.kind == other.kind)

    # element arithmetic ------------------------------------------------
    def multiply(self, x, y) -> np.ndarray:
        F = self.field
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        out = np.zeros(self.dim, dtype=np.int64)
        for i in np.flatnonzero(x):
            for j in np.flatnonzero(y):
                c = F.mul(x[i], y[j])
                out = F.add(out, F.mul(c, self.mult[i, j]))
        return out

    def basis_vector(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[i] = 1
        return v

    def left_mult_matrix(self, x) -> np.ndarray:
        """Matrix of y -> x * y on basis coordinates (columns = images)."""
        cols = [self.multiply(x, self.basis_vector(j)) for j in range(self.dim)]
        return np.array(cols, dtype=np.int64).T.reshape(self.dim, self.dim)

    def right_mult_matrix(self, x) -> np.ndarray:
        cols = [self.multiply(self.basis_vector(j), x) for j in range(self.dim)]
        return np.array(cols, dtype=np.int64).T.reshape(self.dim, self.dim)

    # accessors ------------------------------------------------------------
    def opposite(self) -> "BoundAlgebra":
        if self._opposite is None:
            op = _build_opposite(self)
            op._opposite = self
            self._opposite = op
        return self._opposite

    def regular_module(self) -> "Rep":
        if "regular" not in self._cache:
            self._cache["regular"] = _regular_module(self)
        return self._cache["regular"]

    def projectives(self) -> list:
        if "projectives" not in self._cache:
            self._cache["projectives"] = _projectives(self)
        return self._cache["projectives"]

    def simples(self) -> list:
        if "simples" not in self._cache:
            self._cache["simples"] = [info.simple for info in self.projectives()]
        return self._cache["simples"]

    def radical_basis(self) -> np.ndarray:
        """Rows spanning the Jacobson radical of the algebra."""
        if "radical" not in self._cache:
            self._cache["radical"] = _algebra_radical(self)
        return self._cache["radical"]

    def to_document(self) -> dict:
        return self.doc


def opposite_algebra(A: BoundAlgebra) -> BoundAlgebra:
    return A.opposite()


# ---------------------------------------------------------------------------
# parsing


def _parse_field(doc) -> Field:
    try:
        fd = doc["field"]
        return ffla.field_make(int(fd["p"]), int(fd.get("e", 1)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"field: {exc}") from exc


def parse_algebra(doc) -> BoundAlgebra:
    """Build an algebra from a spec document (dict or JSON string)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or "presentation" not in doc:
        raise ParseError("algebra document needs a 'presentation' key")
    pres = doc["presentation"]
    if pres == "quiver":
        return _parse_quiver(doc)
    if pres == "table":
        return _parse_table(doc)
    raise ParseError(f"unknown presentation {pres!r}")


def _path_end(start, arrows_t, arrows):
    return arrows[arrows_t[-1]][2] if arrows_t else start


def _path_key(path, arrows, vlabels):
    start, ar = path
    return (len(ar), [arrows[a][0] for a in ar], start)


def _parse_quiver(doc) -> BoundAlgebra:
    F = _parse_field(doc)
    try:
        vlabels = [str(v) for v in doc["vertices"]]
        vidx = {v: i for i, v in enumerate(vlabels)}
        arrows = []
        for a in doc.get("arrows", []):
            arrows.append((str(a["name"]), vidx[str(a["from"])], vidx[str(a["to"])]))
    except KeyError as exc:
        raise ParseError(f"quiver: missing or unknown key {exc}") from exc
    aidx = {a[0]: i for i, a in enumerate(arrows)}
    if len(aidx) != len(arrows):
        raise MalformedRelation("duplicate arrow names")

    relations = []
    for rel in doc.get("relations", []):
        terms = []
        ends = set()
        for term in rel:
            try:
                names = term["path"]
                coef = F.deserialize(term.get("coefficient", 1))
            except (KeyError, TypeError) as exc:
                raise MalformedRelation(f"bad relation term {term!r}") from exc
            if not names:
                raise MalformedRelation("relation paths must have positive length")
            try:
                path = tuple(aidx[n] for n in names)
            except KeyError as exc:
                raise MalformedRelation(f"unknown arrow {exc}") from exc
            for x, y in zip(path, path[1:]):
                if arrows[x][2] != arrows[y][1]:
                    raise MalformedRelation(f"path {names} is not composable")
            ends.add((arrows[path[0]][1], arrows[path[-1]][2]))
            if coef:
                terms.append((int(coef), path))
        if len(ends) > 1:
            raise MalformedRelation("relation paths are not parallel")
        if terms:
            relations.append(terms)

    maxrel = max((len(p) for r in relations for _, p in r), default=0)

    def paths_of_length(n):
        if n == 0:
            return [(v, ()) for v in range(len(vlabels))]
        out = []
        for (s, ar) in paths_of_length.cache[n - 1]:
            end = _path_end(s, ar, arrows)
            for ai, a in enumerate(arrows):
                if a[1] == end:
                    out.append((s, ar + (ai,)))
        return out
    paths_of_length.cache = {}

    def get_paths(n):
        if n not in paths_of_length.cache:
            paths_of_length.cache[n] = paths_of_length(n)
        return paths_of_length.cache[n]

    total = 0
    nil_length = None
    for n in range(0, PATH_LENGTH_CAP + 1):
        total += len(get_paths(n))
        if total > PATH_COUNT_CAP:
            raise InfiniteDimensional(f"more than {PATH_COUNT_CAP} paths up to length {n}")
        if n == 0:
            continue
        if not get_paths(n):
            nil_length = n
            break
        if not relations:
            continue
        L = n + maxrel
        ok, _, _ = _ideal_span(F, arrows, relations, get_paths, L, n)
        if ok:
            nil_length = n
            break
    if nil_length is None:
        raise InfiniteDimensional(f"paths of length {PATH_LENGTH_CAP} survive the relations")

    N = nil_length
    cols = [p for n in range(N) for p in get_paths(n)]
    _, span, col_index = _ideal_span(F, arrows, relations, get_paths, N - 1 + maxrel, None, keep=N)
    order = sorted(range(len(cols)), key=lambda i: _path_key(cols[i], [a for a in arrows], vlabels))
    # columns ordered from largest to smallest so pivots are leading terms
    desc = list(reversed(order))
    if span.shape[0]:
        M = span[:, [col_index[cols[i]] for i in desc]]
        R, piv = ffla.rref(F, M)
    else:
        R, piv = np.zeros((0, len(cols)), dtype=np.int64), []
    pivot_cols = {desc[c] for c in piv}
    basis_idx = [i for i in order if i not in pivot_cols]
    basis_paths = [cols[i] for i in basis_idx]
    bpos = {cols[i]: k for k, i in enumerate(basis_idx)}
    dim = len(basis_paths)
    # normal form of every path of length < N
    normal = {}
    for k, i in enumerate(basis_idx):
        v = np.zeros(dim, dtype=np.int64)
        v[k] = 1
        normal[cols[i]] = v
    for r, c in enumerate(piv):
        path = cols[desc[c]]
        v = np.zeros(dim, dtype=np.int64)
        for c2 in np.flatnonzero(R[r]):
            if c2 == c:
                continue
            v[bpos[cols[desc[c2]]]] = F.neg(R[r, c2])
        normal[path] = v

    def reduce_path(path):
        if len(path[1]) >= N:
            return np.zeros(dim, dtype=np.int64)
        return normal[path]

    mult = np.zeros((dim, dim, dim), dtype=np.int64)
    for i, (si, ai) in enumerate(basis_paths):
        ei = _path_end(si, ai, arrows)
        for j, (sj, aj) in enumerate(basis_paths):
            ej = _path_end(sj, aj, arrows)
            # b_i * b_j : first b_j, then b_i
            if ej != si:
                continue
            mult[i, j] = reduce_path((sj, aj + ai))
    unit = np.zeros(dim, dtype=np.int64)
    for v in range(len(vlabels)):
        unit = F.add(unit, reduce_path((v, ())))

    labels = []
    for (s, ar) in basis_paths:
        if not ar:
            labels.append(f"e{vlabels[s]}")
        else:
            labels.append("*".join(arrows[a][0] for a in ar))
    gens = [Gen(a[0], a[1], a[2], tuple(int(x) for x in reduce_path((a[1], (ai,)))))
            for ai, a in enumerate(arrows)]
    basis_ends = [(s, _path_end(s, ar, arrows)) for (s, ar) in basis_paths]
    canon = _canonical_quiver_doc(doc, F)
    return BoundAlgebra(F, "quiver", labels, mult, unit, vlabels, gens, canon,
                        basis_paths=basis_paths, relations=relations, arrows=arrows,
                        basis_ends=basis_ends)


def _canonical_quiver_doc(doc, F):
    return {
        "field": {"p": F.p, "e": F.e},
        "presentation": "quiver",
        "vertices": [str(v) for v in doc["vertices"]],
        "arrows": [{"name": str(a["name"]), "from": str(a["from"]), "to": str(a["to"])}
                   for a in doc.get("arrows", [])],
        "relations": [[{"coefficient": t.get("coefficient", 1), "path": list(t["path"])}
                       for t in rel] for rel in doc.get("relations", [])],
    }


def _ideal_span(F, arrows, relations, get_paths, L, check_n, keep=None):
    """Span of u r v with total length <= L, as rows over paths of length <= L.

    With check_n set, also report whether all paths of that length lie in
    the span.  With keep set, only coordinates of length < keep are kept.
    """
    max_len = L if keep is None else keep - 1
    cols = [p for n in range(max_len + 1) for p in get_paths(n)]
    col_index = {p: i for i, p in enumerate(cols)}
    rows = []
    for rel in relations:
        rl = max(len(p) for _, p in rel)
        start = arrows[rel[0][1][0]][1]
        end = arrows[rel[0][1][-1]][2]
        for lv in range(0, L - rl + 1):
            for (sv, av) in get_paths(lv):
                if _path_end(sv, av, arrows) != start:
                    continue
                for lu in range(0, L - rl - lv + 1):
                    for (su, au) in get_paths(lu):
                        if su != end:
                            continue
                        row = np.zeros(len(cols), dtype=np.int64)
                        for coef, p in rel:
                            full = (sv, av + p + au)
                            if full in col_index:
                                row[col_index[full]] = F.add(row[col_index[full]], coef)
                        if np.any(row):
                            rows.append(row)
    span = np.array(rows, dtype=np.int64).reshape(len(rows), len(cols))
    ok = False
    if check_n is not None:
        targets = get_paths(check_n)
        if span.shape[0] == 0:
            ok = not targets
        else:
            basis = ffla.row_space(F, span)
            r0 = basis.shape[0]
            ok = True
            for t in targets:
                v = np.zeros(len(cols), dtype=np.int64)
                v[col_index[t]] = 1
                if ffla.rank(F, np.vstack([basis, v])) != r0:
                    ok = False
                    break
    return ok, span, col_index


def _parse_table(doc) -> BoundAlgebra:
    F = _parse_field(doc)
    try:
        labels = [str(b) for b in doc["basis"]]
        dim = len(labels)
        unit = np.array([F.deserialize(u) for u in doc["unit"]], dtype=np.int64)
        consts = doc["structure_constants"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"table: {exc}") from exc
    if unit.shape != (dim,):
        raise ParseError("unit has the wrong length")
    mult = np.zeros((dim, dim, dim), dtype=np.int64)
    for entry in consts:
        i, j, k, c = entry
        mult[int(i), int(j), int(k)] = F.add(mult[int(i), int(j), int(k)], F.deserialize(c))
    canon = {
        "field": {"p": F.p, "e": F.e},
        "presentation": "table",
        "basis": labels,
        "unit": [F.serialize(x) for x in unit],
        "structure_constants": sorted([int(i), int(j), int(k), F.serialize(mult[i, j, k])]
                                      for i in range(dim) for j in range(dim)
                                      for k in range(dim) if mult[i, j, k]),
    }
    return make_table_algebra(F, labels, mult, unit, canon)


def make_table_algebra(F: Field, labels, mult, unit, doc=None) -> BoundAlgebra:
    dim = len(labels)
    mult = np.asarray(mult, dtype=np.int64).reshape(dim, dim, dim)
    unit = np.asarray(unit, dtype=np.int64)
    if doc is None:
        doc = {
            "field": {"p": F.p, "e": F.e},
            "presentation": "table",
            "basis": list(labels),
            "unit": [F.serialize(x) for x in unit],
            "structure_constants": sorted([i, j, k, F.serialize(mult[i, j, k])]
                                          for i in range(dim) for j in range(dim)
                                          for k in range(dim) if mult[i, j, k]),
        }
    gens = [Gen(labels[i], 0, 0, tuple(int(x) for x in np.eye(dim, dtype=np.int64)[i]))
            for i in range(dim)]
    A = BoundAlgebra(F, "table", labels, mult, unit, ["*"], gens, doc,
                     basis_ends=[(0, 0)] * dim)
    _check_table(A)
    A.hom_gen_idx = _generating_subset(A)
    return A


def _check_table(A: BoundAlgebra):
    F = A.field
    d = A.dim
    # (b_i b_j) b_k versus b_i (b_j b_k), all triples
    for i in range(d):
        for j in range(d):
            left = A.mult[i, j]
            for k in range(d):
                lhs = A.multiply(left, A.basis_vector(k))
                rhs = A.multiply(A.basis_vector(i), A.mult[j, k])
                if not np.array_equal(lhs, rhs):
                    raise NonAssociative(f"(b{i} b{j}) b{k} != b{i} (b{j} b{k})")
    for i in range(d):
        e = A.basis_vector(i)
        if not (np.array_equal(A.multiply(A.unit, e), e) and np.array_equal(A.multiply(e, A.unit), e)):
            raise NonAssociative(f"unit does not act as identity on b{i}")


def _generating_subset(A: BoundAlgebra) -> list:
    F = A.field
    chosen = []
    span = ffla.row_space(F, A.unit.reshape(1, -1))
    while span.shape[0] < A.dim:
        for i in range(A.dim):
            if not ffla.in_span(F, span, A.basis_vector(i)):
                chosen.append(i)
                break
        # close under multiplication
        while True:
            rows = [r for r in span]
            for x in list(span):
                for g in chosen:
                    rows.append(A.multiply(A.basis_vector(g), x))
                    rows.append(A.multiply(x, A.basis_vector(g)))
            new = ffla.row_space(F, np.array(rows))
            if new.shape[0] == span.shape[0]:
                break
            span = new
    return chosen


def _build_opposite(A: BoundAlgebra) -> BoundAlgebra:
    F = A.field
    if A.is_quiver:
        doc = A.doc
        op_doc = {
            "field": doc["field"],
            "presentation": "quiver",
            "vertices": list(doc["vertices"]),
            "arrows": [{"name": a["name"], "from": a["to"], "to": a["from"]} for a in doc["arrows"]],
            "relations": [[{"coefficient": t["coefficient"], "path": list(reversed(t["path"]))}
                           for t in rel] for rel in doc["relations"]],
        }
        return parse_algebra(op_doc)
    d = A.dim
    mult = np.transpose(A.mult, (1, 0, 2)).copy()
    return make_table_algebra(F, [f"{b}^op" if not b.endswith("^op") else b[:-3]
                                  for b in A.basis_labels], mult, A.unit)


def to_opposite_element(A: BoundAlgebra, x) -> np.ndarray:
    """Image of x in A^op under the identity-on-paths anti-isomorphism."""
    x = np.asarray(x, dtype=np.int64)
    if not A.is_quiver:
        return x.copy()
    op = A.opposite()
    F = A.field
    out = np.zeros(op.dim, dtype=np.int64)
    for i in np.flatnonzero(x):
        s, ar = A.basis_paths[i]
        vec = _path_element(op, s if not ar else A.arrows[ar[-1]][2], tuple(reversed(ar)))
        out = F.add(out, F.mul(x[i], vec))
    return out


def _path_element(A: BoundAlgebra, start: int, arrows_t: tuple) -> np.ndarray:
    """Algebra element of a path given by arrow indices in traversal order."""
    F = A.field
    cur = None
    for v in range(A.nverts):
        if v == start:
            cur = np.zeros(A.dim, dtype=np.int64)
            idx = A.basis_paths.index((v, ()))
            cur[idx] = 1
    for a in arrows_t:
        cur = A.multiply(np.array(A.gens[a].vec, dtype=np.int64), cur)
    return cur


# ---------------------------------------------------------------------------
# modules

_UID = itertools.count()


class Rep:
    """A finite-dimensional left module, immutable after construction."""

    def __init__(self, algebra: BoundAlgebra, dims, mats, check: bool = False):
        self.algebra = algebra
        self.dims = tuple(int(d) for d in dims)
        F = algebra.field
        ms = []
        for g, m in zip(algebra.gens, mats):
            arr = np.asarray(m, dtype=np.int64).reshape(self.dims[g.tgt], self.dims[g.src])
            ms.append(arr)
        if len(ms) != len(algebra.gens):
            raise InvalidModule("one matrix per generator is required")
        self.mats = tuple(ms)
        self.dim = sum(self.dims)
        self.offsets = tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.dims)]))
        self.uid = next(_UID)
        self._act = {}
        if check:
            self.validate()

    @property
    def field(self) -> Field:
        return self.algebra.field

    @property
    def dim_vector(self) -> tuple:
        return self.dims

    def __repr__(self):
        return f"Rep(dims={self.dims})"

    def path_block(self, start: int, arrows_t: tuple) -> np.ndarray:
        F = self.field
        cur = np.eye(self.dims[start], dtype=np.int64)
        for a in arrows_t:
            cur = F.matmul(self.mats[a], cur)
        return cur

    def act(self, i: int) -> np.ndarray:
        """Total-space matrix of basis element i."""
        if i not in self._act:
            A = self.algebra
            if A.is_quiver:
                s, ar = A.basis_paths[i]
                t = A.basis_ends[i][1]
                out = np.zeros((self.dim, self.dim), dtype=np.int64)
                out[self.offsets[t]:self.offsets[t + 1], self.offsets[s]:self.offsets[s + 1]] = \
                    self.path_block(s, ar)
            else:
                out = self.mats[i]
            self._act[i] = out
        return self._act[i]

    def act_element(self, x) -> np.ndarray:
        F = self.field
        out = np.zeros((self.dim, self.dim), dtype=np.int64)
        for i in np.flatnonzero(np.asarray(x)):
            out = F.add(out, F.mul(int(x[i]), self.act(i)))
        return out

    def validate(self):
        A = self.algebra
        F = self.field
        if A.is_quiver:
            for rel in A.relations:
                s = A.arrows[rel[0][1][0]][1]
                t = A.arrows[rel[0][1][-1]][2]
                acc = np.zeros((self.dims[t], self.dims[s]), dtype=np.int64)
                for coef, path in rel:
                    acc = F.add(acc, F.mul(coef, self.path_block(s, path)))
                if np.any(acc):
                    raise InvalidModule("relation does not vanish on the module")
        else:
            d = A.dim
            if not np.array_equal(self.act_element(A.unit), np.eye(self.dim, dtype=np.int64)):
                raise InvalidModule("unit does not act as identity")
            for i in range(d):
                for j in range(d):
                    lhs = F.matmul(self.mats[i], self.mats[j])
                    rhs = self.act_element(A.mult[i, j])
                    if not np.array_equal(lhs, rhs):
                        raise InvalidModule(f"action fails on b{i} * b{j}")

    def to_document(self) -> dict:
        F = self.field
        return {
            "algebra": self.algebra.hash,
            "dim_vector": list(self.dims),
            "matrices": {g.label: [[F.serialize(x) for x in row] for row in m]
                         for g, m in zip(self.algebra.gens, self.mats)},
        }


def rep_from_document(A: BoundAlgebra, doc) -> Rep:
    F = A.field
    dims = doc["dim_vector"]
    mats = []
    for g in A.gens:
        raw = doc["matrices"].get(g.label)
        if raw is None:
            mats.append(np.zeros((dims[g.tgt], dims[g.src]), dtype=np.int64))
        else:
            mats.append(np.array([[F.deserialize(x) for x in row] for row in raw],
                                 dtype=np.int64).reshape(dims[g.tgt], dims[g.src]))
    return Rep(A, dims, mats, check=True)


def zero_rep(A: BoundAlgebra) -> Rep:
    dims = (0,) * A.nverts
    return Rep(A, dims, [np.zeros((0, 0), dtype=np.int64) for _ in A.gens])


class RepMorphism:
    """A module homomorphism, stored as one block per vertex."""

    def __init__(self, source: Rep, target: Rep, blocks):
        self.source = source
        self.target = target
        self.blocks = tuple(np.asarray(b, dtype=np.int64).reshape(target.dims[v], source.dims[v])
                            for v, b in enumerate(blocks))

    @property
    def field(self):
        return self.source.field

    def total(self) -> np.ndarray:
        out = np.zeros((self.target.dim, self.source.dim), dtype=np.int64)
        so, to = self.source.offsets, self.target.offsets
        for v, b in enumerate(self.blocks):
            out[to[v]:to[v + 1], so[v]:so[v + 1]] = b
        return out

    def compose(self, first: "RepMorphism") -> "RepMorphism":
        """self after first."""
        F = self.field
        return RepMorphism(first.source, self.target,
                           [F.matmul(b, a) for a, b in zip(first.blocks, self.blocks)])

    def __add__(self, other):
        F = self.field
        return RepMorphism(self.source, self.target, [F.add(a, b) for a, b in zip(self.blocks, other.blocks)])

    def scale(self, c: int):
        F = self.field
        return RepMorphism(self.source, self.target, [F.mul(c, b) for b in self.blocks])

    def is_zero(self) -> bool:
        return not any(np.any(b) for b in self.blocks)

    def flat(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([b.reshape(-1) for b in self.blocks])

    def rank(self) -> int:
        F = self.field
        return sum(ffla.rank(F, b) for b in self.blocks)

    def is_injective(self) -> bool:
        return self.rank() == self.source.dim

    def is_surjective(self) -> bool:
        return self.rank() == self.target.dim

    def is_iso(self) -> bool:
        return self.source.dims == self.target.dims and self.rank() == self.source.dim

    def check(self) -> bool:
        F = self.field
        for g, xs, xt in zip(self.source.algebra.gens, self.source.mats, self.target.mats):
            lhs = F.matmul(self.blocks[g.tgt], xs)
            rhs = F.matmul(xt, self.blocks[g.src])
            if not np.array_equal(lhs, rhs):
                return False
        return True

    def inverse(self) -> "RepMorphism":
        F = self.field
        return RepMorphism(self.target, self.source, [ffla.inverse(F, b) for b in self.blocks])

    def to_document(self) -> dict:
        F = self.field
        return {"blocks": [[[F.serialize(x) for x in row] for row in b] for b in self.blocks]}


def identity(M: Rep) -> RepMorphism:
    return RepMorphism(M, M, [np.eye(d, dtype=np.int64) for d in M.dims])


def zero_morphism(M: Rep, N: Rep) -> RepMorphism:
    return RepMorphism(M, N, [np.zeros((N.dims[v], M.dims[v]), dtype=np.int64)
                              for v in range(len(M.dims))])


def morphism_from_flat(M: Rep, N: Rep, flat) -> RepMorphism:
    blocks = []
    pos = 0
    for v in range(len(M.dims)):
        size = N.dims[v] * M.dims[v]
        blocks.append(np.asarray(flat[pos:pos + size]).reshape(N.dims[v], M.dims[v]))
        pos += size
    return RepMorphism(M, N, blocks)


def _check_same(M: Rep, N: Rep):
    if not M.algebra.same_as(N.algebra):
        raise AlgebraMismatch("modules live over different algebras")


# ---------------------------------------------------------------------------
# Hom spaces

_HOM_CACHE = {}


def _hom_system(M: Rep, N: Rep) -> np.ndarray:
    A = M.algebra
    F = A.field
    sizes = [N.dims[v] * M.dims[v] for v in range(A.nverts)]
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    nunk = int(offs[-1])
    blocks = []
    for gi in A.hom_gen_idx:
        g = A.gens[gi]
        s, t = g.src, g.tgt
        xm, xn = M.mats[gi], N.mats[gi]
        nrow = N.dims[t] * M.dims[s]
        if nrow == 0:
            continue
        eq = np.zeros((nrow, nunk), dtype=np.int64)
        if sizes[t]:
            eq[:, offs[t]:offs[t + 1]] = np.kron(np.eye(N.dims[t], dtype=np.int64), xm.T)
        if sizes[s]:
            part = np.kron(xn, np.eye(M.dims[s], dtype=np.int64))
            eq[:, offs[s]:offs[s + 1]] = F.sub(eq[:, offs[s]:offs[s + 1]], part)
        blocks.append(eq % F.q if F.e == 1 else eq)
    if not blocks:
        return np.zeros((0, nunk), dtype=np.int64)
    return np.vstack(blocks)


def hom_basis_flat(M: Rep, N: Rep) -> np.ndarray:
    key = (M.uid, N.uid)
    hit = _HOM_CACHE.get(key)
    if hit is not None:
        return hit
    F = M.field
    sysm = _hom_system(M, N)
    basis = ffla.nullspace(F, sysm)
    if len(_HOM_CACHE) > 200000:
        _HOM_CACHE.clear()
    _HOM_CACHE[key] = basis
    return basis


def hom_space(M: Rep, N: Rep) -> list:
    """An F_q-basis of Hom_A(M, N)."""
    _check_same(M, N)
    return [morphism_from_flat(M, N, row) for row in hom_basis_flat(M, N)]


def hom_dim(M: Rep, N: Rep) -> int:
    _check_same(M, N)
    return int(hom_basis_flat(M, N).shape[0])


# ---------------------------------------------------------------------------
# subspaces, submodules, quotients


def as_cols(b, n: int) -> np.ndarray:
    """Coerce to an n-row matrix of column vectors (handles empty shapes)."""
    b = np.asarray(b, dtype=np.int64)
    if b.ndim == 2 and b.shape[0] == n:
        return b
    if b.size == 0:
        return np.zeros((n, 0), dtype=np.int64)
    return b.reshape(n, -1)


def _coords(F: Field, basis_cols: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Solve basis_cols @ C = vecs for C (basis has independent columns)."""
    if basis_cols.shape[1] == 0:
        return np.zeros((0, vecs.shape[1]), dtype=np.int64)
    X, _ = ffla.solve(F, basis_cols, vecs)
    if X is None:
        raise InvalidModule("vectors are not in the span of the basis")
    return X


def submodule_from_basis(M: Rep, bases) -> tuple:
    """Submodule with the given per-vertex column bases; returns (U, inclusion).

    The column spaces must be closed under the action.
    """
    F = M.field
    A = M.algebra
    bases = [as_cols(b, M.dims[v]) for v, b in enumerate(bases)]
    dims = [b.shape[1] for b in bases]
    mats = []
    for g, x in zip(A.gens, M.mats):
        img = F.matmul(x, bases[g.src])
        mats.append(_coords(F, bases[g.tgt], img))
    U = Rep(A, dims, mats)
    return U, RepMorphism(U, M, bases)


def quotient_by_basis(M: Rep, bases) -> tuple:
    """Quotient M / U for per-vertex column bases of a submodule U.

    Returns (Q, projection).
    """
    F = M.field
    A = M.algebra
    projs, lifts, dims = [], [], []
    for v in range(A.nverts):
        n = M.dims[v]
        W = as_cols(bases[v], n)
        Wr = ffla.row_space(F, W.T) if W.shape[1] else np.zeros((0, n), dtype=np.int64)
        C = ffla.complement_basis(F, Wr, n)          # rows
        full = np.vstack([Wr, C]).T if n else np.zeros((0, 0), dtype=np.int64)
        if n:
            inv = ffla.inverse(F, full)
            P = inv[Wr.shape[0]:, :]
        else:
            P = np.zeros((0, 0), dtype=np.int64)
        projs.append(P)
        lifts.append(C.T.reshape(n, C.shape[0]))
        dims.append(C.shape[0])
    mats = []
    for g, x in zip(A.gens, M.mats):
        mats.append(F.matmul(projs[g.tgt], F.matmul(x, lifts[g.src])))
    Q = Rep(A, dims, mats)
    return Q, RepMorphism(M, Q, projs)


@dataclass
class MorphismParts:
    kernel: Rep
    kernel_inclusion: RepMorphism
    image: Rep
    image_inclusion: RepMorphism
    cokernel: Rep
    cokernel_projection: RepMorphism
    coimage_map: RepMorphism        # source -> image


def morphism_parts(f: RepMorphism) -> MorphismParts:
    F = f.field
    M, N = f.source, f.target
    kb, ib = [], []
    for v, b in enumerate(f.blocks):
        ns = ffla.nullspace(F, b) if M.dims[v] else np.zeros((0, 0), dtype=np.int64)
        kb.append(as_cols(ns.T, M.dims[v]))
        if N.dims[v] and M.dims[v]:
            rs = ffla.row_space(F, b.T)
            ib.append(as_cols(rs.T, N.dims[v]))
        else:
            ib.append(np.zeros((N.dims[v], 0), dtype=np.int64))
    K, kinc = submodule_from_basis(M, kb)
    I, iinc = submodule_from_basis(N, ib)
    C, cproj = quotient_by_basis(N, ib)
    coim = RepMorphism(M, I, [_coords(F, iinc.blocks[v], f.blocks[v]) for v in range(len(f.blocks))])
    return MorphismParts(K, kinc, I, iinc, C, cproj, coim)


def kernel(f: RepMorphism) -> tuple:
    p = morphism_parts(f)
    return p.kernel, p.kernel_inclusion


def cokernel(f: RepMorphism) -> tuple:
    p = morphism_parts(f)
    return p.cokernel, p.cokernel_projection


@dataclass
class DirectSum:
    module: Rep
    inclusions: list
    projections: list


def direct_sum_data(mods: list, algebra: Optional[BoundAlgebra] = None) -> DirectSum:
    if not mods:
        Z = zero_rep(algebra)
        return DirectSum(Z, [], [])
    A = mods[0].algebra
    for m in mods[1:]:
        _check_same(mods[0], m)
    dims = [sum(m.dims[v] for m in mods) for v in range(A.nverts)]
    mats = []
    for gi, g in enumerate(A.gens):
        blk = np.zeros((dims[g.tgt], dims[g.src]), dtype=np.int64)
        r = c = 0
        for m in mods:
            x = m.mats[gi]
            blk[r:r + x.shape[0], c:c + x.shape[1]] = x
            r += x.shape[0]
            c += x.shape[1]
        mats.append(blk)
    S = Rep(A, dims, mats)
    incs, projs = [], []
    starts = [0] * A.nverts
    for m in mods:
        ib, pb = [], []
        for v in range(A.nverts):
            i = np.zeros((dims[v], m.dims[v]), dtype=np.int64)
            i[starts[v]:starts[v] + m.dims[v], :] = np.eye(m.dims[v], dtype=np.int64)
            ib.append(i)
            pb.append(i.T.copy())
            starts[v] += m.dims[v]
        incs.append(RepMorphism(m, S, ib))
        projs.append(RepMorphism(S, m, pb))
    return DirectSum(S, incs, projs)


def direct_sum(*mods: Rep) -> Rep:
    if len(mods) == 1 and isinstance(mods[0], (list, tuple)):
        mods = tuple(mods[0])
    return direct_sum_data(list(mods)).module


def power(M: Rep, n: int) -> Rep:
    if n == 0:
        return zero_rep(M.algebra)
    return direct_sum_data([M] * n).module


def morphism_to_sum(f_list: list, target_sum: DirectSum, source: Optional[Rep] = None) -> RepMorphism:
    """The map X -> sum_i Y_i with components f_list."""
    if not f_list:
        return zero_morphism(source, target_sum.module)
    out = None
    for f, inc in zip(f_list, target_sum.inclusions):
        term = inc.compose(f)
        out = term if out is None else out + term
    return out


def morphism_from_sum(f_list: list, source_sum: DirectSum, target: Optional[Rep] = None) -> RepMorphism:
    if not f_list:
        return zero_morphism(source_sum.module, target)
    out = None
    for f, pr in zip(f_list, source_sum.projections):
        term = f.compose(pr)
        out = term if out is None else out + term
    return out


# ---------------------------------------------------------------------------
# batched invertibility and idempotent search


def _batch_full_rank(F: Field, mats: np.ndarray) -> np.ndarray:
    """For a stack (B, n, n), which members are invertible (prime fields)."""
    B, n, _ = mats.shape
    if n == 0:
        return np.ones(B, dtype=bool)
    if F.e != 1:
        return np.array([ffla.rank(F, m) == n for m in mats])
    p = F.p
    A = mats.copy() % p
    ok = np.ones(B, dtype=bool)
    idx = np.arange(B)
    for c in range(n):
        sub = A[:, c:, c] != 0
        has = sub.any(axis=1)
        ok &= has
        piv = c + sub.argmax(axis=1)
        rowc = A[idx, c].copy()
        rowp = A[idx, piv].copy()
        A[idx, c] = rowp
        A[idx, piv] = rowc
        invp = F._inv_table[A[:, c, c]]
        A[:, c] = (A[:, c] * invp[:, None]) % p
        if c + 1 < n:
            fac = A[:, c + 1:, c]
            A[:, c + 1:] = (A[:, c + 1:] - fac[:, :, None] * A[:, c][:, None, :]) % p
    return ok


def _coef_batches(F: Field, k: int, batch: int = 4096):
    q = F.q
    total = q ** k
    for start in range(0, total, batch):
        codes = np.arange(start, min(total, start + batch), dtype=np.int64)
        coeffs = np.zeros((codes.size, k), dtype=np.int64)
        c = codes.copy()
        for i in range(k):
            coeffs[:, i] = c % q
            c //= q
        yield coeffs


def _combine(F: Field, coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """coeffs (B, k) times basis (k, m) -> (B, m)."""
    if F.e == 1:
        return (coeffs @ basis) % F.p
    out = np.zeros((coeffs.shape[0], basis.shape[1]), dtype=np.int64)
    for i in range(basis.shape[0]):
        out = F.add(out, F.mul(coeffs[:, i:i + 1], basis[i][None, :]))
    return out


def _blocks_of_flat(flat: np.ndarray, M: Rep, N: Rep) -> list:
    """Split a stack of flattened morphisms (B, total) into per-vertex stacks."""
    out = []
    pos = 0
    for v in range(len(M.dims)):
        size = N.dims[v] * M.dims[v]
        out.append(flat[:, pos:pos + size].reshape(flat.shape[0], N.dims[v], M.dims[v]))
        pos += size
    return out


def _find_invertible(M: Rep, N: Rep, basis: np.ndarray, exhaust_cap: int, seed: int,
                     retry_cap: int) -> Optional[np.ndarray]:
    F = M.field
    k = basis.shape[0]
    if k == 0:
        return None
    if F.q ** k <= exhaust_cap:
        for coeffs in _coef_batches(F, k):
            flat = _combine(F, coeffs, basis)
            ok = np.ones(flat.shape[0], dtype=bool)
            for blk in _blocks_of_flat(flat, M, N):
                if blk.shape[1] != blk.shape[2]:
                    return None
                ok &= _batch_full_rank(F, blk)
            hits = np.flatnonzero(ok)
            if hits.size:
                return flat[hits[0]]
        return None
    rng = np.random.default_rng(seed)
    coeffs = rng.integers(0, F.q, size=(retry_cap, k))
    flat = _combine(F, coeffs, basis)
    ok = np.ones(flat.shape[0], dtype=bool)
    for blk in _blocks_of_flat(flat, M, N):
        ok &= _batch_full_rank(F, blk)
    hits = np.flatnonzero(ok)
    if hits.size:
        return flat[hits[0]]
    return None


def is_isomorphic(M: Rep, N: Rep, exhaust_cap: int = DEFAULT_EXHAUST_CAP,
                  seed: int = DEFAULT_SEED, retry_cap: int = DEFAULT_RETRY_CAP) -> Optional[RepMorphism]:
    """An isomorphism M -> N if one exists, else None."""
    _check_same(M, N)
    if M.dims != N.dims:
        return None
    if M.dim == 0:
        return identity(M) if True else None
    basis = hom_basis_flat(M, N)
    if basis.shape[0] == 0:
        return None
    if hom_dim(M, M) != basis.shape[0] or hom_dim(N, N) != basis.shape[0]:
        return None
    F = M.field
    found = _find_invertible(M, N, basis, exhaust_cap, seed, retry_cap)
    if found is not None:
        return morphism_from_flat(M, N, found)
    if F.q ** basis.shape[0] <= exhaust_cap:
        return None
    # exact fallback: compare Krull-Schmidt decompositions
    return _iso_via_decomposition(M, N, exhaust_cap, seed)


def _iso_via_decomposition(M: Rep, N: Rep, exhaust_cap: int, seed: int) -> Optional[RepMorphism]:
    pm = split(M, exhaust_cap, seed)
    pn = split(N, exhaust_cap, seed)
    if len(pm) != len(pn):
        return None
    used = [False] * len(pn)
    pieces = []
    for X, xin, xpr in pm:
        match = None
        for j, (Y, yin, ypr) in enumerate(pn):
            if used[j] or X.dims != Y.dims:
                continue
            w = iso_indecomposable(X, Y)
            if w is not None:
                match = (j, w)
                break
        if match is None:
            return None
        j, w = match
        used[j] = True
        Y, yin, ypr = pn[j]
        pieces.append(yin.compose(w.compose(xpr)))
    out = pieces[0]
    for t in pieces[1:]:
        out = out + t
    return out


def iso_indecomposable(X: Rep, Y: Rep) -> Optional[RepMorphism]:
    """Exact isomorphism test when X is indecomposable (local endomorphism ring).

    X is isomorphic to Y iff some composite g f of Hom basis elements is
    invertible; such an f is then an isomorphism.
    """
    if X.dims != Y.dims:
        return None
    F = X.field
    fs = hom_space(X, Y)
    gs = hom_space(Y, X)
    for f in fs:
        if not f.is_injective():
            continue
        return f
    for f in fs:
        for g in gs:
            if g.compose(f).is_iso():
                return f
    return None


def end_basis_flat(M: Rep) -> np.ndarray:
    return hom_basis_flat(M, M)


def _idempotent_exhaustive(M: Rep, basis: np.ndarray) -> Optional[np.ndarray]:
    F = M.field
    k = basis.shape[0]
    n = M.dim
    for coeffs in _coef_batches(F, k):
        flat = _combine(F, coeffs, basis)
        ok = np.ones(flat.shape[0], dtype=bool)
        nontriv = np.zeros(flat.shape[0], dtype=bool)
        notid = np.zeros(flat.shape[0], dtype=bool)
        for v, blk in enumerate(_blocks_of_flat(flat, M, M)):
            if blk.shape[1] == 0:
                continue
            sq = np.einsum("bij,bjk->bik", blk, blk) % F.p if F.e == 1 else \
                np.array([F.matmul(b, b) for b in blk])
            ok &= np.all((sq - blk).reshape(blk.shape[0], -1) == 0, axis=1)
            nontriv |= np.any(blk.reshape(blk.shape[0], -1) != 0, axis=1)
            notid |= np.any((blk - np.eye(blk.shape[1], dtype=np.int64)).reshape(blk.shape[0], -1) != 0,
                            axis=1)
        hits = np.flatnonzero(ok & nontriv & notid)
        if hits.size:
            return flat[hits[0]]
    return None


def _min_poly_factors(F: Field, mat: np.ndarray) -> list:
    """Distinct irreducible factors (coefficient lists, low degree first) of the
    minimal polynomial of a square matrix over a prime field."""
    import sympy
    n = mat.shape[0]
    powers = [np.eye(n, dtype=np.int64).reshape(-1)]
    cur = np.eye(n, dtype=np.int64)
    while True:
        cur = F.matmul(mat, cur)
        stack = np.array(powers).T
        X, _ = ffla.solve(F, stack, cur.reshape(-1))
        if X is not None:
            coeffs = [int(F.neg(c)) for c in X] + [1]
            break
        powers.append(cur.reshape(-1))
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x, modulus=F.p)
    out = []
    for fac, _ in poly.factor_list()[1]:
        cs = [int(c) % F.p for c in reversed(fac.all_coeffs())]
        out.append(cs)
    return out


def _eval_poly(F: Field, coeffs: list, mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    out = np.zeros((n, n), dtype=np.int64)
    for c in reversed(coeffs):
        out = F.add(F.matmul(out, mat), F.mul(c, np.eye(n, dtype=np.int64)))
    return out


def _split_by_random(M: Rep, basis: np.ndarray, seed: int, tries: int = 64):
    """Fitting splitting along a pseudorandom endomorphism; returns an
    endomorphism g with M = ker g^n (+) im g^n nontrivially, or None."""
    F = M.field
    if F.e != 1:
        raise AlgebraTooLarge("random splitting needs a prime field")
    rng = np.random.default_rng(seed)
    n = M.dim
    for _ in range(tries):
        coeffs = rng.integers(0, F.q, size=basis.shape[0])
        flat = ffla.lincomb(F, coeffs, basis)
        f = morphism_from_flat(M, M, flat)
        T = f.total()
        facs = _min_poly_factors(F, T)
        if len(facs) < 2:
            continue
        g = _eval_poly(F, facs[0], T)
        gp = np.eye(n, dtype=np.int64)
        for _ in range(n):
            gp = F.matmul(gp, g)
        return morphism_from_flat(M, M, _flat_of_total(M, gp))
    return None


def _flat_of_total(M: Rep, T: np.ndarray) -> np.ndarray:
    parts = []
    o = M.offsets
    for v in range(len(M.dims)):
        parts.append(T[o[v]:o[v + 1], o[v]:o[v + 1]].reshape(-1))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def split(M: Rep, exhaust_cap: int = DEFAULT_EXHAUST_CAP, seed: int = DEFAULT_SEED) -> list:
    """Krull-Schmidt splitting: list of (X, inclusion X->M, projection M->X)."""
    if M.dim == 0:
        return []
    F = M.field
    basis = end_basis_flat(M)
    if basis.shape[0] == 1:
        return [(M, identity(M), identity(M))]
    if F.q ** basis.shape[0] <= exhaust_cap:
        e = _idempotent_exhaustive(M, basis)
        if e is None:
            return [(M, identity(M), identity(M))]
        emor = morphism_from_flat(M, M, e)
        comp = identity(M) + emor.scale(int(F.neg(1)))
        pieces = [emor, comp]
    else:
        g = _split_by_random(M, basis, seed)
        if g is None:
            return [(M, identity(M), identity(M))]
        # Fitting: M = im g (+) ker g for g = h^n
        parts = morphism_parts(g)
        img, ker = parts.image_inclusion, parts.kernel_inclusion
        return _split_pieces(M, [img, ker], exhaust_cap, seed)
    out = []
    for e in pieces:
        parts = morphism_parts(e)
        U, inc = parts.image, parts.image_inclusion
        pr = parts.coimage_map
        for X, xi, xp in split(U, exhaust_cap, seed):
            out.append((X, inc.compose(xi), xp.compose(pr)))
    return out


def _split_pieces(M: Rep, incs: list, exhaust_cap, seed) -> list:
    """Given inclusions of complementary submodules, build projections and recurse."""
    F = M.field
    mats = []
    for v in range(len(M.dims)):
        mats.append(np.hstack([inc.blocks[v] for inc in incs]))
    out = []
    col = [0] * len(M.dims)
    invs = [ffla.inverse(F, m) if m.shape[0] else m for m in mats]
    for inc in incs:
        U = inc.source
        pblocks = []
        for v in range(len(M.dims)):
            d = U.dims[v]
            pblocks.append(invs[v][col[v]:col[v] + d, :])
            col[v] += d
        pr = RepMorphism(M, U, pblocks)
        for X, xi, xp in split(U, exhaust_cap, seed):
            out.append((X, inc.compose(xi), xp.compose(pr)))
    return out


def decompose(M: Rep, exhaust_cap: int = DEFAULT_EXHAUST_CAP, seed: int = DEFAULT_SEED) -> list:
    """Krull-Schmidt decomposition as a list of (indecomposable, multiplicity)."""
    groups = []
    for X, _, _ in split(M, exhaust_cap, seed):
        for g in groups:
            if g[0].dims == X.dims and iso_indecomposable(g[0], X) is not None:
                g[1] += 1
                break
        else:
            groups.append([X, 1])
    return [(X, m) for X, m in groups]


# ---------------------------------------------------------------------------
# submodules


def _vertex_closure(M: Rep, spaces: list) -> list:
    """Smallest submodule containing the given per-vertex row spaces."""
    F = M.field
    A = M.algebra
    spaces = [ffla.row_space(F, s) if s.shape[0] else s for s in spaces]
    changed = True
    while changed:
        changed = False
        for gi in A.hom_gen_idx:
            g = A.gens[gi]
            src = spaces[g.src]
            if src.shape[0] == 0:
                continue
            img = F.matmul(M.mats[gi], src.T).T
            tgt = spaces[g.tgt]
            stacked = np.vstack([tgt, img]) if tgt.shape[0] else img
            new = ffla.row_space(F, stacked)
            if new.shape[0] != tgt.shape[0]:
                spaces[g.tgt] = new
                changed = True
    return spaces


def _space_key(spaces: list) -> tuple:
    return tuple((s.shape[0], s.tobytes()) for s in spaces)


def submodule_spaces(M: Rep, cap: Optional[int] = None) -> list:
    """All submodules as per-vertex echelon row bases, in discovery order."""
    F = M.field
    if cap is None:
        cap = default_submodule_cap(F.q)
    if M.dim > cap:
        est = sum(F.q ** (d * d // 4) for d in M.dims)
        raise CapExceeded(f"module of dimension {M.dim} exceeds the submodule cap {cap}", est)
    zero = [np.zeros((0, d), dtype=np.int64) for d in M.dims]
    seen = {_space_key(zero): zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for U in frontier:
            for v in range(len(M.dims)):
                d = M.dims[v]
                if d == 0 or U[v].shape[0] == d:
                    continue
                comp = ffla.complement_basis(F, U[v], d)
                for vec in ffla.combos(F, comp):
                    if not np.any(vec):
                        continue
                    spaces = [s.copy() for s in U]
                    spaces[v] = np.vstack([U[v], vec[None, :]]) if U[v].shape[0] else vec[None, :]
                    W = _vertex_closure(M, spaces)
                    key = _space_key(W)
                    if key not in seen:
                        seen[key] = W
                        nxt.append(W)
        frontier = nxt
    return list(seen.values())


def submodules(M: Rep, cap: Optional[int] = None) -> list:
    """Complete list of submodules as (U, inclusion) pairs."""
    out = []
    for spaces in submodule_spaces(M, cap):
        out.append(submodule_from_basis(M, [s.T for s in spaces]))
    return out


# ---------------------------------------------------------------------------
# Hom functors into modules with a commuting action


def _flat_stack(morphisms: list) -> np.ndarray:
    if not morphisms:
        return np.zeros((0, 0), dtype=np.int64)
    return np.array([m.flat() for m in morphisms], dtype=np.int64)


def hom_into(M: Rep, pieces: list, gen_maps: list, result_algebra: BoundAlgebra) -> tuple:
    """Hom_A(M, U_v) for pieces U_v, made a module over result_algebra.

    gen_maps[k] is an A-linear map U_src -> U_tgt for generator k of the
    result algebra; it acts on Hom by post-composition.  Returns the module
    and, per vertex, the Hom bases used as coordinates.
    """
    F = M.field
    bases = [hom_space(M, U) for U in pieces]
    flat_bases = [_flat_stack(bs) for bs in bases]
    mats = []
    for g, rho in zip(result_algebra.gens, gen_maps):
        src_b = bases[g.src]
        tgt_flat = flat_bases[g.tgt]
        cols = []
        for h in src_b:
            img = rho.compose(h).flat()
            cols.append(_coords(F, tgt_flat.T, img[:, None])[:, 0] if tgt_flat.shape[0]
                        else np.zeros(0, dtype=np.int64))
        mats.append(np.array(cols, dtype=np.int64).T.reshape(len(bases[g.tgt]), len(src_b)))
    dims = [len(b) for b in bases]
    return Rep(result_algebra, dims, mats), bases


def hom_into_morphism(f: RepMorphism, pieces: list, bases_src: list, bases_tgt: list,
                      result_src: Rep, result_tgt: Rep) -> RepMorphism:
    """Hom(f, U): Hom(Y, U) -> Hom(X, U) for f: X -> Y, in the given bases."""
    F = f.field
    blocks = []
    for v in range(len(pieces)):
        tb = bases_tgt[v]      # Hom(X, U_v)
        sb = bases_src[v]      # Hom(Y, U_v)
        tflat = _flat_stack(tb)
        cols = []
        for h in sb:
            img = h.compose(f).flat()
            cols.append(_coords(F, tflat.T, img[:, None])[:, 0] if tflat.shape[0]
                        else np.zeros(0, dtype=np.int64))
        blocks.append(np.array(cols, dtype=np.int64).T.reshape(len(tb), len(sb)))
    return RepMorphism(result_src, result_tgt, blocks)


def hom_from(pieces: list, gen_maps: list, N: Rep, result_algebra: BoundAlgebra) -> tuple:
    """Hom_A(U_v, N) made a module over result_algebra by pre-composition.

    gen_maps[k] is an A-linear map U_tgt -> U_src for generator k (src->tgt).
    """
    F = N.field
    bases = [hom_space(U, N) for U in pieces]
    flat_bases = [_flat_stack(bs) for bs in bases]
    mats = []
    for g, rho in zip(result_algebra.gens, gen_maps):
        src_b = bases[g.src]
        tgt_flat = flat_bases[g.tgt]
        cols = []
        for h in src_b:
            img = h.compose(rho).flat()
            cols.append(_coords(F, tgt_flat.T, img[:, None])[:, 0] if tgt_flat.shape[0]
                        else np.zeros(0, dtype=np.int64))
        mats.append(np.array(cols, dtype=np.int64).T.reshape(len(bases[g.tgt]), len(src_b)))
    dims = [len(b) for b in bases]
    return Rep(result_algebra, dims, mats), bases


# ---------------------------------------------------------------------------
# regular module, projectives, radical


def _regular_module(A: BoundAlgebra) -> Rep:
    F = A.field
    if not A.is_quiver:
        mats = [A.left_mult_matrix(A.basis_vector(i)) for i in range(A.dim)]
        return Rep(A, [A.dim], mats)
    ends = [e for (_, e) in A.basis_ends]
    order = [[i for i in range(A.dim) if ends[i] == v] for v in range(A.nverts)]
    pos = {}
    for v, lst in enumerate(order):
        for k, i in enumerate(lst):
            pos[i] = (v, k)
    dims = [len(l) for l in order]
    mats = []
    for g in A.gens:
        blk = np.zeros((dims[g.tgt], dims[g.src]), dtype=np.int64)
        for k, i in enumerate(order[g.src]):
            img = A.multiply(np.array(g.vec), A.basis_vector(i))
            for j in np.flatnonzero(img):
                v, r = pos[j]
                blk[r, k] = img[j]
        mats.append(blk)
    R = Rep(A, dims, mats)
    R.basis_order = [i for lst in order for i in lst]
    return R


@dataclass
class ProjectiveInfo:
    label: str
    module: Rep
    idempotent: np.ndarray          # element e with A e isomorphic to module
    generator: np.ndarray           # vector of module corresponding to e
    multiplicity: int               # copies in the regular module
    simple: Rep = None
    top_degree: int = 1             # dim End(simple)


def _projectives(A: BoundAlgebra) -> list:
    F = A.field
    out = []
    if A.is_quiver:
        R = A.regular_module()
        for v in range(A.nverts):
            idx = [i for i in range(A.dim) if A.basis_ends[i][0] == v]
            # basis of A e_v: paths starting at v, graded by end vertex
            bases = []
            for w in range(A.nverts):
                cols = []
                for i in idx:
                    if A.basis_ends[i][1] == w:
                        col = np.zeros(R.dims[w], dtype=np.int64)
                        col[R.basis_order[R.offsets[w]:R.offsets[w + 1]].index(i)] = 1
                        cols.append(col)
                bases.append(np.array(cols, dtype=np.int64).T.reshape(R.dims[w], len(cols)))
            P, inc = submodule_from_basis(R, bases)
            e = A.basis_vector(A.basis_paths.index((v, ())))
            gen = np.zeros(P.dim, dtype=np.int64)
            # e_v sits at vertex v of P
            k = [i for i in idx if A.basis_ends[i][1] == v].index(A.basis_paths.index((v, ())))
            gen[P.offsets[v] + k] = 1
            S = Rep(A, [1 if w == v else 0 for w in range(A.nverts)],
                    [np.zeros(((1 if g.tgt == v else 0), (1 if g.src == v else 0)), dtype=np.int64)
                     for g in A.gens])
            out.append(ProjectiveInfo(f"P{A.vertex_labels[v]}", P, e, gen, 1, S, 1))
        return out
    R = A.regular_module()
    pieces = split(R)
    groups = []
    for X, inc, pr in pieces:
        e = inc.compose(pr).total() @ A.unit % F.p if F.e == 1 else \
            F.matmul(inc.compose(pr).total(), A.unit.reshape(-1, 1))[:, 0]
        for grp in groups:
            if grp[0].dims == X.dims and iso_indecomposable(grp[0], X) is not None:
                grp[3] += 1
                break
        else:
            gen = pr.compose(inc).total()  # identity on X
            groups.append([X, e, pr.total() @ A.unit % F.p if F.e == 1 else
                           F.matmul(pr.total(), A.unit.reshape(-1, 1))[:, 0], 1])
    for k, (X, e, gen, mult) in enumerate(groups):
        radb = _local_radical(X)
        S, _ = quotient_by_basis(X, [radb])
        d = hom_dim(S, S)
        out.append(ProjectiveInfo(f"P{k + 1}", X, e, gen, mult, S, d))
    return out


def _local_radical(P: Rep, cap: int = 2 ** 16) -> np.ndarray:
    """Radical of a local module (single vertex): the non-generating vectors."""
    F = P.field
    if F.q ** P.dim > cap:
        raise AlgebraTooLarge("local radical search exceeds the enumeration cap")
    rows = []
    for v in ffla.all_vectors(F, P.dim):
        if not np.any(v):
            continue
        W = _vertex_closure(P, [v[None, :]])
        if W[0].shape[0] < P.dim:
            rows.append(v)
    if not rows:
        return np.zeros((P.dim, 0), dtype=np.int64)
    return ffla.row_space(F, np.array(rows)).T


def _algebra_radical(A: BoundAlgebra) -> np.ndarray:
    F = A.field
    if A.is_quiver:
        rows = [A.basis_vector(i) for i in range(A.dim) if A.basis_paths[i][1]]
        return np.array(rows, dtype=np.int64).reshape(len(rows), A.dim)
    R = A.regular_module()
    rows = []
    for X, inc, pr in split(R):
        radb = _local_radical(X)
        if radb.shape[1]:
            rows.extend(F.matmul(inc.total(), radb).T)
    if not rows:
        return np.zeros((0, A.dim), dtype=np.int64)
    return ffla.row_space(F, np.array(rows))


def projectives(A: BoundAlgebra) -> list:
    return [(info.module, info.label) for info in A.projectives()]


# ---------------------------------------------------------------------------
# duals


def k_dual(M: Rep) -> Rep:
    """Hom_k(M, k) as a module over the opposite algebra."""
    A = M.algebra
    op = A.opposite()
    if A.is_quiver:
        # generator order of A^op matches A (arrows reversed, same names)
        mats = [m.T.copy() for m in M.mats]
        return Rep(op, M.dims, mats)
    return Rep(op, M.dims, [m.T.copy() for m in M.mats])


def _right_mult_morphisms(A: BoundAlgebra) -> tuple:
    """Pieces (A e_v) and, per generator g: s -> t of A^op, the right
    multiplication map piece_s -> piece_t used by the a-dual."""
    F = A.field
    op = A.opposite()
    if not A.is_quiver:
        R = A.regular_module()
        maps = []
        for g in op.gens:
            x = np.array(g.vec, dtype=np.int64)    # element of A (same basis)
            maps.append(RepMorphism(R, R, [A.right_mult_matrix(x)]))
        return [R], maps
    infos = A.projectives()
    R = A.regular_module()
    pieces = [info.module for info in infos]
    # coordinates: piece v has basis = A-basis elements starting at v
    coords = []
    for v in range(A.nverts):
        P = pieces[v]
        lst = []
        for w in range(A.nverts):
            for i in R.basis_order[R.offsets[w]:R.offsets[w + 1]]:
                if A.basis_ends[i][0] == v:
                    lst.append(i)
        coords.append(lst)
    maps = []
    for ai, g in enumerate(op.gens):
        # arrow a: i -> j in A gives a^op: j -> i in A^op; right mult by a maps A e_j -> A e_i
        a = A.gens[ai]
        src, tgt = a.tgt, a.src
        assert (g.src, g.tgt) == (src, tgt)
        P, Q = pieces[src], pieces[tgt]
        total = np.zeros((Q.dim, P.dim), dtype=np.int64)
        for c, i in enumerate(coords[src]):
            img = A.multiply(A.basis_vector(i), np.array(a.vec))
            for j in np.flatnonzero(img):
                total[coords[tgt].index(j), c] = img[j]
        blocks = []
        for w in range(A.nverts):
            blocks.append(total[Q.offsets[w]:Q.offsets[w + 1], P.offsets[w]:P.offsets[w + 1]])
        maps.append(RepMorphism(P, Q, blocks))
    return pieces, maps


def a_dual_data(M: Rep) -> tuple:
    """Hom_A(M, A) as an A^op-module, with the per-vertex Hom bases."""
    A = M.algebra
    key = "rmaps"
    if key not in A._cache:
        A._cache[key] = _right_mult_morphisms(A)
    pieces, maps = A._cache[key]
    return hom_into(M, pieces, maps, A.opposite())


def a_dual(M: Rep) -> Rep:
    return a_dual_data(M)[0]


def a_dual_morphism(f: RepMorphism) -> RepMorphism:
    A = f.source.algebra
    pieces, _ = A._cache.setdefault("rmaps", _right_mult_morphisms(A))
    Ys, yb = a_dual_data(f.target)
    Xs, xb = a_dual_data(f.source)
    return hom_into_morphism(f, pieces, yb, xb, Ys, Xs)


def evaluation_pairing(M: Rep, targets: list) -> np.ndarray:
    """Stack of all Hom(M, U) basis maps for U in targets (rows = coordinates).

    sigma_M is injective iff this matrix has full column rank.
    """
    F = M.field
    rows = []
    for U in targets:
        for h in hom_space(M, U):
            rows.append(h.total())
    if not rows:
        return np.zeros((0, M.dim), dtype=np.int64)
    return np.vstack(rows)


def duals(M: Rep, kind: str) -> Rep:
    if kind in ("k", "k-dual"):
        return k_dual(M)
    if kind in ("a", "a-dual"):
        return a_dual(M)
    if kind == "transpose":
        from .homlab import transpose
        return transpose(M)
    raise ValueError(f"unknown dual kind {kind!r}")
