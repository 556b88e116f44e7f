"""Iso-class catalogs, Hall numbers, truncated Ringel-Hall algebras, the ideals
I and J, semi-derived quotients with denominator normal forms, and the
instance verifiers built on them.

Classes are keyed by sorted tuples of (indecomposable id, multiplicity);
the empty tuple is the zero module.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import ffla
from . import homlab as hl
from . import repcat as rc
from .errors import (CommutationNotCertified, IncompleteCatalog, NotGPdim1, NotPLE1,
                     TruncationOverflow, UnsupportedSpec, CapExceeded)
from .homlab import NO, UNKNOWN, YES, SubcatSpec, Verdict
from .repcat import Rep

ZERO = ()


def key_add(*keys) -> tuple:
    c = Counter()
    for k in keys:
        for i, m in k:
            c[i] += m
    return tuple(sorted(c.items()))


def key_sub(a, b) -> tuple:
    c = Counter(dict(a))
    c.subtract(dict(b))
    if any(v < 0 for v in c.values()):
        raise ValueError("not a sub-multiset")
    return tuple(sorted((i, m) for i, m in c.items() if m))


def key_max(a, b) -> tuple:
    c = Counter(dict(a))
    for i, m in b:
        c[i] = max(c[i], m)
    return tuple(sorted(c.items()))


def gl_order(m: int, Q: int) -> int:
    out = 1
    for k in range(m):
        out *= Q ** m - Q ** k
    return out


def _proj_points(F, k: int):
    """Nonzero vectors of F^k whose first nonzero coordinate is 1."""
    for v in ffla.all_vectors(F, k):
        nz = np.flatnonzero(v)
        if nz.size and v[nz[0]] == 1:
            yield v


# ---------------------------------------------------------------------------
# indecomposables and classification


@dataclass
class Indec:
    id: int
    rep: Rep
    label: str
    end_dim: int
    residue_degree: int

    @property
    def dims(self):
        return self.rep.dims

    @property
    def dim(self):
        return self.rep.dim


def _residue_degree(X: Rep, exhaust_cap: int) -> int:
    """dim End(X) / rad End(X) for indecomposable X (End local)."""
    F = X.field
    basis = rc.end_basis_flat(X)
    k = basis.shape[0]
    if k == 1:
        return 1
    if F.q ** k <= exhaust_cap:
        rows = []
        for coeffs in rc._coef_batches(F, k):
            flat = rc._combine(F, coeffs, basis)
            ok = np.ones(flat.shape[0], dtype=bool)
            for blk in rc._blocks_of_flat(flat, X, X):
                ok &= rc._batch_full_rank(F, blk)
            rows.extend(coeffs[~ok])
        J = ffla.row_space(F, np.array(rows)) if rows else np.zeros((0, k), dtype=np.int64)
        return k - J.shape[0]
    # ideal generated by the radical parts of the basis elements' minimal polynomials
    gens = []
    for row in basis:
        f = rc.morphism_from_flat(X, X, row)
        T = f.total()
        facs = rc._min_poly_factors(F, T)
        g = rc._eval_poly(F, facs[0], T)
        gens.append(rc._flat_of_total(X, g))
    span = ffla.row_space(F, np.array(gens))
    while True:
        rows = list(span)
        for j in span:
            jm = rc.morphism_from_flat(X, X, j)
            for b in basis:
                bm = rc.morphism_from_flat(X, X, b)
                rows.append(bm.compose(jm).flat())
                rows.append(jm.compose(bm).flat())
        new = ffla.row_space(F, np.array(rows))
        if new.shape[0] == span.shape[0]:
            break
        span = new
    return k - span.shape[0]


class Registry:
    """Indecomposable modules over one algebra, with exact classification."""

    def __init__(self, A: rc.BoundAlgebra, exhaust_cap: int = rc.DEFAULT_EXHAUST_CAP,
                 seed: int = rc.DEFAULT_SEED):
        self.A = A
        self.exhaust_cap = exhaust_cap
        self.seed = seed
        self.indecs: list = []
        self._by_dims = defaultdict(list)
        self._reps = {}
        self._hom = {}
        self._ext = {}
        self._memo = {}
        self._flags = {}

    # registration ---------------------------------------------------------
    def find(self, X: Rep) -> Optional[int]:
        for i in self._by_dims[X.dims]:
            if rc.iso_indecomposable(self.indecs[i].rep, X) is not None:
                return i
        return None

    def register(self, X: Rep, label: Optional[str] = None) -> int:
        i = self.find(X)
        if i is not None:
            return i
        i = len(self.indecs)
        ed = rc.hom_dim(X, X)
        self.indecs.append(Indec(i, X, label or f"X{i}", ed, _residue_degree(X, self.exhaust_cap)))
        self._by_dims[X.dims].append(i)
        return i

    def _memo_key(self, M: Rep):
        return (M.dims, tuple(m.tobytes() for m in M.mats))

    def classify(self, M: Rep) -> tuple:
        mk = self._memo_key(M)
        hit = self._memo.get(mk)
        if hit is not None:
            return hit
        c = Counter()
        for X, _, _ in rc.split(M, self.exhaust_cap, self.seed):
            c[self.register(X)] += 1
        key = tuple(sorted(c.items()))
        self._memo[mk] = key
        return key

    # class data -------------------------------------------------------------
    def rep(self, key) -> Rep:
        r = self._reps.get(key)
        if r is None:
            mods = [self.indecs[i].rep for i, m in key for _ in range(m)]
            r = rc.direct_sum_data(mods, self.A).module
            self._reps[key] = r
            self._memo[self._memo_key(r)] = key
        return r

    def dims(self, key) -> tuple:
        out = [0] * self.A.nverts
        for i, m in key:
            for v, d in enumerate(self.indecs[i].dims):
                out[v] += m * d
        return tuple(out)

    def dim(self, key) -> int:
        return sum(self.dims(key))

    def label(self, key) -> str:
        if not key:
            return "0"
        parts = []
        for i, m in key:
            lab = self.indecs[i].label
            parts.append(lab if m == 1 else f"{lab}^{m}")
        return "+".join(parts)

    def hom_ij(self, i: int, j: int) -> int:
        k = (i, j)
        if k not in self._hom:
            self._hom[k] = rc.hom_dim(self.indecs[i].rep, self.indecs[j].rep)
        return self._hom[k]

    def ext_ij(self, i: int, j: int) -> int:
        k = (i, j)
        if k not in self._ext:
            self._ext[k] = hl.ext1_dim(self.indecs[i].rep, self.indecs[j].rep)
        return self._ext[k]

    def hom(self, a, b) -> int:
        return sum(m * n * self.hom_ij(i, j) for i, m in a for j, n in b)

    def ext(self, a, b) -> int:
        return sum(m * n * self.ext_ij(i, j) for i, m in a for j, n in b)

    def euler(self, a, b) -> int:
        return self.hom(a, b) - self.ext(a, b)

    def aut(self, key) -> int:
        q = self.A.field.q
        e = self.hom(key, key)
        out = 1
        for i, m in key:
            d = self.indecs[i].residue_degree
            e -= m * m * d
            out *= gl_order(m, q ** d)
        return q ** e * out

    def aut_exhaustive(self, key) -> Optional[int]:
        M = self.rep(key)
        F = M.field
        basis = rc.end_basis_flat(M)
        k = basis.shape[0]
        if F.q ** k > self.exhaust_cap:
            return None
        total = 0
        for coeffs in rc._coef_batches(F, k):
            flat = rc._combine(F, coeffs, basis)
            ok = np.ones(flat.shape[0], dtype=bool)
            for blk in rc._blocks_of_flat(flat, M, M):
                ok &= rc._batch_full_rank(F, blk)
            total += int(ok.sum())
        return total

    # per-indecomposable flags -------------------------------------------------
    def flag(self, name: str, i: int, fn):
        k = (name, i)
        if k not in self._flags:
            self._flags[k] = fn(self.indecs[i].rep)
        return self._flags[k]

    def key_flag(self, name: str, key, fn) -> str:
        """Additive membership: Yes iff all summands Yes, No if any is No."""
        sts = [self.flag(name, i, fn) for i, _ in key]
        if NO in sts:
            return NO
        if all(s == YES for s in sts):
            return YES
        return UNKNOWN


def ordered_keys(keys, reg: Registry) -> list:
    return sorted(keys, key=lambda k: (reg.dim(k), reg.dims(k), k))


def keys_up_to(indec_dims: dict, D: int) -> list:
    """All multisets of the given indecomposables with total dimension <= D."""
    ids = sorted(indec_dims)
    out = []

    def rec(pos, remaining, cur):
        if pos == len(ids):
            out.append(tuple(cur))
            return
        i = ids[pos]
        d = indec_dims[i]
        m = 0
        while m * d <= remaining:
            rec(pos + 1, remaining - m * d, cur + ([(i, m)] if m else []))
            m += 1
            if d == 0:
                break
    rec(0, D, [])
    return out


# ---------------------------------------------------------------------------
# catalogs


class IsoCatalog:
    def __init__(self, reg: Registry, D: int, submodule_cap: Optional[int] = None,
                 syzygy_bound: int = hl.DEFAULT_BOUND):
        self.reg = reg
        self.A = reg.A
        self.D = D
        self.submodule_cap = submodule_cap if submodule_cap is not None else \
            rc.default_submodule_cap(self.A.field.q)
        self.syzygy_bound = syzygy_bound
        self.indec_ids: list = []
        self.classes: list = []
        self.index: dict = {}
        self.complete = True
        self.notes: list = []
        self._g = None
        self._fp = {}

    @property
    def q(self) -> int:
        return self.A.field.q

    def _set_classes(self):
        dims = {i: self.reg.indecs[i].dim for i in self.indec_ids}
        self.classes = ordered_keys(keys_up_to(dims, self.D), self.reg)
        self.index = {k: n for n, k in enumerate(self.classes)}

    def aut(self, key) -> int:
        return self.reg.aut(key)

    # fast classification of modules known to lie in the catalog ---------------
    def _cheap_fp(self, M: Rep) -> tuple:
        F = M.field
        ranks = tuple(ffla.rank(F, M.act(i)) for i in range(self.A.dim))
        return (M.dims, ranks)

    def classify(self, M: Rep) -> tuple:
        mk = self.reg._memo_key(M)
        hit = self.reg._memo.get(mk)
        if hit is not None:
            return hit
        if M.dim <= self.D and self.complete:
            fp = self._cheap_fp(M)
            cands = self._fp_index().get(fp, [])
            if len(cands) == 1:
                self.reg._memo[mk] = cands[0]
                return cands[0]
            if len(cands) > 1:
                hv = tuple(rc.hom_dim(self.reg.indecs[i].rep, M) for i in self.indec_ids)
                fine = [c for c in cands if self._hom_vector(c) == hv]
                if len(fine) == 1:
                    self.reg._memo[mk] = fine[0]
                    return fine[0]
        return self.reg.classify(M)

    def _fp_index(self) -> dict:
        if "cheap" not in self._fp:
            idx = defaultdict(list)
            for k in self.classes:
                idx[self._cheap_fp(self.reg.rep(k))].append(k)
            self._fp["cheap"] = idx
        return self._fp["cheap"]

    def _hom_vector(self, key) -> tuple:
        return tuple(sum(m * self.reg.hom_ij(i, j) for j, m in key) for i in self.indec_ids)

    # conflation index -----------------------------------------------------------
    def hall_numbers(self) -> dict:
        """g[(L, M, N)] = #{U <= L : U ~ N, L/U ~ M} for all catalog classes L."""
        if self._g is None:
            g = Counter()
            for L in self.classes:
                R = self.reg.rep(L)
                if R.dim > self.submodule_cap:
                    self.complete = False
                    self.notes.append(f"class {self.reg.label(L)} exceeds the submodule cap")
                    continue
                for spaces in rc.submodule_spaces(R, self.submodule_cap):
                    bases = [s.T for s in spaces]
                    U, _ = rc.submodule_from_basis(R, bases)
                    Q, _ = rc.quotient_by_basis(R, bases)
                    g[(L, self.classify(Q), self.classify(U))] += 1
            self._g = dict(g)
        return self._g

    def conflations(self) -> list:
        """Indexed conflations (K, L, M): 0 -> K -> L -> M -> 0 realized in the catalog."""
        return sorted(((N, L, M) for (L, M, N) in self.hall_numbers()),
                      key=lambda t: (self.index[t[1]], self.index[t[2]], self.index[t[0]]))

    def label(self, key) -> str:
        return self.reg.label(key)


def build_catalog(A: rc.BoundAlgebra, D: int, reg: Optional[Registry] = None,
                  submodule_cap: Optional[int] = None, exhaust_cap: int = rc.DEFAULT_EXHAUST_CAP,
                  seed: int = rc.DEFAULT_SEED, syzygy_bound: int = hl.DEFAULT_BOUND) -> IsoCatalog:
    """All isomorphism classes of modules of total dimension <= D.

    Indecomposables of dimension n are found as middle terms of nonsplit
    extensions of a class of dimension n - dim S by a simple S: every
    non-simple indecomposable has a simple submodule S and is a nonsplit
    extension of its quotient by S.
    """
    reg = reg or Registry(A, exhaust_cap, seed)
    cat = IsoCatalog(reg, D, submodule_cap, syzygy_bound)
    F = A.field
    simples = []
    for k, S in enumerate(A.simples()):
        lab = f"S{A.vertex_labels[k]}" if A.is_quiver else f"S{k + 1}"
        simples.append(reg.register(S, lab))
    for k, info in enumerate(A.projectives()):
        if info.module.dim <= D:
            i = reg.register(info.module)
            if reg.indecs[i].label.startswith("X"):
                reg.indecs[i].label = f"P{A.vertex_labels[k]}" if A.is_quiver else f"P{k + 1}"
    found = {s for s in simples if reg.indecs[s].dim <= D}
    for n in range(2, D + 1):
        dims = {i: reg.indecs[i].dim for i in found if reg.indecs[i].dim < n}
        base = keys_up_to(dims, n - 1)
        for s in simples:
            S = reg.indecs[s].rep
            target = n - S.dim
            if target < 1:
                continue
            for C in base:
                if reg.dim(C) != target:
                    continue
                CM = reg.rep(C)
                ext = hl.ext_space(CM, S, 1)
                if ext.dim == 0:
                    continue
                flat = np.array([h.flat() for h in ext.cocycles])
                for coeffs in _proj_points(F, ext.dim):
                    h = rc.morphism_from_flat(ext.cover.syzygy, S, ffla.lincomb(F, coeffs, flat))
                    E = hl.realize_extension(ext, h, CM, S).middle
                    hit = reg.find(E) if reg._by_dims.get(E.dims) else None
                    if hit is not None:
                        found.add(hit)
                        continue
                    if len(rc.split(E, reg.exhaust_cap, reg.seed)) == 1:
                        found.add(reg.register(E))
    cat.indec_ids = sorted(found)
    cat._set_classes()
    return cat


def catalog_from_indecs(reg: Registry, ids: list, D: int, **kw) -> IsoCatalog:
    cat = IsoCatalog(reg, D, **kw)
    cat.indec_ids = sorted(ids)
    cat._set_classes()
    return cat


# ---------------------------------------------------------------------------
# counting


def hall_number(L, M, N, cat: IsoCatalog) -> int:
    return cat.hall_numbers().get((L, M, N), 0)


def ext_count_rp(M, N, L, cat: IsoCatalog) -> Fraction:
    """|Ext^1(M,N)_L| by the Riedtmann-Peng conversion from Hall numbers."""
    g = hall_number(L, M, N, cat)
    reg = cat.reg
    return Fraction(g * reg.aut(M) * reg.aut(N) * cat.q ** reg.hom(M, N), reg.aut(L))


def ext_distribution(M, N, reg: Registry, classify=None) -> Counter:
    """Counter L -> |Ext^1(M,N)_L| by enumerating cocycles and realizing each."""
    classify = classify or reg.classify
    MM, NN = reg.rep(M), reg.rep(N)
    F = reg.A.field
    ext = hl.ext_space(MM, NN, 1)
    out = Counter()
    if ext.dim == 0:
        out[key_add(M, N)] += 1
        return out
    flat = np.array([h.flat() for h in ext.cocycles])
    zero_seen = False
    for coeffs in ffla.all_vectors(F, ext.dim):
        if not np.any(coeffs):
            out[key_add(M, N)] += 1
            continue
        h = rc.morphism_from_flat(ext.cover.syzygy, NN, ffla.lincomb(F, coeffs, flat))
        E = hl.realize_extension(ext, h, MM, NN).middle
        out[classify(E)] += 1
    return out


def ext_count_oracle(M, N, L, cat: IsoCatalog) -> int:
    return ext_distribution(M, N, cat.reg, cat.classify).get(L, 0)


def ext_count(M, N, L, cat: IsoCatalog, oracle_cap: int = 2 ** 10) -> Fraction:
    rp = ext_count_rp(M, N, L, cat)
    if cat.q ** cat.reg.ext(M, N) <= oracle_cap:
        orc = ext_count_oracle(M, N, L, cat)
        if orc != rp:
            raise AssertionError(f"counting paths disagree: {rp} vs {orc}")
    return rp


def counting_check(cat: IsoCatalog, oracle_cap: int = 2 ** 10) -> dict:
    """Both counting paths on every class pair (M, N) with dim M + dim N <= D.

    Pairs whose cocycle space exceeds oracle_cap elements are skipped and counted.
    """
    reg = cat.reg
    g_by_pair = defaultdict(set)
    for (L, M, N) in cat.hall_numbers():
        g_by_pair[(M, N)].add(L)
    out = {"pairs": 0, "skipped": 0, "mismatches": [], "sum_failures": []}
    for M in cat.classes:
        for N in cat.classes:
            if reg.dim(M) + reg.dim(N) > cat.D:
                continue
            if cat.q ** reg.ext(M, N) > oracle_cap:
                out["skipped"] += 1
                continue
            out["pairs"] += 1
            dist = ext_distribution(M, N, reg, cat.classify)
            if sum(dist.values()) != cat.q ** reg.ext(M, N):
                out["sum_failures"].append((M, N))
            for L in set(dist) | g_by_pair[(M, N)]:
                if ext_count_rp(M, N, L, cat) != dist.get(L, 0):
                    out["mismatches"].append((M, N, L))
    return out


def hall_product_general(M, N, reg: Registry, classify=None) -> dict:
    """[M] * [N] for arbitrary classes, by cocycle enumeration.

    Summands of M with no extensions into N, and summands of N receiving
    none from M, are split off first: their extensions are split.
    """
    classify = classify or reg.classify
    keepM = [(i, m) for i, m in M if any(reg.ext_ij(i, j) for j, _ in N)]
    keepN = [(j, n) for j, n in N if any(reg.ext_ij(i, j) for i, _ in keepM)]
    restM = key_sub(M, tuple(keepM))
    restN = key_sub(N, tuple(keepN))
    q = reg.A.field.q
    hom = reg.hom(M, N)
    out = {}
    if not keepM or not keepN:
        return {key_add(M, N): Fraction(1, q ** hom)}
    dist = ext_distribution(tuple(keepM), tuple(keepN), reg, classify)
    for L, c in dist.items():
        k = key_add(L, restM, restN)
        out[k] = out.get(k, 0) + Fraction(c, q ** hom)
    return out


# ---------------------------------------------------------------------------
# Hall elements and the truncated Hall algebra


def h_add(x: dict, y: dict, c=1) -> dict:
    out = dict(x)
    for k, v in y.items():
        nv = out.get(k, 0) + c * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def h_scale(x: dict, c) -> dict:
    return {k: v * c for k, v in x.items() if v * c}


class TruncatedHall:
    def __init__(self, cat: IsoCatalog, allow_incomplete: bool = False):
        g = cat.hall_numbers()          # may flag the catalog incomplete
        if not cat.complete and not allow_incomplete:
            raise IncompleteCatalog("catalog is flagged incomplete")
        self.cat = cat
        self.reg = cat.reg
        self.q = cat.q
        self.D = cat.D
        self.table = defaultdict(dict)      # (M, N) -> {L: c}
        for (L, M, N), cnt in g.items():
            c = Fraction(cnt * self.reg.aut(M) * self.reg.aut(N), self.reg.aut(L))
            self.table[(M, N)][L] = c
        self.complete = cat.complete

    def product_classes(self, M, N) -> dict:
        if self.reg.dim(M) + self.reg.dim(N) > self.D:
            return {}
        return dict(self.table.get((M, N), {}))

    def mul(self, x: dict, y: dict) -> dict:
        out = {}
        for a, ca in x.items():
            for b, cb in y.items():
                for L, c in self.product_classes(a, b).items():
                    out = h_add(out, {L: c * ca * cb})
        return out

    def grade(self, key) -> tuple:
        return self.reg.dims(key)

    def check_grading(self) -> list:
        bad = []
        for (M, N), row in self.table.items():
            for L in row:
                if self.reg.dims(L) != tuple(a + b for a, b in zip(self.reg.dims(M), self.reg.dims(N))):
                    bad.append((M, N, L))
        return bad

    def check_associativity(self) -> list:
        bad = []
        cls = self.cat.classes
        for x in cls:
            for y in cls:
                if self.reg.dim(x) + self.reg.dim(y) > self.D:
                    continue
                for z in cls:
                    if self.reg.dim(x) + self.reg.dim(y) + self.reg.dim(z) > self.D:
                        continue
                    lhs = self.mul(self.mul({x: 1}, {y: 1}), {z: 1})
                    rhs = self.mul({x: 1}, self.mul({y: 1}, {z: 1}))
                    if lhs != rhs:
                        bad.append((x, y, z))
        return bad


def truncated_hall(cat: IsoCatalog, allow_incomplete: bool = False) -> TruncatedHall:
    return TruncatedHall(cat, allow_incomplete)


def frac_str(c) -> str:
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


def table_rows(H: TruncatedHall) -> list:
    """(M, N, L, coefficient) in catalog order."""
    idx = H.cat.index
    rows = []
    for (M, N), row in H.table.items():
        for L, c in row.items():
            rows.append((M, N, L, c))
    rows.sort(key=lambda r: (idx[r[0]], idx[r[1]], idx[r[2]]))
    return rows


def table_document(H: TruncatedHall) -> dict:
    reg = H.reg
    return {"q": H.q, "D": H.D,
            "classes": [reg.label(k) for k in H.cat.classes],
            "products": [{"left": reg.label(M), "right": reg.label(N), "class": reg.label(L),
                          "coefficient": frac_str(c)} for M, N, L, c in table_rows(H)]}


def table_tsv(H: TruncatedHall) -> str:
    reg = H.reg
    lines = ["left\tright\tclass\tcoefficient"]
    lines += [f"{reg.label(M)}\t{reg.label(N)}\t{reg.label(L)}\t{frac_str(c)}" for M, N, L, c in table_rows(H)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# exact structures


class ExactContext:
    """An extension-closed subcategory of A-mod with its P<=1 and I<=1 objects."""

    def __init__(self, name: str, H: TruncatedHall, member, ple1, ile1, ideal_zero: bool = False):
        self.name = name
        self.H = H
        self.cat = H.cat
        self.reg = H.reg
        self.q = H.q
        self._member = member
        self._ple1 = ple1
        self._ile1 = ile1
        self.ideal_zero = ideal_zero
        self._ideals = {}

    def _all(self, fn, key) -> bool:
        return all(fn(i) for i, _ in key)

    def member(self, key) -> bool:
        return self._all(self._member, key)

    def ple1(self, key) -> bool:
        return self.member(key) and self._all(self._ple1, key)

    def ile1(self, key) -> bool:
        return self.member(key) and self._all(self._ile1, key)

    def classes(self) -> list:
        return [k for k in self.cat.classes if self.member(k)]

    def euler(self, a, b) -> int:
        return self.reg.euler(a, b)

    # Hall products --------------------------------------------------------
    def product(self, M, N) -> dict:
        reg = self.reg
        if reg.dim(M) + reg.dim(N) <= self.H.D:
            return self.H.product_classes(M, N)
        if not self.ideal_zero:
            raise TruncationOverflow(f"product of grade {reg.dim(M) + reg.dim(N)} exceeds {self.H.D}")
        return hall_product_general(M, N, reg)

    def mul(self, x: dict, y: dict) -> dict:
        out = {}
        for a, ca in x.items():
            for b, cb in y.items():
                for L, c in self.product(a, b).items():
                    out = h_add(out, {L: c * ca * cb})
        return out

    # ideals ----------------------------------------------------------------
    def ideal(self, which: str) -> "IdealBasis":
        if which not in self._ideals:
            self._ideals[which] = _build_ideal(self, which)
        return self._ideals[which]


def _indec_flag(reg: Registry, name: str, fn):
    return lambda i: reg.flag(name, i, fn) == YES


def module_context(H: TruncatedHall) -> ExactContext:
    reg = H.reg
    bound = H.cat.syzygy_bound
    pd1 = lambda X: hl.membership(X, SubcatSpec("PdimLE", (1,)), bound).status
    id1 = lambda X: hl.membership(rc.k_dual(X), SubcatSpec("PdimLE", (1,)), bound).status
    return ExactContext("mod", H, lambda i: True, _indec_flag(reg, "pd<=1", pd1),
                        _indec_flag(reg, "id<=1", id1))


def gp_context(H: TruncatedHall) -> ExactContext:
    reg = H.reg
    bound = H.cat.syzygy_bound
    gp = lambda X: hl.gp_verdict(X, bound).status
    proj = lambda X: YES if hl.is_projective(X) else NO
    isproj = _indec_flag(reg, "proj", proj)
    return ExactContext("GP", H, _indec_flag(reg, "gp", gp), isproj, isproj, ideal_zero=True)


def perp_gp1_context(H: TruncatedHall, T: Rep) -> ExactContext:
    """The exact structure of modules in the left perpendicular of T with GP-dimension <= 1."""
    reg = H.reg
    bound = H.cat.syzygy_bound
    perp = lambda X: hl.in_perp(X, T, bound).status
    gp1 = lambda X: hl.membership(X, SubcatSpec("GPdimLE", (1,)), bound).status
    pd1 = lambda X: hl.membership(X, SubcatSpec("PdimLE", (1,)), bound).status
    tag = f"T{T.uid}"
    inperp = _indec_flag(reg, "perp" + tag, perp)
    isgp1 = _indec_flag(reg, "gp<=1", gp1)
    member = lambda i: inperp(i) and isgp1(i)
    ctx = ExactContext("perpT-GP1", H, member, _indec_flag(reg, "pd<=1", pd1), None)

    def ile1(i):
        # Ext^2(Y, X) = 0 for every catalog member Y (catalog-relative)
        X = reg.indecs[i].rep
        for j in H.cat.indec_ids:
            if member(j) and hl.ext_dim(reg.indecs[j].rep, X, 2):
                return False
        return True
    ctx._ile1 = ile1
    return ctx


# ---------------------------------------------------------------------------
# ideals


def _rref_fraction(rows: list, cols: list) -> list:
    """Echelon basis of rational row vectors given as dicts over cols (ordered)."""
    pos = {c: n for n, c in enumerate(cols)}
    basis = []     # list of (pivot, dict)
    for r in rows:
        v = {k: Fraction(x) for k, x in r.items() if x}
        v = _reduce_vec(v, basis, pos)
        if v:
            piv = min(v, key=lambda k: pos[k])
            c = v[piv]
            v = {k: x / c for k, x in v.items()}
            # keep basis reduced
            nb = []
            for p, b in basis:
                if piv in b:
                    b = h_add(b, v, -b[piv])
                nb.append((p, b))
            basis = nb + [(piv, v)]
    return basis


def _reduce_vec(v: dict, basis: list, pos: dict) -> dict:
    v = dict(v)
    for p, b in basis:
        if p in v:
            v = h_add(v, b, -v[p])
    return v


@dataclass
class IdealBasis:
    which: str
    ctx: ExactContext
    basis: list                 # (pivot key, dict)
    generators: list
    order: dict

    def reduce(self, x: dict) -> dict:
        return _reduce_vec(x, self.basis, self.order)

    def contains(self, x: dict) -> bool:
        return not self.reduce(x)

    def dim(self) -> int:
        return len(self.basis)


def _generators(ctx: ExactContext, which: str) -> list:
    gens = []
    g = ctx.cat.hall_numbers()
    for (L, M, N) in sorted(g, key=lambda t: (ctx.cat.index[t[0]], ctx.cat.index[t[1]], ctx.cat.index[t[2]])):
        if not (ctx.member(L) and ctx.member(M) and ctx.member(N)):
            continue
        # conflation 0 -> N -> L -> M -> 0
        if which == "I" and ctx.ple1(N):
            gens.append(h_add({L: 1}, {key_add(N, M): 1}, -1))
        if which == "J" and ctx.ile1(M):
            gens.append(h_add({L: 1}, {key_add(N, M): 1}, -1))
    return [x for x in gens if x]


def _build_ideal(ctx: ExactContext, which: str) -> IdealBasis:
    classes = ctx.classes()
    order = {c: n for n, c in enumerate(reversed(classes))}   # pivot on the largest class
    if which == "I+J":
        gens = _generators(ctx, "I") + _generators(ctx, "J")
    else:
        gens = _generators(ctx, which)
    basis = _rref_fraction(gens, list(order))
    H = ctx.H
    while True:
        new = []
        for _, b in basis:
            gb = max(ctx.reg.dim(k) for k in b)
            for X in classes:
                if ctx.reg.dim(X) + gb > H.D or not X:
                    continue
                new.append(H.mul({X: 1}, b))
                new.append(H.mul(b, {X: 1}))
        new = [v for v in new if v and _reduce_vec(v, basis, order)]
        if not new:
            break
        basis = _rref_fraction([b for _, b in basis] + new, list(order))
    return IdealBasis(which, ctx, basis, gens, order)


def ideal_basis(ctx: ExactContext, which: str) -> IdealBasis:
    return ctx.ideal(which)


def quotient_reduce(x: dict, ideal: IdealBasis) -> dict:
    return ideal.reduce(x)


def _qpow(q: int, e: int) -> Fraction:
    return Fraction(q) ** e


def check_commutation(K, M, ctx: ExactContext) -> dict:
    """The commutation and absorption identities for K in P<=1 and M in the context."""
    reg = ctx.reg
    q = ctx.q
    if not ctx.ple1(K):
        raise NotPLE1(f"{reg.label(K)} is not in P<=1 of the context")
    H = ctx.H
    mk = H.mul({M: 1}, {K: 1})
    km = H.mul({K: 1}, {M: 1})
    eMK, eKM = ctx.euler(M, K), ctx.euler(K, M)
    comm = h_add(h_scale(mk, _qpow(q, eMK)), h_scale(km, _qpow(q, eKM)), -1)
    absI = h_add(mk, {key_add(M, K): _qpow(q, -eMK)}, -1)
    absJ = h_add(km, {key_add(K, M): _qpow(q, -eKM)}, -1)
    res = {
        "commutation": ctx.ideal("I+J").contains(comm),
        "absorb_I": ctx.ideal("I").contains(absI),
        "absorb_J": ctx.ideal("J").contains(absJ) if ctx.ile1(K) else None,
    }
    res["ok"] = res["commutation"] and res["absorb_I"] and res["absorb_J"] is not False
    return res


def admissible_pairs(ctx: ExactContext) -> list:
    D = ctx.H.D
    cls = ctx.classes()
    out = []
    for K in cls:
        if not ctx.ple1(K):
            continue
        for M in cls:
            if ctx.reg.dim(K) + ctx.reg.dim(M) <= D:
                out.append((K, M))
    return out


# ---------------------------------------------------------------------------
# semi-derived elements


@dataclass
class SdhElement:
    denominator: tuple          # class key of the direct sum of denominator classes
    numerator: dict

    def to_document(self, reg: Registry) -> dict:
        return {"denominator": [reg.label(((i, 1),)) for i, m in self.denominator for _ in range(m)],
                "numerator": {reg.label(k): f"{v.numerator}/{v.denominator}"
                              for k, v in sorted(self.numerator.items())}}


def sdh_class(key) -> SdhElement:
    return SdhElement(ZERO, {key: Fraction(1)})


def sdh_unit() -> SdhElement:
    return sdh_class(ZERO)


class SdhContext:
    """Arithmetic in (H / (I + J))[Phi^-1] with left denominators."""

    def __init__(self, ctx: ExactContext, certify: bool = True):
        self.ctx = ctx
        self.reg = ctx.reg
        self.q = ctx.q
        self.certify = certify
        self._certified = {}

    def _check_pair(self, K, X):
        """Certify the swap rule for the denominator K past the class X."""
        if not self.certify:
            return
        ck = (K, X)
        if ck in self._certified:
            if not self._certified[ck]:
                raise CommutationNotCertified(f"{self.reg.label(K)} / {self.reg.label(X)}")
            return
        reg = self.reg
        if self.ctx.ideal_zero:
            ok = self.ctx.ple1(K) and all(reg.ext_ij(j, i) == 0 and reg.ext_ij(i, j) == 0
                                          for i, _ in K for j, _ in X)
        elif reg.dim(K) + reg.dim(X) <= self.ctx.H.D:
            ok = check_commutation(K, X, self.ctx)["commutation"]
        else:
            ok = False
        self._certified[ck] = ok
        if not ok:
            raise CommutationNotCertified(f"swap of {reg.label(K)} past {reg.label(X)} not certified")

    def swap_factor(self, X, K) -> Fraction:
        """[X] [K]^-1 = factor * [K]^-1 [X]."""
        self._check_pair(K, X)
        return _qpow(self.q, self.ctx.euler(X, K) - self.ctx.euler(K, X))

    def combine_denominators(self, D1, D2) -> tuple:
        """[D1]^-1 [D2]^-1 = c [D1 + D2]^-1."""
        return _qpow(self.q, self.ctx.euler(D2, D1)), key_add(D1, D2)

    def mul(self, x: SdhElement, y: SdhElement) -> SdhElement:
        c, D = self.combine_denominators(x.denominator, y.denominator)
        moved = {}
        for X, cx in x.numerator.items():
            moved = h_add(moved, {X: cx * self.swap_factor(X, y.denominator) if y.denominator else cx})
        num = h_scale(self.ctx.mul(moved, y.numerator), c)
        return SdhElement(D, num)

    def add(self, x: SdhElement, y: SdhElement) -> SdhElement:
        E, a = self._lift(x, key_max(x.denominator, y.denominator))
        _, b = self._lift(y, E)
        return SdhElement(E, h_add(a, b))

    def scale(self, x: SdhElement, c) -> SdhElement:
        return SdhElement(x.denominator, h_scale(x.numerator, Fraction(c)))

    def _lift(self, x: SdhElement, E) -> tuple:
        """Rewrite x over the larger denominator E: [D]^-1 n = [E]^-1 q^<E1,D> [E1] n."""
        E1 = key_sub(E, x.denominator)
        if not E1:
            return E, dict(x.numerator)
        c = _qpow(self.q, self.ctx.euler(E1, x.denominator))
        return E, h_scale(self.ctx.mul({E1: Fraction(1)}, x.numerator), c)

    def normal(self, x: dict) -> dict:
        if self.ctx.ideal_zero:
            return {k: v for k, v in x.items() if v}
        return self.ctx.ideal("I+J").reduce(x)

    def eq(self, x: SdhElement, y: SdhElement) -> bool:
        E = key_max(x.denominator, y.denominator)
        _, a = self._lift(x, E)
        _, b = self._lift(y, E)
        return not self.normal(h_add(a, b, -1))

    def inverse_class(self, K) -> SdhElement:
        return SdhElement(K, {ZERO: Fraction(1)})

    def right_fraction(self, num: dict, K) -> SdhElement:
        """n [K]^-1 rewritten with a left denominator."""
        out = {}
        for X, c in num.items():
            f = self.swap_factor(X, K) if K else 1
            out = h_add(out, {X: c * f})
        return SdhElement(K, out)


def sdh_mul(x, y, sctx: SdhContext) -> SdhElement:
    return sctx.mul(x, y)


def sdh_eq(x, y, sctx: SdhContext) -> bool:
    return sctx.eq(x, y)


# ---------------------------------------------------------------------------
# psi and the comparison of the two exact structures


@dataclass
class PsiData:
    M: tuple
    H: tuple
    G: tuple
    sequence_exact: bool


def psi_sequence(M: Rep):
    """0 -> H -> G -> M -> 0 with H projective and G Gorenstein-projective.

    Push the cover sequence 0 -> Omega M -> P -> M -> 0 out along a minimal
    left add(A)-approximation Omega M -> Q.
    """
    from .tiltdual import minimal_left_approximation
    cov = hl.projective_cover(M)
    Om = cov.syzygy
    A = M.algebra
    if Om.dim == 0:
        Z = rc.zero_rep(A)
        return Z, rc.zero_morphism(Z, M), rc.identity(M), M
    Rm = A.regular_module()
    f, Q = minimal_left_approximation(Om, Rm)
    if not f.is_injective():
        raise NotGPdim1("syzygy does not embed in a projective")
    G, j, i_p = hl.pushout(f, cov.syzygy_inclusion)
    # G -> M induced by (0 on Q, epi on P)
    ds = rc.direct_sum_data([Q, cov.projective])
    g = rc.morphism_from_sum([rc.zero_morphism(Q, M), cov.epi], ds)
    phi = rc.morphism_to_sum([f, cov.syzygy_inclusion.scale(int(A.field.neg(1)))], ds)
    parts = rc.morphism_parts(phi)
    proj = hl._descend(g, parts.cokernel_projection, parts.cokernel)
    return Q, j, proj, G


def psi_map(M, ctx_A: ExactContext, sctx_B: SdhContext, bound: int = hl.DEFAULT_BOUND) -> SdhElement:
    """[M] -> q^{-<M,H>} [G] [H]^-1, returned with a left denominator."""
    reg = ctx_A.reg
    Mrep = reg.rep(M)
    if hl.membership(Mrep, SubcatSpec("GPdimLE", (1,)), bound).status != YES:
        raise NotGPdim1(f"{reg.label(M)} is not of GP-dimension <= 1")
    Hm, j, p, G = psi_sequence(Mrep)
    Hk = reg.classify(Hm)
    Gk = reg.classify(G)
    c = _qpow(reg.A.field.q, -reg.euler(M, Hk))
    return sctx_B.right_fraction({Gk: c}, Hk)


def psi_data(M, reg: Registry) -> PsiData:
    Mrep = reg.rep(M)
    Hm, j, p, G = psi_sequence(Mrep)
    ok = j.is_injective() and p.is_surjective() and j.check() and p.check()
    comp = p.compose(j)
    ok = ok and comp.is_zero() and Hm.dim + Mrep.dim == G.dim
    return PsiData(M, reg.classify(Hm), reg.classify(G), bool(ok))


@dataclass
class Report:
    name: str
    records: list = field(default_factory=list)

    def add(self, check: str, status: str, detail=None):
        self.records.append({"check": check, "status": status, "detail": detail if detail is not None else {}})

    @property
    def failures(self) -> list:
        return [r for r in self.records if r["status"] == "fail"]

    @property
    def status(self) -> str:
        if self.failures:
            return "fail"
        if any(r["status"] == "unknown" for r in self.records):
            return "unknown"
        return "pass"


def verify_prop47(ctx_A: ExactContext, sctx_B: SdhContext, bound: int = hl.DEFAULT_BOUND) -> Report:
    """psi inverts the embedding on GP classes and is multiplicative on the context."""
    rep = Report("prop47")
    reg = ctx_A.reg
    D = ctx_A.H.D
    gp_ctx = sctx_B.ctx
    psi = {}
    for M in ctx_A.classes():
        psi[M] = psi_map(M, ctx_A, sctx_B, bound)
        pdat = psi_data(M, reg)
        if not pdat.sequence_exact:
            rep.add(f"psi-sequence {reg.label(M)}", "fail", {"class": reg.label(M)})
    for G in gp_ctx.classes():
        if G not in psi:
            continue
        ok = sctx_B.eq(psi[G], sdh_class(G))
        rep.add(f"psi-phi {reg.label(G)}", "pass" if ok else "fail",
                {"psi": psi[G].to_document(reg)})
    cls = ctx_A.classes()
    for M in cls:
        for N in cls:
            if reg.dim(M) + reg.dim(N) > D:
                continue
            prod = ctx_A.H.product_classes(M, N)
            lhs = SdhElement(ZERO, {})
            for L, c in sorted(prod.items()):
                if not ctx_A.member(L):
                    rep.add(f"closure {reg.label(L)}", "fail", {})
                    continue
                lhs = sctx_B.add(lhs, sctx_B.scale(psi[L], c))
            rhs = sctx_B.mul(psi[M], psi[N])
            ok = sctx_B.eq(lhs, rhs)
            rep.add(f"psi-mult {reg.label(M)} * {reg.label(N)}", "pass" if ok else "fail",
                    {} if ok else {"lhs": lhs.to_document(reg), "rhs": rhs.to_document(reg)})
    return rep


# ---------------------------------------------------------------------------
# Xi


def xi_map(G, data, ctx_A: ExactContext, sctx_B: SdhContext, reg_B: Registry,
           bound: int = hl.DEFAULT_BOUND) -> tuple:
    """Xi([G]) = q^{-<L,G>} [Hom(T,L)]^-1 [Hom(T,Z)]; returns (element, details)."""
    from .tiltdual import minimal_left_perp_approx, apply_hom_functor
    reg = ctx_A.reg
    Grep = reg.rep(G)
    f, Lrep = minimal_left_perp_approx(Grep, data, bound=bound)
    Z = f.target
    Lk = reg.classify(Lrep)
    e = reg.euler(Lk, G)
    HZ = apply_hom_functor(Z, data, "cov-T")
    HL = apply_hom_functor(Lrep, data, "cov-T")
    zk = reg_B.classify(HZ)
    lk = reg_B.classify(HL)
    el = SdhElement(lk, {zk: _qpow(reg.A.field.q, -e)})
    return el, {"Z": reg.classify(Z), "L": Lk, "euler_LG": e, "HomTZ": zk, "HomTL": lk}


def verify_thm410(data, ctx_A: ExactContext, sctx_A: SdhContext, sctx_B: SdhContext,
                  reg_B: Registry, bound: int = hl.DEFAULT_BOUND, pair_budget: Optional[int] = None) -> Report:
    from .tiltdual import apply_hom_functor
    rep = Report("thm410")
    reg = ctx_A.reg
    D = ctx_A.H.D
    cls = ctx_A.classes()
    xi = {}
    for G in cls:
        xi[G], det = xi_map(G, data, ctx_A, sctx_B, reg_B, bound)
        # Euler transfer <F(G), F(L)>_{B^op} = <L, G>_A
        L = det["L"]
        FG = apply_hom_functor(reg.rep(G), data, "contra-A")
        FL = apply_hom_functor(reg.rep(L), data, "contra-A")
        lhs = rc.hom_dim(FG, FL) - hl.ext1_dim(FG, FL)
        ok = lhs == det["euler_LG"]
        rep.add(f"euler-transfer {reg.label(G)}", "pass" if ok else "fail",
                {"lhs": lhs, "rhs": det["euler_LG"]})
    pairs = [(a, b) for a in cls for b in cls if reg.dim(a) + reg.dim(b) <= D]
    if pair_budget is not None:
        pairs = pairs[:pair_budget]
    for a, b in pairs:
        prod = ctx_A.H.product_classes(a, b)
        lhs = SdhElement(ZERO, {})
        for L, c in sorted(prod.items()):
            lhs = sctx_B.add(lhs, sctx_B.scale(xi[L], c))
        rhs = sctx_B.mul(xi[a], xi[b])
        ok = sctx_B.eq(lhs, rhs)
        rep.add(f"xi-mult {reg.label(a)} * {reg.label(b)}", "pass" if ok else "fail",
                {} if ok else {"lhs": lhs.to_document(reg_B), "rhs": rhs.to_document(reg_B)})
    return rep, xi


# ---------------------------------------------------------------------------
# K0 and the weakly Gorenstein conditions


def k0_presentation(ctx: ExactContext) -> tuple:
    gens = ctx.classes()
    gens = [g for g in gens if g]
    # indecomposable classes generate; relations from conflations and direct sums
    pos = {g: n for n, g in enumerate(gens)}
    rows = []
    for (K, L, M) in ctx.cat.conflations():
        if not (ctx.member(K) and ctx.member(L) and ctx.member(M)):
            continue
        r = [0] * len(gens)
        for key, s in ((L, 1), (K, -1), (M, -1)):
            if key:
                r[pos[key]] += s
        if any(r):
            rows.append(r)
    return gens, rows


def invariant_factors(ngens: int, rows: list) -> tuple:
    """(free rank, torsion invariant factors > 1) of Z^ngens / rows."""
    if ngens == 0:
        return 0, []
    if not rows:
        return ngens, []
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import smith_normal_form
    S = smith_normal_form(Matrix(rows), domain=ZZ)
    diag = [abs(int(S[i, i])) for i in range(min(S.shape)) if S[i, i] != 0]
    return ngens - len(diag), [d for d in diag if d > 1]


def k0_compare(ctx_A: ExactContext, ctx_B: ExactContext) -> tuple:
    ga, ra = k0_presentation(ctx_A)
    gb, rb = k0_presentation(ctx_B)
    fa = invariant_factors(len(ga), ra)
    fb = invariant_factors(len(gb), rb)
    return fa, fb, fa == fb


def weakly_gorenstein_check(ctx: ExactContext, bound: int = hl.DEFAULT_BOUND) -> Verdict:
    """P<=1 = I<=1 = P<inf = I<inf over the catalog members of the context."""
    if ctx.name not in ("mod", "GP", "perpT-GP1"):
        raise UnsupportedSpec(ctx.name)
    reg = ctx.reg
    ids = [i for i in ctx.cat.indec_ids if ctx._member(i)]
    members = [reg.indecs[i].rep for i in ids]

    def ext_proj_dim(i):
        X = reg.indecs[i].rep
        if ctx.name == "GP":
            return 0 if hl.is_projective(X) else None
        v = hl.res_dim(X, SubcatSpec("Projectives"), bound)
        return v.value if v.status == YES else None

    def ext_inj_dim(i):
        X = reg.indecs[i].rep
        if ctx.name == "GP":
            return 0 if hl.is_projective(X) else None
        if ctx.name == "mod":
            v = hl.res_dim(rc.k_dual(X), SubcatSpec("Projectives"), bound)
            return v.value if v.status == YES else None
        # catalog-relative: smallest d with Ext^{d+1}(Y, X) = 0 for members Y, d <= 2
        for d in range(0, 3):
            if all(hl.ext_dim(Y, X, d + 1) == 0 for Y in members):
                return d
        return None

    pd = {i: ext_proj_dim(i) for i in ids}
    idd = {i: ext_inj_dim(i) for i in ids}
    P1 = {i for i in ids if pd[i] is not None and pd[i] <= 1}
    Pinf = {i for i in ids if pd[i] is not None}
    I1 = {i for i in ids if idd[i] is not None and idd[i] <= 1}
    Iinf = {i for i in ids if idd[i] is not None}
    cert = {"P<=1": sorted(reg.indecs[i].label for i in P1),
            "P<inf": sorted(reg.indecs[i].label for i in Pinf),
            "I<=1": sorted(reg.indecs[i].label for i in I1),
            "I<inf": sorted(reg.indecs[i].label for i in Iinf)}
    ok = P1 == Pinf == I1 == Iinf
    # (E-d): the projective cover of each member is a deflation from P<inf
    return Verdict(YES if ok else NO, bound, cert)
