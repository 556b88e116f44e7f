"""Projective covers, syzygies, Ext groups and three-valued homological verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import ffla
from . import repcat as rc
from .errors import AlgebraMismatch, NotResolvingSpec
from .repcat import Rep, RepMorphism

DEFAULT_BOUND = 24
SYZYGY_DIM_CAP = 48      # syzygy chains stop with Unknown beyond this total dimension

YES, NO, UNKNOWN = "Yes", "No", "Unknown"


@dataclass
class Verdict:
    status: str
    bound_used: int
    certificate: dict = field(default_factory=dict)
    value: Optional[int] = None     # dimension-valued verdicts

    def __bool__(self):
        return self.status == YES

    def to_document(self) -> dict:
        doc = {"status": self.status, "bound_used": self.bound_used,
               "certificate": self.certificate}
        if self.value is not None:
            doc["value"] = self.value
        return doc


def _conj(verdicts: list, bound: int, certificate: dict) -> Verdict:
    statuses = [v.status for v in verdicts]
    if NO in statuses:
        st = NO
    elif all(s == YES for s in statuses):
        st = YES
    else:
        st = UNKNOWN
    return Verdict(st, bound, certificate)


# ---------------------------------------------------------------------------
# radicals and projective covers


def module_radical_basis(M: Rep) -> list:
    """rad M as per-vertex column bases."""
    F = M.field
    A = M.algebra
    if A.is_quiver:
        rows = [[] for _ in M.dims]
        for g, x in zip(A.gens, M.mats):
            if x.size:
                rows[g.tgt].extend(x.T)
        out = []
        for v, d in enumerate(M.dims):
            if rows[v]:
                out.append(rc.as_cols(ffla.row_space(F, np.array(rows[v])).T, d))
            else:
                out.append(np.zeros((d, 0), dtype=np.int64))
        return out
    J = A.radical_basis()
    cols = []
    for j in J:
        X = M.act_element(j)
        cols.extend(X.T)
    if not cols or M.dim == 0:
        return [np.zeros((M.dim, 0), dtype=np.int64)]
    return [rc.as_cols(ffla.row_space(F, np.array(cols)).T, M.dim)]


def top(M: Rep) -> tuple:
    return rc.quotient_by_basis(M, module_radical_basis(M))


def _rows_of(bases: list) -> list:
    return [b.T.copy() for b in bases]


@dataclass
class Cover:
    projective: Rep
    epi: RepMorphism
    syzygy: Rep
    syzygy_inclusion: RepMorphism
    summands: list          # projective-class index per summand


def _map_from_projective(info, M: Rep, m: np.ndarray) -> RepMorphism:
    """The morphism P -> M sending the generator of P to the vector m."""
    F = M.field
    P = info.module
    basis = rc.hom_space(P, M)
    if not basis:
        raise AlgebraMismatch("vector has no preimage map")
    cols = np.array([F.matmul(f.total(), info.generator.reshape(-1, 1))[:, 0] for f in basis]).T
    c, _ = ffla.solve(F, cols, m.reshape(-1, 1))
    if c is None:
        raise AlgebraMismatch("vector does not lie in e M")
    out = basis[0].scale(0)
    for ci, f in zip(c[:, 0], basis):
        if ci:
            out = out + f.scale(int(ci))
    return out


def projective_cover(M: Rep) -> Cover:
    cached = getattr(M, "_cover", None)
    if cached is not None:
        return cached
    F = M.field
    A = M.algebra
    infos = A.projectives()
    rad = module_radical_basis(M)
    # current span U (total coordinates, rows) containing rad M
    def to_total(bases):
        rows = []
        for v, b in enumerate(bases):
            for col in b.T:
                full = np.zeros(M.dim, dtype=np.int64)
                full[M.offsets[v]:M.offsets[v + 1]] = col
                rows.append(full)
        return np.array(rows, dtype=np.int64).reshape(len(rows), M.dim)
    U = to_total(rad)
    U = ffla.row_space(F, U) if U.shape[0] else U
    comps, summands = [], []
    for j, info in enumerate(infos):
        E = M.act_element(info.idempotent)
        img = ffla.row_space(F, E.T) if M.dim else np.zeros((0, 0), dtype=np.int64)
        for vec in img:
            while not (U.shape[0] and ffla.in_span(F, U, vec)) and np.any(vec):
                f = _map_from_projective(info, M, vec)
                comps.append(f)
                summands.append(j)
                im = f.total().T
                U = ffla.row_space(F, np.vstack([U, im]) if U.shape[0] else im)
    if U.shape[0] != M.dim:
        raise AlgebraMismatch("projective cover construction did not reach M")
    mods = [infos[j].module for j in summands]
    ds = rc.direct_sum_data(mods, A)
    if comps:
        epi = rc.morphism_from_sum(comps, ds)
    else:
        epi = rc.zero_morphism(ds.module, M)
    K, kinc = rc.kernel(epi)
    cov = Cover(ds.module, epi, K, kinc, summands)
    M._cover = cov
    return cov


def syzygy(M: Rep) -> Rep:
    return projective_cover(M).syzygy


def is_projective(M: Rep) -> bool:
    return syzygy(M).dim == 0


@dataclass
class ProjResolution:
    target: Rep
    terms: list
    maps: list          # maps[i]: P_i -> P_{i-1} (maps[0]: P_0 -> M)
    kernels: list


def projective_resolution(M: Rep, length: int) -> ProjResolution:
    terms, maps, kernels = [], [], []
    cur = M
    prev_inc = None
    for _ in range(length + 1):
        cov = projective_cover(cur)
        terms.append(cov.projective)
        maps.append(cov.epi if prev_inc is None else prev_inc.compose(cov.epi))
        kernels.append(cov.syzygy)
        prev_inc = cov.syzygy_inclusion
        cur = cov.syzygy
        if cur.dim == 0:
            break
    return ProjResolution(M, terms, maps, kernels)


# ---------------------------------------------------------------------------
# Ext


def ext1_dim(M: Rep, N: Rep) -> int:
    rc._check_same(M, N)
    if M.dim == 0 or N.dim == 0:
        return 0
    cov = projective_cover(M)
    return rc.hom_dim(cov.syzygy, N) - rc.hom_dim(cov.projective, N) + rc.hom_dim(M, N)


def ext_dim(M: Rep, N: Rep, i: int) -> int:
    if i == 0:
        return rc.hom_dim(M, N)
    X = M
    for _ in range(i - 1):
        X = syzygy(X)
    return ext1_dim(X, N)


@dataclass
class ExtData:
    dim: int
    degree: int
    cover: Optional[Cover] = None
    cocycles: list = field(default_factory=list)     # Hom(Omega M, N) representatives


def ext_space(M: Rep, N: Rep, i: int) -> ExtData:
    rc._check_same(M, N)
    if i == 0:
        return ExtData(rc.hom_dim(M, N), 0)
    if i > 1:
        return ExtData(ext_dim(M, N, i), i)
    F = M.field
    cov = projective_cover(M)
    omega_maps = rc.hom_space(cov.syzygy, N)
    if not omega_maps:
        return ExtData(0, 1, cov, [])
    restr = [h.compose(cov.syzygy_inclusion).flat() for h in rc.hom_space(cov.projective, N)]
    flat = np.array([h.flat() for h in omega_maps], dtype=np.int64)
    img = ffla.row_space(F, np.array(restr)) if restr else np.zeros((0, flat.shape[1]), dtype=np.int64)
    # coordinates of the coboundaries inside Hom(Omega, N)
    if img.shape[0]:
        coords, _ = ffla.solve(F, flat.T, img.T)
        coords = ffla.row_space(F, coords.T)
    else:
        coords = np.zeros((0, len(omega_maps)), dtype=np.int64)
    comp = ffla.complement_basis(F, coords, len(omega_maps))
    cocycles = [rc.morphism_from_flat(cov.syzygy, N, ffla.lincomb(F, c, flat)) for c in comp]
    return ExtData(len(cocycles), 1, cov, cocycles)


@dataclass
class Extension:
    middle: Rep
    inclusion: RepMorphism      # N -> E
    projection: RepMorphism     # E -> M


def _descend(g: RepMorphism, proj: RepMorphism, Q: Rep) -> RepMorphism:
    """The map Q -> target induced by g through the surjection proj: X -> Q."""
    F = g.field
    blocks = []
    for v in range(len(Q.dims)):
        P = proj.blocks[v]
        G = g.blocks[v]
        if Q.dims[v] == 0:
            blocks.append(np.zeros((G.shape[0], 0), dtype=np.int64))
            continue
        Xt, _ = ffla.solve(F, P.T, G.T)
        blocks.append(Xt.T)
    return RepMorphism(Q, g.target, blocks)


def realize_extension(ext: ExtData, h: RepMorphism, M: Rep, N: Rep) -> Extension:
    """Middle term of the extension class of a cocycle h: Omega M -> N, by pushout."""
    F = M.field
    cov = ext.cover if ext.cover is not None else projective_cover(M)
    ds = rc.direct_sum_data([N, cov.projective])
    neg = cov.syzygy_inclusion.scale(int(F.neg(1)))
    phi = rc.morphism_to_sum([h, neg], ds)
    parts = rc.morphism_parts(phi)
    E, q = parts.cokernel, parts.cokernel_projection
    inc = q.compose(ds.inclusions[0])
    g = rc.morphism_from_sum([rc.zero_morphism(N, M), cov.epi], ds)
    proj = _descend(g, q, E)
    return Extension(E, inc, proj)


def pushout(f: RepMorphism, g: RepMorphism) -> tuple:
    """Pushout of X <-f- K -g-> Y: returns (Q, X -> Q, Y -> Q)."""
    F = f.field
    ds = rc.direct_sum_data([f.target, g.target])
    phi = rc.morphism_to_sum([f, g.scale(int(F.neg(1)))], ds)
    parts = rc.morphism_parts(phi)
    q = parts.cokernel_projection
    return parts.cokernel, q.compose(ds.inclusions[0]), q.compose(ds.inclusions[1])


# ---------------------------------------------------------------------------
# verdicts


def _iso_index(chain: list, X: Rep) -> Optional[int]:
    for k, Y in enumerate(chain):
        if Y.dims == X.dims and rc.is_isomorphic(Y, X) is not None:
            return k
    return None


def perp_verdict(M: Rep, T: Rep, bound: int = DEFAULT_BOUND) -> Verdict:
    """Ext^i(M, T) = 0 for all i >= 1, certified by a syzygy cycle."""
    rc._check_same(M, T)
    chain = []
    table = []
    X = M
    for j in range(bound + 1):
        k = _iso_index(chain, X)
        if k is not None:
            return Verdict(YES, j, {"kind": "syzygy-cycle", "repeat": [k, j],
                                    "dims": [list(c.dims) for c in chain], "ext": table})
        if X.dim == 0 or is_projective(X):
            return Verdict(YES, j, {"kind": "projective-syzygy", "step": j,
                                    "dims": [list(c.dims) for c in chain] + [list(X.dims)], "ext": table})
        e = ext1_dim(X, T)
        table.append(e)
        if e:
            return Verdict(NO, j, {"kind": "ext-witness", "degree": j + 1, "dim": e, "ext": table})
        chain.append(X)
        X = syzygy(X)
        if X.dim > SYZYGY_DIM_CAP:
            return Verdict(UNKNOWN, j + 1, {"kind": "size-cap", "dim": X.dim, "ext": table})
    return Verdict(UNKNOWN, bound, {"kind": "bound-exhausted", "ext": table})


def in_perp(M: Rep, T: Rep, bound: int = DEFAULT_BOUND) -> Verdict:
    return perp_verdict(M, T, bound)


def sgp_verdict(M: Rep, bound: int = DEFAULT_BOUND) -> Verdict:
    return perp_verdict(M, M.algebra.regular_module(), bound)


def sigma_injective(M: Rep) -> bool:
    P = rc.evaluation_pairing(M, [M.algebra.regular_module()])
    return ffla.rank(M.field, P) == M.dim if M.dim else True


def gp_verdict(M: Rep, bound: int = DEFAULT_BOUND) -> Verdict:
    cached = getattr(M, "_gp", None)
    if cached is not None and cached[0] == bound:
        return cached[1]
    v1 = sgp_verdict(M, bound)
    if v1.status == NO:
        out = Verdict(NO, v1.bound_used, {"failed": "sgp", "sgp": v1.certificate})
    else:
        D = rc.a_dual(M)
        v2 = sgp_verdict(D, bound)
        inj = sigma_injective(M)
        dd = rc.a_dual(D)
        bij = inj and dd.dim == M.dim
        v3 = Verdict(YES if bij else NO, 0, {"injective": inj, "dim": M.dim, "double_dual_dim": dd.dim})
        cert = {"sgp": v1.certificate, "dual_sgp": v2.certificate, "sigma": v3.certificate}
        out = _conj([v1, v2, v3], max(v1.bound_used, v2.bound_used), cert)
    M._gp = (bound, out)
    return out


def res_dim(M: Rep, X, bound: int = DEFAULT_BOUND) -> Verdict:
    """Smallest n with Omega^n M in the resolving subcategory X."""
    if not X.is_resolving():
        raise NotResolvingSpec(f"{X.tag} is not a resolving subcategory spec")
    chain = []
    Y = M
    for n in range(bound + 1):
        v = membership(Y, X, bound)
        if v.status == YES:
            return Verdict(YES, n, {"syzygies": n}, value=n)
        if v.status == UNKNOWN:
            return Verdict(UNKNOWN, n, {"undecided_at": n})
        k = _iso_index(chain, Y)
        if k is not None:
            return Verdict(UNKNOWN, n, {"kind": "syzygy-cycle", "repeat": [k, n], "infinite": True})
        chain.append(Y)
        Y = syzygy(Y)
        if Y.dim > SYZYGY_DIM_CAP:
            return Verdict(UNKNOWN, n + 1, {"kind": "size-cap", "dim": Y.dim})
    return Verdict(UNKNOWN, bound, {"kind": "bound-exhausted"})


def gp_dim(M: Rep, bound: int = DEFAULT_BOUND) -> Verdict:
    return res_dim(M, SubcatSpec("GP"), bound)


def transpose(M: Rep) -> Rep:
    """Cokernel of the a-dual of a minimal projective presentation."""
    c0 = projective_cover(M)
    c1 = projective_cover(c0.syzygy)
    d = c0.syzygy_inclusion.compose(c1.epi)
    dstar = rc.a_dual_morphism(d)
    return rc.cokernel(dstar)[0]


# ---------------------------------------------------------------------------
# subcategory specifications


@dataclass
class SubcatSpec:
    tag: str
    params: tuple = ()

    def is_resolving(self) -> bool:
        if self.tag in ("Projectives", "GP", "SGP", "PerpT"):
            return True
        if self.tag == "Intersection":
            return all(s.is_resolving() for s in self.params)
        return False


def in_add(M: Rep, T: Rep) -> bool:
    summands = [X for X, _ in rc.decompose(T)]
    for X, _ in rc.decompose(M):
        if not any(Y.dims == X.dims and rc.iso_indecomposable(Y, X) is not None for Y in summands):
            return False
    return True


def _dim_le(M: Rep, base: SubcatSpec, n: int, bound: int) -> Verdict:
    """res.dim <= n iff the n-th syzygy lies in the (summand-closed, resolving) base."""
    Y = M
    for _ in range(n):
        if Y.dim == 0 or is_projective(Y):
            break
        Y = syzygy(Y)
    v = membership(Y, base, bound)
    return Verdict(v.status, v.bound_used, {"syzygy_index": n, "base": v.certificate})


def membership(M: Rep, X: SubcatSpec, bound: int = DEFAULT_BOUND) -> Verdict:
    tag = X.tag
    if tag == "Projectives":
        return Verdict(YES if is_projective(M) else NO, 0, {"syzygy_dim": syzygy(M).dim})
    if tag == "GP":
        return gp_verdict(M, bound)
    if tag == "SGP":
        return sgp_verdict(M, bound)
    if tag == "PerpT":
        return in_perp(M, X.params[0], bound)
    if tag == "WT":
        return w_membership(M, X.params[0], X.params[1], bound)
    if tag == "AddOf":
        return Verdict(YES if in_add(M, X.params[0]) else NO, 0, {})
    if tag == "PdimLE":
        return _dim_le(M, SubcatSpec("Projectives"), X.params[0], bound)
    if tag == "GPdimLE":
        return _dim_le(M, SubcatSpec("GP"), X.params[0], bound)
    if tag == "SGPdimLE":
        return _dim_le(M, SubcatSpec("SGP"), X.params[0], bound)
    if tag == "Intersection":
        vs = [membership(M, s, bound) for s in X.params]
        return _conj(vs, max((v.bound_used for v in vs), default=0),
                     {"parts": [v.status for v in vs]})
    if tag == "All":
        return Verdict(YES, 0, {})
    raise NotResolvingSpec(f"unknown subcategory tag {tag}")


# ---------------------------------------------------------------------------
# cogen* and W(T); bdata is a tiltdual.BimoduleData


def sigma_T_bijective(M: Rep, bdata) -> dict:
    F = M.field
    P = rc.evaluation_pairing(M, [bdata.T])
    inj = ffla.rank(F, P) == M.dim if M.dim else True
    Y = bdata.contra_A(M)
    back = bdata.contra_Bop(Y)
    return {"injective": inj, "dim": M.dim, "double_dim": back.dim,
            "bijective": inj and back.dim == M.dim}


def cogen_star_test(M: Rep, T: Rep, bdata, bound: int = DEFAULT_BOUND) -> Verdict:
    sig = sigma_T_bijective(M, bdata)
    v1 = Verdict(YES if sig["bijective"] else NO, 0, sig)
    if v1.status == NO:
        return Verdict(NO, 0, {"sigma": sig})
    Y = bdata.contra_A(M)
    v2 = in_perp(Y, bdata.T_Bop, bound)
    return _conj([v1, v2], v2.bound_used, {"sigma": sig, "perp_B": v2.certificate})


def w_membership(M: Rep, T: Rep, bdata, bound: int = DEFAULT_BOUND) -> Verdict:
    v1 = in_perp(M, T, bound)
    if v1.status == NO:
        return Verdict(NO, v1.bound_used, {"perp": v1.certificate})
    v2 = cogen_star_test(M, T, bdata, bound)
    return _conj([v1, v2], max(v1.bound_used, v2.bound_used),
                 {"perp": v1.certificate, "cogen": v2.certificate})
