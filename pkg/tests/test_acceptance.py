"""Acceptance criteria 1-11. Each test prints one PASS/FAIL line; comparisons are exact."""

from fractions import Fraction

import pytest

from tilthall import cli
from tilthall import hallcore as hc
from tilthall import homlab as hl
from tilthall import repcat as rc
from tilthall import tiltdual as td
from tilthall.errors import CoresolutionNotFound
from tilthall.homlab import NO, UNKNOWN, YES, SubcatSpec

from conftest import FIXTURES, algebra, catalog, indec, load_doc, proj, simple

TILTINGS = {"A2F2": "A2F2_T", "A2F3": "A2F3_T", "T2D2": "T2D2_T"}


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def tilting(name):
    return rc.rep_from_document(algebra(name), load_doc(f"tilting/{TILTINGS[name]}"))


_hall = {}


def hall(name, D=4):
    if (name, D) not in _hall:
        _hall[(name, D)] = hc.truncated_hall(catalog(name, D))
    return _hall[(name, D)]


def _oracle_coeff(cat, M, N, L):
    """|Ext^1(M,N)_L| / |Hom(M,N)| from cocycle enumeration."""
    return Fraction(hc.ext_count_oracle(M, N, L, cat), cat.q ** cat.reg.hom(M, N))


def test_criterion_01_hall_ground_truth(verdict):
    bad = []
    for name in ("A2F2", "A2F3"):
        cat = catalog(name)
        q = cat.q
        S1, S2, P1 = (indec(cat, x) for x in ("S1", "S2", "P1"))
        want = {hc.key_add(S1, S2): Fraction(1), P1: Fraction(q - 1)}
        got = hall(name).product_classes(S1, S2)
        oracle = {L: _oracle_coeff(cat, S1, S2, L) for L in want}
        if got != want or oracle != want:
            bad.append(name)
    cat = catalog("D2", 3)
    q = cat.q
    S, P = indec(cat, "S1"), indec(cat, "P1")
    want = {hc.key_add(S, S): Fraction(1, q), P: Fraction(q - 1, q)}
    got = hall("D2", 3).product_classes(S, S)
    oracle = {L: _oracle_coeff(cat, S, S, L) for L in want}
    if got != want or oracle != want:
        bad.append("D2")
    verdict(1, not bad, f"S1*S2 on A2/F2, A2/F3 and S*S on D2 (mismatches: {bad})")


def test_criterion_02_counting_paths(verdict):
    pairs, bad = 0, []
    for name in FIXTURES:
        res = hc.counting_check(catalog(name))
        pairs += res["pairs"]
        if res["mismatches"] or res["sum_failures"]:
            bad.append(name)
    verdict(2, pairs > 0 and not bad, f"{pairs} class pairs over {len(FIXTURES)} catalogs, failures {bad}")


def test_criterion_03_commutation(verdict):
    n, bad = 0, []
    for name in FIXTURES:
        H = hall(name)
        for mk in (hc.module_context, hc.gp_context):
            ctx = mk(H)
            for K, M in hc.admissible_pairs(ctx):
                n += 1
                if not hc.check_commutation(K, M, ctx)["ok"]:
                    bad.append((name, ctx.name, H.reg.label(K), H.reg.label(M)))
    verdict(3, n > 0 and not bad, f"{n} admissible pairs, {len(bad)} failures")


def test_criterion_04_prop47(verdict):
    H = hall("D2")
    r1 = hc.verify_prop47(hc.module_context(H), hc.SdhContext(hc.gp_context(H)))
    H = hall("T2D2")
    r2 = hc.verify_prop47(hc.perp_gp1_context(H, tilting("T2D2")), hc.SdhContext(hc.gp_context(H)))
    ok = all(r.status == "pass" for r in (r1, r2))
    fixes = sum(r["check"].startswith("psi-phi") for r in r1.records + r2.records)
    mult = sum(r["check"].startswith("psi-mult") for r in r1.records + r2.records)
    verdict(4, ok and fixes > 0 and mult > 0, f"{fixes} GP classes fixed, {mult} product instances")


def _thm410(name, T):
    H = hall(name)
    data = td.end_bimodule(T)
    catB = hc.build_catalog(data.B, 4)
    gpA = hc.gp_context(H)
    sB = hc.SdhContext(hc.gp_context(hc.truncated_hall(catB)))
    rep, xi = hc.verify_thm410(data, gpA, hc.SdhContext(gpA), sB, catB.reg)
    euler = {r["check"] for r in rep.records if r["check"].startswith("euler-transfer")}
    complete = len(euler) == len(gpA.classes())
    return rep, xi, catB, complete


def test_criterion_05_thm410(verdict):
    out = []
    rep, xi, catB, complete = _thm410("D2", algebra("D2").regular_module())
    reg = catalog("D2").reg
    images = [next(iter(x.numerator)) for x in xi.values()]
    identity = all(not x.denominator and list(x.numerator.values()) == [1] for x in xi.values()) \
        and len(set(images)) == len(images) \
        and all(catB.reg.dims(img) == reg.dims(G) for G, img in zip(xi, images))
    out.append(("D2/A", rep.status == "pass" and complete and identity))
    A2 = algebra("A2F2")
    apr = rc.direct_sum(proj(A2, (1, 1)), simple(A2, 0))
    rep, _, _, complete = _thm410("A2F2", apr)
    out.append(("A2F2/P1+S1", rep.status == "pass" and complete))
    rep, _, _, complete = _thm410("T2D2", tilting("T2D2"))
    out.append(("T2D2/T", rep.status == "pass" and complete))
    verdict(5, all(ok for _, ok in out), ", ".join(f"{k} {'ok' if ok else 'failed'}" for k, ok in out))


def _subcat(T, ell):
    return SubcatSpec("Intersection", (SubcatSpec("PerpT", (T,)), SubcatSpec("GPdimLE", (ell,))))


def test_criterion_06_resolving_duality(verdict):
    out = []
    for name in TILTINGS:
        T = tilting(name)
        cert = td.certify_tilting(T)
        data = td.end_bimodule(T)
        catE = hc.build_catalog(data.E, 4)
        rep = td.verify_resolving_duality(_subcat(T, cert.pd_T), _subcat(data.T_Bop, cert.pd_T),
                                          data, catalog(name), catE)
        gf = sum(r["check"].startswith("GF iso") for r in rep.records)
        ex = sum(r["check"].startswith("F exact") for r in rep.records)
        out.append((name, cert.ok and rep.status == "pass" and gf > 0 and ex > 0, gf, ex))
    verdict(6, all(o[1] for o in out),
            "; ".join(f"{n}: {gf} GF witnesses, {ex} exact conflations" for n, _, gf, ex in out))


def test_criterion_07_subcategory_identities(verdict):
    worst, contradictions, runs = 0.0, 0, 0
    for name in FIXTURES:
        A = algebra(name)
        tilts = [A.regular_module()] + ([tilting(name)] if name in TILTINGS else [])
        for T in tilts:
            cert = td.certify_tilting(T)
            rep = td.check_subcategory_identities(td.end_bimodule(T), catalog(name), cert.pd_T)
            runs += 1
            contradictions += sum(len(r["detail"].get("contradictions", [])) for r in rep.records)
            worst = max(worst, rep.unknown_rate)
            if rep.status == "fail":
                contradictions += 1
    verdict(7, contradictions == 0 and worst <= 0.1,
            f"{runs} runs, {contradictions} contradictions, worst unknown rate {worst:.3f}")


def test_criterion_08_gp_sgp(verdict):
    S = simple(algebra("D2"), 0)
    v = hl.gp_verdict(S)
    d2 = v.status == YES and v.certificate["sgp"]["kind"] == "syzygy-cycle" \
        and v.certificate["dual_sgp"]["kind"] == "syzygy-cycle"
    w = hl.sgp_verdict(simple(algebra("L3"), 0))
    l3 = w.status == NO and w.certificate["kind"] == "ext-witness" and w.certificate["dim"] > 0
    projs = all(hl.gp_verdict(P).status == YES for name in FIXTURES for P, _ in rc.projectives(algebra(name)))
    implication, decided = True, 0
    for name in FIXTURES:
        cat = catalog(name)
        for i in cat.indec_ids:
            X = cat.reg.indecs[i].rep
            g, s = hl.gp_verdict(X).status, hl.sgp_verdict(X).status
            if UNKNOWN not in (g, s):
                decided += 1
                implication &= not (g == YES and s == NO)
    verdict(8, d2 and l3 and projs and implication,
            f"D2 S GP {v.status}, L3 S SGP {w.status}, projectives GP {projs}, GP=>SGP on {decided} classes")


def test_criterion_09_k0(verdict):
    A2 = algebra("A2F2")
    apr = rc.direct_sum(proj(A2, (1, 1)), simple(A2, 0))
    data = td.end_bimodule(apr)
    ctxB = hc.gp_context(hc.truncated_hall(hc.build_catalog(data.B, 4)))
    fa, fb, same = hc.k0_compare(hc.gp_context(hall("A2F2")), ctxB)
    gens, rows = hc.k0_presentation(hc.gp_context(hall("D2", 2)))
    fd = hc.invariant_factors(len(gens), rows)
    ok = same and fa == (2, []) and fb == (2, []) and fd == (1, [])
    verdict(9, ok, f"GP(A2/F2) {fa}, GP(B) {fb}, GP(D2) at D=2 {fd}")


def test_criterion_10_tilting(verdict):
    A2 = algebra("A2F2")
    apr = rc.direct_sum(proj(A2, (1, 1)), simple(A2, 0))
    c = td.certify_tilting(apr)
    apr_ok = c.ok and c.pd_T == 1 and len(c.coresolution) == 2 and \
        all(hl.in_add(Ti, apr) and f.is_injective() for _, f, Ti in c.coresolution)
    try:
        td.certify_tilting(simple(A2, 0))
        s1_ok = False
    except CoresolutionNotFound as e:
        s1_ok = bool(e.certificate)
    reg_ok = all(td.certify_tilting(algebra(n).regular_module()).ok and
                 td.certify_tilting(algebra(n).regular_module()).pd_T == 0 for n in FIXTURES)
    verdict(10, apr_ok and s1_ok and reg_ok,
            f"P1+S1 pd {c.pd_T}, S1 rejected {s1_ok}, T=A on all fixtures {reg_ok}")


def test_criterion_11_determinism(verdict, tmp_path):
    def once(cache):
        cfg = cli.RunConfig(algebras=["A2F2", "D2"], tiltings=["tilting/A2F2_T"], seed=0,
                            cache_dir=str(cache) if cache else None)
        return cli.render_report(cli.run(cfg)[0]).encode()
    a = once(None)
    b = once(tmp_path)
    c = once(tmp_path)
    verdict(11, a == b == c, f"three runs of all suites on A2/F2 and D2, {len(a)} bytes each")
