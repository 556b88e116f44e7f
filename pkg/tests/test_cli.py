import json
import threading

import pytest

from tilthall import cli
from tilthall.errors import ParseError

from conftest import algebra


def _by_id(doc):
    return {r["id"]: r for r in doc["records"]}


# -- cache ---------------------------------------------------------------------

def test_cache_roundtrip(tmp_path):
    cache = cli.CatalogCache(tmp_path)
    key = cache.key(kind="x", n=1)
    payload = {"a": [1, 2, 3], "b": "text"}
    cache.put(key, payload)
    first = cache.get_bytes(key)
    assert cache.get(key) == payload
    cache.put(key, payload)
    assert cache.get_bytes(key) == first


def test_cache_key_depends_on_caps():
    assert cli.CatalogCache.key(D=4, cap=10) != cli.CatalogCache.key(D=4, cap=11)
    assert cli.CatalogCache.key(D=4, cap=10) == cli.CatalogCache.key(cap=10, D=4)


def test_cache_concurrent_writers(tmp_path):
    cache = cli.CatalogCache(tmp_path)
    key = cache.key(kind="race")
    payload = {"v": list(range(500))}
    errors = []

    def work():
        try:
            for _ in range(20):
                cache.put(key, payload)
        except Exception as e:      # pragma: no cover - reported below
            errors.append(e)

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert cache.get(key) == payload
    assert not list(tmp_path.glob("*.tmp"))


def test_cache_corruption_is_a_miss(tmp_path, caplog):
    cache = cli.CatalogCache(tmp_path)
    key = cache.key(kind="bad")
    cache.put(key, {"x": 1})
    path = tmp_path / f"{key}.json"
    doc = json.loads(path.read_text())
    doc["payload"]["x"] = 2
    path.write_text(json.dumps(doc))
    assert cache.get(key) is None
    path.write_text("{not json")
    assert cache.get(key) is None
    assert "CacheCorrupt" in caplog.text or "unreadable" in caplog.text


def test_cached_catalog_roundtrip(tmp_path):
    A = algebra("D2")
    cfg = cli.RunConfig(dim_bound=3)
    cache = cli.CatalogCache(tmp_path)
    fresh = cli.cached_catalog(A, cfg, cache)
    again = cli.cached_catalog(A, cfg, cache)
    assert [fresh.reg.label(k) for k in fresh.classes] == [again.reg.label(k) for k in again.classes]
    assert fresh.hall_numbers() == again.hall_numbers()
    other = cli.RunConfig(dim_bound=2)
    assert len(cli.cached_catalog(A, other, cache).classes) == 4
    assert len(list(tmp_path.glob("*.json"))) == 2


# -- suites --------------------------------------------------------------------

def test_hall_table_d2():
    doc, code = cli.run(cli.RunConfig(algebras=["D2"], dim_bound=2, suite="hall-table"))
    assert code == 0
    table = _by_id(doc)["hall-table/D2/table"]["certificate"]
    prods = {(p["left"], p["right"], p["class"]): p["coefficient"] for p in table["products"]}
    assert prods[("S1", "S1", "S1^2")] == "1/2"
    assert prods[("S1", "S1", "P1")] == "1/2"


def test_certify_gp_l3():
    doc, code = cli.run(cli.RunConfig(algebras=["L3"], dim_bound=2, suite="certify-gp"))
    rec = _by_id(doc)["certify-gp/L3/S1"]
    assert rec["status"] == "pass"
    assert rec["certificate"]["sgp"]["status"] == "No"
    assert rec["certificate"]["sgp"]["certificate"]["kind"] == "ext-witness"
    assert rec["certificate"]["gp"]["status"] == "No"


def test_certify_tilting_records():
    doc, code = cli.run(cli.RunConfig(algebras=["A2F2"], tiltings=["tilting/A2F2_T"],
                                      dim_bound=2, suite="certify-tilting"))
    recs = _by_id(doc)
    assert recs["certify-tilting/A2F2/A2F2_T/tilting"]["certificate"]["pd"] == 1
    assert recs["certify-tilting/A2F2/A/tilting"]["status"] == "pass"
    assert code == 0


def test_parse_error_location(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "field": "F2",\n  "quiver": [1, 2,\n}\n')
    with pytest.raises(ParseError) as exc:
        cli.load_algebra(str(bad))
    assert str(exc.value).startswith(f"{bad}:4:1:")
    with pytest.raises(ParseError):
        cli.load_algebra("no-such-fixture")


def test_config_validation():
    with pytest.raises(ValueError):
        cli.RunConfig(dim_bound=0).validate()
    with pytest.raises(ValueError):
        cli.RunConfig(suite="nope").validate()


def test_exit_codes():
    mk = lambda *s: [{"status": x} for x in s]
    assert cli.exit_code(mk("pass", "pass")) == 0
    assert cli.exit_code(mk("pass", "unknown")) == 2
    assert cli.exit_code(mk("unknown", "fail")) == 1
    assert cli.exit_code([]) == 0


def test_main_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = cli.main(["--algebra", "D2", "--dim-bound", "2", "--suite", "catalog", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["status"] == "pass" and doc["config"]["dim_bound"] == 2
    assert "overall: pass" in capsys.readouterr().out


def test_main_bad_input(tmp_path, capsys):
    assert cli.main(["--algebra", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 1
    assert "error" in capsys.readouterr().err


def test_report_deterministic_with_cache(tmp_path):
    cfg = lambda: cli.RunConfig(algebras=["D2"], dim_bound=3, cache_dir=str(tmp_path))
    a = cli.render_report(cli.run(cfg())[0])
    b = cli.render_report(cli.run(cfg())[0])
    c = cli.render_report(cli.run(cli.RunConfig(algebras=["D2"], dim_bound=3))[0])
    assert a == b == c


def test_report_records_have_anchors():
    doc, _ = cli.run(cli.RunConfig(algebras=["D2"], dim_bound=2, suite="k0-compare"))
    for r in doc["records"]:
        assert set(r) == {"id", "anchor", "status", "certificate"}
        assert r["status"] in cli.STATUSES and r["anchor"]
