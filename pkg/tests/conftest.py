import json
from importlib import resources

import pytest

from tilthall import hallcore as hc
from tilthall import repcat as rc
from tilthall import tiltdual as td

FIXTURES = ("A2F2", "A2F3", "D2", "L3", "T2D2")


def load_doc(name):
    return json.loads((resources.files("tilthall") / "fixtures" / f"{name}.json").read_text())


_algebras = {}
_catalogs = {}


def algebra(name):
    if name not in _algebras:
        _algebras[name] = rc.parse_algebra(load_doc(name))
    return _algebras[name]


def catalog(name, D=4):
    if (name, D) not in _catalogs:
        _catalogs[(name, D)] = hc.build_catalog(algebra(name), D)
    return _catalogs[(name, D)]


def indec(cat, label):
    """Class key of the indecomposable with the given label."""
    for i in cat.indec_ids:
        if cat.reg.indecs[i].label == label:
            return ((i, 1),)
    raise KeyError(label)


def dual_regular(A):
    return rc.k_dual(A.opposite().regular_module())


def proj(A, dims):
    """The indecomposable projective with the given dimension vector."""
    hits = [P for P, _ in rc.projectives(A) if P.dims == tuple(dims)]
    assert len(hits) == 1
    return hits[0]


def simple(A, k):
    return A.simples()[k]


@pytest.fixture(scope="session")
def a2():
    return algebra("A2F2")


@pytest.fixture(scope="session")
def a2f3():
    return algebra("A2F3")


@pytest.fixture(scope="session")
def d2():
    return algebra("D2")


@pytest.fixture(scope="session")
def l3():
    return algebra("L3")


@pytest.fixture(scope="session")
def t2d2():
    return algebra("T2D2")


@pytest.fixture(scope="session")
def apr(a2):
    """P1 + S1 over A2/F2."""
    return rc.direct_sum(proj(a2, (1, 1)), simple(a2, 0))


@pytest.fixture(scope="session")
def apr_data(apr):
    return td.end_bimodule(apr)
