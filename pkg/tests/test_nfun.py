import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from menger.errors import CapExceeded, StructuralError
from menger.nfun import (
    UNDEFINED,
    NPlaceFunction,
    compose,
    compose_tables,
    diagonal_slots,
    fixed_points,
    intersect,
    is_subfunction,
    proj_restrict,
    tuple_table,
)


def functions(m, n):
    return st.lists(st.integers(-1, m - 1), min_size=m**n, max_size=m**n).map(
        lambda t: NPlaceFunction(n, m, t))


@st.composite
def same_shape(draw, count):
    m = draw(st.integers(1, 3))
    n = draw(st.integers(1, 2))
    return [draw(functions(m, n)) for _ in range(count)]


def naive_compose(f, gs):
    """Dictionary oracle for Menger composition."""
    fg = f.graph()
    out = {}
    for args in itertools.product(range(f.base), repeat=f.arity):
        inner = [g.graph().get(args) for g in gs]
        if None in inner:
            continue
        v = fg.get(tuple(inner))
        if v is not None:
            out[args] = v
    return NPlaceFunction.from_mapping(f.arity, f.base, out)


def test_slot_order_first_argument_most_significant():
    assert tuple_table(2, 2).tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert diagonal_slots(3, 2).tolist() == [0, 4, 8]


def test_construction_and_queries():
    f = NPlaceFunction.from_mapping(2, 2, {(0, 1): 1, (1, 1): 0})
    assert f(0, 1) == 1 and f(0, 0) is None
    assert f.domain() == [(0, 1), (1, 1)]
    assert f.table.tolist() == [UNDEFINED, 1, UNDEFINED, 0]
    assert not f.table.flags.writeable


def test_from_callable_matches_mapping():
    f = NPlaceFunction.from_callable(1, 3, lambda a: None if a == 2 else (a + 1) % 3)
    assert f == NPlaceFunction.from_mapping(1, 3, {0: 1, 1: 2})


@pytest.mark.parametrize("args", [
    dict(arity=0, base=2, table=[]),
    dict(arity=1, base=-1, table=[]),
    dict(arity=1, base=2, table=[0]),
    dict(arity=1, base=2, table=[0, 2]),
    dict(arity=1, base=2, table=[0, -2]),
])
def test_structural_errors(args):
    with pytest.raises(StructuralError):
        NPlaceFunction(args["arity"], args["base"], args["table"])


def test_slot_cap():
    with pytest.raises(CapExceeded):
        NPlaceFunction.empty(3, 17)
    assert NPlaceFunction.empty(3, 17, max_slots=None).is_empty()


def test_empty_base_is_allowed():
    f = NPlaceFunction.empty(2, 0)
    assert f.table.size == 0 and f.is_empty()


def test_swap_composition_examples():
    swap = NPlaceFunction.from_mapping(1, 2, {0: 1, 1: 0})
    ident = NPlaceFunction.from_mapping(1, 2, {0: 0, 1: 1})
    empty = NPlaceFunction.empty(1, 2)
    assert compose(swap, [swap]) == ident
    assert compose(swap, [empty]) == empty
    assert intersect(swap, ident) == empty
    assert proj_restrict(1, swap) == ident
    assert fixed_points(swap) == set() and fixed_points(ident) == {0, 1}


def test_restriction_is_projection_on_domain():
    f = NPlaceFunction.from_mapping(2, 2, {(1, 0): 1, (0, 0): 1})
    assert proj_restrict(1, f).graph() == {(0, 0): 0, (1, 0): 1}
    assert proj_restrict(2, f).graph() == {(0, 0): 0, (1, 0): 0}
    with pytest.raises(StructuralError):
        proj_restrict(3, f)


def test_incompatible_shapes_rejected():
    with pytest.raises(StructuralError):
        intersect(NPlaceFunction.empty(1, 2), NPlaceFunction.empty(1, 3))
    with pytest.raises(StructuralError):
        compose(NPlaceFunction.empty(2, 2), [NPlaceFunction.empty(2, 2)])


def test_json_round_trip():
    f = NPlaceFunction.from_mapping(2, 3, {(2, 1): 0})
    obj = f.to_json()
    assert obj["table"][7] == 0 and obj["table"][0] is None
    assert NPlaceFunction.from_json(obj) == f
    with pytest.raises(StructuralError):
        NPlaceFunction.from_json({"arity": 1})


@settings(max_examples=200, deadline=None)
@given(same_shape(3))
def test_compose_matches_dictionary_oracle(fs):
    f, g, h = fs
    gs = [g, h][: f.arity] if f.arity == 2 else [g]
    assert compose(f, gs) == naive_compose(f, gs)


@settings(max_examples=200, deadline=None)
@given(same_shape(5))
def test_superassociativity(fs):
    f, g1, g2, h1, h2 = fs
    n = f.arity
    gs, hs = [g1, g2][:n], [h1, h2][:n]
    lhs = compose(compose(f, gs), hs)
    rhs = compose(f, [compose(g, hs) for g in gs])
    assert lhs == rhs


@settings(max_examples=200, deadline=None)
@given(same_shape(2))
def test_meet_and_inclusion(fs):
    f, g = fs
    m = intersect(f, g)
    assert m == intersect(g, f)
    assert is_subfunction(m, f) and is_subfunction(m, g)
    assert intersect(f, f) == f


@settings(max_examples=200, deadline=None)
@given(same_shape(2))
def test_restriction_laws(fs):
    f, g = fs
    for i in range(1, f.arity + 1):
        r = proj_restrict(i, f)
        assert r.domain() == f.domain()
        assert proj_restrict(i, r) == r
        # the restriction acts as identity on its domain: f[R_1 f ... R_n f] = f
    assert compose(f, [proj_restrict(i, f) for i in range(1, f.arity + 1)]) == f


@settings(max_examples=100, deadline=None)
@given(same_shape(2))
def test_sort_key_orders_like_shifted_tables(fs):
    f, g = fs
    a, b = (f.table + 1).tolist(), (g.table + 1).tolist()
    assert (f.sort_key() < g.sort_key()) == (a < b)


def test_compose_tables_broadcasts():
    rng = np.random.default_rng(0)
    F = rng.integers(-1, 3, size=(4, 9))
    G = rng.integers(-1, 3, size=(5, 9))
    out = compose_tables(F[:, None, :], [G[None, :, :], G[None, :, :]], 3, 2)
    assert out.shape == (4, 5, 9)
    for a in range(4):
        for b in range(5):
            want = compose_tables(F[a], [G[b], G[b]], 3, 2)
            assert np.array_equal(out[a, b], want)


@settings(max_examples=200, deadline=None)
@given(same_shape(3))
def test_strictness_domain_inside_inner_domains(fs):
    f, g, h = fs
    gs = [g, h][: f.arity]
    dom = set(compose(f, gs).domain())
    for gi in gs:
        assert dom <= set(gi.domain())


@settings(max_examples=200, deadline=None)
@given(same_shape(3))
def test_intersection_associative(fs):
    f, g, h = fs
    assert intersect(intersect(f, g), h) == intersect(f, intersect(g, h))


@settings(max_examples=100, deadline=None)
@given(same_shape(1))
def test_restriction_absorbs_restriction(fs):
    (f,) = fs
    for i in range(1, f.arity + 1):
        for k in range(1, f.arity + 1):
            assert proj_restrict(i, proj_restrict(k, f)) == proj_restrict(i, f)
