import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from logchow.tropical_curve import (
    CurveError,
    Divisor,
    Edge,
    PLFunction,
    TropicalCurve,
    Vertex,
    contract,
    cycle_graph,
    div_of,
    divisor_of_slopes,
    extend_pl,
    franchetta_divisor,
    pushforward_divisor,
    restrict_pl,
    two_gon,
)

from builders import curve, tropical_curves
from oracles import potentials


def test_two_gon_basics():
    c = two_gon()
    assert c.genus == 1 and c.betti == 1
    assert c.valence(0) == c.valence(1) == 2
    assert c.base_dim == 2
    assert c.fundamental_cycles == ((-1, 1),) or c.fundamental_cycles == ((1, -1),)
    # slopes mu: the cycle closes iff mu_0 l_0 = mu_1 l_1
    (form,) = c.cycle_forms((3, 5))
    assert sorted(map(abs, form)) == [3, 5] and form[0] * form[1] < 0


@given(tropical_curves())
def test_fundamental_cycles_are_cycles(c):
    assert len(c.fundamental_cycles) == c.betti
    for z in c.fundamental_cycles:
        flow = {v: 0 for v in c.vertex_ids}
        for e, x in zip(c.edges, z):
            flow[e.source] -= x
            flow[e.target] += x
        assert not any(flow.values())
        assert z[c.cycle_edges[c.fundamental_cycles.index(z)]] == 1


@given(tropical_curves(), st.integers(0, 2**32))
def test_tree_slopes_realize_any_degree_zero_divisor(c, seed):
    rng = random.Random(seed)
    vals = [rng.randint(-4, 4) for _ in c.vertex_ids[1:]]
    target = dict(zip(c.vertex_ids[1:], vals))
    target[c.vertex_ids[0]] = -sum(vals)
    mu = c.slopes_for_divisor(target)
    assert divisor_of_slopes(c, mu) == Divisor(target)
    assert all(mu[i] == 0 for i in c.cycle_edges)
    with pytest.raises(CurveError):
        c.slopes_for_divisor({c.vertex_ids[0]: 1})


def random_pl(c, rng):
    """Random valid PL values: coordinate i is constant across edges of other lengths."""
    vals = {v: [0] * c.base_dim for v in c.vertex_ids}
    for i in range(c.base_dim):
        parent = {v: v for v in c.vertex_ids}

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for e in c.edges:
            if e.length_ray != i:
                parent[find(e.source)] = find(e.target)
        level = {}
        root = find(c.base_vertex)
        for v in c.vertex_ids:
            r = find(v)
            if r not in level:
                level[r] = 0 if r == root else rng.randint(-4, 4)
            vals[v][i] = level[r]
    return PLFunction(c, {v: tuple(x) for v, x in vals.items()})


@given(tropical_curves(), st.integers(0, 2**32))
def test_pl_from_slopes_matches_potentials(c, seed):
    rng = random.Random(seed)
    alpha = random_pl(c, rng)
    mu = alpha.slopes
    assert PLFunction.from_slopes(c, mu) == alpha
    point = [rng.randint(1, 5) for _ in range(c.base_dim)]
    pots = potentials(list(c.vertex_ids), [(e.source, e.target, e.length_ray) for e in c.edges], mu, point)
    assert pots is not None
    for v, x in alpha.values.items():
        assert sum(a * b for a, b in zip(x, point)) == pots[v]
    assert div_of(alpha) == divisor_of_slopes(c, mu)
    assert div_of(alpha).total == 0


def test_pl_validation():
    c = two_gon()
    with pytest.raises(CurveError, match="base vertex"):
        PLFunction(c, {0: (1, 0), 1: (1, 0)})
    with pytest.raises(CurveError, match="multiple"):
        PLFunction(c, {0: (0, 0), 1: (1, 0)})
    with pytest.raises(CurveError, match="no value"):
        PLFunction(c, {0: (0, 0)})
    with pytest.raises(CurveError, match="unknown vertices"):
        PLFunction(c, {0: (0, 0), 1: (0, 0), 5: (0, 0)})
    with pytest.raises(CurveError, match="cycle consistent"):
        PLFunction.from_slopes(c, (1, 0))
    # equal slopes on both edges close up only on the diagonal, not on the whole cone
    with pytest.raises(CurveError):
        PLFunction.from_slopes(c, (1, 1))


def test_curve_validation():
    with pytest.raises(CurveError, match="connected"):
        curve([0, 0], [])
    with pytest.raises(CurveError, match="unknown"):
        TropicalCurve((Vertex(0),), (Edge(0, 1, 0),))
    with pytest.raises(CurveError, match="markings"):
        curve([0], [], legs=[(0, 1), (0, 1)])
    with pytest.raises(CurveError, match="length"):
        curve([0, 0], [(0, 1, 2)], base_dim=1)


def test_franchetta_divisor():
    # genus-one two-gon, omega has degree 0 on both vertices (valence 2, genus 0)
    c = two_gon()
    assert franchetta_divisor(c, 1, (0, 0)) == Divisor({0: 0, 1: 0})
    assert franchetta_divisor(c, 1, (1, -1)) == Divisor({0: 0, 1: 0})
    # a genus-two curve: vertex of genus 1 joined by one edge to a vertex of genus 1
    g2 = curve([1, 1], [(0, 1, 0)], legs=[(0, 1)])
    d = franchetta_divisor(g2, 1, (2,))
    assert d == Divisor({0: 2 * 1 - 2 + 1 - 2, 1: 2 * 1 - 2 + 1})
    assert d.total == 0
    with pytest.raises(CurveError, match="sum"):
        franchetta_divisor(g2, 1, (0,))


@given(tropical_curves(), st.integers(0, 2**32))
def test_contract_and_div_commute(c, seed):
    rng = random.Random(seed)
    k = c.base_dim
    face = tuple(sorted(rng.sample(range(k), rng.randint(0, k))))
    small, vmap = contract(c, face)
    assert small.genus == c.genus
    alpha = random_pl(c, rng)
    beta = restrict_pl(alpha, face)
    assert div_of(beta) == pushforward_divisor(div_of(alpha), vmap)


def random_inputs(c, rng):
    inputs = {}
    for i in range(c.base_dim):
        if rng.random() < 0.3:
            continue
        small, _ = contract(c, (i,))
        base = small.base_vertex
        inputs[i] = PLFunction(small, {v: (0,) if v == base else (rng.randint(-5, 5),) for v in small.vertex_ids})
    return inputs


@given(tropical_curves(), st.integers(0, 2**32))
def test_extend_pl_restricts_to_inputs(c, seed):
    rng = random.Random(seed)
    inputs = random_inputs(c, rng)
    alpha = extend_pl(c, inputs)
    for i, beta in inputs.items():
        assert restrict_pl(alpha, (i,)) == beta
    for i in set(range(c.base_dim)) - set(inputs):
        assert all(x[i] == 0 for x in alpha.values.values())


def test_extend_pl_rejects_wrong_curve():
    c = curve([0, 0, 0], [(0, 1, 0), (1, 2, 1)])
    with pytest.raises(CurveError):
        extend_pl(c, {0: PLFunction.zero(c)})
    with pytest.raises(CurveError, match="not a ray"):
        extend_pl(c, {7: PLFunction.zero(c)})


def test_extend_pl_chain():
    # chain 0 -l0- 1 -l1- 2; over ray 0 the vertices 1 and 2 merge
    c = curve([0, 0, 0], [(0, 1, 0), (1, 2, 1)])
    s0, m0 = contract(c, (0,))
    s1, m1 = contract(c, (1,))
    a0 = PLFunction(s0, {0: (0,), m0[1]: (3,)})
    a1 = PLFunction(s1, {0: (0,), m1[2]: (-2,)})
    alpha = extend_pl(c, {0: a0, 1: a1})
    assert alpha.values == {0: (0, 0), 1: (3, 0), 2: (3, -2)}
    assert alpha.slopes == (3, -2)
    assert div_of(alpha) == Divisor({0: 3, 1: -3 - 2, 2: 2})


@given(tropical_curves())
def test_curve_json_round_trip(c):
    text = c.to_json()
    back = TropicalCurve.from_json(text)
    assert back == c and back.to_json() == text


def test_cycle_graph():
    c = cycle_graph(3)
    assert c.genus == 1 and c.base_dim == 3
    assert len(c.fundamental_cycles) == 1
