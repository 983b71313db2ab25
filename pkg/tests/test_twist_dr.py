import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from logchow.cone_complex import orthant
from logchow.subdivision import Subdivision, stellar
from logchow.tropical_curve import Divisor, PLFunction, cycle_graph, two_gon
from logchow.twist_dr import (
    DiscontinuityError,
    ExtFan,
    SimplicialCone,
    TwistError,
    TwistProblem,
    certified_bound,
    default_bound,
    eta_correction,
    eta_refinement_stable,
    ext_fan,
    find_twist,
    gl_invariance_check,
    gl_invariance_report,
    is_almost_twistable,
    is_twist_on,
    tuple_ext_fan,
    twistable_at,
)

from builders import curve, random_curve
from oracles import balanced_slopes, cone_samples, curve_tuple, lattice_points, potentials, twist_slopes_at


def oracle_check(c, d, bound, height):
    """Compare an Ext fan against exhaustive slope enumeration and point sampling."""
    fan = ext_fan(TwistProblem(c, (d,), bound), height=height)
    verts, edges = curve_tuple(c)
    cands = balanced_slopes(verts, edges, d, bound)
    for x in lattice_points(c.base_dim, height):
        oracle = bool(twist_slopes_at(verts, edges, d, bound, x, cands))
        assert fan.contains_point(x) == oracle, (x, oracle)
    for cone in fan.maximal_cones:
        if not cone.generators:
            continue
        samples = cone_samples(cone.generators)
        valid = [mu for mu in cands if all(potentials(verts, edges, mu, x) is not None for x in samples)]
        assert valid, cone
        assert cone.certificate == (min(valid),)
    return fan


def test_two_gon_ext_fan():
    c = two_gon()
    fan = oracle_check(c, (2, -2), 4, 10)
    assert [g.generators for g in fan.maximal_cones] == [((0, 1),), ((1, 0),), ((1, 1),)]
    certs = {g.generators[0]: g.certificate[0] for g in fan.maximal_cones}
    assert certs == {(1, 0): (0, -2), (0, 1): (-2, 0), (1, 1): (-1, -1)}
    assert fan.complete


def test_zero_divisor_is_twistable_everywhere():
    fan = ext_fan(TwistProblem(two_gon(), ((0, 0),), 4))
    (cone,) = fan.maximal_cones
    assert sorted(cone.generators) == [(0, 1), (1, 0)]
    assert cone.certificate == ((0, 0),)


@given(st.integers(0, 2**32))
def test_random_curves_against_oracle(seed):
    rng = random.Random(seed)
    c = random_curve(rng, max_vertices=3, max_edges=3, max_dim=2)
    vals = [rng.randint(-2, 2) for _ in c.vertex_ids[1:]]
    d = tuple([-sum(vals)] + vals)
    oracle_check(c, d, 3, 4)


def test_three_cycle_against_oracle():
    c = cycle_graph(3)
    for d in [(1, -1, 0), (2, 0, -2), (1, 1, -2)]:
        oracle_check(c, d, 3, 3)


def test_find_twist():
    p = TwistProblem(two_gon(), ((2, -2),), 4)
    assert find_twist(p) is None
    assert find_twist(p, [(1, 1)]).slopes == (-1, -1)
    assert find_twist(p, [(3, 0)]).slopes == (0, -2)
    with pytest.raises(TwistError):
        find_twist(p, [(-1, 0)])


def test_problem_validation():
    with pytest.raises(TwistError, match="total degree"):
        TwistProblem(two_gon(), ((1, 0),))
    with pytest.raises(TwistError, match="nonnegative"):
        TwistProblem(two_gon(), ((0, 0),), -1)


def test_bounds_and_completeness():
    c = two_gon()
    d = Divisor.of(c, (2, -2))
    assert default_bound(c, d) == 8
    assert certified_bound(c, d) == 4
    assert TwistProblem(c, (d,), 4).is_complete()
    assert not TwistProblem(c, (d,), 3).is_complete()
    tree = curve([0, 0, 0], [(0, 1, 0), (1, 2, 1)])
    assert certified_bound(tree, Divisor.of(tree, (1, 0, -1))) == 1
    theta = curve([0, 0], [(0, 1, 0), (0, 1, 1), (0, 1, 2)])
    assert certified_bound(theta, Divisor.of(theta, (1, -1))) is None
    assert not TwistProblem(theta, ((1, -1),)).is_complete()
    assert TwistProblem(theta, ((1, -1),), certified=True).is_complete()


def test_is_twist_on():
    c = two_gon()
    d = Divisor.of(c, (2, -2))
    assert is_twist_on(c, d, (-1, -1), [(1, 1), (2, 2)])
    assert not is_twist_on(c, d, (-1, -1), [(1, 0)])
    assert not is_twist_on(c, d, (1, 1), [(1, 1)])


def test_twistable_at_matches_fan():
    c = two_gon()
    pts = lattice_points(2, 5)
    fan = ext_fan(TwistProblem(c, ((2, -2),), 4))
    assert twistable_at(c, ((2, -2),), 4, pts) == [fan.contains_point(x) for x in pts]


def test_tuple_fan():
    c = two_gon()
    fan = tuple_ext_fan(c, [(2, -2), (1, -1)], 4)
    gens = sorted(g.generators for g in fan.maximal_cones)
    # (1,-1) twists only on the axes: mu_0 + mu_1 = -1 with mu_0 l_0 = mu_1 l_1
    assert gens == [((0, 1),), ((1, 0),)]
    for g in fan.maximal_cones:
        mus = g.certificate
        assert len(mus) == 2
        for mu, d in zip(mus, [(2, -2), (1, -1)]):
            assert is_twist_on(c, Divisor.of(c, d), mu, g.generators)


def test_eta_on_two_gon():
    c = two_gon()
    fan = ext_fan(TwistProblem(c, ((2, -2),), 4))
    eta = eta_correction(c, fan)
    # -sum mu_e^2 l_e with mu = (-1, -1) on the diagonal
    assert eta.value_at((1, 1)) == -2
    assert eta.value_at((5, 5)) == -10
    # on the l_0 axis mu = (0, -2) and l_1 = 0
    assert eta.value_at((3, 0)) == 0
    assert eta_refinement_stable(c, fan)
    with pytest.raises(TwistError):
        eta.value_at((1, 2))


def test_eta_discontinuity_detected():
    c = two_gon()
    fan = ext_fan(TwistProblem(c, ((2, -2),), 4))
    bad = ExtFan(c, fan.divisors, fan.bounds, fan.pieces, fan.complete)
    # seed the cached cones with two cells through one ray carrying different twists
    bad.__dict__["maximal_cones"] = (
        SimplicialCone(((1, 1),), ((-1, -1),)),
        SimplicialCone(((1, 1), (2, 1)), ((0, -2),)),
    )
    with pytest.raises(DiscontinuityError):
        eta_correction(c, bad)


def test_gl_invariance():
    c = two_gon()
    assert gl_invariance_check(c, [(2, -2), (1, -1)], [[1, 1], [0, 1]], 4)
    rep = gl_invariance_report(c, [(2, -2), (1, -1)], [[0, 1], [1, 0]], 4)
    assert rep["ok"] and rep["transformed_divisors"] == [[1, -1], [2, -2]]
    with pytest.raises(TwistError, match="unimodular"):
        gl_invariance_check(c, [(2, -2), (1, -1)], [[2, 0], [0, 1]], 4)
    with pytest.raises(TwistError, match="2x2"):
        gl_invariance_check(c, [(2, -2), (1, -1)], [[1]], 4)


def test_almost_twistable():
    c = two_gon()
    p = TwistProblem(c, ((2, -2),), 4)
    sub = stellar(orthant(2), "D1+D2", (1, 1))
    # U = the three twistable rays with their twists
    U = ["0", "D1", "D2", "D1+D2[1,1]"]
    alpha = {"0": (0, -2), "D1": (0, -2), "D2": (-2, 0), "D1+D2[1,1]": (-1, -1)}
    rep = is_almost_twistable(p, sub, U, alpha, 6)
    assert rep.ok, rep
    assert rep.non_liftable  # interior points off the diagonal
    # leaving an axis out of U exposes twistable points outside
    rep = is_almost_twistable(p, sub, ["0", "D1+D2[1,1]"], alpha, 4)
    assert not rep.ok and (1, 0) in rep.twistable_outside
    # a wrong twist on a cone of U
    rep = is_almost_twistable(p, sub, U, dict(alpha, D1=(-2, 0)), 4)
    assert rep.failing_cones == ("D1",)
    with pytest.raises(TwistError, match="subfan"):
        is_almost_twistable(p, sub, ["D1+D2[1,1]"], alpha, 4)


def test_almost_twistable_zero_divisor():
    c = two_gon()
    p = TwistProblem(c, ((0, 0),), 2)
    sub = Subdivision.identity(orthant(2))
    U = [x.id for x in sub.refined.cones]
    rep = is_almost_twistable(p, sub, U, PLFunction.zero(c), 5)
    assert rep.ok and not rep.twistable_outside
