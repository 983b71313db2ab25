from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from logchow.exact_algebra import (
    DimensionError,
    Polynomial,
    determinant,
    elementary_divisors,
    express_in_lattice_basis,
    hermite_rows,
    integer_kernel,
    inverse_rational,
    mat_mul,
    mat_vec,
    primitive,
    rank,
    rational_kernel,
    smith_normal_form,
    solve_rational,
    substitute_linear,
)

from oracles import det, determinantal_divisors, rank_q

small = st.integers(-6, 6)


def matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def square(n_max=4):
    return st.integers(1, n_max).flatmap(
        lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)
    )


def test_snf_known():
    # diag(2, 6) hidden by a unimodular change of basis
    m = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    assert elementary_divisors(m) == [2, 6, 12]
    assert elementary_divisors([[0, 0], [0, 0]]) == [0, 0]
    assert elementary_divisors([[1], [1]]) == [1]


@given(matrices())
def test_snf_is_a_factorization(m):
    u, d, v = smith_normal_form(m)
    assert [list(r) for r in mat_mul(mat_mul(u, m), v)] == [list(r) for r in d]
    assert abs(det(u)) == 1 and abs(det(v)) == 1
    diag = [d[i][i] for i in range(min(len(d), len(d[0])))]
    assert all(d[i][j] == 0 for i in range(len(d)) for j in range(len(d[0])) if i != j)
    nz = [x for x in diag if x]
    assert all(x > 0 for x in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert nz == determinantal_divisors(m)


@given(matrices())
def test_rank_matches_oracle(m):
    assert rank(m) == rank_q(m)


@given(square())
def test_determinant_matches_laplace(m):
    assert determinant(m) == det(m)


@given(square(3))
def test_inverse(m):
    if det(m) == 0:
        with pytest.raises(ZeroDivisionError):
            inverse_rational(m)
        return
    inv = inverse_rational(m)
    prod = mat_mul(m, inv)
    assert all(prod[i][j] == (1 if i == j else 0) for i in range(len(m)) for j in range(len(m)))


@given(matrices())
def test_kernels(m):
    ncols = len(m[0])
    qk = rational_kernel(m)
    zk = integer_kernel(m)
    assert len(qk) == len(zk) == ncols - rank_q(m)
    for v in zk:
        assert all(x == 0 for x in mat_vec(m, v))
    # saturation: the HNF basis spans every integer kernel vector integrally
    for v in qk:
        coords = express_in_lattice_basis(zk, primitive(v))
        assert coords is not None and all(c.denominator == 1 for c in coords)
    assert hermite_rows(zk) == list(zk)


@given(matrices(3, 3), st.lists(small, min_size=3, max_size=3))
def test_solve(m, x):
    x = x[: len(m[0])]
    b = mat_vec(m, x)
    y = solve_rational(m, b)
    assert y is not None and list(mat_vec(m, y)) == list(b)


def test_solve_inconsistent():
    assert solve_rational([[1, 1], [2, 2]], [1, 3]) is None


def test_hermite_is_canonical():
    a = hermite_rows([[2, 4], [0, 3]])
    b = hermite_rows([[2, 7], [2, 4]])
    assert a == b


def test_polynomial_arithmetic():
    xs = ("a", "b")
    a, b = Polynomial.var(xs, 0), Polynomial.var(xs, 1)
    p = (a + b) ** 2
    assert p == a * a + b * b + a * b * 2
    assert p.is_homogeneous(2)
    assert p.evaluate([1, Fraction(1, 2)]) == Fraction(9, 4)
    assert (p - p).is_zero()


def test_substitute_linear():
    # (x, y) -> (t, t): x*y becomes t^2
    xs = ("x", "y")
    p = Polynomial.var(xs, 0) * Polynomial.var(xs, 1)
    q = substitute_linear(p, [[1], [1]], ("t",))
    assert q == Polynomial.var(("t",), 0) ** 2
    with pytest.raises(DimensionError):
        substitute_linear(p, [[1]], ("t",))


@given(st.lists(small, min_size=2, max_size=2), st.lists(small, min_size=2, max_size=2))
def test_substitution_is_a_ring_map(u, v):
    xs = ("x", "y")
    x, y = Polynomial.var(xs, 0), Polynomial.var(xs, 1)
    m = [u, v]
    f, g = x + y * 3, x * x - y
    lhs = substitute_linear(f * g, m, ("s", "t"))
    rhs = substitute_linear(f, m, ("s", "t")) * substitute_linear(g, m, ("s", "t"))
    assert lhs == rhs
