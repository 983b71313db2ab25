import random
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from logchow import _kernels_py, kernels
from logchow.polyhedral import RationalCone

try:
    from logchow import _kernels as compiled
except ImportError:  # pragma: no cover - depends on the build
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def brute_coset(base, cycles, bound):
    out = set()
    for ts in product(range(-bound, bound + 1), repeat=len(cycles)):
        mu = [b + sum(t * z[i] for t, z in zip(ts, cycles)) for i, b in enumerate(base)]
        if all(abs(x) <= bound for x in mu):
            out.add(tuple(mu))
    return sorted(out)


@st.composite
def coset_inputs(draw):
    # shaped like fundamental cycles: cycle j owns edge j, where the base vanishes
    n = draw(st.integers(1, 5))
    ncyc = draw(st.integers(0, min(2, n)))
    base = draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
    cycles = []
    for j in range(ncyc):
        z = draw(st.lists(st.integers(-1, 1), min_size=n, max_size=n))
        for i in range(ncyc):
            z[i] = int(i == j)
        cycles.append(z)
    for i in range(ncyc):
        base[i] = 0
    return base, cycles, draw(st.integers(0, 3))


@st.composite
def form_matrices(draw):
    k = draw(st.integers(1, 4))
    rows = draw(st.integers(0, 3))
    m = [draw(st.lists(st.integers(-3, 3), min_size=k, max_size=k)) for _ in range(rows)]
    return m, k


@given(coset_inputs())
def test_coset_points_python(args):
    assert _kernels_py.coset_points(*args) == brute_coset(*args)


@given(form_matrices())
def test_orthant_rays_python(args):
    m, k = args
    rays = _kernels_py.orthant_rays(m, k)
    eye = [[int(i == j) for j in range(k)] for i in range(k)]
    cone = RationalCone.from_inequalities([r for r in m if any(r)], eye, k)
    assert rays == sorted(cone.rays)
    for r in rays:
        assert all(x >= 0 for x in r)
        assert all(sum(a * x for a, x in zip(row, r)) == 0 for row in m)


def test_twistable_points_python():
    pts = [(1, 0), (1, 1), (2, 1)]
    forms = [[(1, -1)], [(0, 1)]]
    assert _kernels_py.twistable_points(pts, forms) == [True, True, False]
    assert _kernels_py.twistable_points(pts, []) == [False] * 3
    assert _kernels_py.twistable_points(pts, [[]]) == [True] * 3


@needs_compiled
@given(coset_inputs())
def test_coset_points_backends_agree(args):
    assert compiled.coset_points(*args) == _kernels_py.coset_points(*args)


@needs_compiled
@given(form_matrices())
def test_orthant_rays_backends_agree(args):
    assert compiled.orthant_rays(*args) == _kernels_py.orthant_rays(*args)


@needs_compiled
@given(st.integers(0, 2**32))
def test_twistable_points_backends_agree(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 3)
    pts = [tuple(rng.randint(0, 4) for _ in range(k)) for _ in range(10)]
    forms = [
        [tuple(rng.randint(-2, 2) for _ in range(k)) for _ in range(rng.randint(0, 2))]
        for _ in range(rng.randint(0, 4))
    ]
    assert compiled.twistable_points(pts, forms) == _kernels_py.twistable_points(pts, forms)


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "python")
    if compiled is not None:
        assert kernels.BACKEND == "cython"


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("LOGCHOW_THREADS", "4")
    assert kernels.thread_cap() == 4
    monkeypatch.setenv("LOGCHOW_THREADS", "zero")
    assert kernels.thread_cap() == 1
    monkeypatch.delenv("LOGCHOW_THREADS")
    assert kernels.thread_cap() == 1


def test_pure_python_switch():
    import subprocess
    import sys

    code = "import logchow.kernels as k; print(k.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"LOGCHOW_PURE_PYTHON": "1", "PATH": ""},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
