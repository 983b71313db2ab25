"""Pure-Python versions of the enumeration kernels."""

from __future__ import annotations

from itertools import combinations, product
from math import gcd
from typing import Sequence


def coset_points(base: Sequence[int], cycles: Sequence[Sequence[int]], bound: int) -> list[tuple[int, ...]]:
    """All ``base + sum t_i cycles[i]`` with every entry bounded by ``bound`` in absolute value.

    Each cycle is assumed to have entry 1 on its own non-tree edge where
    ``base`` is 0, so ``|t_i| <= bound`` is forced.
    """
    n = len(base)
    out = []
    for ts in product(range(-bound, bound + 1), repeat=len(cycles)):
        mu = list(base)
        for t, z in zip(ts, cycles):
            if t:
                for i in range(n):
                    mu[i] += t * z[i]
        if all(-bound <= x <= bound for x in mu):
            out.append(tuple(mu))
    out.sort()
    return out


def _rank_and_rows(rows: list[list[int]]) -> tuple[int, list[int]]:
    """Rank over Q and indices of a maximal independent set of rows."""
    basis: list[list[int]] = []
    pivots: list[int] = []
    chosen = []
    for idx, row in enumerate(rows):
        r = list(row)
        for b, p in zip(basis, pivots):
            if r[p]:
                f, g = b[p], r[p]
                r = [g * x - f * y for x, y in zip(b, r)]
        nz = next((j for j, x in enumerate(r) if x), None)
        if nz is not None:
            basis.append(r)
            pivots.append(nz)
            chosen.append(idx)
    return len(basis), chosen


def _det(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    a = [list(r) for r in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def orthant_rays(matrix: Sequence[Sequence[int]], k: int) -> list[tuple[int, ...]]:
    """Extreme rays of ``{x >= 0 : matrix x = 0}`` as sorted primitive vectors."""
    rows = [list(r) for r in matrix if any(r)]
    out = []
    for size in range(1, k + 1):
        for cols in combinations(range(k), size):
            sub = [[r[c] for c in cols] for r in rows]
            rk, chosen = _rank_and_rows(sub)
            if rk != size - 1:
                continue
            m = [sub[i] for i in chosen]
            vec = []
            for j in range(size):
                minor = [[r[c] for c in range(size) if c != j] for r in m]
                vec.append((-1) ** j * _det(minor))
            if any(x == 0 for x in vec):
                continue
            if all(x < 0 for x in vec):
                vec = [-x for x in vec]
            elif not all(x > 0 for x in vec):
                continue
            g = 0
            for x in vec:
                g = gcd(g, x)
            full = [0] * k
            for c, x in zip(cols, vec):
                full[c] = x // g
            out.append(tuple(full))
    out.sort()
    return out


def twistable_points(points: Sequence[Sequence[int]], forms: Sequence[Sequence[Sequence[int]]]) -> list[bool]:
    """For each point, whether some family of forms vanishes on it entirely."""
    out = []
    for p in points:
        hit = False
        for family in forms:
            if all(sum(a * x for a, x in zip(row, p)) == 0 for row in family):
                hit = True
                break
        out.append(hit)
    return out
