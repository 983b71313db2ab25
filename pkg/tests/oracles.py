"""Independent reference computations used by the tests.

Nothing here calls into the package beyond reading plain attributes of its
objects, so a bug in the library cannot hide behind the same bug here.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from math import gcd


# ---------------------------------------------------------------- integer linear algebra


def det(m):
    """Laplace expansion; fine for the tiny matrices used in tests."""
    n = len(m)
    if n == 0:
        return 1
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * det(minor)
    return total


def determinantal_divisors(m):
    """Nonzero invariant factors from gcds of k x k minors."""
    rows, cols = len(m), len(m[0]) if m else 0
    ds = [1]
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for ri in combinations(range(rows), k):
            for ci in combinations(range(cols), k):
                g = gcd(g, det([[m[i][j] for j in ci] for i in ri]))
        if g == 0:
            break
        ds.append(g)
    return [ds[i] // ds[i - 1] for i in range(1, len(ds))]


def rank_q(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
    return r


# ---------------------------------------------------------------- piecewise polynomials


def exponents(nvars, degree):
    if nvars == 0:
        return [()] if degree == 0 else []
    out = []
    for first in range(degree, -1, -1):
        for rest in exponents(nvars - 1, degree - first):
            out.append((first,) + rest)
    return out


def pp_classes(cones, face_maps, degree):
    """Union-find over (cone, exponent) pairs glued by face maps.

    ``cones`` maps id -> dim; ``face_maps`` is a list of (source, target,
    assignment).  Every compatibility constraint identifies one coefficient
    on the face with one on the bigger cone, so PP^n is free on the classes.
    Returns the classes as sets of (cone, exponent) pairs.
    """
    nodes = [(c, e) for c, n in cones.items() for e in exponents(n, degree)]
    parent = {x: x for x in nodes}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for src, tgt, assign in face_maps:
        for e in exponents(cones[src], degree):
            pushed = [0] * cones[tgt]
            for i, j in enumerate(assign):
                pushed[j] = e[i]
            a, b = find((src, e)), find((tgt, tuple(pushed)))
            if a != b:
                parent[a] = b
    classes = {}
    for x in nodes:
        classes.setdefault(find(x), set()).add(x)
    return list(classes.values())


# ---------------------------------------------------------------- tropical twists


def potentials(vertices, edges, slopes, point):
    """Vertex values of the PL function with the given slopes at an edge-length point.

    ``edges`` holds (source, target, ray).  Returns None when some cycle does
    not close up.
    """
    values = {vertices[0]: 0}
    stack = [vertices[0]]
    while stack:
        v = stack.pop()
        for (s, t, r), mu in zip(edges, slopes):
            step = mu * point[r]
            for a, b, sign in ((s, t, 1), (t, s, -1)):
                if a != v:
                    continue
                want = values[v] + sign * step
                if b in values:
                    if values[b] != want:
                        return None
                else:
                    values[b] = want
                    stack.append(b)
    for (s, t, r), mu in zip(edges, slopes):
        if values[t] - values[s] != mu * point[r]:
            return None
    return values


def balanced_slopes(vertices, edges, degree, bound):
    """All slope vectors in [-bound, bound] whose divisor is minus ``degree``."""
    out = []
    for mu in product(range(-bound, bound + 1), repeat=len(edges)):
        div = {v: 0 for v in vertices}
        for (s, t, _), m in zip(edges, mu):
            div[s] += m
            div[t] -= m
        if all(div[v] == -degree[i] for i, v in enumerate(vertices)):
            out.append(mu)
    return out


def twist_slopes_at(vertices, edges, degree, bound, point, candidates=None):
    cands = balanced_slopes(vertices, edges, degree, bound) if candidates is None else candidates
    return [mu for mu in cands if potentials(vertices, edges, mu, point) is not None]


def lattice_points(k, height):
    return [x for x in product(range(height + 1), repeat=k) if any(x)]


def cone_samples(generators, top=3):
    """Positive integer combinations of the generators (interior and boundary)."""
    k = len(generators[0])
    out = set()
    for coeffs in product(range(top + 1), repeat=len(generators)):
        if any(coeffs):
            out.add(tuple(sum(c * g[i] for c, g in zip(coeffs, generators)) for i in range(k)))
    return sorted(out)


def curve_tuple(curve):
    return [v.id for v in curve.vertices], [(e.source, e.target, e.length_ray) for e in curve.edges]


# ---------------------------------------------------------------- cones


def cone_coordinates(rays, x):
    """Coefficients c with sum c_i rays_i = x for linearly independent rays, else None."""
    k, n = len(rays), len(x)
    if k == 0:
        return () if not any(x) else None
    for rows in combinations(range(n), k):
        m = [[rays[j][i] for j in range(k)] for i in rows]
        d = det(m)
        if d == 0:
            continue
        coeffs = []
        for j in range(k):
            mj = [row[:j] + [x[i]] + row[j + 1:] for row, i in zip(m, rows)]
            coeffs.append(Fraction(det(mj), d))
        if all(sum(c * r[i] for c, r in zip(coeffs, rays)) == x[i] for i in range(n)):
            return tuple(coeffs)
        return None
    return None


def in_relative_interior(rays, x):
    c = cone_coordinates(rays, x)
    return c is not None and all(t > 0 for t in c)


# ---------------------------------------------------------------- toric surfaces


def surface_intersections(rays):
    """Intersection matrix of the toric boundary divisors of a complete smooth
    surface fan whose rays are listed in cyclic order.

    Adjacent divisors meet once; D_i^2 = -a_i where v_{i-1} + v_{i+1} = a_i v_i.
    """
    r = len(rays)
    m = [[0] * r for _ in range(r)]
    for i in range(r):
        prev, nxt, v = rays[i - 1], rays[(i + 1) % r], rays[i]
        s = (prev[0] + nxt[0], prev[1] + nxt[1])
        a = s[0] // v[0] if v[0] else s[1] // v[1]
        assert (a * v[0], a * v[1]) == s
        m[i][i] = -a
        m[i][(i + 1) % r] = m[(i + 1) % r][i] = 1
    return m
