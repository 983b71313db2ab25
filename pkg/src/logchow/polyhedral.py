"""Exact geometry of pointed rational polyhedral cones.

Cones live in ``Q^n`` and are stored by their primitive extreme rays together
with an exact H-description (equations of the linear span and facet normals
taken inside the span). All routines are brute force over small subsets,
which is adequate for the low dimensions this package works in.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .exact_algebra import (
    LatticeVector,
    determinant,
    inverse_rational,
    normalize_sign,
    primitive,
    rank,
    rational_kernel,
    rref,
    solve_rational,
)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _span_equations(vectors: Sequence[Sequence[int]], n: int) -> tuple[LatticeVector, ...]:
    """Canonical (reduced echelon, primitive) equations cutting out span(vectors)."""
    if not vectors:
        return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    comp = rational_kernel(vectors, n)
    if not comp:
        return ()
    red, _ = rref(comp, n)
    return tuple(normalize_sign(primitive(r)) for r in red)


def rays_of_inequality_cone(
    equations: Sequence[Sequence], inequalities: Sequence[Sequence], n: int
) -> list[LatticeVector]:
    """Primitive extreme rays of the pointed cone ``{x : E x = 0, F x >= 0}``."""
    eqs = [tuple(e) for e in equations if any(e)]
    if eqs:
        basis = rational_kernel(eqs, n)
    else:
        basis = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    m = len(basis)
    if m == 0:
        return []
    # inequalities pulled back to coordinates on the solution space
    ineq = []
    for f in inequalities:
        row = tuple(dot(f, b) for b in basis)
        if any(row):
            ineq.append(row)
    ineq = sorted(set(ineq))

    def lift(y):
        return primitive([sum(y[j] * basis[j][i] for j in range(m)) for i in range(n)])

    if m == 1:
        found = []
        for y in ((1,), (-1,)):
            if all(dot(r, y) >= 0 for r in ineq):
                found.append(lift(y))
        if len(found) == 2:
            raise ValueError("cone is not pointed")
        return sorted(found)
    rays = set()
    for sub in combinations(ineq, m - 1):
        if rank(sub) != m - 1:
            continue
        ker = rational_kernel(sub, m)
        if len(ker) != 1:
            continue
        y = ker[0]
        for sgn in (1, -1):
            yy = [sgn * c for c in y]
            if all(dot(r, yy) >= 0 for r in ineq):
                rays.add(lift(yy))
    if not ineq and m > 0:
        raise ValueError("cone is not pointed")
    return sorted(rays)


class RationalCone:
    """Pointed rational polyhedral cone given by generators in ``Q^n``."""

    def __init__(self, generators: Iterable[Sequence], ambient: int):
        self.ambient = int(ambient)
        gens = {primitive(g) for g in generators}
        gens.discard(tuple([0] * self.ambient))
        for g in gens:
            if len(g) != self.ambient:
                raise ValueError(f"generator {g} not in ambient dimension {self.ambient}")
        self._gens = sorted(gens)

    @classmethod
    def from_inequalities(cls, equations, inequalities, ambient: int) -> "RationalCone":
        return cls(rays_of_inequality_cone(equations, inequalities, ambient), ambient)

    @cached_property
    def dim(self) -> int:
        return rank(self._gens) if self._gens else 0

    @cached_property
    def equations(self) -> tuple[LatticeVector, ...]:
        return _span_equations(self._gens, self.ambient)

    @cached_property
    def _span_basis(self) -> list[LatticeVector]:
        if not self._gens:
            return []
        # independent subset of generators, chosen greedily in sorted order
        chosen: list[LatticeVector] = []
        for g in self._gens:
            if rank(chosen + [g]) > len(chosen):
                chosen.append(g)
        return chosen

    @cached_property
    def facets(self) -> tuple[LatticeVector, ...]:
        """Inward facet normals, each a primitive integer vector in the span."""
        d = self.dim
        if d == 0:
            return ()
        basis = self._span_basis
        normals = set()
        for sub in combinations(self._gens, d - 1):
            if d > 1 and rank(sub) != d - 1:
                continue
            mat = [[dot(s, b) for b in basis] for s in sub]
            ker = rational_kernel(mat, d) if mat else [(1,)]
            if len(ker) != 1:
                continue
            c = ker[0]
            nvec = primitive([sum(c[j] * basis[j][i] for j in range(d)) for i in range(self.ambient)])
            vals = [dot(nvec, g) for g in self._gens]
            if all(v >= 0 for v in vals):
                normals.add(nvec)
            elif all(v <= 0 for v in vals):
                normals.add(tuple(-x for x in nvec))
        return tuple(sorted(normals))

    @cached_property
    def rays(self) -> tuple[LatticeVector, ...]:
        """Primitive extreme rays, sorted."""
        d = self.dim
        if d <= 1:
            return tuple(self._gens[:1]) if d == 1 else ()
        out = []
        for g in self._gens:
            tight = [f for f in self.facets if dot(f, g) == 0]
            on_same = [h for h in self._gens if all(dot(f, h) == 0 for f in tight)]
            if rank(on_same) == 1:
                out.append(g)
        return tuple(sorted(out))

    def key(self) -> tuple:
        return self.rays

    def __eq__(self, other):
        return isinstance(other, RationalCone) and self.ambient == other.ambient and self.rays == other.rays

    def __hash__(self):
        return hash((self.ambient, self.rays))

    def __repr__(self):
        return f"RationalCone({list(self.rays)})"

    def is_simplicial(self) -> bool:
        return len(self.rays) == self.dim

    def contains(self, x: Sequence) -> bool:
        if len(x) != self.ambient:
            raise ValueError("dimension mismatch")
        if self.dim == 0:
            return not any(x)
        return all(dot(e, x) == 0 for e in self.equations) and all(dot(f, x) >= 0 for f in self.facets)

    def contains_cone(self, other: "RationalCone") -> bool:
        return all(self.contains(r) for r in other.rays)

    def relint_contains(self, x: Sequence) -> bool:
        if self.dim == 0:
            return not any(x)
        return all(dot(e, x) == 0 for e in self.equations) and all(dot(f, x) > 0 for f in self.facets)

    def intersection(self, other: "RationalCone") -> "RationalCone":
        if other.ambient != self.ambient:
            raise ValueError("ambient mismatch")
        if self.dim == 0 or other.dim == 0:
            return RationalCone([], self.ambient)
        eqs = list(self.equations) + list(other.equations)
        ineqs = list(self.facets) + list(other.facets)
        return RationalCone(rays_of_inequality_cone(eqs, ineqs, self.ambient), self.ambient)

    def face_rays(self, normal: Sequence) -> tuple[LatticeVector, ...]:
        return tuple(r for r in self.rays if dot(normal, r) == 0)

    def facet_cones(self) -> list["RationalCone"]:
        return [RationalCone(self.face_rays(f), self.ambient) for f in self.facets]

    def faces(self) -> list["RationalCone"]:
        """All faces including the zero face and the cone itself."""
        seen = {self}
        frontier = [self]
        while frontier:
            nxt = []
            for c in frontier:
                for f in c.facet_cones():
                    if f not in seen:
                        seen.add(f)
                        nxt.append(f)
            frontier = nxt
        return sorted(seen, key=lambda c: (c.dim, c.rays))

    def split(self, h: Sequence) -> tuple["RationalCone", "RationalCone"]:
        """Intersections with the closed half-spaces ``h >= 0`` and ``h <= 0``."""
        pos = [r for r in self.rays if dot(h, r) > 0]
        neg = [r for r in self.rays if dot(h, r) < 0]
        zero = [r for r in self.rays if dot(h, r) == 0]
        cut = []
        for p in pos:
            for q in neg:
                hp, hq = dot(h, p), dot(h, q)
                cut.append(primitive([hp * b - hq * a for a, b in zip(p, q)]))
        return RationalCone(pos + zero + cut, self.ambient), RationalCone(neg + zero + cut, self.ambient)

    def interior_point(self) -> LatticeVector:
        return primitive([sum(r[i] for r in self.rays) for i in range(self.ambient)]) if self.rays else tuple([0] * self.ambient)


def simplex_coordinates(gens: Sequence[Sequence[int]], x: Sequence) -> tuple[Fraction, ...] | None:
    """Coefficients of ``x`` in the independent generators ``gens``, or None."""
    if not gens:
        return () if not any(x) else None
    cols = [list(col) for col in zip(*gens)]
    return solve_rational(cols, x) if _in_span(gens, x) else None


def _in_span(gens, x) -> bool:
    return rank(list(gens) + [list(x)]) == rank(gens)


def lattice_multiplicity(gens: Sequence[Sequence[int]]) -> int:
    """Index of the lattice spanned by ``gens`` inside its saturation.

    Equals 1 exactly when the simplicial cone on ``gens`` is smooth.
    """
    gens = [list(g) for g in gens]
    if not gens:
        return 1
    k = len(gens)
    if rank(gens) != k:
        raise ValueError("generators are dependent")
    # gcd of maximal minors
    from math import gcd

    n = len(gens[0])
    g = 0
    for cols in combinations(range(n), k):
        minor = determinant([[row[c] for c in cols] for row in gens])
        g = gcd(g, int(minor))
    return abs(g)


def is_smooth_simplex(gens: Sequence[Sequence[int]]) -> bool:
    return lattice_multiplicity(gens) == 1


def parallelepiped_point(gens: Sequence[Sequence[int]]) -> LatticeVector | None:
    """Lexicographically smallest nonzero lattice point of the half-open
    parallelepiped on ``gens`` (None when the simplex is smooth)."""
    gens = [tuple(g) for g in gens]
    if is_smooth_simplex(gens):
        return None
    n, k = len(gens[0]), len(gens)
    # solve through one invertible k x k block of coordinates
    rows = next(
        c for c in combinations(range(n), k) if determinant([[g[i] for g in gens] for i in c]) != 0
    )
    inv = inverse_rational([[g[i] for g in gens] for i in rows])
    lo = [sum(min(0, g[i]) for g in gens) for i in range(n)]
    hi = [sum(max(0, g[i]) for g in gens) for i in range(n)]

    def coords(x):
        lam = [sum(a * x[i] for a, i in zip(row, rows)) for row in inv]
        if not all(0 <= c < 1 for c in lam):
            return False
        return all(sum(c * g[i] for c, g in zip(lam, gens)) == x[i] for i in range(n))

    def rec(i, cur):
        if i == n:
            return tuple(cur) if any(cur) and coords(cur) else None
        for v in range(lo[i], hi[i] + 1):
            cur.append(v)
            found = rec(i + 1, cur)
            cur.pop()
            if found is not None:
                return found
        return None

    return rec(0, [])


def simplices_form_fan(simplices: Sequence[Sequence[Sequence[int]]], ambient: int) -> tuple[bool, str]:
    """Check a family of simplicial cones meets pairwise in common faces."""
    cones = [RationalCone(s, ambient) for s in simplices]
    for c, s in zip(cones, simplices):
        if len(c.rays) != len(s) or c.dim != len(s):
            return False, f"cone {list(s)} is not simplicial on its generators"
    for i in range(len(cones)):
        for j in range(i + 1, len(cones)):
            common = set(cones[i].rays) & set(cones[j].rays)
            inter = cones[i].intersection(cones[j])
            if inter != RationalCone(common, ambient):
                return False, f"cones {list(cones[i].rays)} and {list(cones[j].rays)} overlap improperly"
    return True, ""


def pulling_triangulation(
    cone: RationalCone,
    fixed: Callable[[RationalCone], list[tuple[LatticeVector, ...]] | None] | None = None,
    order: Callable[[LatticeVector], object] | None = None,
) -> list[tuple[LatticeVector, ...]]:
    """Triangulate ``cone`` without new rays by pulling its smallest ray.

    ``fixed`` may return a prescribed triangulation for a face (used to
    match triangulations already chosen on boundary faces); faces for which
    it returns None are triangulated recursively. With a fixed ray order the
    result restricts to the same triangulation on every shared face.
    """
    order = order or (lambda r: r)
    memo: dict[RationalCone, list[tuple[LatticeVector, ...]]] = {}

    def tri(c: RationalCone) -> list[tuple[LatticeVector, ...]]:
        if c in memo:
            return memo[c]
        pre = fixed(c) if fixed is not None else None
        if pre is not None:
            out = [tuple(sorted(s)) for s in pre]
        elif c.is_simplicial():
            out = [tuple(c.rays)]
        else:
            v = min(c.rays, key=order)
            out = []
            for f in c.facet_cones():
                if v in f.rays:
                    continue
                for s in tri(f):
                    out.append(tuple(sorted(s + (v,))))
        memo[c] = sorted(set(out))
        return memo[c]

    return tri(cone)
