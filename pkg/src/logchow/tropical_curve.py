"""Tropical curves over a smooth base cone and piecewise linear functions on them.

Every edge has length equal to one coordinate of the base cone.  Edges are
oriented ``source -> target``; a slope ``s`` on an edge means the function
increases by ``s`` times the edge length from source to target, so ``s`` is
the outgoing slope at the source and ``-s`` the outgoing slope at the target.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

from . import jsonio


class CurveError(ValueError):
    """Raised on malformed curves, divisors or PL functions."""


@dataclass(frozen=True)
class Vertex:
    id: int
    genus: int = 0


@dataclass(frozen=True)
class Leg:
    vertex: int
    marking: int


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    length_ray: int

    @property
    def is_loop(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True)
class TropicalCurve:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = ()
    legs: tuple[Leg, ...] = ()
    base_dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "legs", tuple(self.legs))
        if self.base_dim is None:
            object.__setattr__(self, "base_dim", self.inferred_base_dim)
        self._validate()

    @property
    def inferred_base_dim(self) -> int:
        return max((e.length_ray for e in self.edges), default=-1) + 1

    def _validate(self) -> None:
        ids = [v.id for v in self.vertices]
        if not ids:
            raise CurveError("a curve needs a vertex")
        if len(set(ids)) != len(ids):
            raise CurveError("duplicate vertex ids")
        if any(v.genus < 0 for v in self.vertices):
            raise CurveError("negative vertex genus")
        known = set(ids)
        for e in self.edges:
            if e.source not in known or e.target not in known:
                raise CurveError(f"edge {e} names an unknown vertex")
            if not 0 <= e.length_ray < self.base_dim:
                raise CurveError(f"edge {e} has length outside the base coordinates")
        for leg in self.legs:
            if leg.vertex not in known:
                raise CurveError(f"leg {leg} names an unknown vertex")
        marks = [leg.marking for leg in self.legs]
        if len(set(marks)) != len(marks):
            raise CurveError("duplicate markings")
        if len(self._tree[0]) != len(self.vertices):
            raise CurveError("curve is not connected")

    # -------------------------------------------------------------- combinatorics

    @cached_property
    def vertex_ids(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.vertices)

    @property
    def base_vertex(self) -> int:
        return min(self.vertex_ids)

    @cached_property
    def genus(self) -> int:
        return self.betti + sum(v.genus for v in self.vertices)

    @property
    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def valence(self, v: int) -> int:
        """Number of edge ends at ``v`` (loops count twice)."""
        return sum((e.source == v) + (e.target == v) for e in self.edges)

    def legs_at(self, v: int) -> list[Leg]:
        return [leg for leg in self.legs if leg.vertex == v]

    @cached_property
    def _tree(self) -> tuple[dict[int, tuple[int, int] | None], list[int]]:
        """BFS tree from the base vertex: parent edge index and direction, and the visit order."""
        adj: dict[int, list[tuple[int, int, int]]] = {v: [] for v in self.vertex_ids}
        for i, e in enumerate(self.edges):
            if e.is_loop:
                continue
            adj[e.source].append((i, e.target, 1))
            adj[e.target].append((i, e.source, -1))
        root = min(self.vertex_ids)
        parent: dict[int, tuple[int, int] | None] = {root: None}
        order = [root]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for i, w, sign in adj[u]:
                if w not in parent:
                    parent[w] = (i, sign)
                    order.append(w)
                    queue.append(w)
        return parent, order

    @cached_property
    def tree_edges(self) -> tuple[int, ...]:
        parent, _ = self._tree
        return tuple(sorted(p[0] for p in parent.values() if p is not None))

    @cached_property
    def cycle_edges(self) -> tuple[int, ...]:
        tree = set(self.tree_edges)
        return tuple(i for i in range(len(self.edges)) if i not in tree)

    def _path_to_root(self, v: int) -> dict[int, int]:
        """Signed edge multiset of the tree path from ``v`` to the root."""
        parent, _ = self._tree
        out: dict[int, int] = {}
        while parent[v] is not None:
            i, sign = parent[v]
            e = self.edges[i]
            # walking from v towards its parent
            out[i] = out.get(i, 0) + (1 if e.source == v else -1)
            v = e.source if e.target == v else e.target
        return out

    @cached_property
    def fundamental_cycles(self) -> tuple[tuple[int, ...], ...]:
        """Signed edge vectors: each non-tree edge forward, then back through the tree."""
        out = []
        for f in self.cycle_edges:
            e = self.edges[f]
            z = [0] * len(self.edges)
            z[f] = 1
            for i, c in self._path_to_root(e.target).items():
                z[i] += c
            for i, c in self._path_to_root(e.source).items():
                z[i] -= c
            out.append(tuple(z))
        return tuple(out)

    def cycle_forms(self, slopes: Sequence[int]) -> tuple[tuple[int, ...], ...]:
        """Linear forms on the base whose vanishing is cycle consistency."""
        out = []
        for z in self.fundamental_cycles:
            form = [0] * self.base_dim
            for i, c in enumerate(z):
                if c:
                    form[self.edges[i].length_ray] += c * slopes[i]
            out.append(tuple(form))
        return tuple(out)

    def slopes_for_divisor(self, target: Mapping[int, int]) -> tuple[int, ...]:
        """Slopes supported on the spanning tree whose divisor is ``target``."""
        if sum(target.get(v, 0) for v in self.vertex_ids) != 0:
            raise CurveError("target divisor must have total degree 0")
        parent, order = self._tree
        mu = [0] * len(self.edges)
        acc = {v: 0 for v in self.vertex_ids}
        for v in reversed(order):
            if parent[v] is None:
                continue
            i, _ = parent[v]
            e = self.edges[i]
            need = target.get(v, 0) - acc[v]
            if e.source == v:
                mu[i] = need
                other = e.target
            else:
                mu[i] = -need
                other = e.source
            acc[other] -= need
        return tuple(mu)

    # -------------------------------------------------------------- json

    def to_dict(self) -> dict:
        d = {
            "vertices": [{"id": v.id, "genus": v.genus} for v in self.vertices],
            "legs": [{"vertex": leg.vertex, "marking": leg.marking} for leg in self.legs],
            "edges": [{"from": e.source, "to": e.target, "length_ray": e.length_ray} for e in self.edges],
        }
        if self.base_dim != self.inferred_base_dim:
            d["base_dim"] = self.base_dim
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TropicalCurve":
        verts = tuple(
            Vertex(jsonio.require(v, "id", int), jsonio.require(v, "genus", int))
            for v in jsonio.require(d, "vertices", list)
        )
        legs = tuple(
            Leg(jsonio.require(x, "vertex", int), jsonio.require(x, "marking", int)) for x in d.get("legs", [])
        )
        edges = tuple(
            Edge(jsonio.require(x, "from", int), jsonio.require(x, "to", int), jsonio.require(x, "length_ray", int))
            for x in d.get("edges", [])
        )
        return cls(verts, edges, legs, d.get("base_dim"))

    def to_json(self) -> str:
        return jsonio.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "TropicalCurve":
        return cls.from_dict(jsonio.loads(text))


def cycle_graph(n: int, legs: Sequence[tuple[int, int]] = ()) -> TropicalCurve:
    """Cycle on vertices 0..n-1 with edge i from i to i+1 of length coordinate i."""
    verts = tuple(Vertex(i) for i in range(n))
    edges = tuple(Edge(i, (i + 1) % n, i) for i in range(n))
    return TropicalCurve(verts, edges, tuple(Leg(v, m) for v, m in legs))


def two_gon(legs: Sequence[tuple[int, int]] = ((0, 1), (0, 2))) -> TropicalCurve:
    """Two vertices joined by two edges, both oriented 0 -> 1, lengths l1 and l2."""
    return TropicalCurve((Vertex(0), Vertex(1)), (Edge(0, 1, 0), Edge(0, 1, 1)), tuple(Leg(v, m) for v, m in legs))


# ---------------------------------------------------------------------------
# divisors


@dataclass(frozen=True)
class Divisor:
    multidegree: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "multidegree", dict(self.multidegree))

    @classmethod
    def of(cls, curve: TropicalCurve, values: Sequence[int] | Mapping[int, int]) -> "Divisor":
        if isinstance(values, Mapping):
            unknown = set(values) - set(curve.vertex_ids)
            if unknown:
                raise CurveError(f"divisor names unknown vertices {sorted(unknown)}")
            return cls({v: int(values.get(v, 0)) for v in curve.vertex_ids})
        values = list(values)
        if len(values) != len(curve.vertices):
            raise CurveError("divisor length does not match the vertices")
        return cls({v: int(x) for v, x in zip(curve.vertex_ids, values)})

    @property
    def total(self) -> int:
        return sum(self.multidegree.values())

    def __getitem__(self, v: int) -> int:
        return self.multidegree.get(v, 0)

    def vector(self, curve: TropicalCurve) -> tuple[int, ...]:
        return tuple(self[v] for v in curve.vertex_ids)

    def __add__(self, other: "Divisor") -> "Divisor":
        keys = set(self.multidegree) | set(other.multidegree)
        return Divisor({k: self[k] + other[k] for k in sorted(keys)})

    def __neg__(self) -> "Divisor":
        return Divisor({k: -x for k, x in self.multidegree.items()})

    def scale(self, k: int) -> "Divisor":
        return Divisor({v: k * x for v, x in self.multidegree.items()})

    def __eq__(self, other):
        if not isinstance(other, Divisor):
            return NotImplemented
        keys = set(self.multidegree) | set(other.multidegree)
        return all(self[k] == other[k] for k in keys)

    def __hash__(self):
        return hash(tuple(sorted((k, x) for k, x in self.multidegree.items() if x)))

    def to_dict(self) -> dict:
        return {"multidegree": {str(k): x for k, x in sorted(self.multidegree.items())}, "total": self.total}


def divisor_of_slopes(curve: TropicalCurve, slopes: Sequence[int]) -> Divisor:
    if len(slopes) != len(curve.edges):
        raise CurveError("one slope per edge required")
    md = {v: 0 for v in curve.vertex_ids}
    for e, s in zip(curve.edges, slopes):
        md[e.source] += s
        md[e.target] -= s
    return Divisor(md)


def franchetta_divisor(curve: TropicalCurve, k: int, a: Sequence[int] | Mapping[int, int]) -> Divisor:
    """Multidegree of ``omega^k(-sum a_j x_j)`` with omega the dualizing sheaf."""
    legs = sorted(curve.legs, key=lambda leg: leg.marking)
    if isinstance(a, Mapping):
        weights = {leg.marking: int(a.get(leg.marking, 0)) for leg in legs}
        unknown = set(a) - set(weights)
        if unknown:
            raise CurveError(f"weights for unknown markings {sorted(unknown)}")
    else:
        a = list(a)
        if len(a) != len(legs):
            raise CurveError(f"{len(a)} weights for {len(legs)} legs")
        weights = {leg.marking: int(x) for leg, x in zip(legs, a)}
    if sum(weights.values()) != k * (2 * curve.genus - 2):
        raise CurveError(f"weights sum to {sum(weights.values())}, expected {k * (2 * curve.genus - 2)}")
    md = {}
    for v in curve.vertices:
        md[v.id] = k * (2 * v.genus - 2 + curve.valence(v.id)) - sum(weights[leg.marking] for leg in curve.legs_at(v.id))
    return Divisor(md)


# ---------------------------------------------------------------------------
# piecewise linear functions


def _sub(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


@dataclass(frozen=True)
class PLFunction:
    curve: TropicalCurve
    values: Mapping[int, tuple[int, ...]]

    def __post_init__(self):
        k = self.curve.base_dim
        vals = {}
        extra = set(self.values) - set(self.curve.vertex_ids)
        if extra:
            raise CurveError(f"values given at unknown vertices {sorted(extra)}")
        for v in self.curve.vertex_ids:
            if v not in self.values:
                raise CurveError(f"no value at vertex {v}")
            x = tuple(int(c) for c in self.values[v])
            if len(x) != k:
                raise CurveError(f"value at vertex {v} has {len(x)} coordinates, expected {k}")
            vals[v] = x
        if any(vals[self.curve.base_vertex]):
            raise CurveError("the base vertex must have value 0")
        for i, e in enumerate(self.curve.edges):
            diff = _sub(vals[e.target], vals[e.source])
            if any(c for j, c in enumerate(diff) if j != e.length_ray):
                raise CurveError(f"edge {i}: value difference {list(diff)} is not a multiple of its length")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_slopes(cls, curve: TropicalCurve, slopes: Sequence[int]) -> "PLFunction":
        if len(slopes) != len(curve.edges):
            raise CurveError("one slope per edge required")
        if any(any(f) for f in curve.cycle_forms(slopes)):
            raise CurveError("slopes are not cycle consistent on the whole base cone")
        parent, order = curve._tree
        k = curve.base_dim
        vals = {order[0]: (0,) * k}
        for v in order[1:]:
            i, _ = parent[v]
            e = curve.edges[i]
            step = [0] * k
            step[e.length_ray] = slopes[i]
            if e.target == v:
                vals[v] = tuple(a + b for a, b in zip(vals[e.source], step))
            else:
                vals[v] = tuple(a - b for a, b in zip(vals[e.target], step))
        return cls(curve, vals)

    @classmethod
    def zero(cls, curve: TropicalCurve) -> "PLFunction":
        return cls(curve, {v: (0,) * curve.base_dim for v in curve.vertex_ids})

    @property
    def slopes(self) -> tuple[int, ...]:
        return tuple(
            self.values[e.target][e.length_ray] - self.values[e.source][e.length_ray] for e in self.curve.edges
        )

    def __add__(self, other: "PLFunction") -> "PLFunction":
        return PLFunction(self.curve, {v: tuple(a + b for a, b in zip(x, other.values[v])) for v, x in self.values.items()})

    def to_dict(self) -> dict:
        return {"values": {str(v): list(x) for v, x in self.values.items()}, "slopes": list(self.slopes)}


def div_of(alpha: PLFunction, curve: TropicalCurve | None = None) -> Divisor:
    if curve is not None and curve != alpha.curve:
        raise CurveError("PL function lives on a different curve")
    return divisor_of_slopes(alpha.curve, alpha.slopes)


# ---------------------------------------------------------------------------
# contraction and extension


def contract(curve: TropicalCurve, face) -> tuple[TropicalCurve, dict[int, int]]:
    """Contract every edge whose length coordinate is not kept by ``face``.

    ``face`` lists the kept base coordinates (or is a face map whose ray
    assignment does); kept coordinate ``face[i]`` becomes coordinate ``i``.
    Returns the contracted curve and the vertex map.
    """
    kept = tuple(getattr(face, "ray_assignment", face))
    if len(set(kept)) != len(kept) or not all(0 <= j < curve.base_dim for j in kept):
        raise CurveError(f"{list(kept)} is not a face of the base cone")
    parent = {v: v for v in curve.vertex_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    contracted = [e for e in curve.edges if e.length_ray not in kept]
    for e in contracted:
        a, b = find(e.source), find(e.target)
        if a != b:
            parent[max(a, b)] = min(a, b)
    vmap = {v: find(v) for v in curve.vertex_ids}
    classes: dict[int, list[Vertex]] = {}
    for v in curve.vertices:
        classes.setdefault(vmap[v.id], []).append(v)
    new_vertices = []
    for rep in sorted(classes):
        members = classes[rep]
        inner = sum(1 for e in contracted if vmap[e.source] == rep)
        genus = sum(v.genus for v in members) + inner - len(members) + 1
        new_vertices.append(Vertex(rep, genus))
    edges = tuple(
        Edge(vmap[e.source], vmap[e.target], kept.index(e.length_ray)) for e in curve.edges if e.length_ray in kept
    )
    legs = tuple(Leg(vmap[leg.vertex], leg.marking) for leg in curve.legs)
    return TropicalCurve(tuple(new_vertices), edges, legs, len(kept)), vmap


def pushforward_divisor(d: Divisor, vertex_map: Mapping[int, int]) -> Divisor:
    out: dict[int, int] = {}
    for v, x in d.multidegree.items():
        w = vertex_map[v]
        out[w] = out.get(w, 0) + x
    return Divisor(dict(sorted(out.items())))


def restrict_pl(alpha: PLFunction, face) -> PLFunction:
    """Restriction of a PL function to the curve over a face of the base."""
    kept = tuple(getattr(face, "ray_assignment", face))
    small, vmap = contract(alpha.curve, kept)
    vals: dict[int, tuple[int, ...]] = {}
    for v, x in alpha.values.items():
        y = tuple(x[j] for j in kept)
        w = vmap[v]
        if w in vals and vals[w] != y:
            raise CurveError("PL function is not constant on contracted vertices")
        vals[w] = y
    return PLFunction(small, vals)


def extend_pl(curve: TropicalCurve, inputs: Mapping[int, PLFunction]) -> PLFunction:
    """Interpolate PL functions given over single rays of the base cone.

    The value at ``v`` has ray coordinate ``i`` equal to the value of the
    input on ray ``i`` at the image of ``v``; rays without input get zero.
    """
    k = curve.base_dim
    vals = {v: [0] * k for v in curve.vertex_ids}
    for i, alpha in sorted(inputs.items()):
        if not 0 <= i < k:
            raise CurveError(f"ray {i} is not a ray of the base cone")
        small, vmap = contract(curve, (i,))
        if alpha.curve != small:
            raise CurveError(f"input on ray {i} is not a PL function on the curve over that ray")
        for v in curve.vertex_ids:
            vals[v][i] = alpha.values[vmap[v]][0]
    return PLFunction(curve, {v: tuple(x) for v, x in vals.items()})
