"""Subdivisions of cone complexes.

A subdivision assigns to every cone ``c`` of the base a fan supported on the
orthant of ``c``: a list of full-dimensional cells given by their primitive
rays in the coordinates of ``c``.  The fans must be compatible with the face
maps: restricting the fan of ``t`` to the face ``f(s)`` gives the fan of ``s``.
When every cell is a smooth simplex the subdivision also has a refined cone
complex, whose cones are the interior cells of each base cone.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, permutations
from math import gcd
from typing import Iterable, Mapping, Sequence

from . import jsonio
from .cone_complex import Cone, ConeComplex, FaceMap
from .polyhedral import (
    RationalCone,
    dot,
    is_smooth_simplex,
    parallelepiped_point,
    pulling_triangulation,
)

Ray = tuple[int, ...]
Cell = tuple[Ray, ...]
LocalFan = tuple[Cell, ...]

SMOOTH_ONLY = "smooth-only"
ALLOW_SINGULAR = "allow"
RESOLVE = "resolve"


class SubdivisionError(ValueError):
    """Raised on invalid or incompatible subdivisions."""


class NonSmoothError(SubdivisionError):
    """Raised when a smooth subdivision was required."""


# ---------------------------------------------------------------------------
# local fans inside one orthant


def unit(i: int, n: int) -> Ray:
    return tuple(int(i == j) for j in range(n))


def orthant_fan(n: int) -> LocalFan:
    return (tuple(unit(i, n) for i in range(n)),)


def _cone(cell: Cell, n: int) -> RationalCone:
    return RationalCone(cell, n)


def normalize_fan(cells: Iterable[Iterable[Sequence[int]]], n: int) -> LocalFan:
    """Replace each cell by its sorted extreme rays; drop repeats."""
    out = set()
    for cell in cells:
        if n == 0:
            out.add(())
        else:
            out.add(tuple(_cone(tuple(map(tuple, cell)), n).rays))
    return tuple(sorted(out))


def support(v: Sequence[int]) -> frozenset[int]:
    return frozenset(i for i, x in enumerate(v) if x)


def cell_faces(cell: Cell, n: int) -> list[Cell]:
    if n == 0:
        return [()]
    return [tuple(f.rays) for f in _cone(cell, n).faces()]


def fan_faces(fan: LocalFan, n: int) -> set[Cell]:
    out = set()
    for cell in fan:
        out.update(cell_faces(cell, n))
    return out


def restrict_fan(fan: LocalFan, f: FaceMap, target_dim: int) -> LocalFan:
    """Pull the fan of ``f.target`` back to ``f.source``."""
    image = f.image()
    k = len(f.ray_assignment)
    out = []
    for cell in fan:
        rays = [r for r in cell if support(r) <= image]
        if k == 0:
            out.append(())
            continue
        pulled = tuple(f.pull(r) for r in rays)
        if pulled and _cone(pulled, k).dim == k:
            out.append(pulled)
    return normalize_fan(out, k)


def extend_fan(fan: LocalFan, f: FaceMap, target_dim: int) -> LocalFan:
    """Product extension of the fan of ``f.source`` to ``f.target``."""
    rest = [unit(j, target_dim) for j in range(target_dim) if j not in f.image()]
    out = [tuple(f.push(r, target_dim) for r in cell) + tuple(rest) for cell in fan]
    return normalize_fan(out, target_dim)


def intersect_fans(a: LocalFan, b: LocalFan, n: int) -> LocalFan:
    if n == 0:
        return ((),)
    out = []
    for x in a:
        cx = _cone(x, n)
        for y in b:
            c = cx.intersection(_cone(y, n))
            if c.dim == n:
                out.append(c.rays)
    return normalize_fan(out, n)


def fan_refines(a: LocalFan, b: LocalFan, n: int) -> bool:
    """Every cell of ``a`` lies in a cell of ``b``."""
    if n == 0:
        return True
    bc = [_cone(y, n) for y in b]
    return all(any(c.contains_cone(_cone(x, n)) for c in bc) for x in a)


def local_stellar(fan: LocalFan, v: Ray, n: int) -> LocalFan:
    """Star subdivision of a fan at the ray ``v``."""
    out = []
    for cell in fan:
        c = _cone(cell, n)
        if not c.contains(v) or v in c.rays:
            out.append(cell)
            continue
        for facet in c.facets:
            if dot(facet, v) == 0:
                continue
            out.append(c.face_rays(facet) + (v,))
    return normalize_fan(out, n)


def _is_face(x: RationalCone, c: RationalCone) -> bool:
    normals = [h for h in c.facets if all(dot(h, r) == 0 for r in x.rays)]
    face = RationalCone([r for r in c.rays if all(dot(h, r) == 0 for h in normals)], c.ambient)
    return face == x


def check_local_fan(fan: LocalFan, n: int) -> None:
    """Raise unless ``fan`` is a fan with support exactly the orthant."""
    if n == 0:
        if fan != ((),):
            raise SubdivisionError("the zero cone has only the trivial fan")
        return
    if not fan:
        raise SubdivisionError("empty fan")
    cones = []
    for cell in fan:
        for r in cell:
            if len(r) != n or any(x < 0 for x in r):
                raise SubdivisionError(f"ray {list(r)} lies outside the orthant")
            if gcd(*r) != 1:
                raise SubdivisionError(f"ray {list(r)} is not primitive")
        c = _cone(cell, n)
        if c.dim != n:
            raise SubdivisionError(f"cell {[list(r) for r in cell]} is not full dimensional")
        cones.append(c)
    for i in range(len(cones)):
        for j in range(i + 1, len(cones)):
            inter = cones[i].intersection(cones[j])
            if not (_is_face(inter, cones[i]) and _is_face(inter, cones[j])):
                raise SubdivisionError(f"cells {list(cones[i].rays)} and {list(cones[j].rays)} overlap")
            if inter.dim == n:
                raise SubdivisionError(f"cells {list(cones[i].rays)} and {list(cones[j].rays)} overlap")
    walls: dict[RationalCone, int] = {}
    for c in cones:
        for w in c.facet_cones():
            walls[w] = walls.get(w, 0) + 1
    for w, count in walls.items():
        boundary = any(all(r[i] == 0 for r in w.rays) for i in range(n))
        if count != (1 if boundary else 2):
            raise SubdivisionError(f"cells do not cover the orthant near the wall {list(w.rays)}")


def covers_integer_points(fan: LocalFan, n: int, height: int) -> tuple[bool, str]:
    """Probe coverage and disjointness of interiors on points of ``[0, height]^n``."""
    if n == 0:
        return True, ""
    cones = [_cone(cell, n) for cell in fan]

    def rec(i, cur):
        if i == n:
            inside = [c for c in cones if c.contains(cur)]
            if not inside:
                return f"point {cur} is not covered"
            if sum(1 for c in cones if c.relint_contains(cur)) > 1:
                return f"point {cur} is interior to two cells"
            return ""
        for x in range(height + 1):
            msg = rec(i + 1, cur + [x])
            if msg:
                return msg
        return ""

    msg = rec(0, [])
    return (not msg), msg


# ---------------------------------------------------------------------------
# subdivisions of complexes


def _ray_text(r: Ray) -> str:
    return ",".join(map(str, r))


@dataclass(frozen=True, eq=False)
class Subdivision:
    base: ConeComplex
    fans: Mapping[str, LocalFan]

    def __post_init__(self):
        fans = {}
        for c in self.base.cones:
            if c.id not in self.fans:
                raise SubdivisionError(f"no fan given for cone {c.id!r}")
            fans[c.id] = normalize_fan(self.fans[c.id], c.dim)
        extra = set(self.fans) - set(fans)
        if extra:
            raise SubdivisionError(f"fans given for unknown cones {sorted(extra)}")
        object.__setattr__(self, "fans", fans)

    @classmethod
    def identity(cls, base: ConeComplex) -> "Subdivision":
        return cls(base, {c.id: orthant_fan(c.dim) for c in base.cones})

    def __eq__(self, other):
        return isinstance(other, Subdivision) and self.base == other.base and self.fans == other.fans

    def __hash__(self):
        return hash(tuple(sorted(self.fans.items())))

    def __repr__(self):
        return f"Subdivision({self.fans})"

    # ---------------------------------------------------------------- checks

    def validate(self) -> None:
        """Check every local fan and the compatibility along face maps."""
        for c in self.base.cones:
            check_local_fan(self.fans[c.id], c.dim)
        for f in self.base.closure:
            t = self.base.cone(f.target)
            if restrict_fan(self.fans[t.id], f, t.dim) != self.fans[f.source]:
                raise SubdivisionError(f"fans of {f.source!r} and {f.target!r} disagree along a face map")

    def check_support(self, height: int = 4) -> tuple[bool, str]:
        """Exact cover/overlap check plus an integer-point probe up to ``height``."""
        try:
            self.validate()
        except SubdivisionError as exc:
            return False, str(exc)
        for c in self.base.cones:
            ok, msg = covers_integer_points(self.fans[c.id], c.dim, height)
            if not ok:
                return False, f"cone {c.id!r}: {msg}"
        return True, ""

    @property
    def is_simplicial(self) -> bool:
        return all(len(cell) == c.dim for c in self.base.cones for cell in self.fans[c.id])

    @property
    def is_smooth(self) -> bool:
        return self.is_simplicial and all(
            c.dim == 0 or is_smooth_simplex(cell) for c in self.base.cones for cell in self.fans[c.id]
        )

    def refines(self, other: "Subdivision") -> bool:
        if other.base != self.base:
            return False
        return all(fan_refines(self.fans[c.id], other.fans[c.id], c.dim) for c in self.base.cones)

    # ---------------------------------------------------------------- refined complex

    def _interior_cells(self, c: Cone) -> list[Cell]:
        if c.dim == 0:
            return [()]
        cells = set()
        for cell in self.fans[c.id]:
            for r in range(1, len(cell) + 1):
                for sub in combinations(cell, r):
                    if len(frozenset().union(*(support(x) for x in sub))) == c.dim:
                        cells.add(tuple(sorted(sub)))
        return sorted(cells, key=lambda s: (len(s), s))

    def _cell_id(self, c: Cone, cell: Cell) -> str:
        if cell == tuple(sorted(unit(i, c.dim) for i in range(c.dim))):
            return c.id
        return f"{c.id}[{';'.join(_ray_text(r) for r in cell)}]"

    def _locate(self, c: Cone, vectors: Sequence[Ray]) -> tuple[FaceMap, Cell]:
        """Face of ``c`` whose interior contains the cell on ``vectors``."""
        supp = frozenset().union(*(support(v) for v in vectors)) if vectors else frozenset()
        f = self.base.face_of(c.id, supp)
        return f, tuple(sorted(f.pull(v) for v in vectors))

    def _ray_label(self, c: Cone, r: Ray) -> str:
        f, (pulled,) = self._locate(c, [r])
        s = self.base.cone(f.source)
        if s.dim == 1:
            return s.ray_labels[0]
        return f"{s.id}@{_ray_text(pulled)}"

    @cached_property
    def _refined(self) -> tuple[ConeComplex, dict[str, tuple[str, Cell]]]:
        if not self.is_smooth:
            raise NonSmoothError("the subdivision has non-smooth cells and no refined cone complex")
        cones = []
        maps = []
        containment = {}
        for c in self.base.cones:
            for cell in self._interior_cells(c):
                rid = self._cell_id(c, cell)
                cones.append(Cone(rid, tuple(self._ray_label(c, r) for r in cell)))
                containment[rid] = (c.id, cell)
                for drop in range(len(cell)):
                    facet = cell[:drop] + cell[drop + 1:]
                    f, pulled = self._locate(c, facet)
                    s = self.base.cone(f.source)
                    pushed = [f.push(v, c.dim) for v in pulled]
                    maps.append(FaceMap(self._cell_id(s, pulled), rid, tuple(cell.index(v) for v in pushed)))
        return ConeComplex(tuple(cones), tuple(sorted(set(maps), key=lambda m: (m.target, m.source, m.ray_assignment)))), containment

    @property
    def refined(self) -> ConeComplex:
        return self._refined[0]

    @property
    def containment(self) -> dict[str, tuple[str, Cell]]:
        """Refined cone id -> (base cone id, ray images in base coordinates)."""
        return self._refined[1]

    # ---------------------------------------------------------------- operations

    def star_at(self, cone_id: str, ray: Sequence[int], policy: str = ALLOW_SINGULAR) -> "Subdivision":
        """Star subdivision at ``ray`` of the cone ``cone_id``, on all its images."""
        s = self.base.cone(cone_id)
        ray = tuple(ray)
        if len(ray) != s.dim:
            raise SubdivisionError(f"ray {list(ray)} has the wrong length for cone {cone_id!r}")
        if s.dim == 0 or not all(x > 0 for x in ray):
            raise SubdivisionError(f"ray {list(ray)} is not in the interior of cone {cone_id!r}")
        if gcd(*ray) != 1:
            raise SubdivisionError(f"ray {list(ray)} is not primitive")
        fans = dict(self.fans)
        for f in self.base.maps_from(cone_id):
            t = self.base.cone(f.target)
            fans[t.id] = local_stellar(fans[t.id], f.push(ray, t.dim), t.dim)
        return Subdivision(self.base, fans)._apply_policy(policy)

    def _apply_policy(self, policy: str) -> "Subdivision":
        if policy == ALLOW_SINGULAR:
            return self
        if policy == RESOLVE:
            return self.resolve()
        if policy == SMOOTH_ONLY:
            if not self.is_smooth:
                bad = self.first_singular_cell()
                raise NonSmoothError(f"non-smooth cell {bad} under the smooth-only policy")
            return self
        raise ValueError(f"unknown smoothness policy {policy!r}")

    def first_singular_cell(self) -> tuple[str, Cell] | None:
        for c in sorted(self.base.cones, key=lambda c: c.id):
            for cell in self.fans[c.id]:
                if c.dim and (len(cell) != c.dim or not is_smooth_simplex(cell)):
                    return c.id, cell
        return None

    def triangulate(self) -> "Subdivision":
        """Triangulate all cells without new rays, compatibly across faces."""
        if self.is_simplicial:
            return self
        done: dict[str, LocalFan] = {}
        for c in sorted(self.base.cones, key=lambda c: (c.dim, c.id)):
            if c.dim <= 1:
                done[c.id] = self.fans[c.id]
                continue

            def fixed(face: RationalCone, c=c):
                supp = frozenset().union(*(support(r) for r in face.rays)) if face.rays else frozenset()
                if len(supp) == c.dim:
                    return None
                f = self.base.face_of(c.id, supp)
                pushed = [tuple(f.push(r, c.dim) for r in cell) for cell in done[f.source]]
                out = []
                for cell in pushed:
                    for k in range(len(cell) + 1):
                        for sub in combinations(cell, k):
                            if len(sub) == face.dim and face.contains_cone(RationalCone(sub, c.dim)):
                                if RationalCone(sub, c.dim).dim == face.dim:
                                    out.append(tuple(sorted(sub)))
                return sorted(set(out))

            cells = []
            for cell in self.fans[c.id]:
                cells.extend(pulling_triangulation(_cone(cell, c.dim), fixed))
            done[c.id] = normalize_fan(cells, c.dim)
        return Subdivision(self.base, done)

    def resolve(self) -> "Subdivision":
        """Star subdivide at parallelepiped points until every cell is smooth."""
        cur = self.triangulate()
        while True:
            bad = cur.first_singular_cell()
            if bad is None:
                return cur
            cid, cell = bad
            c = cur.base.cone(cid)
            p = parallelepiped_point(cell)
            f, (pulled,) = cur._locate(c, [p])
            cur = cur.star_at(f.source, pulled)

    # ---------------------------------------------------------------- json

    def to_dict(self) -> dict:
        refined = self.refined
        return {
            "base": self.base.to_dict(),
            "refined": refined.to_dict(),
            "containment": [
                {
                    "refinedCone": rid,
                    "baseCone": self.containment[rid][0],
                    "rayImages": [list(r) for r in self.containment[rid][1]],
                }
                for rid in (c.id for c in refined.cones)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Subdivision":
        base = ConeComplex.from_dict(jsonio.require(d, "base", dict))
        fans: dict[str, list[Cell]] = {c.id: [] for c in base.cones}
        for entry in jsonio.require(d, "containment", list):
            bid = jsonio.require(entry, "baseCone", str)
            if bid not in fans:
                raise jsonio.SchemaError(f"containment names unknown base cone {bid!r}")
            dim = base.cone(bid).dim
            rays = tuple(jsonio.int_vector(r, dim) for r in jsonio.require(entry, "rayImages", list))
            if len(rays) == dim:
                fans[bid].append(rays)
        sub = cls(base, fans)
        sub.validate()
        if "refined" in d and ConeComplex.from_dict(d["refined"]) != sub.refined:
            raise SubdivisionError("refined complex does not match the containment data")
        return sub

    def to_json(self) -> str:
        return jsonio.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Subdivision":
        return cls.from_dict(jsonio.loads(text))


# ---------------------------------------------------------------------------
# constructors


def _as_subdivision(c) -> Subdivision:
    return c if isinstance(c, Subdivision) else Subdivision.identity(c)


def stellar(c, cone_id: str, ray: Sequence[int], policy: str = SMOOTH_ONLY) -> Subdivision:
    """Star subdivision of a complex (or a subdivision of it) at one ray."""
    return _as_subdivision(c).star_at(cone_id, ray, policy)


def barycentric(c: ConeComplex) -> Subdivision:
    fans = {}
    for cone in c.cones:
        n = cone.dim
        if n == 0:
            fans[cone.id] = ((),)
            continue
        cells = []
        for perm in permutations(range(n)):
            rays = []
            acc = [0] * n
            for i in perm:
                acc[i] = 1
                rays.append(tuple(acc))
            cells.append(tuple(rays))
        fans[cone.id] = tuple(cells)
    return Subdivision(c, fans)


def compose(first: Subdivision, second: Subdivision) -> Subdivision:
    """The subdivision of ``first.base`` given by ``second`` of ``first.refined``."""
    if second.base != first.refined:
        raise SubdivisionError("second subdivision is not of the first refinement")
    fans: dict[str, list[Cell]] = {c.id: [] for c in first.base.cones}
    for rid, (bid, rays) in first.containment.items():
        n = first.base.cone(bid).dim
        if len(rays) != n:
            continue
        for cell in second.fans[rid]:
            fans[bid].append(tuple(tuple(sum(x * r[i] for x, r in zip(v, rays)) for i in range(n)) for v in cell))
    for c in first.base.cones:
        if c.dim == 0:
            fans[c.id] = [()]
    return Subdivision(first.base, fans)


def common_refine(a: Subdivision, b: Subdivision, resolve: bool = True) -> Subdivision:
    """Coarsest common polyhedral refinement, made smooth when ``resolve``."""
    if a.base != b.base:
        raise SubdivisionError("subdivisions of different complexes")
    fans = {c.id: intersect_fans(a.fans[c.id], b.fans[c.id], c.dim) for c in a.base.cones}
    out = Subdivision(a.base, fans)
    return out.resolve() if resolve else out


# ---------------------------------------------------------------------------
# diagrams of face maps


@dataclass(frozen=True)
class FaceDiagram:
    objects: Mapping[str, int]
    arrows: tuple[FaceMap, ...]

    def __post_init__(self):
        for f in self.arrows:
            if f.source not in self.objects or f.target not in self.objects:
                raise SubdivisionError(f"arrow {f.source!r} -> {f.target!r} names an unknown object")
            if len(f.ray_assignment) != self.objects[f.source]:
                raise SubdivisionError(f"arrow {f.source!r} -> {f.target!r} has the wrong arity")
            if len(set(f.ray_assignment)) != len(f.ray_assignment) or not all(
                0 <= j < self.objects[f.target] for j in f.ray_assignment
            ):
                raise SubdivisionError(f"arrow {f.source!r} -> {f.target!r} is not an injection of rays")

    @classmethod
    def of_complex(cls, c: ConeComplex) -> "FaceDiagram":
        return cls({x.id: x.dim for x in c.cones}, tuple(c.closure))

    def closed(self) -> "FaceDiagram":
        arrows = set(self.arrows)
        changed = True
        while changed:
            changed = False
            for f in list(arrows):
                for g in list(arrows):
                    if f.target == g.source:
                        h = f.then(g)
                        if h not in arrows:
                            arrows.add(h)
                            changed = True
        return FaceDiagram(dict(self.objects), tuple(sorted(arrows, key=lambda m: (m.target, m.source, m.ray_assignment))))


def diagram_refine(d: FaceDiagram, given: Mapping[str, LocalFan]) -> dict[str, LocalFan]:
    """Refine the given fans until every arrow pulls the target fan back to the source fan."""
    d = d.closed()
    fans = {o: normalize_fan(given[o], n) if o in given else orthant_fan(n) for o, n in d.objects.items()}
    for o in given:
        if o not in d.objects:
            raise SubdivisionError(f"fan given for unknown object {o!r}")
        check_local_fan(fans[o], d.objects[o])
    cap = max(1, len(d.objects) * len(d.arrows))
    for _ in range(cap + 1):
        changed = False
        for f in d.arrows:
            ns, nt = d.objects[f.source], d.objects[f.target]
            s_new = intersect_fans(fans[f.source], restrict_fan(fans[f.target], f, nt), ns)
            t_new = intersect_fans(fans[f.target], extend_fan(s_new, f, nt), nt)
            if s_new != fans[f.source] or t_new != fans[f.target]:
                changed = True
                fans[f.source], fans[f.target] = s_new, t_new
        if not changed:
            return fans
    raise SubdivisionError("diagram refinement did not stabilize within the iteration cap")


def diagram_commutes(d: FaceDiagram, fans: Mapping[str, LocalFan]) -> bool:
    return all(
        restrict_fan(fans[f.target], f, d.objects[f.target]) == fans[f.source] for f in d.closed().arrows
    )
