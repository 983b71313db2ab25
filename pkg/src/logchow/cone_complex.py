"""Cone complexes of smooth cones glued along face maps.

Every cone is the standard orthant ``R_{>=0}^d`` with a label on each ray.
A face map ``s -> t`` is an injective assignment of the rays of ``s`` to
rays of ``t`` preserving labels; it identifies ``s`` with the coordinate
face of ``t`` spanned by the image rays.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from . import jsonio


class ComplexError(ValueError):
    """Raised on malformed cone complexes."""


@dataclass(frozen=True)
class Cone:
    id: str
    ray_labels: tuple[str, ...]

    @property
    def dim(self) -> int:
        return len(self.ray_labels)

    @property
    def variables(self) -> tuple[str, ...]:
        """Polynomial variable names, one per ray."""
        if len(set(self.ray_labels)) == len(self.ray_labels):
            return self.ray_labels
        return tuple(f"{lab}#{i}" for i, lab in enumerate(self.ray_labels))


@dataclass(frozen=True)
class FaceMap:
    source: str
    target: str
    ray_assignment: tuple[int, ...]

    def image(self) -> frozenset[int]:
        return frozenset(self.ray_assignment)

    def then(self, other: "FaceMap") -> "FaceMap":
        """Composite ``other o self``."""
        if other.source != self.target:
            raise ComplexError(f"cannot compose {self} with {other}")
        return FaceMap(self.source, other.target, tuple(other.ray_assignment[i] for i in self.ray_assignment))

    def embedding_matrix(self, target_dim: int) -> tuple[tuple[int, ...], ...]:
        """Matrix with one row per target ray and one column per source ray."""
        return tuple(
            tuple(int(self.ray_assignment[j] == i) for j in range(len(self.ray_assignment)))
            for i in range(target_dim)
        )

    def push(self, v: Sequence[int], target_dim: int) -> tuple[int, ...]:
        """Image of a vector of source coordinates in target coordinates."""
        out = [0] * target_dim
        for i, x in enumerate(v):
            out[self.ray_assignment[i]] = x
        return tuple(out)

    def pull(self, v: Sequence[int]) -> tuple[int, ...]:
        """Source coordinates of a target vector supported on the image face."""
        return tuple(v[j] for j in self.ray_assignment)


@dataclass(frozen=True)
class StratumReport:
    label_subset: tuple[str, ...]
    components: tuple[frozenset[str], ...]

    @property
    def cones(self) -> frozenset[str]:
        return frozenset().union(*self.components)


@dataclass(frozen=True)
class ConeComplex:
    cones: tuple[Cone, ...]
    face_maps: tuple[FaceMap, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cones", tuple(self.cones))
        object.__setattr__(self, "face_maps", tuple(self.face_maps))
        validate_complex(self)

    # ------------------------------------------------------------------ basic

    @cached_property
    def by_id(self) -> dict[str, Cone]:
        return {c.id: c for c in self.cones}

    def cone(self, cid: str) -> Cone:
        try:
            return self.by_id[cid]
        except KeyError:
            raise ComplexError(f"unknown cone {cid!r}") from None

    @property
    def dim(self) -> int:
        return max((c.dim for c in self.cones), default=0)

    @cached_property
    def closure(self) -> tuple[FaceMap, ...]:
        """All non-identity face maps, closed under composition."""
        return _closure(self)

    @cached_property
    def _maps_into(self) -> dict[str, list[FaceMap]]:
        out: dict[str, list[FaceMap]] = {c.id: [] for c in self.cones}
        for f in self.closure:
            out[f.target].append(f)
        for c in self.cones:
            out[c.id].append(FaceMap(c.id, c.id, tuple(range(c.dim))))
        for lst in out.values():
            lst.sort(key=lambda f: (self.by_id[f.source].dim, f.source, f.ray_assignment))
        return out

    def maps_into(self, target: str) -> list[FaceMap]:
        """Face maps into ``target`` including its identity."""
        return self._maps_into[target]

    def maps_from(self, source: str) -> list[FaceMap]:
        """Face maps out of ``source`` including its identity."""
        c = self.cone(source)
        out = [f for f in self.closure if f.source == source]
        out.append(FaceMap(source, source, tuple(range(c.dim))))
        return sorted(out, key=lambda f: (f.target, f.ray_assignment))

    def face_of(self, target: str, image: Iterable[int]) -> FaceMap:
        """The face map realizing the coordinate face ``image`` of ``target``."""
        image = frozenset(image)
        for f in self.maps_into(target):
            if f.image() == image:
                return f
        raise ComplexError(f"face {sorted(image)} of cone {target!r} is not a cone of the complex")

    @cached_property
    def maximal_cones(self) -> tuple[Cone, ...]:
        sources = {f.source for f in self.closure}
        return tuple(c for c in self.cones if c.id not in sources)

    @cached_property
    def components(self) -> list[frozenset[str]]:
        return _components([c.id for c in self.cones], self.closure)

    def component_of(self, cid: str) -> int:
        for i, comp in enumerate(self.components):
            if cid in comp:
                return i
        raise ComplexError(f"unknown cone {cid!r}")

    # ------------------------------------------------------------------ strata

    @property
    def divisor_labels(self) -> frozenset[str]:
        return frozenset(lab for c in self.cones for lab in c.ray_labels)

    def strata(self, labels: Sequence[str]) -> "StratumReport":
        """Connected components of the closed stratum indexed by ``labels``.

        ``labels`` is read as a multiset; the stratum consists of the cones
        whose ray labels contain it.
        """
        need = Counter(labels)
        members = [c.id for c in self.cones if not need - Counter(c.ray_labels)]
        keep = set(members)
        maps = [f for f in self.closure if f.source in keep and f.target in keep]
        return StratumReport(tuple(sorted(labels)), tuple(_components(members, maps)))

    def is_simple(self) -> tuple[bool, str]:
        """Check the complex is simple; the message names a witness when not."""
        for c in self.cones:
            if len(set(c.ray_labels)) != c.dim:
                return False, f"cone {c.id!r} has repeated ray labels {list(c.ray_labels)}"
        seen: dict[tuple[str, frozenset[int]], str] = {}
        for f in self.closure:
            key = (f.target, f.image())
            if key in seen:
                return False, f"face {sorted(key[1])} of {f.target!r} is hit by {seen[key]!r} and {f.source!r}"
            seen[key] = f.source
        label_sets = {frozenset()}
        for c in self.cones:
            for r in range(1, c.dim + 1):
                label_sets.update(frozenset(s) for s in combinations(c.ray_labels, r))
        for lab in sorted(label_sets, key=lambda s: (len(s), sorted(s))):
            hit: dict[int, frozenset[str]] = {}
            for comp in self.strata(sorted(lab)).components:
                k = self.component_of(next(iter(comp)))
                if k in hit:
                    return False, (
                        f"stratum {sorted(lab)} has components {sorted(hit[k])} and {sorted(comp)} "
                        "inside one connected component of the complex"
                    )
                hit[k] = comp
        return True, ""

    # ------------------------------------------------------------------ json

    def to_dict(self) -> dict:
        return {
            "cones": [{"id": c.id, "dim": c.dim, "ray_labels": list(c.ray_labels)} for c in self.cones],
            "face_maps": [
                {"source": f.source, "target": f.target, "ray_assignment": list(f.ray_assignment)}
                for f in self.face_maps
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConeComplex":
        cones = []
        for c in jsonio.require(d, "cones", list):
            cid = jsonio.require(c, "id", str)
            labels = jsonio.require(c, "ray_labels", list)
            if not all(isinstance(x, str) for x in labels):
                raise jsonio.SchemaError(f"ray labels of {cid!r} must be strings")
            dim = jsonio.require(c, "dim", int)
            if dim != len(labels):
                raise ComplexError(f"cone {cid!r} declares dim {dim} but has {len(labels)} rays")
            cones.append(Cone(cid, tuple(labels)))
        maps = []
        for f in d.get("face_maps", []):
            maps.append(
                FaceMap(
                    jsonio.require(f, "source", str),
                    jsonio.require(f, "target", str),
                    jsonio.int_vector(jsonio.require(f, "ray_assignment", list)),
                )
            )
        return cls(tuple(cones), tuple(maps))

    def to_json(self) -> str:
        return jsonio.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ConeComplex":
        return cls.from_dict(jsonio.loads(text))


# ---------------------------------------------------------------------------
# validation and closure


def _implicit_maps(cx: ConeComplex) -> list[FaceMap]:
    zeros = [c for c in cx.cones if c.dim == 0]
    if len(zeros) != 1:
        return []
    z = zeros[0].id
    return [FaceMap(z, c.id, ()) for c in cx.cones if c.dim > 0]


def _closure(cx: ConeComplex) -> tuple[FaceMap, ...]:
    maps = set(cx.face_maps) | set(_implicit_maps(cx))
    out_of: dict[str, set[FaceMap]] = {}
    for f in maps:
        out_of.setdefault(f.source, set()).add(f)
    frontier = list(maps)
    while frontier:
        new = []
        for f in frontier:
            for g in list(out_of.get(f.target, ())):
                h = f.then(g)
                if h not in maps:
                    maps.add(h)
                    out_of.setdefault(h.source, set()).add(h)
                    new.append(h)
        frontier = new
    return tuple(sorted(maps, key=lambda f: (f.target, f.source, f.ray_assignment)))


def _components(nodes: Sequence[str], maps: Iterable[FaceMap]) -> list[frozenset[str]]:
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f in maps:
        a, b = find(f.source), find(f.target)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[str, set[str]] = {}
    for n in nodes:
        groups.setdefault(find(n), set()).add(n)
    return sorted((frozenset(g) for g in groups.values()), key=lambda g: sorted(g))


def validate_complex(cx: ConeComplex) -> None:
    """Raise ComplexError unless ``cx`` is a well-formed cone complex."""
    ids = [c.id for c in cx.cones]
    dup = [i for i, n in Counter(ids).items() if n > 1]
    if dup:
        raise ComplexError(f"duplicate cone ids {sorted(dup)}")
    if not any(c.dim == 0 for c in cx.cones):
        raise ComplexError("a cone complex needs a zero cone")
    by_id = {c.id: c for c in cx.cones}
    if len(set(cx.face_maps)) != len(cx.face_maps):
        raise ComplexError("duplicate face map")
    for f in cx.face_maps:
        if f.source not in by_id or f.target not in by_id:
            raise ComplexError(f"face map {f.source!r} -> {f.target!r} names an unknown cone")
        s, t = by_id[f.source], by_id[f.target]
        if len(f.ray_assignment) != s.dim:
            raise ComplexError(f"face map {s.id!r} -> {t.id!r} assigns {len(f.ray_assignment)} rays for dim {s.dim}")
        if s.dim >= t.dim:
            raise ComplexError(f"face map {s.id!r} -> {t.id!r} does not lower the dimension")
        if len(set(f.ray_assignment)) != s.dim or not all(0 <= j < t.dim for j in f.ray_assignment):
            raise ComplexError(f"face map {s.id!r} -> {t.id!r} is not injective into the rays of the target")
        for i, j in enumerate(f.ray_assignment):
            if s.ray_labels[i] != t.ray_labels[j]:
                raise ComplexError(
                    f"face map {s.id!r} -> {t.id!r} sends label {s.ray_labels[i]!r} to {t.ray_labels[j]!r}"
                )
    closure = _closure(cx)
    faces: dict[tuple[str, frozenset[int]], FaceMap] = {}
    for f in closure:
        if f.source == f.target:
            raise ComplexError(f"face maps compose to a self map of {f.source!r}")
        key = (f.target, f.image())
        if key in faces:
            raise ComplexError(
                f"face {sorted(key[1])} of {f.target!r} is realized twice ({faces[key].source!r} and {f.source!r})"
            )
        faces[key] = f
    for t in cx.cones:
        for r in range(t.dim):
            for sub in combinations(range(t.dim), r):
                if (t.id, frozenset(sub)) not in faces:
                    raise ComplexError(f"face {list(sub)} of cone {t.id!r} is missing from the complex")


# ---------------------------------------------------------------------------
# constructors


def _subset_id(labels: Sequence[str]) -> str:
    return "+".join(labels) if labels else "0"


def orthant(n: int, labels: Sequence[str] | None = None) -> ConeComplex:
    """The standard n-dimensional cone with all its faces."""
    labels = tuple(labels) if labels is not None else tuple(f"D{i + 1}" for i in range(n))
    if len(labels) != n or len(set(labels)) != n:
        raise ComplexError("orthant needs n distinct labels")
    cones = []
    maps = []
    for r in range(n + 1):
        for sub in combinations(range(n), r):
            cones.append(Cone(_subset_id([labels[i] for i in sub]), tuple(labels[i] for i in sub)))
            for k, drop in enumerate(sub):
                face = tuple(i for i in sub if i != drop)
                if not face:
                    continue
                maps.append(
                    FaceMap(
                        _subset_id([labels[i] for i in face]),
                        _subset_id([labels[i] for i in sub]),
                        tuple(sub.index(i) for i in face),
                    )
                )
    return ConeComplex(tuple(cones), tuple(maps))


def nodal_cubic() -> ConeComplex:
    """One 2-dimensional cone whose two rays are identified."""
    return ConeComplex(
        (Cone("0", ()), Cone("E", ("E",)), Cone("EE", ("E", "E"))),
        (FaceMap("E", "EE", (0,)), FaceMap("E", "EE", (1,))),
    )


def iter_faces(cx: ConeComplex) -> Iterator[tuple[Cone, FaceMap]]:
    for t in cx.cones:
        for f in cx.maps_into(t.id):
            yield t, f


def subcomplex(cx: ConeComplex, cone_ids: Iterable[str]) -> ConeComplex:
    """The subcomplex on ``cone_ids`` together with all their faces."""
    keep = set(cone_ids)
    for cid in list(keep):
        keep.update(f.source for f in cx.maps_into(cid))
    cones = tuple(c for c in cx.cones if c.id in keep)
    maps = tuple(f for f in cx.face_maps if f.source in keep and f.target in keep)
    return ConeComplex(cones, maps)
