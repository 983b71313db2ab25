"""Chow rings of smooth toric fans as piecewise polynomials modulo linear functions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Mapping, Sequence

from . import jsonio
from .cone_complex import Cone, ConeComplex, FaceMap, subcomplex
from .exact_algebra import (
    Polynomial,
    determinant,
    inverse_rational,
    mat_vec,
    rank,
    rref,
    solve_rational,
    substitute_linear,
)
from .piecewise_poly import PPSection, _basis_vectors, pullback_pp
from .polyhedral import RationalCone, simplices_form_fan


class FanError(ValueError):
    """Raised for fans that are not smooth, not complete or malformed."""


def _label(i: int) -> str:
    return f"D{i}"


@dataclass(frozen=True)
class SmoothFan:
    rays: tuple[tuple[int, ...], ...]
    maximal_cones: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rays", tuple(tuple(r) for r in self.rays))
        object.__setattr__(self, "maximal_cones", tuple(tuple(sorted(c)) for c in self.maximal_cones))
        self._check()

    @property
    def dim(self) -> int:
        return len(self.rays[0]) if self.rays else 0

    def _check(self) -> None:
        d = self.dim
        if not self.rays:
            raise FanError("a fan needs rays")
        for r in self.rays:
            if len(r) != d:
                raise FanError("rays of different lengths")
        for c in self.maximal_cones:
            if len(set(c)) != len(c) or not all(0 <= i < len(self.rays) for i in c):
                raise FanError(f"bad cone {list(c)}")
            gens = [self.rays[i] for i in c]
            if len(c) == d:
                if abs(determinant(gens)) != 1:
                    raise FanError(f"cone {list(c)} is not smooth")
            elif rank(gens) != len(c):
                raise FanError(f"cone {list(c)} is not simplicial")
        ok, msg = simplices_form_fan([[self.rays[i] for i in c] for c in self.maximal_cones], d)
        if not ok:
            raise FanError(msg)

    @cached_property
    def cones(self) -> tuple[tuple[int, ...], ...]:
        out = set()
        for c in self.maximal_cones:
            for k in range(len(c) + 1):
                out.update(combinations(c, k))
        return tuple(sorted(out, key=lambda c: (len(c), c)))

    def cone_id(self, c: Sequence[int]) -> str:
        return "+".join(_label(i) for i in sorted(c)) if c else "0"

    def as_complex(self) -> ConeComplex:
        cones = [Cone(self.cone_id(c), tuple(_label(i) for i in c)) for c in self.cones]
        maps = []
        for c in self.cones:
            for j in c:
                face = tuple(i for i in c if i != j)
                if face:
                    maps.append(FaceMap(self.cone_id(face), self.cone_id(c), tuple(c.index(i) for i in face)))
        return ConeComplex(tuple(cones), tuple(maps))

    def vectors(self) -> dict[str, tuple[tuple[int, ...], ...]]:
        return {self.cone_id(c): tuple(self.rays[i] for i in c) for c in self.cones}

    def star(self, cone: Sequence[int]) -> "SmoothFan":
        """Subfan of the maximal cones containing ``cone``."""
        cone = set(cone)
        return SmoothFan(self.rays, tuple(c for c in self.maximal_cones if cone <= set(c)))

    def to_dict(self) -> dict:
        return {"rays": [list(r) for r in self.rays], "maximal_cones": [list(c) for c in self.maximal_cones]}

    def to_json(self) -> str:
        return jsonio.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SmoothFan":
        rays = tuple(jsonio.int_vector(r) for r in jsonio.require(d, "rays", list))
        cones = tuple(jsonio.int_vector(c) for c in jsonio.require(d, "maximal_cones", list))
        return cls(rays, cones)

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(jsonio.loads(text))


class CompleteFan(SmoothFan):
    """A smooth fan whose support is the whole space."""

    def _check(self) -> None:
        super()._check()
        d = self.dim
        for c in self.maximal_cones:
            if len(c) != d:
                raise FanError(f"maximal cone {list(c)} is not full dimensional")
        walls: dict[tuple[int, ...], int] = {}
        for c in self.maximal_cones:
            for face in combinations(c, d - 1):
                walls[face] = walls.get(face, 0) + 1
        for w, k in walls.items():
            if k != 2:
                raise FanError(f"wall {list(w)} lies in {k} maximal cones; the fan is not complete")
        cones = [RationalCone([self.rays[i] for i in c], d) for c in self.maximal_cones]
        for probe in _probes(d):
            if not any(c.contains(probe) for c in cones):
                raise FanError(f"point {list(probe)} is not covered; the fan is not complete")


def _probes(d: int) -> list[tuple[int, ...]]:
    base = [1, -2, 3, -5, 7, -11, 13]
    out = []
    for shift in range(3):
        out.append(tuple(base[(i + shift) % len(base)] * (1 if shift != 1 else -1) for i in range(d)))
    return out


def projective_space(d: int) -> CompleteFan:
    rays = [tuple(int(i == j) for j in range(d)) for i in range(d)] + [tuple(-1 for _ in range(d))]
    cones = [tuple(i for i in range(d + 1) if i != k) for k in range(d + 1)]
    return CompleteFan(tuple(rays), tuple(cones))


def star_subdivide_fan(fan: SmoothFan, cone: Sequence[int]) -> SmoothFan:
    """Blow up the cone ``cone``: new ray at the sum of its rays."""
    cone = tuple(sorted(cone))
    new = tuple(sum(fan.rays[i][k] for i in cone) for k in range(fan.dim))
    rays = fan.rays + (new,)
    m = len(fan.rays)
    out = []
    for c in fan.maximal_cones:
        if set(cone) <= set(c):
            for i in cone:
                out.append(tuple(sorted([j for j in c if j != i] + [m])))
        else:
            out.append(c)
    return type(fan)(rays, tuple(out))


# ---------------------------------------------------------------------------
# chow rings


class ChowError(ValueError):
    pass


class ChowRing:
    """Graded ring PP/(linear) on a complex whose cones carry global ray vectors."""

    def __init__(self, complex: ConeComplex, vectors: Mapping[str, Sequence[Sequence[int]]], dim: int, complete: bool):
        self.complex = complex
        self.vectors = {k: tuple(tuple(v) for v in vs) for k, vs in vectors.items()}
        self.dim = dim
        self.complete = complete
        self._spaces = {}
        self._pp = {}
        self._quot = {}
        self._rel = {}
        self._solver = {}
        self._mult: dict = {}
        for n in range(dim + 1):
            self._build(n)

    # -------------------------------------------------------------- construction

    def linear_functions(self) -> list[PPSection]:
        out = []
        for j in range(self.dim):
            per = {
                c.id: Polynomial.linear(c.variables, [v[j] for v in self.vectors[c.id]])
                for c in self.complex.maximal_cones
            }
            out.append(PPSection(self.complex, 1, per))
        return out

    def _build(self, n: int) -> None:
        space, basis = _basis_vectors(self.complex, n)
        self._spaces[n] = space
        self._pp[n] = basis
        rel = []
        if n > 0:
            lin = self.linear_functions()
            prev_space = self._spaces[n - 1]
            for b in self._pp[n - 1]:
                s = prev_space.section(b)
                for m in lin:
                    rel.append(space.vector(m * s))
        rows, _ = rref(rel, len(space.slots)) if rel else ([], [])
        rel_basis = [tuple(r) for r in rows]
        self._rel[n] = rel_basis
        chosen: list[tuple] = []
        if n == self.dim and self.complete and n > 0:
            first = self.complex.maximal_cones[0]
            mono = tuple((i, 1) for i in range(first.dim))
            top = tuple(Fraction(int(slot == (first.id, mono))) for slot in space.slots)
            chosen = [top]
        else:
            current = rank(rel_basis) if rel_basis else 0
            for b in basis:
                trial = rel_basis + chosen + [b]
                r = rank(trial)
                if r > current:
                    chosen.append(tuple(Fraction(x) for x in b))
                    current = r
        self._quot[n] = chosen
        cols = chosen + rel_basis
        if len(cols) != len(basis):
            raise ChowError(f"degree {n}: quotient and relation bases do not span PP")
        self._solver[n] = cols

    # -------------------------------------------------------------- queries

    @property
    def graded_dimensions(self) -> tuple[int, ...]:
        return tuple(len(self._quot[n]) for n in range(self.dim + 1))

    def basis(self, n: int) -> list["ChowClass"]:
        out = []
        for i in range(len(self._quot[n])):
            out.append(self.unit_vector(n, i))
        return out

    def all_basis(self) -> list["ChowClass"]:
        return [b for n in range(self.dim + 1) for b in self.basis(n)]

    def unit_vector(self, n: int, i: int) -> "ChowClass":
        parts = [tuple(Fraction(0) for _ in self._quot[k]) for k in range(self.dim + 1)]
        parts[n] = tuple(Fraction(int(j == i)) for j in range(len(self._quot[n])))
        return ChowClass(self, tuple(parts))

    def zero(self) -> "ChowClass":
        return ChowClass(self, tuple(tuple(Fraction(0) for _ in self._quot[k]) for k in range(self.dim + 1)))

    def one(self) -> "ChowClass":
        return self.phi(PPSection(self.complex, 0, {c.id: Polynomial.constant(c.variables, 1) for c in self.complex.maximal_cones}))

    def representative(self, n: int, coords: Sequence) -> PPSection:
        vec = [Fraction(0)] * len(self._spaces[n].slots)
        for c, q in zip(coords, self._quot[n]):
            if c:
                for k, x in enumerate(q):
                    vec[k] += c * x
        return self._spaces[n].section(vec)

    def reduce(self, s: PPSection) -> tuple[Fraction, ...]:
        n = s.degree
        if n > self.dim:
            return ()
        cols = self._solver[n]
        v = self._spaces[n].vector(s)
        if not cols:
            return ()
        sol = solve_rational([list(r) for r in zip(*cols)], v)
        if sol is None:
            raise ChowError("section does not lie in PP")
        return tuple(sol[: len(self._quot[n])])

    def phi(self, s: PPSection) -> "ChowClass":
        if s.complex != self.complex:
            raise ChowError("section lives on a different complex")
        out = list(self.zero().parts)
        if s.degree <= self.dim:
            out[s.degree] = self.reduce(s)
        return ChowClass(self, tuple(out))

    def divisor(self, label: str) -> PPSection:
        """The piecewise linear function that is the coordinate of every ray labeled ``label``."""
        per = {}
        for c in self.complex.maximal_cones:
            per[c.id] = Polynomial.linear(c.variables, [int(lab == label) for lab in c.ray_labels])
        return PPSection(self.complex, 1, per)

    def multiply(self, x: "ChowClass", y: "ChowClass") -> "ChowClass":
        out = [[Fraction(0)] * len(self._quot[k]) for k in range(self.dim + 1)]
        for a in range(self.dim + 1):
            for i, xa in enumerate(x.parts[a]):
                if not xa:
                    continue
                for b in range(self.dim + 1 - a):
                    for j, yb in enumerate(y.parts[b]):
                        if not yb:
                            continue
                        for k, c in enumerate(self.structure_constant(a, i, b, j)):
                            out[a + b][k] += xa * yb * c
        return ChowClass(self, tuple(tuple(p) for p in out))

    def structure_constant(self, a: int, i: int, b: int, j: int) -> tuple[Fraction, ...]:
        key = (a, i, b, j)
        if key not in self._mult:
            ea = [Fraction(int(k == i)) for k in range(len(self._quot[a]))]
            eb = [Fraction(int(k == j)) for k in range(len(self._quot[b]))]
            prod = self.representative(a, ea) * self.representative(b, eb)
            self._mult[key] = self.reduce(prod)
        return self._mult[key]

    def multiplication_table(self) -> dict:
        table = {}
        for a in range(self.dim + 1):
            for b in range(a, self.dim + 1 - a):
                for i in range(len(self._quot[a])):
                    for j in range(len(self._quot[b])):
                        table[f"{a}.{i}*{b}.{j}"] = [jsonio.encode_rational(c) for c in self.structure_constant(a, i, b, j)]
        return table

    def degree(self, x: "ChowClass") -> Fraction:
        if not self.complete:
            raise ChowError("degree needs a complete fan")
        return x.parts[self.dim][0] if x.parts[self.dim] else Fraction(0)

    def basis_representatives(self) -> dict:
        out = {}
        for n in range(self.dim + 1):
            out[str(n)] = [self.representative(n, [int(j == i) for j in range(len(self._quot[n]))]).to_dict() for i in range(len(self._quot[n]))]
        return out

    # -------------------------------------------------------------- geometry

    def locate(self, w: Sequence[int]) -> tuple[str, tuple[Fraction, ...]]:
        """A maximal cone containing ``w`` and the coordinates of ``w`` in it."""
        for c in self.complex.maximal_cones:
            gens = self.vectors[c.id]
            if len(gens) != self.dim:
                continue
            coords = mat_vec(self._inverse(c.id), w)
            if all(x >= 0 for x in coords):
                return c.id, coords
        raise ChowError(f"vector {list(w)} lies outside the support")

    @cached_property
    def _inverses(self) -> dict:
        return {}

    def _inverse(self, cid: str):
        if cid not in self._inverses:
            gens = self.vectors[cid]
            self._inverses[cid] = inverse_rational([[g[i] for g in gens] for i in range(self.dim)])
        return self._inverses[cid]

    def pull_section(self, s: PPSection, finer: "ChowRing") -> PPSection:
        """Pull a section on this ring's complex back to a finer ring's complex."""
        per = {}
        for c in finer.complex.maximal_cones:
            gens = finer.vectors[c.id]
            mid = [sum(gens[k][i] for k in range(len(gens))) for i in range(self.dim)]
            cid, _ = self.locate(mid)
            cols = [mat_vec(self._inverse(cid), g) for g in gens]
            if any(x < 0 for col in cols for x in col):
                raise ChowError(f"cone {c.id!r} of the finer fan is not inside cone {cid!r}")
            matrix = [[col[i] for col in cols] for i in range(self.dim)]
            per[c.id] = substitute_linear(s.per_cone[cid], matrix, c.variables)
        return PPSection(finer.complex, s.degree, per)


@dataclass(frozen=True, eq=False)
class ChowClass:
    ring: ChowRing
    parts: tuple[tuple[Fraction, ...], ...]

    def __add__(self, other: "ChowClass") -> "ChowClass":
        self._same(other)
        return ChowClass(self.ring, tuple(tuple(a + b for a, b in zip(p, q)) for p, q in zip(self.parts, other.parts)))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "ChowClass":
        return ChowClass(self.ring, tuple(tuple(Fraction(k) * a for a in p) for p in self.parts))

    def __mul__(self, other):
        if isinstance(other, ChowClass):
            self._same(other)
            return self.ring.multiply(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self.ring.one()
        for _ in range(n):
            out = out * self
        return out

    def _same(self, other):
        if other.ring is not self.ring:
            raise ChowError("classes in different rings")

    def __eq__(self, other):
        return isinstance(other, ChowClass) and other.ring is self.ring and other.parts == self.parts

    def __hash__(self):
        return hash(self.parts)

    def is_zero(self) -> bool:
        return not any(any(p) for p in self.parts)

    def degree(self) -> Fraction:
        return self.ring.degree(self)

    def graded(self) -> list[list]:
        return [[jsonio.encode_rational(x) for x in p] for p in self.parts]

    def __repr__(self):
        return f"ChowClass({self.graded()})"


def chow_ring(fan: SmoothFan) -> ChowRing:
    return ChowRing(fan.as_complex(), fan.vectors(), fan.dim, isinstance(fan, CompleteFan))


def phi(s: PPSection, ring: ChowRing | SmoothFan) -> ChowClass:
    if isinstance(ring, SmoothFan):
        ring = chow_ring(ring)
    return ring.phi(s)


def class_from_graded(ring: ChowRing, graded: Sequence[Sequence]) -> ChowClass:
    dims = ring.graded_dimensions
    if len(graded) != len(dims) or any(len(g) != n for g, n in zip(graded, dims)):
        raise ChowError(f"graded coefficients must have shape {list(dims)}")
    return ChowClass(ring, tuple(tuple(jsonio.decode_rational(x) for x in g) for g in graded))


# ---------------------------------------------------------------------------
# subdivisions of fans


def refined_ring(base: ChowRing, sub) -> ChowRing:
    """Chow ring of the refined complex of a smooth subdivision of ``base``."""
    if sub.base != base.complex:
        raise ChowError("subdivision is not of the ring's complex")
    key = id(sub)
    cache = base.__dict__.setdefault("_refined_cache", {})
    if key in cache and cache[key][0] is sub:
        return cache[key][1]
    vectors = {}
    for rid, (bid, rays) in sub.containment.items():
        gens = base.vectors[bid]
        vectors[rid] = tuple(
            tuple(sum(r[k] * gens[k][i] for k in range(len(gens))) for i in range(base.dim)) for r in rays
        )
    ring = ChowRing(sub.refined, vectors, base.dim, base.complete)
    cache[key] = (sub, ring)
    return ring


def refined_fan(fan: SmoothFan, sub) -> SmoothFan:
    """The refined fan as ray vectors and maximal cones."""
    ring = refined_ring(chow_ring(fan), sub)
    rays = sorted({v for vs in ring.vectors.values() for v in vs})
    cones = [tuple(sorted(rays.index(v) for v in ring.vectors[c.id])) for c in ring.complex.maximal_cones]
    return type(fan)(tuple(rays), tuple(sorted(cones)))


def pullback_chow(x: ChowClass, sub, finer: ChowRing | None = None) -> ChowClass:
    finer = finer or refined_ring(x.ring, sub)
    out = finer.zero()
    for n, part in enumerate(x.parts):
        if any(part):
            s = x.ring.representative(n, part)
            out = out + finer.phi(pullback_pp(s, sub))
    return out


def pushforward_chow(x: ChowClass, base: ChowRing, sub=None) -> ChowClass:
    """Adjoint of pullback under the intersection pairings."""
    fine = x.ring
    if not (base.complete and fine.complete):
        raise ChowError("pushforward needs complete fans")
    d = base.dim
    parts = []
    for k in range(d + 1):
        qs = base.basis(k)
        duals = base.basis(d - k)
        if not qs:
            parts.append(())
            continue
        gram = [[base.degree(q * y) for q in qs] for y in duals]
        comp = ChowClass(fine, tuple(p if n == k else tuple(Fraction(0) for _ in p) for n, p in enumerate(x.parts)))
        rhs = []
        for y in duals:
            py = pullback_chow(y, sub, fine) if sub is not None else _pull_geometric(y, fine)
            rhs.append(fine.degree(comp * py))
        sol = solve_rational(gram, rhs)
        if sol is None:
            raise ChowError("intersection pairing is degenerate")
        parts.append(tuple(sol))
    return ChowClass(base, tuple(parts))


def _pull_geometric(x: ChowClass, finer: ChowRing) -> ChowClass:
    out = finer.zero()
    for n, part in enumerate(x.parts):
        if any(part):
            out = out + finer.phi(x.ring.pull_section(x.ring.representative(n, part), finer))
    return out


def pullback_geometric(x: ChowClass, finer: ChowRing) -> ChowClass:
    """Pullback to any ring whose fan refines the fan of ``x`` (located by ray vectors)."""
    return _pull_geometric(x, finer)


@dataclass(frozen=True, eq=False)
class LogChowClass:
    base: ChowRing
    subdivision: object
    cls: ChowClass

    def __post_init__(self):
        if self.cls.ring.complex != self.subdivision.refined:
            raise ChowError("class does not live on the refined fan")

    @classmethod
    def of(cls, base: ChowRing, sub, x: ChowClass) -> "LogChowClass":
        return cls(base, sub, x)

    def refine(self, sub2) -> "LogChowClass":
        """The same class seen on a further subdivision of the base."""
        if not sub2.refines(self.subdivision):
            raise ChowError("not a refinement")
        ring2 = refined_ring(self.base, sub2)
        return LogChowClass(self.base, sub2, pullback_geometric(self.cls, ring2))

    def equals(self, other: "LogChowClass") -> bool:
        from .subdivision import common_refine

        common = common_refine(self.subdivision, other.subdivision)
        return self.refine(common).cls.parts == other.refine(common).cls.parts


def log_pushforward(z: LogChowClass) -> ChowClass:
    return pushforward_chow(z.cls, z.base, z.subdivision)


# ---------------------------------------------------------------------------
# open restriction


def star_ring(fan: SmoothFan, cone: Sequence[int]) -> tuple[ChowRing, ConeComplex]:
    """Chow ring of the open star of ``cone`` as a subcomplex of the fan's complex."""
    cx = fan.as_complex()
    ids = [fan.cone_id(c) for c in fan.maximal_cones if set(cone) <= set(c)]
    sub = subcomplex(cx, ids)
    vectors = {k: v for k, v in fan.vectors().items() if k in {c.id for c in sub.cones}}
    return ChowRing(sub, vectors, fan.dim, False), sub


def restrict_section(s: PPSection, sub: ConeComplex) -> PPSection:
    return PPSection(sub, s.degree, {c.id: s.on(c.id) for c in sub.maximal_cones})


def restrict_class(x: ChowClass, target: ChowRing) -> ChowClass:
    out = target.zero()
    for n, part in enumerate(x.parts):
        if any(part):
            out = out + target.phi(restrict_section(x.ring.representative(n, part), target.complex))
    return out
