"""Piecewise polynomial functions on cone complexes.

A section of degree n is a homogeneous polynomial on every maximal cone
whose restrictions agree on shared faces.  The integer structure is
computed exactly: the coefficient space of all maximal cones is cut out by
equalities of coefficients, so PP^n has a basis of 0/1 vectors and the
Hermite basis of the integer kernel is that basis up to ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

from . import jsonio
from .cone_complex import ConeComplex, FaceMap
from .exact_algebra import (
    Exponent,
    Polynomial,
    dense_exponent,
    elementary_divisors,
    express_in_lattice_basis,
    integer_kernel,
    inverse_rational,
    monomials,
    substitute_linear,
)


class SectionError(ValueError):
    """Raised when polynomials fail to glue to a section."""


def restrict_polynomial(p: Polynomial, f: FaceMap, source_variables: Sequence[str]) -> Polynomial:
    """Restriction of a polynomial on ``f.target`` to the face ``f.source``.

    Monomials using a ray outside the face vanish; the rest are renumbered.
    """
    back = {j: i for i, j in enumerate(f.ray_assignment)}
    terms = {}
    for mono, c in p.terms.items():
        if all(j in back for j, _ in mono):
            terms[tuple(sorted((back[j], e) for j, e in mono))] = c
    return Polynomial(source_variables, terms)


@dataclass(frozen=True, eq=False)
class PPSection:
    complex: ConeComplex
    degree: int
    per_cone: Mapping[str, Polynomial]

    def __post_init__(self):
        maximal = {c.id for c in self.complex.maximal_cones}
        if set(self.per_cone) != maximal:
            raise SectionError(f"section must give a polynomial on exactly the maximal cones {sorted(maximal)}")
        for cid, p in self.per_cone.items():
            cone = self.complex.cone(cid)
            if p.variables != cone.variables:
                raise SectionError(f"polynomial on {cid!r} uses variables {p.variables}, expected {cone.variables}")
            if not p.is_homogeneous(self.degree):
                raise SectionError(f"polynomial on {cid!r} is not homogeneous of degree {self.degree}")
        object.__setattr__(self, "per_cone", dict(self.per_cone))
        self.check_compatible()

    def on(self, cid: str) -> Polynomial:
        """The polynomial induced on any cone of the complex."""
        if cid in self.per_cone:
            return self.per_cone[cid]
        for c in self.complex.maximal_cones:
            for f in self.complex.maps_into(c.id):
                if f.source == cid:
                    return restrict_polynomial(self.per_cone[c.id], f, self.complex.cone(cid).variables)
        raise SectionError(f"cone {cid!r} lies in no maximal cone")

    def check_compatible(self) -> None:
        cx = self.complex
        induced: dict[str, Polynomial] = {}
        for t in cx.maximal_cones:
            for f in cx.maps_into(t.id):
                if f.source == t.id:
                    continue
                q = restrict_polynomial(self.per_cone[t.id], f, cx.cone(f.source).variables)
                if f.source in induced and induced[f.source] != q:
                    raise SectionError(f"polynomials disagree on the face {f.source!r}")
                induced[f.source] = q

    def _combine(self, other: "PPSection", op, degree: int) -> "PPSection":
        if other.complex != self.complex:
            raise SectionError("sections live on different complexes")
        return PPSection(self.complex, degree, {c: op(p, other.per_cone[c]) for c, p in self.per_cone.items()})

    def __add__(self, other: "PPSection") -> "PPSection":
        if other.degree != self.degree:
            raise SectionError("cannot add sections of different degrees")
        return self._combine(other, lambda a, b: a + b, self.degree)

    def __sub__(self, other: "PPSection") -> "PPSection":
        return self + other.scale(-1)

    def __mul__(self, other):
        if isinstance(other, PPSection):
            return self._combine(other, lambda a, b: a * b, self.degree + other.degree)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, k) -> "PPSection":
        return PPSection(self.complex, self.degree, {c: p * Fraction(k) for c, p in self.per_cone.items()})

    def __pow__(self, n: int) -> "PPSection":
        out = constant_section(self.complex, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        return (
            isinstance(other, PPSection)
            and self.complex == other.complex
            and self.degree == other.degree
            and self.per_cone == other.per_cone
        )

    def __hash__(self):
        return hash((self.degree, tuple(sorted(self.per_cone.items()))))

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.per_cone.values())

    def __repr__(self):
        body = ", ".join(f"{c}: {p}" for c, p in sorted(self.per_cone.items()))
        return f"PPSection(deg {self.degree}; {body})"

    # ---------------------------------------------------------------- json

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "per_cone": {
                cid: {
                    ",".join(map(str, dense_exponent(m, p.nvars))): jsonio.encode_rational(c)
                    for m, c in p.sorted_terms()
                }
                for cid, p in self.per_cone.items()
            },
        }

    @classmethod
    def from_dict(cls, cx: ConeComplex, d: dict) -> "PPSection":
        degree = jsonio.require(d, "degree", int)
        per = {}
        for cid, terms in jsonio.require(d, "per_cone", dict).items():
            cone = cx.cone(cid)
            dense = {}
            for key, coef in terms.items():
                try:
                    exps = tuple(int(x) for x in key.split(",")) if key else ()
                except ValueError as exc:
                    raise jsonio.SchemaError(f"bad monomial key {key!r}") from exc
                if len(exps) != cone.dim:
                    raise jsonio.SchemaError(f"monomial {key!r} has the wrong length for cone {cid!r}")
                dense[exps] = jsonio.decode_rational(coef)
            per[cid] = Polynomial.from_dense(cone.variables, dense)
        return cls(cx, degree, per)

    def to_json(self) -> str:
        return jsonio.dumps(self.to_dict())

    @classmethod
    def from_json(cls, cx: ConeComplex, text: str) -> "PPSection":
        return cls.from_dict(cx, jsonio.loads(text))


def constant_section(cx: ConeComplex, c) -> PPSection:
    return PPSection(cx, 0, {m.id: Polynomial.constant(m.variables, c) for m in cx.maximal_cones})


def linear_section(cx: ConeComplex, per_cone: Mapping[str, Sequence]) -> PPSection:
    """Degree-one section from coefficient vectors on the maximal cones."""
    return PPSection(cx, 1, {cid: Polynomial.linear(cx.cone(cid).variables, v) for cid, v in per_cone.items()})


# ---------------------------------------------------------------------------
# coefficient coordinates


@dataclass(frozen=True)
class CoefficientSpace:
    """Coordinates (maximal cone, monomial) for degree-n polynomial data."""

    complex: ConeComplex
    degree: int
    slots: tuple[tuple[str, Exponent], ...]

    @property
    def index(self) -> dict[tuple[str, Exponent], int]:
        return {s: i for i, s in enumerate(self.slots)}

    def vector(self, s: PPSection) -> tuple[Fraction, ...]:
        return tuple(s.per_cone[cid].coefficient(m) for cid, m in self.slots)

    def section(self, v: Sequence) -> PPSection:
        per: dict[str, dict] = {c.id: {} for c in self.complex.maximal_cones}
        for (cid, m), x in zip(self.slots, v):
            if x:
                per[cid][m] = x
        return PPSection(
            self.complex,
            self.degree,
            {cid: Polynomial(self.complex.cone(cid).variables, t) for cid, t in per.items()},
        )


def coefficient_space(cx: ConeComplex, n: int) -> CoefficientSpace:
    slots = []
    for c in cx.maximal_cones:
        for m in monomials(c.dim, n):
            slots.append((c.id, m))
    return CoefficientSpace(cx, n, tuple(slots))


def _push_monomial(m: Exponent, f: FaceMap) -> Exponent:
    return tuple(sorted((f.ray_assignment[i], e) for i, e in m))


def compatibility_equations(cx: ConeComplex, n: int) -> tuple[CoefficientSpace, list[tuple[int, int]]]:
    """Pairs of coefficient slots forced to be equal by face restrictions."""
    space = coefficient_space(cx, n)
    idx = space.index
    maximal = {c.id for c in cx.maximal_cones}
    into: dict[str, list[FaceMap]] = {}
    for t in cx.maximal_cones:
        for f in cx.maps_into(t.id):
            if f.source not in maximal:
                into.setdefault(f.source, []).append(f)
    pairs = []
    for sid, maps in into.items():
        for m in monomials(cx.cone(sid).dim, n):
            slots = [idx[(f.target, _push_monomial(m, f))] for f in maps]
            pairs.extend((slots[0], k) for k in slots[1:] if k != slots[0])
    return space, pairs


def _basis_vectors(cx: ConeComplex, n: int) -> tuple[CoefficientSpace, list[tuple[int, ...]]]:
    if n < 0:
        raise ValueError("degree must be nonnegative")
    space, pairs = compatibility_equations(cx, n)
    size = len(space.slots)
    if size == 0:
        return space, []
    rows = []
    for a, b in pairs:
        row = [0] * size
        row[a] += 1
        row[b] -= 1
        rows.append(row)
    return space, integer_kernel(rows, size)


def pp_basis(cx: ConeComplex, n: int) -> list[PPSection]:
    """Integer basis of PP^n, in Hermite (lexicographic echelon) order."""
    space, vecs = _basis_vectors(cx, n)
    return [space.section(v) for v in vecs]


def pp_rank(cx: ConeComplex, n: int) -> int:
    return len(_basis_vectors(cx, n)[1])


def coordinates(s: PPSection, basis: Sequence[PPSection]) -> tuple[Fraction, ...]:
    """Exact coordinates of ``s`` in ``basis``."""
    space = coefficient_space(s.complex, s.degree)
    coords = express_in_lattice_basis([space.vector(b) for b in basis], space.vector(s))
    if coords is None:
        raise SectionError("section is not in the span of the basis")
    return coords


# ---------------------------------------------------------------------------
# global generation


@dataclass(frozen=True)
class GlobalGenReport:
    degree: int
    pp_rank: int
    image_rank: int
    cokernel: tuple[int, ...]

    @property
    def surjective(self) -> bool:
        return not self.cokernel

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "pp_rank": self.pp_rank,
            "image_rank": self.image_rank,
            "cokernel": list(self.cokernel),
            "surjective": self.surjective,
        }


def sym_to_pp(cx: ConeComplex, n: int) -> GlobalGenReport:
    """Image and cokernel of Sym^n PP^1 -> PP^n over the integers."""
    space, target = _basis_vectors(cx, n)
    rank = len(target)
    if n == 0:
        gens = [constant_section(cx, 1)] if cx.maximal_cones else []
    else:
        linear = pp_basis(cx, 1)
        gens = []
        for combo in combinations_with_replacement(range(len(linear)), n):
            p = linear[combo[0]]
            for i in combo[1:]:
                p = p * linear[i]
            gens.append(p)
    rows = []
    for g in gens:
        coords = express_in_lattice_basis(target, space.vector(g))
        if coords is None or any(c.denominator != 1 for c in coords):
            raise SectionError("product of linear sections left the integral lattice")
        rows.append([int(c) for c in coords])
    if rank == 0:
        return GlobalGenReport(n, 0, 0, ())
    divisors = elementary_divisors(rows) if rows else []
    nonzero = [d for d in divisors if d]
    cokernel = tuple(sorted(d for d in nonzero if d > 1)) + (0,) * (rank - len(nonzero))
    return GlobalGenReport(n, rank, len(nonzero), cokernel)


# ---------------------------------------------------------------------------
# subdivisions


def pullback_pp(s: PPSection, sub) -> PPSection:
    """Pull a section back to the refined complex of a smooth subdivision."""
    if sub.base != s.complex:
        raise SectionError("subdivision is not of the section's complex")
    refined = sub.refined
    per = {}
    for r in refined.maximal_cones:
        base_id, rays = sub.containment[r.id]
        p = s.on(base_id)
        matrix = [[ray[i] for ray in rays] for i in range(p.nvars)]
        per[r.id] = substitute_linear(p, matrix, r.variables)
    return PPSection(refined, s.degree, per)


@dataclass(frozen=True, eq=False)
class SubdividedPP:
    subdivision: object
    section: PPSection

    def __post_init__(self):
        if self.section.complex != self.subdivision.refined:
            raise SectionError("section does not live on the refined complex")

    @classmethod
    def from_base(cls, s: PPSection, sub) -> "SubdividedPP":
        return cls(sub, pullback_pp(s, sub))

    def base_polynomials(self) -> list[tuple[str, tuple, Polynomial]]:
        """(base cone, cell rays, polynomial in base coordinates) per full cell."""
        sub = self.subdivision
        out = []
        for r in sub.refined.maximal_cones:
            base_id, rays = sub.containment[r.id]
            base = sub.base.cone(base_id)
            if len(rays) != base.dim:
                continue
            inv = inverse_rational([[ray[i] for ray in rays] for i in range(base.dim)])
            out.append((base_id, rays, substitute_linear(self.section.per_cone[r.id], inv, base.variables)))
        return out


def spp_equal(p: SubdividedPP, q: SubdividedPP) -> bool:
    """Equality as functions, tested on overlapping full-dimensional cells."""
    from .polyhedral import RationalCone

    if p.subdivision.base != q.subdivision.base:
        raise SectionError("subdivided sections over different complexes")
    if p.section.degree != q.section.degree:
        return p.section.is_zero() and q.section.is_zero()
    qcells = q.base_polynomials()
    for base_id, rays, poly in p.base_polynomials():
        dim = len(rays)
        a = RationalCone(rays, dim) if dim else None
        for base2, rays2, poly2 in qcells:
            if base2 != base_id:
                continue
            if dim and a.intersection(RationalCone(rays2, dim)).dim < dim:
                continue
            if poly != poly2:
                return False
    return True
