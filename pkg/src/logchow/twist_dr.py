"""Twisting functions on tropical curves and the fan of subcones where they exist.

A twist for a divisor ``d`` on a cone ``K`` of the base is a slope vector
``mu`` with ``div(mu) = -d`` whose cycle conditions vanish identically on
``K``.  For a fixed ``mu`` the cycle conditions cut out a subspace, and its
intersection with the base orthant is a "piece".  The Ext fan is formed by
the maximal pieces, decomposed into simplicial cones.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Sequence

from . import kernels
from .exact_algebra import determinant, inverse_rational, normalize_sign, primitive
from .polyhedral import RationalCone, dot, pulling_triangulation
from .tropical_curve import Divisor, PLFunction, TropicalCurve, divisor_of_slopes

Slopes = tuple[int, ...]
Ray = tuple[int, ...]


class TwistError(ValueError):
    """Raised on invalid twisting problems."""


class DiscontinuityError(TwistError):
    """Raised when correction data disagree across a shared face."""


def default_bound(curve: TropicalCurve, d: Divisor) -> int:
    return sum(abs(x) for x in d.multidegree.values()) * len(curve.edges)


def certified_bound(curve: TropicalCurve, d: Divisor) -> int | None:
    """A slope bound known to be exhaustive, when one is available.

    Trees need only the forced slopes.  With one independent cycle, twists
    differ by a constant flow around the cycle and the bound ``sum |d|``
    covers every point of the base.
    """
    if curve.betti == 0:
        return max((abs(x) for x in curve.slopes_for_divisor((-d).multidegree)), default=0)
    if curve.betti == 1:
        return sum(abs(x) for x in d.multidegree.values())
    return None


def _as_divisors(curve: TropicalCurve, ds) -> tuple[Divisor, ...]:
    if isinstance(ds, Divisor):
        ds = (ds,)
    elif ds and all(isinstance(x, int) for x in ds):
        ds = (ds,)
    out = []
    for d in ds:
        d = d if isinstance(d, Divisor) else Divisor.of(curve, d)
        if set(d.multidegree) - set(curve.vertex_ids):
            raise TwistError("divisor names vertices outside the curve")
        if d.total != 0:
            raise TwistError(f"divisor {d.vector(curve)} has total degree {d.total}, expected 0")
        out.append(Divisor.of(curve, d.multidegree))
    return tuple(out)


@dataclass(frozen=True)
class TwistProblem:
    curve: TropicalCurve
    divisors: tuple[Divisor, ...]
    slope_bound: int | None = None
    certified: bool = False

    def __post_init__(self):
        object.__setattr__(self, "divisors", _as_divisors(self.curve, self.divisors))
        if self.slope_bound is not None and self.slope_bound < 0:
            raise TwistError("slope bound must be nonnegative")

    @property
    def divisor(self) -> Divisor:
        if len(self.divisors) != 1:
            raise TwistError("problem carries several divisors")
        return self.divisors[0]

    def bound(self, i: int = 0) -> int:
        if self.slope_bound is not None:
            return self.slope_bound
        return default_bound(self.curve, self.divisors[i])

    def is_complete(self, i: int = 0) -> bool:
        if self.certified:
            return True
        cb = certified_bound(self.curve, self.divisors[i])
        return cb is not None and self.bound(i) >= cb


@dataclass(frozen=True)
class TwistCertificate:
    slopes: Slopes

    def to_dict(self) -> dict:
        return {str(i): s for i, s in enumerate(self.slopes)}


# ---------------------------------------------------------------------------
# enumeration


@lru_cache(maxsize=4096)
def candidates(curve: TropicalCurve, dvec: tuple[int, ...], bound: int) -> tuple[Slopes, ...]:
    """All slope vectors with ``div = -d`` and entries bounded by ``bound``, in lex order."""
    target = {v: -x for v, x in zip(curve.vertex_ids, dvec)}
    base = curve.slopes_for_divisor(target)
    cycles = [z for z in curve.fundamental_cycles]
    return tuple(kernels.coset_points(list(base), [list(z) for z in cycles], bound))


@lru_cache(maxsize=65536)
def _forms(curve: TropicalCurve, mu: Slopes) -> tuple[tuple[int, ...], ...]:
    return tuple(f for f in curve.cycle_forms(mu) if any(f))


def is_twist_on(curve: TropicalCurve, d: Divisor, mu: Sequence[int], generators: Sequence[Sequence[int]]) -> bool:
    """Exact check that ``mu`` twists ``d`` identically on the cone spanned by ``generators``."""
    mu = tuple(mu)
    if divisor_of_slopes(curve, mu) != -d:
        return False
    return all(dot(f, g) == 0 for f in _forms(curve, mu) for g in generators)


def _valid_on(curve: TropicalCurve, mu: Slopes, rays: Sequence[Ray]) -> bool:
    return all(dot(f, g) == 0 for f in _forms(curve, mu) for g in rays)


@lru_cache(maxsize=65536)
def _piece_rays(forms: tuple[tuple[int, ...], ...], k: int) -> tuple[Ray, ...]:
    return tuple(kernels.orthant_rays([list(f) for f in forms], k))


def find_twist(p: TwistProblem, cone: Sequence[Sequence[int]] | None = None, which: int = 0) -> TwistCertificate | None:
    """Lexicographically smallest bounded twist valid on ``cone`` (default: the whole base)."""
    k = p.curve.base_dim
    gens = [tuple(g) for g in cone] if cone is not None else [tuple(int(i == j) for j in range(k)) for i in range(k)]
    for g in gens:
        if len(g) != k or any(x < 0 for x in g):
            raise TwistError(f"generator {list(g)} is not in the base cone")
    d = p.divisors[which]
    for mu in candidates(p.curve, d.vector(p.curve), p.bound(which)):
        if _valid_on(p.curve, mu, gens):
            return TwistCertificate(mu)
    return None


@dataclass(frozen=True)
class Piece:
    rays: tuple[Ray, ...]
    certificate: tuple[Slopes, ...]

    @property
    def dim(self) -> int:
        if not self.rays:
            return 0
        return RationalCone(self.rays, len(self.rays[0])).dim


@lru_cache(maxsize=4096)
def _single_pieces(curve: TropicalCurve, dvec: tuple[int, ...], bound: int) -> tuple[Piece, ...]:
    groups: dict[tuple[Ray, ...], Slopes] = {}
    k = curve.base_dim
    for mu in candidates(curve, dvec, bound):
        rays = _piece_rays(_forms(curve, mu), k)
        if rays not in groups:
            groups[rays] = mu
    pieces = [Piece(r, (mu,)) for r, mu in groups.items()]
    return _maximal(pieces)


@lru_cache(maxsize=262144)
def _cone_contains(outer: tuple[Ray, ...], inner: tuple[Ray, ...]) -> bool:
    if not outer:
        return not inner
    cone = RationalCone(outer, len(outer[0]))
    return all(cone.contains(r) for r in inner)


def _maximal(pieces: Sequence[Piece]) -> tuple[Piece, ...]:
    out = [p for p in pieces if not any(q.rays != p.rays and _cone_contains(q.rays, p.rays) for q in pieces)]
    return tuple(sorted(out, key=lambda p: p.rays))


@lru_cache(maxsize=262144)
def _min_certificate(curve: TropicalCurve, dvec: tuple[int, ...], bound: int, rays: tuple[Ray, ...]) -> Slopes | None:
    for mu in candidates(curve, dvec, bound):
        if _valid_on(curve, mu, rays):
            return mu
    return None


# ---------------------------------------------------------------------------
# the Ext fan


@dataclass(frozen=True)
class SimplicialCone:
    generators: tuple[Ray, ...]
    certificate: tuple[Slopes, ...]


@dataclass(frozen=True, eq=False)
class ExtFan:
    curve: TropicalCurve
    divisors: tuple[Divisor, ...]
    bounds: tuple[int, ...]
    pieces: tuple[Piece, ...]
    complete: bool
    height: int | None = None

    @property
    def base_dim(self) -> int:
        return self.curve.base_dim

    @property
    def support(self) -> frozenset[tuple[Ray, ...]]:
        return frozenset(p.rays for p in self.pieces)

    def certificate_for(self, rays: Sequence[Ray]) -> tuple[Slopes, ...] | None:
        rays = tuple(tuple(r) for r in rays)
        out = []
        for d, b in zip(self.divisors, self.bounds):
            mu = _min_certificate(self.curve, d.vector(self.curve), b, rays)
            if mu is None:
                return None
            out.append(mu)
        return tuple(out)

    @cached_property
    def maximal_cones(self) -> tuple[SimplicialCone, ...]:
        k = self.base_dim
        cells = _arrangement_cells([p.rays for p in self.pieces], k)
        simplices: set[tuple[Ray, ...]] = set()
        for c in cells:
            if not c.rays:
                simplices.add(())
                continue
            simplices.update(pulling_triangulation(c))
        out = []
        for s in sorted(simplices):
            cert = self.certificate_for(s)
            if cert is None:
                raise TwistError(f"no certificate on the cell {list(s)}")
            out.append(SimplicialCone(tuple(s), cert))
        return tuple(out)

    def contains_point(self, x: Sequence[int]) -> bool:
        x = tuple(x)
        return any(p.rays and _cone_contains(p.rays, (x,)) for p in self.pieces) or not any(x)

    def to_dict(self) -> dict:
        cones = []
        for c in self.maximal_cones:
            certs = [{str(i): s for i, s in enumerate(mu)} for mu in c.certificate]
            cones.append({"generators": [list(g) for g in c.generators], "certificate": certs[0] if len(certs) == 1 else certs})
        bounds = {"B": self.bounds[0] if len(self.bounds) == 1 else list(self.bounds), "H": self.height}
        return {
            "base_cone": {"dim": self.base_dim},
            "maximal_cones": cones,
            "complete": self.complete,
            "bounds": bounds,
        }


def _hyperplane(h: Sequence[int]) -> tuple[int, ...]:
    return normalize_sign(primitive(h))


def _arrangement_cells(piece_rays: Sequence[tuple[Ray, ...]], k: int) -> list[RationalCone]:
    """Common refinement of the pieces by their facet and span hyperplanes."""
    cones = [RationalCone(r, k) for r in piece_rays if r]
    if not cones:
        return [RationalCone([], k)] if piece_rays else []
    hyper = set()
    for c in cones:
        hyper.update(_hyperplane(h) for h in c.facets)
        hyper.update(_hyperplane(h) for h in c.equations)
    hyper = sorted(hyper)
    cells: set[RationalCone] = set()
    for c in cones:
        parts = [c]
        for h in hyper:
            nxt = []
            for x in parts:
                vals = [dot(h, r) for r in x.rays]
                if any(v > 0 for v in vals) and any(v < 0 for v in vals):
                    nxt.extend(y for y in x.split(h) if y.dim == x.dim)
                else:
                    nxt.append(x)
            parts = nxt
        cells.update(parts)
    cells_list = sorted(cells, key=lambda c: c.rays)
    return [c for c in cells_list if not any(d != c and d.contains_cone(c) for d in cells_list)]


def ext_fan(p: TwistProblem, height: int | None = None) -> ExtFan:
    """Maximal pieces for each divisor of the problem (their common refinement for several)."""
    if len(p.divisors) > 1:
        return tuple_ext_fan(p.curve, p.divisors, p.slope_bound, height=height, certified=p.certified)
    d = p.divisor
    pieces = _single_pieces(p.curve, d.vector(p.curve), p.bound())
    return ExtFan(p.curve, (d,), (p.bound(),), pieces, p.is_complete(), height)


@lru_cache(maxsize=262144)
def _intersect(curve: TropicalCurve, forms: tuple[tuple[int, ...], ...]) -> tuple[Ray, ...]:
    return _piece_rays(forms, curve.base_dim)


def tuple_ext_fan(
    curve: TropicalCurve,
    ds,
    bound: int | None = None,
    height: int | None = None,
    certified: bool = False,
) -> ExtFan:
    """Subcones admitting a simultaneous twist of every divisor in ``ds``."""
    divisors = _as_divisors(curve, ds)
    problems = [TwistProblem(curve, (d,), bound, certified) for d in divisors]
    singles = [_single_pieces(curve, d.vector(curve), q.bound()) for d, q in zip(divisors, problems)]
    bounds = tuple(q.bound() for q in problems)
    found: dict[tuple[Ray, ...], None] = {}
    for combo in product(*singles):
        forms = tuple(sorted({f for piece in combo for f in _forms(curve, piece.certificate[0])}))
        found.setdefault(_intersect(curve, forms), None)
    pieces = []
    for rays in found:
        cert = tuple(_min_certificate(curve, d.vector(curve), b, rays) for d, b in zip(divisors, bounds))
        pieces.append(Piece(rays, cert))
    complete = all(q.is_complete() for q in problems)
    return ExtFan(curve, divisors, bounds, _maximal(pieces), complete, height)


# ---------------------------------------------------------------------------
# pointwise checks


def integer_points(k: int, height: int, include_zero: bool = False) -> list[tuple[int, ...]]:
    pts = [p for p in product(range(height + 1), repeat=k)]
    return pts if include_zero else [p for p in pts if any(p)]


def twistable_at(curve: TropicalCurve, ds, bound: int | None, points: Sequence[Sequence[int]]) -> list[bool]:
    """For each point, whether every divisor admits a bounded twist there."""
    divisors = _as_divisors(curve, ds)
    result = [True] * len(points)
    for d in divisors:
        b = bound if bound is not None else default_bound(curve, d)
        families = [list(_forms(curve, mu)) for mu in candidates(curve, d.vector(curve), b)]
        hits = kernels.twistable_points([list(p) for p in points], families)
        result = [a and h for a, h in zip(result, hits)]
    return result


# ---------------------------------------------------------------------------
# almost twistable


@dataclass(frozen=True)
class AlmostTwistReport:
    ok: bool
    failing_cones: tuple[str, ...]
    twistable_outside: tuple[tuple[int, ...], ...]
    non_liftable: tuple[tuple[int, ...], ...]
    height: int
    bound: int

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "failing_cones": list(self.failing_cones),
            "twistable_outside": [list(p) for p in self.twistable_outside],
            "non_liftable": [list(p) for p in self.non_liftable],
            "height": self.height,
            "bound": self.bound,
        }


def _global_rays(sub, cid: str) -> tuple[Ray, ...]:
    """Rays of a refined cone in the coordinates of the single top cone of the base."""
    bid, rays = sub.containment[cid]
    tops = sub.base.maximal_cones
    if len(tops) != 1:
        raise TwistError("the subdivision must be of a single base cone")
    top = tops[0]
    f = sub.base.face_of(top.id, [])
    for g in sub.base.maps_into(top.id):
        if g.source == bid:
            f = g
            break
    return tuple(f.push(r, top.dim) for r in rays)


def is_almost_twistable(p: TwistProblem, sub, U: Sequence[str], alpha, height: int) -> AlmostTwistReport:
    """Check the two almost-twistable conditions up to ``height`` and the slope bound.

    ``alpha`` is a PLFunction (one slope vector everywhere) or a mapping from
    cones of ``U`` to slope vectors or PLFunctions.  Condition (2) is tested
    at integer points outside ``U``: none of them may admit a bounded twist.
    """
    refined = sub.refined
    U = tuple(U)
    ids = {c.id for c in refined.cones}
    for cid in U:
        if cid not in ids:
            raise TwistError(f"{cid!r} is not a cone of the subdivision")
        for f in refined.maps_into(cid):
            if f.source not in U:
                raise TwistError(f"U is not a subfan: face {f.source!r} of {cid!r} is missing")
    d = p.divisor
    failing = []
    for cid in U:
        if isinstance(alpha, PLFunction):
            mu = alpha.slopes
        elif cid in alpha:
            a = alpha[cid]
            mu = a.slopes if isinstance(a, PLFunction) else tuple(a)
        else:
            failing.append(cid)
            continue
        if not is_twist_on(p.curve, d, mu, _global_rays(sub, cid)):
            failing.append(cid)
    k = p.curve.base_dim
    ucones = [RationalCone(_global_rays(sub, cid), k) for cid in U if refined.cone(cid).dim > 0]
    outside = [x for x in integer_points(k, height) if not any(c.contains(x) for c in ucones)]
    flags = twistable_at(p.curve, (d,), p.bound(), outside)
    twistable = tuple(x for x, f in zip(outside, flags) if f)
    stuck = tuple(x for x, f in zip(outside, flags) if not f)
    return AlmostTwistReport(not failing and not twistable, tuple(failing), twistable, stuck, height, p.bound())


# ---------------------------------------------------------------------------
# eta correction


@dataclass(frozen=True)
class EtaPiece:
    generators: tuple[Ray, ...]
    forms: tuple[tuple[int, ...], ...]
    values: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class EtaCorrection:
    """Per maximal cone and divisor: the linear function ``-sum mu_e^2 l_e``.

    ``forms`` are coefficient vectors on the base coordinates, ``values`` the
    values on the cone generators.
    """

    pieces: tuple[EtaPiece, ...]

    def value_at(self, x: Sequence[int], which: int = 0) -> int:
        for p in self.pieces:
            if not p.generators:
                continue
            if RationalCone(p.generators, len(x)).contains(x):
                return dot(p.forms[which], x)
        raise TwistError(f"point {list(x)} lies outside the fan")

    def to_dict(self) -> dict:
        return {
            "cones": [
                {"generators": [list(g) for g in p.generators], "forms": [list(f) for f in p.forms], "values": [list(v) for v in p.values]}
                for p in self.pieces
            ]
        }


def eta_form(curve: TropicalCurve, mu: Sequence[int]) -> tuple[int, ...]:
    form = [0] * curve.base_dim
    for e, s in zip(curve.edges, mu):
        form[e.length_ray] -= s * s
    return tuple(form)


def eta_correction(curve: TropicalCurve, fan: ExtFan) -> EtaCorrection:
    pieces = []
    for c in fan.maximal_cones:
        forms = tuple(eta_form(curve, mu) for mu in c.certificate)
        values = tuple(tuple(dot(f, g) for g in c.generators) for f in forms)
        pieces.append(EtaPiece(c.generators, forms, values))
    seen: dict[Ray, tuple[int, ...]] = {}
    for p in pieces:
        for i, g in enumerate(p.generators):
            v = tuple(vals[i] for vals in p.values)
            if g in seen and seen[g] != v:
                raise DiscontinuityError(f"correction jumps at the ray {list(g)}: {seen[g]} vs {v}")
            seen[g] = v
    return EtaCorrection(tuple(pieces))


def eta_refinement_stable(curve: TropicalCurve, fan: ExtFan) -> bool:
    """Star-subdivide every maximal cone at its barycenter and recompute."""
    eta = eta_correction(curve, fan)
    for piece in eta.pieces:
        gens = piece.generators
        if len(gens) < 2:
            continue
        bary = primitive([sum(g[i] for g in gens) for i in range(len(gens[0]))])
        for drop in range(len(gens)):
            cell = gens[:drop] + gens[drop + 1:] + (bary,)
            cert = fan.certificate_for(cell)
            if cert is None:
                return False
            for which, mu in enumerate(cert):
                f = eta_form(curve, mu)
                if any(dot(f, g) != dot(piece.forms[which], g) for g in cell):
                    return False
    return True


# ---------------------------------------------------------------------------
# GL invariance


def _apply(M: Sequence[Sequence[int]], vectors: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    n = len(vectors[0]) if vectors else 0
    return [tuple(sum(M[i][j] * vectors[j][c] for j in range(len(vectors))) for c in range(n)) for i in range(len(M))]


def gl_invariance_report(curve: TropicalCurve, ds, M: Sequence[Sequence[int]], bound: int | None = None) -> dict:
    divisors = _as_divisors(curve, ds)
    r = len(divisors)
    if len(M) != r or any(len(row) != r for row in M):
        raise TwistError(f"matrix must be {r}x{r}")
    det = determinant(M)
    if abs(det) != 1:
        raise TwistError(f"matrix has determinant {det}; it must be unimodular")
    Minv = [[int(x) for x in row] for row in inverse_rational(M)]
    vecs = [d.vector(curve) for d in divisors]
    mds = [Divisor.of(curve, v) for v in _apply(M, vecs)]
    f1 = tuple_ext_fan(curve, divisors, bound)
    f2 = tuple_ext_fan(curve, mds, bound)
    same_support = f1.support == f2.support
    problems = []

    def check(fan: ExtFan, mat, targets: Sequence[Divisor]):
        for piece in fan.pieces:
            moved = _apply(mat, piece.certificate)
            for d, mu in zip(targets, moved):
                if not is_twist_on(curve, d, mu, piece.rays):
                    problems.append({"piece": [list(x) for x in piece.rays], "slopes": list(mu)})

    check(f1, M, mds)
    check(f2, Minv, divisors)
    return {
        "ok": same_support and not problems,
        "same_support": same_support,
        "certificate_failures": problems,
        "pieces": [[list(x) for x in rays] for rays in sorted(f1.support)],
        "transformed_divisors": [list(d.vector(curve)) for d in mds],
    }


def gl_invariance_check(curve: TropicalCurve, ds, M: Sequence[Sequence[int]], bound: int | None = None) -> bool:
    return gl_invariance_report(curve, ds, M, bound)["ok"]
