"""Exact arithmetic substrate: rationals, lattice vectors, sparse polynomials,
integer matrices and their normal forms.

Nothing in this package touches floating point. Rationals are
:class:`fractions.Fraction`; lattice vectors are tuples of ``int``; integer
matrices are tuples of row tuples.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from math import gcd
from typing import Iterable, Mapping, Sequence

Rational = Fraction
LatticeVector = tuple[int, ...]
IntegerMatrix = tuple[tuple[int, ...], ...]
# sparse exponent multi-index: sorted ((variable index, power), ...) with power > 0
Exponent = tuple[tuple[int, int], ...]


class DimensionError(ValueError):
    pass


def as_matrix(rows: Iterable[Iterable[int]], ncols: int | None = None) -> IntegerMatrix:
    """Freeze ``rows`` into an :data:`IntegerMatrix`, checking it is rectangular."""
    m = tuple(tuple(int(x) for x in r) for r in rows)
    widths = {len(r) for r in m}
    if len(widths) > 1:
        raise DimensionError(f"ragged matrix with row lengths {sorted(widths)}")
    if ncols is not None and m and len(m[0]) != ncols:
        raise DimensionError(f"expected {ncols} columns, got {len(m[0])}")
    return m


def identity(n: int) -> IntegerMatrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> tuple:
    if not a:
        return ()
    inner = len(a[0])
    if len(b) != inner:
        raise DimensionError(f"cannot multiply {len(a)}x{inner} by {len(b)}x?")
    ncols = len(b[0]) if b else 0
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(ncols))
        for i in range(len(a))
    )


def mat_vec(a: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def transpose(a: Sequence[Sequence], ncols: int | None = None) -> tuple:
    if not a:
        return tuple(() for _ in range(ncols or 0))
    return tuple(tuple(row[j] for row in a) for j in range(len(a[0])))


def primitive(v: Sequence) -> LatticeVector:
    """Scale a rational vector to the primitive integer vector on its ray."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def normalize_sign(v: Sequence[int]) -> LatticeVector:
    """Flip ``v`` so its first nonzero entry is positive."""
    for x in v:
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


# ---------------------------------------------------------------------------
# linear algebra over Q


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    """Scale each row by the lcm of its denominators (row scaling keeps the row space)."""
    out = []
    for r in rows:
        r = [x if isinstance(x, int) else Fraction(x) for x in r]
        den = 1
        for x in r:
            if not isinstance(x, int) and x.denominator != 1:
                den = den * x.denominator // gcd(den, x.denominator)
        out.append([int(x * den) for x in r])
    return out


def _row_gcd_reduce(row: list[int]) -> list[int]:
    g = 0
    for x in row:
        g = gcd(g, x)
        if g == 1:
            return row
    return [x // g for x in row] if g > 1 else row


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q. Returns (nonzero rows, pivot columns).

    Elimination runs fraction-free on integer rows; only the final
    normalization by the pivots produces fractions.
    """
    m = _integer_rows(rows)
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pr = m[r]
        p = pr[c]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = _row_gcd_reduce([p * x - f * y for x, y in zip(m[i], pr)])
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    out = [[Fraction(x, row[c]) for x in row] for row, c in zip(m[:r], pivots)]
    return out, pivots


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    m = _integer_rows(rows)
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pr = m[r]
        p = pr[c]
        for i in range(r + 1, len(m)):
            if m[i][c] != 0:
                f = m[i][c]
                m[i] = _row_gcd_reduce([p * x - f * y for x, y in zip(m[i], pr)])
        r += 1
        if r == len(m):
            break
    return r


def rational_kernel(m: Sequence[Sequence[int]], ncols: int | None = None) -> list[LatticeVector]:
    """Basis of ``{v : m v = 0}`` over Q, each vector primitive integral with
    first nonzero entry positive."""
    if ncols is None:
        if not m:
            raise DimensionError("ncols required for an empty matrix")
        ncols = len(m[0])
    red, pivots = rref(m, ncols) if m else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(normalize_sign(primitive(v)))
    return basis


def solve_rational(a: Sequence[Sequence], b: Sequence) -> tuple[Fraction, ...] | None:
    """One solution of ``a x = b`` over Q (free variables zero), or None."""
    if not a:
        return None if any(b) else ()
    ncols = len(a[0])
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(red, pivots):
        x[p] = row[ncols]
    return tuple(x)


def inverse_rational(a: Sequence[Sequence]) -> tuple[tuple[Fraction, ...], ...]:
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    red, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(red) < n:
        raise ZeroDivisionError("singular matrix")
    return tuple(tuple(row[n:]) for row in red)


def determinant(a: Sequence[Sequence]) -> Fraction:
    m = [[Fraction(x) for x in r] for r in a]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return det


# ---------------------------------------------------------------------------
# integer normal forms


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[IntegerMatrix, IntegerMatrix, IntegerMatrix]:
    """Return ``(U, D, V)`` with ``U @ m @ V == D``, U and V unimodular, D
    diagonal with nonnegative entries forming a divisibility chain."""
    a = [list(map(int, r)) for r in m]
    nr = len(a)
    nc = len(a[0]) if a else 0
    u = [[int(i == j) for j in range(nr)] for i in range(nr)]
    v = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):  # row dst += k * row src
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, k):
        for row in a:
            row[dst] += k * row[src]
        for row in v:
            row[dst] += k * row[src]

    t = 0
    while t < min(nr, nc):
        # smallest nonzero entry in the trailing block becomes the pivot
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            done = True
            for i in range(t + 1, nr):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    add_row(t, i, -q)
                    if a[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, nc):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    add_col(t, j, -q)
                    if a[t][j]:
                        swap_cols(t, j)
                        done = False
            if not done:
                continue
            # divisibility: pivot must divide the rest of the block
            bad = next(
                ((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % a[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return as_matrix(u), as_matrix(a), as_matrix(v)


def elementary_divisors(m: Sequence[Sequence[int]]) -> list[int]:
    _, d, _ = smith_normal_form(m)
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def hermite_rows(rows: Sequence[Sequence[int]]) -> list[LatticeVector]:
    """Row-style Hermite normal form of the lattice spanned by ``rows``:
    echelon, positive pivots, entries above each pivot reduced into
    ``[0, pivot)``. Zero rows dropped. Canonical for the lattice."""
    a = [list(map(int, r)) for r in rows if any(r)]
    if not a:
        return []
    nc = len(a[0])
    r = 0
    for c in range(nc):
        if r == len(a):
            break
        while True:
            nz = [i for i in range(r, len(a)) if a[i][c]]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[p] = a[p], a[r]
            reduced = False
            for i in range(r + 1, len(a)):
                if a[i][c]:
                    q = a[i][c] // a[r][c]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    reduced = True
            if not any(a[i][c] for i in range(r + 1, len(a))):
                break
            if not reduced:
                break
        if a[r][c] == 0:
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
        for i in range(r):
            q = a[i][c] // a[r][c]
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
    return [tuple(row) for row in a[:r] if any(row)]


def integer_kernel(m: Sequence[Sequence[int]], ncols: int | None = None) -> list[LatticeVector]:
    """Z-basis of the saturated lattice ``{v in Z^n : m v = 0}`` in Hermite form."""
    if ncols is None:
        if not m:
            raise DimensionError("ncols required for an empty matrix")
        ncols = len(m[0])
    if not m or not any(any(r) for r in m):
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    _, d, v = smith_normal_form(m)
    rk = sum(1 for i in range(min(len(d), ncols)) if d[i][i])
    cols = [tuple(v[i][j] for i in range(ncols)) for j in range(rk, ncols)]
    return hermite_rows(cols)


def express_in_lattice_basis(basis: Sequence[Sequence[int]], v: Sequence) -> tuple[Fraction, ...] | None:
    """Coordinates of ``v`` in terms of ``basis`` over Q, or None if outside the span."""
    if not basis:
        return () if not any(v) else None
    return solve_rational(transpose(basis), v)


# ---------------------------------------------------------------------------
# polynomials


def _mono_mul(a: Exponent, b: Exponent) -> Exponent:
    d = dict(a)
    for i, e in b:
        d[i] = d.get(i, 0) + e
    return tuple(sorted(d.items()))


def _mono_degree(m: Exponent) -> int:
    return sum(e for _, e in m)


def dense_exponent(m: Exponent, nvars: int) -> tuple[int, ...]:
    out = [0] * nvars
    for i, e in m:
        out[i] = e
    return tuple(out)


def sparse_exponent(dense: Sequence[int]) -> Exponent:
    return tuple((i, int(e)) for i, e in enumerate(dense) if e)


def monomials(nvars: int, degree: int) -> list[Exponent]:
    """All monomials of the given total degree, in lexicographic order of
    their dense exponent vectors (largest first)."""
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        dense = [0] * nvars
        for i in combo:
            dense[i] += 1
        out.append(tuple(dense))
    out.sort(reverse=True)
    return [sparse_exponent(d) for d in out]


class Polynomial:
    """Multivariate polynomial with rational coefficients and sparse exponents.

    Immutable; ``variables`` names the generators in order.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponent, object] | None = None):
        self.variables = tuple(variables)
        clean: dict[Exponent, Fraction] = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c == 0:
                continue
            mono = tuple(sorted((int(i), int(e)) for i, e in mono if e))
            if any(i >= len(self.variables) or i < 0 for i, _ in mono):
                raise DimensionError(f"exponent {mono} out of range for {len(self.variables)} variables")
            clean[mono] = clean.get(mono, Fraction(0)) + c
        self.terms = {m: c for m, c in clean.items() if c != 0}
        self._hash = None

    # constructors
    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Polynomial":
        return cls(variables)

    @classmethod
    def constant(cls, variables: Sequence[str], c) -> "Polynomial":
        return cls(variables, {(): c})

    @classmethod
    def var(cls, variables: Sequence[str], i: int) -> "Polynomial":
        return cls(variables, {((i, 1),): 1})

    @classmethod
    def linear(cls, variables: Sequence[str], coeffs: Sequence) -> "Polynomial":
        return cls(variables, {((i, 1),): c for i, c in enumerate(coeffs)})

    @classmethod
    def from_dense(cls, variables: Sequence[str], terms: Mapping[Sequence[int], object]) -> "Polynomial":
        return cls(variables, {sparse_exponent(k): c for k, c in terms.items()})

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((_mono_degree(m) for m in self.terms), default=-1)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degs = {_mono_degree(m) for m in self.terms}
        if not degs:
            return True
        if len(degs) > 1:
            return False
        return degree is None or degs == {degree}

    def coefficient(self, mono: Exponent) -> Fraction:
        return self.terms.get(tuple(mono), Fraction(0))

    def _check(self, other: "Polynomial"):
        if other.variables != self.variables:
            raise DimensionError(f"variable mismatch: {self.variables} vs {other.variables}")

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.variables, other)
        self._check(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return Polynomial(self.variables, t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.variables, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = Fraction(other)
            return Polynomial(self.variables, {m: c * v for m, v in self.terms.items()})
        self._check(other)
        t: dict[Exponent, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return Polynomial(self.variables, t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Polynomial.constant(self.variables, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.variables == other.variables and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    def evaluate(self, point: Sequence) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            term = c
            for i, e in m:
                term *= Fraction(point[i]) ** e
            total += term
        return total

    def with_variables(self, variables: Sequence[str]) -> "Polynomial":
        """Rename generators (same arity)."""
        if len(variables) != self.nvars:
            raise DimensionError("arity mismatch when renaming variables")
        return Polynomial(variables, self.terms)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.terms.values())

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        n = self.nvars
        return sorted(self.terms.items(), key=lambda kv: dense_exponent(kv[0], n), reverse=True)

    def __repr__(self):
        return f"Polynomial({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = "*".join(
                self.variables[i] if e == 1 else f"{self.variables[i]}^{e}" for i, e in m
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def substitute_linear(p: Polynomial, matrix: Sequence[Sequence], target_variables: Sequence[str]) -> Polynomial:
    """Compose ``p`` with the linear substitution ``x_i = sum_j matrix[i][j] y_j``.

    ``matrix`` has one row per variable of ``p`` and one column per target variable.
    """
    target_variables = tuple(target_variables)
    if len(matrix) != p.nvars:
        raise DimensionError(f"substitution has {len(matrix)} rows, polynomial has {p.nvars} variables")
    for row in matrix:
        if len(row) != len(target_variables):
            raise DimensionError(f"substitution row of length {len(row)} for {len(target_variables)} targets")
    images = [Polynomial.linear(target_variables, row) for row in matrix]
    out = Polynomial.zero(target_variables)
    cache: dict[tuple[int, int], Polynomial] = {}
    for mono, c in p.terms.items():
        term = Polynomial.constant(target_variables, c)
        for i, e in mono:
            key = (i, e)
            if key not in cache:
                cache[key] = images[i] ** e
            term = term * cache[key]
        out = out + term
    return out
