# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the enumeration kernels (same results as _kernels_py)."""

from libc.stdlib cimport malloc, free


def coset_points(base, cycles, long bound):
    cdef Py_ssize_t n = len(base)
    cdef Py_ssize_t h = len(cycles)
    cdef long *mu0 = <long *> malloc(n * sizeof(long))
    cdef long *z = <long *> malloc((h * n + 1) * sizeof(long))
    cdef long *t = <long *> malloc((h + 1) * sizeof(long))
    cdef long *cur = <long *> malloc(n * sizeof(long))
    cdef Py_ssize_t i, j
    cdef long x
    cdef bint ok
    out = []
    try:
        for i in range(n):
            mu0[i] = base[i]
        for j in range(h):
            row = cycles[j]
            for i in range(n):
                z[j * n + i] = row[i]
            t[j] = -bound
        while True:
            ok = True
            for i in range(n):
                x = mu0[i]
                for j in range(h):
                    x += t[j] * z[j * n + i]
                cur[i] = x
                if x > bound or x < -bound:
                    ok = False
                    break
            if ok:
                out.append(tuple([cur[i] for i in range(n)]))
            j = h - 1
            while j >= 0:
                if t[j] < bound:
                    t[j] += 1
                    break
                t[j] = -bound
                j -= 1
            if j < 0:
                break
    finally:
        free(mu0)
        free(z)
        free(t)
        free(cur)
    out.sort()
    return out


cdef long _gcd(long a, long b):
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


cdef long _det(long *m, Py_ssize_t n):
    # Bareiss elimination in place on an n x n row-major array
    cdef long sign = 1
    cdef long prev = 1
    cdef Py_ssize_t i, j, k, s
    cdef long tmp
    if n == 0:
        return 1
    for k in range(n - 1):
        if m[k * n + k] == 0:
            s = -1
            for i in range(k + 1, n):
                if m[i * n + k] != 0:
                    s = i
                    break
            if s < 0:
                return 0
            for j in range(n):
                tmp = m[k * n + j]
                m[k * n + j] = m[s * n + j]
                m[s * n + j] = tmp
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i * n + j] = (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) // prev
        prev = m[k * n + k]
    return sign * m[(n - 1) * n + (n - 1)]


def orthant_rays(matrix, Py_ssize_t k):
    rows = [list(r) for r in matrix if any(r)]
    cdef Py_ssize_t nrows = len(rows)
    cdef Py_ssize_t size, a, b, c, j, p, idx, rk
    cdef long f, g
    cdef long *work = <long *> malloc((nrows * k + 1) * sizeof(long))
    cdef long *red = <long *> malloc((nrows * k + 1) * sizeof(long))
    cdef long *minor = <long *> malloc((k * k + 1) * sizeof(long))
    cdef long *vec = <long *> malloc((k + 1) * sizeof(long))
    cdef Py_ssize_t *piv = <Py_ssize_t *> malloc((nrows + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *chosen = <Py_ssize_t *> malloc((nrows + 1) * sizeof(Py_ssize_t))
    cdef int pos, neg
    out = []
    from itertools import combinations
    try:
        for a in range(nrows):
            for b in range(k):
                work[a * k + b] = rows[a][b]
        for size in range(1, k + 1):
            for cols in combinations(range(k), size):
                # rank of the column submatrix by fraction-free row reduction
                rk = 0
                for a in range(nrows):
                    for b in range(size):
                        red[rk * size + b] = work[a * k + cols[b]]
                    for p in range(rk):
                        c = piv[p]
                        if red[rk * size + c] != 0:
                            f = red[p * size + c]
                            g = red[rk * size + c]
                            for b in range(size):
                                red[rk * size + b] = g * red[p * size + b] - f * red[rk * size + b]
                    c = -1
                    for b in range(size):
                        if red[rk * size + b] != 0:
                            c = b
                            break
                    if c >= 0:
                        g = 0
                        for b in range(size):
                            g = _gcd(g, red[rk * size + b])
                        for b in range(size):
                            red[rk * size + b] //= g
                        piv[rk] = c
                        chosen[rk] = a
                        rk += 1
                if rk != size - 1:
                    continue
                pos = 0
                neg = 0
                for j in range(size):
                    idx = 0
                    for a in range(rk):
                        for b in range(size):
                            if b != j:
                                minor[idx] = work[chosen[a] * k + cols[b]]
                                idx += 1
                    vec[j] = _det(minor, size - 1)
                    if j % 2 == 1:
                        vec[j] = -vec[j]
                    if vec[j] > 0:
                        pos += 1
                    elif vec[j] < 0:
                        neg += 1
                if pos != size and neg != size:
                    continue
                g = 0
                for j in range(size):
                    g = _gcd(g, vec[j])
                full = [0] * k
                for j in range(size):
                    full[cols[j]] = (vec[j] // g) if pos == size else (-vec[j] // g)
                out.append(tuple(full))
    finally:
        free(work)
        free(red)
        free(minor)
        free(vec)
        free(piv)
        free(chosen)
    out.sort()
    return out


def twistable_points(points, forms):
    cdef Py_ssize_t npts = len(points)
    cdef Py_ssize_t nf = len(forms)
    cdef Py_ssize_t k = len(points[0]) if npts else 0
    cdef Py_ssize_t i, f, r, j, nrows, total, off
    cdef long s
    cdef bint hit, good
    counts = [len(fam) for fam in forms]
    total = sum(counts)
    cdef long *pts = <long *> malloc((npts * k + 1) * sizeof(long))
    cdef long *rows = <long *> malloc((total * k + 1) * sizeof(long))
    cdef Py_ssize_t *start = <Py_ssize_t *> malloc((nf + 1) * sizeof(Py_ssize_t))
    out = []
    try:
        for i in range(npts):
            for j in range(k):
                pts[i * k + j] = points[i][j]
        off = 0
        for f in range(nf):
            start[f] = off
            for row in forms[f]:
                for j in range(k):
                    rows[off * k + j] = row[j]
                off += 1
        start[nf] = off
        for i in range(npts):
            hit = False
            for f in range(nf):
                good = True
                for r in range(start[f], start[f + 1]):
                    s = 0
                    for j in range(k):
                        s += rows[r * k + j] * pts[i * k + j]
                    if s != 0:
                        good = False
                        break
                if good:
                    hit = True
                    break
            out.append(hit)
    finally:
        free(pts)
        free(rows)
        free(start)
    return out
