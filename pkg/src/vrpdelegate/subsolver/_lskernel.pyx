# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled first-improvement local search.

Mirrors ``_lsref`` move for move; see that module for the search definition.
Routes live in a dense ``(n, n)`` table with one row per route and a length
vector, so no Python objects are touched inside the loop and the GIL is
released while searching.
"""

import numpy as np
cimport numpy as cnp

from libc.string cimport memcpy

cdef double EPS = 1e-9
cdef int CVRP = 0
cdef int CVRPTW = 1
cdef int VRPMPD = 2


cdef struct Ctx:
    const double* d
    const long long* dem
    const long long* pick
    const double* early
    const double* late
    const double* serv
    long long cap
    int variant
    int stride        # n + 1, row stride of d
    long long* R      # route table, n rows of n entries
    long long* lens
    long long* loads
    long long nr
    long long* buf1
    long long* buf2


cdef inline double D(Ctx* c, long long i, long long j) noexcept nogil:
    return c.d[i * c.stride + j]


cdef inline long long* ROW(Ctx* c, long long r) noexcept nogil:
    return c.R + r * (c.stride - 1)


cdef bint feasible(Ctx* c, long long* seq, long long m) noexcept nogil:
    cdef long long load = 0
    cdef long long k, city, prev
    cdef double t, arr
    for k in range(m):
        load += c.dem[seq[k]]
    if load > c.cap:
        return False
    if c.variant == VRPMPD:
        for k in range(m):
            city = seq[k]
            load = load - c.dem[city] + c.pick[city]
            if load > c.cap:
                return False
        return True
    if c.variant == CVRPTW:
        t = c.early[0]
        prev = 0
        for k in range(m):
            city = seq[k]
            arr = t + c.serv[prev] + D(c, prev, city)
            t = arr if arr > c.early[city] else c.early[city]
            if t > c.late[city]:
                return False
            prev = city
        if t + c.serv[prev] + D(c, prev, 0) > c.late[0]:
            return False
    return True


cdef bint two_opt(Ctx* c) noexcept nogil:
    cdef long long r, i, j, k, m, a, b, cc, e
    cdef long long* R
    cdef double delta
    cdef bint plain = c.variant == CVRP
    for r in range(c.nr):
        R = ROW(c, r)
        m = c.lens[r]
        for i in range(m - 1):
            a = R[i - 1] if i > 0 else 0
            b = R[i]
            for j in range(i + 1, m):
                cc = R[j]
                e = R[j + 1] if j + 1 < m else 0
                delta = D(c, a, cc) + D(c, b, e) - D(c, a, b) - D(c, cc, e)
                if delta < -EPS:
                    memcpy(c.buf1, R, m * sizeof(long long))
                    for k in range(i, j + 1):
                        c.buf1[k] = R[j - (k - i)]
                    if plain or feasible(c, c.buf1, m):
                        memcpy(R, c.buf1, m * sizeof(long long))
                        return True
    return False


cdef bint relocate(Ctx* c) noexcept nogil:
    cdef long long r1, r2, i, j, k, m1, m2, u, a, b, p, q, n1
    cdef long long* R1
    cdef long long* R2
    cdef double gain, delta
    cdef bint plain = c.variant == CVRP
    for r1 in range(c.nr):
        R1 = ROW(c, r1)
        m1 = c.lens[r1]
        for i in range(m1):
            u = R1[i]
            a = R1[i - 1] if i > 0 else 0
            b = R1[i + 1] if i + 1 < m1 else 0
            gain = D(c, a, u) + D(c, u, b) - D(c, a, b)
            for r2 in range(c.nr):
                if r2 == r1:
                    for j in range(m1):
                        if j == i:
                            continue
                        if j > 0:
                            p = R1[j - 1] if j - 1 < i else R1[j]
                        else:
                            p = 0
                        if j < m1 - 1:
                            q = R1[j] if j < i else R1[j + 1]
                        else:
                            q = 0
                        delta = D(c, p, u) + D(c, u, q) - D(c, p, q) - gain
                        if delta < -EPS:
                            # reduced route, then insert u at slot j
                            n1 = 0
                            for k in range(m1):
                                if k != i:
                                    c.buf2[n1] = R1[k]
                                    n1 += 1
                            for k in range(j):
                                c.buf1[k] = c.buf2[k]
                            c.buf1[j] = u
                            for k in range(j, m1 - 1):
                                c.buf1[k + 1] = c.buf2[k]
                            if plain or feasible(c, c.buf1, m1):
                                memcpy(R1, c.buf1, m1 * sizeof(long long))
                                return True
                    continue
                if c.variant != VRPMPD and c.loads[r2] + c.dem[u] > c.cap:
                    continue
                R2 = ROW(c, r2)
                m2 = c.lens[r2]
                for j in range(m2 + 1):
                    p = R2[j - 1] if j > 0 else 0
                    q = R2[j] if j < m2 else 0
                    delta = D(c, p, u) + D(c, u, q) - D(c, p, q) - gain
                    if delta < -EPS:
                        for k in range(j):
                            c.buf1[k] = R2[k]
                        c.buf1[j] = u
                        for k in range(j, m2):
                            c.buf1[k + 1] = R2[k]
                        n1 = 0
                        for k in range(m1):
                            if k != i:
                                c.buf2[n1] = R1[k]
                                n1 += 1
                        if plain or (feasible(c, c.buf1, m2 + 1) and feasible(c, c.buf2, n1)):
                            memcpy(R2, c.buf1, (m2 + 1) * sizeof(long long))
                            memcpy(R1, c.buf2, n1 * sizeof(long long))
                            c.lens[r2] = m2 + 1
                            c.lens[r1] = n1
                            c.loads[r2] += c.dem[u]
                            c.loads[r1] -= c.dem[u]
                            return True
    return False


cdef bint swap(Ctx* c) noexcept nogil:
    cdef long long r1, r2, i, j, m1, m2, u, v, a, b, p, q
    cdef long long* R1
    cdef long long* R2
    cdef double out_u, delta
    cdef bint plain = c.variant == CVRP
    for r1 in range(c.nr):
        R1 = ROW(c, r1)
        m1 = c.lens[r1]
        for i in range(m1):
            u = R1[i]
            a = R1[i - 1] if i > 0 else 0
            b = R1[i + 1] if i + 1 < m1 else 0
            out_u = D(c, a, u) + D(c, u, b)
            for r2 in range(r1 + 1, c.nr):
                R2 = ROW(c, r2)
                m2 = c.lens[r2]
                for j in range(m2):
                    v = R2[j]
                    if c.variant != VRPMPD:
                        if (c.loads[r1] - c.dem[u] + c.dem[v] > c.cap
                                or c.loads[r2] - c.dem[v] + c.dem[u] > c.cap):
                            continue
                    p = R2[j - 1] if j > 0 else 0
                    q = R2[j + 1] if j + 1 < m2 else 0
                    delta = (D(c, a, v) + D(c, v, b) - out_u) + (D(c, p, u) + D(c, u, q) - D(c, p, v) - D(c, v, q))
                    if delta < -EPS:
                        memcpy(c.buf1, R1, m1 * sizeof(long long))
                        memcpy(c.buf2, R2, m2 * sizeof(long long))
                        c.buf1[i] = v
                        c.buf2[j] = u
                        if plain or (feasible(c, c.buf1, m1) and feasible(c, c.buf2, m2)):
                            R1[i] = v
                            R2[j] = u
                            c.loads[r1] += c.dem[v] - c.dem[u]
                            c.loads[r2] += c.dem[u] - c.dem[v]
                            return True
    return False


cdef bint two_opt_star(Ctx* c) noexcept nogil:
    cdef long long r1, r2, i, j, k, ma, mb, ap, an, bp, bn, pre_a, pre_b, load_a, load_b, na, nb
    cdef long long* A
    cdef long long* B
    cdef double delta
    cdef bint plain = c.variant == CVRP
    for r1 in range(c.nr):
        A = ROW(c, r1)
        ma = c.lens[r1]
        for r2 in range(r1 + 1, c.nr):
            B = ROW(c, r2)
            mb = c.lens[r2]
            pre_a = 0
            for i in range(ma + 1):
                ap = A[i - 1] if i > 0 else 0
                an = A[i] if i < ma else 0
                pre_b = 0
                for j in range(mb + 1):
                    if not ((i == 0 and j == 0) or (i == ma and j == mb)):
                        bp = B[j - 1] if j > 0 else 0
                        bn = B[j] if j < mb else 0
                        delta = D(c, ap, bn) + D(c, bp, an) - D(c, ap, an) - D(c, bp, bn)
                        if delta < -EPS:
                            load_a = pre_a + (c.loads[r2] - pre_b)
                            load_b = pre_b + (c.loads[r1] - pre_a)
                            if c.variant == VRPMPD or (load_a <= c.cap and load_b <= c.cap):
                                na = 0
                                for k in range(i):
                                    c.buf1[na] = A[k]
                                    na += 1
                                for k in range(j, mb):
                                    c.buf1[na] = B[k]
                                    na += 1
                                nb = 0
                                for k in range(j):
                                    c.buf2[nb] = B[k]
                                    nb += 1
                                for k in range(i, ma):
                                    c.buf2[nb] = A[k]
                                    nb += 1
                                if plain or (feasible(c, c.buf1, na) and feasible(c, c.buf2, nb)):
                                    memcpy(A, c.buf1, na * sizeof(long long))
                                    memcpy(B, c.buf2, nb * sizeof(long long))
                                    c.lens[r1] = na
                                    c.lens[r2] = nb
                                    c.loads[r1] = load_a
                                    c.loads[r2] = load_b
                                    return True
                    if j < mb:
                        pre_b += c.dem[B[j]]
                if i < ma:
                    pre_a += c.dem[A[i]]
    return False


cdef void drop_empty(Ctx* c) noexcept nogil:
    cdef long long r, w = 0
    cdef long long row = c.stride - 1
    for r in range(c.nr):
        if c.lens[r] > 0:
            if w != r:
                memcpy(c.R + w * row, c.R + r * row, c.lens[r] * sizeof(long long))
                c.lens[w] = c.lens[r]
                c.loads[w] = c.loads[r]
            w += 1
    c.nr = w


cdef long long search(Ctx* c, long long max_steps, bint* optimum) noexcept nogil:
    cdef long long steps = 0
    cdef long long r
    cdef bint moved, has_empty
    optimum[0] = False
    while steps < max_steps:
        moved = two_opt(c)
        if not moved:
            moved = relocate(c)
        if not moved:
            moved = swap(c)
        if not moved:
            moved = two_opt_star(c)
        if not moved:
            optimum[0] = True
            break
        steps += 1
        has_empty = False
        for r in range(c.nr):
            if c.lens[r] == 0:
                has_empty = True
        if has_empty:
            drop_empty(c)
    return steps


def local_search(dist, demand, pickup, early, late, service, capacity, variant, routes, max_steps):
    """Same contract as ``_lsref.local_search``."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] dem = np.ascontiguousarray(demand, dtype=np.int64)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] pick = np.ascontiguousarray(pickup, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] ea = np.ascontiguousarray(early, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] la = np.ascontiguousarray(late, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] sv = np.ascontiguousarray(service, dtype=np.float64)
    cdef long long n = d.shape[0] - 1
    cdef long long nroutes = len(routes)
    if nroutes > n:
        raise ValueError("more routes than cities")
    cdef cnp.ndarray[long long, ndim=2, mode="c"] table = np.zeros((max(n, 1), max(n, 1)), dtype=np.int64)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] lens = np.zeros(max(n, 1), dtype=np.int64)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] loads = np.zeros(max(n, 1), dtype=np.int64)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] buf1 = np.zeros(max(n, 1), dtype=np.int64)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] buf2 = np.zeros(max(n, 1), dtype=np.int64)
    cdef long long r, k
    for r, route in enumerate(routes):
        lens[r] = len(route)
        for k, city in enumerate(route):
            table[r, k] = city
            loads[r] += dem[city]

    cdef Ctx c
    c.d = &d[0, 0]
    c.dem = &dem[0]
    c.pick = &pick[0]
    c.early = &ea[0]
    c.late = &la[0]
    c.serv = &sv[0]
    c.cap = capacity
    c.variant = variant
    c.stride = n + 1
    c.R = &table[0, 0]
    c.lens = &lens[0]
    c.loads = &loads[0]
    c.nr = nroutes
    c.buf1 = &buf1[0]
    c.buf2 = &buf2[0]

    cdef long long budget = max_steps
    cdef long long steps
    cdef bint optimum
    with nogil:
        steps = search(&c, budget, &optimum)

    routes[:] = [[int(table[r, k]) for k in range(lens[r])] for r in range(c.nr)]
    return int(steps), bool(optimum)
