"""Pure-Python first-improvement local search.

This is the fallback for the compiled ``_lskernel`` extension and the
reference it is tested against: both must return identical routes for
identical inputs, so every floating-point expression below is written in the
same evaluation order as its Cython twin.

One step scans the neighbourhoods in a fixed order (intra-route 2-opt,
relocate, inter-route swap, 2-opt*) and applies the first move that lowers the
cost by more than ``EPS`` while keeping the variant's constraints.  The search
stops after ``max_steps`` applied moves or when a full scan finds nothing.
"""

EPS = 1e-9
CVRP, CVRPTW, VRPMPD = 0, 1, 2


class _Ctx:
    __slots__ = ("d", "dem", "pick", "early", "late", "serv", "cap", "variant")

    def __init__(self, d, dem, pick, early, late, serv, cap, variant):
        self.d = d
        self.dem = dem
        self.pick = pick
        self.early = early
        self.late = late
        self.serv = serv
        self.cap = cap
        self.variant = variant


def _feasible(ctx, seq):
    dem = ctx.dem
    cap = ctx.cap
    if ctx.variant == VRPMPD:
        pick = ctx.pick
        load = 0
        for c in seq:
            load += dem[c]
        if load > cap:
            return False
        for c in seq:
            load = load - dem[c] + pick[c]
            if load > cap:
                return False
        return True
    load = 0
    for c in seq:
        load += dem[c]
    if load > cap:
        return False
    if ctx.variant == CVRPTW:
        d, early, late, serv = ctx.d, ctx.early, ctx.late, ctx.serv
        t = early[0]
        prev = 0
        for c in seq:
            arr = t + serv[prev] + d[prev][c]
            t = arr if arr > early[c] else early[c]
            if t > late[c]:
                return False
            prev = c
        if t + serv[prev] + d[prev][0] > late[0]:
            return False
    return True


def _two_opt(ctx, routes, loads):
    d = ctx.d
    plain = ctx.variant == CVRP
    for r in range(len(routes)):
        R = routes[r]
        m = len(R)
        for i in range(m - 1):
            a = R[i - 1] if i > 0 else 0
            b = R[i]
            for j in range(i + 1, m):
                c = R[j]
                e = R[j + 1] if j + 1 < m else 0
                delta = d[a][c] + d[b][e] - d[a][b] - d[c][e]
                if delta < -EPS:
                    cand = R[:i] + R[i:j + 1][::-1] + R[j + 1:]
                    if plain or _feasible(ctx, cand):
                        routes[r] = cand
                        return True
    return False


def _relocate(ctx, routes, loads):
    d = ctx.d
    dem = ctx.dem
    cap = ctx.cap
    variant = ctx.variant
    plain = variant == CVRP
    nr = len(routes)
    for r1 in range(nr):
        R1 = routes[r1]
        m1 = len(R1)
        for i in range(m1):
            u = R1[i]
            a = R1[i - 1] if i > 0 else 0
            b = R1[i + 1] if i + 1 < m1 else 0
            gain = d[a][u] + d[u][b] - d[a][b]
            for r2 in range(nr):
                if r2 == r1:
                    for j in range(m1):
                        if j == i:
                            continue
                        # neighbours of slot j in R1 with u removed
                        if j > 0:
                            p = R1[j - 1] if j - 1 < i else R1[j]
                        else:
                            p = 0
                        if j < m1 - 1:
                            q = R1[j] if j < i else R1[j + 1]
                        else:
                            q = 0
                        delta = d[p][u] + d[u][q] - d[p][q] - gain
                        if delta < -EPS:
                            red = R1[:i] + R1[i + 1:]
                            cand = red[:j] + [u] + red[j:]
                            if plain or _feasible(ctx, cand):
                                routes[r1] = cand
                                return True
                    continue
                if variant != VRPMPD and loads[r2] + dem[u] > cap:
                    continue
                R2 = routes[r2]
                m2 = len(R2)
                for j in range(m2 + 1):
                    p = R2[j - 1] if j > 0 else 0
                    q = R2[j] if j < m2 else 0
                    delta = d[p][u] + d[u][q] - d[p][q] - gain
                    if delta < -EPS:
                        cand2 = R2[:j] + [u] + R2[j:]
                        cand1 = R1[:i] + R1[i + 1:]
                        if plain or (_feasible(ctx, cand2) and _feasible(ctx, cand1)):
                            routes[r2] = cand2
                            routes[r1] = cand1
                            loads[r2] += dem[u]
                            loads[r1] -= dem[u]
                            return True
    return False


def _swap(ctx, routes, loads):
    d = ctx.d
    dem = ctx.dem
    cap = ctx.cap
    variant = ctx.variant
    plain = variant == CVRP
    nr = len(routes)
    for r1 in range(nr):
        R1 = routes[r1]
        m1 = len(R1)
        for i in range(m1):
            u = R1[i]
            a = R1[i - 1] if i > 0 else 0
            b = R1[i + 1] if i + 1 < m1 else 0
            out_u = d[a][u] + d[u][b]
            for r2 in range(r1 + 1, nr):
                R2 = routes[r2]
                m2 = len(R2)
                for j in range(m2):
                    v = R2[j]
                    if variant != VRPMPD:
                        if loads[r1] - dem[u] + dem[v] > cap or loads[r2] - dem[v] + dem[u] > cap:
                            continue
                    p = R2[j - 1] if j > 0 else 0
                    q = R2[j + 1] if j + 1 < m2 else 0
                    delta = (d[a][v] + d[v][b] - out_u) + (d[p][u] + d[u][q] - d[p][v] - d[v][q])
                    if delta < -EPS:
                        cand1 = R1[:i] + [v] + R1[i + 1:]
                        cand2 = R2[:j] + [u] + R2[j + 1:]
                        if plain or (_feasible(ctx, cand1) and _feasible(ctx, cand2)):
                            routes[r1] = cand1
                            routes[r2] = cand2
                            loads[r1] += dem[v] - dem[u]
                            loads[r2] += dem[u] - dem[v]
                            return True
    return False


def _two_opt_star(ctx, routes, loads):
    d = ctx.d
    dem = ctx.dem
    cap = ctx.cap
    variant = ctx.variant
    plain = variant == CVRP
    nr = len(routes)
    for r1 in range(nr):
        A = routes[r1]
        ma = len(A)
        for r2 in range(r1 + 1, nr):
            B = routes[r2]
            mb = len(B)
            pre_a = 0
            for i in range(ma + 1):
                ap = A[i - 1] if i > 0 else 0
                an = A[i] if i < ma else 0
                pre_b = 0
                for j in range(mb + 1):
                    if not ((i == 0 and j == 0) or (i == ma and j == mb)):
                        bp = B[j - 1] if j > 0 else 0
                        bn = B[j] if j < mb else 0
                        delta = d[ap][bn] + d[bp][an] - d[ap][an] - d[bp][bn]
                        if delta < -EPS:
                            load_a = pre_a + (loads[r2] - pre_b)
                            load_b = pre_b + (loads[r1] - pre_a)
                            if variant == VRPMPD or (load_a <= cap and load_b <= cap):
                                new_a = A[:i] + B[j:]
                                new_b = B[:j] + A[i:]
                                if plain or (_feasible(ctx, new_a) and _feasible(ctx, new_b)):
                                    routes[r1] = new_a
                                    routes[r2] = new_b
                                    loads[r1] = load_a
                                    loads[r2] = load_b
                                    return True
                    if j < mb:
                        pre_b += dem[B[j]]
                if i < ma:
                    pre_a += dem[A[i]]
    return False


_NEIGHBOURHOODS = (_two_opt, _relocate, _swap, _two_opt_star)


def local_search(dist, demand, pickup, early, late, service, capacity, variant, routes, max_steps):
    """Improve ``routes`` in place; return ``(steps_applied, reached_local_optimum)``.

    ``dist`` is the (n+1)x(n+1) matrix, the per-node arrays are indexed by
    local node id with the depot at 0, and ``routes`` is a list of lists of
    city ids.  Routes emptied by a move are dropped.
    """
    ctx = _Ctx(
        dist.tolist() if hasattr(dist, "tolist") else dist,
        [int(v) for v in demand],
        [int(v) for v in pickup],
        [float(v) for v in early],
        [float(v) for v in late],
        [float(v) for v in service],
        int(capacity),
        int(variant),
    )
    work = [list(r) for r in routes]
    loads = [sum(ctx.dem[c] for c in r) for r in work]
    steps = 0
    optimum = False
    while steps < max_steps:
        for move in _NEIGHBOURHOODS:
            if move(ctx, work, loads):
                break
        else:
            optimum = True
            break
        steps += 1
        if any(len(r) == 0 for r in work):
            keep = [k for k, r in enumerate(work) if r]
            work = [work[k] for k in keep]
            loads = [loads[k] for k in keep]
    routes[:] = work
    return steps, optimum
