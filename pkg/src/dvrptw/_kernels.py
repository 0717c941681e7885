"""Compiled numerical core for route construction, insertion, local search
and pheromone bookkeeping.

All kernels operate on flat numpy arrays so numba can compile them once and
reuse the machine code across runs (``cache=True``).  Tours are stored as an
``int32[max_tours, n]`` matrix of customer ids plus per-tour visit counts and
committed prefix lengths; node 0 is always the depot.  Every kernel releases
the GIL so a controller thread stays responsive while ants run.

The random stream is a hand-rolled xorshift64* generator driven through a
``uint64[1]`` state array.  This keeps runs bit-identical for a given seed on
any host, which the deterministic virtual-clock mode relies on.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64

_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53

# epsilon guard for closeness values so heuristic weights stay finite
EPS_METRIC = 1e-10
# strict-improvement threshold for local search deltas
LS_EPS = 1e-9


# ---------------------------------------------------------------------------
# random stream


@njit(cache=True, nogil=True)
def rng_from_seed(seed):
    """Expand a user seed into a xorshift64* state via splitmix64."""
    z = U64(seed) + U64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    z = z ^ (z >> U64(31))
    if z == U64(0):
        z = U64(0x9E3779B97F4A7C15)
    out = np.empty(1, dtype=np.uint64)
    out[0] = z
    return out


@njit(cache=True, nogil=True, inline="always")
def _rng_next(state):
    x = state[0]
    x ^= x >> U64(12)
    x ^= x << U64(25)
    x ^= x >> U64(27)
    state[0] = x
    return x * U64(0x2545F4914F6CDD1D)


@njit(cache=True, nogil=True, inline="always")
def rng_unit(state):
    """Uniform double in [0, 1) with 53 random bits."""
    return (_rng_next(state) >> U64(11)) * _INV_2_53


# ---------------------------------------------------------------------------
# schedules


@njit(cache=True, nogil=True)
def walk_tour(row, m, D, e, l, s, dem, cap, b_out):
    """Forward schedule recurrence over ``row[:m]``.

    Fills ``b_out[:m]`` with service-begin times and returns
    ``(feasible, travel_distance)``.  Infeasibility is reported, never
    raised: capacity, window and depot-return violations all just clear
    the flag.
    """
    ok = True
    load = 0
    b = e[0]
    prev = 0
    td = 0.0
    for k in range(m):
        c = row[k]
        load += dem[c]
        if load > cap:
            ok = False
        d = D[prev, c]
        td += d
        arr = b + s[prev] + d
        b = arr if arr > e[c] else e[c]
        if b > l[c]:
            ok = False
        b_out[k] = b
        prev = c
    td += D[prev, 0]
    if b + s[prev] + D[prev, 0] > l[0]:
        ok = False
    return ok, td


@njit(cache=True, nogil=True)
def solution_cost(tours, tlen, nt, D, e, l, s, dem, cap, b_scratch):
    """(nv, td, feasible) over all tours; empty tours do not count."""
    nv = 0
    td = 0.0
    ok = True
    for t in range(nt):
        m = tlen[t]
        if m == 0:
            continue
        nv += 1
        tok, ttd = walk_tour(tours[t], m, D, e, l, s, dem, cap, b_scratch)
        td += ttd
        if not tok:
            ok = False
    return nv, td, ok


@njit(cache=True, nogil=True)
def insertion_eval(row, m, p, u, D, e, l, s, dem, cap, load_now, b_row):
    """Evaluate inserting ``u`` before position ``p`` of ``row[:m]``.

    ``b_row[:m]`` must hold the tour's current begin times.  Returns
    ``(feasible, c11, c12)`` where c11 is the detour distance and c12 the
    begin-time shift of the displaced successor (the depot-return shift
    when appending).  The downstream check is an exact walk to the end of
    the tour, not a slack bound.
    """
    if load_now + dem[u] > cap:
        return False, 0.0, 0.0
    if p == 0:
        prev = 0
        bprev = e[0]
    else:
        prev = row[p - 1]
        bprev = b_row[p - 1]
    arr = bprev + s[prev] + D[prev, u]
    bu = arr if arr > e[u] else e[u]
    if bu > l[u]:
        return False, 0.0, 0.0
    if p == m:
        ret_new = bu + s[u] + D[u, 0]
        if ret_new > l[0]:
            return False, 0.0, 0.0
        if m == 0:
            ret_old = e[0] + D[0, 0]
        else:
            last = row[m - 1]
            ret_old = b_row[m - 1] + s[last] + D[last, 0]
        c11 = D[prev, u] + D[u, 0] - D[prev, 0]
        return True, c11, ret_new - ret_old
    j = row[p]
    arrj = bu + s[u] + D[u, j]
    bj = arrj if arrj > e[j] else e[j]
    if bj > l[j]:
        return False, 0.0, 0.0
    c11 = D[prev, u] + D[u, j] - D[prev, j]
    c12 = bj - b_row[p]
    b2 = bj
    prev2 = j
    for k in range(p + 1, m):
        c = row[k]
        arr2 = b2 + s[prev2] + D[prev2, c]
        b2 = arr2 if arr2 > e[c] else e[c]
        if b2 > l[c]:
            return False, 0.0, 0.0
        prev2 = c
    if b2 + s[prev2] + D[prev2, 0] > l[0]:
        return False, 0.0, 0.0
    return True, c11, c12


@njit(cache=True, nogil=True)
def apply_insertion(tours, tlen, t, p, u):
    row = tours[t]
    for k in range(tlen[t], p, -1):
        row[k] = row[k - 1]
    row[p] = u
    tlen[t] += 1


# ---------------------------------------------------------------------------
# time-oriented nearest-neighbour construction


@njit(cache=True, nogil=True)
def nn_build(D, e, l, s, dem, cap, todo, tours, tlen, tcom, start_nt,
             w_d, w_t, w_u):
    """Grow depot tours greedily by the time-oriented closeness metric.

    ``todo`` is consumed.  New tours are appended from row ``start_nt``;
    a fresh tour opens only once the current one cannot take any remaining
    customer.  Returns ``(nt, stuck_id)`` where ``stuck_id`` is -1 on full
    success or the lowest remaining customer no empty tour can serve.
    """
    n = D.shape[0]
    remaining = 0
    for i in range(1, n):
        if todo[i]:
            remaining += 1
    nt = start_nt
    while remaining > 0:
        row = tours[nt]
        m = 0
        load = 0
        b = e[0]
        prev = 0
        while True:
            best = -1
            best_m = 0.0
            best_b = 0.0
            dep = b + s[prev]
            for c in range(1, n):
                if todo[c] == 0:
                    continue
                if load + dem[c] > cap:
                    continue
                d = D[prev, c]
                arr = dep + d
                bc = arr if arr > e[c] else e[c]
                if bc > l[c]:
                    continue
                if bc + s[c] + D[c, 0] > l[0]:
                    continue
                mm = w_d * d + w_t * (bc - dep) + w_u * (l[c] - (dep + d))
                if best < 0 or mm < best_m:
                    best = c
                    best_m = mm
                    best_b = bc
            if best < 0:
                break
            row[m] = best
            m += 1
            load += dem[best]
            b = best_b
            prev = best
            todo[best] = 0
            remaining -= 1
        if m == 0:
            for i in range(1, n):
                if todo[i]:
                    return nt, i
        tlen[nt] = m
        tcom[nt] = 0
        nt += 1
    return nt, -1


# ---------------------------------------------------------------------------
# cheapest-insertion repair (two-level criterion)


@njit(cache=True, nogil=True)
def i1_insert(D, e, l, s, dem, cap, tours, tlen, tcom, nt, tload, btime,
              todo, a1, a2, lam, seed_sign):
    """Insert unrouted customers one at a time into existing tours.

    Per candidate the best position minimises ``a1*c11 + a2*c12``; among
    candidates the one optimising ``lam*d(0,u) - c1`` wins (minimised when
    ``seed_sign`` > 0, maximised otherwise).  Ties fall to the lowest id
    and earliest position through the ascending scan order.  Stops when no
    remaining customer fits anywhere; returns the number left over.
    ``tload``/``btime`` caches are kept current for mutated tours.
    """
    n = D.shape[0]
    remaining = 0
    for i in range(1, n):
        if todo[i]:
            remaining += 1
    while remaining > 0:
        sel_u = -1
        sel_t = -1
        sel_p = -1
        sel_score = 0.0
        for u in range(1, n):
            if todo[u] == 0:
                continue
            u_t = -1
            u_p = -1
            u_c1 = 0.0
            for t in range(nt):
                m = tlen[t]
                row = tours[t]
                for p in range(tcom[t], m + 1):
                    ok, c11, c12 = insertion_eval(
                        row, m, p, u, D, e, l, s, dem, cap, tload[t], btime[t])
                    if not ok:
                        continue
                    c1 = a1 * c11 + a2 * c12
                    if u_t < 0 or c1 < u_c1:
                        u_c1 = c1
                        u_t = t
                        u_p = p
            if u_t < 0:
                continue
            score = lam * D[0, u] - u_c1
            if seed_sign > 0:
                score = -score  # minimise c2
            if sel_u < 0 or score > sel_score:
                sel_u = u
                sel_t = u_t
                sel_p = u_p
                sel_score = score
        if sel_u < 0:
            break
        apply_insertion(tours, tlen, sel_t, sel_p, sel_u)
        tload[sel_t] += dem[sel_u]
        walk_tour(tours[sel_t], tlen[sel_t], D, e, l, s, dem, cap,
                  btime[sel_t])
        todo[sel_u] = 0
        remaining -= 1
    return remaining


@njit(cache=True, nogil=True)
def refresh_caches(tours, tlen, nt, D, e, l, s, dem, cap, tload, btime):
    for t in range(nt):
        load = 0
        for k in range(tlen[t]):
            load += dem[tours[t, k]]
        tload[t] = load
        walk_tour(tours[t], tlen[t], D, e, l, s, dem, cap, btime[t])


# ---------------------------------------------------------------------------
# ant construction (joint vehicle/customer transition)


@njit(cache=True, nogil=True, inline="always")
def w_metric(w_d, w_t, w_u, d, wait_term, urgency_term):
    m = w_d * d + w_t * wait_term + w_u * urgency_term
    if m < EPS_METRIC:
        m = EPS_METRIC
    return m


@njit(cache=True, nogil=True)
def ant_construct(D, e, l, s, dem, cap, cand, tau, tau0,
                  skel_tours, skel_tlen, skel_nt,
                  avail, q0, alpha, beta, rho, stall_threshold,
                  a1, a2, lam, seed_sign, w_d, w_t, w_u, rng,
                  tours, tlen, tcom, tload, btime):
    """Build one ant solution over the available customers.

    Committed prefixes are copied verbatim into the same tour rows, then
    every remaining available customer is appended through the joint
    (vehicle, customer) rule: with probability q0 the best
    ``tau^alpha * (1/metric)^beta`` pair is taken, otherwise a pair is
    sampled proportionally.  Candidate lists gate the scan; when their
    union offers nothing feasible the scan widens to all available
    customers.  The local pheromone rule hits every traversed edge in both
    directions immediately.  When no vehicle can extend and at most
    ``stall_threshold`` customers remain they go through insertion repair,
    and whatever is still left gets a fresh tour.  Returns
    ``(complete, nt)``; ``complete`` is false only if some customer cannot
    even start a tour of its own.
    """
    n = D.shape[0]
    K = cand.shape[1]
    todo = np.zeros(n, dtype=np.uint8)
    remaining = 0
    for i in range(1, n):
        if avail[i]:
            todo[i] = 1
            remaining += 1
    nt = skel_nt
    for t in range(nt):
        m = skel_tlen[t]
        tlen[t] = m
        tcom[t] = m
        load = 0
        for k in range(m):
            c = skel_tours[t, k]
            tours[t, k] = c
            todo[c] = 0
            remaining -= 1
            load += dem[c]
        tload[t] = load
        walk_tour(tours[t], m, D, e, l, s, dem, cap, btime[t])
    if nt == 0:
        tlen[0] = 0
        tcom[0] = 0
        tload[0] = 0
        nt = 1

    # per-vehicle tail state
    last = np.empty(n + 1, dtype=np.int64)
    dep = np.empty(n + 1, dtype=np.float64)
    for t in range(nt):
        m = tlen[t]
        if m == 0:
            last[t] = 0
            dep[t] = e[0]
        else:
            c = tours[t, m - 1]
            last[t] = c
            dep[t] = btime[t, m - 1] + s[c]

    max_pairs = (n + 1) * n
    pv = np.empty(max_pairs, dtype=np.int64)
    pc = np.empty(max_pairs, dtype=np.int64)
    pw = np.empty(max_pairs, dtype=np.float64)

    fresh_tour = False
    while remaining > 0:
        npairs = 0
        wsum = 0.0
        # candidate-list pass
        for t in range(nt):
            lv = last[t]
            dv = dep[t]
            loadv = tload[t]
            for k in range(K):
                c = cand[lv, k]
                if c <= 0 or todo[c] == 0:
                    continue
                if loadv + dem[c] > cap:
                    continue
                d = D[lv, c]
                arr = dv + d
                bc = arr if arr > e[c] else e[c]
                if bc > l[c]:
                    continue
                if bc + s[c] + D[c, 0] > l[0]:
                    continue
                mm = w_metric(w_d, w_t, w_u, d, bc - dv, l[c] - arr)
                w = (tau[lv, c] ** alpha) * ((1.0 / mm) ** beta)
                pv[npairs] = t
                pc[npairs] = c
                pw[npairs] = w
                wsum += w
                npairs += 1
        if npairs == 0:
            # widen to every available customer
            for t in range(nt):
                lv = last[t]
                dv = dep[t]
                loadv = tload[t]
                for c in range(1, n):
                    if todo[c] == 0:
                        continue
                    if loadv + dem[c] > cap:
                        continue
                    d = D[lv, c]
                    arr = dv + d
                    bc = arr if arr > e[c] else e[c]
                    if bc > l[c]:
                        continue
                    if bc + s[c] + D[c, 0] > l[0]:
                        continue
                    mm = w_metric(w_d, w_t, w_u, d, bc - dv, l[c] - arr)
                    w = (tau[lv, c] ** alpha) * ((1.0 / mm) ** beta)
                    pv[npairs] = t
                    pc[npairs] = c
                    pw[npairs] = w
                    wsum += w
                    npairs += 1
        if npairs == 0:
            # stalled: small remainders go through insertion repair first
            if remaining <= stall_threshold:
                left = i1_insert(D, e, l, s, dem, cap, tours, tlen, tcom,
                                 nt, tload, btime, todo,
                                 a1, a2, lam, seed_sign)
                remaining = left
                # tails may have moved
                for t in range(nt):
                    m = tlen[t]
                    if m == 0:
                        last[t] = 0
                        dep[t] = e[0]
                    else:
                        c = tours[t, m - 1]
                        last[t] = c
                        dep[t] = btime[t, m - 1] + s[c]
                if remaining == 0:
                    break
            if fresh_tour:
                # a brand-new empty tour could not serve anyone: the
                # remaining customers are infeasible on their own
                return False, nt
            tlen[nt] = 0
            tcom[nt] = 0
            tload[nt] = 0
            last[nt] = 0
            dep[nt] = e[0]
            nt += 1
            fresh_tour = True
            continue
        fresh_tour = False
        # choose a pair
        pick = 0
        if rng_unit(rng) <= q0:
            bw = pw[0]
            for k in range(1, npairs):
                if pw[k] > bw:
                    bw = pw[k]
                    pick = k
        else:
            r = rng_unit(rng) * wsum
            acc = 0.0
            pick = npairs - 1
            for k in range(npairs):
                acc += pw[k]
                if r < acc:
                    pick = k
                    break
        t = pv[pick]
        c = pc[pick]
        lv = last[t]
        d = D[lv, c]
        arr = dep[t] + d
        bc = arr if arr > e[c] else e[c]
        m = tlen[t]
        tours[t, m] = c
        btime[t, m] = bc
        tlen[t] = m + 1
        tload[t] += dem[c]
        last[t] = c
        dep[t] = bc + s[c]
        todo[c] = 0
        remaining -= 1
        # local pheromone step, both orientations
        tau[lv, c] = (1.0 - rho) * tau[lv, c] + rho * tau0
        tau[c, lv] = (1.0 - rho) * tau[c, lv] + rho * tau0
    return True, nt


# ---------------------------------------------------------------------------
# local search: inter-route relocate and exchange, first improvement


@njit(cache=True, nogil=True)
def relocate_once(tours, tlen, tcom, nt, D, e, l, s, dem, cap,
                  tload, btime, out_move):
    """Apply the first improving relocate found in deterministic scan order.

    Source tours ascending, source positions ascending from the first
    uncommitted slot, then target tours and positions ascending.  A move
    that empties a tour is accepted on feasibility alone (vehicle count
    drops); otherwise the distance delta must be strictly negative.
    Returns 1 and fills ``out_move`` (src_t, src_p, dst_t, dst_p) on
    success, 0 when no move improves.  Emptied tours are dropped from the
    row list immediately.
    """
    for t1 in range(nt):
        row1 = tours[t1]
        m1 = tlen[t1]
        for p1 in range(tcom[t1], m1):
            u = row1[p1]
            prev = row1[p1 - 1] if p1 > 0 else 0
            nxt = row1[p1 + 1] if p1 + 1 < m1 else 0
            gain = D[prev, u] + D[u, nxt] - D[prev, nxt]
            empties = m1 == 1
            for t2 in range(nt):
                if t2 == t1:
                    continue
                m2 = tlen[t2]
                row2 = tours[t2]
                for p2 in range(tcom[t2], m2 + 1):
                    iprev = row2[p2 - 1] if p2 > 0 else 0
                    jnxt = row2[p2] if p2 < m2 else 0
                    add = D[iprev, u] + D[u, jnxt] - D[iprev, jnxt]
                    delta = add - gain
                    if not empties and delta >= -LS_EPS:
                        continue
                    ok, _, _ = insertion_eval(row2, m2, p2, u, D, e, l, s,
                                              dem, cap, tload[t2], btime[t2])
                    if not ok:
                        continue
                    out_move[0] = t1
                    out_move[1] = p1
                    out_move[2] = t2
                    out_move[3] = p2
                    apply_insertion(tours, tlen, t2, p2, u)
                    tload[t2] += dem[u]
                    walk_tour(row2, tlen[t2], D, e, l, s, dem, cap,
                              btime[t2])
                    for k in range(p1, m1 - 1):
                        row1[k] = row1[k + 1]
                    tlen[t1] = m1 - 1
                    tload[t1] -= dem[u]
                    if tlen[t1] == 0:
                        for t in range(t1, nt - 1):
                            tours[t, :] = tours[t + 1, :]
                            tlen[t] = tlen[t + 1]
                            tcom[t] = tcom[t + 1]
                            tload[t] = tload[t + 1]
                            btime[t, :] = btime[t + 1, :]
                        return 1, nt - 1
                    walk_tour(row1, tlen[t1], D, e, l, s, dem, cap,
                              btime[t1])
                    return 1, nt
    return 0, nt


@njit(cache=True, nogil=True)
def exchange_once(tours, tlen, tcom, nt, D, e, l, s, dem, cap,
                  tload, btime, scratch_row, scratch_b, out_move):
    """Apply the first improving inter-route customer swap.

    Both affected tours are re-walked exactly; the summed distance delta
    must be strictly negative (a swap never changes the vehicle count).
    """
    for t1 in range(nt):
        row1 = tours[t1]
        m1 = tlen[t1]
        for p1 in range(tcom[t1], m1):
            u = row1[p1]
            pu = row1[p1 - 1] if p1 > 0 else 0
            nu = row1[p1 + 1] if p1 + 1 < m1 else 0
            for t2 in range(t1 + 1, nt):
                row2 = tours[t2]
                m2 = tlen[t2]
                for p2 in range(tcom[t2], m2):
                    v = row2[p2]
                    pvv = row2[p2 - 1] if p2 > 0 else 0
                    nv = row2[p2 + 1] if p2 + 1 < m2 else 0
                    d1 = (D[pu, v] + D[v, nu]) - (D[pu, u] + D[u, nu])
                    d2 = (D[pvv, u] + D[u, nv]) - (D[pvv, v] + D[v, nv])
                    if d1 + d2 >= -LS_EPS:
                        continue
                    if tload[t1] - dem[u] + dem[v] > cap:
                        continue
                    if tload[t2] - dem[v] + dem[u] > cap:
                        continue
                    for k in range(m1):
                        scratch_row[k] = row1[k]
                    scratch_row[p1] = v
                    ok1, _ = walk_tour(scratch_row, m1, D, e, l, s, dem,
                                       cap, scratch_b)
                    if not ok1:
                        continue
                    for k in range(m2):
                        scratch_row[k] = row2[k]
                    scratch_row[p2] = u
                    ok2, _ = walk_tour(scratch_row, m2, D, e, l, s, dem,
                                       cap, scratch_b)
                    if not ok2:
                        continue
                    row1[p1] = v
                    row2[p2] = u
                    tload[t1] += dem[v] - dem[u]
                    tload[t2] += dem[u] - dem[v]
                    walk_tour(row1, m1, D, e, l, s, dem, cap, btime[t1])
                    walk_tour(row2, m2, D, e, l, s, dem, cap, btime[t2])
                    out_move[0] = t1
                    out_move[1] = p1
                    out_move[2] = t2
                    out_move[3] = p2
                    return 1
    return 0


@njit(cache=True, nogil=True)
def ls_run(tours, tlen, tcom, nt, D, e, l, s, dem, cap, tload, btime,
           scratch_row, scratch_b, out_move):
    """Alternate relocate and exchange passes until a full cycle is clean."""
    while True:
        moved = False
        while True:
            hit, nt = relocate_once(tours, tlen, tcom, nt, D, e, l, s, dem,
                                    cap, tload, btime, out_move)
            if hit == 0:
                break
            moved = True
        while True:
            hit = exchange_once(tours, tlen, tcom, nt, D, e, l, s, dem, cap,
                                tload, btime, scratch_row, scratch_b,
                                out_move)
            if hit == 0:
                break
            moved = True
        if not moved:
            return nt


# ---------------------------------------------------------------------------
# pheromone updates


@njit(cache=True, nogil=True)
def global_update(tau, tours, tlen, nt, rho, l_best):
    """Reinforce every edge of the best solution, both orientations.

    Depot legs out of and back into each tour are part of the edge set.
    """
    dep = rho / l_best
    for t in range(nt):
        m = tlen[t]
        if m == 0:
            continue
        prev = 0
        for k in range(m):
            c = tours[t, k]
            tau[prev, c] = (1.0 - rho) * tau[prev, c] + dep
            tau[c, prev] = (1.0 - rho) * tau[c, prev] + dep
            prev = c
        tau[prev, 0] = (1.0 - rho) * tau[prev, 0] + dep
        tau[0, prev] = (1.0 - rho) * tau[0, prev] + dep
