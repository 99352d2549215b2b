"""Numba kernels for exact snake simulation.

Representation
--------------
A sample is a set of times S in [0, 1] kept as a singly linked list in time
order, with arrays ``t`` (time), ``z`` (lifetime), ``lab`` (head value),
``nxt`` (next node in time) and ``par`` (nearest ancestor in S). Nodes ``0..n``
are the uniform grid, node ``n`` being a second copy of the root.

Every pair of consecutive nodes brackets a piece of the lifetime whose infimum
is attained at one of its two endpoints. With that property the genealogy of S
is exactly the min-Cartesian tree of the lifetime values, so head values are
exact Gaussian draws given the tree. The base grid is made of that shape by
inserting, inside each grid step, the point where the step attains its infimum.

Refinement of a piece uses the Bessel(3) bridge description of the path seen
from its minimum: draw the midpoint, then split the half that does not contain
the known minimum at its own argmin. Each refinement adds two nodes and keeps
the invariant, so head values stay exact at all sample points.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

NB = dict(cache=True, nogil=True)


# ---------------------------------------------------------------------------
# scalar samplers
# ---------------------------------------------------------------------------

@nb.njit(**NB)
def bes3_bridge_mid(rng, c, tau):
    """Midpoint of a Bessel(3) bridge from 0 to c over duration tau."""
    s = math.sqrt(0.25 * tau)
    a = 0.5 * c + s * rng.standard_normal()
    b = s * rng.standard_normal()
    d = s * rng.standard_normal()
    return math.sqrt(a * a + b * b + d * d)


@nb.njit(**NB)
def bridge_min_above(rng, x, y, tau):
    """Minimum of a Brownian bridge x -> y on [0, tau] conditioned to stay > 0.

    Inverse of P(min > q | min > 0) = (1 - e^{-2(x-q)(y-q)/tau}) / (1 - e^{-2xy/tau}).
    """
    if tau <= 0.0:
        return x if x < y else y
    a = 2.0 * x * y / tau
    v = rng.random()
    r = -0.5 * tau * math.log1p(v * math.expm1(-a))
    disc = (x - y) * (x - y) + 4.0 * r
    q = 0.5 * ((x + y) - math.sqrt(disc))
    lo = x if x < y else y
    if q < 0.0:
        q = 0.0
    if q > lo:
        q = lo
    return q


@nb.njit(**NB)
def inv_gauss(rng, mu, lam):
    """Inverse Gaussian draw (transformation with one normal and one uniform)."""
    g = rng.standard_normal()
    r = mu * g * g / (2.0 * lam)
    x = mu / (1.0 + r + math.sqrt(r * r + 2.0 * r))
    if rng.random() * (mu + x) <= mu:
        return x
    return mu * mu / x


@nb.njit(**NB)
def argmin_time(rng, A, B, tau):
    """Time of the minimum of a Brownian bridge given its depth below both ends.

    A, B are the gaps between the minimum and the left/right endpoint values. The
    density of theta is proportional to f_A(theta) f_B(tau - theta) with f_a the
    first-passage density; with w = (tau - theta) / theta it is an
    inverse-Gaussian mixture, weights A : B.
    """
    if A <= 0.0 or A * A / tau <= 0.0:  # gaps that underflow count as zero
        return 0.0
    if B <= 0.0 or B * B / tau <= 0.0:
        return tau
    if rng.random() * (A + B) < A:
        w = inv_gauss(rng, B / A, B * B / tau)
    else:
        w = 1.0 / inv_gauss(rng, A / B, A * A / tau)
    return tau / (1.0 + w)


@nb.njit(**NB)
def bridge_value(la, za, lc, zc, zq, g):
    """Brownian bridge along an edge: value at height zq between (za, la), (zc, lc)."""
    h = zc - za
    if h <= 0.0:
        return la
    f = (zq - za) / h
    var = (zq - za) * (zc - zq) / h
    if var < 0.0:
        var = 0.0
    return la + (lc - la) * f + math.sqrt(var) * g


# ---------------------------------------------------------------------------
# workspace
# ---------------------------------------------------------------------------

def make_workspace(n, extra=200_000):
    cap = 2 * n + 2 + int(extra)
    return (
        np.empty(cap),                  # t
        np.empty(cap),                  # z
        np.empty(cap),                  # lab
        np.empty(cap, np.int64),        # nxt
        np.empty(cap, np.int64),        # par
        np.empty(cap, np.int64),        # stack / order
        np.empty(cap),                  # heap keys
        np.empty(cap, np.int64),        # heap values
        np.empty((n + 1, 3)),           # 3d bridge
        np.empty(cap),                  # distances
        np.empty(cap, np.int64),        # positions
    )


# ---------------------------------------------------------------------------
# base construction
# ---------------------------------------------------------------------------

@nb.njit(**NB)
def lifetime_base(rng, n, t, z, nxt, w3):
    """Exact excursion at grid times (norm of a 3d bridge) plus in-step minima.

    Returns the node count. Node n + j (1 <= j <= n-2) is the argmin inside
    grid step j; its time is left as NaN until :func:`node_time` asks for it.
    """
    dt = 1.0 / n
    sd = math.sqrt(dt)
    for d in range(3):
        w3[0, d] = 0.0
    for j in range(1, n + 1):
        for d in range(3):
            w3[j, d] = w3[j - 1, d] + sd * rng.standard_normal()
    for j in range(n + 1):
        s = 0.0
        u = j * dt
        for d in range(3):
            v = w3[j, d] - u * w3[n, d]
            s += v * v
        z[j] = math.sqrt(s)
        t[j] = u
    z[0] = 0.0
    z[n] = 0.0
    t[n] = 1.0
    cnt = n + 1
    for j in range(n):
        if j == 0 or j == n - 1:
            nxt[j] = j + 1
        else:
            x = z[j]
            y = z[j + 1]
            q = bridge_min_above(rng, x, y, dt)
            t[cnt] = np.nan  # drawn on demand by node_time
            z[cnt] = q
            nxt[j] = cnt
            nxt[cnt] = j + 1
            cnt += 1
    nxt[n] = -1
    return cnt


@nb.njit(**NB)
def node_time(rng, i, n, t, z):
    """Time of node i, drawing the in-step argmin time on first use."""
    if t[i] != t[i]:
        j = i - n
        dt = 1.0 / n
        q = z[i]
        t[i] = j * dt + argmin_time(rng, z[j] - q, z[j + 1] - q, dt)
    return t[i]


@nb.njit(**NB)
def labels_base(rng, n, z, lab, nxt, par, stack):
    """Head values along the linked list by one pass of the ancestral-line stack."""
    lab[0] = 0.0
    par[0] = -1
    top = 0
    stack[0] = 0
    p = 0
    q = nxt[0]
    while q != -1:
        if q == n:
            lab[q] = 0.0
            par[q] = -1
            break
        if z[q] >= z[p]:
            par[q] = p
            lab[q] = lab[p] + math.sqrt(z[q] - z[p]) * rng.standard_normal()
            top += 1
            stack[top] = q
        else:
            c = stack[top]
            top -= 1
            while z[stack[top]] > z[q]:
                c = stack[top]
                top -= 1
            a = stack[top]
            lab[q] = bridge_value(lab[a], z[a], lab[c], z[c], z[q], rng.standard_normal())
            par[c] = q
            par[q] = a
            top += 1
            stack[top] = q
        p = q
        q = nxt[q]


@nb.njit(**NB)
def build_base(rng, n, ws):
    t, z, lab, nxt, par, stack = ws[0], ws[1], ws[2], ws[3], ws[4], ws[5]
    cnt = lifetime_base(rng, n, t, z, nxt, ws[8])
    labels_base(rng, n, z, lab, nxt, par, stack)
    return cnt


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

@nb.njit(**NB)
def refine_piece(rng, i, t, z, lab, nxt, par, cnt):
    """Split the piece (i, nxt[i]) into three; returns the new node count.

    Both endpoint times must be resolved (see :func:`node_time`).
    """
    k = nxt[i]
    tau = t[k] - t[i]
    th = 0.5 * tau
    un = cnt
    tn = cnt + 1
    if z[i] <= z[k]:
        # minimum at the left end: i is an ancestor of k
        c = z[k] - z[i]
        zu = z[i] + bes3_bridge_mid(rng, c, tau)
        x = zu - z[i]
        q = bridge_min_above(rng, x, c, th)
        m2 = z[i] + q
        tt = t[i] + th + argmin_time(rng, x - q, c - q, th)
        ch = k
    else:
        c = z[i] - z[k]
        zu = z[k] + bes3_bridge_mid(rng, c, tau)
        y = zu - z[k]
        q = bridge_min_above(rng, c, y, th)
        m2 = z[k] + q
        tt = t[i] + argmin_time(rng, c - q, y - q, th)
        ch = i
    a = par[ch]
    while z[a] > m2:
        ch = a
        a = par[a]
    t[tn] = tt
    z[tn] = m2
    lab[tn] = bridge_value(lab[a], z[a], lab[ch], z[ch], m2, rng.standard_normal())
    par[ch] = tn
    par[tn] = a
    t[un] = t[i] + th
    z[un] = zu
    par[un] = tn
    dz = zu - m2
    if dz < 0.0:
        dz = 0.0
    lab[un] = lab[tn] + math.sqrt(dz) * rng.standard_normal()
    if z[i] <= z[k]:
        nxt[i] = un
        nxt[un] = tn
        nxt[tn] = k
    else:
        nxt[i] = tn
        nxt[tn] = un
        nxt[un] = k
    return cnt + 2


@nb.njit(**NB)
def _heap_push(hk, hv, size, key, val):
    i = size
    hk[i] = key
    hv[i] = val
    while i > 0:
        p = (i - 1) >> 1
        if hk[p] <= hk[i]:
            break
        hk[p], hk[i] = hk[i], hk[p]
        hv[p], hv[i] = hv[i], hv[p]
        i = p
    return size + 1


@nb.njit(**NB)
def _heap_pop(hk, hv, size):
    key = hk[0]
    val = hv[0]
    size -= 1
    hk[0] = hk[size]
    hv[0] = hv[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        m = left
        if left + 1 < size and hk[left + 1] < hk[left]:
            m = left + 1
        if hk[i] <= hk[m]:
            break
        hk[m], hk[i] = hk[i], hk[m]
        hv[m], hv[i] = hv[i], hv[m]
        i = m
    return key, val, size


@nb.njit(**NB)
def _value(field, sign, node, z, lab):
    if field == 0:
        return sign * lab[node]
    return sign * z[node]


@nb.njit(**NB)
def refine_extreme(rng, ws, cnt, n0, field, sign, K, tau_min, stop):
    """Refine pieces that may hold the extreme of a field.

    field 0 is the head (scale tau^{1/4}), field 1 the lifetime (scale tau^{1/2});
    sign +1 targets the minimum and -1 the maximum. A piece is refined while its
    lower envelope min(endpoint values) - K * scale can beat the running best.
    Refinement is abandoned once the best signed value drops below ``stop``.
    Pieces whose endpoint times are still unresolved are scored with the
    upper bound ``1 / n0`` for their duration.

    Returns (extreme value, node attaining it, node count, refinements, status)
    with status 1 = converged, 0 = stopped early, -1 = out of capacity.
    """
    t, z, lab, nxt, par = ws[0], ws[1], ws[2], ws[3], ws[4]
    hk, hv = ws[6], ws[7]
    cap = t.shape[0]
    expo = 0.25 if field == 0 else 0.5
    best = 1e300
    arg = 0
    i = 0
    while i != -1:
        v = _value(field, sign, i, z, lab)
        if v < best:
            best = v
            arg = i
        i = nxt[i]
    if best < stop:
        return sign * best, arg, cnt, 0, 0
    size = 0
    dt0 = 1.0 / n0
    i = 0
    while nxt[i] != -1:
        k = nxt[i]
        tau = t[k] - t[i]
        if tau != tau:
            tau = dt0
        vi = _value(field, sign, i, z, lab)
        vk = _value(field, sign, k, z, lab)
        pot = (vi if vi < vk else vk) - K * tau ** expo
        if pot < best and tau > tau_min:
            size = _heap_push(hk, hv, size, pot, i)
        i = k
    nref = 0
    status = 1
    while size > 0:
        pot, i, size = _heap_pop(hk, hv, size)
        if pot >= best:
            break
        if cnt + 2 > cap or size + 3 > cap:
            status = -1
            break
        kend = nxt[i]
        node_time(rng, i, n0, t, z)
        node_time(rng, kend, n0, t, z)
        if not t[kend] - t[i] > tau_min:
            continue  # a resolved argmin time can land on the grid point itself
        cnt = refine_piece(rng, i, t, z, lab, nxt, par, cnt)
        nref += 1
        j = i
        while j != kend:
            v = _value(field, sign, j, z, lab)
            if v < best:
                best = v
                arg = j
            j = nxt[j]
        if best < stop:
            status = 0
            break
        j = i
        while j != kend:
            k = nxt[j]
            tau = t[k] - t[j]
            vj = _value(field, sign, j, z, lab)
            vk = _value(field, sign, k, z, lab)
            pot = (vj if vj < vk else vk) - K * tau ** expo
            if pot < best and tau > tau_min:
                size = _heap_push(hk, hv, size, pot, j)
            j = k
    return sign * best, arg, cnt, nref, status


# ---------------------------------------------------------------------------
# distances in the tree
# ---------------------------------------------------------------------------

@nb.njit(**NB)
def tree_distances(ws, cnt, s):
    """d(s, u) for every node u, written to ws[9] indexed by node.

    Also fills ws[5] with the time order and ws[10] with node positions.
    Returns the number of nodes in the list.
    """
    z, nxt = ws[1], ws[3]
    order, dist, pos = ws[5], ws[9], ws[10]
    m = 0
    i = 0
    while i != -1:
        order[m] = i
        pos[i] = m
        m += 1
        i = nxt[i]
    ps = pos[s]
    zs = z[s]
    run = zs
    for q in range(ps, m):
        u = order[q]
        if z[u] < run:
            run = z[u]
        dist[u] = zs + z[u] - 2.0 * run
    run = zs
    for q in range(ps, -1, -1):
        u = order[q]
        if z[u] < run:
            run = z[u]
        dist[u] = zs + z[u] - 2.0 * run
    return m


# ---------------------------------------------------------------------------
# grid-minimum head with a knot stack
# ---------------------------------------------------------------------------

@nb.njit(**NB)
def head_knot_stack(rng, z, dh, kh, kv):
    """Head process for a given lifetime grid, using grid minima.

    The current path is kept as (height, value) knots at spacing dh; each step
    truncates to m = min(z_i, z_{i+1}) (bridge value at m) and grows back up to
    z_{i+1} with Gaussian increments.
    """
    n = z.shape[0] - 1
    out = np.empty(n + 1)
    top = 0
    kh[0] = 0.0
    kv[0] = 0.0
    # grow to z[0] (0 for an excursion)
    out[0] = 0.0
    h = 0.0
    while h + dh < z[0]:
        h += dh
        top += 1
        kh[top] = h
        kv[top] = kv[top - 1] + math.sqrt(dh) * rng.standard_normal()
    if z[0] > kh[top]:
        top += 1
        kv[top] = kv[top - 1] + math.sqrt(z[0] - kh[top - 1]) * rng.standard_normal()
        kh[top] = z[0]
    out[0] = kv[top]
    for i in range(n):
        m = z[i] if z[i] < z[i + 1] else z[i + 1]
        if kh[top] > m:
            hi_h = kh[top]
            hi_v = kv[top]
            top -= 1
            while kh[top] > m:
                hi_h = kh[top]
                hi_v = kv[top]
                top -= 1
            if kh[top] < m:
                v = bridge_value(kv[top], kh[top], hi_v, hi_h, m, rng.standard_normal())
                top += 1
                kh[top] = m
                kv[top] = v
        h = kh[top]
        target = z[i + 1]
        while h + dh < target:
            h += dh
            top += 1
            kh[top] = h
            kv[top] = kv[top - 1] + math.sqrt(dh) * rng.standard_normal()
        if target > kh[top]:
            top += 1
            kv[top] = kv[top - 1] + math.sqrt(target - kh[top - 1]) * rng.standard_normal()
            kh[top] = target
        out[i + 1] = kv[top]
    return out


# ---------------------------------------------------------------------------
# batch kernels
# ---------------------------------------------------------------------------

N_BASIC = 21


@nb.njit(**NB)
def batch_basic(rng, n, m, K, tau_min, stop, stop_h, height_mode, ws, out):
    """Per-sample statistics of unconditioned normalized snakes.

    Columns: 0 grid min, 1 refined min, 2 refine status, 3 lifetime max
    (refined if requested), 4 head at t=1/2, 5 grid max, 6 ISE mass in [0, 0.2],
    7-9 joint positivity at 1, 2, 3 distinct uniform grid times, 10 max head of
    W^[U] (U uniform on grid), 11 head of W^[U] at r=1/2, 12 ISE mass of W^[U]
    left of 0, 13 lifetime height of W^[U], 14 ISE mass of W left of 0,
    15 ISE first moment, 16 refinements, 17 nodes, 18 grid lifetime max,
    19 time of the refined minimum, 20 joint positivity at 4 distinct times.

    Min refinement stops once the minimum is known to lie below
    ``stop - stop_h * sqrt(grid height + 4 sqrt(dt))``. ``height_mode`` selects
    lifetime-max refinement: 0 never, 1 always, 2 only when the min converged.
    """
    dt = 1.0 / n
    lab = ws[2]
    z = ws[1]
    for s in range(m):
        cnt = build_base(rng, n, ws)
        gmin = 0.0
        gmax = 0.0
        zmax = 0.0
        ise02 = 0.0
        left0 = 0
        mom = 0.0
        for j in range(n):
            v = lab[j]
            if v < gmin:
                gmin = v
            if v > gmax:
                gmax = v
            if z[j] > zmax:
                zmax = z[j]
            if v >= 0.0 and v <= 0.2:
                ise02 += dt
            if v < 0.0:
                left0 += 1
            mom += v
        # uniform distinct nonzero grid indices
        i1 = 1 + int(rng.random() * (n - 1))
        i2 = i1
        while i2 == i1:
            i2 = 1 + int(rng.random() * (n - 1))
        i3 = i1
        while i3 == i1 or i3 == i2:
            i3 = 1 + int(rng.random() * (n - 1))
        i4 = i1
        while i4 == i1 or i4 == i2 or i4 == i3:
            i4 = 1 + int(rng.random() * (n - 1))
        p1 = 1.0 if lab[i1] > 0.0 else 0.0
        p2 = 1.0 if (p1 > 0.0 and lab[i2] > 0.0) else 0.0
        p3 = 1.0 if (p2 > 0.0 and lab[i3] > 0.0) else 0.0
        p4 = 1.0 if (p3 > 0.0 and lab[i4] > 0.0) else 0.0
        # re-root at a uniform grid time
        u = int(rng.random() * n)
        hu = lab[u]
        lu = 0
        for j in range(n):
            if lab[j] < hu:
                lu += 1
        mid = (u + n // 2) % n
        # lifetime height seen from u (exact infima through the inserted minima)
        nn = tree_distances(ws, cnt, u)
        ecc = 0.0
        dist = ws[9]
        for q in range(nn):
            d = dist[ws[5][q]]
            if d > ecc:
                ecc = d
        stop_s = stop - stop_h * math.sqrt(zmax + 4.0 * math.sqrt(dt))
        wmin, arg, cnt2, nref, status = refine_extreme(rng, ws, cnt, n, 0, 1.0, K, tau_min, stop_s)
        zref = zmax
        if height_mode == 1 or (height_mode == 2 and status == 1):
            zr, _, cnt2, nr2, st2 = refine_extreme(rng, ws, cnt2, n, 1, -1.0, K, tau_min, -1e300)
            zref = zr
            nref += nr2
        out[s, 0] = gmin
        out[s, 1] = wmin
        out[s, 2] = status
        out[s, 3] = zref
        out[s, 4] = lab[n // 2]
        out[s, 5] = gmax
        out[s, 6] = ise02
        out[s, 7] = p1
        out[s, 8] = p2
        out[s, 9] = p3
        out[s, 10] = gmax - hu
        out[s, 11] = lab[mid] - hu
        out[s, 12] = lu * dt
        out[s, 13] = ecc
        out[s, 14] = left0 * dt
        out[s, 15] = mom * dt
        out[s, 16] = nref
        out[s, 17] = cnt2
        out[s, 18] = zmax
        out[s, 19] = node_time(rng, arg, n, ws[0], z)
        out[s, 20] = p4


N_COND = 15


@nb.njit(**NB)
def batch_conditioned(rng, n, m, K, tau_min, delta, M, level, ws, out):
    """Statistics of snakes re-rooted at the (refined) minimum of the head.

    Columns: 0 refined min, 1 grid min, 2 max of re-rooted head (refined),
    3 height of the re-rooted tree, 4 integral of the re-rooted lifetime,
    5 re-rooted head at r ~ 1/2, 6 ISE mass in [0, 0.2], 7 windowed integral
    of r^{-3/2} over the scale window for the tip functional 1{w > level},
    8 offset between grid argmin and refined min, 9 time of the minimum,
    10 status of the min refinement, 11 refinements, 12 ISE mass left of 0
    (grid), 13 windowed integral for the constant functional, 14 grid max of
    the head minus the refined min.
    """
    dt = 1.0 / n
    t, z, lab = ws[0], ws[1], ws[2]
    for s in range(m):
        cnt = build_base(rng, n, ws)
        gmin = 0.0
        garg = 0
        for j in range(n):
            if lab[j] < gmin:
                gmin = lab[j]
                garg = j
        wmin, arg, cnt, nref, status = refine_extreme(rng, ws, cnt, n, 0, 1.0, K, tau_min, -1e300)
        wmax, _, cnt, nr2, _ = refine_extreme(rng, ws, cnt, n, 0, -1.0, K, tau_min, -1e300)
        nn = tree_distances(ws, cnt, arg)
        dist = ws[9]
        order = ws[5]
        ecc = 0.0
        for q in range(nn):
            d = dist[order[q]]
            if d > ecc:
                ecc = d
        integ = 0.0
        ise02 = 0.0
        left0 = 0.0
        jw = 0.0
        jc = 0.0
        for j in range(n):
            d = dist[j]
            integ += d
            w = lab[j] - wmin
            if w >= 0.0 and w <= 0.2:
                ise02 += dt
            if w < 0.0:
                left0 += dt
            if d > 0.0:
                b = M * M / (d * d)
                a = delta * delta / (d * d)
                if b > a:
                    jc += 2.0 * (1.0 / math.sqrt(a) - 1.0 / math.sqrt(b))
                if w > 0.0:
                    a2 = level ** 4 / w ** 4
                    if a2 > a:
                        a = a2
                    if b > a:
                        jw += 2.0 * (1.0 / math.sqrt(a) - 1.0 / math.sqrt(b))
        tm = node_time(rng, arg, n, t, z) + 0.5
        if tm >= 1.0:
            tm -= 1.0
        jm = int(tm * n + 0.5) % n
        out[s, 0] = wmin
        out[s, 1] = gmin
        out[s, 2] = wmax - wmin
        out[s, 3] = ecc
        out[s, 4] = integ * dt
        out[s, 5] = lab[jm] - wmin
        out[s, 6] = ise02
        out[s, 7] = jw * dt
        out[s, 8] = lab[garg] - wmin
        out[s, 9] = t[arg]  # resolved above
        out[s, 10] = status
        out[s, 11] = nref + nr2
        out[s, 12] = left0
        out[s, 13] = jc * dt
        gmax = lab[0]
        for j in range(n):
            if lab[j] > gmax:
                gmax = lab[j]
        out[s, 14] = gmax - wmin


@nb.njit(**NB)
def single_snake(rng, n, K, tau_min, refine_min, refine_max, stop, ws):
    """One sample; returns (node count, min, argmin node, max, argmax node, status).

    Min refinement is abandoned once the minimum is known to be below ``stop``.
    """
    cnt = build_base(rng, n, ws)
    lab = ws[2]
    wmin = 0.0
    amin = 0
    wmax = 0.0
    amax = 0
    for j in range(n + 1):
        if lab[j] < wmin:
            wmin = lab[j]
            amin = j
        if lab[j] > wmax:
            wmax = lab[j]
            amax = j
    for i in range(n + 1, 2 * n - 1):
        node_time(rng, i, n, ws[0], ws[1])
    status = 1
    if refine_min:
        wmin, amin, cnt, _, status = refine_extreme(rng, ws, cnt, n, 0, 1.0, K, tau_min, stop)
    if refine_max:
        wmax, amax, cnt, _, _ = refine_extreme(rng, ws, cnt, n, 0, -1.0, K, tau_min, -1e300)
    return cnt, wmin, amin, wmax, amax, status


# ---------------------------------------------------------------------------
# killed Brownian motion with an inverse-square potential
# ---------------------------------------------------------------------------

@nb.njit(**NB)
def killed_bm(rng, x, t, n_steps, m, c, out):
    """Weights and endpoints of Brownian paths from x on [0, t].

    out[k, 0] is prod_i P(no zero in step i | ends) * exp(-c * sum_i dt / (a_i b_i)),
    the survival-weighted potential factor; out[k, 1] is the endpoint. Paths
    that reach a nonpositive grid value get weight 0.
    """
    dt = t / n_steps
    sd = math.sqrt(dt)
    for k in range(m):
        a = x
        logw = 0.0
        dead = False
        for i in range(n_steps):
            b = a + sd * rng.standard_normal()
            if b <= 0.0:
                dead = True
                break
            logw += math.log1p(-math.exp(-2.0 * a * b / dt)) - c * dt / (a * b)
            a = b
        out[k, 0] = 0.0 if dead else math.exp(logw)
        out[k, 1] = a
